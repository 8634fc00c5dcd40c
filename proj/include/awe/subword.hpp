// Copyright 2026 The AWE Embedding Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "awe/common.hpp"
#include "awe/corpus.hpp"

namespace awe {

using UnitId = std::uint32_t;

enum class PartOfSpeech : std::uint8_t { Noun = 0, Verb = 1, Adj = 2 };

std::optional<PartOfSpeech> parse_pos(std::string_view text);

/// (word, part of speech) -> lemma, read from `word<TAB>pos<TAB>lemma` lines.
class LemmaTable {
 public:
  static LemmaTable load(const std::filesystem::path& path);
  static LemmaTable parse(std::istream& in);

  /// The first entry for a (word, pos) pair wins.
  void add(const std::string& word, PartOfSpeech pos, const std::string& lemma);
  std::optional<std::string_view> lemma(std::string_view word,
                                        PartOfSpeech pos) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [word, lemmas] : entries_) fn(word, lemmas);
  }

 private:
  using Lemmas = std::array<std::optional<std::string>, 3>;
  std::map<std::string, Lemmas, std::less<>> entries_;
};

/// Per-word subword sets S_w for AWE-S. S_w holds the surface form followed by
/// the distinct noun, verb and adjective lemmas of w. Unit ids are assigned in
/// first-seen order walking the vocabulary by index.
class SubwordMap {
 public:
  static SubwordMap build(const Vocabulary& vocab, const LemmaTable& lemmas);
  /// Every S_w = {w}; unit id equals word id.
  static SubwordMap singleton(const Vocabulary& vocab);
  /// Rebuilds from persisted parts, validating every invariant.
  static SubwordMap from_parts(
      const Vocabulary& vocab, std::vector<std::string> units,
      const std::vector<std::vector<UnitId>>& sets,
      std::map<std::string, std::vector<UnitId>, std::less<>> oov);

  std::size_t unit_count() const { return units_.size(); }
  std::size_t vocab_size() const { return offsets_.size() - 1; }
  const std::string& unit(UnitId id) const { return units_.at(id); }
  const std::vector<std::string>& units() const { return units_; }
  std::optional<UnitId> find_unit(std::string_view text) const;

  std::span<const UnitId> units_of(WordId word) const {
    return {ids_.data() + offsets_[word], ids_.data() + offsets_[word + 1]};
  }

  /// Units for any string: the set of a vocabulary word, otherwise whatever
  /// surface and lemma units exist for it. Empty when nothing is known.
  std::vector<UnitId> compose(std::string_view word,
                              const Vocabulary& vocab) const;

  const std::map<std::string, std::vector<UnitId>, std::less<>>& oov_sets()
      const {
    return oov_;
  }

  /// `word<TAB>unit1,unit2,...`, one line per vocabulary word in id order.
  /// Commas and backslashes inside units are backslash-escaped.
  void save_tsv(std::ostream& out, const Vocabulary& vocab) const;
  static SubwordMap load_tsv(std::istream& in, const Vocabulary& vocab);

 private:
  UnitId intern(const std::string& text);

  std::vector<std::string> units_;
  std::unordered_map<std::string, UnitId> unit_index_;
  std::vector<std::uint32_t> offsets_{0};
  std::vector<UnitId> ids_;
  std::map<std::string, std::vector<UnitId>, std::less<>> oov_;
};

}  // namespace awe
