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

#include "awe/subword.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

namespace awe {

namespace {

constexpr std::size_t kMaxSetSize = 4;

std::string escape_unit(std::string_view unit) {
  std::string out;
  for (const char c : unit) {
    if (c == ',' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> split_units(std::string_view text) {
  std::vector<std::string> out(1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size()) {
      out.back().push_back(text[++i]);
    } else if (text[i] == ',') {
      out.emplace_back();
    } else {
      out.back().push_back(text[i]);
    }
  }
  return out;
}

}  // namespace

std::optional<PartOfSpeech> parse_pos(std::string_view text) {
  if (text == "noun" || text == "n" || text == "NOUN") return PartOfSpeech::Noun;
  if (text == "verb" || text == "v" || text == "VERB") return PartOfSpeech::Verb;
  if (text == "adj" || text == "a" || text == "ADJ" || text == "adjective") {
    return PartOfSpeech::Adj;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// LemmaTable

LemmaTable LemmaTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read lemma resource " + path.string());
  return parse(in);
}

LemmaTable LemmaTable::parse(std::istream& in) {
  LemmaTable table;
  Tokenizer tokenizer;
  std::string line;
  std::string word;
  std::string lemma;
  std::size_t line_no = 0;
  std::size_t skipped = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw Error("lemma resource line " + std::to_string(line_no) +
                  ": expected word<TAB>pos<TAB>lemma");
    }
    const auto pos = parse_pos(std::string_view(line).substr(t1 + 1, t2 - t1 - 1));
    if (!pos) {
      ++skipped;
      continue;
    }
    if (!tokenizer.normalize(std::string_view(line).substr(0, t1), word) ||
        !tokenizer.normalize(std::string_view(line).substr(t2 + 1), lemma)) {
      ++skipped;
      continue;
    }
    table.add(word, *pos, lemma);
  }
  if (in.bad()) throw Error("error while reading lemma resource");
  if (skipped > 0) {
    log_warning(std::to_string(skipped) +
                " lemma entries skipped (unknown part of speech or empty)");
  }
  return table;
}

void LemmaTable::add(const std::string& word, PartOfSpeech pos,
                     const std::string& lemma) {
  auto& slot = entries_[word][static_cast<std::size_t>(pos)];
  if (!slot) slot = lemma;
}

std::optional<std::string_view> LemmaTable::lemma(std::string_view word,
                                                  PartOfSpeech pos) const {
  const auto it = entries_.find(word);
  if (it == entries_.end()) return std::nullopt;
  const auto& slot = it->second[static_cast<std::size_t>(pos)];
  if (!slot) return std::nullopt;
  return std::string_view(*slot);
}

// ---------------------------------------------------------------------------
// SubwordMap

UnitId SubwordMap::intern(const std::string& text) {
  const auto [it, inserted] =
      unit_index_.emplace(text, static_cast<UnitId>(units_.size()));
  if (inserted) units_.push_back(text);
  return it->second;
}

std::optional<UnitId> SubwordMap::find_unit(std::string_view text) const {
  const auto it = unit_index_.find(std::string(text));
  if (it == unit_index_.end()) return std::nullopt;
  return it->second;
}

SubwordMap SubwordMap::build(const Vocabulary& vocab, const LemmaTable& lemmas) {
  SubwordMap map;
  map.offsets_.reserve(vocab.size() + 1);
  constexpr PartOfSpeech kOrder[] = {PartOfSpeech::Noun, PartOfSpeech::Verb,
                                     PartOfSpeech::Adj};
  for (WordId w = 0; w < vocab.size(); ++w) {
    const auto begin = map.ids_.size();
    map.ids_.push_back(map.intern(vocab.word(w)));
    for (const auto pos : kOrder) {
      const auto lemma = lemmas.lemma(vocab.word(w), pos);
      if (!lemma) continue;
      const UnitId id = map.intern(std::string(*lemma));
      if (std::find(map.ids_.begin() + static_cast<std::ptrdiff_t>(begin),
                    map.ids_.end(), id) == map.ids_.end()) {
        map.ids_.push_back(id);
      }
    }
    map.offsets_.push_back(static_cast<std::uint32_t>(map.ids_.size()));
  }
  // Out-of-vocabulary words can still be composed from units that exist.
  lemmas.for_each([&](const std::string& word, const auto& entry) {
    if (vocab.contains(word)) return;
    std::vector<UnitId> set;
    if (const auto id = map.find_unit(word)) set.push_back(*id);
    for (const auto& lemma : entry) {
      if (!lemma) continue;
      const auto id = map.find_unit(*lemma);
      if (id && std::find(set.begin(), set.end(), *id) == set.end()) {
        set.push_back(*id);
      }
    }
    if (!set.empty()) map.oov_.emplace(word, std::move(set));
  });
  return map;
}

SubwordMap SubwordMap::singleton(const Vocabulary& vocab) {
  return build(vocab, LemmaTable{});
}

SubwordMap SubwordMap::from_parts(
    const Vocabulary& vocab, std::vector<std::string> units,
    const std::vector<std::vector<UnitId>>& sets,
    std::map<std::string, std::vector<UnitId>, std::less<>> oov) {
  if (sets.size() != vocab.size()) {
    throw Error("subword map covers " + std::to_string(sets.size()) +
                " words but the vocabulary has " + std::to_string(vocab.size()));
  }
  SubwordMap map;
  for (auto& unit : units) {
    if (!map.unit_index_
             .emplace(unit, static_cast<UnitId>(map.units_.size()))
             .second) {
      throw Error("duplicate subword unit '" + unit + "'");
    }
    map.units_.push_back(std::move(unit));
  }
  auto check_set = [&](std::string_view owner, const std::vector<UnitId>& set) {
    if (set.empty() || set.size() > kMaxSetSize) {
      throw Error("subword set of '" + std::string(owner) +
                  "' has invalid size " + std::to_string(set.size()));
    }
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set[i] >= map.units_.size()) {
        throw Error("subword set of '" + std::string(owner) +
                    "' references unknown unit " + std::to_string(set[i]));
      }
      if (std::find(set.begin(), set.begin() + static_cast<std::ptrdiff_t>(i),
                    set[i]) != set.begin() + static_cast<std::ptrdiff_t>(i)) {
        throw Error("subword set of '" + std::string(owner) +
                    "' repeats a unit");
      }
    }
  };
  for (WordId w = 0; w < vocab.size(); ++w) {
    const auto& set = sets[w];
    check_set(vocab.word(w), set);
    const auto surface = map.find_unit(vocab.word(w));
    if (!surface || std::find(set.begin(), set.end(), *surface) == set.end()) {
      throw Error("subword set of '" + vocab.word(w) +
                  "' lacks its surface form");
    }
    map.ids_.insert(map.ids_.end(), set.begin(), set.end());
    map.offsets_.push_back(static_cast<std::uint32_t>(map.ids_.size()));
  }
  for (const auto& [word, set] : oov) check_set(word, set);
  map.oov_ = std::move(oov);
  return map;
}

std::vector<UnitId> SubwordMap::compose(std::string_view word,
                                        const Vocabulary& vocab) const {
  if (const auto id = vocab.find(word)) {
    const auto set = units_of(*id);
    return {set.begin(), set.end()};
  }
  if (const auto it = oov_.find(word); it != oov_.end()) return it->second;
  if (const auto unit = find_unit(word)) return {*unit};
  return {};
}

void SubwordMap::save_tsv(std::ostream& out, const Vocabulary& vocab) const {
  for (WordId w = 0; w < vocab.size(); ++w) {
    out << vocab.word(w) << '\t';
    bool first = true;
    for (const UnitId id : units_of(w)) {
      if (!first) out << ',';
      out << escape_unit(units_[id]);
      first = false;
    }
    out << '\n';
  }
}

SubwordMap SubwordMap::load_tsv(std::istream& in, const Vocabulary& vocab) {
  std::vector<std::optional<std::vector<std::string>>> by_word(vocab.size());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error("subword map line " + std::to_string(line_no) +
                  ": expected word<TAB>units");
    }
    const auto id = vocab.find(std::string_view(line).substr(0, tab));
    if (!id) {
      throw Error("subword map line " + std::to_string(line_no) +
                  ": word not in vocabulary");
    }
    by_word[*id] = split_units(std::string_view(line).substr(tab + 1));
  }
  SubwordMap staging;
  std::vector<std::vector<UnitId>> sets(vocab.size());
  for (WordId w = 0; w < vocab.size(); ++w) {
    if (!by_word[w]) {
      throw Error("subword map has no entry for '" + vocab.word(w) + "'");
    }
    for (const auto& unit : *by_word[w]) sets[w].push_back(staging.intern(unit));
  }
  return from_parts(vocab, std::move(staging.units_), sets, {});
}

}  // namespace awe
