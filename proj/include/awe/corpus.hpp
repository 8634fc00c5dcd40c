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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "awe/common.hpp"

namespace awe {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

/// Lowercases (ASCII), splits on whitespace and trims leading/trailing
/// punctuation. Tokens that are punctuation only disappear. Invalid UTF-8 is
/// replaced by U+FFFD and counted.
class Tokenizer {
 public:
  void tokenize(std::string_view text, std::vector<std::string>& out);
  std::vector<std::string> tokenize(std::string_view text);

  /// Normalizes one whitespace-free raw token into `out`. Returns false when
  /// nothing is left.
  bool normalize(std::string_view raw, std::string& out);

  std::size_t invalid_sequences() const { return invalid_sequences_; }

 private:
  std::size_t invalid_sequences_ = 0;
};

std::vector<std::string> tokenize(std::string_view text);

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

struct VocabOptions {
  std::uint64_t min_count = 5;
  std::size_t max_size = 0;  // 0: no cap
  double subsample_t = 1e-4;  // 0 disables subsampling
  std::size_t neg_table_size = 10'000'000;
  double alpha = 0.75;
};

using WordCounts = std::unordered_map<std::string, std::uint64_t>;

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Filters by min_count, applies the size cap and orders words by
  /// descending count, ties lexicographic.
  static Vocabulary from_counts(const WordCounts& counts,
                                const VocabOptions& options);

  /// Restores a vocabulary in exactly the given order; no filtering.
  static Vocabulary from_entries(std::vector<std::string> words,
                                 std::vector<std::uint64_t> counts,
                                 const VocabOptions& options);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  const std::string& word(WordId id) const { return words_.at(id); }
  const std::vector<std::string>& words() const { return words_; }
  std::uint64_t count(WordId id) const { return counts_.at(id); }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t total_tokens() const { return total_tokens_; }
  double keep_prob(WordId id) const { return keep_prob_[id]; }
  std::span<const WordId> neg_table() const { return neg_table_; }
  const VocabOptions& options() const { return options_; }

  std::optional<WordId> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  WordId sample_negative(Rng& rng) const {
    std::uniform_int_distribution<std::size_t> pick(0, neg_table_.size() - 1);
    return neg_table_[pick(rng)];
  }

  /// `word<TAB>count`, descending count, ties lexicographic.
  void save_tsv(std::ostream& out) const;
  void save_tsv(const std::filesystem::path& path) const;
  static Vocabulary load_tsv(std::istream& in, const VocabOptions& options);

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  void finalize();

  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, WordId, StringHash, std::equal_to<>> index_;
  std::uint64_t total_tokens_ = 0;
  std::vector<double> keep_prob_;
  std::vector<WordId> neg_table_;
  VocabOptions options_;
};

Vocabulary build_vocab(std::span<const std::string> tokens,
                       const VocabOptions& options);

// ---------------------------------------------------------------------------
// Corpus files
// ---------------------------------------------------------------------------

/// Byte range of one corpus file.
struct Segment {
  std::filesystem::path file;
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
};

/// Contiguous slice of the concatenated corpus handed to one worker.
using Shard = std::vector<Segment>;

std::vector<Shard> make_shards(std::span<const std::filesystem::path> files,
                               std::size_t workers);

/// Streams sentences out of a shard. A newline ends a sentence; lines longer
/// than `max_sentence` tokens are cut. A token belongs to the segment its
/// first byte lies in.
class SentenceReader {
 public:
  static constexpr std::size_t kMaxSentence = 1000;

  explicit SentenceReader(Shard shard,
                          std::size_t max_sentence = kMaxSentence);

  bool next(std::vector<std::string>& sentence);

  const Tokenizer& tokenizer() const { return tokenizer_; }

 private:
  bool open_next_segment();
  bool read_raw_token(std::string& raw, bool& newline_after);

  Shard shard_;
  std::size_t max_sentence_;
  std::size_t segment_index_ = 0;
  std::ifstream in_;
  std::uint64_t position_ = 0;
  std::uint64_t end_ = 0;
  bool segment_open_ = false;
  Tokenizer tokenizer_;
  std::string raw_;
  std::string token_;
};

WordCounts count_words(std::span<const std::filesystem::path> files);

Vocabulary build_vocab_from_files(std::span<const std::filesystem::path> files,
                                  const VocabOptions& options);

// ---------------------------------------------------------------------------
// Training windows
// ---------------------------------------------------------------------------

struct TrainingWindow {
  WordId center = 0;
  std::vector<WordId> context;

  bool operator==(const TrainingWindow&) const = default;
};

/// Maps tokens to ids, dropping out-of-vocabulary tokens.
void to_ids(std::span<const std::string> tokens, const Vocabulary& vocab,
            std::vector<WordId>& ids);

/// Turns one sentence of word ids into training windows: subsampling first,
/// then a window radius drawn uniformly from {1..b_max} per position.
class WindowGenerator {
 public:
  WindowGenerator(const Vocabulary& vocab, int b_max);

  template <typename Fn>
  void for_each_window(std::span<const WordId> sentence, Rng& rng, Fn&& fn) {
    subsample(sentence, rng);
    std::uniform_int_distribution<int> radius(1, b_max_);
    const auto n = static_cast<std::ptrdiff_t>(kept_.size());
    for (std::ptrdiff_t pos = 0; pos < n; ++pos) {
      const std::ptrdiff_t b = radius(rng);
      window_.center = kept_[pos];
      window_.context.clear();
      for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, pos - b);
           j <= std::min(n - 1, pos + b); ++j) {
        if (j != pos) window_.context.push_back(kept_[j]);
      }
      if (!window_.context.empty()) fn(static_cast<const TrainingWindow&>(window_));
    }
  }

  int b_max() const { return b_max_; }

 private:
  void subsample(std::span<const WordId> sentence, Rng& rng);

  const Vocabulary* vocab_;
  int b_max_;
  std::vector<WordId> kept_;
  TrainingWindow window_;
};

/// Collects the windows of a token stream treated as a single sentence.
std::vector<TrainingWindow> windows(std::span<const std::string> tokens,
                                    const Vocabulary& vocab, int b_max,
                                    Rng& rng);

/// Same, one sentence per element.
std::vector<TrainingWindow> windows(
    std::span<const std::vector<std::string>> sentences,
    const Vocabulary& vocab, int b_max, Rng& rng);

}  // namespace awe
