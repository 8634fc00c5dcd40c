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

#include "awe/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

namespace awe {

namespace {

bool is_space(int c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

constexpr char32_t kReplacement = 0xFFFD;

bool is_punctuation(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0x00A1: case 0x00AB: case 0x00B7: case 0x00BB: case 0x00BF:
    case 0x2010: case 0x2011: case 0x2012: case 0x2013: case 0x2014:
    case 0x2015: case 0x2018: case 0x2019: case 0x201A: case 0x201C:
    case 0x201D: case 0x201E: case 0x2026: case 0x2039: case 0x203A:
      return true;
    default:
      return false;
  }
}

void append_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes one code point starting at text[i]; advances i. Returns
// kReplacement (consuming one byte) on a malformed sequence.
char32_t decode_utf8(std::string_view text, std::size_t& i, bool& invalid) {
  const auto b0 = static_cast<unsigned char>(text[i]);
  invalid = false;
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int extra = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((b0 & 0xE0) == 0xC0) {
    extra = 1; cp = b0 & 0x1F; min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2; cp = b0 & 0x0F; min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3; cp = b0 & 0x07; min = 0x10000;
  } else {
    ++i;
    invalid = true;
    return kReplacement;
  }
  if (i + static_cast<std::size_t>(extra) >= text.size()) {
    ++i;
    invalid = true;
    return kReplacement;
  }
  for (int k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(text[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      invalid = true;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++i;
    invalid = true;
    return kReplacement;
  }
  i += static_cast<std::size_t>(extra) + 1;
  return cp;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tokenizer

bool Tokenizer::normalize(std::string_view raw, std::string& out) {
  out.clear();
  thread_local std::vector<char32_t> cps;
  cps.clear();
  for (std::size_t i = 0; i < raw.size();) {
    bool invalid = false;
    cps.push_back(decode_utf8(raw, i, invalid));
    if (invalid) {
      if (invalid_sequences_ < 5) {
        log_warning("invalid UTF-8 byte replaced in token '" +
                    std::string(raw) + "'");
      }
      ++invalid_sequences_;
    }
  }
  std::size_t first = 0;
  std::size_t last = cps.size();
  while (first < last && is_punctuation(cps[first])) ++first;
  while (last > first && is_punctuation(cps[last - 1])) --last;
  for (std::size_t k = first; k < last; ++k) {
    char32_t cp = cps[k];
    if (cp >= 'A' && cp <= 'Z') cp = cp - 'A' + 'a';
    append_utf8(cp, out);
  }
  return !out.empty();
}

void Tokenizer::tokenize(std::string_view text, std::vector<std::string>& out) {
  std::string token;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start && normalize(text.substr(start, i - start), token)) {
      out.push_back(token);
    }
  }
}

std::vector<std::string> Tokenizer::tokenize(std::string_view text) {
  std::vector<std::string> out;
  tokenize(text, out);
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  Tokenizer tokenizer;
  return tokenizer.tokenize(text);
}

// ---------------------------------------------------------------------------
// Vocabulary

namespace {

void check_options(const VocabOptions& options) {
  if (options.min_count < 1) {
    throw std::invalid_argument("min_count must be >= 1");
  }
  if (!(options.subsample_t >= 0.0)) {
    throw std::invalid_argument("subsample threshold must be >= 0");
  }
  if (!(options.alpha > 0.0 && options.alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1]");
  }
}

}  // namespace

Vocabulary Vocabulary::from_counts(const WordCounts& counts,
                                   const VocabOptions& options) {
  check_options(options);
  if (counts.empty()) throw Error("empty corpus");
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto& [word, count] : counts) {
    if (count >= options.min_count) kept.emplace_back(word, count);
  }
  if (kept.empty()) throw Error("no words retained");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (options.max_size > 0 && kept.size() > options.max_size) {
    kept.resize(options.max_size);
  }
  std::vector<std::string> words;
  std::vector<std::uint64_t> word_counts;
  words.reserve(kept.size());
  word_counts.reserve(kept.size());
  for (auto& [word, count] : kept) {
    words.push_back(std::move(word));
    word_counts.push_back(count);
  }
  return from_entries(std::move(words), std::move(word_counts), options);
}

Vocabulary Vocabulary::from_entries(std::vector<std::string> words,
                                    std::vector<std::uint64_t> counts,
                                    const VocabOptions& options) {
  check_options(options);
  if (words.size() != counts.size()) {
    throw std::invalid_argument("word and count lists differ in length");
  }
  if (words.empty()) throw Error("no words retained");
  Vocabulary vocab;
  vocab.words_ = std::move(words);
  vocab.counts_ = std::move(counts);
  vocab.options_ = options;
  vocab.finalize();
  return vocab;
}

void Vocabulary::finalize() {
  const std::size_t n = words_.size();
  if (options_.neg_table_size < n) {
    throw std::invalid_argument(
        "negative table size must be at least the vocabulary size");
  }
  if (n > std::numeric_limits<WordId>::max()) {
    throw std::invalid_argument("vocabulary too large for 32-bit ids");
  }
  index_.clear();
  index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (counts_[i] == 0) {
      throw std::invalid_argument("word '" + words_[i] + "' has zero count");
    }
    if (!index_.emplace(words_[i], static_cast<WordId>(i)).second) {
      throw Error("duplicate vocabulary word '" + words_[i] + "'");
    }
  }
  total_tokens_ = std::accumulate(counts_.begin(), counts_.end(),
                                  std::uint64_t{0});

  keep_prob_.assign(n, 1.0);
  if (options_.subsample_t > 0.0) {
    const double t = options_.subsample_t;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = static_cast<double>(counts_[i]) /
                       static_cast<double>(total_tokens_);
      keep_prob_[i] = std::min(1.0, std::sqrt(t / f) + t / f);
    }
  }

  // Cumulative rounding: id i owns round(C_i * size) - round(C_{i-1} * size)
  // slots, so its share is within one slot of the exact count^alpha share.
  std::vector<double> weight(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weight[i] = std::pow(static_cast<double>(counts_[i]), options_.alpha);
    z += weight[i];
  }
  const std::size_t size = options_.neg_table_size;
  neg_table_.assign(size, 0);
  double cumulative = 0.0;
  std::size_t filled = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cumulative += weight[i];
    std::size_t upto =
        i + 1 == n ? size
                   : static_cast<std::size_t>(
                         std::llround(cumulative / z * static_cast<double>(size)));
    upto = std::min(upto, size);
    for (; filled < upto; ++filled) neg_table_[filled] = static_cast<WordId>(i);
  }
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  const auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save_tsv(std::ostream& out) const {
  std::vector<WordId> order(words_.size());
  std::iota(order.begin(), order.end(), WordId{0});
  std::sort(order.begin(), order.end(), [&](WordId a, WordId b) {
    return counts_[a] != counts_[b] ? counts_[a] > counts_[b]
                                    : words_[a] < words_[b];
  });
  for (const WordId id : order) out << words_[id] << '\t' << counts_[id] << '\n';
}

void Vocabulary::save_tsv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write vocabulary to " + path.string());
  save_tsv(out);
  if (!out) throw Error("failed writing vocabulary to " + path.string());
}

Vocabulary Vocabulary::load_tsv(std::istream& in, const VocabOptions& options) {
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error("vocabulary line " + std::to_string(line_no) +
                  ": expected word<TAB>count");
    }
    words.push_back(line.substr(0, tab));
    try {
      counts.push_back(std::stoull(line.substr(tab + 1)));
    } catch (const std::exception&) {
      throw Error("vocabulary line " + std::to_string(line_no) +
                  ": bad count");
    }
  }
  if (words.empty()) throw Error("empty corpus");
  return from_entries(std::move(words), std::move(counts), options);
}

Vocabulary build_vocab(std::span<const std::string> tokens,
                       const VocabOptions& options) {
  WordCounts counts;
  for (const auto& token : tokens) ++counts[token];
  return Vocabulary::from_counts(counts, options);
}

// ---------------------------------------------------------------------------
// Corpus files

std::vector<Shard> make_shards(std::span<const std::filesystem::path> files,
                               std::size_t workers) {
  if (workers == 0) throw std::invalid_argument("workers must be >= 1");
  std::vector<std::uint64_t> sizes;
  std::uint64_t total = 0;
  for (const auto& file : files) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(file, ec);
    if (ec) throw Error("cannot read corpus file " + file.string());
    sizes.push_back(size);
    total += size;
  }
  std::vector<Shard> shards(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::uint64_t lo = total * w / workers;
    const std::uint64_t hi = total * (w + 1) / workers;
    std::uint64_t offset = 0;
    for (std::size_t f = 0; f < files.size(); ++f) {
      const std::uint64_t fb = offset;
      const std::uint64_t fe = offset + sizes[f];
      offset = fe;
      const std::uint64_t b = std::max(lo, fb);
      const std::uint64_t e = std::min(hi, fe);
      if (b < e) shards[w].push_back({files[f], b - fb, e - fb});
    }
  }
  return shards;
}

SentenceReader::SentenceReader(Shard shard, std::size_t max_sentence)
    : shard_(std::move(shard)), max_sentence_(max_sentence) {
  if (max_sentence_ == 0) throw std::invalid_argument("max_sentence must be > 0");
}

bool SentenceReader::open_next_segment() {
  while (segment_index_ < shard_.size()) {
    const Segment& segment = shard_[segment_index_++];
    in_ = std::ifstream(segment.file, std::ios::binary);
    if (!in_) throw Error("cannot open corpus file " + segment.file.string());
    position_ = segment.begin;
    end_ = segment.end;
    auto* sb = in_.rdbuf();
    if (segment.begin > 0) {
      // A token straddling the segment start belongs to the previous shard.
      sb->pubseekpos(static_cast<std::streamoff>(segment.begin - 1));
      const int before = sb->sbumpc();
      if (!is_space(before)) {
        int c = sb->sgetc();
        while (c != std::char_traits<char>::eof() && !is_space(c)) {
          sb->sbumpc();
          ++position_;
          c = sb->sgetc();
        }
      }
    }
    segment_open_ = true;
    return true;
  }
  return false;
}

bool SentenceReader::next(std::vector<std::string>& sentence) {
  sentence.clear();
  constexpr int eof = std::char_traits<char>::eof();
  while (true) {
    if (!segment_open_ && !open_next_segment()) return !sentence.empty();
    auto* sb = in_.rdbuf();
    int c = sb->sgetc();
    if (c == eof || position_ >= end_) {
      segment_open_ = false;
      if (!sentence.empty()) return true;
      continue;
    }
    if (c == '\n') {
      sb->sbumpc();
      ++position_;
      if (!sentence.empty()) return true;
      continue;
    }
    if (is_space(c)) {
      sb->sbumpc();
      ++position_;
      continue;
    }
    raw_.clear();
    while (c != eof && !is_space(c)) {
      raw_.push_back(static_cast<char>(c));
      sb->sbumpc();
      ++position_;
      c = sb->sgetc();
    }
    if (tokenizer_.normalize(raw_, token_)) {
      sentence.push_back(token_);
      if (sentence.size() >= max_sentence_) return true;
    }
  }
}

WordCounts count_words(std::span<const std::filesystem::path> files) {
  WordCounts counts;
  auto shards = make_shards(files, 1);
  SentenceReader reader(std::move(shards.front()));
  std::vector<std::string> sentence;
  while (reader.next(sentence)) {
    for (const auto& token : sentence) ++counts[token];
  }
  if (reader.tokenizer().invalid_sequences() > 0) {
    log_warning(std::to_string(reader.tokenizer().invalid_sequences()) +
                " invalid UTF-8 sequences replaced while counting");
  }
  return counts;
}

Vocabulary build_vocab_from_files(std::span<const std::filesystem::path> files,
                                  const VocabOptions& options) {
  return Vocabulary::from_counts(count_words(files), options);
}

// ---------------------------------------------------------------------------
// Windows

void to_ids(std::span<const std::string> tokens, const Vocabulary& vocab,
            std::vector<WordId>& ids) {
  ids.clear();
  for (const auto& token : tokens) {
    if (const auto id = vocab.find(token)) ids.push_back(*id);
  }
}

WindowGenerator::WindowGenerator(const Vocabulary& vocab, int b_max)
    : vocab_(&vocab), b_max_(b_max) {
  if (b_max < 1) throw std::invalid_argument("window size must be >= 1");
}

void WindowGenerator::subsample(std::span<const WordId> sentence, Rng& rng) {
  kept_.clear();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const WordId id : sentence) {
    const double p = vocab_->keep_prob(id);
    if (p >= 1.0 || unit(rng) < p) kept_.push_back(id);
  }
}

std::vector<TrainingWindow> windows(std::span<const std::string> tokens,
                                    const Vocabulary& vocab, int b_max,
                                    Rng& rng) {
  const std::vector<std::string> one(tokens.begin(), tokens.end());
  return windows(std::span<const std::vector<std::string>>(&one, 1), vocab,
                 b_max, rng);
}

std::vector<TrainingWindow> windows(
    std::span<const std::vector<std::string>> sentences,
    const Vocabulary& vocab, int b_max, Rng& rng) {
  WindowGenerator generator(vocab, b_max);
  std::vector<TrainingWindow> out;
  std::vector<WordId> ids;
  for (const auto& sentence : sentences) {
    to_ids(sentence, vocab, ids);
    generator.for_each_window(ids, rng, [&](const TrainingWindow& window) {
      out.push_back(window);
    });
  }
  return out;
}

}  // namespace awe
