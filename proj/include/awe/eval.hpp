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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "awe/corpus.hpp"
#include "awe/model.hpp"
#include "awe/subword.hpp"

namespace awe {

struct SimilarityPair {
  std::string a;
  std::string b;
  double score = 0.0;
};

/// Human-scored word pairs. Files are `word_a,word_b,score` with a tab, comma
/// or blank delimiter (detected per line), optional header and `#` comments.
struct SimilarityDataset {
  std::string name;
  std::vector<SimilarityPair> pairs;

  static SimilarityDataset load(const std::filesystem::path& path,
                                std::string name = {});
  static SimilarityDataset parse(std::istream& in, std::string name);
};

/// a.b / (|a||b|); 0 (with a warning) when either vector is zero.
double cosine(std::span<const double> a, std::span<const double> b);

/// Ranks starting at 1; tied values share the mean of their rank range.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of the average ranks, exact under ties.
double spearman(std::span<const double> x, std::span<const double> y);

/// Anything that can hand out word vectors: a trained model or an imported
/// embedding file.
class WordVectors {
 public:
  virtual ~WordVectors() = default;

  virtual std::size_t dim() const = 0;
  virtual std::size_t size() const = 0;
  virtual const std::string& word(std::size_t index) const = 0;
  virtual void vector(std::size_t index, std::span<double> out) const = 0;
  /// Vector of an arbitrary word, if it can be represented.
  virtual std::optional<std::vector<double>> lookup(std::string_view word) const = 0;
};

/// Word vectors straight from model parameters. For AWE-S, words outside the
/// vocabulary are composed from whatever subword units exist for them.
template <typename T>
class ModelVectors final : public WordVectors {
 public:
  ModelVectors(const BasicModelParams<T>& params, const Vocabulary& vocab,
               const SubwordMap* subwords);

  std::size_t dim() const override { return params_->dim(); }
  std::size_t size() const override { return vocab_->size(); }
  const std::string& word(std::size_t index) const override {
    return vocab_->word(static_cast<WordId>(index));
  }
  void vector(std::size_t index, std::span<double> out) const override;
  std::optional<std::vector<double>> lookup(std::string_view word) const override;

 private:
  const BasicModelParams<T>* params_;
  const Vocabulary* vocab_;
  const SubwordMap* subwords_;
};

/// Plain word -> vector table, e.g. loaded from a word2vec text file.
class EmbeddingTable final : public WordVectors {
 public:
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  void add(std::string word, std::span<const double> values);

  std::size_t dim() const override { return dim_; }
  std::size_t size() const override { return words_.size(); }
  const std::string& word(std::size_t index) const override { return words_[index]; }
  void vector(std::size_t index, std::span<double> out) const override;
  std::optional<std::vector<double>> lookup(std::string_view word) const override;

  std::span<const double> row(std::size_t index) const {
    return {data_.data() + index * dim_, dim_};
  }

 private:
  std::size_t dim_;
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct ScoreReport {
  std::string dataset;
  double spearman = 0.0;
  std::size_t pairs_total = 0;
  std::size_t pairs_evaluated = 0;

  double coverage() const {
    return pairs_total ? static_cast<double>(pairs_evaluated) / pairs_total : 0.0;
  }
};

/// Spearman between model cosines and human scores over the pairs whose two
/// words are representable. Fewer than two such pairs is an error.
ScoreReport evaluate(const WordVectors& vectors, const SimilarityDataset& dataset);

template <typename T>
ScoreReport evaluate(const BasicModelParams<T>& params, const Vocabulary& vocab,
                     const SubwordMap* subwords,
                     const SimilarityDataset& dataset) {
  return evaluate(ModelVectors<T>(params, vocab, subwords), dataset);
}

/// `{dataset, spearman, pairs_total, pairs_evaluated}` objects as JSON text.
std::string reports_to_json(std::span<const ScoreReport> reports);
/// One row per model, one column per dataset.
std::string reports_to_table(std::string_view model_name,
                             std::span<const ScoreReport> reports);

struct Neighbor {
  std::string word;
  double cosine = 0.0;
};

/// Pre-normalized rows for repeated neighbor queries.
class NeighborIndex {
 public:
  explicit NeighborIndex(const WordVectors& vectors);

  /// Top-k rows by cosine to `query`, descending, ties by row index; rows
  /// whose word equals `exclude` are skipped.
  std::vector<Neighbor> query(std::span<const double> query, std::size_t k,
                              std::string_view exclude = {}) const;

 private:
  const WordVectors* vectors_;
  std::size_t dim_;
  std::vector<double> unit_rows_;
};

/// Errors when `word` cannot be represented.
std::vector<Neighbor> nearest_neighbors(std::string_view word,
                                        const WordVectors& vectors,
                                        std::size_t k);

}  // namespace awe
