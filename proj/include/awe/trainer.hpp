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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "awe/corpus.hpp"
#include "awe/model.hpp"
#include "awe/subword.hpp"

namespace awe {

/// Training hyperparameters. Defaults follow the published setup: D=500,
/// D'=50, window 5, 5 negatives, 5 epochs.
struct TrainConfig {
  Mode mode = Mode::Awe;
  std::size_t dim = 500;
  std::size_t dim_kq = 50;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double initial_lr = 0.05;
  double min_lr = 0.05 * 1e-4;
  double kq_lr_multiplier = 1.0;
  double subsample_t = 1e-4;
  std::uint64_t min_count = 5;
  std::size_t max_vocab = 0;
  std::size_t neg_table_size = 10'000'000;
  double alpha = 0.75;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  ModelOptions model;
  std::uint64_t progress_interval = 1'000'000;  // tokens; 0 disables

  VocabOptions vocab_options() const;
  /// Throws std::invalid_argument on a violated constraint.
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

/// Gradient of one window. Every entry contributes `scale * vector` to the
/// gradient of one parameter row; rows may repeat and then add up.
class SparseGradient {
 public:
  struct Entry {
    Matrix matrix;
    std::uint32_t row;
    double scale;
    std::uint32_t vec;
  };

  void clear() {
    entries_.clear();
    pool_used_ = 0;
  }

  /// A zeroed scratch vector owned by this gradient.
  std::uint32_t new_vector(std::size_t size);
  std::span<double> vector(std::uint32_t id) { return pool_[id]; }
  std::span<const double> vector(std::uint32_t id) const { return pool_[id]; }

  void add(Matrix matrix, std::uint32_t row, double scale, std::uint32_t vec) {
    entries_.push_back({matrix, row, scale, vec});
  }

  const std::vector<Entry>& entries() const { return entries_; }

  /// Summed gradient per touched row.
  std::map<std::pair<Matrix, std::uint32_t>, std::vector<double>> densify()
      const;

 private:
  std::vector<Entry> entries_;
  std::vector<std::vector<double>> pool_;
  std::size_t pool_used_ = 0;
};

/// Loss and analytic gradient of one window, computed from a single read of
/// the parameters. Keeps its scratch buffers between calls.
///
/// With targets t in {center (label 1)} + negatives (label 0),
/// g_t = sigma(s_t) - label_t and G = sum_t g_t * target(t):
///   d target(t)         = g_t * c
///   d context word i    = a_i * G
///   d k_center          = sum_i dL/ds_i * q_i
///   d q_i               = dL/ds_i * k_center
/// where dL/ds_i = a_i * (G . u_i) for raw weights and
/// a_i * (G . u_i - sum_j a_j * (G . u_j)) for normalized ones. AWE-S copies
/// each word-level term onto every unit of the word. A clamped attention
/// exponent gives no k/q gradient.
template <typename T>
class WindowKernel {
 public:
  explicit WindowKernel(const ModelOptions& options = {}) : options_(options) {}

  double compute(const TrainingWindow& window,
                 std::span<const WordId> negatives,
                 const BasicModelParams<T>& params, const SubwordMap* subwords,
                 SparseGradient& grads);

 private:
  void load_word(WordId word, const BasicModelParams<T>& params,
                 const SubwordMap* subwords, double* out) const;
  void add_rows(SparseGradient& grads, Matrix matrix, WordId word,
                const SubwordMap* subwords, bool per_unit, double scale,
                std::uint32_t vec) const;

  ModelOptions options_;
  std::vector<double> context_rows_;
  std::vector<double> target_rows_;
  std::vector<double> attn_;
  std::vector<double> score_grad_;
  std::vector<unsigned char> clamped_;
};

template <typename T>
SparseGradient gradients(const TrainingWindow& window,
                         std::span<const WordId> negatives,
                         const BasicModelParams<T>& params,
                         const SubwordMap* subwords,
                         const ModelOptions& options = {});

/// row <- row - lr * grad for every touched row. K and Q rows use
/// lr * kq_lr_multiplier.
template <typename T>
void apply_update(BasicModelParams<T>& params, const SparseGradient& grads,
                  double lr, double kq_lr_multiplier = 1.0);

struct EpochStats {
  int epoch = 0;  // 1-based
  double mean_loss = 0.0;
  std::uint64_t windows = 0;
  std::uint64_t words = 0;
  double seconds = 0.0;
  double words_per_sec = 0.0;
  double windows_per_sec = 0.0;
  double final_lr = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  double wall_seconds = 0.0;
  std::uint64_t total_windows = 0;
  std::uint64_t total_words = 0;
  double words_per_sec = 0.0;
  double windows_per_sec = 0.0;
};

template <typename T>
struct TrainState {
  BasicModelParams<T> params;
  int epochs_completed = 0;
};

struct TrainOptions {
  /// Stop once this many epochs are complete (the schedule still spans
  /// config.epochs, so a later resume continues it seamlessly).
  std::optional<int> stop_after_epoch;
  std::ostream* progress = nullptr;
};

/// Freshly initialized parameters for a config.
template <typename T>
BasicModelParams<T> make_params(const TrainConfig& config,
                                const Vocabulary& vocab,
                                const SubwordMap* subwords);

/// Runs epochs state.epochs_completed+1 .. config.epochs (or up to
/// stop_after_epoch). The learning rate decays linearly from initial_lr to
/// min_lr over config.epochs passes. Workers share the parameters without
/// locks; a single worker is bit-reproducible for a given seed.
template <typename T>
TrainReport train(std::span<const std::filesystem::path> corpus,
                  const TrainConfig& config, const Vocabulary& vocab,
                  const SubwordMap* subwords, TrainState<T>& state,
                  const TrainOptions& options = {});

}  // namespace awe
