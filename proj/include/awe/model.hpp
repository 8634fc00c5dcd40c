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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "awe/common.hpp"
#include "awe/corpus.hpp"
#include "awe/subword.hpp"

namespace awe {

// Parameter matrices. U holds word (or subword unit) vectors and doubles as
// the target matrix in the attention modes; V exists only for CBOW. K and Q
// are the low-dimensional key and query matrices.
enum class Matrix : std::uint8_t { U = 0, V = 1, K = 2, Q = 3 };

std::string_view to_string(Matrix matrix);

struct ModelOptions {
  double attention_clamp = 10.0;  // |k.q| is clamped before exp
  double logit_clamp = 15.0;      // target scores are clamped before log sigma
  bool normalize_attention = false;  // softmax ablation; off by default

  bool operator==(const ModelOptions&) const = default;
};

template <typename T>
class BasicModelParams {
 public:
  using Scalar = T;

  BasicModelParams() = default;
  /// All-zero parameters. `unit_count` is the number of U rows (the vocabulary
  /// size except in AWE-S, where it is the number of subword units).
  BasicModelParams(Mode mode, std::size_t vocab_size, std::size_t unit_count,
                   std::size_t dim, std::size_t dim_kq);

  Mode mode() const { return mode_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t dim() const { return dim_; }
  std::size_t dim_kq() const { return dim_kq_; }

  bool has(Matrix m) const { return rows_[index(m)] > 0; }
  std::size_t rows(Matrix m) const { return rows_[index(m)]; }
  std::size_t cols(Matrix m) const {
    return m == Matrix::K || m == Matrix::Q ? dim_kq_ : dim_;
  }

  std::span<T> row(Matrix m, std::size_t r) {
    return {data_[index(m)].data() + r * cols(m), cols(m)};
  }
  std::span<const T> row(Matrix m, std::size_t r) const {
    return {data_[index(m)].data() + r * cols(m), cols(m)};
  }
  std::span<T> data(Matrix m) { return data_[index(m)]; }
  std::span<const T> data(Matrix m) const { return data_[index(m)]; }

  /// U uniform in +-0.5/D, K and Q uniform in +-0.5/D', V zero.
  void initialize(std::uint64_t seed);

  bool all_finite() const;

  bool operator==(const BasicModelParams&) const = default;

 private:
  static std::size_t index(Matrix m) { return static_cast<std::size_t>(m); }

  Mode mode_ = Mode::Cbow;
  std::size_t vocab_size_ = 0;
  std::size_t dim_ = 0;
  std::size_t dim_kq_ = 0;
  std::array<std::size_t, 4> rows_{};
  std::array<std::vector<T>, 4> data_;
};

using ModelParams = BasicModelParams<Real>;

/// Everything computed for one window.
struct WindowScore {
  std::vector<double> context_vec;
  std::vector<double> attn;  // one per context word; all ones for CBOW
  double loss = 0.0;
  double pos_score = 0.0;    // unclamped target score of the center
  std::vector<double> neg_scores;
};

/// Unnormalized weights exp(clamp(k_center . q_ctx)), in context order.
template <typename T>
std::vector<double> attention_weights(WordId center,
                                      std::span<const WordId> context,
                                      const BasicModelParams<T>& params,
                                      double clamp);

/// U row for CBOW/AWE; sum of the unit rows of S_word for AWE-S.
template <typename T>
void word_vector(WordId word, const BasicModelParams<T>& params,
                 const SubwordMap* subwords, std::span<double> out);

template <typename T>
std::vector<double> word_vector(WordId word, const BasicModelParams<T>& params,
                                const SubwordMap* subwords);

/// Vector for a unit set (AWE-S composition of out-of-vocabulary words).
template <typename T>
std::vector<double> compose_units(std::span<const UnitId> units,
                                  const BasicModelParams<T>& params);

struct ContextVector {
  std::vector<double> vec;
  std::vector<double> attn;
};

template <typename T>
ContextVector context_vector(WordId center, std::span<const WordId> context,
                             const BasicModelParams<T>& params,
                             const SubwordMap* subwords,
                             const ModelOptions& options = {});

/// Negative-sampling loss -log s(s+) - sum log s(-s_n), c shared by all
/// targets.
template <typename T>
WindowScore window_loss(const TrainingWindow& window,
                        std::span<const WordId> negatives,
                        const BasicModelParams<T>& params,
                        const SubwordMap* subwords,
                        const ModelOptions& options = {});

/// Exact log p(center | context) under the full softmax over the vocabulary.
/// Linear in the vocabulary size; meant for debugging on toy models.
template <typename T>
double full_softmax_log_prob(const TrainingWindow& window,
                             const BasicModelParams<T>& params,
                             const SubwordMap* subwords,
                             const ModelOptions& options = {});

/// Throws unless `params` and `subwords` fit together (AWE-S needs a map
/// whose unit count matches U).
template <typename T>
void check_compatible(const BasicModelParams<T>& params,
                      const SubwordMap* subwords);

// Numeric helpers shared with the trainer.
namespace detail {

template <typename A, typename B>
inline double dot(const A* a, const B* b, std::size_t n) {
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (std::size_t i = 0; i < n; ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

inline double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double clamp(double x, double limit) {
  return x > limit ? limit : (x < -limit ? -limit : x);
}

}  // namespace detail

}  // namespace awe
