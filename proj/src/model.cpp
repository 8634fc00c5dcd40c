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

#include "awe/model.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>

namespace awe {

std::string_view to_string(Matrix matrix) {
  switch (matrix) {
    case Matrix::U: return "U";
    case Matrix::V: return "V";
    case Matrix::K: return "K";
    case Matrix::Q: return "Q";
  }
  return "?";
}

template <typename T>
BasicModelParams<T>::BasicModelParams(Mode mode, std::size_t vocab_size,
                                      std::size_t unit_count, std::size_t dim,
                                      std::size_t dim_kq)
    : mode_(mode), vocab_size_(vocab_size), dim_(dim), dim_kq_(dim_kq) {
  if (vocab_size == 0 || dim == 0) {
    throw std::invalid_argument("model needs a non-empty vocabulary and D > 0");
  }
  if (has_attention(mode) && dim_kq == 0) {
    throw std::invalid_argument("attention modes need D' > 0");
  }
  if (mode != Mode::AweS && unit_count != vocab_size) {
    throw std::invalid_argument("only AWE-S has a unit count distinct from N");
  }
  rows_[index(Matrix::U)] = unit_count;
  if (mode == Mode::Cbow) {
    rows_[index(Matrix::V)] = vocab_size;
    dim_kq_ = 0;
  } else {
    rows_[index(Matrix::K)] = vocab_size;
    rows_[index(Matrix::Q)] = vocab_size;
  }
  for (const Matrix m : {Matrix::U, Matrix::V, Matrix::K, Matrix::Q}) {
    data_[index(m)].assign(rows(m) * cols(m), T{0});
  }
}

template <typename T>
void BasicModelParams<T>::initialize(std::uint64_t seed) {
  Rng rng(seed);
  auto fill = [&](Matrix m, double half_width) {
    std::uniform_real_distribution<double> dist(-half_width, half_width);
    for (auto& x : data_[index(m)]) x = static_cast<T>(dist(rng));
  };
  fill(Matrix::U, 0.5 / static_cast<double>(dim_));
  std::fill(data_[index(Matrix::V)].begin(), data_[index(Matrix::V)].end(), T{0});
  if (has_attention(mode_)) {
    fill(Matrix::K, 0.5 / static_cast<double>(dim_kq_));
    fill(Matrix::Q, 0.5 / static_cast<double>(dim_kq_));
  }
}

template <typename T>
bool BasicModelParams<T>::all_finite() const {
  for (const auto& matrix : data_) {
    for (const T x : matrix) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

template <typename T>
void check_compatible(const BasicModelParams<T>& params,
                      const SubwordMap* subwords) {
  if (params.mode() != Mode::AweS) return;
  if (subwords == nullptr) {
    throw std::invalid_argument("AWE-S needs a subword map");
  }
  if (subwords->vocab_size() != params.vocab_size() ||
      subwords->unit_count() != params.rows(Matrix::U)) {
    throw std::invalid_argument("subword map does not match the model");
  }
}

namespace {

template <typename T>
void check_word(WordId word, const BasicModelParams<T>& params) {
  if (word >= params.vocab_size()) {
    throw std::out_of_range("word id " + std::to_string(word) +
                            " out of range");
  }
}

}  // namespace

template <typename T>
std::vector<double> attention_weights(WordId center,
                                      std::span<const WordId> context,
                                      const BasicModelParams<T>& params,
                                      double clamp) {
  if (!has_attention(params.mode())) {
    throw Error("attention undefined for CBOW");
  }
  if (!(clamp > 0.0)) throw std::invalid_argument("clamp must be > 0");
  check_word(center, params);
  const auto k = params.row(Matrix::K, center);
  std::vector<double> out;
  out.reserve(context.size());
  for (const WordId w : context) {
    check_word(w, params);
    const auto q = params.row(Matrix::Q, w);
    out.push_back(std::exp(detail::clamp(detail::dot(k.data(), q.data(), k.size()), clamp)));
  }
  return out;
}

template <typename T>
void word_vector(WordId word, const BasicModelParams<T>& params,
                 const SubwordMap* subwords, std::span<double> out) {
  check_word(word, params);
  const std::size_t d = params.dim();
  if (params.mode() != Mode::AweS) {
    const auto u = params.row(Matrix::U, word);
    std::copy(u.begin(), u.end(), out.begin());
    return;
  }
  if (subwords == nullptr) throw std::invalid_argument("AWE-S needs a subword map");
  const auto units = subwords->units_of(word);
  const auto first = params.row(Matrix::U, units[0]);
  std::copy(first.begin(), first.end(), out.begin());
  for (std::size_t s = 1; s < units.size(); ++s) {
    const T* u = params.row(Matrix::U, units[s]).data();
    for (std::size_t j = 0; j < d; ++j) out[j] += static_cast<double>(u[j]);
  }
}

template <typename T>
std::vector<double> word_vector(WordId word, const BasicModelParams<T>& params,
                                const SubwordMap* subwords) {
  std::vector<double> out(params.dim());
  word_vector(word, params, subwords, out);
  return out;
}

template <typename T>
std::vector<double> compose_units(std::span<const UnitId> units,
                                  const BasicModelParams<T>& params) {
  if (units.empty()) throw std::invalid_argument("empty unit set");
  std::vector<double> out(params.dim());
  for (std::size_t s = 0; s < units.size(); ++s) {
    if (units[s] >= params.rows(Matrix::U)) {
      throw std::out_of_range("unit id out of range");
    }
    const auto u = params.row(Matrix::U, units[s]);
    if (s == 0) {
      std::copy(u.begin(), u.end(), out.begin());
    } else {
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += static_cast<double>(u[j]);
    }
  }
  return out;
}

template <typename T>
ContextVector context_vector(WordId center, std::span<const WordId> context,
                             const BasicModelParams<T>& params,
                             const SubwordMap* subwords,
                             const ModelOptions& options) {
  if (context.empty()) throw Error("empty context");
  check_compatible(params, subwords);
  check_word(center, params);
  ContextVector out;
  if (has_attention(params.mode())) {
    out.attn = attention_weights(center, context, params, options.attention_clamp);
    if (options.normalize_attention) {
      double z = 0.0;
      for (const double a : out.attn) z += a;
      for (double& a : out.attn) a /= z;
    }
  } else {
    out.attn.assign(context.size(), 1.0);
  }
  const std::size_t d = params.dim();
  out.vec.assign(d, 0.0);
  std::vector<double> u(d);
  for (std::size_t i = 0; i < context.size(); ++i) {
    word_vector(context[i], params, subwords, u);
    const double a = out.attn[i];
    for (std::size_t j = 0; j < d; ++j) out.vec[j] += a * u[j];
  }
  return out;
}

namespace {

template <typename T>
void target_vector(WordId word, const BasicModelParams<T>& params,
                   const SubwordMap* subwords, std::span<double> out) {
  if (params.mode() == Mode::Cbow) {
    check_word(word, params);
    const auto v = params.row(Matrix::V, word);
    std::copy(v.begin(), v.end(), out.begin());
  } else {
    word_vector(word, params, subwords, out);
  }
}

}  // namespace

template <typename T>
WindowScore window_loss(const TrainingWindow& window,
                        std::span<const WordId> negatives,
                        const BasicModelParams<T>& params,
                        const SubwordMap* subwords,
                        const ModelOptions& options) {
  auto ctx = context_vector(window.center, window.context, params, subwords, options);
  WindowScore score;
  const std::size_t d = params.dim();
  std::vector<double> tau(d);
  target_vector(window.center, params, subwords, tau);
  score.pos_score = detail::dot(tau.data(), ctx.vec.data(), d);
  score.loss = -detail::log_sigmoid(detail::clamp(score.pos_score, options.logit_clamp));
  for (const WordId n : negatives) {
    target_vector(n, params, subwords, tau);
    const double s = detail::dot(tau.data(), ctx.vec.data(), d);
    score.neg_scores.push_back(s);
    score.loss -= detail::log_sigmoid(-detail::clamp(s, options.logit_clamp));
  }
  score.context_vec = std::move(ctx.vec);
  score.attn = std::move(ctx.attn);
  return score;
}

template <typename T>
double full_softmax_log_prob(const TrainingWindow& window,
                             const BasicModelParams<T>& params,
                             const SubwordMap* subwords,
                             const ModelOptions& options) {
  const auto ctx = context_vector(window.center, window.context, params, subwords, options);
  const std::size_t d = params.dim();
  std::vector<double> tau(d);
  std::vector<double> scores(params.vocab_size());
  for (WordId w = 0; w < params.vocab_size(); ++w) {
    target_vector(w, params, subwords, tau);
    scores[w] = detail::dot(tau.data(), ctx.vec.data(), d);
  }
  const double top = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (const double s : scores) z += std::exp(s - top);
  return scores[window.center] - top - std::log(z);
}

#define AWE_INSTANTIATE_MODEL(T)                                              \
  template class BasicModelParams<T>;                                         \
  template void check_compatible(const BasicModelParams<T>&,                  \
                                 const SubwordMap*);                          \
  template std::vector<double> attention_weights(                             \
      WordId, std::span<const WordId>, const BasicModelParams<T>&, double);   \
  template void word_vector(WordId, const BasicModelParams<T>&,               \
                            const SubwordMap*, std::span<double>);            \
  template std::vector<double> word_vector(WordId, const BasicModelParams<T>&,\
                                           const SubwordMap*);                \
  template std::vector<double> compose_units(std::span<const UnitId>,         \
                                             const BasicModelParams<T>&);     \
  template ContextVector context_vector(WordId, std::span<const WordId>,      \
                                        const BasicModelParams<T>&,           \
                                        const SubwordMap*,                    \
                                        const ModelOptions&);                 \
  template WindowScore window_loss(const TrainingWindow&,                     \
                                   std::span<const WordId>,                   \
                                   const BasicModelParams<T>&,                \
                                   const SubwordMap*, const ModelOptions&);   \
  template double full_softmax_log_prob(const TrainingWindow&,                \
                                        const BasicModelParams<T>&,           \
                                        const SubwordMap*,                    \
                                        const ModelOptions&);

AWE_INSTANTIATE_MODEL(float)
AWE_INSTANTIATE_MODEL(double)

}  // namespace awe
