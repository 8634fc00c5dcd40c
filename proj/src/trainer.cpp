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

#include "awe/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

namespace awe {

// ---------------------------------------------------------------------------
// TrainConfig

VocabOptions TrainConfig::vocab_options() const {
  VocabOptions options;
  options.min_count = min_count;
  options.max_size = max_vocab;
  options.subsample_t = subsample_t;
  options.neg_table_size = neg_table_size;
  options.alpha = alpha;
  return options;
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(dim > 0, "dim must be > 0");
  require(!has_attention(mode) || dim_kq > 0, "dim_kq must be > 0");
  require(window >= 1, "window must be >= 1");
  require(negatives >= 1, "negatives must be >= 1");
  require(epochs >= 1, "epochs must be >= 1");
  require(initial_lr > 0.0, "initial lr must be > 0");
  require(min_lr > 0.0 && min_lr < initial_lr,
          "min lr must lie in (0, initial lr)");
  require(kq_lr_multiplier >= 0.0, "key/query lr multiplier must be >= 0");
  require(subsample_t >= 0.0, "subsample threshold must be >= 0");
  require(min_count >= 1, "min count must be >= 1");
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  require(workers >= 1, "workers must be >= 1");
  require(model.attention_clamp > 0.0 && model.logit_clamp > 0.0,
          "clamps must be > 0");
}

// ---------------------------------------------------------------------------
// SparseGradient

std::uint32_t SparseGradient::new_vector(std::size_t size) {
  if (pool_used_ == pool_.size()) pool_.emplace_back();
  pool_[pool_used_].assign(size, 0.0);
  return static_cast<std::uint32_t>(pool_used_++);
}

std::map<std::pair<Matrix, std::uint32_t>, std::vector<double>>
SparseGradient::densify() const {
  std::map<std::pair<Matrix, std::uint32_t>, std::vector<double>> out;
  for (const auto& e : entries_) {
    const auto& v = pool_[e.vec];
    auto& dst = out[{e.matrix, e.row}];
    if (dst.empty()) dst.assign(v.size(), 0.0);
    for (std::size_t j = 0; j < v.size(); ++j) dst[j] += e.scale * v[j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// WindowKernel

template <typename T>
void WindowKernel<T>::load_word(WordId word, const BasicModelParams<T>& params,
                                const SubwordMap* subwords, double* out) const {
  const std::size_t d = params.dim();
  if (params.mode() != Mode::AweS) {
    const T* u = params.row(Matrix::U, word).data();
    for (std::size_t j = 0; j < d; ++j) out[j] = static_cast<double>(u[j]);
    return;
  }
  const auto units = subwords->units_of(word);
  const T* first = params.row(Matrix::U, units[0]).data();
  for (std::size_t j = 0; j < d; ++j) out[j] = static_cast<double>(first[j]);
  for (std::size_t s = 1; s < units.size(); ++s) {
    const T* u = params.row(Matrix::U, units[s]).data();
    for (std::size_t j = 0; j < d; ++j) out[j] += static_cast<double>(u[j]);
  }
}

template <typename T>
void WindowKernel<T>::add_rows(SparseGradient& grads, Matrix matrix,
                               WordId word, const SubwordMap* subwords,
                               bool per_unit, double scale,
                               std::uint32_t vec) const {
  if (!per_unit) {
    grads.add(matrix, word, scale, vec);
    return;
  }
  for (const UnitId unit : subwords->units_of(word)) {
    grads.add(matrix, unit, scale, vec);
  }
}

template <typename T>
double WindowKernel<T>::compute(const TrainingWindow& window,
                                std::span<const WordId> negatives,
                                const BasicModelParams<T>& params,
                                const SubwordMap* subwords,
                                SparseGradient& grads) {
  grads.clear();
  const auto& context = window.context;
  const std::size_t m = context.size();
  if (m == 0) throw Error("empty context");
  const Mode mode = params.mode();
  const bool attention = has_attention(mode);
  const bool per_unit = mode == Mode::AweS;
  const std::size_t d = params.dim();
  const std::size_t dk = params.dim_kq();

  const std::uint32_t c_id = grads.new_vector(d);
  const std::uint32_t g_id = grads.new_vector(d);
  const std::uint32_t dk_id = attention ? grads.new_vector(dk) : 0;
  const std::uint32_t k_id = attention ? grads.new_vector(dk) : 0;
  double* c = grads.vector(c_id).data();
  double* g_sum = grads.vector(g_id).data();

  context_rows_.resize(m * d);
  for (std::size_t i = 0; i < m; ++i) {
    load_word(context[i], params, subwords, &context_rows_[i * d]);
  }

  attn_.assign(m, 1.0);
  clamped_.assign(m, 0);
  if (attention) {
    const T* k = params.row(Matrix::K, window.center).data();
    const double limit = options_.attention_clamp;
    for (std::size_t i = 0; i < m; ++i) {
      const double s = detail::dot(k, params.row(Matrix::Q, context[i]).data(), dk);
      clamped_[i] = s > limit || s < -limit;
      attn_[i] = std::exp(detail::clamp(s, limit));
    }
    if (options_.normalize_attention) {
      double z = 0.0;
      for (const double a : attn_) z += a;
      for (double& a : attn_) a /= z;
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    const double a = attn_[i];
    const double* u = &context_rows_[i * d];
#pragma omp simd
    for (std::size_t j = 0; j < d; ++j) c[j] += a * u[j];
  }

  const std::size_t targets = negatives.size() + 1;
  target_rows_.resize(targets * d);
  const Matrix target_matrix = mode == Mode::Cbow ? Matrix::V : Matrix::U;
  double loss = 0.0;
  for (std::size_t t = 0; t < targets; ++t) {
    const WordId word = t == 0 ? window.center : negatives[t - 1];
    double* tau = &target_rows_[t * d];
    if (mode == Mode::Cbow) {
      const T* v = params.row(Matrix::V, word).data();
      for (std::size_t j = 0; j < d; ++j) tau[j] = static_cast<double>(v[j]);
    } else {
      load_word(word, params, subwords, tau);
    }
    const double s = detail::clamp(detail::dot(tau, c, d), options_.logit_clamp);
    const double label = t == 0 ? 1.0 : 0.0;
    loss -= detail::log_sigmoid(t == 0 ? s : -s);
    const double g = detail::sigmoid(s) - label;
#pragma omp simd
    for (std::size_t j = 0; j < d; ++j) g_sum[j] += g * tau[j];
    add_rows(grads, target_matrix, word, subwords,
             per_unit && target_matrix == Matrix::U, g, c_id);
  }

  for (std::size_t i = 0; i < m; ++i) {
    add_rows(grads, Matrix::U, context[i], subwords, per_unit, attn_[i], g_id);
  }

  if (attention) {
    score_grad_.resize(m);
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double h = detail::dot(g_sum, &context_rows_[i * d], d);
      score_grad_[i] = h;
      mean += attn_[i] * h;
    }
    const T* k = params.row(Matrix::K, window.center).data();
    double* dk_vec = grads.vector(dk_id).data();
    double* k_copy = grads.vector(k_id).data();
    for (std::size_t j = 0; j < dk; ++j) k_copy[j] = static_cast<double>(k[j]);
    bool any = false;
    for (std::size_t i = 0; i < m; ++i) {
      const double h = options_.normalize_attention ? score_grad_[i] - mean
                                                    : score_grad_[i];
      const double ds = clamped_[i] ? 0.0 : attn_[i] * h;
      if (ds == 0.0) continue;
      any = true;
      const T* q = params.row(Matrix::Q, context[i]).data();
      for (std::size_t j = 0; j < dk; ++j) dk_vec[j] += ds * static_cast<double>(q[j]);
      grads.add(Matrix::Q, context[i], ds, k_id);
    }
    if (any) grads.add(Matrix::K, window.center, 1.0, dk_id);
  }
  return loss;
}

template <typename T>
SparseGradient gradients(const TrainingWindow& window,
                         std::span<const WordId> negatives,
                         const BasicModelParams<T>& params,
                         const SubwordMap* subwords,
                         const ModelOptions& options) {
  check_compatible(params, subwords);
  auto check = [&](WordId w) {
    if (w >= params.vocab_size()) throw std::out_of_range("word id out of range");
  };
  check(window.center);
  for (const WordId w : window.context) check(w);
  for (const WordId w : negatives) check(w);
  SparseGradient grads;
  WindowKernel<T> kernel(options);
  kernel.compute(window, negatives, params, subwords, grads);
  return grads;
}

template <typename T>
void apply_update(BasicModelParams<T>& params, const SparseGradient& grads,
                  double lr, double kq_lr_multiplier) {
  for (const auto& e : grads.entries()) {
    if (e.row >= params.rows(e.matrix)) {
      throw std::out_of_range("gradient row out of range");
    }
    const bool kq = e.matrix == Matrix::K || e.matrix == Matrix::Q;
    const double step = lr * (kq ? kq_lr_multiplier : 1.0) * e.scale;
    T* row = params.row(e.matrix, e.row).data();
    const double* v = grads.vector(e.vec).data();
    const std::size_t n = params.cols(e.matrix);
#pragma omp simd
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = static_cast<T>(static_cast<double>(row[j]) - step * v[j]);
    }
  }
}

// ---------------------------------------------------------------------------
// Training loop

template <typename T>
BasicModelParams<T> make_params(const TrainConfig& config,
                                const Vocabulary& vocab,
                                const SubwordMap* subwords) {
  config.validate();
  std::size_t units = vocab.size();
  if (config.mode == Mode::AweS) {
    if (subwords == nullptr) throw std::invalid_argument("AWE-S needs a subword map");
    units = subwords->unit_count();
  }
  BasicModelParams<T> params(config.mode, vocab.size(), units, config.dim,
                             config.dim_kq);
  params.initialize(config.seed);
  return params;
}

namespace {

std::uint64_t stream_seed(std::uint64_t seed, int epoch, std::size_t worker) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch),
                    static_cast<std::uint32_t>(worker)};
  std::uint32_t words[2];
  seq.generate(std::begin(words), std::end(words));
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

template <typename T>
std::string first_non_finite(const BasicModelParams<T>& params) {
  for (const Matrix m : {Matrix::U, Matrix::V, Matrix::K, Matrix::Q}) {
    const auto data = params.data(m);
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!std::isfinite(data[i])) {
        std::ostringstream out;
        out << "matrix " << to_string(m) << " row " << i / params.cols(m)
            << " col " << i % params.cols(m) << " = " << data[i];
        return out.str();
      }
    }
  }
  return "none";
}

}  // namespace

template <typename T>
TrainReport train(std::span<const std::filesystem::path> corpus,
                  const TrainConfig& config, const Vocabulary& vocab,
                  const SubwordMap* subwords, TrainState<T>& state,
                  const TrainOptions& options) {
  using Clock = std::chrono::steady_clock;
  config.validate();
  auto& params = state.params;
  if (params.vocab_size() != vocab.size()) {
    throw Error("corpus/vocab mismatch: model has " +
                std::to_string(params.vocab_size()) + " words, vocabulary " +
                std::to_string(vocab.size()));
  }
  if (params.mode() != config.mode || params.dim() != config.dim ||
      (has_attention(config.mode) && params.dim_kq() != config.dim_kq)) {
    throw Error("model shape does not match the training config");
  }
  check_compatible(params, subwords);
  const SubwordMap* units = config.mode == Mode::AweS ? subwords : nullptr;

  const auto shards = make_shards(corpus, config.workers);
  const auto tokens_per_epoch = vocab.total_tokens();
  const double planned = static_cast<double>(tokens_per_epoch) * config.epochs;
  const int last_epoch =
      std::min(config.epochs, options.stop_after_epoch.value_or(config.epochs));

  TrainReport report;
  const auto run_start = Clock::now();
  for (int epoch = state.epochs_completed + 1; epoch <= last_epoch; ++epoch) {
    std::atomic<std::uint64_t> processed{
        static_cast<std::uint64_t>(epoch - 1) * tokens_per_epoch};
    std::atomic<double> loss_sum{0.0};
    std::atomic<std::uint64_t> window_count{0};
    std::atomic<std::uint64_t> word_count{0};
    std::atomic<bool> diverged{false};
    std::atomic<double> last_lr{config.initial_lr};
    const auto epoch_start = Clock::now();

    auto worker = [&](std::size_t w) {
      Rng rng(stream_seed(config.seed, epoch, w));
      SentenceReader reader(shards[w]);
      WindowGenerator generator(vocab, config.window);
      WindowKernel<T> kernel(config.model);
      SparseGradient grads;
      std::vector<std::string> sentence;
      std::vector<WordId> ids;
      std::vector<WordId> negatives(static_cast<std::size_t>(config.negatives));
      double local_loss = 0.0;
      std::uint64_t local_windows = 0;
      std::uint64_t local_words = 0;
      std::uint64_t next_report = config.progress_interval;
      double lr = config.initial_lr;
      while (!diverged.load(std::memory_order_relaxed) && reader.next(sentence)) {
        to_ids(sentence, vocab, ids);
        if (ids.empty()) continue;
        const auto before = processed.fetch_add(ids.size(), std::memory_order_relaxed);
        const double progress = std::min(1.0, static_cast<double>(before) / planned);
        lr = config.initial_lr - (config.initial_lr - config.min_lr) * progress;
        local_words += ids.size();
        generator.for_each_window(ids, rng, [&](const TrainingWindow& window) {
          for (auto& n : negatives) n = vocab.sample_negative(rng);
          const double loss = kernel.compute(window, negatives, params, units, grads);
          if (!std::isfinite(loss)) {
            diverged.store(true);
            return;
          }
          apply_update(params, grads, lr, config.kq_lr_multiplier);
          local_loss += loss;
          ++local_windows;
        });
        if (w == 0 && options.progress != nullptr && config.progress_interval > 0 &&
            local_words >= next_report) {
          next_report += config.progress_interval;
          const double secs =
              std::chrono::duration<double>(Clock::now() - epoch_start).count();
          char line[160];
          std::snprintf(line, sizeof line,
                        "epoch %d | lr %.6f | loss %.4f | words/sec %.0f", epoch,
                        lr, local_windows ? local_loss / local_windows : 0.0,
                        secs > 0 ? local_words * config.workers / secs : 0.0);
          *options.progress << line << '\n' << std::flush;
        }
      }
      loss_sum.fetch_add(local_loss);
      window_count.fetch_add(local_windows);
      word_count.fetch_add(local_words);
      if (w == 0) last_lr.store(lr);
    };

    if (config.workers == 1) {
      worker(0);
    } else {
      std::vector<std::jthread> threads;
      for (std::size_t w = 0; w < config.workers; ++w) threads.emplace_back(worker, w);
    }

    const double seconds =
        std::chrono::duration<double>(Clock::now() - epoch_start).count();
    if (diverged.load() || !params.all_finite()) {
      throw Error("training diverged in epoch " + std::to_string(epoch) +
                  ": non-finite loss or parameter (first bad entry: " +
                  first_non_finite(params) + ")");
    }
    if (word_count.load() == 0) {
      throw Error("corpus/vocab mismatch: no corpus token is in the vocabulary");
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.windows = window_count.load();
    stats.words = word_count.load();
    stats.mean_loss = stats.windows ? loss_sum.load() / stats.windows : 0.0;
    stats.seconds = seconds;
    stats.words_per_sec = seconds > 0 ? stats.words / seconds : 0.0;
    stats.windows_per_sec = seconds > 0 ? stats.windows / seconds : 0.0;
    stats.final_lr = last_lr.load();
    if (options.progress != nullptr) {
      char line[160];
      std::snprintf(line, sizeof line,
                    "epoch %d done | lr %.6f | loss %.4f | words/sec %.0f", epoch,
                    stats.final_lr, stats.mean_loss, stats.words_per_sec);
      *options.progress << line << '\n' << std::flush;
    }
    report.epochs.push_back(stats);
    report.total_windows += stats.windows;
    report.total_words += stats.words;
    state.epochs_completed = epoch;
  }
  report.wall_seconds =
      std::chrono::duration<double>(Clock::now() - run_start).count();
  if (report.wall_seconds > 0) {
    report.words_per_sec = report.total_words / report.wall_seconds;
    report.windows_per_sec = report.total_windows / report.wall_seconds;
  }
  return report;
}

#define AWE_INSTANTIATE_TRAINER(T)                                            \
  template class WindowKernel<T>;                                             \
  template SparseGradient gradients(const TrainingWindow&,                    \
                                    std::span<const WordId>,                  \
                                    const BasicModelParams<T>&,               \
                                    const SubwordMap*, const ModelOptions&);  \
  template void apply_update(BasicModelParams<T>&, const SparseGradient&,     \
                             double, double);                                 \
  template BasicModelParams<T> make_params(const TrainConfig&,                \
                                           const Vocabulary&,                 \
                                           const SubwordMap*);                \
  template TrainReport train(std::span<const std::filesystem::path>,          \
                             const TrainConfig&, const Vocabulary&,           \
                             const SubwordMap*, TrainState<T>&,               \
                             const TrainOptions&);

AWE_INSTANTIATE_TRAINER(float)
AWE_INSTANTIATE_TRAINER(double)

}  // namespace awe
