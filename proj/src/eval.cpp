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

#include "awe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace awe {

// ---------------------------------------------------------------------------
// Datasets

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  char delim = 0;
  if (line.find('\t') != std::string::npos) {
    delim = '\t';
  } else if (line.find(',') != std::string::npos) {
    delim = ',';
  }
  if (delim != 0) {
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, delim)) fields.push_back(field);
  } else {
    std::istringstream in(line);
    std::string field;
    while (in >> field) fields.push_back(field);
  }
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t\"");
    const auto e = f.find_last_not_of(" \t\"");
    f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
  }
  return fields;
}

std::optional<double> parse_number(const std::string& text) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) return std::nullopt;
    return value;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

SimilarityDataset SimilarityDataset::load(const std::filesystem::path& path,
                                          std::string name) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read similarity dataset " + path.string());
  if (name.empty()) name = path.stem().string();
  return parse(in, std::move(name));
}

SimilarityDataset SimilarityDataset::parse(std::istream& in, std::string name) {
  SimilarityDataset dataset;
  dataset.name = std::move(name);
  Tokenizer tokenizer;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') {
      continue;
    }
    const auto fields = split_fields(line);
    const auto score = fields.size() >= 3 ? parse_number(fields[2]) : std::nullopt;
    if (!score) {
      if (!seen_data) {  // header
        seen_data = true;
        continue;
      }
      throw Error(dataset.name + " line " + std::to_string(line_no) +
                  ": expected word_a, word_b, score");
    }
    seen_data = true;
    if (!std::isfinite(*score)) {
      throw Error(dataset.name + " line " + std::to_string(line_no) +
                  ": non-finite score");
    }
    SimilarityPair pair;
    if (!tokenizer.normalize(fields[0], pair.a) ||
        !tokenizer.normalize(fields[1], pair.b)) {
      throw Error(dataset.name + " line " + std::to_string(line_no) +
                  ": empty word");
    }
    pair.score = *score;
    dataset.pairs.push_back(std::move(pair));
  }
  if (dataset.pairs.empty()) throw Error("dataset " + dataset.name + " has no pairs");
  return dataset;
}

// ---------------------------------------------------------------------------
// Statistics

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine of vectors of different size");
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) {
    log_warning("cosine with a zero vector is taken as 0");
    return 0.0;
  }
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: lists differ in length");
  if (x.size() < 2) throw std::invalid_argument("spearman needs at least two values");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw std::invalid_argument("spearman: non-finite value");
    }
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  // Both rank lists have mean (n + 1) / 2.
  const double mean = 0.5 * (n + 1.0);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("zero rank variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Word vector sources

template <typename T>
ModelVectors<T>::ModelVectors(const BasicModelParams<T>& params,
                              const Vocabulary& vocab,
                              const SubwordMap* subwords)
    : params_(&params), vocab_(&vocab), subwords_(subwords) {
  if (params.vocab_size() != vocab.size()) {
    throw Error("model and vocabulary sizes differ");
  }
  check_compatible(params, subwords);
}

template <typename T>
void ModelVectors<T>::vector(std::size_t index, std::span<double> out) const {
  word_vector(static_cast<WordId>(index), *params_, subwords_, out);
}

template <typename T>
std::optional<std::vector<double>> ModelVectors<T>::lookup(
    std::string_view word) const {
  if (const auto id = vocab_->find(word)) {
    return word_vector(*id, *params_, subwords_);
  }
  if (params_->mode() == Mode::AweS) {
    const auto units = subwords_->compose(word, *vocab_);
    if (!units.empty()) return compose_units<T>(units, *params_);
  }
  return std::nullopt;
}

template class ModelVectors<float>;
template class ModelVectors<double>;

void EmbeddingTable::add(std::string word, std::span<const double> values) {
  if (values.size() != dim_) throw std::invalid_argument("vector has the wrong dimension");
  if (!index_.emplace(word, words_.size()).second) {
    throw Error("duplicate word '" + word + "' in embedding table");
  }
  words_.push_back(std::move(word));
  data_.insert(data_.end(), values.begin(), values.end());
}

void EmbeddingTable::vector(std::size_t index, std::span<double> out) const {
  const auto r = row(index);
  std::copy(r.begin(), r.end(), out.begin());
}

std::optional<std::vector<double>> EmbeddingTable::lookup(
    std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  const auto r = row(it->second);
  return std::vector<double>(r.begin(), r.end());
}

// ---------------------------------------------------------------------------
// Evaluation

ScoreReport evaluate(const WordVectors& vectors, const SimilarityDataset& dataset) {
  ScoreReport report;
  report.dataset = dataset.name;
  report.pairs_total = dataset.pairs.size();
  std::vector<double> model;
  std::vector<double> human;
  for (const auto& pair : dataset.pairs) {
    const auto a = vectors.lookup(pair.a);
    if (!a) continue;
    const auto b = vectors.lookup(pair.b);
    if (!b) continue;
    model.push_back(cosine(*a, *b));
    human.push_back(pair.score);
  }
  report.pairs_evaluated = model.size();
  if (model.size() < 2) {
    throw Error("dataset " + dataset.name + ": fewer than two evaluable pairs (" +
                std::to_string(model.size()) + " of " +
                std::to_string(report.pairs_total) + ")");
  }
  report.spearman = spearman(model, human);
  return report;
}

std::string reports_to_json(std::span<const ScoreReport> reports) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : reports) {
    out.push_back({{"dataset", r.dataset},
                   {"spearman", r.spearman},
                   {"pairs_total", r.pairs_total},
                   {"pairs_evaluated", r.pairs_evaluated}});
  }
  return out.dump(2);
}

std::string reports_to_table(std::string_view model_name,
                             std::span<const ScoreReport> reports) {
  std::vector<std::size_t> width;
  for (const auto& r : reports) width.push_back(std::max<std::size_t>(r.dataset.size(), 6));
  const std::size_t first = std::max<std::size_t>(model_name.size(), 8);
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(first)) << "Model";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out << " | " << std::setw(static_cast<int>(width[i])) << reports[i].dataset;
  }
  out << '\n' << std::setw(static_cast<int>(first)) << model_name;
  out << std::fixed << std::setprecision(3);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out << " | " << std::setw(static_cast<int>(width[i])) << reports[i].spearman;
  }
  out << '\n' << std::setw(static_cast<int>(first)) << "coverage";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out << " | " << std::setw(static_cast<int>(width[i])) << reports[i].coverage();
  }
  out << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Neighbors

NeighborIndex::NeighborIndex(const WordVectors& vectors)
    : vectors_(&vectors), dim_(vectors.dim()), unit_rows_(vectors.size() * dim_) {
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const std::span<double> row(unit_rows_.data() + i * dim_, dim_);
    vectors.vector(i, row);
    double norm = 0.0;
    for (const double x : row) norm += x * x;
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (double& x : row) x /= norm;
    }
  }
}

std::vector<Neighbor> NeighborIndex::query(std::span<const double> query,
                                           std::size_t k,
                                           std::string_view exclude) const {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  if (query.size() != dim_) throw std::invalid_argument("query has the wrong dimension");
  double norm = 0.0;
  for (const double x : query) norm += x * x;
  norm = std::sqrt(norm);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(vectors_->size());
  for (std::size_t i = 0; i < vectors_->size(); ++i) {
    if (!exclude.empty() && vectors_->word(i) == exclude) continue;
    double dot = 0.0;
    const double* row = unit_rows_.data() + i * dim_;
    for (std::size_t j = 0; j < dim_; ++j) dot += row[j] * query[j];
    scored.emplace_back(norm > 0.0 ? dot / norm : 0.0, i);
  }
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first > b.first : a.second < b.second;
                    });
  std::vector<Neighbor> out;
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back({vectors_->word(scored[i].second), scored[i].first});
  }
  return out;
}

std::vector<Neighbor> nearest_neighbors(std::string_view word,
                                        const WordVectors& vectors,
                                        std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  const auto query = vectors.lookup(word);
  if (!query) throw Error("word not representable: " + std::string(word));
  return NeighborIndex(vectors).query(*query, k, word);
}

}  // namespace awe
