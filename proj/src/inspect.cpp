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

#include "awe/inspect.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace awe {

std::vector<bool> frequent_words(const Vocabulary& vocab, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("frequent fraction must lie in (0, 1]");
  }
  const std::size_t n = vocab.size();
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))));
  std::vector<WordId> order(n);
  std::iota(order.begin(), order.end(), WordId{0});
  std::sort(order.begin(), order.end(), [&](WordId a, WordId b) {
    return vocab.count(a) != vocab.count(b) ? vocab.count(a) > vocab.count(b)
                                            : vocab.word(a) < vocab.word(b);
  });
  std::vector<bool> flags(n, false);
  for (std::size_t i = 0; i < std::min(keep, n); ++i) flags[order[i]] = true;
  return flags;
}

template <typename T>
AttentionTable attention_table(std::span<const std::string> sentence,
                               std::size_t masked_index,
                               const BasicModelParams<T>& params,
                               const Vocabulary& vocab,
                               const SubwordMap* subwords,
                               double frequent_fraction) {
  if (!has_attention(params.mode())) throw Error("attention undefined for CBOW");
  if (masked_index >= sentence.size()) {
    throw std::invalid_argument("masked index out of range");
  }
  check_compatible(params, subwords);
  const auto masked = vocab.find(sentence[masked_index]);
  if (!masked) {
    throw Error("masked word '" + sentence[masked_index] +
                "' is not in the vocabulary");
  }
  const auto frequent = frequent_words(vocab, frequent_fraction);
  AttentionTable table;
  table.sentence.assign(sentence.begin(), sentence.end());
  table.masked_index = masked_index;
  const auto k = params.row(Matrix::K, *masked);
  const auto u_masked = word_vector(*masked, params, subwords);
  std::vector<double> u(params.dim());
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    if (i == masked_index) continue;
    AttentionRow row;
    row.word = sentence[i];
    row.position = i;
    if (const auto id = vocab.find(sentence[i])) {
      row.in_vocab = true;
      row.frequent = frequent[*id];
      const auto q = params.row(Matrix::Q, *id);
      row.attention = std::exp(detail::dot(k.data(), q.data(), k.size()));
      word_vector(*id, params, subwords, u);
      row.dot = detail::dot(u_masked.data(), u.data(), u.size());
      row.similarity = std::exp(*row.dot);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

template AttentionTable attention_table(std::span<const std::string>, std::size_t,
                                        const BasicModelParams<float>&,
                                        const Vocabulary&, const SubwordMap*, double);
template AttentionTable attention_table(std::span<const std::string>, std::size_t,
                                        const BasicModelParams<double>&,
                                        const Vocabulary&, const SubwordMap*, double);

std::string to_json(const AttentionTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    auto value = [](const std::optional<double>& v) -> nlohmann::json {
      if (!v) return nullptr;
      return *v;
    };
    rows.push_back({{"word", row.word},
                    {"attention", value(row.attention)},
                    {"similarity", value(row.similarity)},
                    {"dot", value(row.dot)},
                    {"frequent", row.frequent}});
  }
  nlohmann::json out = {{"sentence", table.sentence},
                        {"masked", table.masked()},
                        {"rows", rows}};
  return out.dump(2);
}

std::string to_text(const AttentionTable& table) {
  std::vector<std::string> header{"mask: " + table.masked()};
  std::vector<std::string> attention{"attention weight"};
  std::vector<std::string> similarity{"similarity exp(u.u')"};
  std::vector<std::string> dot{"dot u.u'"};
  auto fmt = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    std::ostringstream out;
    out << std::setprecision(4) << *v;
    return out.str();
  };
  for (const auto& row : table.rows) {
    header.push_back(row.frequent ? row.word + "*" : row.word);
    attention.push_back(fmt(row.attention));
    similarity.push_back(fmt(row.similarity));
    dot.push_back(fmt(row.dot));
  }
  std::vector<std::size_t> width(header.size());
  for (const auto* line : {&header, &attention, &similarity, &dot}) {
    for (std::size_t i = 0; i < line->size(); ++i) {
      width[i] = std::max(width[i], (*line)[i].size());
    }
  }
  std::ostringstream out;
  for (const auto* line : {&header, &attention, &similarity, &dot}) {
    for (std::size_t i = 0; i < line->size(); ++i) {
      if (i > 0) out << " | ";
      out << std::left << std::setw(static_cast<int>(width[i])) << (*line)[i];
    }
    out << '\n';
  }
  out << "(* = frequent word)\n";
  return out.str();
}

AttentionContrast attention_contrast(std::span<const AttentionTable> tables) {
  AttentionContrast out;
  for (const auto& table : tables) {
    for (const auto& row : table.rows) {
      if (!row.attention) continue;
      if (row.frequent) {
        out.mean_frequent += *row.attention;
        ++out.frequent_rows;
      } else {
        out.mean_other += *row.attention;
        ++out.other_rows;
      }
    }
  }
  if (out.frequent_rows) out.mean_frequent /= static_cast<double>(out.frequent_rows);
  if (out.other_rows) out.mean_other /= static_cast<double>(out.other_rows);
  return out;
}

}  // namespace awe
