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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "awe/corpus.hpp"
#include "awe/model.hpp"
#include "awe/subword.hpp"

namespace awe {

struct AttentionRow {
  std::string word;
  std::size_t position = 0;
  bool in_vocab = false;
  bool frequent = false;
  // Empty for out-of-vocabulary tokens.
  std::optional<double> attention;   // exp(k_masked . q_word), unclamped
  std::optional<double> dot;         // u_masked . u_word
  std::optional<double> similarity;  // exp(dot)
};

struct AttentionTable {
  std::vector<std::string> sentence;
  std::size_t masked_index = 0;
  std::vector<AttentionRow> rows;  // one per non-masked token, in order

  const std::string& masked() const { return sentence.at(masked_index); }
};

/// Flags the most frequent `fraction` of the vocabulary (at least one word),
/// ranking by count with ties broken lexicographically.
std::vector<bool> frequent_words(const Vocabulary& vocab, double fraction);

/// Attention and word-vector similarity between the masked token and every
/// other token of the sentence. Values are raw, without clamping.
template <typename T>
AttentionTable attention_table(std::span<const std::string> sentence,
                               std::size_t masked_index,
                               const BasicModelParams<T>& params,
                               const Vocabulary& vocab,
                               const SubwordMap* subwords,
                               double frequent_fraction = 0.001);

/// `{sentence, masked, rows:[{word, attention, similarity, dot, frequent}]}`;
/// out-of-vocabulary rows carry nulls.
std::string to_json(const AttentionTable& table);
std::string to_text(const AttentionTable& table);

struct AttentionContrast {
  double mean_frequent = 0.0;
  double mean_other = 0.0;
  std::size_t frequent_rows = 0;
  std::size_t other_rows = 0;
};

/// Mean attention on frequent versus other in-vocabulary context words,
/// pooled over all tables.
AttentionContrast attention_contrast(std::span<const AttentionTable> tables);

}  // namespace awe
