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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "awe/corpus.hpp"
#include "awe/eval.hpp"
#include "awe/model.hpp"
#include "awe/subword.hpp"
#include "awe/trainer.hpp"

namespace awe {

// ---------------------------------------------------------------------------
// word2vec formats

/// Text format: `N D` header, then `word v1 ... vD` per vocabulary word with
/// shortest round-trip decimals. AWE-S writes the composed word vectors.
template <typename T>
void export_embeddings(const BasicModelParams<T>& params, const Vocabulary& vocab,
                       const SubwordMap* subwords,
                       const std::filesystem::path& path);

/// Binary format: `N D\n`, then `word ` followed by D little-endian float32
/// values and a newline.
template <typename T>
void export_embeddings_binary(const BasicModelParams<T>& params,
                              const Vocabulary& vocab, const SubwordMap* subwords,
                              const std::filesystem::path& path);

EmbeddingTable import_embeddings(const std::filesystem::path& path);
EmbeddingTable import_embeddings_binary(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Config

std::string config_to_json(const TrainConfig& config);
TrainConfig config_from_json(std::string_view text);

// ---------------------------------------------------------------------------
// Checkpoints

template <typename T>
struct Checkpoint {
  TrainConfig config;
  Vocabulary vocab;
  std::optional<SubwordMap> subwords;
  TrainState<T> state;

  const SubwordMap* subword_map() const {
    return subwords ? &*subwords : nullptr;
  }
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Little-endian container: magic, format version, scalar width, config
/// echo, vocabulary, subword map, matrices. Loading restores the exact bits.
template <typename T>
void write_checkpoint(const Checkpoint<T>& checkpoint, std::ostream& out);
template <typename T>
void save_checkpoint(const Checkpoint<T>& checkpoint,
                     const std::filesystem::path& path);

/// Throws awe::Error naming the byte offset on truncated or corrupt input.
template <typename T>
Checkpoint<T> read_checkpoint(std::istream& in);
template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path);

}  // namespace awe
