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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace awe {

using WordId = std::uint32_t;

#ifdef AWE_PARAMS_DOUBLE
using Real = double;
#else
using Real = float;
#endif

/// Runtime failure the caller can report (bad input file, divergence, ...).
/// Contract violations on arguments throw std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode : std::uint8_t { Cbow = 0, Awe = 1, AweS = 2 };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

inline bool has_attention(Mode mode) { return mode != Mode::Cbow; }

// Diagnostics go to stderr; tests may silence them.
void log_warning(std::string_view message);
void log_info(std::string_view message);
void set_quiet(bool quiet);

}  // namespace awe
