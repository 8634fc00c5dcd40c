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

#include "awe/common.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace awe {

namespace {
std::atomic<bool> g_quiet{false};
std::mutex g_log_mutex;
}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Cbow: return "cbow";
    case Mode::Awe: return "awe";
    case Mode::AweS: return "awe-s";
  }
  return "unknown";
}

Mode parse_mode(std::string_view text) {
  if (text == "cbow") return Mode::Cbow;
  if (text == "awe") return Mode::Awe;
  if (text == "awe-s" || text == "awe_s" || text == "awes") return Mode::AweS;
  throw std::invalid_argument("unknown mode '" + std::string(text) +
                              "' (expected cbow, awe or awe-s)");
}

void log_warning(std::string_view message) {
  if (g_quiet.load(std::memory_order_relaxed)) return;
  std::lock_guard lock(g_log_mutex);
  std::cerr << "warning: " << message << '\n';
}

void log_info(std::string_view message) {
  if (g_quiet.load(std::memory_order_relaxed)) return;
  std::lock_guard lock(g_log_mutex);
  std::cerr << message << '\n';
}

void set_quiet(bool quiet) { g_quiet.store(quiet); }

}  // namespace awe
