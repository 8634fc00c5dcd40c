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
#include <string>
#include <string_view>
#include <vector>

namespace awe {

struct DatasetSource {
  std::string name;  // also the local file stem
  std::string path;  // relative to the base URL
};

/// The eight word-similarity benchmarks.
const std::vector<DatasetSource>& similarity_datasets();

inline constexpr std::string_view kDefaultDatasetBase =
    "https://raw.githubusercontent.com/mfaruqui/eval-word-vectors/master/data/word-sim/";

/// `$AWE_DATA_DIR` when set, otherwise `data/word-sim`.
std::filesystem::path default_data_dir();

std::string sha256_hex(std::string_view bytes);

struct FetchOptions {
  std::string base_url{kDefaultDatasetBase};
  bool force = false;  // re-download files already present
  std::ostream* log = nullptr;
};

struct FetchResult {
  std::string name;
  std::filesystem::path path;
  std::string sha256;
  bool downloaded = false;
};

/// Downloads each dataset into `dest` as `<name>.txt`. Digests are pinned in
/// `dest/SHA256SUMS` the first time a file is seen; later fetches must match
/// or the call throws awe::Error.
std::vector<FetchResult> fetch_datasets(const std::filesystem::path& dest,
                                        const std::vector<DatasetSource>& datasets,
                                        const FetchOptions& options = {});

}  // namespace awe
