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

#include "awe/fetch.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "awe/common.hpp"
#include "httplib.h"

namespace awe {

namespace {

constexpr char kSumsFile[] = "SHA256SUMS";

using Sums = std::map<std::string, std::string>;

Sums read_sums(const std::filesystem::path& file) {
  Sums sums;
  std::ifstream in(file);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string digest;
    std::string name;
    if (fields >> digest >> name) sums[name] = digest;
  }
  return sums;
}

void write_sums(const std::filesystem::path& file, const Sums& sums) {
  std::ofstream out(file, std::ios::trunc);
  for (const auto& [name, digest] : sums) out << digest << "  " << name << '\n';
  if (!out) throw Error("cannot write " + file.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct SplitUrl {
  std::string origin;
  std::string prefix;
};

SplitUrl split_url(std::string_view url) {
  const auto scheme = url.find("://");
  if (scheme == std::string_view::npos) throw Error("bad URL: " + std::string(url));
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string_view::npos) return {std::string(url), "/"};
  std::string prefix(url.substr(slash));
  if (prefix.back() != '/') prefix.push_back('/');
  return {std::string(url.substr(0, slash)), prefix};
}

std::string download(httplib::Client& client, const std::string& path) {
  auto response = client.Get(path);
  if (!response) {
    throw Error("download of " + path + " failed: " + httplib::to_string(response.error()));
  }
  if (response->status != 200) {
    throw Error("download of " + path + " returned HTTP " + std::to_string(response->status));
  }
  return std::move(response->body);
}

}  // namespace

const std::vector<DatasetSource>& similarity_datasets() {
  static const std::vector<DatasetSource> datasets = {
      {"EN-MEN-TR-3k", "EN-MEN-TR-3k.txt"},
      {"EN-WS-353-ALL", "EN-WS-353-ALL.txt"},
      {"EN-WS-353-REL", "EN-WS-353-REL.txt"},
      {"EN-WS-353-SIM", "EN-WS-353-SIM.txt"},
      {"EN-SIMLEX-999", "EN-SIMLEX-999.txt"},
      {"EN-RW-STANFORD", "EN-RW-STANFORD.txt"},
      {"EN-RG-65", "EN-RG-65.txt"},
      {"EN-MTurk-287", "EN-MTurk-287.txt"},
  };
  return datasets;
}

std::filesystem::path default_data_dir() {
  if (const char* dir = std::getenv("AWE_DATA_DIR"); dir != nullptr && *dir != '\0') {
    return dir;
  }
  return "data/word-sim";
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::vector<FetchResult> fetch_datasets(const std::filesystem::path& dest,
                                        const std::vector<DatasetSource>& datasets,
                                        const FetchOptions& options) {
  std::filesystem::create_directories(dest);
  const auto sums_path = dest / kSumsFile;
  Sums sums = read_sums(sums_path);

  const auto url = split_url(options.base_url);
  std::unique_ptr<httplib::Client> client;

  std::vector<FetchResult> results;
  for (const auto& dataset : datasets) {
    FetchResult result{dataset.name, dest / (dataset.name + ".txt"), {}, false};
    std::string body;
    if (!options.force && std::filesystem::exists(result.path)) {
      body = read_file(result.path);
    } else {
      if (!client) {
        client = std::make_unique<httplib::Client>(url.origin);
        client->set_follow_location(true);
        client->set_connection_timeout(15);
        client->set_read_timeout(60);
      }
      body = download(*client, url.prefix + dataset.path);
      result.downloaded = true;
    }
    result.sha256 = sha256_hex(body);

    const auto pinned = sums.find(dataset.name);
    if (pinned != sums.end() && pinned->second != result.sha256) {
      throw Error("checksum mismatch for " + dataset.name + ": expected " + pinned->second +
                  ", got " + result.sha256);
    }
    if (result.downloaded) {
      const auto tmp = std::filesystem::path(result.path).concat(".part");
      {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(body.data(), static_cast<std::streamsize>(body.size()));
        if (!out) throw Error("cannot write " + tmp.string());
      }
      std::filesystem::rename(tmp, result.path);
    }
    if (pinned == sums.end()) {
      sums[dataset.name] = result.sha256;
      write_sums(sums_path, sums);
    }
    if (options.log != nullptr) {
      *options.log << (result.downloaded ? "fetched  " : "verified ") << dataset.name << "  "
                   << result.sha256 << '\n';
    }
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace awe
