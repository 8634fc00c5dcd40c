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

#include "awe/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <type_traits>

#include "json.hpp"

namespace awe {

namespace {

// ---------------------------------------------------------------------------
// Little-endian primitives

template <typename U>
void put_le(std::ostream& out, U value) {
  static_assert(std::is_unsigned_v<U>);
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename F>
void put_float(std::ostream& out, F value) {
  if constexpr (sizeof(F) == 4) {
    put_le(out, std::bit_cast<std::uint32_t>(value));
  } else {
    put_le(out, std::bit_cast<std::uint64_t>(value));
  }
}

void put_string(std::ostream& out, std::string_view text) {
  put_le(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw Error("checkpoint truncated at offset " + std::to_string(offset_ + in_.gcount()) +
                  " while reading " + what);
    }
    offset_ += n;
  }

  template <typename U>
  U le(const char* what) {
    std::array<unsigned char, sizeof(U)> raw;
    bytes(reinterpret_cast<char*>(raw.data()), raw.size(), what);
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(raw[i]) << (8 * i);
    return value;
  }

  template <typename F>
  F real(const char* what) {
    if constexpr (sizeof(F) == 4) {
      return std::bit_cast<F>(le<std::uint32_t>(what));
    } else {
      return std::bit_cast<F>(le<std::uint64_t>(what));
    }
  }

  std::string string(const char* what, std::size_t limit = 1u << 24) {
    const auto at = offset_;
    const auto n = le<std::uint32_t>(what);
    if (n > limit) corrupt(at, std::string(what) + " length " + std::to_string(n));
    std::string out(n, '\0');
    bytes(out.data(), n, what);
    return out;
  }

  [[noreturn]] void corrupt(std::uint64_t at, const std::string& what) const {
    throw Error("corrupt checkpoint at offset " + std::to_string(at) + ": " + what);
  }

  std::uint64_t offset() const { return offset_; }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

constexpr std::array<char, 8> kMagic{'A', 'W', 'E', 'C', 'K', 'P', 'T', '\0'};
constexpr std::array<char, 8> kEndMagic{'A', 'W', 'E', 'E', 'N', 'D', '\0', '\0'};
constexpr Matrix kMatrices[] = {Matrix::U, Matrix::V, Matrix::K, Matrix::Q};

void write_shortest(std::ostream& out, double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  out.write(buf, result.ptr - buf);
}

}  // namespace

// ---------------------------------------------------------------------------
// word2vec formats

template <typename T>
void export_embeddings(const BasicModelParams<T>& params, const Vocabulary& vocab,
                       const SubwordMap* subwords,
                       const std::filesystem::path& path) {
  const ModelVectors<T> vectors(params, vocab, subwords);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write embeddings to " + path.string());
  out << vocab.size() << ' ' << params.dim() << '\n';
  std::vector<double> v(params.dim());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    vectors.vector(i, v);
    out << vocab.word(static_cast<WordId>(i));
    for (const double x : v) {
      out << ' ';
      write_shortest(out, x);
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing embeddings to " + path.string());
}

template <typename T>
void export_embeddings_binary(const BasicModelParams<T>& params,
                              const Vocabulary& vocab, const SubwordMap* subwords,
                              const std::filesystem::path& path) {
  const ModelVectors<T> vectors(params, vocab, subwords);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write embeddings to " + path.string());
  out << vocab.size() << ' ' << params.dim() << '\n';
  std::vector<double> v(params.dim());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    vectors.vector(i, v);
    out << vocab.word(static_cast<WordId>(i)) << ' ';
    for (const double x : v) put_float(out, static_cast<float>(x));
    out << '\n';
  }
  if (!out) throw Error("failed writing embeddings to " + path.string());
}

EmbeddingTable import_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read embeddings from " + path.string());
  std::size_t n = 0;
  std::size_t dim = 0;
  std::string line;
  if (!std::getline(in, line) || !(std::istringstream(line) >> n >> dim) || dim == 0) {
    throw Error(path.string() + ": bad header, expected 'N D'");
  }
  EmbeddingTable table(dim);
  std::vector<double> values(dim);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw Error(path.string() + ": expected " + std::to_string(n) + " vectors, found " +
                  std::to_string(i));
    }
    const auto space = line.find(' ');
    if (space == std::string::npos) throw Error(path.string() + ": malformed line " + std::to_string(i + 2));
    const char* p = line.data() + space;
    const char* end = line.data() + line.size();
    for (std::size_t j = 0; j < dim; ++j) {
      while (p < end && *p == ' ') ++p;
      const auto result = std::from_chars(p, end, values[j]);
      if (result.ec != std::errc{}) {
        throw Error(path.string() + ": bad number on line " + std::to_string(i + 2));
      }
      p = result.ptr;
    }
    table.add(line.substr(0, space), values);
  }
  return table;
}

EmbeddingTable import_embeddings_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read embeddings from " + path.string());
  std::size_t n = 0;
  std::size_t dim = 0;
  std::string line;
  if (!std::getline(in, line) || !(std::istringstream(line) >> n >> dim) || dim == 0) {
    throw Error(path.string() + ": bad header, expected 'N D'");
  }
  Reader reader(in);
  EmbeddingTable table(dim);
  std::vector<double> values(dim);
  std::string word;
  for (std::size_t i = 0; i < n; ++i) {
    word.clear();
    char c = 0;
    while (in.get(c) && c != ' ') {
      if (c != '\n') word.push_back(c);
    }
    if (!in) throw Error(path.string() + ": truncated at vector " + std::to_string(i));
    for (std::size_t j = 0; j < dim; ++j) values[j] = reader.real<float>("vector");
    table.add(word, values);
  }
  return table;
}

#define AWE_INSTANTIATE_EXPORT(T)                                             \
  template void export_embeddings(const BasicModelParams<T>&,                 \
                                  const Vocabulary&, const SubwordMap*,       \
                                  const std::filesystem::path&);              \
  template void export_embeddings_binary(const BasicModelParams<T>&,          \
                                         const Vocabulary&, const SubwordMap*,\
                                         const std::filesystem::path&);

AWE_INSTANTIATE_EXPORT(float)
AWE_INSTANTIATE_EXPORT(double)

// ---------------------------------------------------------------------------
// Config

std::string config_to_json(const TrainConfig& c) {
  const nlohmann::json j = {
      {"mode", std::string(to_string(c.mode))},
      {"dim", c.dim},
      {"dim_kq", c.dim_kq},
      {"window", c.window},
      {"negatives", c.negatives},
      {"epochs", c.epochs},
      {"initial_lr", c.initial_lr},
      {"min_lr", c.min_lr},
      {"kq_lr_multiplier", c.kq_lr_multiplier},
      {"subsample", c.subsample_t},
      {"min_count", c.min_count},
      {"max_vocab", c.max_vocab},
      {"neg_table_size", c.neg_table_size},
      {"alpha", c.alpha},
      {"seed", c.seed},
      {"workers", c.workers},
      {"attention_clamp", c.model.attention_clamp},
      {"logit_clamp", c.model.logit_clamp},
      {"normalize_attention", c.model.normalize_attention},
      {"progress_interval", c.progress_interval},
  };
  return j.dump();
}

TrainConfig config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad config JSON: ") + e.what());
  }
  TrainConfig c;
  try {
    c.mode = parse_mode(j.value("mode", std::string(to_string(c.mode))));
    c.dim = j.value("dim", c.dim);
    c.dim_kq = j.value("dim_kq", c.dim_kq);
    c.window = j.value("window", c.window);
    c.negatives = j.value("negatives", c.negatives);
    c.epochs = j.value("epochs", c.epochs);
    c.initial_lr = j.value("initial_lr", c.initial_lr);
    c.min_lr = j.value("min_lr", c.min_lr);
    c.kq_lr_multiplier = j.value("kq_lr_multiplier", c.kq_lr_multiplier);
    c.subsample_t = j.value("subsample", c.subsample_t);
    c.min_count = j.value("min_count", c.min_count);
    c.max_vocab = j.value("max_vocab", c.max_vocab);
    c.neg_table_size = j.value("neg_table_size", c.neg_table_size);
    c.alpha = j.value("alpha", c.alpha);
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    c.model.attention_clamp = j.value("attention_clamp", c.model.attention_clamp);
    c.model.logit_clamp = j.value("logit_clamp", c.model.logit_clamp);
    c.model.normalize_attention = j.value("normalize_attention", c.model.normalize_attention);
    c.progress_interval = j.value("progress_interval", c.progress_interval);
  } catch (const std::exception& e) {
    throw Error(std::string("bad config field: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Checkpoints

template <typename T>
void write_checkpoint(const Checkpoint<T>& ck, std::ostream& out) {
  const auto& params = ck.state.params;
  out.write(kMagic.data(), kMagic.size());
  put_le(out, kCheckpointVersion);
  put_le(out, static_cast<std::uint32_t>(sizeof(T)));
  const auto config = config_to_json(ck.config);
  put_le(out, static_cast<std::uint64_t>(config.size()));
  out.write(config.data(), static_cast<std::streamsize>(config.size()));

  put_le(out, static_cast<std::uint64_t>(ck.vocab.size()));
  for (WordId w = 0; w < ck.vocab.size(); ++w) {
    put_string(out, ck.vocab.word(w));
    put_le(out, ck.vocab.count(w));
  }

  put_le(out, static_cast<std::uint8_t>(ck.subwords ? 1 : 0));
  if (ck.subwords) {
    const auto& map = *ck.subwords;
    put_le(out, static_cast<std::uint64_t>(map.unit_count()));
    for (const auto& unit : map.units()) put_string(out, unit);
    for (WordId w = 0; w < ck.vocab.size(); ++w) {
      const auto set = map.units_of(w);
      put_le(out, static_cast<std::uint8_t>(set.size()));
      for (const UnitId id : set) put_le(out, id);
    }
    put_le(out, static_cast<std::uint64_t>(map.oov_sets().size()));
    for (const auto& [word, set] : map.oov_sets()) {
      put_string(out, word);
      put_le(out, static_cast<std::uint8_t>(set.size()));
      for (const UnitId id : set) put_le(out, id);
    }
  }

  put_le(out, static_cast<std::uint8_t>(params.mode()));
  put_le(out, static_cast<std::uint64_t>(params.vocab_size()));
  put_le(out, static_cast<std::uint64_t>(params.rows(Matrix::U)));
  put_le(out, static_cast<std::uint64_t>(params.dim()));
  put_le(out, static_cast<std::uint64_t>(params.dim_kq()));
  put_le(out, static_cast<std::uint32_t>(ck.state.epochs_completed));
  for (const Matrix m : kMatrices) {
    const auto data = params.data(m);
    put_le(out, static_cast<std::uint64_t>(data.size()));
    for (const T x : data) put_float(out, x);
  }
  out.write(kEndMagic.data(), kEndMagic.size());
}

template <typename T>
void save_checkpoint(const Checkpoint<T>& checkpoint,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  write_checkpoint(checkpoint, out);
  out.flush();
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

template <typename T>
Checkpoint<T> read_checkpoint(std::istream& in) {
  Reader r(in);
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size(), "magic");
  if (magic != kMagic) r.corrupt(0, "bad magic, not an AWE checkpoint");
  const auto version = r.le<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw Error("unsupported checkpoint version " + std::to_string(version) +
                " (this build reads version " + std::to_string(kCheckpointVersion) + ")");
  }
  const auto scalar = r.le<std::uint32_t>("scalar width");
  if (scalar != sizeof(T)) {
    throw Error("checkpoint stores " + std::to_string(scalar * 8) +
                "-bit parameters; this build expects " + std::to_string(sizeof(T) * 8));
  }
  const auto config_at = r.offset();
  const auto config_len = r.le<std::uint64_t>("config length");
  if (config_len > (1u << 20)) r.corrupt(config_at, "config length");
  std::string config_text(config_len, '\0');
  r.bytes(config_text.data(), config_len, "config");

  Checkpoint<T> ck;
  ck.config = config_from_json(config_text);

  const auto vocab_at = r.offset();
  const auto n = r.le<std::uint64_t>("vocabulary size");
  if (n == 0 || n > std::numeric_limits<WordId>::max()) r.corrupt(vocab_at, "vocabulary size");
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  for (std::uint64_t i = 0; i < n; ++i) {
    words.push_back(r.string("vocabulary word"));
    counts.push_back(r.le<std::uint64_t>("word count"));
  }
  try {
    ck.vocab = Vocabulary::from_entries(std::move(words), std::move(counts),
                                        ck.config.vocab_options());
  } catch (const std::exception& e) {
    r.corrupt(vocab_at, std::string("vocabulary: ") + e.what());
  }

  const auto has_subwords = r.le<std::uint8_t>("subword flag");
  if (has_subwords > 1) r.corrupt(r.offset() - 1, "subword flag");
  if (has_subwords == 1) {
    const auto map_at = r.offset();
    const auto units_n = r.le<std::uint64_t>("unit count");
    if (units_n > (std::uint64_t{1} << 32)) r.corrupt(map_at, "unit count");
    std::vector<std::string> units;
    for (std::uint64_t i = 0; i < units_n; ++i) units.push_back(r.string("unit"));
    std::vector<std::vector<UnitId>> sets(n);
    for (auto& set : sets) {
      const auto k = r.le<std::uint8_t>("set size");
      for (std::uint8_t j = 0; j < k; ++j) set.push_back(r.le<std::uint32_t>("unit id"));
    }
    const auto oov_n = r.le<std::uint64_t>("oov count");
    std::map<std::string, std::vector<UnitId>, std::less<>> oov;
    for (std::uint64_t i = 0; i < oov_n; ++i) {
      auto word = r.string("oov word");
      const auto k = r.le<std::uint8_t>("set size");
      std::vector<UnitId> set;
      for (std::uint8_t j = 0; j < k; ++j) set.push_back(r.le<std::uint32_t>("unit id"));
      oov.emplace(std::move(word), std::move(set));
    }
    try {
      ck.subwords = SubwordMap::from_parts(ck.vocab, std::move(units), sets, std::move(oov));
    } catch (const std::exception& e) {
      r.corrupt(map_at, std::string("subword map: ") + e.what());
    }
  }

  const auto shape_at = r.offset();
  const auto mode = r.le<std::uint8_t>("mode");
  if (mode > 2) r.corrupt(shape_at, "mode");
  const auto vocab_size = r.le<std::uint64_t>("model vocabulary size");
  const auto unit_rows = r.le<std::uint64_t>("unit rows");
  const auto dim = r.le<std::uint64_t>("dim");
  const auto dim_kq = r.le<std::uint64_t>("dim_kq");
  const auto epochs = r.le<std::uint32_t>("epochs completed");
  if (vocab_size != n || dim == 0 || dim > (1u << 20) || dim_kq > (1u << 20) ||
      unit_rows > (std::uint64_t{1} << 32)) {
    r.corrupt(shape_at, "model shape");
  }
  try {
    ck.state.params = BasicModelParams<T>(static_cast<Mode>(mode), vocab_size,
                                          unit_rows, dim, dim_kq);
  } catch (const std::exception& e) {
    r.corrupt(shape_at, std::string("model shape: ") + e.what());
  }
  ck.state.epochs_completed = static_cast<int>(epochs);
  for (const Matrix m : kMatrices) {
    const auto at = r.offset();
    const auto size = r.le<std::uint64_t>("matrix size");
    auto data = ck.state.params.data(m);
    if (size != data.size()) {
      r.corrupt(at, "matrix " + std::string(to_string(m)) + " has " +
                        std::to_string(size) + " entries, expected " +
                        std::to_string(data.size()));
    }
    for (auto& x : data) x = r.real<T>("matrix data");
  }
  std::array<char, 8> end{};
  r.bytes(end.data(), end.size(), "end marker");
  if (end != kEndMagic) r.corrupt(r.offset() - end.size(), "bad end marker");
  if (ck.config.mode != ck.state.params.mode()) r.corrupt(shape_at, "mode differs from config");
  try {
    check_compatible(ck.state.params, ck.subword_map());
  } catch (const std::exception& e) {
    r.corrupt(shape_at, e.what());
  }
  return ck;
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read checkpoint " + path.string());
  return read_checkpoint<T>(in);
}

#define AWE_INSTANTIATE_CHECKPOINT(T)                                          \
  template void write_checkpoint(const Checkpoint<T>&, std::ostream&);         \
  template void save_checkpoint(const Checkpoint<T>&,                          \
                                const std::filesystem::path&);                 \
  template Checkpoint<T> read_checkpoint<T>(std::istream&);                    \
  template Checkpoint<T> load_checkpoint<T>(const std::filesystem::path&);

AWE_INSTANTIATE_CHECKPOINT(float)
AWE_INSTANTIATE_CHECKPOINT(double)

}  // namespace awe
