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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "awe/io.hpp"
#include "oracles.hpp"

using namespace awe;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = fs::path(AWE_FIXTURE_DIR) / "kjv_1mb.txt";

fs::path tmp(const std::string& name) {
  const fs::path dir = fs::path(AWE_TEST_TMP) / "io";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

template <typename T>
Checkpoint<T> toy_checkpoint(Mode mode, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Checkpoint<T> ck;
  ck.config.mode = mode;
  ck.config.dim = 5;
  ck.config.dim_kq = 3;
  ck.config.min_count = 1;
  ck.config.neg_table_size = 500;
  ck.vocab = Vocabulary::from_entries({"the", "happiest", "happy", "cat"}, {40, 30, 20, 10},
                                      ck.config.vocab_options());
  if (mode == Mode::AweS) {
    std::istringstream lemmas("happiest\tadj\thappy\nrunning\tverb\trun\nhappier\tadj\thappy\n");
    ck.subwords = SubwordMap::build(ck.vocab, LemmaTable::parse(lemmas));
  }
  const std::size_t units = ck.subwords ? ck.subwords->unit_count() : ck.vocab.size();
  ck.state.params = BasicModelParams<T>(mode, ck.vocab.size(), units, 5, 3);
  for (const Matrix m : {Matrix::U, Matrix::V, Matrix::K, Matrix::Q}) {
    oracle::fill_uniform(ck.state.params, m, 1.0, rng);
  }
  ck.state.epochs_completed = 2;
  return ck;
}

std::string serialize(const auto& ck) {
  std::ostringstream out(std::ios::binary);
  write_checkpoint(ck, out);
  return out.str();
}

template <typename T>
Checkpoint<T> deserialize(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_checkpoint<T>(in);
}

}  // namespace

TEST_CASE("config JSON round trip") {
  TrainConfig c;
  c.mode = Mode::AweS;
  c.dim = 123;
  c.initial_lr = 0.1 / 3;
  c.model.normalize_attention = true;
  c.seed = 0xFFFFFFFFFFFFull;
  CHECK(config_from_json(config_to_json(c)) == c);
  CHECK(config_from_json("{}") == TrainConfig{});
  CHECK(config_from_json(R"({"dim": 7})").dim == 7);
  CHECK_THROWS_AS(config_from_json("{"), Error);
  CHECK_THROWS_AS(config_from_json(R"({"dim": "big"})"), Error);
  CHECK_THROWS_AS(config_from_json(R"({"mode": "skipgram"})"), Error);
}

TEST_CASE("text export format") {
  Checkpoint<double> ck = toy_checkpoint<double>(Mode::Awe, 1);
  ck.vocab = Vocabulary::from_entries({"a", "b"}, {2, 1}, ck.config.vocab_options());
  ck.state.params = BasicModelParams<double>(Mode::Awe, 2, 2, 2, 1);
  ck.state.params.row(Matrix::U, 0)[0] = 0.5;
  ck.state.params.row(Matrix::U, 0)[1] = -1.0;
  ck.state.params.row(Matrix::U, 1)[0] = 0.1;
  ck.state.params.row(Matrix::U, 1)[1] = 1e-20;
  export_embeddings(ck.state.params, ck.vocab, nullptr, tmp("two.txt"));
  CHECK(slurp(tmp("two.txt")) == "2 2\na 0.5 -1\nb 0.1 1e-20\n");
}

TEST_CASE("export and import round trips") {
  for (const Mode mode : {Mode::Cbow, Mode::Awe, Mode::AweS}) {
    CAPTURE(to_string(mode));
    const auto ck = toy_checkpoint<float>(mode, 3);
    const ModelVectors<float> model(ck.state.params, ck.vocab, ck.subword_map());
    export_embeddings(ck.state.params, ck.vocab, ck.subword_map(), tmp("rt.txt"));
    export_embeddings_binary(ck.state.params, ck.vocab, ck.subword_map(), tmp("rt.bin"));
    const auto text = import_embeddings(tmp("rt.txt"));
    const auto binary = import_embeddings_binary(tmp("rt.bin"));
    REQUIRE(text.size() == ck.vocab.size());
    REQUIRE(binary.size() == ck.vocab.size());
    std::vector<double> want(5);
    for (std::size_t i = 0; i < ck.vocab.size(); ++i) {
      model.vector(i, want);
      CHECK(text.word(i) == ck.vocab.word(static_cast<WordId>(i)));
      CHECK(binary.word(i) == ck.vocab.word(static_cast<WordId>(i)));
      for (std::size_t j = 0; j < 5; ++j) {
        CHECK(text.row(i)[j] == want[j]);
        CHECK(binary.row(i)[j] == static_cast<float>(want[j]));
      }
    }
    if (mode == Mode::AweS) {
      // Exported AWE-S vectors are the composed sums.
      const WordId w = *ck.vocab.find("happiest");
      const auto units = ck.subwords->units_of(w);
      REQUIRE(units.size() == 2);
      for (std::size_t j = 0; j < 5; ++j) {
        CHECK(text.row(w)[j] == static_cast<double>(ck.state.params.row(Matrix::U, units[0])[j]) +
                                    ck.state.params.row(Matrix::U, units[1])[j]);
      }
    }
    const auto dataset = [] {
      std::istringstream in("the,cat,1\nhappiest,happy,9\nthe,happy,3\ncat,happiest,5\n");
      return SimilarityDataset::parse(in, "toy");
    }();
    CHECK(evaluate(text, dataset).spearman == evaluate(model, dataset).spearman);
  }
}

TEST_CASE("import errors") {
  std::ofstream(tmp("bad1.txt")) << "2 3\na 1 2 3\n";
  CHECK_THROWS_AS(import_embeddings(tmp("bad1.txt")), Error);
  std::ofstream(tmp("bad2.txt")) << "x y\n";
  CHECK_THROWS_AS(import_embeddings(tmp("bad2.txt")), Error);
  std::ofstream(tmp("bad3.txt")) << "1 3\na 1 x 3\n";
  CHECK_THROWS_AS(import_embeddings(tmp("bad3.txt")), Error);
  CHECK_THROWS_AS(import_embeddings(tmp("missing.txt")), Error);
  CHECK_THROWS_AS(export_embeddings(BasicModelParams<float>(Mode::Awe, 1, 1, 1, 1),
                                    toy_checkpoint<float>(Mode::Awe, 1).vocab, nullptr,
                                    "/nonexistent/dir/x.txt"),
                  Error);
}

TEST_CASE("checkpoint round trip") {
  for (const Mode mode : {Mode::Cbow, Mode::Awe, Mode::AweS}) {
    CAPTURE(to_string(mode));
    const auto ck = toy_checkpoint<float>(mode, 5);
    save_checkpoint(ck, tmp("a.ckpt"));
    const auto back = load_checkpoint<float>(tmp("a.ckpt"));
    CHECK(back.config == ck.config);
    CHECK(back.vocab.words() == ck.vocab.words());
    CHECK(back.vocab.counts() == ck.vocab.counts());
    CHECK(back.state.params == ck.state.params);
    CHECK(back.state.epochs_completed == 2);
    CHECK(back.subwords.has_value() == ck.subwords.has_value());
    if (ck.subwords) {
      CHECK(back.subwords->units() == ck.subwords->units());
      CHECK(back.subwords->oov_sets() == ck.subwords->oov_sets());
    }
    save_checkpoint(back, tmp("b.ckpt"));
    CHECK(slurp(tmp("a.ckpt")) == slurp(tmp("b.ckpt")));
  }
}

TEST_CASE("damaged checkpoints are rejected with offsets") {
  const auto bytes = serialize(toy_checkpoint<float>(Mode::AweS, 9));
  SUBCASE("every truncation") {
    for (std::size_t n = 0; n < bytes.size(); ++n) {
      CAPTURE(n);
      CHECK_THROWS_WITH_AS(deserialize<float>(bytes.substr(0, n)),
                           doctest::Contains("offset"), Error);
    }
  }
  SUBCASE("wrong magic") {
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_WITH_AS(deserialize<float>(bad), doctest::Contains("magic"), Error);
  }
  SUBCASE("version mismatch") {
    auto bad = bytes;
    bad[8] = 9;
    CHECK_THROWS_WITH_AS(deserialize<float>(bad), doctest::Contains("version 9"), Error);
  }
  SUBCASE("scalar width mismatch") {
    CHECK_THROWS_WITH_AS(deserialize<double>(bytes), doctest::Contains("32-bit"), Error);
  }
  SUBCASE("bad end marker") {
    auto bad = bytes;
    bad[bad.size() - 3] = 'Z';
    CHECK_THROWS_WITH_AS(deserialize<float>(bad), doctest::Contains("end marker"), Error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint<float>(tmp("none.ckpt")), Error);
  }
}

TEST_CASE("double checkpoints keep every bit") {
  const auto ck = toy_checkpoint<double>(Mode::Awe, 13);
  const auto back = deserialize<double>(serialize(ck));
  CHECK(back.state.params == ck.state.params);
}

TEST_CASE("resumed training equals an uninterrupted run") {
  const std::vector<fs::path> corpus{kFixture};
  for (const Mode mode : {Mode::Cbow, Mode::Awe}) {
    CAPTURE(to_string(mode));
    TrainConfig config;
    config.mode = mode;
    config.dim = 32;
    config.dim_kq = 8;
    config.epochs = 2;
    config.seed = 7;
    config.progress_interval = 0;
    const auto vocab = build_vocab_from_files(corpus, config.vocab_options());

    TrainState<float> full{make_params<float>(config, vocab, nullptr), 0};
    train<float>(corpus, config, vocab, nullptr, full);

    Checkpoint<float> ck{config, vocab, std::nullopt,
                         {make_params<float>(config, vocab, nullptr), 0}};
    TrainOptions stop;
    stop.stop_after_epoch = 1;
    train<float>(corpus, config, vocab, nullptr, ck.state, stop);
    CHECK(ck.state.epochs_completed == 1);
    save_checkpoint(ck, tmp("resume.ckpt"));
    auto resumed = load_checkpoint<float>(tmp("resume.ckpt"));
    train<float>(corpus, resumed.config, resumed.vocab, nullptr, resumed.state);
    CHECK(resumed.state.epochs_completed == 2);
    CHECK(resumed.state.params == full.params);
  }
}
