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

#include <cmath>
#include <random>
#include <sstream>

#include "awe/eval.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace awe;

namespace {

SimilarityDataset parse(const std::string& text, const std::string& name = "toy") {
  std::istringstream in(text);
  return SimilarityDataset::parse(in, name);
}

std::vector<double> random_list(std::mt19937_64& rng, std::size_t n, int distinct) {
  std::uniform_int_distribution<int> v(0, distinct - 1);
  std::vector<double> out(n);
  for (auto& x : out) x = v(rng) * 0.5;
  return out;
}

bool constant(const std::vector<double>& x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
}

}  // namespace

TEST_CASE("cosine") {
  const std::vector<double> a{1.0, 0.0};
  const std::vector<double> b{1.0, 1.0};
  const std::vector<double> c{0.0, 3.0};
  const std::vector<double> zero{0.0, 0.0};
  CHECK(cosine(b, b) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine(a, c) == 0.0);
  CHECK(cosine(a, b) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(cosine(a, zero) == 0.0);
  SUBCASE("scale invariance") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 100; ++i) {
      std::vector<double> x(5);
      std::vector<double> y(5);
      for (auto& v : x) v = u(rng);
      for (auto& v : y) v = u(rng);
      auto xs = x;
      auto ys = y;
      for (auto& v : xs) v *= 3.5;
      for (auto& v : ys) v *= 0.01;
      CHECK(cosine(xs, ys) == doctest::Approx(cosine(x, y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("average ranks") {
  const std::vector<double> x{10, 20, 20, 5, 20};
  CHECK(average_ranks(x) == std::vector<double>{2, 4, 4, 1, 4});
}

TEST_CASE("spearman examples") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(spearman(x, std::vector<double>{1, 3, 2, 4}) == 0.8);
  CHECK(spearman(x, std::vector<double>{2, 5, 9, 100}) == 1.0);
  CHECK(spearman(x, std::vector<double>{4, 3, 2, 1}) == -1.0);
  CHECK_THROWS_WITH_AS(spearman(x, std::vector<double>{1, 1, 1, 1}), "zero rank variance",
                       Error);
  CHECK_THROWS_AS(spearman(x, std::vector<double>{1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(spearman(std::vector<double>{1}, std::vector<double>{1}),
                  std::invalid_argument);
}

TEST_CASE("spearman matches the rank-then-Pearson oracle, ties included") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(2, 50);
  int compared = 0;
  while (compared < 1000) {
    const auto n = len(rng);
    const auto x = random_list(rng, n, 1 + static_cast<int>(rng() % 12));
    const auto y = random_list(rng, n, 1 + static_cast<int>(rng() % 12));
    if (constant(x) || constant(y)) continue;
    CHECK(std::fabs(spearman(x, y) - static_cast<double>(oracle::spearman(x, y))) < 1e-12);
    ++compared;
  }
}

TEST_CASE("spearman properties") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = random_list(rng, 20, 8);
    const auto y = random_list(rng, 20, 8);
    if (constant(x) || constant(y)) continue;
    const double s = spearman(x, y);
    CHECK(s == doctest::Approx(spearman(y, x)).epsilon(1e-14));
    std::vector<double> neg(y.size());
    std::vector<double> mono(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      neg[i] = -y[i];
      mono[i] = std::exp(3 * y[i]) + 7;
    }
    CHECK(spearman(x, neg) == doctest::Approx(-s).epsilon(1e-14));
    CHECK(spearman(x, mono) == doctest::Approx(s).epsilon(1e-14));
  }
}

TEST_CASE("dataset parsing") {
  SUBCASE("delimiters, header and comments") {
    const auto d = parse(
        "Word 1,Word 2,Human (mean)\n"
        "# comment\n"
        "Tiger,cat,7.35\n"
        "tiger\ttiger\t10\n"
        "book  paper 7.46\n"
        "\n");
    REQUIRE(d.pairs.size() == 3);
    CHECK(d.pairs[0].a == "tiger");
    CHECK(d.pairs[0].b == "cat");
    CHECK(d.pairs[0].score == 7.35);
    CHECK(d.pairs[1].score == 10.0);
    CHECK(d.pairs[2].b == "paper");
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse(""), Error);
    CHECK_THROWS_AS(parse("a,b,1\nc,d\n"), Error);
    CHECK_THROWS_AS(parse("a,b,1\nc,d,nan\n"), Error);
    CHECK_THROWS_AS(SimilarityDataset::load("/nonexistent/ws.txt"), Error);
  }
}

TEST_CASE("evaluate") {
  EmbeddingTable t(2);
  t.add("a", std::vector<double>{1.0, 0.0});
  t.add("b", std::vector<double>{1.0, 0.1});
  t.add("c", std::vector<double>{1.0, 1.0});
  t.add("d", std::vector<double>{0.0, 1.0});
  SUBCASE("matching order gives 1 and full coverage") {
    const auto r = evaluate(t, parse("a,b,9\na,c,5\na,d,1\n"));
    CHECK(r.spearman == 1.0);
    CHECK(r.pairs_total == 3);
    CHECK(r.pairs_evaluated == 3);
    CHECK(r.coverage() == 1.0);
  }
  SUBCASE("unknown words are skipped and lower coverage") {
    const auto r = evaluate(t, parse("a,b,9\na,c,5\nx,y,3\na,d,1\n"));
    CHECK(r.spearman == 1.0);
    CHECK(r.pairs_evaluated == 3);
    CHECK(r.coverage() == 0.75);
  }
  SUBCASE("fewer than two evaluable pairs") {
    CHECK_THROWS_AS(evaluate(t, parse("a,b,9\nx,y,3\n")), Error);
  }
  SUBCASE("deterministic") {
    const auto d = parse("a,b,9\na,c,5\nb,d,1\nc,d,4\n");
    CHECK(evaluate(t, d).spearman == evaluate(t, d).spearman);
  }
}

TEST_CASE("evaluate composes out-of-vocabulary words in AWE-S") {
  std::vector<std::string> words{"happy", "sad", "cat"};
  VocabOptions o;
  o.min_count = 1;
  o.neg_table_size = 100;
  const auto vocab = Vocabulary::from_entries(words, {10, 9, 8}, o);
  std::istringstream lemma_tsv("happiest\tadj\thappy\n");
  const auto map = SubwordMap::build(vocab, LemmaTable::parse(lemma_tsv));
  BasicModelParams<double> p(Mode::AweS, 3, map.unit_count(), 2, 1);
  p.row(Matrix::U, 0)[0] = 1.0;
  p.row(Matrix::U, 1)[0] = -1.0;
  p.row(Matrix::U, 1)[1] = 0.2;
  p.row(Matrix::U, 2)[1] = 1.0;
  const auto d = parse("happiest,happy,10\nhappiest,cat,5\nhappiest,sad,1\nunknown,cat,3\n");
  const auto r = evaluate<double>(p, vocab, &map, d);
  CHECK(r.pairs_evaluated == 3);
  CHECK(r.spearman == 1.0);
  const BasicModelParams<double> plain(Mode::Awe, 3, 3, 2, 1);
  CHECK_THROWS_AS(evaluate<double>(plain, vocab, nullptr, d), Error);
}

TEST_CASE("report rendering") {
  std::vector<ScoreReport> reports{{"WS353", 0.5, 10, 9}, {"RG65", -0.25, 4, 4}};
  const auto j = nlohmann::json::parse(reports_to_json(reports));
  REQUIRE(j.size() == 2);
  CHECK(j[0]["dataset"] == "WS353");
  CHECK(j[0]["spearman"] == 0.5);
  CHECK(j[0]["pairs_total"] == 10);
  CHECK(j[0]["pairs_evaluated"] == 9);
  const auto table = reports_to_table("AWE", reports);
  CHECK(table ==
        "Model    | WS353  | RG65  \n"
        "AWE      | 0.500  | -0.250\n"
        "coverage | 0.900  | 1.000 \n");
}

TEST_CASE("nearest neighbors") {
  SUBCASE("toy model") {
    EmbeddingTable t(2);
    t.add("a", std::vector<double>{1.0, 0.0});
    t.add("b", std::vector<double>{0.9, 0.2});
    t.add("c", std::vector<double>{0.0, 1.0});
    const auto n = nearest_neighbors("a", t, 1);
    REQUIRE(n.size() == 1);
    CHECK(n[0].word == "b");
    const auto all = nearest_neighbors("a", t, 10);
    CHECK(all.size() == 2);
    for (const auto& x : all) CHECK(x.word != "a");
    CHECK_THROWS_WITH_AS(nearest_neighbors("zzz", t, 3), doctest::Contains("zzz"), Error);
  }
  SUBCASE("ties by index") {
    EmbeddingTable t(1);
    t.add("q", std::vector<double>{1.0});
    t.add("x", std::vector<double>{2.0});
    t.add("y", std::vector<double>{3.0});
    const auto n = nearest_neighbors("q", t, 2);
    CHECK(n[0].word == "x");
    CHECK(n[1].word == "y");
  }
  SUBCASE("brute-force oracle on a 1k-word vocabulary") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    EmbeddingTable t(16);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 1000; ++i) {
      std::vector<double> v(16);
      for (auto& x : v) x = g(rng);
      rows.push_back(v);
      t.add("w" + std::to_string(i), v);
    }
    for (const std::size_t q : {0, 17, 500, 999}) {
      const auto got = nearest_neighbors("w" + std::to_string(q), t, 10);
      const auto want = oracle::brute_neighbors(rows, rows[q], 10, q);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].word == "w" + std::to_string(want[i].first));
        CHECK(got[i].cosine == doctest::Approx(static_cast<double>(want[i].second)).epsilon(1e-12));
      }
    }
  }
}
