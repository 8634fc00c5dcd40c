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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "awe/corpus.hpp"

using namespace awe;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> words(std::string_view text) { return tokenize(text); }

VocabOptions opts(std::uint64_t min_count = 1, double t = 0.0, std::size_t table = 100000) {
  VocabOptions o;
  o.min_count = min_count;
  o.subsample_t = t;
  o.neg_table_size = table;
  return o;
}

fs::path write_temp(const std::string& name, const std::string& text) {
  const fs::path dir = fs::path(AWE_TEST_TMP) / "corpus";
  fs::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

std::vector<std::string> zipf_tokens(std::size_t n, std::size_t types, std::uint64_t seed) {
  std::vector<double> weights(types);
  for (std::size_t i = 0; i < types; ++i) weights[i] = 1.0 / static_cast<double>(i + 1);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("t" + std::to_string(pick(rng)));
  return out;
}

}  // namespace

TEST_CASE("tokenize") {
  CHECK(words("The cat sat.") == std::vector<std::string>{"the", "cat", "sat"});
  CHECK(words("").empty());
  CHECK(words("mother and child") == std::vector<std::string>{"mother", "and", "child"});
  CHECK(words("  \"Hello,\"   world!\t(yes)\n") ==
        std::vector<std::string>{"hello", "world", "yes"});
  CHECK(words("-- ... ?!") .empty());
  CHECK(words("don't re-enter") == std::vector<std::string>{"don't", "re-enter"});
  CHECK(words("\xe2\x80\x9cQuoted\xe2\x80\x9d") == std::vector<std::string>{"quoted"});
}

TEST_CASE("invalid UTF-8 is replaced, counted and never fatal") {
  Tokenizer tok;
  const auto out = tok.tokenize("ab\xff" "cd ok \xc3");
  REQUIRE(out.size() == 3);
  CHECK(out[0] == "ab\xef\xbf\xbd" "cd");
  CHECK(out[1] == "ok");
  CHECK(out[2] == "\xef\xbf\xbd");
  CHECK(tok.invalid_sequences() == 2);
}

TEST_CASE("vocabulary from a tiny corpus") {
  const auto tokens = words("a a a b");
  const auto vocab = build_vocab(tokens, opts());
  REQUIRE(vocab.size() == 2);
  CHECK(vocab.word(0) == "a");
  CHECK(vocab.count(0) == 3);
  CHECK(vocab.word(1) == "b");
  CHECK(vocab.count(1) == 1);
  CHECK(vocab.total_tokens() == 4);
  for (WordId i = 0; i < vocab.size(); ++i) CHECK(vocab.find(vocab.word(i)) == i);
  CHECK_FALSE(vocab.find("c").has_value());
}

TEST_CASE("vocabulary filtering, ordering and errors") {
  const auto tokens = words("x x y y z z z q");
  SUBCASE("ties break lexicographically") {
    const auto v = build_vocab(tokens, opts());
    CHECK(v.words() == std::vector<std::string>{"z", "x", "y", "q"});
  }
  SUBCASE("min count") {
    const auto v = build_vocab(tokens, opts(2));
    CHECK(v.words() == std::vector<std::string>{"z", "x", "y"});
    CHECK(v.total_tokens() == 7);
    for (WordId i = 0; i < v.size(); ++i) CHECK(v.count(i) >= 2);
  }
  SUBCASE("size cap") {
    auto o = opts();
    o.max_size = 2;
    CHECK(build_vocab(tokens, o).words() == std::vector<std::string>{"z", "x"});
  }
  SUBCASE("errors") {
    CHECK_THROWS_WITH_AS(build_vocab(std::vector<std::string>{}, opts()), "empty corpus", Error);
    CHECK_THROWS_WITH_AS(build_vocab(tokens, opts(10)), "no words retained", Error);
  }
}

TEST_CASE("keep probabilities") {
  SUBCASE("a word at the threshold frequency is always kept") {
    // 1 occurrence in 10000 tokens: f = 1e-4 = t.
    std::vector<std::string> tokens(9999, "common");
    tokens.push_back("rare");
    const auto v = build_vocab(tokens, opts(1, 1e-4));
    CHECK(v.keep_prob(*v.find("rare")) == 1.0);
  }
  SUBCASE("formula for a frequent word") {
    std::vector<std::string> tokens(9000, "common");
    for (int i = 0; i < 1000; ++i) tokens.push_back("w" + std::to_string(i));
    const auto v = build_vocab(tokens, opts(1, 1e-3));
    const double f = 0.9;
    const double want = std::sqrt(1e-3 / f) + 1e-3 / f;
    CHECK(v.keep_prob(*v.find("common")) == doctest::Approx(want).epsilon(1e-12));
  }
  SUBCASE("non-increasing in frequency and within [0, 1]") {
    const auto v = build_vocab(zipf_tokens(50000, 300, 4), opts(1, 1e-3));
    for (WordId i = 0; i < v.size(); ++i) {
      CHECK(v.keep_prob(i) >= 0.0);
      CHECK(v.keep_prob(i) <= 1.0);
      if (i > 0) CHECK(v.keep_prob(i) >= v.keep_prob(i - 1));
    }
  }
  SUBCASE("t = 0 disables subsampling") {
    const auto v = build_vocab(zipf_tokens(5000, 50, 4), opts(1, 0.0));
    for (WordId i = 0; i < v.size(); ++i) CHECK(v.keep_prob(i) == 1.0);
  }
}

TEST_CASE("negative table matches counts^alpha") {
  const std::size_t table = 1'000'000;
  const auto v = build_vocab(zipf_tokens(10000, 200, 17), opts(1, 0.0, table));
  REQUIRE(v.neg_table().size() == table);
  std::vector<double> hist(v.size(), 0.0);
  for (const WordId w : v.neg_table()) {
    REQUIRE(w < v.size());
    hist[w] += 1.0;
  }
  double z = 0.0;
  for (WordId i = 0; i < v.size(); ++i) z += std::pow(static_cast<double>(v.count(i)), 0.75);
  double worst = 0.0;
  for (WordId i = 0; i < v.size(); ++i) {
    const double want = std::pow(static_cast<double>(v.count(i)), 0.75) / z;
    worst = std::max(worst, std::fabs(hist[i] / table - want));
  }
  CHECK(worst < 2.0 / table);
}

TEST_CASE("negative draws pass a chi-square goodness-of-fit test") {
  const auto v = build_vocab(zipf_tokens(200000, 50, 3), opts(1, 0.0, 10'000'000));
  REQUIRE(v.size() == 50);
  Rng rng(99);
  const int draws = 1'000'000;
  std::vector<double> observed(v.size(), 0.0);
  for (int i = 0; i < draws; ++i) observed[v.sample_negative(rng)] += 1.0;
  double z = 0.0;
  for (WordId i = 0; i < v.size(); ++i) z += std::pow(static_cast<double>(v.count(i)), 0.75);
  double chi2 = 0.0;
  for (WordId i = 0; i < v.size(); ++i) {
    const double expected = draws * std::pow(static_cast<double>(v.count(i)), 0.75) / z;
    chi2 += (observed[i] - expected) * (observed[i] - expected) / expected;
  }
  // Upper 0.001 quantile of chi-square with 49 degrees of freedom.
  CHECK(chi2 < 85.351);
}

TEST_CASE("vocabulary TSV round trip") {
  const auto v = build_vocab(words("b b a a c c c d"), opts());
  std::stringstream s;
  v.save_tsv(s);
  CHECK(s.str() == "c\t3\na\t2\nb\t2\nd\t1\n");
  const auto back = Vocabulary::load_tsv(s, opts());
  CHECK(back.words() == v.words());
  CHECK(back.counts() == v.counts());
  std::stringstream bad("a\tx\n");
  CHECK_THROWS_AS(Vocabulary::load_tsv(bad, opts()), Error);
}

TEST_CASE("windows") {
  const auto vocab = build_vocab(words("w1 w2 w3"), opts());
  SUBCASE("b_max 1, no subsampling") {
    Rng rng(1);
    const auto got = windows(words("w1 w2 w3"), vocab, 1, rng);
    const WordId w1 = *vocab.find("w1");
    const WordId w2 = *vocab.find("w2");
    const WordId w3 = *vocab.find("w3");
    const std::vector<TrainingWindow> want{{w1, {w2}}, {w2, {w1, w3}}, {w3, {w2}}};
    CHECK(got == want);
  }
  SUBCASE("all tokens out of vocabulary") {
    Rng rng(1);
    CHECK(windows(words("x y z"), vocab, 3, rng).empty());
  }
  SUBCASE("OOV tokens are dropped before windowing") {
    Rng rng(1);
    const auto got = windows(words("w1 zzz w2"), vocab, 1, rng);
    REQUIRE(got.size() == 2);
    CHECK(got[0].context == std::vector<WordId>{*vocab.find("w2")});
  }
  SUBCASE("sentences never share a window") {
    Rng rng(2);
    const std::vector<std::vector<std::string>> sentences{words("w1 w2"), words("w3")};
    const auto got = windows(sentences, vocab, 5, rng);
    CHECK(got.size() == 2);
  }
}

TEST_CASE("window invariants and determinism") {
  const auto tokens = zipf_tokens(100, 20, 5);
  const auto vocab = build_vocab(tokens, opts(1, 1e-2));
  Rng a(42);
  Rng b(42);
  const auto wa = windows(tokens, vocab, 4, a);
  const auto wb = windows(tokens, vocab, 4, b);
  CHECK(wa == wb);
  CHECK_FALSE(wa.empty());
  for (const auto& w : wa) {
    CHECK(w.context.size() >= 1);
    CHECK(w.context.size() <= 8);
    CHECK(w.center < vocab.size());
    for (const WordId c : w.context) CHECK(c < vocab.size());
  }
}

TEST_CASE("window radius is uniform on 1..b") {
  std::vector<std::string> tokens;
  for (int i = 0; i < 20000; ++i) tokens.push_back("t" + std::to_string(i % 7));
  const auto vocab = build_vocab(tokens, opts());
  Rng rng(3);
  std::map<std::size_t, int> sizes;
  const auto all = windows(tokens, vocab, 5, rng);
  for (std::size_t i = 10; i + 10 < all.size(); ++i) ++sizes[all[i].context.size()];
  REQUIRE(sizes.size() == 5);
  for (std::size_t k = 1; k <= 5; ++k) {
    CHECK(sizes[2 * k] == doctest::Approx((all.size() - 20) / 5.0).epsilon(0.05));
  }
}

TEST_CASE("subsampling keeps tokens at the expected rate") {
  std::vector<std::string> tokens;
  for (int i = 0; i < 100000; ++i) tokens.push_back(i % 2 ? "odd" : "t" + std::to_string(i));
  const auto vocab = build_vocab(tokens, opts(1, 1e-2));
  const WordId odd = *vocab.find("odd");
  const double keep = vocab.keep_prob(odd);
  REQUIRE(keep < 0.5);
  Rng rng(8);
  WindowGenerator gen(vocab, 1);
  std::vector<WordId> ids;
  to_ids(tokens, vocab, ids);
  std::size_t centers = 0;
  gen.for_each_window(ids, rng, [&](const TrainingWindow& w) { centers += w.center == odd; });
  CHECK(static_cast<double>(centers) / 50000 == doctest::Approx(keep).epsilon(0.03));
}

TEST_CASE("shards cover every token exactly once") {
  std::string a;
  std::string b;
  for (int i = 0; i < 300; ++i) a += "alpha beta gamma " + std::to_string(i) + "\n";
  for (int i = 0; i < 77; ++i) b += "delta  epsilon\t" + std::to_string(i) + " \n\n";
  const std::vector<fs::path> files{write_temp("a.txt", a), write_temp("b.txt", b)};
  std::vector<std::string> all;
  {
    SentenceReader reader(make_shards(files, 1)[0]);
    std::vector<std::string> s;
    while (reader.next(s)) all.insert(all.end(), s.begin(), s.end());
  }
  CHECK(all.size() == 300 * 4 + 77 * 3);
  for (std::size_t workers = 2; workers <= 9; ++workers) {
    CAPTURE(workers);
    const auto shards = make_shards(files, workers);
    CHECK(shards.size() == workers);
    std::vector<std::string> joined;
    for (const auto& shard : shards) {
      SentenceReader reader(shard);
      std::vector<std::string> s;
      while (reader.next(s)) joined.insert(joined.end(), s.begin(), s.end());
    }
    CHECK(joined == all);
  }
}

TEST_CASE("long lines are cut into bounded sentences") {
  std::string line;
  for (int i = 0; i < 2500; ++i) line += "x ";
  const std::vector<fs::path> files{write_temp("long.txt", line + "\ny\n")};
  SentenceReader reader(make_shards(files, 1)[0]);
  std::vector<std::string> s;
  std::vector<std::size_t> sizes;
  while (reader.next(s)) sizes.push_back(s.size());
  CHECK(sizes == std::vector<std::size_t>{1000, 1000, 500, 1});
}

TEST_CASE("counting words across files") {
  const std::vector<fs::path> files{write_temp("c1.txt", "The the THE\ncat"),
                                    write_temp("c2.txt", "cat, dog")};
  const auto counts = count_words(files);
  CHECK(counts.at("the") == 3);
  CHECK(counts.at("cat") == 2);
  CHECK(counts.at("dog") == 1);
  const auto vocab = build_vocab_from_files(files, opts(2));
  CHECK(vocab.words() == std::vector<std::string>{"the", "cat"});
  const std::vector<fs::path> missing{fs::path(AWE_TEST_TMP) / "nope.txt"};
  CHECK_THROWS_AS(count_words(missing), Error);
}
