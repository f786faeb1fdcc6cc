#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "familia/corpus.hpp"
#include "familia/errors.hpp"
#include "familia/model.hpp"
#include "familia/semantics.hpp"

using familia::cosine;
using familia::hellinger;
using familia::js_score;
using familia::jsd;
using familia::kld;

namespace {

std::vector<double> random_simplex(std::mt19937_64& engine, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  std::vector<double> v(n);
  double sum = 0.0;
  for (auto& x : v) {
    x = unit(engine);
    sum += x;
  }
  for (auto& x : v) x /= sum;
  return v;
}

// Frozen model with phi(w | topic 0) = 0.1 and phi(w | topic 1) = 0.3.
familia::ModelState two_word_model() {
  familia::Corpus corpus;
  corpus.schema = familia::Schema::make(
      {familia::FactorKind::discrete, familia::FactorKind::continuous_gaussian});
  corpus.vocab.resize(1);
  corpus.vocab[0].add_or_get("w");
  corpus.vocab[0].add_or_get("o");
  const auto config = familia::ModelConfig::make(corpus.schema, 2, 1.0, 0.5);
  auto state = familia::init_state(corpus, config, 1);
  state.n[0].add(1, 0, 4);  // topic 0: o seen four times
  state.n[0].add(0, 1, 1);  // topic 1: w once, o three times
  state.n[0].add(1, 1, 3);
  return state;
}

}  // namespace

TEST_CASE("divergence hand values", "[semantics]") {
  const std::vector<double> point = {1.0, 0.0};
  const std::vector<double> even = {0.5, 0.5};

  SECTION("relative entropy") {
    REQUIRE(kld(even, even) == 0.0);
    REQUIRE(kld(point, even) == Catch::Approx(std::log(2.0)).margin(1e-12));
    // Zero numerator cells contribute nothing.
    REQUIRE(kld({0.0, 1.0}, even) == Catch::Approx(std::log(2.0)).margin(1e-12));
  }

  SECTION("support violations are errors") {
    REQUIRE_THROWS_AS(kld(even, point), familia::UnsupportedSupport);
    REQUIRE_THROWS_AS(kld(even, {0.0, 1.0}), familia::UnsupportedSupport);
  }

  SECTION("bounded divergence endpoints are exact") {
    REQUIRE(jsd(even, even) == 0.0);
    REQUIRE(jsd(point, {0.0, 1.0}) == 1.0);
    REQUIRE(js_score(even, even) == 1.0);
    REQUIRE(js_score(point, {0.0, 1.0}) == 0.0);
  }

  SECTION("bounded divergence interior value") {
    REQUIRE(jsd(point, even) ==
            Catch::Approx(0.3112781244591329).margin(1e-12));
  }

  SECTION("hellinger endpoints and interior value") {
    REQUIRE(hellinger(even, even) == 0.0);
    REQUIRE(hellinger(point, {0.0, 1.0}) == 1.0);
    REQUIRE(hellinger(point, even) ==
            Catch::Approx(0.5411961001461971).margin(1e-12));
  }

  SECTION("cosine") {
    REQUIRE(cosine({1.0, 0.0}, {1.0, 0.0}) == Catch::Approx(1.0));
    REQUIRE(cosine({1.0, 0.0}, {0.0, 1.0}) == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(cosine({1.0, 0.0}, {1.0, 1.0}) ==
            Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
    REQUIRE_THROWS_AS(cosine({0.0, 0.0}, {1.0, 0.0}), familia::ZeroVector);
  }
}

TEST_CASE("divergences validate their inputs", "[semantics]") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(jsd({0.5, 0.5}, {1.0}), familia::DimensionMismatch);
  REQUIRE_THROWS_AS(hellinger({0.5, 0.5}, {nan, 1.0}), familia::NonFiniteInput);
  REQUIRE_THROWS_AS(kld({-0.5, 1.5}, {0.5, 0.5}), familia::NonFiniteInput);
}

TEST_CASE("divergence laws hold on random mixtures", "[semantics]") {
  std::mt19937_64 engine(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_simplex(engine, 6);
    const auto q = random_simplex(engine, 6);
    const auto r = random_simplex(engine, 6);

    const double j = jsd(p, q);
    REQUIRE(j >= 0.0);
    REQUIRE(j <= 1.0);
    REQUIRE(j == Catch::Approx(jsd(q, p)).margin(1e-12));
    REQUIRE(js_score(p, q) == Catch::Approx(1.0 - j).margin(1e-12));

    const double h_pq = hellinger(p, q);
    REQUIRE(h_pq >= 0.0);
    REQUIRE(h_pq <= 1.0);
    REQUIRE(h_pq == Catch::Approx(hellinger(q, p)).margin(1e-12));
    REQUIRE(h_pq <= hellinger(p, r) + hellinger(r, q) + 1e-12);

    REQUIRE(kld(p, q) >= -1e-12);
  }
}

TEST_CASE("ranking by similarity ignores a common topic relabeling",
          "[semantics]") {
  std::mt19937_64 engine(7);
  const auto query = random_simplex(engine, 5);
  std::vector<std::vector<double>> docs;
  for (int i = 0; i < 12; ++i) docs.push_back(random_simplex(engine, 5));

  const auto rank = [&](const std::vector<double>& q,
                        const std::vector<std::vector<double>>& ds) {
    std::vector<int> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return js_score(q, ds[a]) > js_score(q, ds[b]);
    });
    return order;
  };

  std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
  const auto apply = [&](const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[perm[i]];
    return out;
  };

  auto permuted_docs = docs;
  for (auto& d : permuted_docs) d = apply(d);
  REQUIRE(rank(apply(query), permuted_docs) == rank(query, docs));
}

TEST_CASE("generative scores multiply smoothed token likelihoods",
          "[semantics]") {
  const auto model = two_word_model();

  SECTION("hand value 0.18 for a single token") {
    const auto s = familia::generative_score({"w"}, {0.6, 0.4}, model, 0);
    REQUIRE(s.score == Catch::Approx(0.18).margin(1e-12));
    REQUIRE(s.log_score == Catch::Approx(std::log(0.18)).margin(1e-12));
    REQUIRE(s.dropped_tokens == 0);
  }

  SECTION("repeated tokens square the likelihood") {
    const auto s = familia::generative_score({"w", "w"}, {0.6, 0.4}, model, 0);
    REQUIRE(s.score == Catch::Approx(0.0324).margin(1e-12));
  }

  SECTION("unknown tokens are dropped and counted") {
    const auto s =
        familia::generative_score({"w", "qqq"}, {0.6, 0.4}, model, 0);
    REQUIRE(s.dropped_tokens == 1);
    REQUIRE(s.score == Catch::Approx(0.18).margin(1e-12));
  }

  SECTION("a fully dropped query is an error") {
    REQUIRE_THROWS_AS(
        familia::generative_score({"qqq", "zzz"}, {0.6, 0.4}, model, 0),
        familia::EmptyQueryAfterFilter);
  }

  SECTION("continuous factors cannot score token queries") {
    REQUIRE_THROWS_AS(familia::generative_score({"w"}, {0.6, 0.4}, model, 1),
                      familia::NotADiscreteFactor);
    REQUIRE_THROWS_AS(familia::generative_score({"w"}, {0.6, 0.4}, model, 9),
                      familia::NotADiscreteFactor);
  }

  SECTION("mixture length must match the topic count") {
    REQUIRE_THROWS_AS(
        familia::generative_score({"w"}, {0.6, 0.3, 0.1}, model, 0),
        familia::DimensionMismatch);
  }

  SECTION("mass on the token's topic raises the score") {
    const auto low = familia::generative_score({"w"}, {0.9, 0.1}, model, 0);
    const auto mid = familia::generative_score({"w"}, {0.5, 0.5}, model, 0);
    const auto high = familia::generative_score({"w"}, {0.1, 0.9}, model, 0);
    REQUIRE(low.score < mid.score);
    REQUIRE(mid.score < high.score);
  }
}
