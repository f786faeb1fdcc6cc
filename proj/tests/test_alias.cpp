#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "familia/alias.hpp"
#include "familia/errors.hpp"
#include "familia/rng.hpp"

using familia::AliasTable;
using familia::Rng;

namespace {

std::vector<double> draw_frequencies(const AliasTable& table, std::size_t n,
                                     std::int64_t draws, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::int64_t> hits(n, 0);
  for (std::int64_t i = 0; i < draws; ++i) hits[table.sample(rng)] += 1;
  std::vector<double> freq(n);
  for (std::size_t i = 0; i < n; ++i) {
    freq[i] = static_cast<double>(hits[i]) / static_cast<double>(draws);
  }
  return freq;
}

}  // namespace

TEST_CASE("alias table reproduces simple distributions", "[alias]") {
  SECTION("singleton always yields index 0") {
    const auto table = AliasTable::build({5.0});
    Rng rng(7);
    for (int i = 0; i < 100; ++i) REQUIRE(table.sample(rng) == 0);
    REQUIRE(table.effective_probabilities() == std::vector<double>{1.0});
  }

  SECTION("uniform weights give exactly uniform cells") {
    const auto table = AliasTable::build({1.0, 1.0, 1.0, 1.0});
    for (double p : table.effective_probabilities()) {
      REQUIRE(p == Catch::Approx(0.25).margin(1e-15));
    }
  }

  SECTION("[2,1,1] empirical frequencies within 0.005 at 1e6 draws") {
    const auto table = AliasTable::build({2.0, 1.0, 1.0});
    const auto freq = draw_frequencies(table, 3, 1'000'000, 11);
    REQUIRE(std::fabs(freq[0] - 0.50) < 0.005);
    REQUIRE(std::fabs(freq[1] - 0.25) < 0.005);
    REQUIRE(std::fabs(freq[2] - 0.25) < 0.005);
  }

  SECTION("total weight is the raw sum") {
    const auto table = AliasTable::build({2.0, 1.0, 1.0});
    REQUIRE(table.total_weight() == Catch::Approx(4.0));
    REQUIRE(table.size() == 3);
  }
}

TEST_CASE("alias table reconstruction is exact to 1e-12", "[alias]") {
  Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(64);
    std::vector<double> w(n);
    for (auto& v : w) v = std::exp(10.0 * (rng.uniform() - 0.5));
    // Sprinkle zeros without ever zeroing everything.
    for (auto& v : w) {
      if (rng.uniform() < 0.2) v = 0.0;
    }
    w[rng.uniform_index(n)] = 1.0;

    double sum = 0.0;
    for (double v : w) sum += v;
    const auto probs = AliasTable::build(w).effective_probabilities();
    REQUIRE(probs.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
      REQUIRE(std::fabs(probs[i] - w[i] / sum) <= 1e-12);
    }
  }
}

TEST_CASE("alias table gives zero-weight entries zero mass", "[alias]") {
  const auto table = AliasTable::build({0.0, 1.0, 0.0, 3.0});
  const auto probs = table.effective_probabilities();
  REQUIRE(probs[0] <= 1e-15);
  REQUIRE(probs[2] <= 1e-15);
  Rng rng(3);
  for (int i = 0; i < 100'000; ++i) {
    const auto s = table.sample(rng);
    REQUIRE((s == 1 || s == 3));
  }
}

TEST_CASE("alias table rejects bad weight vectors", "[alias]") {
  const double inf = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(AliasTable::build({}), familia::AllZeroWeights);
  REQUIRE_THROWS_AS(AliasTable::build({0.0, 0.0}), familia::AllZeroWeights);
  REQUIRE_THROWS_AS(AliasTable::build({1.0, -1.0}), familia::NegativeWeight);
  REQUIRE_THROWS_AS(AliasTable::build({1.0, inf}), familia::NonFiniteWeight);
  REQUIRE_THROWS_AS(AliasTable::build({nan}), familia::NonFiniteWeight);
}

TEST_CASE("alias sampling is deterministic for a fixed seed", "[alias]") {
  const auto table = AliasTable::build({0.3, 2.0, 1.2, 0.01, 4.0});
  Rng a(99), b(99);
  for (int i = 0; i < 1000; ++i) REQUIRE(table.sample(a) == table.sample(b));
}

TEST_CASE("free-function wrappers match the class interface", "[alias]") {
  const auto table = familia::build_alias({1.0, 3.0});
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) {
    REQUIRE(familia::sample_alias(table, a) == table.sample(b));
  }
}

TEST_CASE("alias build time grows linearly", "[alias]") {
  // Grow the input 8x and compare per-build cost: linear construction pays
  // ~8x (a bit more once the tables spill cache levels), quadratic pays 64x.
  // The fastest of several repetitions shrugs off scheduler preemption on a
  // shared core; total work per measurement is held constant.
  Rng rng(17);
  const std::vector<std::size_t> sizes = {1024, 8192};
  std::vector<double> per_build(sizes.size());
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const std::size_t n = sizes[si];
    std::vector<double> w(n);
    for (auto& v : w) v = rng.uniform() + 1e-3;
    const std::size_t builds = (1u << 21) / n;
    double best = 1e300;
    for (int rep = 0; rep < 9; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      for (std::size_t i = 0; i < builds; ++i) {
        volatile auto sz = AliasTable::build(w).size();
        (void)sz;
      }
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count() /
                                static_cast<double>(builds));
    }
    per_build[si] = best;
  }
  const double ratio = per_build[1] / per_build[0];
  INFO("8x size costs " << ratio << "x per build");
  REQUIRE(ratio < 16.0);
}
