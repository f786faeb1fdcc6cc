#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "familia/errors.hpp"
#include "familia/rng.hpp"

namespace familia {

// Walker/Vose alias table: O(n) construction, O(1) sampling from a fixed
// discrete distribution.  Each bucket i holds a threshold prob_[i] and an
// alias_[i]; a draw picks a bucket uniformly and then flips a biased coin
// between the bucket's own index and its alias.  Exactly two uniform
// variates per sample.
class AliasTable {
 public:
  AliasTable() = default;

  static AliasTable build(const std::vector<double>& weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw AllZeroWeights("alias table: empty weight vector");
    // Sum in extended precision: the reconstruction invariant is checked to
    // 1e-12 and skewed weight vectors lose bits under plain double summation.
    long double sum = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = weights[i];
      if (!std::isfinite(w)) {
        throw NonFiniteWeight("alias table: weight " + std::to_string(i) +
                              " is not finite");
      }
      if (w < 0.0) {
        throw NegativeWeight("alias table: weight " + std::to_string(i) +
                             " is negative");
      }
      sum += w;
    }
    if (sum <= 0.0L) throw AllZeroWeights("alias table: all weights are zero");

    AliasTable t;
    t.prob_.resize(n);
    t.alias_.resize(n);
    t.total_weight_ = static_cast<double>(sum);

    // Scale so the average bucket mass is exactly 1, then repeatedly pair an
    // underfull bucket with an overfull one.  The classic two-worklist scheme
    // terminates after n pairings because every step retires one bucket.
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    small.reserve(n);
    large.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = static_cast<double>(weights[i] * static_cast<long double>(n) / sum);
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      const std::uint32_t l = large.back();
      small.pop_back();
      large.pop_back();
      t.prob_[s] = scaled[s];
      t.alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    // Rounding can leave residents in either list; their true mass is 1.
    for (const std::uint32_t i : small) {
      t.prob_[i] = 1.0;
      t.alias_[i] = i;
    }
    for (const std::uint32_t i : large) {
      t.prob_[i] = 1.0;
      t.alias_[i] = i;
    }
    return t;
  }

  std::size_t size() const { return prob_.size(); }
  double total_weight() const { return total_weight_; }

  std::uint32_t sample(Rng& rng) const {
    const auto i =
        static_cast<std::uint32_t>(rng.uniform_index(prob_.size()));
    return rng.uniform() < prob_[i] ? i : alias_[i];
  }

  // The distribution this table actually encodes, reassembled from the
  // buckets.  Matches the normalized input weights up to rounding; used by
  // tests and sanity checks.
  std::vector<double> effective_probabilities() const {
    const std::size_t n = prob_.size();
    std::vector<double> p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] += prob_[i] / static_cast<double>(n);
      p[alias_[i]] += (1.0 - prob_[i]) / static_cast<double>(n);
    }
    return p;
  }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
  double total_weight_ = 0.0;
};

inline AliasTable build_alias(const std::vector<double>& weights) {
  return AliasTable::build(weights);
}

inline std::uint32_t sample_alias(const AliasTable& table, Rng& rng) {
  return table.sample(rng);
}

}  // namespace familia
