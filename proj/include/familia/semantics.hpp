#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "familia/errors.hpp"
#include "familia/model.hpp"

namespace familia {

// Post-modeling utilities: distribution distances over theta vectors and the
// query-against-document generative matching score.  All pure functions.

namespace detail {

inline void require_same_length(const std::vector<double>& a,
                                const std::vector<double>& b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(std::string(op) + ": vector lengths differ");
  }
}

inline void require_finite(const std::vector<double>& v, const char* op) {
  for (const double x : v) {
    if (!std::isfinite(x) || x < 0.0) {
      throw NonFiniteInput(std::string(op) +
                           ": input is not a non-negative finite vector");
    }
  }
}

}  // namespace detail

// Kullback-Leibler divergence, natural log, with 0 * ln 0 = 0.  Requires q
// to dominate p: any mass of p outside q's support has infinite divergence.
inline double kld(const std::vector<double>& p, const std::vector<double>& q) {
  detail::require_same_length(p, q, "kld");
  detail::require_finite(p, "kld");
  detail::require_finite(q, "kld");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) {
      throw UnsupportedSupport("kld: p has mass where q is zero");
    }
    sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum;
}

// Jensen-Shannon divergence against the midpoint M = (p+q)/2, log base 2 so
// the value lands in [0,1].  M dominates both inputs, so no support errors.
inline double jsd(const std::vector<double>& p, const std::vector<double>& q) {
  detail::require_same_length(p, q, "jsd");
  detail::require_finite(p, "jsd");
  detail::require_finite(q, "jsd");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) sum += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) sum += 0.5 * q[i] * std::log(q[i] / m);
  }
  return sum / std::log(2.0);
}

// Query/document similarity: 1 - JSD(theta_q, theta_d), in [0,1].
inline double js_score(const std::vector<double>& theta_q,
                       const std::vector<double>& theta_d) {
  return 1.0 - jsd(theta_q, theta_d);
}

inline double hellinger(const std::vector<double>& p,
                        const std::vector<double>& q) {
  detail::require_same_length(p, q, "hellinger");
  detail::require_finite(p, "hellinger");
  detail::require_finite(q, "hellinger");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    sum += d * d;
  }
  return std::sqrt(sum / 2.0);
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  detail::require_same_length(a, b, "cosine");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw NonFiniteInput("cosine: non-finite input");
    }
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine: zero-length vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Probability that a short query is generated by a document's topic mixture:
//   prod_{w in query} sum_k phi(w | k) * theta_d(k)
// Unseen tokens are dropped and counted; the product is carried in log space
// (long queries underflow linear doubles), with the linear value alongside
// when it is representable.
struct GenerativeScore {
  double log_score = 0.0;
  double score = 0.0;  // exp(log_score); 0 when not representable
  std::int32_t dropped_tokens = 0;
};

inline GenerativeScore generative_score(const std::vector<std::string>& query_tokens,
                                        const std::vector<double>& theta_d,
                                        const ModelState& model,
                                        std::int32_t factor_id) {
  const Schema& schema = model.config.schema;
  if (factor_id < 0 || factor_id >= schema.factor_count() ||
      is_continuous(schema.kind_of(factor_id))) {
    throw NotADiscreteFactor("generative_score: factor " +
                             std::to_string(factor_id) +
                             " is not a discrete factor");
  }
  if (static_cast<std::int32_t>(theta_d.size()) != model.config.K) {
    throw DimensionMismatch("generative_score: theta has wrong length");
  }
  detail::require_finite(theta_d, "generative_score");

  const std::int32_t slot = schema.slot_of[factor_id];
  const CountMatrix& n = model.n[slot];
  const double beta = model.config.beta[slot];

  GenerativeScore out;
  std::int32_t used = 0;
  for (const std::string& token : query_tokens) {
    const auto id = model.vocab[slot].find(token);
    if (!id) {
      ++out.dropped_tokens;
      continue;
    }
    double p = 0.0;
    for (std::int32_t k = 0; k < model.config.K; ++k) {
      const double denom =
          static_cast<double>(n.topic_total(k)) + beta * n.rows();
      p += theta_d[k] * (n.at(*id, k) + beta) / denom;
    }
    out.log_score += std::log(p);
    ++used;
  }
  if (used == 0) {
    throw EmptyQueryAfterFilter(
        "generative_score: no query token is in the model vocabulary");
  }
  out.score = std::exp(out.log_score);
  return out;
}

}  // namespace familia
