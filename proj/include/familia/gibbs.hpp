#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "familia/corpus.hpp"
#include "familia/distributions.hpp"
#include "familia/errors.hpp"
#include "familia/model.hpp"
#include "familia/rng.hpp"

namespace familia {

// Collapsed Gibbs sweep.  Every blob's topic is resampled from its full
// conditional: the blob is removed from the counts, the conditional is
// evaluated over all K topics in log space, one topic is drawn from the
// normalized vector, and the counts are restored under the new topic.

struct SweepOptions {
  // When false, the item-topic matrices n are left untouched (used by
  // inference against a frozen model; only m and z move).
  bool update_n = true;
  // Optional document subset (the parallel trainer's shards); nullptr = all.
  const std::vector<std::int32_t>* docs = nullptr;
};

namespace detail {

// Document-term precomputation shared by every candidate topic of one blob.
// eta_dot = sum_k eta_k * m_dk over the decremented row; lets the supervised
// mean for candidate k be formed in O(1) as (eta_dot + eta_k) / B_d.
inline double eta_dot_product(const std::vector<double>& eta,
                              const std::vector<std::int32_t>& m_row) {
  double dot = 0.0;
  for (std::size_t k = 0; k < eta.size(); ++k) dot += eta[k] * m_row[k];
  return dot;
}

inline void require_decremented(const std::vector<std::int32_t>& m_row,
                                std::int32_t blob_total, const char* op) {
  std::int64_t sum = 0;
  for (const std::int32_t v : m_row) sum += v;
  if (sum != blob_total - 1) {
    throw InconsistentCounts(std::string(op) +
                             ": blob was not removed from the counts before "
                             "evaluation");
  }
}

}  // namespace detail

// Log of the full conditional for one blob, all K candidates at once.
// Expects the decrement-before-sample contract: m_row and n exclude the blob.
//
// Per candidate k the value is
//   log(m_dk + alpha_k) - log(B_d - 1 + sum alpha)
//   + per discrete factor:  sum_u sum_{t<c_u} log(n_ku + beta + t)
//                           - sum_{t<C} log(S_k + t)
//   + per continuous factor: sum_v log pdf(v | psi_k)
//   + supervised:            log N(y | (eta_dot + eta_k)/B_d, sigma2)
// where c_u is item u's multiplicity in the blob, C their total, and
// S_k = total_k + U*beta.  The shifted products are the Gamma-function
// ratios written out; they stay in log space so realistic counts cannot
// overflow.
inline void blob_log_conditional(const ModelConfig& config,
                                 const std::vector<CountMatrix>& n,
                                 const std::vector<ContinuousFactorParams>& psi,
                                 const SupervisedParams& supervised,
                                 const std::vector<std::int32_t>& m_row,
                                 std::int32_t blob_total,
                                 std::optional<double> y, const Blob& blob,
                                 std::vector<double>& log_q) {
  const std::int32_t K = config.K;
  log_q.assign(K, 0.0);

  const double log_doc_denom =
      std::log(static_cast<double>(blob_total - 1) + config.alpha_sum());
  const bool with_response = config.supervised && y.has_value();
  const double eta_dot =
      with_response ? detail::eta_dot_product(supervised.eta, m_row) : 0.0;

  for (std::int32_t k = 0; k < K; ++k) {
    double lq = std::log(m_row[k] + config.alpha[k]) - log_doc_denom;

    for (std::size_t slot = 0; slot < blob.token_counts.size(); ++slot) {
      const auto& counts = blob.token_counts[slot];
      if (counts.empty()) continue;
      const CountMatrix& nm = n[slot];
      const double beta = config.beta[slot];
      std::int32_t total_items = 0;
      for (const auto& [u, c] : counts) {
        const double base = nm.at(u, k) + beta;
        for (std::int32_t t = 0; t < c; ++t) lq += std::log(base + t);
        total_items += c;
      }
      const double s_k =
          static_cast<double>(nm.topic_total(k)) + beta * nm.rows();
      for (std::int32_t t = 0; t < total_items; ++t) lq -= std::log(s_k + t);
    }

    for (std::size_t slot = 0; slot < blob.values.size(); ++slot) {
      for (const double v : blob.values[slot]) lq += psi[slot].log_pdf(v, k);
    }

    if (with_response) {
      const double mu =
          (eta_dot + supervised.eta[k]) / static_cast<double>(blob_total);
      lq += log_response_pdf(*y, mu, supervised.sigma2);
    }

    log_q[k] = lq;
  }
}

// Public per-blob conditional: unnormalized positive weights (the log vector
// exponentiated after max-subtraction, so the largest entry is exactly 1).
inline std::vector<double> gibbs_conditional(const ModelState& state,
                                             const Corpus& corpus,
                                             std::int32_t doc_id,
                                             std::int32_t blob_id) {
  const Document& doc = corpus.docs[doc_id];
  detail::require_decremented(state.m[doc_id], doc.blob_count(),
                              "gibbs_conditional");
  std::vector<double> log_q;
  blob_log_conditional(state.config, state.n, state.psi, state.supervised,
                       state.m[doc_id], doc.blob_count(), doc.y,
                       doc.blobs[blob_id], log_q);
  double max_lq = log_q[0];
  for (const double v : log_q) max_lq = std::max(max_lq, v);
  std::vector<double> q(log_q.size());
  for (std::size_t k = 0; k < q.size(); ++k) q[k] = std::exp(log_q[k] - max_lq);
  return q;
}

namespace detail {

// Draw an index proportional to exp(log_q - max).  One uniform variate.
inline std::int32_t sample_from_log_weights(std::vector<double>& scratch,
                                            const std::vector<double>& log_q,
                                            Rng& rng) {
  double max_lq = log_q[0];
  for (const double v : log_q) max_lq = std::max(max_lq, v);
  scratch.resize(log_q.size());
  double total = 0.0;
  for (std::size_t k = 0; k < log_q.size(); ++k) {
    total += std::exp(log_q[k] - max_lq);
    scratch[k] = total;
  }
  const double u = rng.uniform() * total;
  for (std::size_t k = 0; k < scratch.size(); ++k) {
    if (u < scratch[k]) return static_cast<std::int32_t>(k);
  }
  return static_cast<std::int32_t>(scratch.size() - 1);
}

}  // namespace detail

// One full collapsed-Gibbs pass in document order, blob order.  Returns the
// number of assignments that changed.
inline std::int64_t gibbs_sweep(ModelState& state, const Corpus& corpus,
                                Rng& rng, const SweepOptions& opts = {}) {
  std::int64_t changed = 0;
  std::vector<double> log_q, scratch;
  const std::int32_t D = corpus.doc_count();

  const auto sweep_doc = [&](std::int32_t d) {
    const Document& doc = corpus.docs[d];
    const std::int32_t B = doc.blob_count();
    for (std::int32_t b = 0; b < B; ++b) {
      const Blob& blob = doc.blobs[b];
      const std::int32_t old_topic = state.z[d][b];
      if (opts.update_n) {
        add_blob_counts(state, blob, d, old_topic, -1);
      } else {
        state.m[d][old_topic] -= 1;
      }

      blob_log_conditional(state.config, state.n, state.psi, state.supervised,
                           state.m[d], B, doc.y, blob, log_q);
      const std::int32_t next = detail::sample_from_log_weights(scratch, log_q, rng);

      if (opts.update_n) {
        add_blob_counts(state, blob, d, next, +1);
      } else {
        state.m[d][next] += 1;
      }
      state.z[d][b] = next;
      if (next != old_topic) ++changed;
    }
  };

  if (opts.docs) {
    for (const std::int32_t d : *opts.docs) sweep_doc(d);
  } else {
    for (std::int32_t d = 0; d < D; ++d) sweep_doc(d);
  }
  return changed;
}

}  // namespace familia
