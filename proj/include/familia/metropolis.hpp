#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "familia/alias.hpp"
#include "familia/corpus.hpp"
#include "familia/distributions.hpp"
#include "familia/errors.hpp"
#include "familia/gibbs.hpp"
#include "familia/model.hpp"
#include "familia/rng.hpp"

namespace familia {

// Metropolis-Hastings sweep over blobs.  Instead of scoring all K topics per
// blob (the Gibbs cost), each blob runs a cascade of cheap proposals --
// document-topic, supervised-signal, one per discrete item occurrence, one
// per continuous item occurrence -- every one corrected by an acceptance
// ratio against the approximate target Q below.  Proposal tables are built
// once per iteration and reused for the whole sweep, so a proposal draw is
// O(1); acceptance evaluates the target with CURRENT counts but the proposal
// probability with the iteration-start (stale) weights, i.e. with exactly the
// distribution the tables sample from.

// ---------------------------------------------------------------------------
// Approximate target Q (the per-topic weight the MH kernel converges to).
// ---------------------------------------------------------------------------

// Same structure as the full conditional except the discrete item term drops
// the within-blob count shifts:  each occurrence of item u contributes
// (n_ku + beta) / (total_k + beta*U) regardless of multiplicity.  Exact for
// blobs whose items all appear once.
inline double mh_target_log_one(const ModelConfig& config,
                                const std::vector<CountMatrix>& n,
                                const std::vector<ContinuousFactorParams>& psi,
                                const SupervisedParams& supervised,
                                const std::vector<std::int32_t>& m_row,
                                std::int32_t blob_total, std::optional<double> y,
                                const Blob& blob, std::int32_t k,
                                double log_doc_denom, double eta_dot) {
  double lq = std::log(m_row[k] + config.alpha[k]) - log_doc_denom;

  for (std::size_t slot = 0; slot < blob.token_counts.size(); ++slot) {
    const auto& counts = blob.token_counts[slot];
    if (counts.empty()) continue;
    const CountMatrix& nm = n[slot];
    const double beta = config.beta[slot];
    const double log_s_k = std::log(static_cast<double>(nm.topic_total(k)) +
                                    beta * nm.rows());
    for (const auto& [u, c] : counts) {
      lq += c * (std::log(nm.at(u, k) + beta) - log_s_k);
    }
  }
  for (std::size_t slot = 0; slot < blob.values.size(); ++slot) {
    for (const double v : blob.values[slot]) lq += psi[slot].log_pdf(v, k);
  }
  if (config.supervised && y.has_value()) {
    const double mu =
        (eta_dot + supervised.eta[k]) / static_cast<double>(blob_total);
    lq += log_response_pdf(*y, mu, supervised.sigma2);
  }
  return lq;
}

// Public single-topic target value (linear scale).  Expects the blob already
// removed from the counts, like gibbs_conditional.
inline double mh_target(const ModelState& state, const Corpus& corpus,
                        std::int32_t doc_id, std::int32_t blob_id,
                        std::int32_t k) {
  const Document& doc = corpus.docs[doc_id];
  detail::require_decremented(state.m[doc_id], doc.blob_count(), "mh_target");
  const double log_doc_denom = std::log(
      static_cast<double>(doc.blob_count() - 1) + state.config.alpha_sum());
  const double eta_dot =
      state.config.supervised && doc.y
          ? detail::eta_dot_product(state.supervised.eta, state.m[doc_id])
          : 0.0;
  return std::exp(mh_target_log_one(state.config, state.n, state.psi,
                                    state.supervised, state.m[doc_id],
                                    doc.blob_count(), doc.y,
                                    doc.blobs[blob_id], k, log_doc_denom,
                                    eta_dot));
}

// ---------------------------------------------------------------------------
// Acceptance.
// ---------------------------------------------------------------------------

// Accept candidate j over current i with probability
// min{1, target_j * proposal_i / (target_i * proposal_j)}.  Linear inputs.
inline bool mh_accept(double target_i, double target_j, double proposal_i,
                      double proposal_j, Rng& rng) {
  const double ratio = (target_j * proposal_i) / (target_i * proposal_j);
  if (!std::isfinite(ratio)) {
    throw NonFiniteRatio("mh_accept: acceptance ratio is not finite");
  }
  return ratio >= 1.0 || rng.uniform() < ratio;
}

// Log-domain variant used by the sweep (weights routinely underflow linear
// doubles).  Consumes one uniform only when the ratio is below 1.
inline bool mh_accept_log(double log_target_i, double log_target_j,
                          double log_proposal_i, double log_proposal_j,
                          Rng& rng) {
  const double log_ratio =
      (log_target_j + log_proposal_i) - (log_target_i + log_proposal_j);
  if (std::isnan(log_ratio)) {
    throw NonFiniteRatio("mh_accept_log: acceptance ratio is not finite");
  }
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform()) < log_ratio;
}

// ---------------------------------------------------------------------------
// Proposal tables (stale by design: built once per iteration).
// ---------------------------------------------------------------------------

struct ProposalSet {
  std::int64_t iteration = 0;  // staleness stamp: when the tables were built

  AliasTable alpha_table;  // prior part of the document-topic proposal

  // Discrete item proposals, [slot][token] over K, plus the count snapshot
  // the tables were built from (acceptance must price the stale proposal).
  std::vector<std::vector<AliasTable>> item_tables;
  std::vector<CountMatrix> n_snapshot;
  std::vector<std::vector<double>> log_s_snapshot;  // [slot][k]
  std::vector<double> beta;                         // per-slot prior copy

  // Continuous item proposals, one table per distinct observed value.
  std::vector<std::unordered_map<double, std::int32_t>> value_index;  // [slot]
  std::vector<std::vector<AliasTable>> value_tables;                  // [slot][v]
  std::vector<std::vector<std::vector<double>>> value_logw;           // [slot][v][k]

  // Supervised proposals, one table per document (empty when unsupervised).
  std::vector<AliasTable> doc_tables;
  std::vector<std::vector<double>> doc_logw;  // [doc][k]

  // Stale log proposal probability of topic k for an occurrence of item u
  // (up to a k-independent constant, which acceptance ratios cancel).
  double item_log_weight(std::int32_t slot, std::int32_t u, std::int32_t k) const {
    return std::log(n_snapshot[slot].at(u, k) + beta[slot]) -
           log_s_snapshot[slot][k];
  }
};

inline ProposalSet build_proposals(const ModelState& state, const Corpus& corpus,
                                   std::int64_t iteration) {
  const ModelConfig& config = state.config;
  const std::int32_t K = config.K;
  ProposalSet p;
  p.iteration = iteration;
  p.alpha_table = AliasTable::build(config.alpha);
  p.beta = config.beta;
  p.n_snapshot = state.n;

  // Discrete: weights (n_ku + beta) / (total_k + beta*U) per topic.
  p.item_tables.resize(state.n.size());
  p.log_s_snapshot.resize(state.n.size());
  std::vector<double> weights(K);
  for (std::size_t slot = 0; slot < state.n.size(); ++slot) {
    const CountMatrix& n = state.n[slot];
    const double beta = config.beta[slot];
    auto& log_s = p.log_s_snapshot[slot];
    log_s.resize(K);
    std::vector<double> inv_s(K);
    for (std::int32_t k = 0; k < K; ++k) {
      const double s = static_cast<double>(n.topic_total(k)) + beta * n.rows();
      log_s[k] = std::log(s);
      inv_s[k] = 1.0 / s;
    }
    auto& tables = p.item_tables[slot];
    tables.reserve(n.rows());
    for (std::int32_t u = 0; u < n.rows(); ++u) {
      for (std::int32_t k = 0; k < K; ++k) {
        weights[k] = (n.at(u, k) + beta) * inv_s[k];
      }
      tables.push_back(AliasTable::build(weights));
    }
  }

  // Continuous: one table per distinct observed value, weights are the
  // current per-topic densities.  Log weights are kept (max-subtracted,
  // floored) so acceptance prices exactly what the table samples.
  p.value_index.resize(state.psi.size());
  p.value_tables.resize(state.psi.size());
  p.value_logw.resize(state.psi.size());
  if (!state.psi.empty()) {
    for (const Document& doc : corpus.docs) {
      for (const Blob& blob : doc.blobs) {
        for (std::size_t slot = 0; slot < blob.values.size(); ++slot) {
          for (const double v : blob.values[slot]) {
            auto& index = p.value_index[slot];
            if (index.emplace(v, static_cast<std::int32_t>(index.size())).second) {
              auto& logw = p.value_logw[slot].emplace_back(K);
              double max_lw = -std::numeric_limits<double>::infinity();
              for (std::int32_t k = 0; k < K; ++k) {
                logw[k] = state.psi[slot].log_pdf(v, k);
                max_lw = std::max(max_lw, logw[k]);
              }
              const double floor = std::log(kTinyWeight);
              std::vector<double> w(K);
              for (std::int32_t k = 0; k < K; ++k) {
                logw[k] = std::max(logw[k] - max_lw, floor);
                w[k] = std::exp(logw[k]);
              }
              p.value_tables[slot].push_back(AliasTable::build(w));
            }
          }
        }
      }
    }
  }

  // Supervised: tables depend on zbar_d, which moves blob by blob; freeze it
  // at the iteration-start value and let the acceptance ratio correct.  For
  // candidate k the frozen mean is ((B-1) * eta.zbar_frozen + eta_k) / B.
  if (config.supervised) {
    p.doc_tables.resize(corpus.doc_count());
    p.doc_logw.resize(corpus.doc_count());
    for (std::int32_t d = 0; d < corpus.doc_count(); ++d) {
      const Document& doc = corpus.docs[d];
      const double B = doc.blob_count();
      double dot = 0.0;
      for (std::int32_t k = 0; k < K; ++k) {
        dot += state.supervised.eta[k] * state.m[d][k];
      }
      const double frozen = dot / B;  // eta . zbar at iteration start
      auto& logw = p.doc_logw[d];
      logw.resize(K);
      double max_lw = -std::numeric_limits<double>::infinity();
      for (std::int32_t k = 0; k < K; ++k) {
        const double mu = ((B - 1.0) * frozen + state.supervised.eta[k]) / B;
        logw[k] = log_response_pdf(*doc.y, mu, state.supervised.sigma2);
        max_lw = std::max(max_lw, logw[k]);
      }
      const double floor = std::log(kTinyWeight);
      std::vector<double> w(K);
      for (std::int32_t k = 0; k < K; ++k) {
        logw[k] = std::max(logw[k] - max_lw, floor);
        w[k] = std::exp(logw[k]);
      }
      p.doc_tables[d] = AliasTable::build(w);
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Document-topic proposal: no table needed.
// ---------------------------------------------------------------------------

// Draw from (m_dk + alpha_k) / (sum m_d + sum alpha) without materializing
// the distribution: with probability sum_m / (sum_m + sum_alpha) return the
// topic of a uniformly random blob, otherwise draw from the prior.
inline std::int32_t draw_doc_proposal(const ModelState& state,
                                      std::int32_t doc_id, Rng& rng,
                                      const AliasTable* alpha_table = nullptr) {
  const auto blob_count = static_cast<std::int32_t>(state.z[doc_id].size());
  const double alpha_sum = state.config.alpha_sum();
  const double total = static_cast<double>(blob_count) + alpha_sum;
  if (rng.uniform() * total < static_cast<double>(blob_count)) {
    return state.z[doc_id][rng.uniform_index(blob_count)];
  }
  if (alpha_table) return static_cast<std::int32_t>(alpha_table->sample(rng));
  double u = rng.uniform() * alpha_sum;
  for (std::int32_t k = 0; k < state.config.K; ++k) {
    u -= state.config.alpha[k];
    if (u < 0.0) return k;
  }
  return state.config.K - 1;
}

namespace detail {

// In-sweep variant: the blob being resampled is excluded (its z entry is
// stale while the cascade runs), so the blob branch draws one of the B-1
// live blobs.
inline std::int32_t draw_doc_proposal_excluding(
    const ModelState& state, std::int32_t doc_id, std::int32_t blob_id,
    std::int32_t blob_count, double alpha_sum, const AliasTable& alpha_table,
    Rng& rng) {
  const std::int32_t live = blob_count - 1;
  const double total = static_cast<double>(live) + alpha_sum;
  if (rng.uniform() * total < static_cast<double>(live)) {
    auto idx = static_cast<std::int32_t>(rng.uniform_index(live));
    if (idx >= blob_id) ++idx;
    return state.z[doc_id][idx];
  }
  return static_cast<std::int32_t>(alpha_table.sample(rng));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// The sweep.
// ---------------------------------------------------------------------------

inline std::int64_t mh_sweep(ModelState& state, const Corpus& corpus,
                             const ProposalSet& proposals, std::int32_t mh_steps,
                             Rng& rng, const SweepOptions& opts = {}) {
  const ModelConfig& config = state.config;
  const double alpha_sum = config.alpha_sum();
  std::int64_t changed = 0;

  const auto sweep_doc = [&](std::int32_t d) {
    const Document& doc = corpus.docs[d];
    const std::int32_t B = doc.blob_count();
    const double log_doc_denom =
        std::log(static_cast<double>(B - 1) + alpha_sum);
    const bool with_response = config.supervised && doc.y.has_value();

    for (std::int32_t b = 0; b < B; ++b) {
      const Blob& blob = doc.blobs[b];
      const std::int32_t old_topic = state.z[d][b];
      if (opts.update_n) {
        add_blob_counts(state, blob, d, old_topic, -1);
      } else {
        state.m[d][old_topic] -= 1;
      }
      const double eta_dot =
          with_response ? detail::eta_dot_product(state.supervised.eta,
                                                  state.m[d])
                        : 0.0;
      const auto target = [&](std::int32_t k) {
        return mh_target_log_one(config, state.n, state.psi, state.supervised,
                                 state.m[d], B, doc.y, blob, k, log_doc_denom,
                                 eta_dot);
      };

      std::int32_t s = old_topic;
      double target_s = target(s);
      const auto consider = [&](std::int32_t j, double lq_s, double lq_j) {
        const double target_j = target(j);
        if (mh_accept_log(target_s, target_j, lq_s, lq_j, rng)) {
          s = j;
          target_s = target_j;
        }
      };

      for (std::int32_t step = 0; step < mh_steps; ++step) {
        // Document-topic proposal (fresh by construction: drawn from the
        // live assignments themselves).
        {
          const std::int32_t j = detail::draw_doc_proposal_excluding(
              state, d, b, B, alpha_sum, proposals.alpha_table, rng);
          if (j != s) {
            consider(j, std::log(state.m[d][s] + config.alpha[s]),
                     std::log(state.m[d][j] + config.alpha[j]));
          }
        }
        // Supervised-signal proposal.
        if (with_response) {
          const auto j =
              static_cast<std::int32_t>(proposals.doc_tables[d].sample(rng));
          if (j != s) {
            consider(j, proposals.doc_logw[d][s], proposals.doc_logw[d][j]);
          }
        }
        // One proposal per discrete item occurrence.
        for (std::size_t slot = 0; slot < blob.tokens.size(); ++slot) {
          for (const std::int32_t u : blob.tokens[slot]) {
            const auto j = static_cast<std::int32_t>(
                proposals.item_tables[slot][u].sample(rng));
            if (j == s) continue;
            const auto islot = static_cast<std::int32_t>(slot);
            consider(j, proposals.item_log_weight(islot, u, s),
                     proposals.item_log_weight(islot, u, j));
          }
        }
        // One proposal per continuous item occurrence.
        for (std::size_t slot = 0; slot < blob.values.size(); ++slot) {
          for (const double v : blob.values[slot]) {
            const std::int32_t vidx = proposals.value_index[slot].at(v);
            const auto j = static_cast<std::int32_t>(
                proposals.value_tables[slot][vidx].sample(rng));
            if (j == s) continue;
            consider(j, proposals.value_logw[slot][vidx][s],
                     proposals.value_logw[slot][vidx][j]);
          }
        }
      }

      if (opts.update_n) {
        add_blob_counts(state, blob, d, s, +1);
      } else {
        state.m[d][s] += 1;
      }
      state.z[d][b] = s;
      if (s != old_topic) ++changed;
    }
  };

  if (opts.docs) {
    for (const std::int32_t d : *opts.docs) sweep_doc(d);
  } else {
    for (std::int32_t d = 0; d < corpus.doc_count(); ++d) sweep_doc(d);
  }
  return changed;
}

}  // namespace familia
