#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "familia/corpus.hpp"
#include "familia/distributions.hpp"
#include "familia/model.hpp"

namespace familia {

// Complete joint log-likelihood of the training objective: the collapsed
// Dirichlet-multinomial terms for documents and discrete factors, plus the
// continuous item densities under the current assignments, plus the
// supervised response density.  Evaluated with log-Gamma throughout; this is
// the per-iteration number in the training report.
//
//   sum_d [ lgamma(A) - sum_k lgamma(alpha_k)
//           + sum_k lgamma(m_dk + alpha_k) - lgamma(B_d + A) ]        A = sum alpha
// + sum_i sum_k [ lgamma(U_i b_i) - U_i lgamma(b_i)
//                 + sum_u lgamma(n_ku + b_i) - lgamma(total_k + U_i b_i) ]
// + sum continuous items  log pdf(v | psi_{z of its blob})
// + sum_d log N(y_d | eta . zbar_d, sigma2)                (supervised only)
inline double joint_log_likelihood(const ModelState& state, const Corpus& corpus) {
  const ModelConfig& config = state.config;
  const std::int32_t K = config.K;
  double ll = 0.0;

  // Document term.  lgamma(alpha_k) values are cached; rows are mostly the
  // prior when K is large.
  const double alpha_sum = config.alpha_sum();
  std::vector<double> lg_alpha(K);
  double sum_lg_alpha = 0.0;
  for (std::int32_t k = 0; k < K; ++k) {
    lg_alpha[k] = std::lgamma(config.alpha[k]);
    sum_lg_alpha += lg_alpha[k];
  }
  const double lg_alpha_sum = std::lgamma(alpha_sum);
  for (std::int32_t d = 0; d < corpus.doc_count(); ++d) {
    double doc = lg_alpha_sum - sum_lg_alpha;
    for (std::int32_t k = 0; k < K; ++k) {
      const std::int32_t m = state.m[d][k];
      doc += m == 0 ? lg_alpha[k] : std::lgamma(m + config.alpha[k]);
    }
    doc -= std::lgamma(corpus.docs[d].blob_count() + alpha_sum);
    ll += doc;
  }

  // Discrete factor terms.  Zero cells all contribute lgamma(beta), so only
  // occupied cells pay a real lgamma call.
  for (std::size_t slot = 0; slot < state.n.size(); ++slot) {
    const CountMatrix& n = state.n[slot];
    const std::int32_t U = n.rows();
    if (U == 0) continue;
    const double beta = config.beta[slot];
    const double lg_beta = std::lgamma(beta);
    ll += K * (std::lgamma(U * beta) - U * lg_beta);
    std::vector<double> col_sum(K, 0.0);
    std::vector<std::int64_t> nonzero(K, 0);
    for (std::int32_t u = 0; u < U; ++u) {
      for (std::int32_t k = 0; k < K; ++k) {
        const std::int32_t c = n.at(u, k);
        if (c != 0) {
          col_sum[k] += std::lgamma(c + beta);
          ++nonzero[k];
        }
      }
    }
    for (std::int32_t k = 0; k < K; ++k) {
      ll += col_sum[k] + static_cast<double>(U - nonzero[k]) * lg_beta;
      ll -= std::lgamma(static_cast<double>(n.topic_total(k)) + U * beta);
    }
  }

  // Continuous items under their blob's assignment.
  if (!state.psi.empty()) {
    for (std::int32_t d = 0; d < corpus.doc_count(); ++d) {
      const Document& doc = corpus.docs[d];
      for (std::int32_t b = 0; b < doc.blob_count(); ++b) {
        const std::int32_t k = state.z[d][b];
        const Blob& blob = doc.blobs[b];
        for (std::size_t slot = 0; slot < blob.values.size(); ++slot) {
          for (const double v : blob.values[slot]) {
            ll += state.psi[slot].log_pdf(v, k);
          }
        }
      }
    }
  }

  // Supervised responses.
  if (config.supervised) {
    for (std::int32_t d = 0; d < corpus.doc_count(); ++d) {
      const double B = corpus.docs[d].blob_count();
      double dot = 0.0;
      for (std::int32_t k = 0; k < K; ++k) {
        dot += state.supervised.eta[k] * state.m[d][k];
      }
      ll += log_response_pdf(*corpus.docs[d].y, dot / B, state.supervised.sigma2);
    }
  }
  return ll;
}

}  // namespace familia
