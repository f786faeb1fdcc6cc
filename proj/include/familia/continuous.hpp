#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "familia/corpus.hpp"
#include "familia/errors.hpp"
#include "familia/model.hpp"

namespace familia {

// Iteration-barrier parameter updates: continuous factor distributions are
// refit from the items currently assigned to each topic (method of moments),
// and the supervised regression is resolved against the current zbar matrix.

// Biased (divide-by-n) sample moments.
namespace detail {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  std::size_t count = 0;
};

inline Moments sample_moments(const std::vector<double>& xs) {
  Moments m;
  m.count = xs.size();
  if (xs.empty()) return m;
  for (const double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (const double x : xs) {
    const double d = x - m.mean;
    m.var += d * d;
  }
  m.var /= static_cast<double>(xs.size());
  return m;
}

}  // namespace detail

// Gaussian refit: sample mean and biased variance, variance floored so the
// density stays proper when a topic's items coincide.  Topics with no items
// keep their previous parameters.  Returns how many topics were left as-is.
inline std::int32_t update_gaussian_params(
    const std::vector<std::vector<double>>& items_by_topic,
    std::vector<GaussianParams>& params) {
  std::int32_t retained = 0;
  for (std::size_t k = 0; k < items_by_topic.size(); ++k) {
    const auto m = detail::sample_moments(items_by_topic[k]);
    if (m.count == 0) {
      ++retained;
      continue;
    }
    params[k].mean = m.mean;
    params[k].var = std::max(m.var, 1e-6);
  }
  return retained;
}

// Beta refit by method of moments:
//   common = sbar(1-sbar)/var - 1
//   psi_1 = sbar * common,  psi_2 = (1-sbar) * common
// The moment equations are only solvable when var < sbar(1-sbar); outside
// that region (or with fewer than two items) the topic keeps its previous
// parameters.  Returns the number of topics left unchanged.
inline std::int32_t update_beta_params(
    const std::vector<std::vector<double>>& items_by_topic,
    std::vector<BetaParams>& params) {
  std::int32_t retained = 0;
  for (std::size_t k = 0; k < items_by_topic.size(); ++k) {
    const auto m = detail::sample_moments(items_by_topic[k]);
    const double feasible = m.mean * (1.0 - m.mean);
    if (m.count < 2 || m.var <= 0.0 || m.var >= feasible) {
      ++retained;
      continue;
    }
    const double common = feasible / m.var - 1.0;
    params[k].a = m.mean * common;
    params[k].b = (1.0 - m.mean) * common;
  }
  return retained;
}

// Supervised refit: ridge-regularized least squares
//   eta = (A^T A + lambda I)^{-1} A^T Y,   lambda = 1e-6
//   sigma2 = max(0, (Y^T Y - Y^T A eta) / D)
// where row d of A is zbar_d.  The tiny ridge keeps the solve defined when
// topics are empty (singular A^T A) at negligible bias.
inline SupervisedParams update_supervised_params(
    const std::vector<std::vector<double>>& zbar, const std::vector<double>& y) {
  const std::size_t D = zbar.size();
  if (D == 0) return SupervisedParams{};
  const std::size_t K = zbar[0].size();

  Eigen::MatrixXd A(D, K);
  Eigen::VectorXd Y(D);
  for (std::size_t d = 0; d < D; ++d) {
    if (!std::isfinite(y[d])) {
      throw NonFiniteInput("supervised update: non-finite signal");
    }
    Y(d) = y[d];
    for (std::size_t k = 0; k < K; ++k) {
      if (!std::isfinite(zbar[d][k])) {
        throw NonFiniteInput("supervised update: non-finite zbar entry");
      }
      A(d, k) = zbar[d][k];
    }
  }

  Eigen::MatrixXd ata = A.transpose() * A;
  ata.diagonal().array() += 1e-6;
  const Eigen::VectorXd aty = A.transpose() * Y;
  const Eigen::VectorXd eta = ata.ldlt().solve(aty);

  SupervisedParams out;
  out.eta.assign(eta.data(), eta.data() + K);
  out.sigma2 =
      std::max(0.0, (Y.squaredNorm() - Y.dot(A * eta)) / static_cast<double>(D));
  return out;
}

// ---------------------------------------------------------------------------
// State-level orchestration (what the trainer runs at the barrier).
// ---------------------------------------------------------------------------

// Items of one continuous slot grouped by their blob's current topic.
inline std::vector<std::vector<double>> items_by_topic(const ModelState& state,
                                                       const Corpus& corpus,
                                                       std::int32_t slot) {
  std::vector<std::vector<double>> groups(state.config.K);
  for (std::int32_t d = 0; d < corpus.doc_count(); ++d) {
    const Document& doc = corpus.docs[d];
    for (std::int32_t b = 0; b < doc.blob_count(); ++b) {
      const auto& values = doc.blobs[b].values[slot];
      auto& group = groups[state.z[d][b]];
      group.insert(group.end(), values.begin(), values.end());
    }
  }
  return groups;
}

// Per-document blob-topic frequency vectors (rows of the regression matrix).
inline std::vector<std::vector<double>> zbar_matrix(const ModelState& state) {
  std::vector<std::vector<double>> zbar(state.doc_count());
  for (std::int32_t d = 0; d < state.doc_count(); ++d) {
    double total = 0.0;
    for (const std::int32_t c : state.m[d]) total += c;
    zbar[d].resize(state.config.K);
    for (std::int32_t k = 0; k < state.config.K; ++k) {
      zbar[d][k] = total > 0.0 ? state.m[d][k] / total : 0.0;
    }
  }
  return zbar;
}

// Refit every continuous slot and (when configured) the supervised
// parameters.  Returns the number of topic distributions retained unchanged
// across all slots (degenerate-moment diagnostics).
inline std::int32_t update_iteration_params(ModelState& state, const Corpus& corpus) {
  std::int32_t retained = 0;
  for (std::size_t slot = 0; slot < state.psi.size(); ++slot) {
    const auto groups = items_by_topic(state, corpus, static_cast<std::int32_t>(slot));
    if (state.psi[slot].kind == FactorKind::continuous_gaussian) {
      retained += update_gaussian_params(groups, state.psi[slot].gaussian);
    } else {
      retained += update_beta_params(groups, state.psi[slot].beta);
    }
  }
  if (state.config.supervised) {
    std::vector<double> y(state.doc_count());
    for (std::int32_t d = 0; d < state.doc_count(); ++d) {
      y[d] = *corpus.docs[d].y;
    }
    state.supervised = update_supervised_params(zbar_matrix(state), y);
  }
  return retained;
}

}  // namespace familia
