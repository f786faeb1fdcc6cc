#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "familia/corpus.hpp"
#include "familia/distributions.hpp"
#include "familia/errors.hpp"
#include "familia/rng.hpp"

namespace familia {

// ---------------------------------------------------------------------------
// Configuration.
// ---------------------------------------------------------------------------

struct ModelConfig {
  std::int32_t K = 0;
  std::vector<double> alpha;  // per-topic Dirichlet prior, size K
  std::vector<double> beta;   // symmetric Dirichlet scalar per discrete slot
  bool supervised = false;
  Schema schema;

  double alpha_sum() const {
    double s = 0.0;
    for (const double a : alpha) s += a;
    return s;
  }

  // Symmetric priors with the usual collapsed-sampler defaults
  // (alpha = 50/K, beta = 0.01) unless overridden.
  static ModelConfig make(const Schema& schema, std::int32_t topics,
                          double alpha_scalar = -1.0, double beta_scalar = 0.01) {
    ModelConfig c;
    c.K = topics;
    c.schema = schema;
    c.supervised = schema.supervised;
    if (alpha_scalar <= 0.0) alpha_scalar = 50.0 / static_cast<double>(topics);
    c.alpha.assign(topics, alpha_scalar);
    c.beta.assign(schema.discrete_count, beta_scalar);
    c.validate();
    return c;
  }

  void validate() const {
    if (K < 1) throw InvalidConfig("config: K must be >= 1");
    if (static_cast<std::int32_t>(alpha.size()) != K) {
      throw InvalidConfig("config: alpha must have K entries");
    }
    for (const double a : alpha) {
      if (!(a > 0.0)) throw InvalidConfig("config: alpha entries must be > 0");
    }
    if (static_cast<std::int32_t>(beta.size()) != schema.discrete_count) {
      throw InvalidConfig("config: one beta per discrete factor required");
    }
    for (const double b : beta) {
      if (!(b > 0.0)) throw InvalidConfig("config: beta entries must be > 0");
    }
  }

  bool operator==(const ModelConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Count matrices (sufficient statistics of the collapsed sampler).
// ---------------------------------------------------------------------------

// Dense U x K item-by-topic counts with cached per-topic column totals.
class CountMatrix {
 public:
  CountMatrix() = default;
  CountMatrix(std::int32_t rows, std::int32_t cols)
      : rows_(rows), cols_(cols),
        cells_(static_cast<std::size_t>(rows) * cols, 0), totals_(cols, 0) {}

  std::int32_t rows() const { return rows_; }
  std::int32_t cols() const { return cols_; }

  std::int32_t at(std::int32_t u, std::int32_t k) const {
    return cells_[static_cast<std::size_t>(u) * cols_ + k];
  }
  std::int64_t topic_total(std::int32_t k) const { return totals_[k]; }

  void add(std::int32_t u, std::int32_t k, std::int32_t delta) {
    cells_[static_cast<std::size_t>(u) * cols_ + k] += delta;
    totals_[k] += delta;
  }

  const std::vector<std::int32_t>& cells() const { return cells_; }
  const std::vector<std::int64_t>& totals() const { return totals_; }

  bool operator==(const CountMatrix&) const = default;

 private:
  std::int32_t rows_ = 0;
  std::int32_t cols_ = 0;
  std::vector<std::int32_t> cells_;  // row-major, row = item
  std::vector<std::int64_t> totals_;
};

// ---------------------------------------------------------------------------
// Continuous per-topic distributions and supervised regression parameters.
// ---------------------------------------------------------------------------

struct GaussianParams {
  double mean = 0.5;
  double var = 1.0;
  bool operator==(const GaussianParams&) const = default;
};

struct BetaParams {
  double a = 1.0;  // psi_1
  double b = 1.0;  // psi_2
  bool operator==(const BetaParams&) const = default;
};

struct ContinuousFactorParams {
  FactorKind kind = FactorKind::continuous_gaussian;
  std::vector<GaussianParams> gaussian;  // size K when Gaussian
  std::vector<BetaParams> beta;          // size K when Beta

  double log_pdf(double v, std::int32_t k) const {
    if (kind == FactorKind::continuous_gaussian) {
      return log_gaussian_pdf(v, gaussian[k].mean, gaussian[k].var);
    }
    return log_beta_pdf(v, beta[k].a, beta[k].b);
  }

  bool operator==(const ContinuousFactorParams&) const = default;
};

struct SupervisedParams {
  std::vector<double> eta;  // size K
  double sigma2 = 1.0;
  bool operator==(const SupervisedParams&) const = default;
};

// ---------------------------------------------------------------------------
// Full model state.
// ---------------------------------------------------------------------------

struct ModelState {
  ModelConfig config;
  std::vector<Vocabulary> vocab;  // [discrete slot], copied from the corpus

  std::vector<std::vector<std::int32_t>> m;  // [doc][topic] blob counts
  std::vector<std::vector<std::int32_t>> z;  // [doc][blob] assignments
  std::vector<CountMatrix> n;                // [discrete slot] item-topic counts
  std::vector<ContinuousFactorParams> psi;   // [continuous slot]
  SupervisedParams supervised;

  std::int32_t topic_count() const { return config.K; }
  std::int32_t doc_count() const { return static_cast<std::int32_t>(m.size()); }

  bool operator==(const ModelState&) const = default;
};

// Adds (sign=+1) or removes (sign=-1) one blob's contribution to the counts.
inline void add_blob_counts(ModelState& state, const Blob& blob, std::int32_t doc_id,
                            std::int32_t topic, std::int32_t sign) {
  state.m[doc_id][topic] += sign;
  for (std::size_t slot = 0; slot < blob.token_counts.size(); ++slot) {
    for (const auto& [u, c] : blob.token_counts[slot]) {
      state.n[slot].add(u, topic, sign * c);
    }
  }
}

// Fresh state with uniform-random per-blob assignments.  Continuous topics
// start uninformative (Gaussian {0.5, 1}, Beta {1, 1} = uniform); the
// supervised regression starts at eta = 0, sigma2 = 1.
inline ModelState init_state(const Corpus& corpus, const ModelConfig& config,
                             std::uint64_t seed) {
  config.validate();
  if (!(config.schema == corpus.schema)) {
    throw InvalidConfig("init: config schema does not match corpus schema");
  }
  if (config.supervised) {
    for (const Document& doc : corpus.docs) {
      if (!doc.y) {
        throw MissingSupervisedSignal(
            "init: supervised config but a document has no signal");
      }
    }
  }

  ModelState s;
  s.config = config;
  s.vocab = corpus.vocab;
  const std::int32_t K = config.K;
  s.m.assign(corpus.docs.size(), std::vector<std::int32_t>(K, 0));
  s.n.reserve(corpus.vocab.size());
  for (const Vocabulary& v : corpus.vocab) s.n.emplace_back(v.size(), K);

  for (const FactorSpec& f : config.schema.factors) {
    if (!is_continuous(f.kind)) continue;
    ContinuousFactorParams p;
    p.kind = f.kind;
    if (f.kind == FactorKind::continuous_gaussian) {
      p.gaussian.assign(K, GaussianParams{});
    } else {
      p.beta.assign(K, BetaParams{});
    }
    s.psi.push_back(std::move(p));
  }
  if (config.supervised) s.supervised.eta.assign(K, 0.0);

  Rng rng(seed);
  s.z.resize(corpus.docs.size());
  for (std::int32_t d = 0; d < corpus.doc_count(); ++d) {
    const Document& doc = corpus.docs[d];
    s.z[d].resize(doc.blobs.size());
    for (std::int32_t b = 0; b < doc.blob_count(); ++b) {
      const auto k = static_cast<std::int32_t>(rng.uniform_index(K));
      s.z[d][b] = k;
      add_blob_counts(s, doc.blobs[b], d, k, +1);
    }
  }
  return s;
}

// Posterior-mean document-topic distribution (m_dk + alpha_k, normalized).
inline std::vector<double> theta(const ModelState& state, std::int32_t doc_id) {
  if (doc_id < 0 || doc_id >= state.doc_count()) {
    throw UnknownDocument("theta: no document " + std::to_string(doc_id));
  }
  std::vector<double> t(state.config.K);
  double sum = 0.0;
  for (std::int32_t k = 0; k < state.config.K; ++k) {
    t[k] = state.m[doc_id][k] + state.config.alpha[k];
    sum += t[k];
  }
  for (double& v : t) v /= sum;
  return t;
}

// Posterior-mean item distribution of one topic (n_ku + beta, normalized).
inline std::vector<double> phi(const ModelState& state, std::int32_t factor_id,
                               std::int32_t topic) {
  if (factor_id < 0 || factor_id >= state.config.schema.factor_count() ||
      is_continuous(state.config.schema.kind_of(factor_id))) {
    throw NotADiscreteFactor("phi: factor " + std::to_string(factor_id) +
                             " is not a discrete factor");
  }
  if (topic < 0 || topic >= state.config.K) {
    throw TopicOutOfRange("phi: topic " + std::to_string(topic));
  }
  const std::int32_t slot = state.config.schema.slot_of[factor_id];
  const CountMatrix& n = state.n[slot];
  const double beta = state.config.beta[slot];
  std::vector<double> p(n.rows());
  const double denom =
      static_cast<double>(n.topic_total(topic)) + beta * n.rows();
  for (std::int32_t u = 0; u < n.rows(); ++u) {
    p[u] = (n.at(u, topic) + beta) / denom;
  }
  return p;
}

// Moves one blob to a new topic, maintaining every count incrementally.
inline void apply_assignment(ModelState& state, const Corpus& corpus,
                             std::int32_t doc_id, std::int32_t blob_id,
                             std::int32_t new_topic) {
  if (new_topic < 0 || new_topic >= state.config.K) {
    throw TopicOutOfRange("apply_assignment: topic " + std::to_string(new_topic));
  }
  const std::int32_t old_topic = state.z[doc_id][blob_id];
  if (old_topic == new_topic) return;
  const Blob& blob = corpus.docs[doc_id].blobs[blob_id];
  add_blob_counts(state, blob, doc_id, old_topic, -1);
  add_blob_counts(state, blob, doc_id, new_topic, +1);
  state.z[doc_id][blob_id] = new_topic;
}

// Recomputes m and n from scratch out of z and compares with the
// incrementally maintained versions; throws InconsistentCounts on any
// mismatch.  Test and debugging aid.
inline void check_count_consistency(const ModelState& state, const Corpus& corpus) {
  ModelState fresh;
  fresh.m.assign(state.m.size(), std::vector<std::int32_t>(state.config.K, 0));
  for (const CountMatrix& n : state.n) {
    fresh.n.emplace_back(n.rows(), n.cols());
  }
  for (std::int32_t d = 0; d < corpus.doc_count(); ++d) {
    for (std::int32_t b = 0; b < corpus.docs[d].blob_count(); ++b) {
      add_blob_counts(fresh, corpus.docs[d].blobs[b], d, state.z[d][b], +1);
    }
  }
  if (fresh.m != state.m || fresh.n != state.n) {
    throw InconsistentCounts("count matrices disagree with assignments");
  }
}

}  // namespace familia
