#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "familia/corpus.hpp"
#include "familia/errors.hpp"
#include "familia/gibbs.hpp"
#include "familia/model.hpp"
#include "familia/rng.hpp"

namespace familia {

// Topic inference for unseen documents against a frozen model: Gibbs sweeps
// over the new document's blobs with the global counts, continuous
// distributions, and regression parameters held fixed.  Pure function of
// (model, document, seed); the model is never written, so concurrent calls
// may share it.

struct InferResult {
  std::vector<double> theta;
  std::int32_t dropped_tokens = 0;   // query tokens absent from the model vocab
  bool empty_after_filter = false;   // nothing survived: theta is the prior mean
};

// Maps a raw parsed document onto the model's vocabularies.  Unseen tokens
// are dropped (a frozen model has no smoothed column for them); blobs left
// without any item disappear.  Returns the blob list plus the drop count.
inline std::pair<std::vector<Blob>, std::int32_t> map_document(
    const ModelState& model, const RawDocument& raw, std::size_t line_no = 0) {
  const Schema& schema = model.config.schema;
  std::vector<Blob> blobs;
  std::int32_t dropped = 0;
  const auto lookup = [&model](std::int32_t slot, const std::string& token) {
    return model.vocab[slot].find(token);
  };
  for (const auto& raw_blob : raw.blobs) {
    Blob blob;
    dropped += detail::convert_blob(raw_blob, schema, line_no, lookup, blob);
    if (blob.item_count() > 0) blobs.push_back(std::move(blob));
  }
  return {std::move(blobs), dropped};
}

inline InferResult infer_theta(const ModelState& model,
                               const std::vector<Blob>& blobs,
                               std::int32_t iterations, std::uint64_t seed) {
  const ModelConfig& config = model.config;
  const std::int32_t K = config.K;
  InferResult result;

  const auto prior_mean = [&config, K] {
    std::vector<double> t(K);
    const double alpha_sum = config.alpha_sum();
    for (std::int32_t k = 0; k < K; ++k) t[k] = config.alpha[k] / alpha_sum;
    return t;
  };

  std::vector<const Blob*> live;
  for (const Blob& blob : blobs) {
    if (blob.item_count() > 0) live.push_back(&blob);
  }
  if (live.empty()) {
    result.theta = prior_mean();
    result.empty_after_filter = true;
    return result;
  }
  if (iterations < 1) iterations = 1;

  const auto B = static_cast<std::int32_t>(live.size());
  Rng rng(seed);
  std::vector<std::int32_t> m_loc(K, 0);
  std::vector<std::int32_t> z_loc(B);
  for (std::int32_t b = 0; b < B; ++b) {
    z_loc[b] = static_cast<std::int32_t>(rng.uniform_index(K));
    ++m_loc[z_loc[b]];
  }

  // The supervised term is skipped (the response of a new document is what
  // one would be predicting), which blob_log_conditional does on its own
  // because no signal is passed.
  std::vector<double> log_q, scratch;
  std::vector<double> theta_acc(K, 0.0);
  const std::int32_t first_kept = iterations / 2;
  std::int32_t kept = 0;
  for (std::int32_t iter = 0; iter < iterations; ++iter) {
    for (std::int32_t b = 0; b < B; ++b) {
      --m_loc[z_loc[b]];
      blob_log_conditional(config, model.n, model.psi, model.supervised, m_loc,
                           B, std::nullopt, *live[b], log_q);
      const std::int32_t next = detail::sample_from_log_weights(scratch, log_q, rng);
      ++m_loc[next];
      z_loc[b] = next;
    }
    if (iter >= first_kept) {
      const double denom = static_cast<double>(B) + config.alpha_sum();
      for (std::int32_t k = 0; k < K; ++k) {
        theta_acc[k] += (m_loc[k] + config.alpha[k]) / denom;
      }
      ++kept;
    }
  }

  result.theta.resize(K);
  double total = 0.0;
  for (std::int32_t k = 0; k < K; ++k) total += theta_acc[k];
  for (std::int32_t k = 0; k < K; ++k) result.theta[k] = theta_acc[k] / total;
  return result;
}

// Convenience overload: map a raw document, then infer.
inline InferResult infer_theta(const ModelState& model, const RawDocument& raw,
                               std::int32_t iterations, std::uint64_t seed,
                               std::size_t line_no = 0) {
  auto [blobs, dropped] = map_document(model, raw, line_no);
  InferResult result = infer_theta(model, blobs, iterations, seed);
  result.dropped_tokens = dropped;
  return result;
}

}  // namespace familia
