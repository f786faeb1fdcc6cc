#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "familia/corpus.hpp"
#include "familia/inference.hpp"
#include "familia/model.hpp"
#include "familia/rng.hpp"
#include "oracle.hpp"

using familia::Blob;
using familia::Corpus;
using familia::FactorKind;
using familia::ModelConfig;
using familia::ModelState;
using familia::Schema;

namespace {

// A frozen two-token model whose topic 3 overwhelmingly favors token "w":
// phi(w | 3) ~ 0.99 while every other topic points at "x".
ModelState peaked_model() {
  Corpus corpus;
  corpus.schema = Schema::make({FactorKind::discrete});
  corpus.vocab.resize(1);
  corpus.vocab[0].add_or_get("w");
  corpus.vocab[0].add_or_get("x");
  const auto config = ModelConfig::make(corpus.schema, 4, 0.1, 0.01);
  auto state = familia::init_state(corpus, config, 1);
  for (std::int32_t k = 0; k < 4; ++k) {
    state.n[0].add(0, k, k == 3 ? 990 : 10);
    state.n[0].add(1, k, k == 3 ? 10 : 990);
  }
  state.m.clear();
  state.z.clear();
  return state;
}

Blob word_blob(std::int32_t id) {
  Blob blob;
  blob.tokens.resize(1);
  blob.tokens[0].push_back(id);
  blob.finalize();
  return blob;
}

}  // namespace

TEST_CASE("inference on an empty document returns the prior mean", "[inference]") {
  const auto model = peaked_model();
  const auto result = familia::infer_theta(model, std::vector<Blob>{}, 50, 1);
  REQUIRE(result.empty_after_filter);
  for (double t : result.theta) {
    REQUIRE(t == Catch::Approx(0.25).margin(1e-12));
  }
}

TEST_CASE("single-topic inference is the point mass", "[inference]") {
  Corpus corpus;
  corpus.schema = Schema::make({FactorKind::discrete});
  corpus.vocab.resize(1);
  corpus.vocab[0].add_or_get("w");
  const auto config = ModelConfig::make(corpus.schema, 1);
  const auto model = familia::init_state(corpus, config, 1);
  const auto result =
      familia::infer_theta(model, {word_blob(0)}, 20, 3);
  REQUIRE(result.theta == std::vector<double>{1.0});
}

TEST_CASE("a peaked model pulls repeated evidence onto its topic", "[inference]") {
  const auto model = peaked_model();
  std::vector<Blob> doc(50, word_blob(0));
  const auto result = familia::infer_theta(model, doc, 100, 7);
  REQUIRE(result.theta.size() == 4);
  REQUIRE_FALSE(result.empty_after_filter);
  const auto argmax = static_cast<std::int32_t>(
      std::max_element(result.theta.begin(), result.theta.end()) -
      result.theta.begin());
  REQUIRE(argmax == 3);
  REQUIRE(result.theta[3] > 0.9);

  double sum = 0.0;
  for (double t : result.theta) sum += t;
  REQUIRE(sum == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inference never mutates the frozen model", "[inference]") {
  const auto model = peaked_model();
  const auto untouched = model;
  std::vector<Blob> doc(20, word_blob(0));
  doc.push_back(word_blob(1));
  familia::infer_theta(model, doc, 50, 11);
  REQUIRE(model == untouched);
}

TEST_CASE("inference is deterministic in the seed", "[inference]") {
  const auto model = peaked_model();
  std::vector<Blob> doc = {word_blob(0), word_blob(1), word_blob(0)};
  const auto a = familia::infer_theta(model, doc, 80, 13);
  const auto b = familia::infer_theta(model, doc, 80, 13);
  REQUIRE(a.theta == b.theta);
}

TEST_CASE("blob order barely moves the posterior mixture", "[inference]") {
  // Two topics, each strongly tied to one of the two tokens: every blob's
  // topic is near-certain, so the averaged mixture is a stable function of
  // the document and visiting order only perturbs it through sampling noise.
  Corpus corpus;
  corpus.schema = Schema::make({FactorKind::discrete});
  corpus.vocab.resize(1);
  corpus.vocab[0].add_or_get("w");
  corpus.vocab[0].add_or_get("x");
  const auto config = ModelConfig::make(corpus.schema, 2, 1.0, 0.01);
  auto model = familia::init_state(corpus, config, 1);
  for (std::int32_t k = 0; k < 2; ++k) {
    model.n[0].add(0, k, k == 0 ? 990 : 10);
    model.n[0].add(1, k, k == 0 ? 10 : 990);
  }
  model.m.clear();
  model.z.clear();

  std::vector<Blob> doc;
  for (int i = 0; i < 30; ++i) doc.push_back(word_blob(i % 3 == 0 ? 1 : 0));
  auto shuffled = doc;
  std::reverse(shuffled.begin(), shuffled.end());
  std::swap(shuffled[2], shuffled[11]);

  const auto a = familia::infer_theta(model, doc, 200, 5);
  const auto b = familia::infer_theta(model, shuffled, 200, 5);
  REQUIRE(oracle::total_variation(a.theta, b.theta) < 0.01);
}

TEST_CASE("documents map onto the model vocabulary with drops", "[inference]") {
  const auto model = peaked_model();
  const auto raw = familia::parse_raw_document("0:w novel | 0:unseen | 0:x", 1);
  const auto [blobs, dropped] = familia::map_document(model, raw);
  REQUIRE(dropped == 2);
  REQUIRE(blobs.size() == 2);  // the all-unseen middle blob vanished
  REQUIRE(blobs[0].tokens[0] == std::vector<std::int32_t>{0});
  REQUIRE(blobs[1].tokens[0] == std::vector<std::int32_t>{1});
}

TEST_CASE("fully unseen documents fall back to the prior with a warning flag",
          "[inference]") {
  const auto model = peaked_model();
  const auto raw = familia::parse_raw_document("0:nope | 0:nothing here", 1);
  const auto result = familia::infer_theta(model, raw, 30, 2);
  REQUIRE(result.empty_after_filter);
  REQUIRE(result.dropped_tokens == 3);
  for (double t : result.theta) REQUIRE(t == Catch::Approx(0.25).margin(1e-12));
}

TEST_CASE("raw-document inference counts its drops", "[inference]") {
  const auto model = peaked_model();
  const auto raw = familia::parse_raw_document("0:w w mystery | 0:x", 1);
  const auto result = familia::infer_theta(model, raw, 50, 9);
  REQUIRE(result.dropped_tokens == 1);
  REQUIRE_FALSE(result.empty_after_filter);
  REQUIRE(result.theta.size() == 4);
}
