#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "familia/corpus.hpp"
#include "familia/errors.hpp"
#include "familia/likelihood.hpp"
#include "familia/model.hpp"
#include "familia/model_io.hpp"
#include "familia/schedule.hpp"
#include "familia/trainer.hpp"
#include "synthetic.hpp"

using familia::ModelConfig;
using familia::SamplerKind;
using familia::TrainOptions;
using familia::parse_schedule;
using familia::train;

TEST_CASE("training produces one report row per iteration", "[trainer]") {
  const auto planted = synthetic::lda_corpus(10, 2, 20, 8, 3);
  const auto config = ModelConfig::make(planted.corpus.schema, 2);
  const auto schedule = parse_schedule("4MH-1GS", 7);
  const auto result = train(planted.corpus, config, schedule, 5);

  REQUIRE(result.report.rows.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) {
    const auto& row = result.report.rows[i];
    REQUIRE(row.iteration == static_cast<std::int32_t>(i + 1));
    REQUIRE(row.sampler == schedule[i].kind);
    REQUIRE(std::isfinite(row.log_likelihood));
    REQUIRE(row.wall_ms >= 0.0);
    REQUIRE(row.changed >= 0);
  }
  REQUIRE(result.report.rows[3].sampler == SamplerKind::MH);
  REQUIRE(result.report.rows[4].sampler == SamplerKind::GS);
  REQUIRE_NOTHROW(familia::check_count_consistency(result.state, planted.corpus));
}

TEST_CASE("training rejects impossible setups", "[trainer]") {
  const auto planted = synthetic::lda_corpus(4, 2, 10, 5, 1);
  const auto config = ModelConfig::make(planted.corpus.schema, 2);
  const auto schedule = parse_schedule("GS", 2);

  SECTION("empty corpus") {
    familia::Corpus empty;
    empty.schema = planted.corpus.schema;
    empty.vocab.resize(1);
    REQUIRE_THROWS_AS(train(empty, config, schedule, 1), familia::InvalidConfig);
  }
  SECTION("no workers") {
    TrainOptions opts;
    opts.workers = 0;
    REQUIRE_THROWS_AS(train(planted.corpus, config, schedule, 1, opts),
                      familia::InvalidConfig);
  }
  SECTION("empty schedule") {
    REQUIRE_THROWS_AS(train(planted.corpus, config, {}, 1),
                      familia::MalformedSchedule);
  }
}

TEST_CASE("single-worker training is bit-reproducible", "[trainer]") {
  const auto planted = synthetic::lda_corpus(30, 3, 40, 12, 9);
  const auto config = ModelConfig::make(planted.corpus.schema, 3);
  const auto schedule = parse_schedule("2MH-3GS", 12);
  const auto a = train(planted.corpus, config, schedule, 123);
  const auto b = train(planted.corpus, config, schedule, 123);
  REQUIRE(a.state == b.state);
  for (std::size_t i = 0; i < a.report.rows.size(); ++i) {
    REQUIRE(a.report.rows[i].log_likelihood == b.report.rows[i].log_likelihood);
    REQUIRE(a.report.rows[i].changed == b.report.rows[i].changed);
  }
}

TEST_CASE("likelihood climbs from initialization and settles", "[trainer]") {
  const auto planted = synthetic::lda_corpus(150, 4, 120, 40, 21);
  const auto config = ModelConfig::make(planted.corpus.schema, 4, 0.5, 0.05);
  const auto schedule = parse_schedule("GS", 80);
  const auto result = train(planted.corpus, config, schedule, 77);
  const auto& rows = result.report.rows;

  const double first = rows.front().log_likelihood;
  const double last = rows.back().log_likelihood;
  REQUIRE(last > first);

  // Moving averages over ten iterations should never fall far once burn-in
  // ends: tolerate dips of 1% of the total climb.
  const auto window = [&](std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = hi - 10; i < hi; ++i) s += rows[i].log_likelihood;
    return s / 10.0;
  };
  const double climb = last - first;
  double best = -1e308;
  for (std::size_t hi = 30; hi <= rows.size(); hi += 5) {
    const double w = window(hi);
    REQUIRE(w > best - 0.01 * climb);
    best = std::max(best, w);
  }

  // Settled: the last two windows differ by under 0.5% of the total climb.
  REQUIRE(std::fabs(window(rows.size()) - window(rows.size() - 10)) <
          0.005 * std::fabs(climb));
}

TEST_CASE("multi-worker training merges shards consistently", "[trainer]") {
  const auto planted = synthetic::lda_corpus(40, 3, 50, 15, 31);
  const auto config = ModelConfig::make(planted.corpus.schema, 3);

  for (const char* expr : {"GS", "MH2"}) {
    TrainOptions opts;
    opts.workers = 3;
    const auto schedule = parse_schedule(expr, 6);
    const auto result = train(planted.corpus, config, schedule, 17, opts);
    INFO("schedule " << expr);
    REQUIRE_NOTHROW(
        familia::check_count_consistency(result.state, planted.corpus));
    for (const auto& row : result.report.rows) {
      REQUIRE(std::isfinite(row.log_likelihood));
    }
  }
}

TEST_CASE("worker count does not derail the fit", "[trainer]") {
  const auto planted = synthetic::lda_corpus(60, 3, 60, 20, 41);
  const auto config = ModelConfig::make(planted.corpus.schema, 3, 0.7, 0.05);
  const auto schedule = parse_schedule("GS", 40);

  const auto solo = train(planted.corpus, config, schedule, 7);
  TrainOptions opts;
  opts.workers = 4;
  const auto quad = train(planted.corpus, config, schedule, 7, opts);

  const double a = solo.report.rows.back().log_likelihood;
  const double b = quad.report.rows.back().log_likelihood;
  REQUIRE(std::fabs(a - b) <= 0.02 * std::fabs(a));
}

TEST_CASE("checkpoints appear on schedule and reload cleanly", "[trainer]") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "familia_ckpt_test";
  fs::remove_all(dir);

  const auto planted = synthetic::lda_corpus(12, 2, 20, 6, 51);
  const auto config = ModelConfig::make(planted.corpus.schema, 2);
  TrainOptions opts;
  opts.checkpoint_dir = dir.string();
  opts.checkpoint_every = 2;
  const auto result = train(planted.corpus, config, parse_schedule("GS", 5), 3, opts);

  REQUIRE(fs::exists(dir / "checkpoint_2.model"));
  REQUIRE(fs::exists(dir / "checkpoint_4.model"));
  REQUIRE_FALSE(fs::exists(dir / "checkpoint_5.model"));

  const auto reloaded = familia::load_model((dir / "checkpoint_4.model").string());
  REQUIRE(reloaded.config == result.state.config);
  REQUIRE_NOTHROW(familia::check_count_consistency(reloaded, planted.corpus));
  fs::remove_all(dir);
}

TEST_CASE("report CSV round-trips through a text stream", "[trainer]") {
  const auto planted = synthetic::lda_corpus(8, 2, 15, 5, 61);
  const auto config = ModelConfig::make(planted.corpus.schema, 2);
  const auto result = train(planted.corpus, config, parse_schedule("MH3", 4), 2);

  std::stringstream buf;
  familia::write_report_csv(result.report, buf);
  std::string line;
  REQUIRE(std::getline(buf, line));
  REQUIRE(line == "iteration,sampler,log_likelihood,wall_ms,changed");
  int rows = 0;
  while (std::getline(buf, line)) {
    ++rows;
    int iteration = 0;
    char sampler[8] = {0};
    double ll = 0.0, wall = 0.0;
    long long changed = -1;
    REQUIRE(std::sscanf(line.c_str(), "%d,%2[A-Z],%lg,%lg,%lld", &iteration,
                        sampler, &ll, &wall, &changed) == 5);
    REQUIRE(iteration == rows);
    REQUIRE(std::string(sampler) == "MH");
    REQUIRE(std::isfinite(ll));
    REQUIRE(wall >= 0.0);
    REQUIRE(changed >= 0);
  }
  REQUIRE(rows == 4);
}
