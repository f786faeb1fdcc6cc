#pragma once

#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "familia/continuous.hpp"
#include "familia/corpus.hpp"
#include "familia/errors.hpp"
#include "familia/gibbs.hpp"
#include "familia/likelihood.hpp"
#include "familia/metropolis.hpp"
#include "familia/model.hpp"
#include "familia/model_io.hpp"
#include "familia/rng.hpp"
#include "familia/schedule.hpp"

namespace familia {

struct IterationRecord {
  std::int32_t iteration = 0;  // 1-based
  SamplerKind sampler = SamplerKind::GS;
  std::int32_t mh_steps = 1;
  double log_likelihood = 0.0;
  double wall_ms = 0.0;
  std::int64_t changed = 0;
};

struct TrainReport {
  std::vector<IterationRecord> rows;
};

struct TrainOptions {
  std::int32_t workers = 1;
  std::int32_t checkpoint_every = 10;
  std::string checkpoint_dir;  // empty: no checkpoints written
};

struct TrainResult {
  ModelState state;
  TrainReport report;
};

namespace detail {

// One parallel iteration.  Workers own disjoint round-robin document shards
// and full private copies of the state; they sample against the iteration-
// start snapshot of the shared counts (their copy starts as exactly that) and
// the barrier merges their additive count deltas:
//   n_new = n_snapshot + sum_w (n_w - n_snapshot)
// Deltas commute, so the merge cannot conflict.  m and z rows are
// shard-private and are copied back from their owner.
inline std::int64_t parallel_sweep(ModelState& state, const Corpus& corpus,
                                   const ScheduleEntry& entry,
                                   const ProposalSet* proposals,
                                   std::uint64_t seed, std::int64_t iteration,
                                   std::int32_t workers) {
  std::vector<std::vector<std::int32_t>> shards(workers);
  for (std::int32_t d = 0; d < corpus.doc_count(); ++d) {
    shards[d % workers].push_back(d);
  }

  const std::vector<CountMatrix> snapshot = state.n;
  std::vector<ModelState> locals(workers, state);
  std::vector<std::int64_t> changed(workers, 0);
  std::vector<std::exception_ptr> failures(workers);

  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::int32_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        Rng rng(mix_seed(seed, 0x9042 + iteration * 8191 + w));
        SweepOptions opts;
        opts.docs = &shards[w];
        changed[w] = entry.kind == SamplerKind::GS
                         ? gibbs_sweep(locals[w], corpus, rng, opts)
                         : mh_sweep(locals[w], corpus, *proposals,
                                    entry.mh_steps, rng, opts);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  std::int64_t total_changed = 0;
  for (std::int32_t w = 0; w < workers; ++w) {
    for (std::size_t slot = 0; slot < state.n.size(); ++slot) {
      const CountMatrix& local = locals[w].n[slot];
      const CountMatrix& base = snapshot[slot];
      for (std::int32_t u = 0; u < local.rows(); ++u) {
        for (std::int32_t k = 0; k < local.cols(); ++k) {
          const std::int32_t delta = local.at(u, k) - base.at(u, k);
          if (delta != 0) state.n[slot].add(u, k, delta);
        }
      }
    }
    for (const std::int32_t d : shards[w]) {
      state.m[d] = std::move(locals[w].m[d]);
      state.z[d] = std::move(locals[w].z[d]);
    }
    total_changed += changed[w];
  }
  return total_changed;
}

}  // namespace detail

// Executes the schedule: per iteration, build proposal tables when the entry
// is MH, run the sweep (sharded when workers > 1), then at the iteration
// barrier refit continuous/supervised parameters, evaluate the joint
// log-likelihood, and append a report row.  Checkpoints (model + document
// state) land in checkpoint_dir every checkpoint_every iterations.
inline TrainResult train(const Corpus& corpus, const ModelConfig& config,
                         const Schedule& schedule, std::uint64_t seed,
                         const TrainOptions& opts = {}) {
  if (opts.workers < 1) throw InvalidConfig("train: workers must be >= 1");
  if (corpus.docs.empty()) throw InvalidConfig("train: corpus is empty");
  if (schedule.empty()) throw MalformedSchedule("train: schedule is empty");

  TrainResult result{init_state(corpus, config, seed), {}};
  ModelState& state = result.state;
  result.report.rows.reserve(schedule.size());

  // Sequential sampling path: one generator across all iterations, making
  // workers=1 runs bit-reproducible for a fixed seed.
  Rng rng(mix_seed(seed, 0x51));

  for (std::size_t it = 0; it < schedule.size(); ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    const ScheduleEntry entry = schedule[it];
    const bool is_mh = entry.kind == SamplerKind::MH;

    ProposalSet proposals;
    if (is_mh) {
      proposals = build_proposals(state, corpus, static_cast<std::int64_t>(it));
    }

    std::int64_t changed = 0;
    if (opts.workers == 1) {
      changed = is_mh ? mh_sweep(state, corpus, proposals, entry.mh_steps, rng)
                      : gibbs_sweep(state, corpus, rng);
    } else {
      changed = detail::parallel_sweep(state, corpus, entry,
                                       is_mh ? &proposals : nullptr, seed,
                                       static_cast<std::int64_t>(it),
                                       opts.workers);
    }

    update_iteration_params(state, corpus);
    const double ll = joint_log_likelihood(state, corpus);
    const double wall_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0)
            .count();

    result.report.rows.push_back({static_cast<std::int32_t>(it + 1), entry.kind,
                                  entry.mh_steps, ll, wall_ms, changed});

    if (!opts.checkpoint_dir.empty() && opts.checkpoint_every > 0 &&
        (it + 1) % static_cast<std::size_t>(opts.checkpoint_every) == 0) {
      std::filesystem::create_directories(opts.checkpoint_dir);
      save_model(state,
                 opts.checkpoint_dir + "/checkpoint_" + std::to_string(it + 1) +
                     ".model",
                 /*include_assignments=*/true);
    }
  }
  return result;
}

// CSV emission of the per-iteration records (the report file format).
inline void write_report_csv(const TrainReport& report, std::ostream& out) {
  out << "iteration,sampler,log_likelihood,wall_ms,changed\n";
  char buf[160];
  for (const IterationRecord& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.17g,%.3f,%lld\n", r.iteration,
                  sampler_name(r.sampler), r.log_likelihood, r.wall_ms,
                  static_cast<long long>(r.changed));
    out << buf;
  }
}

}  // namespace familia
