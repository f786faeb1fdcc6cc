// familia: command-line front door for the topic-modeling engine.
// Subcommands: train, topics, infer, score.  All numeric output uses fixed
// 6-decimal formatting; every command is deterministic for fixed flags.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "familia/familia.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw familia::IoFailure("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::vector<double> parse_vector_line(const std::string& line, std::size_t line_no,
                                      const char* what) {
  std::vector<double> v;
  for (const auto part : familia::detail::split_spaces(line)) {
    const auto x = familia::detail::parse_double(part);
    if (!x) {
      throw familia::NonFiniteInput(std::string(what) + " line " +
                                    std::to_string(line_no) +
                                    ": expected numbers");
    }
    v.push_back(*x);
  }
  if (v.empty()) {
    throw familia::NonFiniteInput(std::string(what) + " line " +
                                  std::to_string(line_no) + ": empty");
  }
  return v;
}

std::vector<std::string> non_comment_lines(const std::string& text) {
  std::vector<std::string> lines;
  for (const auto raw : familia::detail::split_on(text, "\n")) {
    const auto line = familia::detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    lines.emplace_back(line);
  }
  return lines;
}

// --------------------------------------------------------------------------
// train
// --------------------------------------------------------------------------

struct TrainFlags {
  std::string corpus, schema, out, schedule = "GS";
  std::int32_t topics = 0, iters = 0, workers = 1, checkpoint_every = 10;
  double alpha = -1.0, beta = 0.01;
  std::uint64_t seed = 42;
};

int run_train(const TrainFlags& f) {
  const familia::Schema schema = familia::parse_schema(read_file(f.schema));
  const familia::Corpus corpus = familia::parse_corpus(read_file(f.corpus), schema);
  const familia::ModelConfig config =
      familia::ModelConfig::make(schema, f.topics, f.alpha, f.beta);
  const familia::Schedule schedule = familia::parse_schedule(f.schedule, f.iters);

  std::filesystem::create_directories(f.out);
  familia::TrainOptions opts;
  opts.workers = f.workers;
  opts.checkpoint_every = f.checkpoint_every;
  opts.checkpoint_dir = f.out;

  const familia::TrainResult result =
      familia::train(corpus, config, schedule, f.seed, opts);

  const std::string model_path = f.out + "/model.txt";
  familia::save_model(result.state, model_path);

  std::ofstream report(f.out + "/report.csv");
  familia::write_report_csv(result.report, report);

  nlohmann::json manifest = {
      {"command", "train"},
      {"corpus", f.corpus},
      {"schema", f.schema},
      {"topics", f.topics},
      {"schedule", f.schedule},
      {"iters", f.iters},
      {"alpha", f.alpha},
      {"beta", f.beta},
      {"workers", f.workers},
      {"seed", f.seed},
      {"out", f.out},
      {"checkpoint_every", f.checkpoint_every},
      {"model", model_path},
      {"model_format_version", familia::kModelFormatVersion},
  };
  std::ofstream(f.out + "/manifest.json") << manifest.dump(2) << "\n";

  std::cout << "model: " << model_path << "\n"
            << "final log-likelihood: "
            << familia::detail::format_double(
                   result.report.rows.back().log_likelihood)
            << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// topics
// --------------------------------------------------------------------------

int run_topics(const std::string& model_path, std::int32_t top_n) {
  const familia::ModelState model = familia::load_model(model_path);
  for (const familia::FactorSpec& f : model.config.schema.factors) {
    if (familia::is_continuous(f.kind)) continue;
    const std::int32_t slot = model.config.schema.slot_of[f.id];
    for (std::int32_t k = 0; k < model.config.K; ++k) {
      std::cout << "factor " << f.id << " topic " << k << "\n";
      const std::vector<double> p = familia::phi(model, f.id, k);
      std::vector<std::int32_t> order(p.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&p](std::int32_t a, std::int32_t b) {
                  return p[a] != p[b] ? p[a] > p[b] : a < b;
                });
      const auto limit = std::min<std::size_t>(top_n, order.size());
      for (std::size_t i = 0; i < limit; ++i) {
        std::cout << "  " << model.vocab[slot].token(order[i]) << ' '
                  << fixed6(p[order[i]]) << "\n";
      }
    }
  }
  return 0;
}

// --------------------------------------------------------------------------
// infer
// --------------------------------------------------------------------------

int run_infer(const std::string& model_path, const std::string& input_path,
              std::int32_t iters, std::uint64_t seed) {
  const familia::ModelState model = familia::load_model(model_path);
  const std::string text = read_file(input_path);
  auto parts = familia::detail::split_on(text, "\n");
  // A trailing newline is an artifact, not an empty final document.
  if (!text.empty() && text.back() == '\n') parts.pop_back();
  std::size_t line_no = 0;
  for (const auto raw_line : parts) {
    ++line_no;
    const auto line = familia::detail::trim(raw_line);
    if (!line.empty() && line.front() == '#') continue;

    familia::InferResult result;
    if (line.empty()) {
      result.theta.resize(model.config.K);
      const double alpha_sum = model.config.alpha_sum();
      for (std::int32_t k = 0; k < model.config.K; ++k) {
        result.theta[k] = model.config.alpha[k] / alpha_sum;
      }
      std::cerr << "warning: line " << line_no
                << ": empty document, returning the prior mean\n";
    } else {
      const familia::RawDocument raw =
          familia::parse_raw_document(line, line_no);
      result = familia::infer_theta(model, raw, iters,
                                    familia::mix_seed(seed, line_no), line_no);
      if (result.empty_after_filter) {
        std::cerr << "warning: line " << line_no
                  << ": no item matched the model vocabulary, returning the "
                     "prior mean\n";
      }
    }
    std::string out;
    for (const double t : result.theta) {
      if (!out.empty()) out += ' ';
      out += fixed6(t);
    }
    std::cout << out << "\n";
  }
  return 0;
}

// --------------------------------------------------------------------------
// score
// --------------------------------------------------------------------------

int run_score_pairwise(const std::string& mode, const std::string& a_path,
                       const std::string& b_path) {
  const auto a_lines = non_comment_lines(read_file(a_path));
  const auto b_lines = non_comment_lines(read_file(b_path));
  if (a_lines.size() != b_lines.size()) {
    throw familia::DimensionMismatch("score: --a and --b line counts differ");
  }
  for (std::size_t i = 0; i < a_lines.size(); ++i) {
    const auto p = parse_vector_line(a_lines[i], i + 1, "--a");
    const auto q = parse_vector_line(b_lines[i], i + 1, "--b");
    const double value =
        mode == "jsd" ? familia::jsd(p, q) : familia::hellinger(p, q);
    std::cout << fixed6(value) << "\n";
  }
  return 0;
}

int run_score_generative(const std::string& model_path,
                         const std::string& theta_path,
                         const std::string& query_path, std::int32_t factor_id,
                         bool log_scale) {
  const familia::ModelState model = familia::load_model(model_path);
  const auto theta_lines = non_comment_lines(read_file(theta_path));
  const auto query_lines = non_comment_lines(read_file(query_path));
  if (theta_lines.size() != query_lines.size()) {
    throw familia::DimensionMismatch(
        "score: --theta and --query line counts differ");
  }
  for (std::size_t i = 0; i < theta_lines.size(); ++i) {
    const auto theta = parse_vector_line(theta_lines[i], i + 1, "--theta");
    std::vector<std::string> tokens;
    for (const auto t : familia::detail::split_spaces(query_lines[i])) {
      tokens.emplace_back(t);
    }
    const familia::GenerativeScore s =
        familia::generative_score(tokens, theta, model, factor_id);
    std::cout << fixed6(log_scale ? s.log_score : s.score) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"familia: configurable topic-modeling engine"};
  app.require_subcommand(1);

  TrainFlags tf;
  CLI::App* train = app.add_subcommand("train", "train a model on a corpus");
  train->add_option("--corpus", tf.corpus, "corpus file")->required();
  train->add_option("--schema", tf.schema, "schema file")->required();
  train->add_option("--topics", tf.topics, "topic count K")->required();
  train->add_option("--schedule", tf.schedule,
                    "sampler plan: GS | MH<steps> | <a>MH-<b>GS | "
                    "GS-to-MH@<t> | MH-to-GS@<t>");
  train->add_option("--iters", tf.iters, "iteration count")->required();
  train->add_option("--alpha", tf.alpha, "document-topic prior (default 50/K)");
  train->add_option("--beta", tf.beta, "item-topic prior (default 0.01)");
  train->add_option("--workers", tf.workers, "parallel shard count");
  train->add_option("--seed", tf.seed, "random seed");
  train->add_option("--out", tf.out, "output directory")->required();
  train->add_option("--checkpoint-every", tf.checkpoint_every,
                    "checkpoint cadence in iterations (0 disables)");

  std::string model_path, input_path;
  std::int32_t top_n = 10, infer_iters = 100;
  std::uint64_t infer_seed = 42;
  CLI::App* topics = app.add_subcommand("topics", "print top tokens per topic");
  topics->add_option("--model", model_path, "model file")->required();
  topics->add_option("--top-n", top_n, "tokens per topic");

  CLI::App* infer = app.add_subcommand("infer", "infer theta for new documents");
  infer->add_option("--model", model_path, "model file")->required();
  infer->add_option("--input", input_path, "corpus-format document lines")
      ->required();
  infer->add_option("--iters", infer_iters, "sweeps per document");
  infer->add_option("--seed", infer_seed, "random seed");

  std::string mode, a_path, b_path, theta_path, query_path;
  std::int32_t factor_id = 0;
  bool log_scale = false;
  CLI::App* score = app.add_subcommand("score", "distances and matching scores");
  score->add_option("--mode", mode, "jsd | hellinger | generative")->required();
  score->add_option("--a", a_path, "left theta file (jsd/hellinger)");
  score->add_option("--b", b_path, "right theta file (jsd/hellinger)");
  score->add_option("--model", model_path, "model file (generative)");
  score->add_option("--theta", theta_path, "theta file (generative)");
  score->add_option("--query", query_path, "query token lines (generative)");
  score->add_option("--factor", factor_id, "discrete factor id (generative)");
  score->add_flag("--log", log_scale, "print log scores (generative)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (train->parsed()) return run_train(tf);
    if (topics->parsed()) {
      if (top_n < 0) throw familia::InvalidConfig("topics: --top-n must be >= 0");
      return run_topics(model_path, top_n);
    }
    if (infer->parsed()) return run_infer(model_path, input_path, infer_iters,
                                          infer_seed);
    if (score->parsed()) {
      if (mode == "jsd" || mode == "hellinger") {
        if (a_path.empty() || b_path.empty()) {
          throw familia::InvalidConfig("score: --a and --b are required");
        }
        return run_score_pairwise(mode, a_path, b_path);
      }
      if (mode == "generative") {
        if (model_path.empty() || theta_path.empty() || query_path.empty()) {
          throw familia::InvalidConfig(
              "score: --model, --theta and --query are required");
        }
        return run_score_generative(model_path, theta_path, query_path,
                                    factor_id, log_scale);
      }
      throw familia::InvalidConfig("score: unknown --mode '" + mode + "'");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
