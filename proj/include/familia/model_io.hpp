#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "familia/errors.hpp"
#include "familia/model.hpp"

namespace familia {

// Versioned line-oriented text dump of a model.  Always contains the config
// echo, vocabularies, count matrices, continuous params and the supervised
// parameters; document state (m, z) is only written for checkpoints, since a
// frozen model does not need it.  Doubles are printed with %.17g so a
// round-trip reproduces them bit-exactly.

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline const char* kind_name(FactorKind k) {
  switch (k) {
    case FactorKind::discrete: return "discrete";
    case FactorKind::continuous_gaussian: return "gaussian";
    default: return "beta";
  }
}

// Whitespace-token reader with corruption checks; every read failure becomes
// CorruptFile so callers see one error class for any truncation or garbage.
struct ModelReader {
  std::istream& in;

  std::string word() {
    std::string w;
    if (!(in >> w)) throw CorruptFile("model file: unexpected end of file");
    return w;
  }
  void expect(const std::string& keyword) {
    const std::string w = word();
    if (w != keyword) {
      throw CorruptFile("model file: expected '" + keyword + "', got '" + w + "'");
    }
  }
  std::int64_t integer() {
    const std::string w = word();
    const auto v = parse_int(w);
    if (!v) throw CorruptFile("model file: expected integer, got '" + w + "'");
    return *v;
  }
  double real() {
    const std::string w = word();
    const auto v = parse_double(w);
    if (!v) throw CorruptFile("model file: expected number, got '" + w + "'");
    return *v;
  }
  // A size field: non-negative and sane.
  std::size_t count() {
    const std::int64_t v = integer();
    if (v < 0 || v > (1LL << 31)) {
      throw CorruptFile("model file: implausible size " + std::to_string(v));
    }
    return static_cast<std::size_t>(v);
  }
};

}  // namespace detail

inline void save_model(const ModelState& state, std::ostream& out,
                       bool include_assignments = false) {
  const ModelConfig& c = state.config;
  out << "familia-model " << kModelFormatVersion << "\n";
  out << "topics " << c.K << "\n";
  out << "alpha";
  for (const double a : c.alpha) out << ' ' << detail::format_double(a);
  out << "\n";
  out << "supervised " << (c.supervised ? 1 : 0) << "\n";
  out << "factors " << c.schema.factor_count() << "\n";
  for (const FactorSpec& f : c.schema.factors) {
    out << "factor " << f.id << ' ' << detail::kind_name(f.kind);
    if (f.kind == FactorKind::discrete) {
      out << ' ' << detail::format_double(c.beta[c.schema.slot_of[f.id]]);
    }
    out << "\n";
  }
  for (std::size_t slot = 0; slot < state.vocab.size(); ++slot) {
    const Vocabulary& v = state.vocab[slot];
    out << "vocab " << slot << ' ' << v.size() << "\n";
    for (std::int32_t u = 0; u < v.size(); ++u) out << v.token(u) << "\n";
  }
  for (std::size_t slot = 0; slot < state.n.size(); ++slot) {
    const CountMatrix& n = state.n[slot];
    out << "counts " << slot << "\n";
    for (std::int32_t u = 0; u < n.rows(); ++u) {
      for (std::int32_t k = 0; k < n.cols(); ++k) {
        out << (k ? " " : "") << n.at(u, k);
      }
      out << "\n";
    }
  }
  for (std::size_t slot = 0; slot < state.psi.size(); ++slot) {
    const ContinuousFactorParams& p = state.psi[slot];
    out << "psi " << slot << ' ' << detail::kind_name(p.kind) << "\n";
    for (std::int32_t k = 0; k < c.K; ++k) {
      if (p.kind == FactorKind::continuous_gaussian) {
        out << detail::format_double(p.gaussian[k].mean) << ' '
            << detail::format_double(p.gaussian[k].var) << "\n";
      } else {
        out << detail::format_double(p.beta[k].a) << ' '
            << detail::format_double(p.beta[k].b) << "\n";
      }
    }
  }
  if (c.supervised) {
    out << "eta";
    for (const double e : state.supervised.eta) {
      out << ' ' << detail::format_double(e);
    }
    out << "\n";
    out << "sigma2 " << detail::format_double(state.supervised.sigma2) << "\n";
  }
  out << "assignments " << (include_assignments ? 1 : 0) << "\n";
  if (include_assignments) {
    out << "m " << state.m.size() << "\n";
    for (const auto& row : state.m) {
      for (std::size_t k = 0; k < row.size(); ++k) out << (k ? " " : "") << row[k];
      out << "\n";
    }
    out << "z " << state.z.size() << "\n";
    for (const auto& row : state.z) {
      out << row.size();
      for (const std::int32_t k : row) out << ' ' << k;
      out << "\n";
    }
  }
  out << "end\n";
}

inline void save_model(const ModelState& state, const std::string& path,
                       bool include_assignments = false) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open '" + path + "' for writing");
  save_model(state, out, include_assignments);
  out.flush();
  if (!out) throw IoFailure("write to '" + path + "' failed");
}

inline ModelState load_model(std::istream& in) {
  detail::ModelReader r{in};
  r.expect("familia-model");
  const std::int64_t version = r.integer();
  if (version != kModelFormatVersion) {
    throw VersionMismatch("model file: version " + std::to_string(version) +
                          " not supported (expected " +
                          std::to_string(kModelFormatVersion) + ")");
  }

  ModelState s;
  ModelConfig& c = s.config;
  r.expect("topics");
  c.K = static_cast<std::int32_t>(r.integer());
  if (c.K < 1) throw CorruptFile("model file: non-positive topic count");
  r.expect("alpha");
  c.alpha.resize(c.K);
  for (double& a : c.alpha) a = r.real();
  r.expect("supervised");
  c.supervised = r.integer() != 0;
  r.expect("factors");
  const auto factor_count = static_cast<std::int32_t>(r.integer());
  if (factor_count < 1) throw CorruptFile("model file: no factors");

  std::vector<FactorSpec> specs;
  std::vector<double> betas;
  for (std::int32_t i = 0; i < factor_count; ++i) {
    r.expect("factor");
    const auto id = static_cast<std::int32_t>(r.integer());
    const std::string kind = r.word();
    if (kind == "discrete") {
      specs.push_back({id, FactorKind::discrete});
      betas.push_back(r.real());
    } else if (kind == "gaussian") {
      specs.push_back({id, FactorKind::continuous_gaussian});
    } else if (kind == "beta") {
      specs.push_back({id, FactorKind::continuous_beta});
    } else {
      throw CorruptFile("model file: unknown factor kind '" + kind + "'");
    }
  }
  c.schema = Schema::make(std::move(specs), c.supervised);
  c.beta = std::move(betas);
  c.validate();

  s.vocab.resize(c.schema.discrete_count);
  for (std::int32_t slot = 0; slot < c.schema.discrete_count; ++slot) {
    r.expect("vocab");
    if (r.integer() != slot) throw CorruptFile("model file: vocab out of order");
    const auto size = static_cast<std::int32_t>(r.count());
    for (std::int32_t u = 0; u < size; ++u) s.vocab[slot].add_or_get(r.word());
    if (s.vocab[slot].size() != size) {
      throw CorruptFile("model file: duplicate token in vocabulary");
    }
  }
  for (std::int32_t slot = 0; slot < c.schema.discrete_count; ++slot) {
    r.expect("counts");
    if (r.integer() != slot) throw CorruptFile("model file: counts out of order");
    CountMatrix n(s.vocab[slot].size(), c.K);
    for (std::int32_t u = 0; u < n.rows(); ++u) {
      for (std::int32_t k = 0; k < c.K; ++k) {
        n.add(u, k, static_cast<std::int32_t>(r.integer()));
      }
    }
    s.n.push_back(std::move(n));
  }
  for (std::int32_t slot = 0; slot < c.schema.continuous_count; ++slot) {
    r.expect("psi");
    if (r.integer() != slot) throw CorruptFile("model file: psi out of order");
    const std::string kind = r.word();
    ContinuousFactorParams p;
    if (kind == "gaussian") {
      p.kind = FactorKind::continuous_gaussian;
      p.gaussian.resize(c.K);
      for (auto& g : p.gaussian) {
        g.mean = r.real();
        g.var = r.real();
      }
    } else if (kind == "beta") {
      p.kind = FactorKind::continuous_beta;
      p.beta.resize(c.K);
      for (auto& b : p.beta) {
        b.a = r.real();
        b.b = r.real();
      }
    } else {
      throw CorruptFile("model file: unknown psi kind '" + kind + "'");
    }
    s.psi.push_back(std::move(p));
  }
  if (c.supervised) {
    r.expect("eta");
    s.supervised.eta.resize(c.K);
    for (double& e : s.supervised.eta) e = r.real();
    r.expect("sigma2");
    s.supervised.sigma2 = r.real();
  }
  r.expect("assignments");
  if (r.integer() != 0) {
    r.expect("m");
    s.m.resize(r.count());
    for (auto& row : s.m) {
      row.resize(c.K);
      for (auto& v : row) v = static_cast<std::int32_t>(r.integer());
    }
    r.expect("z");
    s.z.resize(r.count());
    if (s.z.size() != s.m.size()) {
      throw CorruptFile("model file: m/z document counts disagree");
    }
    for (auto& row : s.z) {
      row.resize(r.count());
      for (auto& v : row) {
        v = static_cast<std::int32_t>(r.integer());
        if (v < 0 || v >= c.K) throw CorruptFile("model file: topic out of range");
      }
    }
  }
  r.expect("end");
  return s;
}

inline ModelState load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open '" + path + "' for reading");
  return load_model(in);
}

}  // namespace familia
