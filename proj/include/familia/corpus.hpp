#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "familia/errors.hpp"

namespace familia {

// ---------------------------------------------------------------------------
// Schema: which factors exist and what kind of items they carry.
// ---------------------------------------------------------------------------

enum class FactorKind { discrete, continuous_gaussian, continuous_beta };

inline bool is_continuous(FactorKind k) { return k != FactorKind::discrete; }

struct FactorSpec {
  std::int32_t id = 0;
  FactorKind kind = FactorKind::discrete;
  bool operator==(const FactorSpec&) const = default;
};

// Ordered factor list plus the supervised flag from the schema file.  Factor
// ids are dense 0..F-1; each factor also gets a "slot" index within its kind
// so that token lists (discrete slots) and value lists (continuous slots)
// can live in compact parallel arrays.
struct Schema {
  std::vector<FactorSpec> factors;
  bool supervised = false;

  // Derived indexing, filled by finalize().
  std::vector<std::int32_t> slot_of;  // factor id -> slot within its kind
  std::int32_t discrete_count = 0;
  std::int32_t continuous_count = 0;

  static Schema make(std::vector<FactorSpec> specs, bool supervised_flag) {
    Schema s;
    s.factors = std::move(specs);
    s.supervised = supervised_flag;
    s.finalize();
    return s;
  }

  // Convenience for tests and generators: kinds in order become ids 0..F-1.
  static Schema make(const std::vector<FactorKind>& kinds,
                     bool supervised_flag = false) {
    std::vector<FactorSpec> specs;
    specs.reserve(kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      specs.push_back({static_cast<std::int32_t>(i), kinds[i]});
    }
    return make(std::move(specs), supervised_flag);
  }

  void finalize() {
    std::sort(factors.begin(), factors.end(),
              [](const FactorSpec& a, const FactorSpec& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < factors.size(); ++i) {
      if (i > 0 && factors[i].id == factors[i - 1].id) {
        throw DuplicateFactorId("schema: factor id " +
                                std::to_string(factors[i].id) + " declared twice");
      }
      if (factors[i].id != static_cast<std::int32_t>(i)) {
        throw NonDenseFactorId("schema: factor ids must be dense 0..F-1, got " +
                               std::to_string(factors[i].id) + " at position " +
                               std::to_string(i));
      }
    }
    slot_of.assign(factors.size(), 0);
    discrete_count = 0;
    continuous_count = 0;
    for (const FactorSpec& f : factors) {
      slot_of[f.id] = is_continuous(f.kind) ? continuous_count++ : discrete_count++;
    }
    if (discrete_count == 0) {
      throw NoDiscreteFactor("schema: at least one discrete factor is required");
    }
  }

  std::int32_t factor_count() const {
    return static_cast<std::int32_t>(factors.size());
  }
  FactorKind kind_of(std::int32_t factor_id) const { return factors[factor_id].kind; }

  bool operator==(const Schema& o) const {
    return factors == o.factors && supervised == o.supervised;
  }
};

// ---------------------------------------------------------------------------
// Vocabulary: token <-> dense id, per discrete factor, first-appearance order.
// ---------------------------------------------------------------------------

class Vocabulary {
 public:
  std::int32_t add_or_get(const std::string& token) {
    auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    const auto id = static_cast<std::int32_t>(tokens_.size());
    tokens_.push_back(token);
    index_.emplace(token, id);
    return id;
  }

  std::optional<std::int32_t> find(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& token(std::int32_t id) const { return tokens_[id]; }
  std::int32_t size() const { return static_cast<std::int32_t>(tokens_.size()); }

  bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

// ---------------------------------------------------------------------------
// Documents.
// ---------------------------------------------------------------------------

// A blob is the unit whose items all share one topic.  Items are stored per
// schema slot: token ids for discrete factors, real values for continuous
// ones.  token_counts caches the distinct (token, multiplicity) pairs used by
// the samplers; it is derived data and excluded from equality.
struct Blob {
  std::vector<std::vector<std::int32_t>> tokens;  // [discrete slot] -> ids
  std::vector<std::vector<double>> values;        // [continuous slot] -> values
  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> token_counts;

  std::int32_t item_count() const {
    std::size_t n = 0;
    for (const auto& t : tokens) n += t.size();
    for (const auto& v : values) n += v.size();
    return static_cast<std::int32_t>(n);
  }

  void finalize() {
    token_counts.assign(tokens.size(), {});
    for (std::size_t slot = 0; slot < tokens.size(); ++slot) {
      auto& counts = token_counts[slot];
      for (const std::int32_t id : tokens[slot]) {
        auto it = std::find_if(counts.begin(), counts.end(),
                               [id](const auto& p) { return p.first == id; });
        if (it == counts.end()) {
          counts.emplace_back(id, 1);
        } else {
          ++it->second;
        }
      }
    }
  }

  bool operator==(const Blob& o) const {
    return tokens == o.tokens && values == o.values;
  }
};

struct Document {
  std::vector<Blob> blobs;
  std::optional<double> y;  // supervised signal

  std::int32_t blob_count() const { return static_cast<std::int32_t>(blobs.size()); }
  bool operator==(const Document&) const = default;
};

struct Corpus {
  Schema schema;
  std::vector<Vocabulary> vocab;  // [discrete slot]
  std::vector<Document> docs;

  std::int32_t doc_count() const { return static_cast<std::int32_t>(docs.size()); }
  std::int32_t vocab_size(std::int32_t discrete_slot) const {
    return vocab[discrete_slot].size();
  }

  bool operator==(const Corpus& o) const {
    return schema == o.schema && vocab == o.vocab && docs == o.docs;
  }
};

// ---------------------------------------------------------------------------
// Parsing helpers.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string_view> split_on(std::string_view text,
                                              std::string_view sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = text.find(sep, pos);
    if (hit == std::string_view::npos) {
      parts.push_back(text.substr(pos));
      return parts;
    }
    parts.push_back(text.substr(pos, hit - pos));
    pos = hit + sep.size();
  }
}

inline std::vector<std::string_view> split_spaces(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) parts.push_back(text.substr(i, j - i));
    i = j;
  }
  return parts;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [end, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || end != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t value = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || end != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Grammar-level view of one document line, before schema validation or vocab
// lookup.  Shared by the corpus parser (which builds vocabularies) and the
// inference front end (which maps through a frozen vocabulary).
struct RawDocument {
  struct FactorGroup {
    std::int64_t factor_id = 0;
    std::vector<std::string> items;
  };
  struct RawBlob {
    std::vector<FactorGroup> groups;
  };
  std::optional<double> y;
  std::vector<RawBlob> blobs;
};

// Split one line into y-prefix, blobs (" | "), factor groups (" ; "), and
// "<factor_id>:item item ..." groups.  Throws MalformedLine for anything that
// does not fit the grammar; schema-level checks happen later.
inline RawDocument parse_raw_document(std::string_view line, std::size_t line_no) {
  const auto fail = [line_no](const std::string& why) -> MalformedLine {
    return MalformedLine("line " + std::to_string(line_no) + ": " + why);
  };

  RawDocument doc;
  if (line.substr(0, 2) == "y=") {
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw fail("supervised prefix is not followed by a TAB");
    }
    const auto y = detail::parse_double(line.substr(2, tab - 2));
    if (!y) throw fail("supervised signal is not a finite number");
    doc.y = *y;
    line = line.substr(tab + 1);
  }

  for (std::string_view blob_text : detail::split_on(line, " | ")) {
    blob_text = detail::trim(blob_text);
    if (blob_text.empty()) throw fail("empty blob");
    RawDocument::RawBlob blob;
    for (std::string_view group_text : detail::split_on(blob_text, " ; ")) {
      group_text = detail::trim(group_text);
      const std::size_t colon = group_text.find(':');
      if (colon == std::string_view::npos) {
        throw fail("factor group lacks a '<factor_id>:' prefix");
      }
      const auto id = detail::parse_int(group_text.substr(0, colon));
      if (!id || *id < 0) throw fail("factor id is not a non-negative integer");
      RawDocument::FactorGroup group;
      group.factor_id = *id;
      for (const std::string_view item :
           detail::split_spaces(group_text.substr(colon + 1))) {
        group.items.emplace_back(item);
      }
      if (group.items.empty()) throw fail("factor group has no items");
      blob.groups.push_back(std::move(group));
    }
    doc.blobs.push_back(std::move(blob));
  }
  if (doc.blobs.empty()) throw fail("document has no blobs");
  return doc;
}

// Beta-distributed items live in the open interval; densities diverge at the
// endpoints, so observed values are pinned just inside.
inline constexpr double kBetaValueFloor = 1e-3;

inline double clamp_beta_value(double v) {
  return std::min(1.0 - kBetaValueFloor, std::max(kBetaValueFloor, v));
}

namespace detail {

// Turn a raw blob into an indexed Blob.  `lookup` resolves a token to an id
// or nullopt (nullopt = drop, used by inference; the corpus parser always
// resolves).  Returns the number of dropped tokens.
template <typename Lookup>
std::int32_t convert_blob(const RawDocument::RawBlob& raw, const Schema& schema,
                          std::size_t line_no, Lookup&& lookup, Blob& out) {
  out.tokens.assign(schema.discrete_count, {});
  out.values.assign(schema.continuous_count, {});
  std::int32_t dropped = 0;
  for (const auto& group : raw.groups) {
    if (group.factor_id >= schema.factor_count()) {
      throw UnknownFactorId("line " + std::to_string(line_no) +
                            ": factor id " + std::to_string(group.factor_id) +
                            " is not in the schema");
    }
    const auto fid = static_cast<std::int32_t>(group.factor_id);
    const FactorKind kind = schema.kind_of(fid);
    const std::int32_t slot = schema.slot_of[fid];
    for (const std::string& item : group.items) {
      if (kind == FactorKind::discrete) {
        if (const auto id = lookup(slot, item)) {
          out.tokens[slot].push_back(*id);
        } else {
          ++dropped;
        }
        continue;
      }
      const auto value = parse_double(item);
      if (!value) {
        throw NonNumericContinuousItem("line " + std::to_string(line_no) +
                                       ": continuous item '" + item +
                                       "' is not a finite number");
      }
      out.values[slot].push_back(kind == FactorKind::continuous_beta
                                     ? clamp_beta_value(*value)
                                     : *value);
    }
  }
  out.finalize();
  return dropped;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Schema file: `factor <id> discrete` | `factor <id> continuous gaussian` |
// `factor <id> continuous beta`; optional `supervised true`.
// ---------------------------------------------------------------------------

inline Schema parse_schema(std::string_view text) {
  std::vector<FactorSpec> specs;
  bool supervised = false;
  std::size_t line_no = 0;
  for (std::string_view line : detail::split_on(text, "\n")) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto words = detail::split_spaces(line);
    if (words.size() == 2 && words[0] == "supervised" && words[1] == "true") {
      supervised = true;
      continue;
    }
    if (words.size() >= 3 && words[0] == "factor") {
      const auto id = detail::parse_int(words[1]);
      if (!id || *id < 0) {
        throw MalformedLine("schema line " + std::to_string(line_no) +
                            ": bad factor id");
      }
      FactorKind kind;
      if (words.size() == 3 && words[2] == "discrete") {
        kind = FactorKind::discrete;
      } else if (words.size() == 4 && words[2] == "continuous" &&
                 words[3] == "gaussian") {
        kind = FactorKind::continuous_gaussian;
      } else if (words.size() == 4 && words[2] == "continuous" &&
                 words[3] == "beta") {
        kind = FactorKind::continuous_beta;
      } else {
        throw UnknownFactorKind("schema line " + std::to_string(line_no) +
                                ": unknown factor kind");
      }
      specs.push_back({static_cast<std::int32_t>(*id), kind});
      continue;
    }
    throw MalformedLine("schema line " + std::to_string(line_no) +
                        ": unrecognized directive");
  }
  return Schema::make(std::move(specs), supervised);
}

// ---------------------------------------------------------------------------
// Corpus file: one document per line, `#` comments, blank lines skipped.
// ---------------------------------------------------------------------------

inline Corpus parse_corpus(std::string_view text, const Schema& schema) {
  Corpus corpus;
  corpus.schema = schema;
  corpus.vocab.resize(schema.discrete_count);

  const auto add_token = [&corpus](std::int32_t slot, const std::string& token) {
    return std::optional<std::int32_t>(corpus.vocab[slot].add_or_get(token));
  };

  std::size_t line_no = 0;
  for (std::string_view line : detail::split_on(text, "\n")) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;

    const RawDocument raw = parse_raw_document(line, line_no);
    if (schema.supervised && !raw.y) {
      throw MissingSupervisedSignal("line " + std::to_string(line_no) +
                                    ": schema is supervised but the line has "
                                    "no y= prefix");
    }
    if (!schema.supervised && raw.y) {
      throw UnexpectedSupervisedSignal("line " + std::to_string(line_no) +
                                       ": y= prefix present but the schema is "
                                       "not supervised");
    }

    Document doc;
    doc.y = raw.y;
    doc.blobs.resize(raw.blobs.size());
    for (std::size_t b = 0; b < raw.blobs.size(); ++b) {
      detail::convert_blob(raw.blobs[b], schema, line_no, add_token, doc.blobs[b]);
      if (doc.blobs[b].item_count() == 0) {
        throw MalformedLine("line " + std::to_string(line_no) +
                            ": blob has no items");
      }
    }
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Serialization back to the line format (round-trip partner of parse_corpus).
// ---------------------------------------------------------------------------

inline std::string format_document(const Document& doc, const Corpus& corpus) {
  const Schema& schema = corpus.schema;
  std::string out;
  if (doc.y) {
    out += "y=";
    out += detail::format_double(*doc.y);
    out += '\t';
  }
  for (std::size_t b = 0; b < doc.blobs.size(); ++b) {
    if (b > 0) out += " | ";
    const Blob& blob = doc.blobs[b];
    bool first_group = true;
    for (const FactorSpec& f : schema.factors) {
      const std::int32_t slot = schema.slot_of[f.id];
      std::string items;
      if (f.kind == FactorKind::discrete) {
        for (const std::int32_t id : blob.tokens[slot]) {
          if (!items.empty()) items += ' ';
          items += corpus.vocab[slot].token(id);
        }
      } else {
        for (const double v : blob.values[slot]) {
          if (!items.empty()) items += ' ';
          items += detail::format_double(v);
        }
      }
      if (items.empty()) continue;
      if (!first_group) out += " ; ";
      first_group = false;
      out += std::to_string(f.id);
      out += ':';
      out += items;
    }
  }
  return out;
}

inline std::string format_corpus(const Corpus& corpus) {
  std::string out;
  for (const Document& doc : corpus.docs) {
    out += format_document(doc, corpus);
    out += '\n';
  }
  return out;
}

}  // namespace familia
