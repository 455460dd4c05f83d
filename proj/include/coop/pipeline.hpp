/*
 * Copyright 2026 The COOP Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Batch pipeline behind the `coop` command line tool: entity ingestion,
// method-spec parsing, run configuration, and the summarize / diagnose /
// rank-eval runs. Each run returns its output files as strings; writing them
// is left to the caller.
//
// Outputs depend only on the resolved RunConfig minus the worker count and the
// output directory, neither of which is serialized.

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coop/autoencoder.hpp"
#include "coop/coopsearch.hpp"
#include "coop/diagnostics.hpp"
#include "coop/error.hpp"
#include "coop/latentspace.hpp"
#include "coop/parallel.hpp"
#include "coop/textmetrics.hpp"

namespace coop {

using json = nlohmann::json;

struct EntityBatch {
  std::string entity_id;
  std::vector<std::string> reviews;
  std::vector<std::string> gold_summaries;
};

namespace detail {

[[noreturn]] inline void parse_fail(std::size_t line_no, const std::string& what) {
  throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": " + what);
}

inline std::vector<std::string> string_array(const json& j, const char* field, std::size_t line_no) {
  if (!j.is_array()) parse_fail(line_no, std::string("'") + field + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) parse_fail(line_no, std::string("'") + field + "' must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace detail

// One entity per line: {"entity_id", "reviews": [...], "summary": "..." or
// "summaries": [...]}. Blank lines are skipped.
inline std::vector<EntityBatch> parse_entities(std::istream& in) {
  std::vector<EntityBatch> out;
  std::set<std::string> ids;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      detail::parse_fail(line_no, e.what());
    }
    if (!j.is_object()) detail::parse_fail(line_no, "expected a JSON object");
    if (!j.contains("entity_id") || !j["entity_id"].is_string()) {
      detail::parse_fail(line_no, "missing string field 'entity_id'");
    }
    if (!j.contains("reviews")) detail::parse_fail(line_no, "missing field 'reviews'");
    EntityBatch b;
    b.entity_id = j["entity_id"].get<std::string>();
    b.reviews = detail::string_array(j["reviews"], "reviews", line_no);
    if (b.reviews.empty()) detail::parse_fail(line_no, "entity '" + b.entity_id + "' has no reviews");
    if (j.contains("summaries") && !j["summaries"].is_null()) {
      b.gold_summaries = detail::string_array(j["summaries"], "summaries", line_no);
    }
    if (j.contains("summary") && !j["summary"].is_null()) {
      if (!j["summary"].is_string()) detail::parse_fail(line_no, "'summary' must be a string");
      b.gold_summaries.push_back(j["summary"].get<std::string>());
    }
    if (!ids.insert(b.entity_id).second) {
      detail::parse_fail(line_no, "duplicate entity_id '" + b.entity_id + "'");
    }
    out.push_back(std::move(b));
  }
  return out;
}

inline std::vector<EntityBatch> ingest_entities(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open entities file " + path);
  return parse_entities(in);
}

inline void write_entities(std::ostream& out, const std::vector<EntityBatch>& batches) {
  for (const auto& b : batches) {
    json j = {{"entity_id", b.entity_id}, {"reviews", b.reviews}};
    if (!b.gold_summaries.empty()) j["summaries"] = b.gold_summaries;
    out << j.dump() << '\n';
  }
}

// simpleavg | coop-exact | coop-greedy:{forward|backward}
// | coop-beam:{forward|backward}:K | ivw | rescale:ALPHA | extractive:K
// | random:SEED | oracle
struct MethodSpec {
  enum class Kind { kSimpleAvg, kCoopExact, kCoopGreedy, kCoopBeam, kIvw, kRescale, kExtractive, kRandom, kOracle };

  Kind kind = Kind::kSimpleAvg;
  SearchDirection direction = SearchDirection::kForward;
  std::size_t beam_size = 1;
  double alpha = 1.0;
  std::size_t k = 4;
  std::uint64_t seed = 0;

  bool selects_subset() const { return kind != Kind::kIvw && kind != Kind::kRescale; }

  std::string to_string() const {
    auto dir = [&] { return direction == SearchDirection::kForward ? "forward" : "backward"; };
    switch (kind) {
      case Kind::kSimpleAvg: return "simpleavg";
      case Kind::kCoopExact: return "coop-exact";
      case Kind::kCoopGreedy: return std::string("coop-greedy:") + dir();
      case Kind::kCoopBeam: return std::string("coop-beam:") + dir() + ":" + std::to_string(beam_size);
      case Kind::kIvw: return "ivw";
      case Kind::kRescale: {
        std::ostringstream os;
        os << "rescale:" << alpha;
        return os.str();
      }
      case Kind::kExtractive: return "extractive:" + std::to_string(k);
      case Kind::kRandom: return "random:" + std::to_string(seed);
      case Kind::kOracle: return "oracle";
    }
    return "?";
  }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

inline std::uint64_t parse_uint(const std::string& s, const std::string& spec) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used == s.size() && !s.empty() && s.front() != '-') return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::kInvalidArgument, "bad integer '" + s + "' in method spec '" + spec + "'");
}

inline SearchDirection parse_direction(const std::string& s, const std::string& spec) {
  if (s == "forward") return SearchDirection::kForward;
  if (s == "backward") return SearchDirection::kBackward;
  throw Error(ErrorKind::kInvalidArgument,
              "direction must be forward or backward in method spec '" + spec + "'");
}

}  // namespace detail

inline MethodSpec parse_method(const std::string& spec) {
  using Kind = MethodSpec::Kind;
  const auto parts = detail::split(spec, ':');
  auto expect = [&](std::size_t n) {
    if (parts.size() != n) throw Error(ErrorKind::kInvalidArgument, "malformed method spec '" + spec + "'");
  };
  MethodSpec m;
  const std::string head = parts.empty() ? "" : parts[0];
  if (head == "simpleavg") {
    expect(1);
    m.kind = Kind::kSimpleAvg;
  } else if (head == "coop-exact") {
    expect(1);
    m.kind = Kind::kCoopExact;
  } else if (head == "coop-greedy") {
    expect(2);
    m.kind = Kind::kCoopGreedy;
    m.direction = detail::parse_direction(parts[1], spec);
  } else if (head == "coop-beam") {
    expect(3);
    m.kind = Kind::kCoopBeam;
    m.direction = detail::parse_direction(parts[1], spec);
    m.beam_size = detail::parse_uint(parts[2], spec);
    if (m.beam_size == 0) throw Error(ErrorKind::kInvalidArgument, "beam size must be >= 1");
  } else if (head == "ivw") {
    expect(1);
    m.kind = Kind::kIvw;
  } else if (head == "rescale") {
    expect(2);
    m.kind = Kind::kRescale;
    try {
      std::size_t used = 0;
      m.alpha = std::stod(parts[1], &used);
      if (used != parts[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::kInvalidArgument, "bad alpha in method spec '" + spec + "'");
    }
    if (!(m.alpha > 0.0)) throw Error(ErrorKind::kInvalidArgument, "rescale alpha must be positive");
  } else if (head == "extractive") {
    expect(2);
    m.kind = Kind::kExtractive;
    m.k = detail::parse_uint(parts[1], spec);
    if (m.k == 0) throw Error(ErrorKind::kInvalidArgument, "extractive k must be >= 1");
  } else if (head == "random") {
    expect(2);
    m.kind = Kind::kRandom;
    m.seed = detail::parse_uint(parts[1], spec);
  } else if (head == "oracle") {
    expect(1);
    m.kind = Kind::kOracle;
  } else {
    throw Error(ErrorKind::kInvalidArgument, "unknown method '" + spec + "'");
  }
  return m;
}

inline OverlapMetric parse_overlap(const std::string& s) {
  if (s == "rouge1") return OverlapMetric::kRouge1;
  if (s == "rouge2") return OverlapMetric::kRouge2;
  if (s == "rougeL") return OverlapMetric::kRougeL;
  throw Error(ErrorKind::kInvalidArgument, "overlap must be rouge1, rouge2 or rougeL, got '" + s + "'");
}

inline std::string overlap_name(OverlapMetric m) {
  switch (m) {
    case OverlapMetric::kRouge1: return "rouge1";
    case OverlapMetric::kRouge2: return "rouge2";
    case OverlapMetric::kRougeL: return "rougeL";
  }
  return "?";
}

inline RefMode parse_ref_mode(const std::string& s) {
  if (s == "average") return RefMode::kAverage;
  if (s == "max") return RefMode::kMax;
  if (s == "concat") return RefMode::kConcat;
  throw Error(ErrorKind::kInvalidArgument, "ref-mode must be average, max or concat, got '" + s + "'");
}

inline std::string ref_mode_name(RefMode m) {
  switch (m) {
    case RefMode::kAverage: return "average";
    case RefMode::kMax: return "max";
    case RefMode::kConcat: return "concat";
  }
  return "?";
}

struct RunConfig {
  std::string input;
  std::string method = "coop-exact";
  std::vector<std::string> methods;  // rank-eval; empty means random:SEED,simpleavg,coop-exact
  std::string overlap = "rouge1";
  std::string ref_mode = "average";
  std::string latents;               // empty: toy-encode the reviews
  std::string toy_vocab;             // empty: vocabulary of the input reviews
  std::size_t toy_dim = 64;
  double kappa = 2.0;
  std::size_t max_len = 40;
  bool block_pronouns = true;
  std::size_t max_exact_n = kDefaultMaxExactN;
  std::size_t max_n = 0;  // diagnose; 0 means the smallest entity size
  std::uint64_t seed = 0;
  bool timing = false;
  // Not serialized: neither may change an output byte.
  std::size_t workers = 1;
  std::string out;

  Objective objective() const { return {parse_overlap(overlap), parse_ref_mode(ref_mode)}; }

  void validate() const {
    if (input.empty()) throw Error(ErrorKind::kInvalidArgument, "no input file given");
    parse_method(method);
    for (const auto& m : methods) parse_method(m);
    objective();
    if (toy_dim == 0) throw Error(ErrorKind::kInvalidArgument, "toy-dim must be >= 1");
    if (!(kappa > 0.0)) throw Error(ErrorKind::kInvalidArgument, "kappa must be positive");
    if (max_exact_n == 0 || max_exact_n > kMaxMaskBits) {
      throw Error(ErrorKind::kInvalidArgument, "max-exact-n must be in [1, 63]");
    }
    if (workers == 0) throw Error(ErrorKind::kInvalidArgument, "workers must be >= 1");
  }

  json to_json() const {
    return {{"input", input},
            {"method", method},
            {"methods", methods},
            {"overlap", overlap},
            {"ref_mode", ref_mode},
            {"latents", latents},
            {"toy_vocab", toy_vocab},
            {"toy_dim", toy_dim},
            {"kappa", kappa},
            {"max_len", max_len},
            {"block_pronouns", block_pronouns},
            {"max_exact_n", max_exact_n},
            {"max_n", max_n},
            {"seed", seed},
            {"timing", timing}};
  }

  // Accepts a bare config object or any output file object carrying
  // "run_config". Missing keys keep their defaults.
  static RunConfig from_json(const json& j) {
    const json& c = j.contains("run_config") ? j["run_config"] : j;
    RunConfig cfg;
    try {
      cfg.input = c.value("input", cfg.input);
      cfg.method = c.value("method", cfg.method);
      cfg.methods = c.value("methods", cfg.methods);
      cfg.overlap = c.value("overlap", cfg.overlap);
      cfg.ref_mode = c.value("ref_mode", cfg.ref_mode);
      cfg.latents = c.value("latents", cfg.latents);
      cfg.toy_vocab = c.value("toy_vocab", cfg.toy_vocab);
      cfg.toy_dim = c.value("toy_dim", cfg.toy_dim);
      cfg.kappa = c.value("kappa", cfg.kappa);
      cfg.max_len = c.value("max_len", cfg.max_len);
      cfg.block_pronouns = c.value("block_pronouns", cfg.block_pronouns);
      cfg.max_exact_n = c.value("max_exact_n", cfg.max_exact_n);
      cfg.max_n = c.value("max_n", cfg.max_n);
      cfg.seed = c.value("seed", cfg.seed);
      cfg.timing = c.value("timing", cfg.timing);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParse, std::string("bad run config: ") + e.what());
    }
    return cfg;
  }
};

// Tokenized, encoded entities plus the decoder that goes with them.
struct PreparedRun {
  std::vector<EntityData> entities;
  std::optional<ToyAutoencoder> model;
};

namespace detail {

inline std::vector<std::string> read_vocab_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open vocabulary file " + path);
  std::vector<TokenSeq> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(tokenize(line));
  return build_vocab(lines);
}

}  // namespace detail

inline PreparedRun prepare_run(const RunConfig& cfg) {
  cfg.validate();
  const auto batches = ingest_entities(cfg.input);
  PreparedRun run;
  for (const auto& b : batches) {
    EntityData e;
    e.id = b.entity_id;
    for (const auto& r : b.reviews) e.reviews.push_back(tokenize(r));
    for (const auto& g : b.gold_summaries) e.gold.push_back(tokenize(g));
    run.entities.push_back(std::move(e));
  }

  std::vector<std::string> vocab;
  if (!cfg.toy_vocab.empty()) {
    vocab = detail::read_vocab_file(cfg.toy_vocab);
  } else {
    std::vector<TokenSeq> all;
    for (const auto& e : run.entities) all.insert(all.end(), e.reviews.begin(), e.reviews.end());
    vocab = build_vocab(all);
  }
  if (vocab.empty()) vocab.push_back("<empty>");

  ToyConfig toy;
  toy.kappa = cfg.kappa;
  toy.max_len = cfg.max_len;
  toy.seed = cfg.seed;
  toy.block_pronouns = cfg.block_pronouns;

  if (cfg.latents.empty()) {
    run.model.emplace(vocab, cfg.toy_dim, toy);
    for (auto& e : run.entities) {
      for (const auto& r : e.reviews) e.latents.push_back(run.model->encode(r));
    }
  } else {
    auto external = load_external_latents(cfg.latents);
    std::size_t dim = 0;
    for (auto& e : run.entities) {
      auto it = external.find(e.id);
      if (it == external.end()) {
        throw Error(ErrorKind::kMissingData, "entity '" + e.id + "' is missing from " + cfg.latents);
      }
      if (it->second.size() != e.reviews.size()) {
        throw Error(ErrorKind::kDimensionMismatch,
                    "entity '" + e.id + "' has " + std::to_string(e.reviews.size()) + " reviews but " +
                        std::to_string(it->second.size()) + " latent vectors");
      }
      e.latents = std::move(it->second);
      dim = e.latents.front().dim();
    }
    // The toy decoder adopts the dimension of the supplied latents.
    run.model.emplace(vocab, dim == 0 ? cfg.toy_dim : dim, toy);
  }
  return run;
}

namespace detail {

inline std::mt19937_64 entity_rng(std::uint64_t seed, std::size_t entity_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(entity_index)};
  return std::mt19937_64(seq);
}

inline json indices_json(const std::optional<SubsetSelection>& s) {
  return s ? json(s->indices()) : json(nullptr);
}

}  // namespace detail

// Runs one method on one entity.
template <Decoder D>
SearchResult run_method(const MethodSpec& m, const EntityData& e, std::size_t entity_index,
                        const D& dec, const Objective& obj, std::size_t max_exact_n) {
  using Kind = MethodSpec::Kind;
  switch (m.kind) {
    case Kind::kSimpleAvg: return select_simpleavg(e.reviews, e.latents, dec, obj);
    case Kind::kCoopExact: return search_exact(e.reviews, e.latents, dec, obj, max_exact_n);
    case Kind::kCoopGreedy: return search_beam(e.reviews, e.latents, dec, obj, m.direction, 1);
    case Kind::kCoopBeam: return search_beam(e.reviews, e.latents, dec, obj, m.direction, m.beam_size);
    case Kind::kIvw: return select_ivw(e.reviews, e.latents, dec, obj);
    case Kind::kRescale: return select_rescale(e.reviews, e.latents, m.alpha, dec, obj);
    case Kind::kExtractive: {
      if (m.k > e.latents.size()) {
        throw Error(ErrorKind::kInvalidArgument,
                    "entity '" + e.id + "': extractive k=" + std::to_string(m.k) + " exceeds " +
                        std::to_string(e.latents.size()) + " reviews");
      }
      return summarize_selection(e.reviews, e.latents, select_extractive(e.latents, m.k), dec, obj);
    }
    case Kind::kRandom: {
      auto rng = detail::entity_rng(m.seed, entity_index);
      return summarize_selection(e.reviews, e.latents, select_random(e.latents.size(), rng), dec, obj);
    }
    case Kind::kOracle: {
      if (e.gold.empty()) {
        throw Error(ErrorKind::kMissingData, "oracle needs gold summaries for entity '" + e.id + "'");
      }
      // Best subset against gold, reported with its input-overlap objective.
      const auto best = search_exact(e.gold, e.latents, dec, Objective{}, max_exact_n);
      auto r = summarize_selection(e.reviews, e.latents, *best.selection, dec, obj);
      r.candidates_evaluated = best.candidates_evaluated;
      return r;
    }
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown method");
}

struct SummarizeOutput {
  std::string summaries_jsonl;
  std::string metrics_json;
};

inline SummarizeOutput run_summarize(const RunConfig& cfg) {
  const auto run = prepare_run(cfg);
  const auto method = parse_method(cfg.method);
  const auto obj = cfg.objective();
  const auto& dec = *run.model;
  const auto& entities = run.entities;

  std::vector<json> records(entities.size());
  std::vector<SearchResult> results(entities.size());
  parallel_for(entities.size(), cfg.workers, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    results[i] = run_method(method, entities[i], i, dec, obj, cfg.max_exact_n);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    const auto& r = results[i];
    json rec = {{"entity_id", entities[i].id},
                {"method", method.to_string()},
                {"selection", detail::indices_json(r.selection)},
                {"weights", r.weights ? json(r.weights->weights()) : json(nullptr)},
                {"objective", r.objective_value},
                {"candidates_evaluated", r.candidates_evaluated},
                {"summary_norm", l2_norm(r.summary_vector)},
                {"summary", join_tokens(r.summary)}};
    if (!entities[i].gold.empty()) {
      rec["rouge"] = {{"rouge1", rouge_n(r.summary, entities[i].gold, 1).f1},
                      {"rouge2", rouge_n(r.summary, entities[i].gold, 2).f1},
                      {"rougeL", rouge_l(r.summary, entities[i].gold).f1}};
    }
    if (cfg.timing) {
      rec["timing_ms"] = std::chrono::duration<double, std::milli>(elapsed).count();
    }
    records[i] = std::move(rec);
  });

  SummarizeOutput out;
  std::ostringstream lines;
  lines << json{{"run_config", cfg.to_json()}}.dump() << '\n';
  for (const auto& rec : records) lines << rec.dump() << '\n';
  out.summaries_jsonl = lines.str();

  double objective_sum = 0.0;
  std::size_t evaluated_total = 0, evaluated_max = 0, with_gold = 0;
  double r1 = 0.0, r2 = 0.0, rl = 0.0;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    objective_sum += results[i].objective_value;
    evaluated_total += results[i].candidates_evaluated;
    evaluated_max = std::max(evaluated_max, results[i].candidates_evaluated);
    if (records[i].contains("rouge")) {
      ++with_gold;
      r1 += records[i]["rouge"]["rouge1"].get<double>();
      r2 += records[i]["rouge"]["rouge2"].get<double>();
      rl += records[i]["rouge"]["rougeL"].get<double>();
    }
  }
  const double n = entities.empty() ? 1.0 : static_cast<double>(entities.size());
  json metrics = {{"run_config", cfg.to_json()},
                  {"method", method.to_string()},
                  {"entities", entities.size()},
                  {"mean_objective", objective_sum / n},
                  {"candidates_evaluated_total", evaluated_total},
                  {"candidates_evaluated_max", evaluated_max},
                  {"rouge_vs_gold", nullptr}};
  if (with_gold > 0) {
    const double g = static_cast<double>(with_gold);
    metrics["rouge_vs_gold"] = {{"entities", with_gold}, {"rouge1", r1 / g}, {"rouge2", r2 / g}, {"rougeL", rl / g}};
  }
  out.metrics_json = metrics.dump(2) + "\n";
  return out;
}

struct DiagnoseOutput {
  std::string diagnostics_json;
  std::string shrinkage_csv;
  std::string norm_quality_csv;
  std::string report_txt;
};

inline DiagnoseOutput run_diagnose(const RunConfig& cfg) {
  const auto run = prepare_run(cfg);
  const auto& dec = *run.model;
  const auto& entities = run.entities;
  if (entities.empty()) throw Error(ErrorKind::kMissingData, "no entities in " + cfg.input);

  std::size_t max_n = cfg.max_n;
  if (max_n == 0) {
    max_n = entities.front().latents.size();
    for (const auto& e : entities) max_n = std::min(max_n, e.latents.size());
  }
  const auto shrink = shrinkage_curve(entities, max_n, cfg.seed);

  std::vector<TokenSeq> corpus;
  std::vector<LatentVector> points;
  for (const auto& e : entities) {
    corpus.insert(corpus.end(), e.reviews.begin(), e.reviews.end());
    points.insert(points.end(), e.latents.begin(), e.latents.end());
    points.push_back(simple_average(e.latents));
  }
  const NgramLM lm(corpus, 1, 1.0, dec.vocab());
  const auto quality = norm_quality_correlation(points, dec, lm);

  json diag = {{"run_config", cfg.to_json()}, {"entities", entities.size()}};
  json rows = json::array();
  std::ostringstream csv;
  csv << "n,mean_norm,stddev_norm,samples\n";
  for (const auto& r : shrink.rows) {
    rows.push_back({{"n", r.n}, {"mean_norm", r.mean_norm}, {"stddev_norm", r.stddev_norm}, {"samples", r.samples}});
    csv << r.n << ',' << json(r.mean_norm).dump() << ',' << json(r.stddev_norm).dump() << ',' << r.samples << '\n';
  }
  diag["shrinkage"] = rows;
  diag["norm_quality"] = {{"points", quality.points.size()},
                          {"spearman_norm_vs_length", quality.norm_vs_length},
                          {"spearman_norm_vs_info", quality.norm_vs_info}};

  std::ostringstream qcsv;
  qcsv << "norm,length,info_nats\n";
  for (const auto& p : quality.points) {
    qcsv << json(p.norm).dump() << ',' << p.length << ',' << json(p.info).dump() << '\n';
  }

  bool all_gold = true, small = true;
  for (const auto& e : entities) {
    all_gold = all_gold && !e.gold.empty();
    small = small && e.latents.size() <= cfg.max_exact_n;
  }
  std::optional<OverlapCorrelation> corr;
  if (all_gold && small) {
    corr = overlap_rouge_correlation(entities, dec, cfg.objective(), cfg.max_exact_n, cfg.workers);
    diag["overlap_rouge_spearman"] = {{"candidates", corr->candidates},
                                      {"rouge1", corr->rouge1},
                                      {"rouge2", corr->rouge2},
                                      {"rougeL", corr->rougeL}};
  } else {
    diag["overlap_rouge_spearman"] = nullptr;
  }

  std::ostringstream txt;
  txt << std::fixed << std::setprecision(4);
  txt << "L2-norm of simple averages\n";
  txt << std::setw(4) << "n" << std::setw(12) << "mean" << std::setw(12) << "stddev" << std::setw(10) << "samples" << '\n';
  for (const auto& r : shrink.rows) {
    txt << std::setw(4) << r.n << std::setw(12) << r.mean_norm << std::setw(12) << r.stddev_norm
        << std::setw(10) << r.samples << '\n';
  }
  txt << "\nSpearman over " << quality.points.size() << " vectors\n";
  txt << "  norm vs decoded length   " << std::setw(8) << quality.norm_vs_length << '\n';
  txt << "  norm vs information      " << std::setw(8) << quality.norm_vs_info << '\n';
  if (corr) {
    txt << "\nSpearman of input-output overlap vs ROUGE against gold (" << corr->candidates << " candidates)\n";
    txt << "  rouge1 " << std::setw(8) << corr->rouge1 << '\n';
    txt << "  rouge2 " << std::setw(8) << corr->rouge2 << '\n';
    txt << "  rougeL " << std::setw(8) << corr->rougeL << '\n';
  }

  DiagnoseOutput out;
  out.diagnostics_json = diag.dump(2) + "\n";
  out.shrinkage_csv = csv.str();
  out.norm_quality_csv = qcsv.str();
  out.report_txt = txt.str();
  return out;
}

struct RankEvalOutput {
  std::string ranking_json;
  std::string report_txt;
};

inline std::vector<std::string> resolved_rank_methods(const RunConfig& cfg) {
  if (!cfg.methods.empty()) return cfg.methods;
  return {"random:" + std::to_string(cfg.seed), "simpleavg", "coop-exact"};
}

inline RankEvalOutput run_rank_eval(const RunConfig& cfg) {
  const auto run = prepare_run(cfg);
  const auto& dec = *run.model;
  const auto obj = cfg.objective();
  std::vector<RankingMethod> methods;
  for (const auto& text : resolved_rank_methods(cfg)) {
    const auto spec = parse_method(text);
    if (!spec.selects_subset()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "method '" + text + "' does not select a subset and cannot be ranked");
    }
    methods.push_back({spec.to_string(), [spec, &dec, obj, max = cfg.max_exact_n](const EntityData& e, std::size_t i) {
                         return *run_method(spec, e, i, dec, obj, max).selection;
                       }});
  }
  const auto report = ranking_quality(run.entities, dec, methods, cfg.max_exact_n, cfg.workers);

  json j = {{"run_config", cfg.to_json()},
            {"entities", report.entities},
            {"candidates_per_entity", report.candidates_per_entity}};
  json rows = json::array();
  std::ostringstream txt;
  txt << std::fixed << std::setprecision(2);
  txt << std::left << std::setw(28) << "method" << std::right << std::setw(10) << "MRR(%)" << std::setw(10)
      << "nDCG(%)" << '\n';
  for (const auto& m : report.methods) {
    rows.push_back({{"method", m.name},
                    {"mrr", m.mrr},
                    {"ndcg", m.ndcg},
                    {"mrr_percent", m.mrr_percent()},
                    {"ndcg_percent", m.ndcg_percent()},
                    {"ranks", m.ranks}});
    txt << std::left << std::setw(28) << m.name << std::right << std::setw(10) << m.mrr_percent()
        << std::setw(10) << m.ndcg_percent() << '\n';
  }
  j["methods"] = rows;
  return {j.dump(2) + "\n", txt.str()};
}

}  // namespace coop
