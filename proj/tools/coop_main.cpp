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

// coop: summarize / diagnose / rank-eval / synth over JSONL entity files.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coop/coop.hpp"

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::string input;
  std::string method;
  std::vector<std::string> methods;
  std::string overlap;
  std::string ref_mode;
  std::string latents;
  std::string toy_vocab;
  std::size_t toy_dim = 0;
  double kappa = 0.0;
  std::size_t max_len = 0;
  bool block_pronouns = true;
  std::size_t max_exact_n = 0;
  std::size_t max_n = 0;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  bool timing = false;
  std::string out;
};

void add_run_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run config, or any output file embedding one");
  cmd->add_option("-i,--input", f.input, "entities JSONL");
  cmd->add_option("--method", f.method, "aggregation method spec");
  cmd->add_option("--overlap", f.overlap, "rouge1 | rouge2 | rougeL");
  cmd->add_option("--ref-mode", f.ref_mode, "average | max | concat");
  cmd->add_option("--latents", f.latents, "external latents JSONL");
  cmd->add_option("--toy-vocab", f.toy_vocab, "toy decoder vocabulary, one entry per line");
  cmd->add_option("--toy-dim", f.toy_dim, "toy latent dimension (default 64)");
  cmd->add_option("--kappa", f.kappa, "toy decoder length gain (default 2)");
  cmd->add_option("--max-len", f.max_len, "toy decoder maximum output length (default 40)");
  cmd->add_option("--block-pronouns", f.block_pronouns, "block first-person pronouns (default true)");
  cmd->add_option("--max-exact-n", f.max_exact_n, "largest review count for exhaustive search (default 16)");
  cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "seed for every random choice");
  cmd->add_flag("--timing", f.timing, "record per-entity wall time (makes output nondeterministic)");
  cmd->add_option("-o,--out", f.out, "output directory (stdout when omitted)");
}

coop::RunConfig resolve(const CLI::App* cmd, const Flags& f) {
  coop::RunConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw coop::Error(coop::ErrorKind::kIo, "cannot open config " + f.config);
    coop::json j;
    try {
      j = coop::json::parse(in);
    } catch (const coop::json::exception& e) {
      throw coop::Error(coop::ErrorKind::kParse, f.config + ": " + e.what());
    }
    cfg = coop::RunConfig::from_json(j);
  }
  auto given = [&](const char* name) { return cmd->get_option_no_throw(name) && cmd->count(name) > 0; };
  if (given("--input")) cfg.input = f.input;
  if (given("--method")) cfg.method = f.method;
  if (given("--methods")) cfg.methods = f.methods;
  if (given("--overlap")) cfg.overlap = f.overlap;
  if (given("--ref-mode")) cfg.ref_mode = f.ref_mode;
  if (given("--latents")) cfg.latents = f.latents;
  if (given("--toy-vocab")) cfg.toy_vocab = f.toy_vocab;
  if (given("--toy-dim")) cfg.toy_dim = f.toy_dim;
  if (given("--kappa")) cfg.kappa = f.kappa;
  if (given("--max-len")) cfg.max_len = f.max_len;
  if (given("--block-pronouns")) cfg.block_pronouns = f.block_pronouns;
  if (given("--max-exact-n")) cfg.max_exact_n = f.max_exact_n;
  if (given("--max-n")) cfg.max_n = f.max_n;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--timing")) cfg.timing = f.timing;
  cfg.workers = f.workers;
  cfg.out = f.out;
  cfg.validate();
  return cfg;
}

void emit(const coop::RunConfig& cfg, const std::vector<std::pair<std::string, const std::string*>>& files,
          const std::string& stdout_text) {
  if (cfg.out.empty()) {
    std::cout << stdout_text;
    return;
  }
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw coop::Error(coop::ErrorKind::kIo, "cannot create " + cfg.out + ": " + ec.message());
  for (const auto& [name, body] : files) {
    const auto path = fs::path(cfg.out) / name;
    std::ofstream os(path, std::ios::binary);
    os << *body;
    if (!os) throw coop::Error(coop::ErrorKind::kIo, "cannot write " + path.string());
  }
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << coop::json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex aggregation of review latents for opinion summarization"};
  app.require_subcommand(1);

  Flags f;
  auto* summarize = app.add_subcommand("summarize", "aggregate latents per entity and decode summaries");
  add_run_options(summarize, f);

  Flags df;
  auto* diagnose = app.add_subcommand("diagnose", "norm shrinkage, norm/quality and overlap/ROUGE correlations");
  add_run_options(diagnose, df);
  diagnose->add_option("--max-n", df.max_n, "largest input count for the shrinkage curve (default: smallest entity)");

  Flags rf;
  auto* rank_eval = app.add_subcommand("rank-eval", "MRR/nDCG of each method's selection against gold ranking");
  add_run_options(rank_eval, rf);
  rank_eval->add_option("--methods", rf.methods, "method specs to rank")->delimiter(',');

  coop::TopicCorpusOptions synth_opt;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a seeded topic-structured entities JSONL");
  synth->add_option("--entities", synth_opt.entities);
  synth->add_option("--reviews", synth_opt.reviews_per_entity);
  synth->add_option("--topics", synth_opt.topics);
  synth->add_option("--words-per-topic", synth_opt.words_per_topic);
  synth->add_option("--review-length", synth_opt.review_length);
  synth->add_option("--on-topic", synth_opt.on_topic_reviews, "reviews drawn from the entity's core topic");
  synth->add_option("--gold-length", synth_opt.gold_length);
  synth->add_option("--seed", synth_opt.seed);
  synth->add_option("-o,--out", synth_out, "output JSONL (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (summarize->parsed()) {
      const auto cfg = resolve(summarize, f);
      const auto out = coop::run_summarize(cfg);
      emit(cfg, {{"summaries.jsonl", &out.summaries_jsonl}, {"metrics.json", &out.metrics_json}},
           out.summaries_jsonl);
    } else if (diagnose->parsed()) {
      const auto cfg = resolve(diagnose, df);
      const auto out = coop::run_diagnose(cfg);
      emit(cfg,
           {{"diagnostics.json", &out.diagnostics_json},
            {"shrinkage.csv", &out.shrinkage_csv},
            {"norm_quality.csv", &out.norm_quality_csv},
            {"report.txt", &out.report_txt}},
           out.report_txt);
    } else if (rank_eval->parsed()) {
      const auto cfg = resolve(rank_eval, rf);
      const auto out = coop::run_rank_eval(cfg);
      emit(cfg, {{"ranking.json", &out.ranking_json}, {"report.txt", &out.report_txt}}, out.report_txt);
    } else if (synth->parsed()) {
      const auto batches = coop::make_topic_corpus(synth_opt);
      if (synth_out.empty()) {
        coop::write_entities(std::cout, batches);
      } else {
        std::ofstream os(synth_out, std::ios::binary);
        coop::write_entities(os, batches);
        if (!os) throw coop::Error(coop::ErrorKind::kIo, "cannot write " + synth_out);
      }
    }
  } catch (const coop::Error& e) {
    print_error(std::string(coop::error_kind_name(e.kind())), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
