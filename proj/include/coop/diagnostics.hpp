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

// Latent-space analyses: how the norm of a simple average shrinks with the
// number of inputs, how norm relates to decoded length and information
// amount, where a method's selection lands among all power-set candidates
// ranked against gold summaries, and how well the input-output overlap
// tracks ROUGE against gold.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "coop/autoencoder.hpp"
#include "coop/coopsearch.hpp"
#include "coop/error.hpp"
#include "coop/latentspace.hpp"
#include "coop/parallel.hpp"
#include "coop/textmetrics.hpp"

namespace coop {

// One entity's inputs after tokenization and encoding.
struct EntityData {
  std::string id;
  std::vector<TokenSeq> reviews;
  std::vector<TokenSeq> gold;
  std::vector<LatentVector> latents;
};

struct ShrinkageRow {
  std::size_t n = 0;
  double mean_norm = 0.0;
  double stddev_norm = 0.0;  // population standard deviation
  std::size_t samples = 0;
};

struct ShrinkageReport {
  std::vector<ShrinkageRow> rows;  // rows[i].n == i + 1
};

namespace detail {

inline ShrinkageRow summarize_norms(std::size_t n, std::span<const double> norms) {
  ShrinkageRow row;
  row.n = n;
  row.samples = norms.size();
  row.mean_norm = std::accumulate(norms.begin(), norms.end(), 0.0) / static_cast<double>(norms.size());
  double var = 0.0;
  for (double v : norms) var += (v - row.mean_norm) * (v - row.mean_norm);
  row.stddev_norm = std::sqrt(var / static_cast<double>(norms.size()));
  return row;
}

// n distinct indices from [0, size), partial Fisher-Yates.
inline std::vector<std::size_t> sample_indices(std::size_t size, std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> pool(size);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, size - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(n);
  return pool;
}

}  // namespace detail

// Row n=1 covers every individual review vector. Rows n>=2 draw one random
// n-subset per entity from a generator seeded once for the whole report.
inline ShrinkageReport shrinkage_curve(std::span<const EntityData> entities, std::size_t max_n,
                                       std::uint64_t seed) {
  if (max_n == 0) throw Error(ErrorKind::kInvalidArgument, "max_n must be >= 1");
  if (entities.empty()) throw Error(ErrorKind::kInvalidArgument, "shrinkage curve needs entities");
  for (const auto& e : entities) {
    if (e.latents.size() < max_n) {
      throw Error(ErrorKind::kMissingData,
                  "entity '" + e.id + "' has " + std::to_string(e.latents.size()) +
                      " reviews, fewer than max_n=" + std::to_string(max_n));
    }
  }
  ShrinkageReport report;
  std::vector<double> norms;
  for (const auto& e : entities) {
    for (const auto& z : e.latents) norms.push_back(l2_norm(z));
  }
  report.rows.push_back(detail::summarize_norms(1, norms));

  std::mt19937_64 rng(seed);
  for (std::size_t n = 2; n <= max_n; ++n) {
    norms.clear();
    for (const auto& e : entities) {
      auto idx = detail::sample_indices(e.latents.size(), n, rng);
      norms.push_back(l2_norm(subset_average(e.latents, SubsetSelection(std::move(idx), e.latents.size()))));
    }
    report.rows.push_back(detail::summarize_norms(n, norms));
  }
  return report;
}

struct NormQualityPoint {
  double norm = 0.0;
  std::size_t length = 0;
  double info = 0.0;
};

struct NormQuality {
  double norm_vs_length = 0.0;
  double norm_vs_info = 0.0;
  std::vector<NormQualityPoint> points;
};

template <Decoder D>
NormQuality norm_quality_correlation(std::span<const LatentVector> zs, const D& dec,
                                     const NgramLM& lm) {
  if (zs.size() < 2) {
    throw Error(ErrorKind::kUndefinedCorrelation, "norm/quality correlation needs >= 2 vectors");
  }
  NormQuality out;
  std::vector<double> norms, lengths, infos;
  for (const auto& z : zs) {
    const auto text = dec.decode(z);
    NormQualityPoint p{l2_norm(z), text.size(), info_amount(text, lm)};
    norms.push_back(p.norm);
    lengths.push_back(static_cast<double>(p.length));
    infos.push_back(p.info);
    out.points.push_back(p);
  }
  out.norm_vs_length = spearman(norms, lengths);
  out.norm_vs_info = spearman(norms, infos);
  return out;
}

// 1-based position of `s` in a list already sorted by ranks_before.
inline std::size_t rank_of(std::span<const Candidate> ranked, const SubsetSelection& s) {
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].selection == s) return i + 1;
  }
  throw Error(ErrorKind::kInvalidArgument, "selection is not among the ranked candidates");
}

// Every non-empty subset ranked by ROUGE-1 F1 of its decode against the gold
// summaries, under the same total order the search uses.
template <Decoder D>
std::vector<Candidate> gold_ranking(const EntityData& e, const D& dec,
                                    std::size_t max_exact_n = kDefaultMaxExactN) {
  if (e.gold.empty()) {
    throw Error(ErrorKind::kMissingData, "entity '" + e.id + "' has no gold summaries");
  }
  return search_exact(e.gold, e.latents, dec, Objective{}, max_exact_n).ranked_candidates;
}

struct RankingMethod {
  std::string name;
  // Receives the entity and its position in the input, for seeded selectors.
  std::function<SubsetSelection(const EntityData&, std::size_t)> select;
};

struct MethodRanking {
  std::string name;
  std::vector<std::size_t> ranks;  // one per entity, input order
  double mrr = 0.0;
  double ndcg = 0.0;
  double mrr_percent() const { return 100.0 * mrr; }
  double ndcg_percent() const { return 100.0 * ndcg; }
};

struct RankingReport {
  std::size_t entities = 0;
  std::size_t candidates_per_entity = 0;  // 0 when entities differ in size
  std::vector<MethodRanking> methods;
};

template <Decoder D>
RankingReport ranking_quality(std::span<const EntityData> entities, const D& dec,
                              std::span<const RankingMethod> methods,
                              std::size_t max_exact_n = kDefaultMaxExactN, std::size_t workers = 1) {
  if (entities.empty()) throw Error(ErrorKind::kInvalidArgument, "ranking needs entities");
  for (const auto& e : entities) {
    if (e.gold.empty()) {
      throw Error(ErrorKind::kMissingData, "entity '" + e.id + "' has no gold summaries");
    }
    enumerate_subsets(e.latents.size(), max_exact_n);
  }
  std::vector<std::vector<std::size_t>> ranks(entities.size());
  parallel_for(entities.size(), workers, [&](std::size_t i) {
    const auto ranked = gold_ranking(entities[i], dec, max_exact_n);
    for (const auto& m : methods) ranks[i].push_back(rank_of(ranked, m.select(entities[i], i)));
  });

  RankingReport report;
  report.entities = entities.size();
  report.candidates_per_entity = (std::size_t{1} << entities.front().latents.size()) - 1;
  for (const auto& e : entities) {
    if (e.latents.size() != entities.front().latents.size()) report.candidates_per_entity = 0;
  }
  for (std::size_t m = 0; m < methods.size(); ++m) {
    MethodRanking mr;
    mr.name = methods[m].name;
    for (const auto& r : ranks) mr.ranks.push_back(r[m]);
    mr.mrr = mrr(mr.ranks);
    mr.ndcg = ndcg_rank(mr.ranks);
    report.methods.push_back(std::move(mr));
  }
  return report;
}

// Monte Carlo for the random-selection row: each simulated entity gets i.i.d.
// uniform gold scores for its 2^n - 1 candidates and a uniformly random
// selection, which is then ranked under the search tie order.
inline MethodRanking simulate_random_ranking(std::size_t n_reviews, std::size_t entities,
                                             std::uint64_t seed) {
  const auto range = enumerate_subsets(n_reviews);
  const std::uint64_t count = range.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> score(count + 1);
  MethodRanking out;
  out.name = "random";
  out.ranks.reserve(entities);
  for (std::size_t e = 0; e < entities; ++e) {
    for (std::uint64_t m = 1; m <= count; ++m) score[m] = unit(rng);
    const auto chosen = select_random(n_reviews, rng);
    const Candidate mine{chosen, score[chosen.mask()]};
    std::size_t rank = 1;
    for (std::uint64_t m = 1; m <= count; ++m) {
      if (m == chosen.mask()) continue;
      if (score[m] > mine.value ||
          (score[m] == mine.value && ranks_before({SubsetSelection::from_mask(m, n_reviews), score[m]}, mine))) {
        ++rank;
      }
    }
    out.ranks.push_back(rank);
  }
  out.mrr = mrr(out.ranks);
  out.ndcg = ndcg_rank(out.ranks);
  return out;
}

struct OverlapCorrelation {
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
  std::size_t candidates = 0;
};

// Pools every power-set candidate of every entity, then correlates the
// input-output overlap with ROUGE-1/2/L F1 against gold.
template <Decoder D>
OverlapCorrelation overlap_rouge_correlation(std::span<const EntityData> entities, const D& dec,
                                             const Objective& obj,
                                             std::size_t max_exact_n = kDefaultMaxExactN,
                                             std::size_t workers = 1) {
  struct Series {
    std::vector<double> overlap, r1, r2, rl;
  };
  std::vector<Series> per_entity(entities.size());
  for (const auto& e : entities) {
    if (e.gold.empty()) {
      throw Error(ErrorKind::kMissingData, "entity '" + e.id + "' has no gold summaries");
    }
    enumerate_subsets(e.latents.size(), max_exact_n);
  }
  parallel_for(entities.size(), workers, [&](std::size_t i) {
    const auto& e = entities[i];
    const ObjectiveScorer overlap(e.reviews, obj);
    const RougeNScorer r1(e.gold, 1, RefMode::kAverage);
    const RougeNScorer r2(e.gold, 2, RefMode::kAverage);
    const RougeLScorer rl(e.gold, RefMode::kAverage);
    auto& s = per_entity[i];
    for (const auto& subset : enumerate_subsets(e.latents.size(), max_exact_n)) {
      const auto text = dec.decode(subset_average(e.latents, subset));
      s.overlap.push_back(overlap(text));
      s.r1.push_back(r1.score(text).f1);
      s.r2.push_back(r2.score(text).f1);
      s.rl.push_back(rl.score(text).f1);
    }
  });
  Series pooled;
  for (auto& s : per_entity) {
    pooled.overlap.insert(pooled.overlap.end(), s.overlap.begin(), s.overlap.end());
    pooled.r1.insert(pooled.r1.end(), s.r1.begin(), s.r1.end());
    pooled.r2.insert(pooled.r2.end(), s.r2.begin(), s.r2.end());
    pooled.rl.insert(pooled.rl.end(), s.rl.begin(), s.rl.end());
  }
  OverlapCorrelation out;
  out.candidates = pooled.overlap.size();
  out.rouge1 = spearman(pooled.overlap, pooled.r1);
  out.rouge2 = spearman(pooled.overlap, pooled.r2);
  out.rougeL = spearman(pooled.overlap, pooled.rl);
  return out;
}

}  // namespace coop
