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

// Convex aggregation search. A candidate is a non-empty subset of the input
// reviews; its summary vector is the mean of the selected latents, and its
// score is the ROUGE overlap between the decoded text and ALL input reviews.
//
// Candidates are totally ordered by (higher objective, smaller subset,
// ascending bitmask). Every selection and every ranking in this header uses
// that order, which keeps results independent of evaluation order and of the
// number of worker threads.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "coop/autoencoder.hpp"
#include "coop/error.hpp"
#include "coop/latentspace.hpp"
#include "coop/parallel.hpp"
#include "coop/textmetrics.hpp"

namespace coop {

enum class OverlapMetric { kRouge1, kRouge2, kRougeL };

struct Objective {
  OverlapMetric metric = OverlapMetric::kRouge1;
  RefMode ref_mode = RefMode::kAverage;
};

// F1 of a hypothesis against a fixed reference set, per Objective.
class ObjectiveScorer {
 public:
  ObjectiveScorer(std::span<const TokenSeq> refs, const Objective& obj) : impl_(make(refs, obj)) {}

  double operator()(const TokenSeq& hyp) const {
    return std::visit([&](const auto& s) { return s.score(hyp).f1; }, impl_);
  }

 private:
  using Impl = std::variant<RougeNScorer, RougeLScorer>;

  static Impl make(std::span<const TokenSeq> refs, const Objective& obj) {
    switch (obj.metric) {
      case OverlapMetric::kRouge1: return RougeNScorer(refs, 1, obj.ref_mode);
      case OverlapMetric::kRouge2: return RougeNScorer(refs, 2, obj.ref_mode);
      case OverlapMetric::kRougeL: break;
    }
    return RougeLScorer(refs, obj.ref_mode);
  }

  Impl impl_;
};

struct Candidate {
  SubsetSelection selection;
  double value;
};

// Strict total order: true when `a` ranks ahead of `b`.
inline bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value > b.value;
  if (a.selection.size() != b.selection.size()) return a.selection.size() < b.selection.size();
  return bitmask_less(a.selection, b.selection);
}

struct SearchResult {
  std::optional<SubsetSelection> selection;
  std::optional<ConvexWeights> weights;
  LatentVector summary_vector;
  TokenSeq summary;
  double objective_value = 0.0;
  std::size_t candidates_evaluated = 0;
  std::vector<Candidate> ranked_candidates;  // empty unless the strategy ranks
};

enum class SearchStrategy { kExact, kGreedy, kBeam };
enum class SearchDirection { kForward, kBackward };

struct SearchConfig {
  SearchStrategy strategy = SearchStrategy::kExact;
  SearchDirection direction = SearchDirection::kForward;
  std::size_t beam_size = 1;
  std::size_t max_exact_n = kDefaultMaxExactN;
  std::size_t workers = 1;
};

// Scores subsets of one entity's reviews. Immutable; shared by worker threads.
template <Decoder D>
class CandidateEvaluator {
 public:
  CandidateEvaluator(std::span<const TokenSeq> reviews, std::span<const LatentVector> zs,
                     const D& dec, const Objective& obj)
      : zs_(zs), dec_(dec), scorer_(reviews, obj) {
    detail::common_dim(zs);
  }

  std::size_t size() const { return zs_.size(); }

  double operator()(const SubsetSelection& s) const {
    return scorer_(dec_.decode(subset_average(zs_, s)));
  }

  std::vector<Candidate> evaluate(std::vector<SubsetSelection> subsets, std::size_t workers) const {
    std::vector<double> values(subsets.size());
    parallel_for(subsets.size(), workers, [&](std::size_t i) { values[i] = (*this)(subsets[i]); });
    std::vector<Candidate> out;
    out.reserve(subsets.size());
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      out.push_back({std::move(subsets[i]), values[i]});
    }
    return out;
  }

  SearchResult finish(const SubsetSelection& s, double value, std::size_t evaluated) const {
    SearchResult r;
    r.summary_vector = subset_average(zs_, s);
    r.summary = dec_.decode(r.summary_vector);
    r.objective_value = value;
    r.candidates_evaluated = evaluated;
    r.weights = ConvexWeights::uniform_on(s.indices(), zs_.size());
    r.selection = s;
    return r;
  }

 private:
  std::span<const LatentVector> zs_;
  const D& dec_;
  ObjectiveScorer scorer_;
};

template <Decoder D>
double evaluate_candidate(std::span<const TokenSeq> reviews, std::span<const LatentVector> zs,
                          const SubsetSelection& s, const D& dec, const Objective& obj) {
  return CandidateEvaluator<D>(reviews, zs, dec, obj)(s);
}

namespace detail {

inline void sort_candidates(std::vector<Candidate>& cands) {
  std::sort(cands.begin(), cands.end(), ranks_before);
}

struct BitmaskLess {
  bool operator()(const SubsetSelection& a, const SubsetSelection& b) const {
    return bitmask_less(a, b);
  }
};

}  // namespace detail

template <Decoder D>
SearchResult search_exact(std::span<const TokenSeq> reviews, std::span<const LatentVector> zs,
                          const D& dec, const Objective& obj, std::size_t max_exact_n = kDefaultMaxExactN,
                          std::size_t workers = 1) {
  const auto range = enumerate_subsets(zs.size(), max_exact_n);
  CandidateEvaluator<D> eval(reviews, zs, dec, obj);
  std::vector<SubsetSelection> subsets(range.begin(), range.end());
  auto ranked = eval.evaluate(std::move(subsets), workers);
  detail::sort_candidates(ranked);
  auto result = eval.finish(ranked.front().selection, ranked.front().value, ranked.size());
  result.ranked_candidates = std::move(ranked);
  return result;
}

// Forward search starts from every singleton and grows each kept subset by one
// review per step; backward search starts from the full set and drops one
// review per step. The best candidate seen at ANY step is returned.
template <Decoder D>
SearchResult search_beam(std::span<const TokenSeq> reviews, std::span<const LatentVector> zs,
                         const D& dec, const Objective& obj, SearchDirection direction,
                         std::size_t beam_size, std::size_t workers = 1) {
  if (beam_size == 0) throw Error(ErrorKind::kInvalidArgument, "beam_size must be >= 1");
  CandidateEvaluator<D> eval(reviews, zs, dec, obj);
  const std::size_t n = zs.size();

  std::vector<SubsetSelection> step;
  if (direction == SearchDirection::kForward) {
    for (std::size_t i = 0; i < n; ++i) step.emplace_back(std::vector<std::size_t>{i}, n);
  } else {
    step.push_back(SubsetSelection::all(n));
  }

  std::vector<Candidate> seen;
  while (!step.empty()) {
    auto scored = eval.evaluate(std::move(step), workers);
    detail::sort_candidates(scored);
    seen.insert(seen.end(), scored.begin(), scored.end());
    if (scored.size() > beam_size) scored.erase(scored.begin() + static_cast<std::ptrdiff_t>(beam_size), scored.end());

    std::set<SubsetSelection, detail::BitmaskLess> next;
    for (const auto& kept : scored) {
      const auto& idx = kept.selection.indices();
      if (direction == SearchDirection::kForward) {
        for (std::size_t i = 0; i < n; ++i) {
          if (kept.selection.contains(i)) continue;
          auto grown = idx;
          grown.push_back(i);
          next.emplace(std::move(grown), n);
        }
      } else if (idx.size() > 1) {
        for (std::size_t drop = 0; drop < idx.size(); ++drop) {
          std::vector<std::size_t> shrunk;
          shrunk.reserve(idx.size() - 1);
          for (std::size_t j = 0; j < idx.size(); ++j) {
            if (j != drop) shrunk.push_back(idx[j]);
          }
          next.emplace(std::move(shrunk), n);
        }
      }
    }
    step.assign(next.begin(), next.end());
  }

  detail::sort_candidates(seen);
  auto result = eval.finish(seen.front().selection, seen.front().value, seen.size());
  result.ranked_candidates = std::move(seen);
  return result;
}

template <Decoder D>
SearchResult search(std::span<const TokenSeq> reviews, std::span<const LatentVector> zs,
                    const D& dec, const Objective& obj, const SearchConfig& cfg) {
  switch (cfg.strategy) {
    case SearchStrategy::kExact:
      return search_exact(reviews, zs, dec, obj, cfg.max_exact_n, cfg.workers);
    case SearchStrategy::kGreedy:
      return search_beam(reviews, zs, dec, obj, cfg.direction, 1, cfg.workers);
    case SearchStrategy::kBeam:
      return search_beam(reviews, zs, dec, obj, cfg.direction, cfg.beam_size, cfg.workers);
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown search strategy");
}

// Scores and decodes a fixed selection, for baselines that choose a subset
// without searching.
template <Decoder D>
SearchResult summarize_selection(std::span<const TokenSeq> reviews, std::span<const LatentVector> zs,
                                 const SubsetSelection& s, const D& dec, const Objective& obj) {
  CandidateEvaluator<D> eval(reviews, zs, dec, obj);
  return eval.finish(s, eval(s), 1);
}

template <Decoder D>
SearchResult select_simpleavg(std::span<const TokenSeq> reviews, std::span<const LatentVector> zs,
                              const D& dec, const Objective& obj) {
  if (zs.empty()) throw Error(ErrorKind::kInvalidArgument, "no latent vectors given");
  return summarize_selection(reviews, zs, SubsetSelection::all(zs.size()), dec, obj);
}

namespace detail {

template <Decoder D>
SearchResult summarize_vector(std::span<const TokenSeq> reviews, LatentVector z, const D& dec,
                              const Objective& obj) {
  SearchResult r;
  r.summary = dec.decode(z);
  r.summary_vector = std::move(z);
  r.objective_value = ObjectiveScorer(reviews, obj)(r.summary);
  r.candidates_evaluated = 1;
  return r;
}

}  // namespace detail

// Per-dimension weights, so the result carries neither a subset nor scalar
// review weights.
template <Decoder D>
SearchResult select_ivw(std::span<const TokenSeq> reviews, std::span<const LatentVector> zs,
                        const D& dec, const Objective& obj) {
  return detail::summarize_vector(reviews, inverse_variance_weighting(zs), dec, obj);
}

template <Decoder D>
SearchResult select_rescale(std::span<const TokenSeq> reviews, std::span<const LatentVector> zs,
                            double alpha, const D& dec, const Objective& obj) {
  return detail::summarize_vector(reviews, rescale(simple_average(zs), alpha), dec, obj);
}

struct LexRankOptions {
  double damping = 0.15;
  double tolerance = 1e-10;
  std::size_t max_iterations = 1000;
};

// Continuous LexRank over latent cosine similarities. Negative cosines are
// clamped to zero so every row stays a probability distribution; the diagonal
// (self-similarity 1) keeps each row sum positive.
inline std::vector<double> lexrank_centrality(std::span<const LatentVector> zs,
                                              const LexRankOptions& opt = {}) {
  const std::size_t n = zs.size();
  detail::common_dim(zs);
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    norms[i] = l2_norm(zs[i]);
    if (norms[i] == 0.0) {
      throw Error(ErrorKind::kInvalidArgument,
                  "extractive selection: latent vector " + std::to_string(i) +
                      " is zero, cosine similarity undefined");
    }
  }
  std::vector<std::vector<double>> transition(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double cos = dot(zs[i].values, zs[j].values) / (norms[i] * norms[j]);
      transition[i][j] = std::max(0.0, cos);
      row += transition[i][j];
    }
    for (std::size_t j = 0; j < n; ++j) {
      transition[i][j] = opt.damping / static_cast<double>(n) +
                         (1.0 - opt.damping) * transition[i][j] / row;
    }
  }
  std::vector<double> p(n, 1.0 / static_cast<double>(n)), next(n);
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) next[j] += p[i] * transition[i][j];
    }
    double delta = 0.0;
    for (std::size_t j = 0; j < n; ++j) delta += std::abs(next[j] - p[j]);
    p.swap(next);
    if (delta < opt.tolerance) break;
  }
  return p;
}

// Top-k reviews by centrality, ties by ascending index.
inline SubsetSelection select_extractive(std::span<const LatentVector> zs, std::size_t k,
                                         const LexRankOptions& opt = {}) {
  if (k == 0 || k > zs.size()) {
    throw Error(ErrorKind::kInvalidArgument, "extractive k must be in [1, " +
                                                 std::to_string(zs.size()) + "], got " +
                                                 std::to_string(k));
  }
  const auto centrality = lexrank_centrality(zs, opt);
  std::vector<std::size_t> order(zs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return centrality[a] > centrality[b]; });
  order.resize(k);
  return SubsetSelection(std::move(order), zs.size());
}

// Uniform over the 2^n - 1 non-empty subsets.
inline SubsetSelection select_random(std::size_t n, std::mt19937_64& rng) {
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "random selection needs n >= 1");
  if (n <= kMaxMaskBits) {
    std::uniform_int_distribution<std::uint64_t> dist(1, (std::uint64_t{1} << n) - 1);
    return SubsetSelection::from_mask(dist(rng), n);
  }
  std::bernoulli_distribution coin(0.5);
  for (;;) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
      if (coin(rng)) idx.push_back(i);
    }
    if (!idx.empty()) return SubsetSelection(std::move(idx), n);
  }
}

inline SubsetSelection select_random(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return select_random(n, rng);
}

}  // namespace coop
