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

// Text-side metrics: tokenization, ROUGE-N / ROUGE-L, a smoothed n-gram
// language model for information amount, Spearman rank correlation, and the
// single-relevant-item ranking metrics (MRR, nDCG).
//
// All functions are pure; the prepared scorers are immutable after
// construction and may be shared across threads.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "coop/error.hpp"

namespace coop {

using TokenSeq = std::vector<std::string>;

// Lowercases ASCII letters and splits on every byte that is not an ASCII
// letter or digit. Bytes >= 0x80 are kept inside tokens so UTF-8 words are
// not shredded.
inline TokenSeq tokenize(std::string_view text) {
  TokenSeq tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    const bool word_char = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                           (c >= '0' && c <= '9') || c >= 0x80;
    if (word_char) {
      current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline std::string join_tokens(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static RougeScore from_pr(double p, double r) {
    return {p, r, (p + r > 0.0) ? 2.0 * p * r / (p + r) : 0.0};
  }
};

enum class RefMode { kAverage, kMax, kConcat };

namespace detail {

using NgramCounts = std::unordered_map<std::string, int>;

// N-grams are keyed by their tokens joined with a unit separator, which
// cannot appear inside a token produced by tokenize().
inline NgramCounts count_ngrams(const TokenSeq& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  std::string key;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    key.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j) key.push_back('\x1f');
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

inline int total(const NgramCounts& counts) {
  int sum = 0;
  for (const auto& [_, c] : counts) sum += c;
  return sum;
}

inline RougeScore score_counts(const NgramCounts& hyp, int hyp_total,
                               const NgramCounts& ref, int ref_total) {
  if (hyp_total == 0 || ref_total == 0) return {};
  int overlap = 0;
  const auto& small = hyp.size() <= ref.size() ? hyp : ref;
  const auto& large = hyp.size() <= ref.size() ? ref : hyp;
  for (const auto& [gram, c] : small) {
    auto it = large.find(gram);
    if (it != large.end()) overlap += std::min(c, it->second);
  }
  return RougeScore::from_pr(static_cast<double>(overlap) / hyp_total,
                             static_cast<double>(overlap) / ref_total);
}

inline std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline RougeScore lcs_score(const TokenSeq& hyp, const TokenSeq& ref) {
  if (hyp.empty() || ref.empty()) return {};
  const double lcs = static_cast<double>(lcs_length(hyp, ref));
  return RougeScore::from_pr(lcs / static_cast<double>(hyp.size()),
                             lcs / static_cast<double>(ref.size()));
}

inline RougeScore combine(std::span<const RougeScore> per_ref, RefMode mode) {
  if (mode == RefMode::kMax) {
    RougeScore best = per_ref.front();
    for (const auto& s : per_ref.subspan(1)) {
      if (s.f1 > best.f1) best = s;
    }
    return best;
  }
  RougeScore mean;
  for (const auto& s : per_ref) {
    mean.precision += s.precision;
    mean.recall += s.recall;
    mean.f1 += s.f1;
  }
  const double k = static_cast<double>(per_ref.size());
  mean.precision /= k;
  mean.recall /= k;
  mean.f1 /= k;
  return mean;
}

inline void require_refs(std::size_t count) {
  if (count == 0) {
    throw Error(ErrorKind::kInvalidArgument, "ROUGE requires a non-empty reference set");
  }
}

}  // namespace detail

// ROUGE-N against a fixed reference set, with the reference n-gram counts
// computed once. In concat mode the per-reference counts are summed, so no
// n-gram spans a reference boundary.
class RougeNScorer {
 public:
  RougeNScorer(std::span<const TokenSeq> refs, std::size_t n, RefMode mode)
      : n_(n), mode_(mode) {
    detail::require_refs(refs.size());
    if (n == 0) throw Error(ErrorKind::kInvalidArgument, "ROUGE-N requires n >= 1");
    if (mode == RefMode::kConcat) {
      detail::NgramCounts merged;
      for (const auto& ref : refs) {
        for (const auto& [gram, c] : detail::count_ngrams(ref, n)) merged[gram] += c;
      }
      totals_.push_back(detail::total(merged));
      refs_.push_back(std::move(merged));
    } else {
      for (const auto& ref : refs) {
        refs_.push_back(detail::count_ngrams(ref, n));
        totals_.push_back(detail::total(refs_.back()));
      }
    }
  }

  RougeScore score(const TokenSeq& hyp) const {
    const auto hyp_counts = detail::count_ngrams(hyp, n_);
    const int hyp_total = detail::total(hyp_counts);
    std::vector<RougeScore> per_ref;
    per_ref.reserve(refs_.size());
    for (std::size_t i = 0; i < refs_.size(); ++i) {
      per_ref.push_back(detail::score_counts(hyp_counts, hyp_total, refs_[i], totals_[i]));
    }
    return detail::combine(per_ref, mode_);
  }

 private:
  std::size_t n_;
  RefMode mode_;
  std::vector<detail::NgramCounts> refs_;
  std::vector<int> totals_;
};

class RougeLScorer {
 public:
  RougeLScorer(std::span<const TokenSeq> refs, RefMode mode) : mode_(mode) {
    detail::require_refs(refs.size());
    if (mode == RefMode::kConcat) {
      TokenSeq all;
      for (const auto& ref : refs) all.insert(all.end(), ref.begin(), ref.end());
      refs_.push_back(std::move(all));
    } else {
      refs_.assign(refs.begin(), refs.end());
    }
  }

  RougeScore score(const TokenSeq& hyp) const {
    std::vector<RougeScore> per_ref;
    per_ref.reserve(refs_.size());
    for (const auto& ref : refs_) per_ref.push_back(detail::lcs_score(hyp, ref));
    return detail::combine(per_ref, mode_);
  }

 private:
  RefMode mode_;
  std::vector<TokenSeq> refs_;
};

inline RougeScore rouge_n(const TokenSeq& hyp, std::span<const TokenSeq> refs, std::size_t n,
                          RefMode mode = RefMode::kAverage) {
  return RougeNScorer(refs, n, mode).score(hyp);
}

inline RougeScore rouge_l(const TokenSeq& hyp, std::span<const TokenSeq> refs,
                          RefMode mode = RefMode::kAverage) {
  return RougeLScorer(refs, mode).score(hyp);
}

// Add-alpha smoothed n-gram model. The vocabulary is every training token plus
// any extra words supplied by the caller; for a fixed context the smoothed
// probabilities over that vocabulary sum to one. Tokens outside the vocabulary
// are scored as unseen events.
class NgramLM {
 public:
  NgramLM(std::span<const TokenSeq> corpus, std::size_t order = 1, double alpha = 1.0,
          std::span<const std::string> extra_vocab = {})
      : order_(order), alpha_(alpha) {
    if (order == 0) throw Error(ErrorKind::kInvalidArgument, "n-gram order must be >= 1");
    if (!(alpha > 0.0)) throw Error(ErrorKind::kInvalidArgument, "smoothing alpha must be > 0");
    std::unordered_set<std::string> vocab(extra_vocab.begin(), extra_vocab.end());
    std::size_t tokens_seen = 0;
    for (const auto& sentence : corpus) {
      for (std::size_t i = 0; i < sentence.size(); ++i) {
        vocab.insert(sentence[i]);
        auto& ctx = contexts_[context_key(sentence, i)];
        ++ctx.total;
        ++ctx.next[sentence[i]];
        ++tokens_seen;
      }
    }
    if (tokens_seen == 0) {
      throw Error(ErrorKind::kInvalidArgument, "language model needs a non-empty training corpus");
    }
    vocab_size_ = vocab.size();
  }

  std::size_t order() const { return order_; }
  std::size_t vocab_size() const { return vocab_size_; }
  double alpha() const { return alpha_; }

  // p(tokens[pos] | preceding order-1 tokens), with "<s>" padding at the start.
  double probability(const TokenSeq& tokens, std::size_t pos) const {
    double count = 0.0, total = 0.0;
    auto it = contexts_.find(context_key(tokens, pos));
    if (it != contexts_.end()) {
      total = static_cast<double>(it->second.total);
      auto w = it->second.next.find(tokens[pos]);
      if (w != it->second.next.end()) count = static_cast<double>(w->second);
    }
    return (count + alpha_) / (total + alpha_ * static_cast<double>(vocab_size_));
  }

 private:
  struct Context {
    std::size_t total = 0;
    std::unordered_map<std::string, std::size_t> next;
  };

  std::string context_key(const TokenSeq& tokens, std::size_t pos) const {
    std::string key;
    for (std::size_t k = order_ - 1; k > 0; --k) {
      key += (pos >= k) ? tokens[pos - k] : std::string("<s>");
      key.push_back('\x1f');
    }
    return key;
  }

  std::size_t order_;
  double alpha_;
  std::size_t vocab_size_ = 0;
  std::unordered_map<std::string, Context> contexts_;
};

// Negative log-likelihood of the text in nats.
inline double info_amount(const TokenSeq& text, const NgramLM& lm) {
  double nll = 0.0;
  for (std::size_t i = 0; i < text.size(); ++i) nll -= std::log(lm.probability(text, i));
  return nll;
}

namespace detail {

// 1-based ranks; tied values share the mean of the positions they occupy.
inline std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::kUndefinedCorrelation,
                "correlation needs two equal-length series of at least 2 values");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorKind::kUndefinedCorrelation, "correlation is undefined for a constant series");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::kUndefinedCorrelation, "spearman: series lengths differ");
  }
  const auto rx = detail::average_ranks(x);
  const auto ry = detail::average_ranks(y);
  return pearson(rx, ry);
}

namespace detail {

template <typename Gain>
double mean_rank_gain(std::span<const std::size_t> ranks, Gain gain) {
  if (ranks.empty()) throw Error(ErrorKind::kInvalidArgument, "ranking metric needs at least one rank");
  double sum = 0.0;
  for (std::size_t r : ranks) {
    if (r == 0) throw Error(ErrorKind::kInvalidArgument, "ranks are 1-based");
    sum += gain(static_cast<double>(r));
  }
  return sum / static_cast<double>(ranks.size());
}

}  // namespace detail

inline double mrr(std::span<const std::size_t> ranks) {
  return detail::mean_rank_gain(ranks, [](double r) { return 1.0 / r; });
}

// Single-relevant-item form: mean of 1 / log2(rank + 1).
inline double ndcg_rank(std::span<const std::size_t> ranks) {
  return detail::mean_rank_gain(ranks, [](double r) { return 1.0 / std::log2(r + 1.0); });
}

}  // namespace coop
