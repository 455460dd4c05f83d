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

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace coop {
namespace {

using Seqs = std::vector<TokenSeq>;

TEST(Tokenize, CasefoldsAndSplitsOnPunctuation) {
  EXPECT_EQ(tokenize("The cat, the CAT!"), (TokenSeq{"the", "cat", "the", "cat"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("it's 5-star"), (TokenSeq{"it", "s", "5", "star"}));
  EXPECT_TRUE(tokenize(" ,.;!? ").empty());
}

TEST(Tokenize, KeepsUtf8Words) {
  EXPECT_EQ(tokenize("Caf\xc3\xa9 ok"), (TokenSeq{"caf\xc3\xa9", "ok"}));
}

TEST(RougeN, WorkedUnigramExample) {
  const auto s = rouge_n({"the", "cat", "sat"}, Seqs{{"the", "cat", "ran"}}, 1);
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 2.0 / 3.0);
  EXPECT_NEAR(s.f1, 0.6667, 1e-4);
}

TEST(RougeN, IdentityAndDisjoint) {
  const TokenSeq ref{"good", "food", "good", "service"};
  for (std::size_t n = 1; n <= ref.size(); ++n) EXPECT_DOUBLE_EQ(rouge_n(ref, Seqs{ref}, n).f1, 1.0);
  EXPECT_DOUBLE_EQ(rouge_n({"a", "b"}, Seqs{{"c", "d"}}, 1).f1, 0.0);
}

TEST(RougeN, ClipsRepeatedMatches) {
  // "the" appears three times in hyp but once in ref.
  const auto s = rouge_n({"the", "the", "the"}, Seqs{{"the", "cat"}}, 1);
  EXPECT_DOUBLE_EQ(s.precision, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
}

TEST(RougeN, EmptyHypothesisScoresZeroEmptyRefsThrow) {
  EXPECT_DOUBLE_EQ(rouge_n({}, Seqs{{"a"}}, 1).f1, 0.0);
  EXPECT_THROW(rouge_n({"a"}, Seqs{}, 1), Error);
  EXPECT_THROW(rouge_n({"a"}, Seqs{{"a"}}, 0), Error);
}

TEST(RougeN, OrderLongerThanBothSequencesIsZero) {
  EXPECT_DOUBLE_EQ(rouge_n({"a", "b"}, Seqs{{"a", "b"}}, 3).f1, 0.0);
}

TEST(RougeN, MultiReferenceModes) {
  const Seqs refs{{"a", "b"}, {"c", "d"}};
  const TokenSeq hyp{"a", "b"};
  EXPECT_DOUBLE_EQ(rouge_n(hyp, refs, 1, RefMode::kAverage).f1, 0.5);
  EXPECT_DOUBLE_EQ(rouge_n(hyp, refs, 1, RefMode::kMax).f1, 1.0);
  // Against the pooled 4 reference unigrams: P = 1, R = 0.5.
  const auto pooled = rouge_n(hyp, refs, 1, RefMode::kConcat);
  EXPECT_DOUBLE_EQ(pooled.precision, 1.0);
  EXPECT_DOUBLE_EQ(pooled.recall, 0.5);
  EXPECT_DOUBLE_EQ(pooled.f1, 2.0 / 3.0);
}

TEST(RougeN, SwappingSingleReferenceSwapsPrecisionAndRecall) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = oracle::random_tokens(rng, 20, 5);
    const auto b = oracle::random_tokens(rng, 20, 5);
    for (std::size_t n = 1; n <= 2; ++n) {
      const auto ab = rouge_n(a, Seqs{b}, n);
      const auto ba = rouge_n(b, Seqs{a}, n);
      EXPECT_DOUBLE_EQ(ab.precision, ba.recall);
      EXPECT_DOUBLE_EQ(ab.recall, ba.precision);
      EXPECT_DOUBLE_EQ(ab.f1, ba.f1);
    }
  }
}

TEST(RougeL, WorkedLcsExample) {
  const auto s = rouge_l({"a", "b", "c", "d"}, Seqs{{"a", "c", "b", "d"}});
  EXPECT_EQ(oracle::lcs({"a", "b", "c", "d"}, {"a", "c", "b", "d"}), 3u);
  EXPECT_DOUBLE_EQ(s.precision, 0.75);
  EXPECT_DOUBLE_EQ(s.recall, 0.75);
  EXPECT_DOUBLE_EQ(s.f1, 0.75);
}

TEST(RougeL, IdentityNoOverlapAndErrors) {
  EXPECT_DOUBLE_EQ(rouge_l({"x", "y"}, Seqs{{"x", "y"}}).f1, 1.0);
  EXPECT_DOUBLE_EQ(rouge_l({"x"}, Seqs{{"a", "b"}}).f1, 0.0);
  EXPECT_THROW(rouge_l({"x"}, Seqs{}), Error);
}

TEST(Rouge, MatchesOraclesOnRandomPairs) {
  std::mt19937_64 rng(2026);
  for (int trial = 0; trial < 500; ++trial) {
    const auto hyp = oracle::random_tokens(rng, 30, 6);
    const auto ref = oracle::random_tokens(rng, 30, 6);
    for (std::size_t n = 1; n <= 3; ++n) {
      const auto got = rouge_n(hyp, Seqs{ref}, n);
      const auto want = oracle::rouge_n(hyp, ref, n);
      ASSERT_NEAR(got.precision, want.p, 1e-12);
      ASSERT_NEAR(got.recall, want.r, 1e-12);
      ASSERT_NEAR(got.f1, want.f, 1e-12);
      ASSERT_GE(got.f1, 0.0);
      ASSERT_LE(got.f1, 1.0);
    }
    const auto got = rouge_l(hyp, Seqs{ref});
    const auto want = oracle::rouge_l(hyp, ref);
    ASSERT_NEAR(got.f1, want.f, 1e-12);
  }
}

TEST(NgramLM, WorkedUnigramInformationAmount) {
  const Seqs corpus{{"a", "a", "b"}};
  const NgramLM lm(corpus);
  EXPECT_EQ(lm.vocab_size(), 2u);
  EXPECT_DOUBLE_EQ(lm.probability({"a"}, 0), 0.6);
  EXPECT_DOUBLE_EQ(lm.probability({"b"}, 0), 0.4);
  EXPECT_NEAR(info_amount({"a", "b"}, lm), 1.4271, 1e-4);
  EXPECT_NEAR(info_amount({"a", "b"}, lm), -std::log(0.6) - std::log(0.4), 1e-12);
  EXPECT_DOUBLE_EQ(info_amount({}, lm), 0.0);
}

TEST(NgramLM, AppendingATokenIncreasesInformation) {
  const Seqs corpus{{"a", "b", "c", "a"}, {"b", "b"}};
  const NgramLM lm(corpus, 2);
  TokenSeq text;
  double prev = info_amount(text, lm);
  for (const char* w : {"a", "b", "zzz", "c", "a"}) {
    text.push_back(w);
    const double cur = info_amount(text, lm);
    EXPECT_GT(cur, prev);
    prev = cur;
  }
}

TEST(NgramLM, ProbabilitiesSumToOneAtEveryContext) {
  const Seqs corpus{{"a", "b", "c", "a", "b"}, {"c", "c", "a"}};
  const std::vector<std::string> extra{"d"};
  for (std::size_t order : {1u, 2u, 3u}) {
    const NgramLM lm(corpus, order, 0.5, extra);
    ASSERT_EQ(lm.vocab_size(), 4u);
    for (const TokenSeq& ctx : {TokenSeq{}, TokenSeq{"a"}, TokenSeq{"c", "a"}, TokenSeq{"d", "d"}}) {
      double sum = 0.0;
      for (const char* w : {"a", "b", "c", "d"}) {
        TokenSeq t = ctx;
        t.push_back(w);
        const double p = lm.probability(t, t.size() - 1);
        EXPECT_GT(p, 0.0);
        EXPECT_LT(p, 1.0);
        sum += p;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(NgramLM, RejectsBadConfiguration) {
  EXPECT_THROW(NgramLM(Seqs{}), Error);
  EXPECT_THROW(NgramLM(Seqs{{}}), Error);
  EXPECT_THROW(NgramLM(Seqs{{"a"}}, 0), Error);
  EXPECT_THROW(NgramLM(Seqs{{"a"}}, 1, 0.0), Error);
}

TEST(Spearman, Examples) {
  const std::vector<double> x{1, 2, 3};
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{10, 20, 30}), 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{3, 2, 1}), -1.0);
  // Average ranks (1, 2.5, 2.5, 4) vs (1, 3, 2, 4): 4.5 / sqrt(4.5 * 5).
  EXPECT_NEAR(spearman(std::vector<double>{1, 2, 2, 4}, std::vector<double>{1, 3, 2, 4}),
              0.9486832980505138, 1e-12);
}

TEST(Spearman, UndefinedCases) {
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), Error);
  EXPECT_THROW(spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), Error);
  EXPECT_THROW(spearman(std::vector<double>{1}, std::vector<double>{1}), Error);
  try {
    spearman(std::vector<double>{2, 2}, std::vector<double>{1, 2});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUndefinedCorrelation);
  }
}

TEST(Spearman, MatchesBruteForceOnRandomInputs) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(2, 50), val(0, 9);
  int checked = 0;
  while (checked < 300) {
    const int n = len(rng);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = val(rng);
      y[i] = val(rng);
    }
    const auto cx = std::count(x.begin(), x.end(), x[0]) == n;
    const auto cy = std::count(y.begin(), y.end(), y[0]) == n;
    if (cx || cy) continue;
    const double r = spearman(x, y);
    ASSERT_NEAR(r, oracle::spearman(x, y), 1e-12);
    ASSERT_GE(r, -1.0);
    ASSERT_LE(r, 1.0);
    ++checked;
  }
}

TEST(RankingMetrics, Examples) {
  const std::vector<std::size_t> ones{1, 1, 1};
  EXPECT_DOUBLE_EQ(mrr(ones), 1.0);
  EXPECT_NEAR(mrr(std::vector<std::size_t>{1, 2, 4}), 0.58333, 1e-5);
  EXPECT_DOUBLE_EQ(ndcg_rank(std::vector<std::size_t>{1}), 1.0);
  EXPECT_DOUBLE_EQ(ndcg_rank(std::vector<std::size_t>{3}), 0.5);
  EXPECT_THROW(mrr(std::vector<std::size_t>{}), Error);
  EXPECT_THROW(ndcg_rank(std::vector<std::size_t>{}), Error);
  EXPECT_THROW(mrr(std::vector<std::size_t>{0}), Error);
}

TEST(RankingMetrics, UniformRanksOver255Candidates) {
  // Exact expectation by enumerating every rank once.
  std::vector<std::size_t> all(255);
  for (std::size_t r = 0; r < all.size(); ++r) all[r] = r + 1;
  EXPECT_NEAR(mrr(all), 0.0240017204, 1e-9);
  EXPECT_NEAR(ndcg_rank(all), 0.1640719738, 1e-9);
}

TEST(RankingMetrics, MonotoneWhenARankGrows) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> rank(1, 255), pos(0, 9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> r(10);
    for (auto& v : r) v = rank(rng);
    auto worse = r;
    worse[pos(rng)] += 1 + rank(rng);
    EXPECT_LE(mrr(worse), mrr(r));
    EXPECT_LE(ndcg_rank(worse), ndcg_rank(r));
  }
}

}  // namespace
}  // namespace coop
