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

#include <filesystem>
#include <fstream>
#include <random>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace coop {
namespace {

namespace fs = std::filesystem;

std::vector<std::vector<double>> identity(std::size_t d) {
  std::vector<std::vector<double>> e(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) e[i][i] = 1.0;
  return e;
}

ToyConfig unblocked(double kappa = 1.0) {
  ToyConfig c;
  c.kappa = kappa;
  c.block_pronouns = false;
  return c;
}

TEST(ToyEncode, OrthogonalEmbeddings) {
  const ToyAutoencoder m({"a", "b", "c"}, identity(3), unblocked());
  EXPECT_DOUBLE_EQ(l2_norm(m.encode({"a"})), 1.0);
  EXPECT_DOUBLE_EQ(l2_norm(m.encode({"a", "b"})), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(l2_norm(m.encode({"a", "a"})), 2.0);
  EXPECT_DOUBLE_EQ(l2_norm(m.encode({"oov", "zzz"})), 0.0);
  EXPECT_DOUBLE_EQ(l2_norm(m.encode({})), 0.0);
  EXPECT_EQ(m.encode({"a", "oov"}), m.encode({"a"}));
}

TEST(ToyDecode, ArgmaxAndEmpty) {
  const ToyAutoencoder m({"a", "b", "c"}, identity(3), unblocked());
  EXPECT_EQ(m.decode(m.encode({"a"})), (TokenSeq{"a"}));
  EXPECT_TRUE(m.decode(LatentVector({0, 0, 0})).empty());
  EXPECT_THROW(m.decode(LatentVector({1, 0})), Error);
}

TEST(ToyDecode, LengthRuleAndTieBreakByVocabularyOrder) {
  const ToyAutoencoder m({"a", "b", "c"}, identity(3), unblocked());
  // b and c tie; with ||z|| = 1 only one word is emitted and b wins on
  // vocabulary order. With ||z|| = 2 both are emitted.
  const double h = std::sqrt(0.5);
  EXPECT_EQ(m.decode(LatentVector({0.0, h, h})), (TokenSeq{"b"}));
  const LatentVector scaled({0.0, 2 * h, 2 * h});
  EXPECT_EQ(m.decode(scaled), (TokenSeq{"b", "c"}));
  const ToyAutoencoder capped({"a", "b", "c"}, identity(3), [] {
    ToyConfig c;
    c.block_pronouns = false;
    c.max_len = 1;
    return c;
  }());
  EXPECT_EQ(capped.decode(scaled).size(), 1u);
}

TEST(ToyDecode, PronounBlocking) {
  // "my" on axis 0, "good" leans toward it, "food" is orthogonal.
  const double h = std::sqrt(0.5);
  const ToyAutoencoder m({"my", "good", "food"}, {{1, 0, 0}, {h, h, 0}, {0, 0, 1}}, ToyConfig{});
  const auto out = m.decode(LatentVector({1, 0, 0}));
  EXPECT_EQ(out, (TokenSeq{"good"}));
  ToyConfig off = unblocked();
  const ToyAutoencoder free_model({"my", "good", "food"}, {{1, 0, 0}, {h, h, 0}, {0, 0, 1}}, off);
  EXPECT_EQ(free_model.decode(LatentVector({1, 0, 0})), (TokenSeq{"my"}));
}

TEST(ToyDecode, BlockingHoldsOnFuzzedVectors) {
  std::vector<std::string> vocab = default_pronoun_blocklist();
  for (int i = 0; i < 40; ++i) vocab.push_back("w" + std::to_string(i));
  ToyConfig cfg;
  cfg.kappa = 3.0;
  const ToyAutoencoder m(vocab, 16, cfg);
  const auto blocked = default_pronoun_blocklist();
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> v(16);
    for (auto& x : v) x = g(rng);
    // Every third vector points straight at a pronoun embedding.
    if (t % 3 == 0) v = m.embedding(t % blocked.size());
    for (const auto& w : m.decode(LatentVector(v))) {
      ASSERT_EQ(std::find(blocked.begin(), blocked.end(), w), blocked.end()) << w;
    }
  }
}

TEST(ToyAutoencoder, SeededEmbeddingsAreUnitAndReproducible) {
  const auto vocab = oracle::toy_vocab(50);
  ToyConfig cfg;
  cfg.seed = 99;
  const ToyAutoencoder a(vocab, 32, cfg), b(vocab, 32, cfg);
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    EXPECT_NEAR(std::sqrt(dot(a.embedding(w), a.embedding(w))), 1.0, 1e-9);
    EXPECT_EQ(a.embedding(w), b.embedding(w));
  }
  cfg.seed = 100;
  const ToyAutoencoder c(vocab, 32, cfg);
  EXPECT_NE(a.embedding(0), c.embedding(0));
  EXPECT_THROW(ToyAutoencoder({"x", "x"}, 4), Error);
  EXPECT_THROW(ToyAutoencoder({"x"}, 0), Error);
}

TEST(ToyDecode, DeterministicAndMonotoneInNorm) {
  const ToyAutoencoder m(oracle::toy_vocab(60), 24, unblocked(2.0));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.0, 6.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> v(24);
    for (auto& x : v) x = g(rng);
    const LatentVector z1(v);
    EXPECT_EQ(m.decode(z1), m.decode(z1));
    std::vector<double> w(24);
    for (auto& x : w) x = g(rng) * scale(rng);
    const LatentVector z2(w);
    const auto& [lo, hi] = l2_norm(z1) < l2_norm(z2) ? std::pair{&z1, &z2} : std::pair{&z2, &z1};
    ASSERT_LE(m.decode(*lo).size(), m.decode(*hi).size());
  }
}

TEST(ToyAutoencoder, AveragingDisjointTopicsShortensDecodes) {
  TopicCorpusOptions opt;
  opt.entities = 1000;
  opt.on_topic_reviews = 0;
  opt.seed = 123;
  const auto corpus = make_topic_corpus(opt);
  std::vector<TokenSeq> texts;
  for (const auto& b : corpus) {
    for (const auto& r : b.reviews) texts.push_back(tokenize(r));
  }
  ToyConfig cfg;
  cfg.kappa = 2.0;
  cfg.seed = 1;
  const ToyAutoencoder m(build_vocab(texts), 64, cfg);

  std::vector<double> mean_len(9, 0.0);
  std::size_t shorter = 0;
  for (const auto& b : corpus) {
    std::vector<LatentVector> zs;
    for (const auto& r : b.reviews) zs.push_back(m.encode(tokenize(r)));
    std::vector<std::size_t> len(9);
    for (std::size_t n = 1; n <= 8; ++n) {
      len[n] = m.decode(simple_average(std::span(zs).first(n))).size();
      mean_len[n] += static_cast<double>(len[n]) / static_cast<double>(corpus.size());
    }
    shorter += len[8] < len[1];
  }
  for (std::size_t n = 2; n <= 8; ++n) EXPECT_LE(mean_len[n], mean_len[n - 1]) << n;
  EXPECT_GE(shorter, 900u);
}

class ExternalLatentsTest : public testing::Test {
 protected:
  fs::path write(const std::string& name, const std::string& body) {
    const auto p = fs::temp_directory_path() / ("coop_latents_" + name + ".jsonl");
    std::ofstream(p) << body;
    paths_.push_back(p);
    return p;
  }
  void TearDown() override {
    for (const auto& p : paths_) fs::remove(p);
  }
  std::vector<fs::path> paths_;
};

TEST_F(ExternalLatentsTest, ReadsOneEntity) {
  json vectors = json::array();
  for (int i = 0; i < 8; ++i) vectors.push_back(std::vector<double>(512, i * 0.5));
  const auto p = write("one", json{{"entity_id", "e1"}, {"vectors", vectors}}.dump() + "\n");
  const auto m = load_external_latents(p.string());
  ASSERT_EQ(m.size(), 1u);
  ASSERT_EQ(m.at("e1").size(), 8u);
  EXPECT_EQ(m.at("e1")[3].dim(), 512u);
  EXPECT_DOUBLE_EQ(m.at("e1")[3].values[0], 1.5);
  EXPECT_FALSE(m.at("e1")[0].variance.has_value());
}

TEST_F(ExternalLatentsTest, EmptyFileAndVariances) {
  EXPECT_TRUE(load_external_latents(write("empty", "").string()).empty());
  const auto p = write("var", R"({"entity_id":"x","vectors":[[1,2],[3,4]],"variances":[[0.5,0.5],[1,2]]})"
                              "\n");
  const auto m = load_external_latents(p.string());
  EXPECT_EQ(*m.at("x")[1].variance, (std::vector<double>{1, 2}));
}

TEST_F(ExternalLatentsTest, RaggedDimensionNamesEntity) {
  const std::string line1 = json{{"entity_id", "good"}, {"vectors", {std::vector<double>(512, 0.1)}}}.dump();
  const std::string line2 = json{{"entity_id", "ragged"},
                                 {"vectors", {std::vector<double>(512, 0.1), std::vector<double>(511, 0.1)}}}
                                .dump();
  try {
    load_external_latents(write("ragged", line1 + "\n" + line2 + "\n").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimensionMismatch);
    EXPECT_NE(std::string(e.what()).find("ragged"), std::string::npos);
  }
}

TEST_F(ExternalLatentsTest, MalformedLineReportsLineNumber) {
  try {
    load_external_latents(write("bad", "{\"entity_id\":\"a\",\"vectors\":[[1]]}\n{oops\n").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(load_external_latents("/nonexistent/latents.jsonl"), Error);
}

}  // namespace
}  // namespace coop
