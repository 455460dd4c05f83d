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

// Seeded fixture generators.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "coop/diagnostics.hpp"
#include "coop/error.hpp"
#include "coop/latentspace.hpp"
#include "coop/pipeline.hpp"

namespace coop {

// Words are named "t<topic>w<index>". Each entity has a core topic; the
// first `on_topic_reviews` reviews draw from it and every other review draws
// from its own distinct off-topic vocabulary. Review order is shuffled. With
// on_topic_reviews == 0 every review of an entity has a disjoint vocabulary.
struct TopicCorpusOptions {
  std::size_t entities = 20;
  std::size_t reviews_per_entity = 8;
  std::size_t topics = 16;
  std::size_t words_per_topic = 12;
  std::size_t review_length = 10;
  std::size_t on_topic_reviews = 4;
  double pronoun_rate = 0.5;  // chance a review opens with a first-person pronoun
  bool gold = true;
  std::size_t gold_length = 8;
  std::uint64_t seed = 0;
};

inline std::string topic_word(std::size_t topic, std::size_t word) {
  return "t" + std::to_string(topic) + "w" + std::to_string(word);
}

inline std::vector<EntityBatch> make_topic_corpus(const TopicCorpusOptions& opt) {
  const std::size_t off_topic = opt.reviews_per_entity - std::min(opt.on_topic_reviews, opt.reviews_per_entity);
  if (opt.reviews_per_entity == 0 || opt.words_per_topic == 0 || opt.review_length == 0) {
    throw Error(ErrorKind::kInvalidArgument, "topic corpus sizes must be positive");
  }
  if (opt.topics < off_topic + 1) {
    throw Error(ErrorKind::kInvalidArgument, "not enough topics for disjoint off-topic reviews");
  }
  static const char* kPronouns[] = {"i", "my", "we"};
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> word(0, opt.words_per_topic - 1);
  std::uniform_int_distribution<std::size_t> pronoun(0, 2);
  std::bernoulli_distribution opens_with_pronoun(opt.pronoun_rate);

  auto sentence = [&](std::size_t topic, std::size_t length) {
    std::string text;
    for (std::size_t t = 0; t < length; ++t) {
      if (t) text.push_back(' ');
      text += topic_word(topic, word(rng));
    }
    return text;
  };

  std::vector<EntityBatch> out;
  for (std::size_t e = 0; e < opt.entities; ++e) {
    std::vector<std::size_t> topics(opt.topics);
    for (std::size_t t = 0; t < topics.size(); ++t) topics[t] = t;
    std::shuffle(topics.begin(), topics.end(), rng);
    const std::size_t core = topics[0];

    EntityBatch b;
    b.entity_id = "e" + std::to_string(e);
    for (std::size_t r = 0; r < opt.reviews_per_entity; ++r) {
      const std::size_t topic = r < opt.on_topic_reviews ? core : topics[1 + r - (opt.reviews_per_entity - off_topic)];
      std::string text = sentence(topic, opt.review_length);
      if (opens_with_pronoun(rng)) text = std::string(kPronouns[pronoun(rng)]) + " " + text;
      b.reviews.push_back(std::move(text));
    }
    std::shuffle(b.reviews.begin(), b.reviews.end(), rng);
    if (opt.gold) b.gold_summaries.push_back(sentence(core, opt.gold_length));
    out.push_back(std::move(b));
  }
  return out;
}

// Entities whose latents are i.i.d. standard Gaussian vectors.
inline std::vector<EntityData> make_iid_latents(std::size_t entities, std::size_t reviews, std::size_t dim,
                                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<EntityData> out(entities);
  for (std::size_t e = 0; e < entities; ++e) {
    out[e].id = "e" + std::to_string(e);
    for (std::size_t r = 0; r < reviews; ++r) {
      std::vector<double> v(dim);
      for (double& x : v) x = gauss(rng);
      out[e].latents.emplace_back(std::move(v));
    }
  }
  return out;
}

}  // namespace coop
