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

// Encoder/decoder contracts consumed by the search code, a deterministic toy
// bag-of-embeddings autoencoder, and the external latents reader.
//
// The toy model encodes a text as the SUM of its word embeddings, so the
// norm of a latent grows with the amount of content. Decoding emits the
// round(kappa * ||z||) vocabulary words best aligned with z. Averaging
// latents therefore shrinks the norm and shortens the decoded text, which is
// the degeneration behaviour the diagnostics measure.

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "coop/error.hpp"
#include "coop/latentspace.hpp"
#include "coop/textmetrics.hpp"

namespace coop {

template <typename D>
concept Decoder = requires(const D& d, const LatentVector& z) {
  { d.decode(z) } -> std::convertible_to<TokenSeq>;
};

template <typename E>
concept Encoder = requires(const E& e, const TokenSeq& text) {
  { e.encode(text) } -> std::convertible_to<LatentVector>;
  { e.dim() } -> std::convertible_to<std::size_t>;
};

inline std::vector<std::string> default_pronoun_blocklist() {
  return {"i", "my", "me", "mine", "we", "our", "us", "ourselves", "myself"};
}

struct ToyConfig {
  double kappa = 1.0;
  std::size_t max_len = 40;
  std::uint64_t seed = 0;
  bool block_pronouns = true;
  std::vector<std::string> blocklist = default_pronoun_blocklist();
};

class ToyAutoencoder {
 public:
  // Embeddings drawn from a seeded Gaussian and normalized to unit length.
  ToyAutoencoder(std::vector<std::string> vocab, std::size_t dim, ToyConfig config = {})
      : vocab_(std::move(vocab)), dim_(dim), config_(std::move(config)) {
    if (dim_ == 0) throw Error(ErrorKind::kInvalidArgument, "toy latent dimension must be >= 1");
    std::mt19937_64 rng(config_.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    embeddings_.reserve(vocab_.size());
    for (std::size_t w = 0; w < vocab_.size(); ++w) {
      std::vector<double> e(dim_);
      double norm = 0.0;
      while (norm == 0.0) {
        for (double& v : e) v = gauss(rng);
        norm = std::sqrt(dot(e, e));
      }
      for (double& v : e) v /= norm;
      embeddings_.push_back(std::move(e));
    }
    index_vocab();
  }

  // Caller-supplied embeddings, normalized to unit length.
  ToyAutoencoder(std::vector<std::string> vocab, std::vector<std::vector<double>> embeddings,
                 ToyConfig config = {})
      : vocab_(std::move(vocab)), embeddings_(std::move(embeddings)), config_(std::move(config)) {
    if (embeddings_.size() != vocab_.size()) {
      throw Error(ErrorKind::kInvalidArgument, "one embedding per vocabulary word is required");
    }
    dim_ = embeddings_.empty() ? 0 : embeddings_.front().size();
    if (dim_ == 0) throw Error(ErrorKind::kInvalidArgument, "toy latent dimension must be >= 1");
    for (auto& e : embeddings_) {
      if (e.size() != dim_) throw Error(ErrorKind::kDimensionMismatch, "ragged toy embeddings");
      const double norm = std::sqrt(dot(e, e));
      if (norm == 0.0) throw Error(ErrorKind::kInvalidArgument, "zero toy embedding");
      for (double& v : e) v /= norm;
    }
    index_vocab();
  }

  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  const std::vector<double>& embedding(std::size_t word) const { return embeddings_.at(word); }
  const ToyConfig& config() const { return config_; }

  LatentVector encode(const TokenSeq& text) const {
    std::vector<double> z(dim_, 0.0);
    for (const auto& token : text) {
      auto it = word_index_.find(token);
      if (it == word_index_.end()) continue;
      const auto& e = embeddings_[it->second];
      for (std::size_t k = 0; k < dim_; ++k) z[k] += e[k];
    }
    return LatentVector(std::move(z));
  }

  std::size_t output_length(const LatentVector& z) const {
    const double target = std::round(config_.kappa * l2_norm(z));
    return std::min(config_.max_len, static_cast<std::size_t>(std::max(0.0, target)));
  }

  TokenSeq decode(const LatentVector& z) const {
    if (z.dim() != dim_) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "decoder expects dimension " + std::to_string(dim_) + ", got " +
                      std::to_string(z.dim()));
    }
    const std::size_t m = std::min(output_length(z), allowed_.size());
    if (m == 0) return {};
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(allowed_.size());
    for (std::size_t w : allowed_) scored.emplace_back(dot(z.values, embeddings_[w]), w);
    auto better = [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(m), scored.end(),
                      better);
    TokenSeq out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) out.push_back(vocab_[scored[i].second]);
    return out;
  }

 private:
  void index_vocab() {
    const std::set<std::string> blocked(config_.blocklist.begin(), config_.blocklist.end());
    for (std::size_t w = 0; w < vocab_.size(); ++w) {
      if (!word_index_.emplace(vocab_[w], w).second) {
        throw Error(ErrorKind::kInvalidArgument, "duplicate vocabulary word '" + vocab_[w] + "'");
      }
      if (!config_.block_pronouns || !blocked.contains(vocab_[w])) allowed_.push_back(w);
    }
  }

  std::vector<std::string> vocab_;
  std::vector<std::vector<double>> embeddings_;
  std::size_t dim_ = 0;
  ToyConfig config_;
  std::unordered_map<std::string, std::size_t> word_index_;
  std::vector<std::size_t> allowed_;  // vocabulary indices the decoder may emit
};

// Vocabulary in first-appearance order over the given texts.
inline std::vector<std::string> build_vocab(std::span<const TokenSeq> texts) {
  std::vector<std::string> vocab;
  std::unordered_map<std::string, bool> seen;
  for (const auto& text : texts) {
    for (const auto& token : text) {
      if (seen.emplace(token, true).second) vocab.push_back(token);
    }
  }
  return vocab;
}

using ExternalLatents = std::map<std::string, std::vector<LatentVector>>;

namespace detail {

inline std::vector<std::vector<double>> read_matrix(const nlohmann::json& j, const char* field,
                                                    std::size_t line_no) {
  if (!j.is_array()) {
    throw Error(ErrorKind::kParse,
                "line " + std::to_string(line_no) + ": '" + field + "' must be an array of arrays");
  }
  std::vector<std::vector<double>> rows;
  for (const auto& row : j) {
    if (!row.is_array()) {
      throw Error(ErrorKind::kParse,
                  "line " + std::to_string(line_no) + ": '" + field + "' must be an array of arrays");
    }
    std::vector<double> values;
    values.reserve(row.size());
    for (const auto& v : row) {
      if (!v.is_number()) {
        throw Error(ErrorKind::kParse,
                    "line " + std::to_string(line_no) + ": non-numeric value in '" + field + "'");
      }
      values.push_back(v.get<double>());
    }
    rows.push_back(std::move(values));
  }
  return rows;
}

}  // namespace detail

// Reads {"entity_id", "vectors", "variances"?} lines. Repeated entity ids
// append to the same list. All vectors in the file must share one dimension.
inline ExternalLatents load_external_latents(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open latents file " + path);
  ExternalLatents out;
  std::size_t dim = 0;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("entity_id") || !j["entity_id"].is_string() ||
        !j.contains("vectors")) {
      throw Error(ErrorKind::kParse,
                  "line " + std::to_string(line_no) + ": expected {\"entity_id\", \"vectors\"}");
    }
    const auto id = j["entity_id"].get<std::string>();
    auto vectors = detail::read_matrix(j["vectors"], "vectors", line_no);
    std::vector<std::vector<double>> variances;
    const bool has_var = j.contains("variances") && !j["variances"].is_null();
    if (has_var) {
      variances = detail::read_matrix(j["variances"], "variances", line_no);
      if (variances.size() != vectors.size()) {
        throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": entity '" + id +
                                           "' has " + std::to_string(variances.size()) +
                                           " variances for " + std::to_string(vectors.size()) +
                                           " vectors");
      }
    }
    auto& list = out[id];
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      if (dim == 0) dim = vectors[i].size();
      if (vectors[i].size() != dim || dim == 0 || (has_var && variances[i].size() != dim)) {
        throw Error(ErrorKind::kDimensionMismatch,
                    "entity '" + id + "' (line " + std::to_string(line_no) + "): vector " +
                        std::to_string(i) + " has dimension " + std::to_string(vectors[i].size()) +
                        ", expected " + std::to_string(dim));
      }
      if (has_var) {
        list.emplace_back(std::move(vectors[i]), std::move(variances[i]));
      } else {
        list.emplace_back(std::move(vectors[i]));
      }
    }
  }
  return out;
}

}  // namespace coop
