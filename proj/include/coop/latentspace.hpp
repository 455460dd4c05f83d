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

// Latent-vector algebra used by every aggregator: norms, averages, convex
// combinations over the review simplex, power-set enumeration, inverse
// variance weighting and re-scaling. Arithmetic is carried out in double.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coop/error.hpp"

namespace coop {

struct LatentVector {
  std::vector<double> values;
  // Diagonal posterior variance (sigma^2), one entry per dimension.
  std::optional<std::vector<double>> variance;

  LatentVector() = default;
  explicit LatentVector(std::vector<double> v) : values(std::move(v)) {}
  LatentVector(std::vector<double> v, std::vector<double> var)
      : values(std::move(v)), variance(std::move(var)) {}

  std::size_t dim() const { return values.size(); }

  friend bool operator==(const LatentVector&, const LatentVector&) = default;
};

inline constexpr double kWeightSumTolerance = 1e-9;
inline constexpr std::size_t kDefaultMaxExactN = 16;
// Subsets are stored as 64-bit masks in the exhaustive code paths.
inline constexpr std::size_t kMaxMaskBits = 63;

inline double l2_norm(const LatentVector& z) {
  double sum = 0.0;
  for (double v : z.values) sum += v * v;
  return std::sqrt(sum);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

namespace detail {

inline std::size_t common_dim(std::span<const LatentVector> zs) {
  if (zs.empty()) throw Error(ErrorKind::kInvalidArgument, "no latent vectors given");
  const std::size_t d = zs.front().dim();
  if (d == 0) throw Error(ErrorKind::kDimensionMismatch, "latent vectors must have dimension >= 1");
  for (std::size_t i = 1; i < zs.size(); ++i) {
    if (zs[i].dim() != d) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "latent vector " + std::to_string(i) + " has dimension " +
                      std::to_string(zs[i].dim()) + ", expected " + std::to_string(d));
    }
  }
  return d;
}

}  // namespace detail

// Nonnegative weights over the input reviews summing to one.
class ConvexWeights {
 public:
  explicit ConvexWeights(std::vector<double> weights) : weights_(std::move(weights)) {
    validate();
  }

  // Divides by the sum first; the only entry point that repairs the total.
  static ConvexWeights normalized(std::vector<double> raw) {
    double sum = 0.0;
    for (double w : raw) {
      if (!(w >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "convex weights must be nonnegative");
      sum += w;
    }
    if (!(sum > 0.0)) throw Error(ErrorKind::kInvalidArgument, "convex weights sum to zero");
    for (double& w : raw) w /= sum;
    return ConvexWeights(std::move(raw));
  }

  static ConvexWeights uniform_on(std::span<const std::size_t> indices, std::size_t n) {
    std::vector<double> w(n, 0.0);
    for (std::size_t i : indices) w.at(i) = 1.0 / static_cast<double>(indices.size());
    return ConvexWeights(std::move(w));
  }

  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }

 private:
  void validate() const {
    if (weights_.empty()) throw Error(ErrorKind::kInvalidArgument, "convex weights are empty");
    double sum = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "convex weights must be nonnegative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
      throw Error(ErrorKind::kInvalidArgument,
                  "convex weights sum to " + std::to_string(sum) + ", expected 1");
    }
  }

  std::vector<double> weights_;
};

// A non-empty set of review indices, kept sorted ascending.
class SubsetSelection {
 public:
  SubsetSelection(std::vector<std::size_t> indices, std::size_t universe)
      : indices_(std::move(indices)), universe_(universe) {
    std::sort(indices_.begin(), indices_.end());
    if (indices_.empty()) throw Error(ErrorKind::kInvalidArgument, "subset selection is empty");
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
      throw Error(ErrorKind::kInvalidArgument, "subset selection has duplicate indices");
    }
    if (indices_.back() >= universe_) {
      throw Error(ErrorKind::kInvalidArgument,
                  "subset index " + std::to_string(indices_.back()) + " out of range for " +
                      std::to_string(universe_) + " reviews");
    }
  }

  static SubsetSelection from_mask(std::uint64_t mask, std::size_t universe) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < 64; ++i) {
      if (mask >> i & 1U) idx.push_back(i);
    }
    return SubsetSelection(std::move(idx), universe);
  }

  static SubsetSelection all(std::size_t universe) {
    std::vector<std::size_t> idx(universe);
    for (std::size_t i = 0; i < universe; ++i) idx[i] = i;
    return SubsetSelection(std::move(idx), universe);
  }

  const std::vector<std::size_t>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  std::size_t universe() const { return universe_; }
  bool contains(std::size_t i) const {
    return std::binary_search(indices_.begin(), indices_.end(), i);
  }

  std::uint64_t mask() const {
    if (universe_ > kMaxMaskBits) {
      throw Error(ErrorKind::kSearchSpaceTooLarge, "bitmask form needs at most 63 reviews");
    }
    std::uint64_t m = 0;
    for (std::size_t i : indices_) m |= std::uint64_t{1} << i;
    return m;
  }

  friend bool operator==(const SubsetSelection&, const SubsetSelection&) = default;

 private:
  std::vector<std::size_t> indices_;
  std::size_t universe_;
};

// Ascending-bitmask order without materializing the mask: the set holding the
// highest differing index is the larger one.
inline bool bitmask_less(const SubsetSelection& a, const SubsetSelection& b) {
  const auto& x = a.indices();
  const auto& y = b.indices();
  return std::lexicographical_compare(x.rbegin(), x.rend(), y.rbegin(), y.rend());
}

inline LatentVector subset_average(std::span<const LatentVector> zs, const SubsetSelection& s) {
  const std::size_t d = detail::common_dim(zs);
  if (s.universe() != zs.size()) {
    throw Error(ErrorKind::kInvalidArgument, "subset universe does not match the number of vectors");
  }
  const double w = 1.0 / static_cast<double>(s.size());
  std::vector<double> out(d, 0.0);
  for (std::size_t i : s.indices()) {
    for (std::size_t k = 0; k < d; ++k) out[k] += w * zs[i].values[k];
  }
  return LatentVector(std::move(out));
}

// simple_average, subset_average and convex_combine share one accumulation
// order (sum of w_i * z_i in index order), so a uniform weighting gives
// bit-identical vectors through any of the three.
inline LatentVector simple_average(std::span<const LatentVector> zs) {
  detail::common_dim(zs);
  return subset_average(zs, SubsetSelection::all(zs.size()));
}

inline LatentVector convex_combine(std::span<const LatentVector> zs, const ConvexWeights& w) {
  const std::size_t d = detail::common_dim(zs);
  if (w.size() != zs.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "got " + std::to_string(w.size()) + " weights for " + std::to_string(zs.size()) +
                    " vectors");
  }
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (w[i] == 0.0) continue;
    for (std::size_t k = 0; k < d; ++k) out[k] += w[i] * zs[i].values[k];
  }
  return LatentVector(std::move(out));
}

// Lazily yields the 2^n - 1 non-empty subsets of {0..n-1} in ascending
// bitmask order.
class SubsetRange {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = SubsetSelection;
    using difference_type = std::ptrdiff_t;
    using reference = SubsetSelection;
    using pointer = void;

    iterator() = default;
    iterator(std::uint64_t mask, std::size_t n) : mask_(mask), n_(n) {}

    SubsetSelection operator*() const { return SubsetSelection::from_mask(mask_, n_); }
    std::uint64_t mask() const { return mask_; }
    iterator& operator++() {
      ++mask_;
      return *this;
    }
    iterator operator++(int) {
      auto copy = *this;
      ++mask_;
      return copy;
    }
    friend bool operator==(const iterator& a, const iterator& b) { return a.mask_ == b.mask_; }

   private:
    std::uint64_t mask_ = 0;
    std::size_t n_ = 0;
  };

  explicit SubsetRange(std::size_t n) : n_(n) {}

  iterator begin() const { return {1, n_}; }
  iterator end() const { return {std::uint64_t{1} << n_, n_}; }
  std::uint64_t size() const { return (std::uint64_t{1} << n_) - 1; }

 private:
  std::size_t n_;
};

inline SubsetRange enumerate_subsets(std::size_t n, std::size_t max_exact_n = kDefaultMaxExactN) {
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "cannot enumerate subsets of zero reviews");
  if (n > max_exact_n || n > kMaxMaskBits) {
    throw Error(ErrorKind::kSearchSpaceTooLarge,
                std::to_string(n) + " reviews exceed max_exact_n=" + std::to_string(max_exact_n) +
                    "; use greedy or beam search instead");
  }
  return SubsetRange(n);
}

// Per-dimension weights sigma^{-1} = variance^{-1/2}, normalized per dimension.
inline LatentVector inverse_variance_weighting(std::span<const LatentVector> zs) {
  const std::size_t d = detail::common_dim(zs);
  std::vector<double> num(d, 0.0), den(d, 0.0);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (!zs[i].variance) {
      throw Error(ErrorKind::kMissingData,
                  "inverse-variance weighting: vector " + std::to_string(i) + " has no variance");
    }
    const auto& var = *zs[i].variance;
    if (var.size() != d) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "variance of vector " + std::to_string(i) + " has the wrong dimension");
    }
    for (std::size_t k = 0; k < d; ++k) {
      if (!(var[k] > 0.0)) {
        throw Error(ErrorKind::kInvalidArgument,
                    "inverse-variance weighting: nonpositive variance in vector " + std::to_string(i));
      }
      const double w = 1.0 / std::sqrt(var[k]);
      num[k] += w * zs[i].values[k];
      den[k] += w;
    }
  }
  for (std::size_t k = 0; k < d; ++k) num[k] /= den[k];
  return LatentVector(std::move(num));
}

inline LatentVector rescale(const LatentVector& z, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::kInvalidArgument, "rescale factor must be positive");
  const double norm = l2_norm(z);
  if (norm == 0.0) throw Error(ErrorKind::kInvalidArgument, "cannot rescale a zero vector");
  std::vector<double> out(z.values);
  for (double& v : out) v = alpha * v / norm;
  return LatentVector(std::move(out));
}

}  // namespace coop
