#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kgbench/text.hpp"

namespace kgbench {

// Text -> R^d. Implementations must be deterministic: identical text yields
// an identical vector, and the output dimension never changes.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

// Deterministic bag-of-tokens embedder used for offline runs. Each token
// hashes to a bucket with a hash-derived sign, counts accumulate, and the
// result is L2-normalized. Texts that share tokens share components, so
// similar texts score high cosine while unrelated texts stay near zero.
// Empty text maps to the all-zero vector.
class HashingEmbedder : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dimension = 384, std::uint64_t seed = 0)
      : dimension_(dimension), seed_(seed) {}

  std::size_t dimension() const override { return dimension_; }

  std::vector<double> embed(std::string_view text) const override {
    std::vector<double> v(dimension_, 0.0);
    for (const std::string& token : tokenize(text)) {
      std::uint64_t h = fnv1a64(token, 0xcbf29ce484222325ULL ^ seed_);
      std::size_t bucket = static_cast<std::size_t>(h % dimension_);
      double sign = ((h >> 32) & 1) != 0 ? 1.0 : -1.0;
      v[bucket] += sign;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
    }
    return v;
  }

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

}  // namespace kgbench
