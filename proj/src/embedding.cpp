#include "cascade/embedding.hpp"

#include <cmath>

#include "cascade/digest.hpp"
#include "cascade/errors.hpp"
#include "cascade/text.hpp"

namespace cascade {

EmbeddingVector EmbeddingVector::normalized(std::vector<double> raw) {
  double sq = 0.0;
  for (double v : raw) sq += v * v;
  if (!(sq > 0.0) || !std::isfinite(sq)) {
    throw ProviderError("cannot normalize a zero or non-finite vector");
  }
  const double inv = 1.0 / std::sqrt(sq);
  std::vector<float> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = static_cast<float>(raw[i] * inv);
  }
  return EmbeddingVector(std::move(out));
}

double EmbeddingVector::norm() const noexcept {
  double sq = 0.0;
  for (float v : values_) sq += static_cast<double>(v) * v;
  return std::sqrt(sq);
}

double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * b[i];
  }
  return s;
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  return dot(a.values(), b.values());
}

StubEmbeddingProvider::StubEmbeddingProvider(std::size_t dimension,
                                             std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension_ == 0) throw InvalidInput("embedding dimension must be >= 1");
}

std::string StubEmbeddingProvider::id() const {
  return "stub-hash/d" + std::to_string(dimension_) + "/s" +
         std::to_string(seed_);
}

void StubEmbeddingProvider::accumulate(std::vector<double>& acc,
                                       std::string_view piece,
                                       double weight) const {
  SplitMix64 rng(seed_ ^ fnv1a64(piece));
  for (auto& v : acc) v += weight * (2.0 * rng.uniform() - 1.0);
}

EmbeddingVector StubEmbeddingProvider::embed_raw(std::string_view text) const {
  const std::string norm = normalize_text(text);
  std::vector<double> acc(dimension_, 0.0);
  std::size_t start = 0;
  while (start < norm.size()) {
    auto end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    accumulate(acc, std::string_view(norm).substr(start, end - start), 1.0);
    start = end + 1;
  }
  // Salted so a one-word text does not get its token vector twice.
  accumulate(acc, "\x01" + norm, 0.5);
  return EmbeddingVector::normalized(std::move(acc));
}

EmbeddingVector embed(std::string_view text, const EmbeddingProvider& provider) {
  EmbeddingVector v = provider.embed_raw(text);
  if (v.dimension() != provider.dimension()) {
    throw ProviderError("provider " + provider.id() + " returned dimension " +
                        std::to_string(v.dimension()));
  }
  for (float x : v.values()) {
    if (!std::isfinite(x)) {
      throw ProviderError("provider " + provider.id() +
                          " returned a non-finite component");
    }
  }
  if (std::abs(v.norm() - 1.0) > kUnitNormTolerance) {
    throw ProviderError("provider " + provider.id() +
                        " returned a non-unit vector");
  }
  return v;
}

}  // namespace cascade
