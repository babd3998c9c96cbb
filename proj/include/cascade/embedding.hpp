#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cascade {

// Fixed-length unit vector. Construction does not normalize; use
// EmbeddingVector::normalized for raw values.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<float> values)
      : values_(std::move(values)) {}

  static EmbeddingVector normalized(std::vector<double> raw);

  std::span<const float> values() const noexcept { return values_; }
  std::size_t dimension() const noexcept { return values_.size(); }
  double norm() const noexcept;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<float> values_;
};

// Dot product accumulated in double. Throws DimensionMismatch.
double dot(std::span<const float> a, std::span<const float> b);
double dot(const EmbeddingVector& a, const EmbeddingVector& b);

inline constexpr double kUnitNormTolerance = 1e-6;

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::string id() const = 0;

  // Must return a unit vector of dimension(); may throw ProviderError.
  virtual EmbeddingVector embed_raw(std::string_view text) const = 0;
};

// Deterministic hashing embedder. Each normalized token contributes a
// pseudo-random direction seeded from (seed, token); the whole normalized
// string adds a smaller component so that reordered phrases stay distinct.
// Equal normalized texts always map to bit-identical vectors, and texts
// sharing tokens get positive cosine similarity.
class StubEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit StubEmbeddingProvider(std::size_t dimension = 64,
                                 std::uint64_t seed = 0);

  std::size_t dimension() const override { return dimension_; }
  std::string id() const override;
  EmbeddingVector embed_raw(std::string_view text) const override;

 private:
  void accumulate(std::vector<double>& acc, std::string_view piece,
                  double weight) const;

  std::size_t dimension_;
  std::uint64_t seed_;
};

// Calls the provider and enforces the output contract (dimension and unit
// norm). Contract violations surface as ProviderError.
EmbeddingVector embed(std::string_view text, const EmbeddingProvider& provider);

}  // namespace cascade
