#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cascade/embedding.hpp"
#include "cascade/types.hpp"

namespace cascade {

// Keyword entries with one unit embedding per entry, stored row-major.
// Immutable once built; safe for concurrent reads.
class KeywordCorpus {
 public:
  KeywordCorpus() = default;

  // Adopts precomputed rows (e.g. loaded from artifacts). Validates shape,
  // id uniqueness and unit norms.
  static KeywordCorpus from_parts(std::vector<Keyword> entries,
                                  std::vector<float> vectors,
                                  std::size_t dimension);

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  bool empty() const noexcept { return entries_.empty(); }

  const std::vector<Keyword>& entries() const noexcept { return entries_; }
  const Keyword& entry(std::size_t i) const { return entries_.at(i); }
  std::span<const float> vector(std::size_t i) const;
  std::span<const float> raw_vectors() const noexcept { return vectors_; }

  std::optional<std::size_t> find(std::string_view keyword_id) const;
  const Keyword* lookup(std::string_view keyword_id) const;

 private:
  std::vector<Keyword> entries_;
  std::vector<float> vectors_;
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Parses line-delimited {keyword_id, surface, taxonomy_path[]} records.
// Blank lines are skipped but still counted for error line numbers.
// Surfaces are normalized. Throws MalformedRecord(line).
std::vector<Keyword> parse_keyword_records(std::istream& in);

// Embeds every entry's surface in input order. Throws DuplicateKeyword.
KeywordCorpus build_corpus(std::vector<Keyword> entries,
                           const EmbeddingProvider& provider);
KeywordCorpus build_corpus(std::istream& records,
                           const EmbeddingProvider& provider);

struct Neighbor {
  std::string keyword_id;
  double similarity = 0.0;
  std::size_t index = 0;  // row in the corpus

  bool operator==(const Neighbor&) const = default;
};

// Exact top-k by dot product, sorted (similarity desc, keyword_id asc).
// Returns min(k, |corpus|) neighbors. Throws DimensionMismatch, InvalidInput
// for k == 0.
std::vector<Neighbor> knn(const KeywordCorpus& corpus,
                          const EmbeddingVector& query, std::size_t k);

}  // namespace cascade
