#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cascade/embedding.hpp"
#include "cascade/types.hpp"

namespace cascade {

struct FilterConfig {
  double dedup_threshold = 0.90;      // (0, 1]
  double relevance_threshold = 0.50;  // [0, 1]
  std::size_t min_slate_size = 4;
  // Embed "title + concepts" instead of the title alone for dedup.
  bool dedup_with_concepts = false;

  bool operator==(const FilterConfig&) const = default;
};

void validate(const FilterConfig& cfg);

// Greedy first-wins pass in rank order: a theme is dropped iff its embedding
// has cosine >= dedup_threshold with an already-kept theme.
std::vector<Theme> dedup_themes(const std::vector<Theme>& themes,
                                const EmbeddingProvider& provider,
                                const FilterConfig& cfg);

// Text embedded for dedup under cfg.
std::string dedup_text(const Theme& theme, const FilterConfig& cfg);

class RelevanceScorer {
 public:
  virtual ~RelevanceScorer() = default;
  virtual std::string id() const = 0;
  virtual double score(const Theme& theme, const Product& product) const = 0;
  // Default loops over score().
  virtual std::vector<double> score_batch(const Theme& theme,
                                          std::span<const Product> products) const;
};

// |theme tokens ∩ product tokens| / |theme tokens|, where theme tokens come
// from title + concepts and product tokens from name + category path.
class LexicalOverlapScorer final : public RelevanceScorer {
 public:
  std::string id() const override { return "stub-lexical"; }
  double score(const Theme& theme, const Product& product) const override;
};

// Calls the scorer and clamps its output to [0, 1]; non-finite scores count
// as 0. Out-of-range values are logged.
double score_relevance(const Theme& theme, const Product& product,
                       const RelevanceScorer& scorer);
std::vector<double> score_relevance_batch(const Theme& theme,
                                          std::span<const Product> products,
                                          const RelevanceScorer& scorer);

double clamp_score(double raw, const std::string& scorer_id);

// Removes products below relevance_threshold, then drops placements whose
// slate is under min_slate_size. Order preserved.
std::vector<Placement> prune_placements(const std::vector<Placement>& placements,
                                        const FilterConfig& cfg);

}  // namespace cascade
