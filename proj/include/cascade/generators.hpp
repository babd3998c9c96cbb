#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cascade/corpus.hpp"
#include "cascade/embedding.hpp"
#include "cascade/product_index.hpp"
#include "cascade/types.hpp"

namespace cascade {

// ---------------------------------------------------------------------------
// Theme generation
// ---------------------------------------------------------------------------

struct ThemeGenerationRequest {
  UserContext ctx;
  PolicyConstraints policy;
  std::size_t m = 0;  // requested placement count
};

void validate(const ThemeGenerationRequest& req);

struct RawGeneration {
  std::string payload;  // JSON list of {title, persona, product_concepts[]}
  std::string generator_id;
};

// Implementations must be callable concurrently.
class ThemeGenerator {
 public:
  virtual ~ThemeGenerator() = default;
  virtual std::string id() const = 0;
  virtual RawGeneration generate(const ThemeGenerationRequest& req) const = 0;
};

// Deterministic themes from a seed and the user's top purchase categories
// (quantity-weighted leaf categories; catalog-wide popular categories for
// users with no usable history). Titles follow
// "<Adjective> <category> picks".
class StubThemeGenerator final : public ThemeGenerator {
 public:
  StubThemeGenerator(const ProductIndex& catalog, std::uint64_t seed);

  std::string id() const override { return "stub-theme"; }
  RawGeneration generate(const ThemeGenerationRequest& req) const override;

  std::vector<std::string> top_categories(const UserContext& ctx) const;

 private:
  const ProductIndex& catalog_;
  std::uint64_t seed_;
};

// Fault injection for the fallback path.
class FailingThemeGenerator final : public ThemeGenerator {
 public:
  enum class Mode { Throw, Malformed, ShortCount };
  explicit FailingThemeGenerator(Mode mode = Mode::Throw) : mode_(mode) {}

  std::string id() const override { return "failing-theme"; }
  RawGeneration generate(const ThemeGenerationRequest& req) const override;

 private:
  Mode mode_;
};

// Parses and checks a raw payload. rank_hint is assigned from payload order.
// Throws SchemaViolation with a reason code.
std::vector<Theme> validate_themes(const RawGeneration& raw,
                                   const ThemeGenerationRequest& req);

// Runs the generator and validates, retrying once on SchemaViolation.
// Throws GenerationFailed.
std::vector<Theme> generate_themes(const ThemeGenerationRequest& req,
                                   const ThemeGenerator& gen);

// Drops themes whose normalized title or any concept contains a banned term.
// Preserves order. Throws GuardrailExhausted below policy.min_placements.
std::vector<Theme> apply_guardrails(const std::vector<Theme>& themes,
                                    const PolicyConstraints& policy);

// ---------------------------------------------------------------------------
// Deterministic fallback
// ---------------------------------------------------------------------------

struct FallbackEntry {
  std::string title;
  std::vector<std::string> keyword_ids;

  bool operator==(const FallbackEntry&) const = default;
};

struct FallbackPlan {
  std::vector<FallbackEntry> entries;

  bool operator==(const FallbackPlan&) const = default;
};

// Startup check: non-empty, distinct titles, every keyword in the corpus.
// Throws InvalidFallbackPlan.
void validate_fallback_plan(const FallbackPlan& plan,
                            const KeywordCorpus& corpus);

struct SlateLimits {
  std::size_t per_keyword = 200;  // retrieval limit per keyword
  std::size_t slate = 20;         // products kept per placement
};

// Builds one placement per plan entry straight from retrieval. Slate scores
// are 1.0 (unscored), so slates are in product_id order. Placements whose
// slate is under policy.min_slate_size are kept and flagged.
Storefront fallback_storefront(const UserContext& ctx,
                               const PolicyConstraints& policy,
                               const FallbackPlan& plan,
                               const KeywordCorpus& corpus,
                               const ProductIndex& index,
                               const SlateLimits& limits = {});

// ---------------------------------------------------------------------------
// Keyword generation (Phase 2). Nothing here accepts a UserContext.
// ---------------------------------------------------------------------------

struct CandidateSet {
  std::size_t theme_ref = 0;
  std::vector<Keyword> candidates;
  std::vector<double> source_similarities;  // parallel to candidates

  std::size_t size() const noexcept { return candidates.size(); }
  bool empty() const noexcept { return candidates.empty(); }
  bool contains(std::string_view keyword_id) const;
};

// Per concept: embed, take knn top k_per_concept; union with max similarity
// per id, sort (similarity desc, keyword_id asc), cut at cap.
CandidateSet select_candidates(const Theme& theme, const KeywordCorpus& corpus,
                               const EmbeddingProvider& provider,
                               std::size_t k_per_concept, std::size_t cap);

class KeywordGenerator {
 public:
  virtual ~KeywordGenerator() = default;
  virtual std::string id() const = 0;
  // Returns keyword ids (or surfaces). Membership in `cands` is enforced by
  // the caller, not trusted.
  virtual std::vector<std::string> generate(const Theme& theme,
                                            const CandidateSet& cands,
                                            std::size_t max_kw) const = 0;
};

// Top max_kw candidates by similarity.
class StubKeywordGenerator final : public KeywordGenerator {
 public:
  std::string id() const override { return "stub-keyword"; }
  std::vector<std::string> generate(const Theme& theme,
                                    const CandidateSet& cands,
                                    std::size_t max_kw) const override;
};

struct KeywordGenerationResult {
  std::vector<Keyword> keywords;
  std::size_t dropped_out_of_set = 0;
};

// Keeps only outputs that are members of `cands` (matched by id, then by
// normalized surface), deduped, at most max_kw. Throws GenerationFailed when
// nothing survives or the generator fails.
KeywordGenerationResult generate_keywords(const Theme& theme,
                                          const CandidateSet& cands,
                                          const KeywordGenerator& gen,
                                          std::size_t max_kw);

}  // namespace cascade
