#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cascade/corpus.hpp"
#include "cascade/embedding.hpp"
#include "cascade/generators.hpp"
#include "cascade/product_index.hpp"
#include "cascade/quality.hpp"
#include "cascade/types.hpp"

namespace cascade {

struct CandidateParams {
  std::size_t k_per_concept = 20;
  std::size_t cap = 100;
  std::size_t max_kw = 5;

  bool operator==(const CandidateParams&) const = default;
};

struct PipelineConfig {
  std::size_t m_default = 5;
  std::string theme_generator = "stub";
  std::string keyword_generator = "stub";
  std::string relevance_scorer = "stub";
  FilterConfig filter;
  CandidateParams candidates;
  std::size_t slate_limit = 20;
  std::size_t retrieval_limit = 200;  // per keyword, before slate truncation
  std::int64_t cache_ttl_seconds = 3600;
  std::string config_version = "v1";

  bool operator==(const PipelineConfig&) const = default;
};

// Throws InvalidInput when cfg is inconsistent with policy.
void validate(const PipelineConfig& cfg, const PolicyConstraints& policy);

// Read-only serving dependencies. Must outlive every build that uses them.
struct PipelineDeps {
  const KeywordCorpus& corpus;
  const ProductIndex& index;
  const EmbeddingProvider& embedder;
  const ThemeGenerator& theme_generator;
  const KeywordGenerator& keyword_generator;
  const RelevanceScorer& scorer;
  const FallbackPlan& fallback_plan;
};

enum class FallbackReason {
  None,
  GenerationFailed,
  GuardrailExhausted,
  TooFewPlacements,
  InternalError,
};

const char* to_string(FallbackReason r) noexcept;

struct PlacementAudit {
  std::string title;
  std::size_t rank_hint = 0;
  std::vector<std::string> candidate_ids;
  std::vector<std::string> keyword_ids;
  std::size_t keywords_dropped_out_of_set = 0;
  std::size_t products_retrieved = 0;
  std::size_t products_pruned = 0;
  bool keyword_generation_failed = false;
  bool survived = false;
};

// One record per build. Counts describe the generated path even when the
// build fell back.
struct AuditRecord {
  std::string user_id;
  Provenance provenance = Provenance::Generated;
  FallbackReason fallback_reason = FallbackReason::None;
  bool reached_phase2 = false;

  std::size_t themes_generated = 0;
  std::size_t themes_guardrailed = 0;
  std::size_t themes_deduped = 0;
  std::size_t keyword_failures = 0;
  std::size_t placements_pre_prune = 0;
  std::size_t placements_pruned = 0;
  std::size_t placements_final = 0;
  std::size_t keywords_kept = 0;
  std::size_t keywords_dropped_out_of_set = 0;
  std::size_t products_pruned = 0;
  std::vector<PlacementAudit> placements;
  std::map<std::string, double> phase_ms;

  // generated − guardrailed − deduped − keyword failures == pre-prune count,
  // and pre-prune − pruned == final when the generated path was served.
  bool reconciles() const;
};

struct BuildResult {
  Storefront storefront;
  AuditRecord audit;
};

// Phases 1-3 end to end. Never throws for generator misbehavior: failures
// degrade to the fallback storefront.
BuildResult build_storefront_audited(const UserContext& ctx,
                                     const PolicyConstraints& policy,
                                     const PipelineConfig& cfg,
                                     const PipelineDeps& deps);

Storefront build_storefront(const UserContext& ctx,
                            const PolicyConstraints& policy,
                            const PipelineConfig& cfg, const PipelineDeps& deps);

// The fallback storefront as served: plan placements with collapsed slates
// removed.
Storefront serve_fallback(const UserContext& ctx, const PolicyConstraints& policy,
                          const PipelineConfig& cfg, const PipelineDeps& deps);

// Slate size floor applied at serving: the larger of cfg and policy minimums.
std::size_t effective_min_slate(const PipelineConfig& cfg,
                                const PolicyConstraints& policy);

// Empty when every final placement's keywords are in its recorded candidate
// set; otherwise the offending title.
std::string candidate_violation(const BuildResult& result);

}  // namespace cascade
