#include "cascade/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include <spdlog/spdlog.h>

#include "cascade/errors.hpp"

namespace cascade {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

const char* to_string(FallbackReason r) noexcept {
  switch (r) {
    case FallbackReason::None:
      return "none";
    case FallbackReason::GenerationFailed:
      return "generation_failed";
    case FallbackReason::GuardrailExhausted:
      return "guardrail_exhausted";
    case FallbackReason::TooFewPlacements:
      return "too_few_placements";
    case FallbackReason::InternalError:
      return "internal_error";
  }
  return "none";
}

void validate(const PipelineConfig& cfg, const PolicyConstraints& policy) {
  validate(policy);
  validate(cfg.filter);
  if (cfg.m_default < policy.min_placements || cfg.m_default > policy.max_placements) {
    throw InvalidInput("m_default must lie within policy placement bounds");
  }
  if (cfg.candidates.k_per_concept == 0 || cfg.candidates.cap == 0 ||
      cfg.candidates.max_kw == 0) {
    throw InvalidInput("candidate parameters must be >= 1");
  }
  if (cfg.slate_limit == 0 || cfg.retrieval_limit == 0) {
    throw InvalidInput("slate_limit and retrieval_limit must be >= 1");
  }
  if (cfg.slate_limit < effective_min_slate(cfg, policy)) {
    throw InvalidInput("slate_limit below min_slate_size: every placement would collapse");
  }
  if (cfg.cache_ttl_seconds < 0) throw InvalidInput("cache_ttl must be >= 0");
  if (cfg.config_version != policy.config_version) {
    throw InvalidInput("pipeline and policy config_version differ");
  }
}

std::size_t effective_min_slate(const PipelineConfig& cfg,
                                const PolicyConstraints& policy) {
  return std::max(cfg.filter.min_slate_size, policy.min_slate_size);
}

bool AuditRecord::reconciles() const {
  if (!reached_phase2) {
    return placements_pre_prune == 0 && fallback_reason != FallbackReason::None;
  }
  if (themes_generated < themes_guardrailed + themes_deduped + keyword_failures) {
    return false;
  }
  if (themes_generated - themes_guardrailed - themes_deduped - keyword_failures !=
      placements_pre_prune) {
    return false;
  }
  if (placements_pruned > placements_pre_prune) return false;
  if (provenance == Provenance::Generated) {
    return placements_pre_prune - placements_pruned == placements_final;
  }
  return true;
}

Storefront serve_fallback(const UserContext& ctx, const PolicyConstraints& policy,
                          const PipelineConfig& cfg, const PipelineDeps& deps) {
  Storefront sf = fallback_storefront(ctx, policy, deps.fallback_plan, deps.corpus,
                                      deps.index,
                                      {cfg.retrieval_limit, cfg.slate_limit});
  const std::size_t floor = effective_min_slate(cfg, policy);
  std::erase_if(sf.placements,
                [&](const Placement& p) { return p.slate.size() < floor; });
  return sf;
}

BuildResult build_storefront_audited(const UserContext& ctx,
                                     const PolicyConstraints& policy,
                                     const PipelineConfig& cfg,
                                     const PipelineDeps& deps) {
  const auto t_start = Clock::now();
  BuildResult result;
  AuditRecord& audit = result.audit;
  audit.user_id = ctx.user_id;

  auto fall_back = [&](FallbackReason reason, const std::string& why) {
    spdlog::info("[{}] {} falls back: {}", to_string(reason), ctx.user_id, why);
    audit.provenance = Provenance::Fallback;
    audit.fallback_reason = reason;
    result.storefront = serve_fallback(ctx, policy, cfg, deps);
    audit.placements_final = result.storefront.placements.size();
    audit.phase_ms["total"] = ms_since(t_start);
    return result;
  };

  try {
    // Phase 1: themes, guardrails.
    auto t_phase = Clock::now();
    ThemeGenerationRequest req{
        ctx, policy,
        std::clamp(cfg.m_default, policy.min_placements, policy.max_placements)};
    std::vector<Theme> themes;
    try {
      themes = generate_themes(req, deps.theme_generator);
    } catch (const GenerationFailed& e) {
      return fall_back(FallbackReason::GenerationFailed, e.what());
    }
    audit.themes_generated = themes.size();

    std::vector<Theme> guarded;
    try {
      guarded = apply_guardrails(themes, policy);
    } catch (const GuardrailExhausted& e) {
      PolicyConstraints relaxed = policy;
      relaxed.min_placements = 0;
      audit.themes_guardrailed = themes.size() - apply_guardrails(themes, relaxed).size();
      return fall_back(FallbackReason::GuardrailExhausted, e.what());
    }
    audit.themes_guardrailed = themes.size() - guarded.size();
    audit.phase_ms["phase1"] = ms_since(t_phase);

    // Phase 3a: semantic dedup ahead of keyword generation.
    t_phase = Clock::now();
    const std::vector<Theme> distinct = dedup_themes(guarded, deps.embedder, cfg.filter);
    audit.themes_deduped = guarded.size() - distinct.size();
    audit.phase_ms["dedup"] = ms_since(t_phase);

    // Phase 2: candidates, keywords, retrieval, scoring.
    t_phase = Clock::now();
    audit.reached_phase2 = true;
    const std::size_t max_kw =
        std::min(cfg.candidates.max_kw, policy.max_keywords_per_placement);
    std::vector<Placement> placements;
    for (const auto& theme : distinct) {
      PlacementAudit pa;
      pa.title = theme.title;
      pa.rank_hint = theme.rank_hint;
      const CandidateSet cands =
          select_candidates(theme, deps.corpus, deps.embedder,
                            cfg.candidates.k_per_concept, cfg.candidates.cap);
      for (const auto& k : cands.candidates) pa.candidate_ids.push_back(k.keyword_id);

      KeywordGenerationResult kw;
      try {
        kw = generate_keywords(theme, cands, deps.keyword_generator, max_kw);
      } catch (const GenerationFailed& e) {
        spdlog::info("[phase2] {} theme '{}' dropped: {}", ctx.user_id, theme.title,
                     e.what());
        pa.keyword_generation_failed = true;
        if (const auto* none = dynamic_cast<const NoKeywordsInSet*>(&e)) {
          pa.keywords_dropped_out_of_set = none->dropped();
          audit.keywords_dropped_out_of_set += none->dropped();
        }
        ++audit.keyword_failures;
        audit.placements.push_back(std::move(pa));
        continue;
      }
      pa.keywords_dropped_out_of_set = kw.dropped_out_of_set;
      audit.keywords_dropped_out_of_set += kw.dropped_out_of_set;
      for (const auto& k : kw.keywords) pa.keyword_ids.push_back(k.keyword_id);

      std::map<std::string, Product> pooled;
      for (const auto& k : kw.keywords) {
        for (auto& p : retrieve_products(deps.index, k, cfg.retrieval_limit)) {
          pooled.emplace(p.product_id, std::move(p));
        }
      }
      std::vector<Product> retrieved;
      retrieved.reserve(pooled.size());
      for (auto& [pid, p] : pooled) retrieved.push_back(std::move(p));
      const std::vector<double> scores =
          score_relevance_batch(theme, retrieved, deps.scorer);

      Placement pl;
      pl.theme = theme;
      pl.keywords = std::move(kw.keywords);
      pl.recall_volume = retrieved.size();
      pl.slate.reserve(retrieved.size());
      for (std::size_t i = 0; i < retrieved.size(); ++i) {
        pl.slate.push_back({std::move(retrieved[i]), scores[i]});
      }
      sort_slate(pl.slate);
      if (pl.slate.size() > cfg.slate_limit) pl.slate.resize(cfg.slate_limit);
      pl.below_min_slate = pl.slate.size() < effective_min_slate(cfg, policy);
      pa.products_retrieved = pl.recall_volume;

      audit.placements.push_back(std::move(pa));
      placements.push_back(std::move(pl));
    }
    audit.placements_pre_prune = placements.size();
    audit.phase_ms["phase2"] = ms_since(t_phase);

    // Phase 3b: relevance pruning and the carousel-collapse guard.
    t_phase = Clock::now();
    FilterConfig filter = cfg.filter;
    filter.min_slate_size = effective_min_slate(cfg, policy);
    std::vector<Placement> survivors = prune_placements(placements, filter);
    for (const auto& pl : placements) {
      const auto below = std::count_if(pl.slate.begin(), pl.slate.end(),
                                       [&](const ScoredProduct& sp) {
                                         return sp.score < filter.relevance_threshold;
                                       });
      audit.products_pruned += static_cast<std::size_t>(below);
    }
    audit.placements_pruned = placements.size() - survivors.size();
    {
      std::set<std::size_t> alive;
      for (const auto& s : survivors) alive.insert(s.theme.rank_hint);
      for (auto& pa : audit.placements) {
        pa.survived = alive.count(pa.rank_hint) > 0;
        if (pa.keyword_generation_failed) continue;
        for (const auto& pl : placements) {
          if (pl.theme.rank_hint != pa.rank_hint) continue;
          const auto kept = std::find_if(survivors.begin(), survivors.end(),
                                         [&](const Placement& s) {
                                           return s.theme.rank_hint == pa.rank_hint;
                                         });
          pa.products_pruned =
              pl.slate.size() - (kept == survivors.end() ? 0 : kept->slate.size());
        }
      }
    }
    audit.phase_ms["phase3"] = ms_since(t_phase);

    if (survivors.size() < policy.min_placements) {
      return fall_back(FallbackReason::TooFewPlacements,
                       std::to_string(survivors.size()) + " placements survived pruning");
    }
    if (survivors.size() > policy.max_placements) survivors.resize(policy.max_placements);
    for (const auto& pl : survivors) audit.keywords_kept += pl.keywords.size();

    Storefront& sf = result.storefront;
    sf.user_id = ctx.user_id;
    sf.placements = std::move(survivors);
    sf.provenance = Provenance::Generated;
    sf.context_hash = context_hash(ctx, policy);
    sf.config_version = policy.config_version;
    audit.provenance = Provenance::Generated;
    audit.placements_final = sf.placements.size();
    audit.phase_ms["total"] = ms_since(t_start);
    return result;
  } catch (const std::exception& e) {
    spdlog::warn("[pipeline] {} internal failure: {}", ctx.user_id, e.what());
    return fall_back(FallbackReason::InternalError, e.what());
  }
}

Storefront build_storefront(const UserContext& ctx, const PolicyConstraints& policy,
                            const PipelineConfig& cfg, const PipelineDeps& deps) {
  return build_storefront_audited(ctx, policy, cfg, deps).storefront;
}

std::string candidate_violation(const BuildResult& result) {
  if (result.storefront.provenance == Provenance::Fallback) return {};
  for (const auto& pl : result.storefront.placements) {
    const auto pa = std::find_if(
        result.audit.placements.begin(), result.audit.placements.end(),
        [&](const PlacementAudit& a) { return a.rank_hint == pl.theme.rank_hint; });
    if (pa == result.audit.placements.end()) return pl.theme.title;
    const std::set<std::string> allowed(pa->candidate_ids.begin(),
                                        pa->candidate_ids.end());
    for (const auto& k : pl.keywords) {
      if (!allowed.count(k.keyword_id)) return pl.theme.title;
    }
  }
  return {};
}

}  // namespace cascade
