#include "cascade/quality.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "cascade/errors.hpp"
#include "cascade/text.hpp"

namespace cascade {

void validate(const FilterConfig& cfg) {
  if (!(cfg.dedup_threshold > 0.0 && cfg.dedup_threshold <= 1.0)) {
    throw InvalidInput("dedup_threshold must be in (0, 1]");
  }
  if (!(cfg.relevance_threshold >= 0.0 && cfg.relevance_threshold <= 1.0)) {
    throw InvalidInput("relevance_threshold must be in [0, 1]");
  }
}

std::string dedup_text(const Theme& theme, const FilterConfig& cfg) {
  if (!cfg.dedup_with_concepts) return theme.title;
  std::string text = theme.title;
  for (const auto& c : theme.product_concepts) text += " " + c;
  return text;
}

std::vector<Theme> dedup_themes(const std::vector<Theme>& themes,
                                const EmbeddingProvider& provider,
                                const FilterConfig& cfg) {
  std::vector<Theme> kept;
  std::vector<EmbeddingVector> kept_vecs;
  for (const auto& t : themes) {
    EmbeddingVector v = embed(dedup_text(t, cfg), provider);
    bool duplicate = false;
    for (const auto& k : kept_vecs) {
      if (dot(v, k) >= cfg.dedup_threshold) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) {
      kept.push_back(t);
      kept_vecs.push_back(std::move(v));
    }
  }
  return kept;
}

std::vector<double> RelevanceScorer::score_batch(
    const Theme& theme, std::span<const Product> products) const {
  std::vector<double> out;
  out.reserve(products.size());
  for (const auto& p : products) out.push_back(score(theme, p));
  return out;
}

double LexicalOverlapScorer::score(const Theme& theme, const Product& product) const {
  std::set<std::string> theme_tokens = token_set(theme.title);
  for (const auto& c : theme.product_concepts) {
    for (auto& t : tokenize(c)) theme_tokens.insert(std::move(t));
  }
  if (theme_tokens.empty()) return 0.0;
  std::set<std::string> product_tokens = token_set(product.name);
  for (const auto& c : product.category_path) {
    for (auto& t : tokenize(c)) product_tokens.insert(std::move(t));
  }
  std::size_t hits = 0;
  for (const auto& t : theme_tokens) hits += product_tokens.count(t);
  return static_cast<double>(hits) / static_cast<double>(theme_tokens.size());
}

double clamp_score(double raw, const std::string& scorer_id) {
  if (!std::isfinite(raw)) {
    spdlog::warn("scorer {} returned non-finite score; using 0", scorer_id);
    return 0.0;
  }
  if (raw < 0.0 || raw > 1.0) {
    spdlog::warn("scorer {} returned {} outside [0,1]; clamped", scorer_id, raw);
    return raw < 0.0 ? 0.0 : 1.0;
  }
  return raw;
}

double score_relevance(const Theme& theme, const Product& product,
                       const RelevanceScorer& scorer) {
  return clamp_score(scorer.score(theme, product), scorer.id());
}

std::vector<double> score_relevance_batch(const Theme& theme,
                                          std::span<const Product> products,
                                          const RelevanceScorer& scorer) {
  std::vector<double> scores = scorer.score_batch(theme, products);
  if (scores.size() != products.size()) {
    throw ScorerError("scorer " + scorer.id() + " returned " +
                      std::to_string(scores.size()) + " scores for " +
                      std::to_string(products.size()) + " products");
  }
  for (auto& s : scores) s = clamp_score(s, scorer.id());
  return scores;
}

std::vector<Placement> prune_placements(const std::vector<Placement>& placements,
                                        const FilterConfig& cfg) {
  std::vector<Placement> out;
  for (const auto& p : placements) {
    Placement kept = p;
    kept.slate.clear();
    for (const auto& sp : p.slate) {
      if (sp.score >= cfg.relevance_threshold) kept.slate.push_back(sp);
    }
    if (kept.slate.size() < cfg.min_slate_size) continue;
    kept.below_min_slate = false;
    out.push_back(std::move(kept));
  }
  return out;
}

}  // namespace cascade
