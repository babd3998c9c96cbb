#include "cascade/generators.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "cascade/digest.hpp"
#include "cascade/errors.hpp"
#include "cascade/text.hpp"

namespace cascade {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 12> kAdjectives = {
    "fresh",  "organic",  "classic", "healthy", "everyday", "family",
    "premium", "seasonal", "quick",  "local",   "crunchy",  "sweet"};

constexpr std::array<std::string_view, 3> kGenericCategories = {
    "pantry", "snacks", "produce"};

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string persona_for(const UserContext& ctx, const std::string& top_category) {
  for (const auto& pref : ctx.preferences) {
    const auto colon = pref.find(':');
    const std::string value =
        normalize_text(colon == std::string::npos ? pref : pref.substr(colon + 1));
    if (value.empty()) continue;
    const std::string tag = colon == std::string::npos ? "" : normalize_text(pref.substr(0, colon));
    if (tag == "household") return value + " household shopper";
    if (tag == "dietary") return value + " shopper";
    return value + " shopper";
  }
  return top_category.empty() ? "everyday shopper" : top_category + " enthusiast";
}

// Seeded permutation of the adjective list, unique per (user, category).
std::vector<std::string_view> adjective_order(std::uint64_t seed,
                                              const std::string& user_id,
                                              const std::string& category) {
  std::vector<std::string_view> adj(kAdjectives.begin(), kAdjectives.end());
  SplitMix64 rng(mix_seed(seed, user_id + '\x1f' + category));
  for (std::size_t i = adj.size(); i > 1; --i) {
    std::swap(adj[i - 1], adj[rng.below(i)]);
  }
  return adj;
}

}  // namespace

void validate(const ThemeGenerationRequest& req) {
  validate(req.ctx);
  validate(req.policy);
  if (req.m < req.policy.min_placements || req.m > req.policy.max_placements) {
    throw InvalidInput("requested m=" + std::to_string(req.m) +
                       " outside policy placement bounds");
  }
}

StubThemeGenerator::StubThemeGenerator(const ProductIndex& catalog,
                                       std::uint64_t seed)
    : catalog_(catalog), seed_(seed) {}

std::vector<std::string> StubThemeGenerator::top_categories(
    const UserContext& ctx) const {
  std::map<std::string, std::int64_t> weight;
  for (const auto& p : ctx.purchase_history) {
    const Product* prod = catalog_.find(p.product_id);
    if (prod == nullptr) continue;
    const std::string leaf = normalize_text(leaf_category(*prod));
    if (leaf.empty()) continue;
    weight[leaf] += std::max<std::int64_t>(p.quantity, 1);
  }
  std::vector<std::pair<std::string, std::int64_t>> ranked(weight.begin(),
                                                           weight.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (auto& [name, w] : ranked) out.push_back(name);
  return out;
}

RawGeneration StubThemeGenerator::generate(const ThemeGenerationRequest& req) const {
  std::vector<std::string> cats = top_categories(req.ctx);
  if (cats.empty()) {
    for (const auto& c : catalog_.categories_by_popularity()) {
      cats.push_back(normalize_text(c));
      if (cats.size() == req.m) break;
    }
  }
  if (cats.empty()) cats.assign(kGenericCategories.begin(), kGenericCategories.end());
  if (cats.size() > req.m) cats.resize(req.m);

  const std::string persona = persona_for(req.ctx, cats.front());
  json themes = json::array();
  for (std::size_t i = 0; i < req.m; ++i) {
    const std::string& cat = cats[i % cats.size()];
    const std::size_t round = i / cats.size();
    const auto order = adjective_order(seed_, req.ctx.user_id, cat);
    std::string adj(order[round % order.size()]);
    if (round >= order.size()) adj += " " + std::to_string(round / order.size() + 1);
    themes.push_back({
        {"title", capitalize(adj) + " " + cat + " picks"},
        {"persona", persona},
        {"product_concepts", {adj + " " + cat, cat}},
    });
  }
  return {themes.dump(), id()};
}

RawGeneration FailingThemeGenerator::generate(const ThemeGenerationRequest& req) const {
  switch (mode_) {
    case Mode::Throw:
      throw ProviderError("theme generator unavailable (fault injection)");
    case Mode::Malformed:
      return {R"([{"title": "Snack time", "persona": "x", "product_con)", id()};
    case Mode::ShortCount: {
      json themes = json::array();
      for (std::size_t i = 0; i + 1 < req.m; ++i) {
        themes.push_back({{"title", "Theme " + std::to_string(i)},
                          {"persona", "x"},
                          {"product_concepts", {"snacks"}}});
      }
      return {themes.dump(), id()};
    }
  }
  return {};
}

std::vector<Theme> validate_themes(const RawGeneration& raw,
                                   const ThemeGenerationRequest& req) {
  json doc;
  try {
    doc = json::parse(raw.payload);
  } catch (const json::exception& e) {
    throw SchemaViolation(SchemaReason::parse_error, e.what());
  }
  if (doc.is_object() && doc.contains("themes")) doc = doc["themes"];
  if (!doc.is_array()) {
    throw SchemaViolation(SchemaReason::parse_error, "payload is not a list");
  }

  std::vector<Theme> themes;
  themes.reserve(doc.size());
  for (const auto& item : doc) {
    if (!item.is_object()) {
      throw SchemaViolation(SchemaReason::parse_error, "theme is not an object");
    }
    Theme t;
    try {
      t.title = item.at("title").get<std::string>();
      t.persona = item.at("persona").get<std::string>();
      if (item.contains("product_concepts")) {
        for (const auto& c : item.at("product_concepts")) {
          std::string concept_text = c.get<std::string>();
          if (!normalize_text(concept_text).empty()) {
            t.product_concepts.push_back(std::move(concept_text));
          }
        }
      }
    } catch (const json::exception& e) {
      throw SchemaViolation(SchemaReason::parse_error, e.what());
    }
    t.rank_hint = themes.size();
    themes.push_back(std::move(t));
  }

  if (themes.size() != req.m) {
    throw SchemaViolation(SchemaReason::wrong_count,
                          "expected " + std::to_string(req.m) + " themes, got " +
                              std::to_string(themes.size()));
  }
  std::set<std::string> seen;
  for (const auto& t : themes) {
    const std::string key = normalize_text(t.title);
    if (key.empty()) {
      throw SchemaViolation(SchemaReason::empty_title,
                            "theme " + std::to_string(t.rank_hint));
    }
    if (t.product_concepts.empty()) {
      throw SchemaViolation(SchemaReason::missing_concepts, t.title);
    }
    if (!seen.insert(key).second) {
      throw SchemaViolation(SchemaReason::duplicate_title, t.title);
    }
  }
  return themes;
}

std::vector<Theme> generate_themes(const ThemeGenerationRequest& req,
                                   const ThemeGenerator& gen) {
  validate(req);
  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    RawGeneration raw;
    try {
      raw = gen.generate(req);
    } catch (const std::exception& e) {
      throw GenerationFailed("theme generator " + gen.id() + " failed: " + e.what());
    }
    try {
      return validate_themes(raw, req);
    } catch (const SchemaViolation& e) {
      last_error = e.what();
      spdlog::info("[phase1] {} rejected for {} (attempt {}): {}", gen.id(),
                   req.ctx.user_id, attempt + 1, last_error);
    }
  }
  throw GenerationFailed("theme validation failed after retry: " + last_error);
}

std::vector<Theme> apply_guardrails(const std::vector<Theme>& themes,
                                    const PolicyConstraints& policy) {
  std::vector<std::string> banned;
  for (const auto& b : policy.banned_terms) {
    auto n = normalize_text(b);
    if (!n.empty()) banned.push_back(std::move(n));
  }
  auto violates = [&](const std::string& text) {
    const std::string n = normalize_text(text);
    return std::any_of(banned.begin(), banned.end(), [&](const std::string& b) {
      return n.find(b) != std::string::npos;
    });
  };

  std::vector<Theme> kept;
  for (const auto& t : themes) {
    const bool bad = violates(t.title) ||
                     std::any_of(t.product_concepts.begin(),
                                 t.product_concepts.end(), violates);
    if (!bad) kept.push_back(t);
  }
  if (kept.size() < policy.min_placements) {
    throw GuardrailExhausted(std::to_string(themes.size() - kept.size()) +
                             " themes removed, " + std::to_string(kept.size()) +
                             " left, need " + std::to_string(policy.min_placements));
  }
  return kept;
}

void validate_fallback_plan(const FallbackPlan& plan, const KeywordCorpus& corpus) {
  if (plan.entries.empty()) throw InvalidFallbackPlan("fallback plan is empty");
  std::set<std::string> titles;
  for (const auto& e : plan.entries) {
    const std::string key = normalize_text(e.title);
    if (key.empty()) throw InvalidFallbackPlan("fallback entry with empty title");
    if (!titles.insert(key).second) {
      throw InvalidFallbackPlan("duplicate fallback title: " + e.title);
    }
    if (e.keyword_ids.empty()) {
      throw InvalidFallbackPlan("fallback entry without keywords: " + e.title);
    }
    for (const auto& id : e.keyword_ids) {
      if (!corpus.find(id)) {
        throw InvalidFallbackPlan("fallback entry " + e.title +
                                  " references unknown keyword " + id);
      }
    }
  }
}

Storefront fallback_storefront(const UserContext& ctx,
                               const PolicyConstraints& policy,
                               const FallbackPlan& plan,
                               const KeywordCorpus& corpus,
                               const ProductIndex& index,
                               const SlateLimits& limits) {
  Storefront sf;
  sf.user_id = ctx.user_id;
  sf.provenance = Provenance::Fallback;
  sf.context_hash = context_hash(ctx, policy);
  sf.config_version = policy.config_version;

  for (std::size_t i = 0; i < plan.entries.size(); ++i) {
    const auto& entry = plan.entries[i];
    Placement pl;
    pl.theme.title = entry.title;
    pl.theme.persona = "fallback";
    pl.theme.product_concepts = {normalize_text(entry.title)};
    pl.theme.rank_hint = i;

    std::map<std::string, Product> pooled;
    for (const auto& id : entry.keyword_ids) {
      const Keyword* kw = corpus.lookup(id);
      if (kw == nullptr) continue;  // rejected at startup validation
      pl.keywords.push_back(*kw);
      for (auto& p : retrieve_products(index, *kw, limits.per_keyword)) {
        pooled.emplace(p.product_id, std::move(p));
      }
    }
    pl.recall_volume = pooled.size();
    for (auto& [pid, p] : pooled) {
      if (pl.slate.size() == limits.slate) break;
      pl.slate.push_back({std::move(p), 1.0});
    }
    pl.below_min_slate = pl.slate.size() < policy.min_slate_size;
    sf.placements.push_back(std::move(pl));
  }
  return sf;
}

bool CandidateSet::contains(std::string_view keyword_id) const {
  return std::any_of(candidates.begin(), candidates.end(),
                     [&](const Keyword& k) { return k.keyword_id == keyword_id; });
}

CandidateSet select_candidates(const Theme& theme, const KeywordCorpus& corpus,
                               const EmbeddingProvider& provider,
                               std::size_t k_per_concept, std::size_t cap) {
  if (theme.product_concepts.empty()) {
    throw InvalidInput("theme has no product concepts: " + theme.title);
  }
  std::unordered_map<std::size_t, double> best;
  for (const auto& concept_text : theme.product_concepts) {
    const EmbeddingVector q = embed(concept_text, provider);
    for (const auto& n : knn(corpus, q, k_per_concept)) {
      auto [it, inserted] = best.emplace(n.index, n.similarity);
      if (!inserted && n.similarity > it->second) it->second = n.similarity;
    }
  }
  std::vector<std::pair<std::size_t, double>> merged(best.begin(), best.end());
  std::sort(merged.begin(), merged.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return corpus.entry(a.first).keyword_id < corpus.entry(b.first).keyword_id;
  });
  if (merged.size() > cap) merged.resize(cap);

  CandidateSet out;
  out.theme_ref = theme.rank_hint;
  out.candidates.reserve(merged.size());
  out.source_similarities.reserve(merged.size());
  for (const auto& [idx, sim] : merged) {
    out.candidates.push_back(corpus.entry(idx));
    out.source_similarities.push_back(sim);
  }
  return out;
}

std::vector<std::string> StubKeywordGenerator::generate(
    const Theme&, const CandidateSet& cands, std::size_t max_kw) const {
  // Candidates arrive sorted by similarity.
  std::vector<std::string> out;
  for (std::size_t i = 0; i < cands.size() && out.size() < max_kw; ++i) {
    out.push_back(cands.candidates[i].keyword_id);
  }
  return out;
}

KeywordGenerationResult generate_keywords(const Theme& theme,
                                          const CandidateSet& cands,
                                          const KeywordGenerator& gen,
                                          std::size_t max_kw) {
  if (cands.empty()) {
    throw GenerationFailed("empty candidate set for theme " + theme.title);
  }
  std::vector<std::string> raw;
  try {
    raw = gen.generate(theme, cands, max_kw);
  } catch (const std::exception& e) {
    throw GenerationFailed("keyword generator " + gen.id() + " failed: " + e.what());
  }

  std::unordered_map<std::string, std::size_t> by_id;
  std::unordered_map<std::string, std::size_t> by_surface;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    by_id.emplace(cands.candidates[i].keyword_id, i);
    by_surface.emplace(normalize_text(cands.candidates[i].surface), i);
  }

  KeywordGenerationResult result;
  std::set<std::size_t> taken;
  for (const auto& out : raw) {
    std::size_t row = 0;
    if (auto it = by_id.find(out); it != by_id.end()) {
      row = it->second;
    } else if (auto st = by_surface.find(normalize_text(out)); st != by_surface.end()) {
      row = st->second;
    } else {
      ++result.dropped_out_of_set;
      continue;
    }
    if (!taken.insert(row).second) continue;
    if (result.keywords.size() < max_kw) {
      result.keywords.push_back(cands.candidates[row]);
    }
  }
  if (result.keywords.empty()) {
    throw NoKeywordsInSet("no in-set keywords for theme " + theme.title,
                          result.dropped_out_of_set);
  }
  return result;
}

}  // namespace cascade
