#include "cascade/records.hpp"

#include <string>

#include "cascade/errors.hpp"

namespace cascade {

using nlohmann::json;

json to_json(const Keyword& k) {
  return {{"keyword_id", k.keyword_id},
          {"surface", k.surface},
          {"taxonomy_path", k.taxonomy_path}};
}

Keyword keyword_from_json(const json& j) {
  Keyword k;
  k.keyword_id = j.at("keyword_id").get<std::string>();
  k.surface = j.at("surface").get<std::string>();
  k.taxonomy_path = j.value("taxonomy_path", std::vector<std::string>{});
  return k;
}

json to_json(const Product& p) {
  return {{"product_id", p.product_id},
          {"name", p.name},
          {"category_path", p.category_path},
          {"keyword_ids", p.keyword_ids},
          {"availability", p.available}};
}

Product product_from_json(const json& j) {
  Product p;
  p.product_id = j.at("product_id").get<std::string>();
  p.name = j.at("name").get<std::string>();
  p.category_path = j.value("category_path", std::vector<std::string>{});
  p.keyword_ids = j.value("keyword_ids", std::vector<std::string>{});
  p.available = j.value("availability", true);
  return p;
}

json to_json(const UserContext& ctx) {
  json history = json::array();
  for (const auto& p : ctx.purchase_history) {
    history.push_back(
        {{"product_id", p.product_id}, {"timestamp", p.timestamp}, {"quantity", p.quantity}});
  }
  json signals = json::object();
  for (const auto& [k, v] : ctx.engagement_signals) signals[k] = v;
  return {{"user_id", ctx.user_id},
          {"purchase_history", history},
          {"engagement_signals", signals},
          {"preferences", ctx.preferences}};
}

UserContext user_from_json(const json& j) {
  UserContext ctx;
  ctx.user_id = j.at("user_id").get<std::string>();
  if (j.contains("purchase_history")) {
    for (const auto& p : j.at("purchase_history")) {
      ctx.purchase_history.push_back({p.at("product_id").get<std::string>(),
                                      p.at("timestamp").get<std::int64_t>(),
                                      p.value("quantity", std::int64_t{1})});
    }
  }
  if (j.contains("engagement_signals")) {
    for (const auto& [k, v] : j.at("engagement_signals").items()) {
      ctx.engagement_signals[k] = v.get<double>();
    }
  }
  ctx.preferences = j.value("preferences", std::vector<std::string>{});
  return ctx;
}

std::vector<UserContext> parse_user_records(std::istream& in) {
  std::vector<UserContext> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      UserContext ctx = user_from_json(json::parse(line));
      validate(ctx);
      out.push_back(std::move(ctx));
    } catch (const json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    } catch (const InvalidInput& e) {
      throw MalformedRecord(line_no, e.what());
    }
  }
  return out;
}

json to_json(const Theme& t) {
  return {{"title", t.title},
          {"persona", t.persona},
          {"product_concepts", t.product_concepts},
          {"rank_hint", t.rank_hint}};
}

json to_json(const Placement& p) {
  json j = to_json(p.theme);
  json keywords = json::array();
  for (const auto& k : p.keywords) keywords.push_back(to_json(k));
  json slate = json::array();
  for (const auto& sp : p.slate) {
    json item = to_json(sp.product);
    item["score"] = sp.score;
    slate.push_back(std::move(item));
  }
  j["recall_volume"] = p.recall_volume;
  j["keywords"] = std::move(keywords);
  j["slate"] = std::move(slate);
  return j;
}

Placement placement_from_json(const json& j) {
  Placement p;
  p.theme.title = j.at("title").get<std::string>();
  p.theme.persona = j.value("persona", std::string{});
  p.theme.product_concepts = j.value("product_concepts", std::vector<std::string>{});
  p.theme.rank_hint = j.value("rank_hint", std::size_t{0});
  p.recall_volume = j.value("recall_volume", std::size_t{0});
  for (const auto& k : j.value("keywords", json::array())) {
    p.keywords.push_back(keyword_from_json(k));
  }
  for (const auto& s : j.value("slate", json::array())) {
    p.slate.push_back({product_from_json(s), s.at("score").get<double>()});
  }
  return p;
}

json to_json(const Storefront& sf, std::optional<std::uint64_t> seed) {
  json placements = json::array();
  for (const auto& p : sf.placements) placements.push_back(to_json(p));
  json j = {{"user_id", sf.user_id},
            {"provenance", to_string(sf.provenance)},
            {"context_hash", sf.context_hash},
            {"config_version", sf.config_version}};
  if (seed) j["seed"] = *seed;
  j["placements"] = std::move(placements);
  return j;
}

Storefront storefront_from_json(const json& j) {
  Storefront sf;
  sf.user_id = j.at("user_id").get<std::string>();
  sf.provenance = provenance_from_string(j.at("provenance").get<std::string>());
  sf.context_hash = j.value("context_hash", std::string{});
  sf.config_version = j.value("config_version", std::string{});
  for (const auto& p : j.value("placements", json::array())) {
    sf.placements.push_back(placement_from_json(p));
  }
  return sf;
}

json to_json(const AuditRecord& a, bool with_timings) {
  json placements = json::array();
  for (const auto& p : a.placements) {
    placements.push_back({{"title", p.title},
                          {"rank_hint", p.rank_hint},
                          {"candidates", p.candidate_ids.size()},
                          {"candidate_ids", p.candidate_ids},
                          {"keyword_ids", p.keyword_ids},
                          {"keywords_dropped_out_of_set", p.keywords_dropped_out_of_set},
                          {"products_retrieved", p.products_retrieved},
                          {"products_pruned", p.products_pruned},
                          {"keyword_generation_failed", p.keyword_generation_failed},
                          {"survived", p.survived}});
  }
  json j = {{"user_id", a.user_id},
            {"provenance", to_string(a.provenance)},
            {"fallback_reason", to_string(a.fallback_reason)},
            {"reached_phase2", a.reached_phase2},
            {"themes_generated", a.themes_generated},
            {"themes_guardrailed", a.themes_guardrailed},
            {"themes_deduped", a.themes_deduped},
            {"keyword_failures", a.keyword_failures},
            {"placements_pre_prune", a.placements_pre_prune},
            {"placements_pruned", a.placements_pruned},
            {"placements_final", a.placements_final},
            {"keywords_kept", a.keywords_kept},
            {"keywords_dropped_out_of_set", a.keywords_dropped_out_of_set},
            {"products_pruned", a.products_pruned},
            {"placements", std::move(placements)}};
  if (with_timings) j["phase_ms"] = a.phase_ms;
  return j;
}

json to_json(const FallbackPlan& plan) {
  json j = json::array();
  for (const auto& e : plan.entries) {
    j.push_back({{"title", e.title}, {"keyword_ids", e.keyword_ids}});
  }
  return j;
}

FallbackPlan fallback_plan_from_json(const json& j) {
  FallbackPlan plan;
  for (const auto& e : j) {
    plan.entries.push_back({e.at("title").get<std::string>(),
                            e.at("keyword_ids").get<std::vector<std::string>>()});
  }
  return plan;
}

json to_json(const eval::PolicyReport& r) {
  json pt = json::object();
  for (const auto& [k, v] : r.pt_at) pt["P-T@" + std::to_string(k)] = v;
  return {{"policy", r.policy_name},
          {"pt_at", pt},
          {"ku", r.ku ? json(*r.ku) : json(nullptr)},
          {"density", r.density},
          {"n_users", r.n_users},
          {"n_placements", r.n_placements},
          {"n_fallback", r.n_fallback},
          {"n_failures", r.n_failures},
          {"empty_slates_skipped", r.empty_slates_skipped},
          {"seed", r.seed}};
}

}  // namespace cascade
