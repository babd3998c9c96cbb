#include "cascade/config.hpp"

#include <fstream>

#include "cascade/errors.hpp"
#include "cascade/records.hpp"
#include "cascade/text.hpp"

namespace cascade {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

AppConfig config_from_json(const json& j) {
  AppConfig cfg;
  try {
    read(j, "config_version", cfg.config_version);
    read(j, "fallback_enabled", cfg.fallback_enabled);
    read(j, "threads", cfg.threads);

    if (j.contains("embedding")) {
      const auto& e = j.at("embedding");
      read(e, "dimension", cfg.embedding.dimension);
      read(e, "seed", cfg.embedding.seed);
    }
    if (j.contains("policy")) {
      const auto& p = j.at("policy");
      auto& pc = cfg.policy;
      read(p, "min_placements", pc.min_placements);
      read(p, "max_placements", pc.max_placements);
      read(p, "min_slate_size", pc.min_slate_size);
      read(p, "max_keywords_per_placement", pc.max_keywords_per_placement);
      std::vector<std::string> banned;
      read(p, "banned_terms", banned);
      for (const auto& b : banned) pc.banned_terms.insert(normalize_text(b));
      std::vector<std::string> tags;
      read(p, "required_theme_tags", tags);
      pc.required_theme_tags = {tags.begin(), tags.end()};
    }
    if (j.contains("pipeline")) {
      const auto& p = j.at("pipeline");
      auto& pc = cfg.pipeline;
      read(p, "m_default", pc.m_default);
      read(p, "theme_generator", pc.theme_generator);
      read(p, "keyword_generator", pc.keyword_generator);
      read(p, "relevance_scorer", pc.relevance_scorer);
      read(p, "k_per_concept", pc.candidates.k_per_concept);
      read(p, "cap", pc.candidates.cap);
      read(p, "max_kw", pc.candidates.max_kw);
      read(p, "slate_limit", pc.slate_limit);
      read(p, "retrieval_limit", pc.retrieval_limit);
      read(p, "cache_ttl_seconds", pc.cache_ttl_seconds);
    }
    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      auto& fc = cfg.pipeline.filter;
      read(f, "dedup_threshold", fc.dedup_threshold);
      read(f, "relevance_threshold", fc.relevance_threshold);
      read(f, "min_slate_size", fc.min_slate_size);
      read(f, "dedup_with_concepts", fc.dedup_with_concepts);
    }
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      read(e, "ks", cfg.eval.ks);
      read(e, "sample_size", cfg.eval.sample_size);
    }
    if (j.contains("fallback_plan")) {
      cfg.fallback_plan = fallback_plan_from_json(j.at("fallback_plan"));
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  cfg.policy.config_version = cfg.config_version;
  cfg.pipeline.config_version = cfg.config_version;
  validate(cfg.pipeline, cfg.policy);
  if (cfg.embedding.dimension == 0) throw InvalidInput("embedding dimension must be >= 1");
  for (auto k : cfg.eval.ks) {
    if (k == 0) throw InvalidInput("eval ks must be >= 1");
  }
  return cfg;
}

json to_json(const AppConfig& cfg) {
  const auto& pc = cfg.pipeline;
  const auto& fc = cfg.pipeline.filter;
  return {
      {"config_version", cfg.config_version},
      {"fallback_enabled", cfg.fallback_enabled},
      {"threads", cfg.threads},
      {"embedding", {{"dimension", cfg.embedding.dimension}, {"seed", cfg.embedding.seed}}},
      {"policy",
       {{"min_placements", cfg.policy.min_placements},
        {"max_placements", cfg.policy.max_placements},
        {"min_slate_size", cfg.policy.min_slate_size},
        {"max_keywords_per_placement", cfg.policy.max_keywords_per_placement},
        {"banned_terms", cfg.policy.banned_terms},
        {"required_theme_tags", cfg.policy.required_theme_tags}}},
      {"pipeline",
       {{"m_default", pc.m_default},
        {"theme_generator", pc.theme_generator},
        {"keyword_generator", pc.keyword_generator},
        {"relevance_scorer", pc.relevance_scorer},
        {"k_per_concept", pc.candidates.k_per_concept},
        {"cap", pc.candidates.cap},
        {"max_kw", pc.candidates.max_kw},
        {"slate_limit", pc.slate_limit},
        {"retrieval_limit", pc.retrieval_limit},
        {"cache_ttl_seconds", pc.cache_ttl_seconds}}},
      {"filter",
       {{"dedup_threshold", fc.dedup_threshold},
        {"relevance_threshold", fc.relevance_threshold},
        {"min_slate_size", fc.min_slate_size},
        {"dedup_with_concepts", fc.dedup_with_concepts}}},
      {"eval", {{"ks", cfg.eval.ks}, {"sample_size", cfg.eval.sample_size}}},
      {"fallback_plan", to_json(cfg.fallback_plan)},
  };
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace cascade
