#pragma once

// HTTP adapters for externally hosted models. All bodies are JSON.
//
// Theme generator      POST <url>
//   request   {context: <user record>, policy: {min_placements,
//              max_placements, banned_terms[], required_theme_tags[],
//              config_version}, m}
//   response  [{title, persona, product_concepts[]}]     (validated locally)
//
// Keyword generator    POST <url>
//   request   {theme: {title, persona, product_concepts[]},
//              candidates: [{keyword_id, surface, taxonomy_path[], similarity}],
//              max_keywords}
//   response  {keywords: [keyword_id | surface]}         (set-checked locally)
//
// Relevance scorer     POST <url>
//   request   {theme_title, theme_concepts[], product_name, product_category[]}
//   response  {score}
//                      POST <url>/batch
//   request   {theme_title, theme_concepts[],
//              products: [{product_name, product_category[]}]}
//   response  {scores: []}

#include <chrono>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "cascade/generators.hpp"
#include "cascade/quality.hpp"

namespace cascade::remote {

struct Endpoint {
  std::string host;
  int port = 80;
  std::string path = "/";
};

// Parses "http://host[:port][/path]". Throws InvalidInput.
Endpoint parse_endpoint(const std::string& url);

nlohmann::json theme_request(const ThemeGenerationRequest& req);
nlohmann::json keyword_request(const Theme& theme, const CandidateSet& cands,
                               std::size_t max_kw);
nlohmann::json score_request(const Theme& theme, const Product& product);
nlohmann::json score_batch_request(const Theme& theme, std::span<const Product> products);

class HttpThemeGenerator final : public ThemeGenerator {
 public:
  explicit HttpThemeGenerator(Endpoint ep,
                              std::chrono::milliseconds timeout = std::chrono::seconds(10));
  std::string id() const override;
  RawGeneration generate(const ThemeGenerationRequest& req) const override;

 private:
  Endpoint ep_;
  std::chrono::milliseconds timeout_;
};

class HttpKeywordGenerator final : public KeywordGenerator {
 public:
  explicit HttpKeywordGenerator(Endpoint ep,
                                std::chrono::milliseconds timeout = std::chrono::seconds(10));
  std::string id() const override;
  std::vector<std::string> generate(const Theme& theme, const CandidateSet& cands,
                                    std::size_t max_kw) const override;

 private:
  Endpoint ep_;
  std::chrono::milliseconds timeout_;
};

class HttpRelevanceScorer final : public RelevanceScorer {
 public:
  explicit HttpRelevanceScorer(Endpoint ep,
                               std::chrono::milliseconds timeout = std::chrono::seconds(10));
  std::string id() const override;
  double score(const Theme& theme, const Product& product) const override;
  std::vector<double> score_batch(const Theme& theme,
                                  std::span<const Product> products) const override;

 private:
  Endpoint ep_;
  std::chrono::milliseconds timeout_;
};

}  // namespace cascade::remote
