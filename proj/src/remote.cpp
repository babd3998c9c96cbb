#include "cascade/remote.hpp"

#include <httplib.h>

#include "cascade/errors.hpp"
#include "cascade/records.hpp"

namespace cascade::remote {

using nlohmann::json;

namespace {

// Returns the parsed body of a 200 response; anything else throws E.
template <typename E>
json post_json(const Endpoint& ep, const std::string& path, const json& body,
               std::chrono::milliseconds timeout) {
  httplib::Client client(ep.host, ep.port);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw E("POST " + ep.host + ":" + std::to_string(ep.port) + path + " failed: " +
            httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw E("POST " + path + " returned HTTP " + std::to_string(res->status));
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw E("POST " + path + " returned invalid JSON: " + e.what());
  }
}

std::string url_of(const Endpoint& ep) {
  return "http://" + ep.host + ":" + std::to_string(ep.port) + ep.path;
}

}  // namespace

Endpoint parse_endpoint(const std::string& url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0) throw InvalidInput("expected http:// url: " + url);
  std::string rest = url.substr(kScheme.size());
  Endpoint ep;
  const auto slash = rest.find('/');
  if (slash != std::string::npos) {
    ep.path = rest.substr(slash);
    rest = rest.substr(0, slash);
  }
  const auto colon = rest.rfind(':');
  if (colon != std::string::npos) {
    try {
      ep.port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw InvalidInput("bad port in url: " + url);
    }
    rest = rest.substr(0, colon);
  }
  if (rest.empty()) throw InvalidInput("missing host in url: " + url);
  ep.host = rest;
  return ep;
}

json theme_request(const ThemeGenerationRequest& req) {
  return {{"context", to_json(req.ctx)},
          {"policy",
           {{"min_placements", req.policy.min_placements},
            {"max_placements", req.policy.max_placements},
            {"banned_terms", req.policy.banned_terms},
            {"required_theme_tags", req.policy.required_theme_tags},
            {"config_version", req.policy.config_version}}},
          {"m", req.m}};
}

json keyword_request(const Theme& theme, const CandidateSet& cands, std::size_t max_kw) {
  json candidates = json::array();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    json c = to_json(cands.candidates[i]);
    c["similarity"] = cands.source_similarities.at(i);
    candidates.push_back(std::move(c));
  }
  return {{"theme",
           {{"title", theme.title},
            {"persona", theme.persona},
            {"product_concepts", theme.product_concepts}}},
          {"candidates", std::move(candidates)},
          {"max_keywords", max_kw}};
}

json score_request(const Theme& theme, const Product& product) {
  return {{"theme_title", theme.title},
          {"theme_concepts", theme.product_concepts},
          {"product_name", product.name},
          {"product_category", product.category_path}};
}

json score_batch_request(const Theme& theme, std::span<const Product> products) {
  json items = json::array();
  for (const auto& p : products) {
    items.push_back({{"product_name", p.name}, {"product_category", p.category_path}});
  }
  return {{"theme_title", theme.title},
          {"theme_concepts", theme.product_concepts},
          {"products", std::move(items)}};
}

HttpThemeGenerator::HttpThemeGenerator(Endpoint ep, std::chrono::milliseconds timeout)
    : ep_(std::move(ep)), timeout_(timeout) {}

std::string HttpThemeGenerator::id() const { return "http-theme:" + url_of(ep_); }

RawGeneration HttpThemeGenerator::generate(const ThemeGenerationRequest& req) const {
  // Validation happens in validate_themes; send back the body untouched.
  const json body = post_json<ProviderError>(ep_, ep_.path, theme_request(req), timeout_);
  return {body.dump(), id()};
}

HttpKeywordGenerator::HttpKeywordGenerator(Endpoint ep, std::chrono::milliseconds timeout)
    : ep_(std::move(ep)), timeout_(timeout) {}

std::string HttpKeywordGenerator::id() const { return "http-keyword:" + url_of(ep_); }

std::vector<std::string> HttpKeywordGenerator::generate(const Theme& theme,
                                                        const CandidateSet& cands,
                                                        std::size_t max_kw) const {
  const json body = post_json<ProviderError>(ep_, ep_.path,
                                              keyword_request(theme, cands, max_kw), timeout_);
  try {
    return body.at("keywords").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ProviderError(std::string("keyword response: ") + e.what());
  }
}

HttpRelevanceScorer::HttpRelevanceScorer(Endpoint ep, std::chrono::milliseconds timeout)
    : ep_(std::move(ep)), timeout_(timeout) {}

std::string HttpRelevanceScorer::id() const { return "http-scorer:" + url_of(ep_); }

double HttpRelevanceScorer::score(const Theme& theme, const Product& product) const {
  const json body =
      post_json<ScorerError>(ep_, ep_.path, score_request(theme, product), timeout_);
  try {
    return body.at("score").get<double>();
  } catch (const json::exception& e) {
    throw ScorerError(std::string("score response: ") + e.what());
  }
}

std::vector<double> HttpRelevanceScorer::score_batch(
    const Theme& theme, std::span<const Product> products) const {
  if (products.empty()) return {};
  const std::string path = (ep_.path == "/" ? "" : ep_.path) + "/batch";
  const json body =
      post_json<ScorerError>(ep_, path, score_batch_request(theme, products), timeout_);
  try {
    return body.at("scores").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ScorerError(std::string("batch score response: ") + e.what());
  }
}

}  // namespace cascade::remote
