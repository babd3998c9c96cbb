#include "cascade/service.hpp"

#include <httplib.h>

#include <fstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "cascade/errors.hpp"
#include "cascade/parallel.hpp"
#include "cascade/records.hpp"
#include "cascade/remote.hpp"

namespace cascade::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

bool is_http(const std::string& name) { return name.rfind("http://", 0) == 0; }

std::size_t thread_count(const AppConfig& cfg) {
  return cfg.threads == 0 ? default_threads() : cfg.threads;
}

// The lock guards the artifact directory when there is one, else the output.
fs::path lock_dir(const RunManifest& m) { return m.artifacts ? *m.artifacts : m.out; }

}  // namespace

RunManifest manifest_from_json(const json& j, const fs::path& base_dir) {
  const auto path_of = [&](const char* key) -> fs::path {
    if (!j.contains(key) || !j.at(key).is_string()) {
      throw InvalidInput(std::string("manifest: missing string field '") + key + "'");
    }
    const fs::path p = j.at(key).get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  RunManifest m;
  m.config = path_of("config");
  m.corpus = path_of("corpus");
  m.catalog = path_of("catalog");
  m.users = path_of("users");
  m.out = path_of("out");
  if (j.contains("artifacts") && !j.at("artifacts").is_null()) m.artifacts = path_of("artifacts");
  if (!j.contains("seed") || !j.at("seed").is_number_unsigned()) {
    throw InvalidInput("manifest: missing non-negative integer field 'seed'");
  }
  m.seed = j.at("seed").get<std::uint64_t>();
  for (const auto* p : {&m.config, &m.corpus, &m.catalog, &m.users}) {
    if (!fs::is_regular_file(*p)) throw InvalidInput("manifest: cannot read " + p->string());
  }
  return m;
}

RunManifest load_manifest(const fs::path& path) {
  auto in = open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput("manifest " + path.string() + ": " + e.what());
  }
  return manifest_from_json(j, path.parent_path());
}

std::unique_ptr<ThemeGenerator> make_theme_generator(const std::string& name,
                                                     const ProductIndex& catalog,
                                                     std::uint64_t seed) {
  using Mode = FailingThemeGenerator::Mode;
  if (name == "stub") return std::make_unique<StubThemeGenerator>(catalog, seed);
  if (name == "failing") return std::make_unique<FailingThemeGenerator>(Mode::Throw);
  if (name == "failing:malformed") return std::make_unique<FailingThemeGenerator>(Mode::Malformed);
  if (name == "failing:short") return std::make_unique<FailingThemeGenerator>(Mode::ShortCount);
  if (is_http(name)) return std::make_unique<remote::HttpThemeGenerator>(remote::parse_endpoint(name));
  throw InvalidInput("unknown theme generator: " + name);
}

std::unique_ptr<KeywordGenerator> make_keyword_generator(const std::string& name) {
  if (name == "stub") return std::make_unique<StubKeywordGenerator>();
  if (is_http(name)) {
    return std::make_unique<remote::HttpKeywordGenerator>(remote::parse_endpoint(name));
  }
  throw InvalidInput("unknown keyword generator: " + name);
}

std::unique_ptr<RelevanceScorer> make_relevance_scorer(const std::string& name) {
  if (name == "stub") return std::make_unique<LexicalOverlapScorer>();
  if (is_http(name)) {
    return std::make_unique<remote::HttpRelevanceScorer>(remote::parse_endpoint(name));
  }
  throw InvalidInput("unknown relevance scorer: " + name);
}

Runtime::Runtime(RunManifest manifest) : manifest_(std::move(manifest)) {
  config_ = load_config(manifest_.config);
  load();
}

Runtime::Runtime(RunManifest manifest, AppConfig config)
    : manifest_(std::move(manifest)), config_(std::move(config)) {
  load();
}

void Runtime::load() {
  embedder_ = std::make_unique<StubEmbeddingProvider>(config_.embedding.dimension,
                                                      config_.embedding.seed);
  input_digest_ = cascade::input_digest(manifest_.corpus, manifest_.catalog, config_.embedding);
  if (manifest_.artifacts && artifacts_match(*manifest_.artifacts, input_digest_)) {
    auto loaded = load_artifacts(*manifest_.artifacts);
    corpus_ = std::move(loaded.corpus);
    index_ = std::move(loaded.index);
    file_digests_ = std::move(loaded.file_digests);
    artifacts_loaded_ = true;
    spdlog::info("loaded artifacts from {}", manifest_.artifacts->string());
  } else {
    if (manifest_.artifacts) {
      spdlog::warn("artifacts in {} are missing or stale; indexing inputs in memory",
                   manifest_.artifacts->string());
    }
    {
      auto in = open_in(manifest_.corpus);
      corpus_ = build_corpus(in, *embedder_);
    }
    auto in = open_in(manifest_.catalog);
    index_ = ProductIndex::build(parse_product_records(in), corpus_);
  }
  if (corpus_.dimension() != config_.embedding.dimension) {
    throw DimensionMismatch(config_.embedding.dimension, corpus_.dimension());
  }
  validate_fallback_plan(config_.fallback_plan, corpus_);

  {
    auto in = open_in(manifest_.users);
    users_ = parse_user_records(in);
  }
  for (std::size_t i = 0; i < users_.size(); ++i) {
    if (!user_pos_.emplace(users_[i].user_id, i).second) {
      throw InvalidInput("duplicate user_id in users file: " + users_[i].user_id);
    }
  }

  const auto& pc = config_.pipeline;
  theme_generator_ = make_theme_generator(pc.theme_generator, index_, manifest_.seed);
  keyword_generator_ = make_keyword_generator(pc.keyword_generator);
  scorer_ = make_relevance_scorer(pc.relevance_scorer);
}

const UserContext* Runtime::find_user(const std::string& user_id) const {
  const auto it = user_pos_.find(user_id);
  return it == user_pos_.end() ? nullptr : &users_[it->second];
}

PipelineDeps Runtime::deps() const {
  return {corpus_,           index_,   *embedder_,           *theme_generator_,
          *keyword_generator_, *scorer_, config_.fallback_plan};
}

IngestResult cmd_ingest(const fs::path& corpus_path, const fs::path& catalog_path,
                        const fs::path& out_dir, const EmbeddingSettings& embedding) {
  return ingest(corpus_path, catalog_path, out_dir, embedding);
}

GenerateSummary cmd_generate(const Runtime& rt) {
  const RunManifest& m = rt.manifest();
  DirectoryLock lock(lock_dir(m));
  fs::create_directories(m.out);

  const auto& cfg = rt.config();
  const auto deps = rt.deps();
  const auto& users = rt.users();

  struct Outcome {
    std::optional<BuildResult> result;
    std::string error;
  };
  std::vector<Outcome> outcomes(users.size());
  parallel_for(users.size(), thread_count(cfg), [&](std::size_t i) {
    try {
      outcomes[i].result = build_storefront_audited(users[i], cfg.policy, cfg.pipeline, deps);
    } catch (const std::exception& e) {
      // build_storefront_audited already degrades to fallback; reaching here
      // means the fallback itself failed.
      outcomes[i].error = e.what();
    }
  });

  GenerateSummary summary;
  summary.users = users.size();
  summary.storefronts_path = m.out / "storefronts.jsonl";
  summary.audit_path = m.out / "audit.jsonl";
  auto sf_out = open_out(summary.storefronts_path);
  auto audit_out = open_out(summary.audit_path);
  for (std::size_t i = 0; i < users.size(); ++i) {
    const auto& o = outcomes[i];
    if (!o.result) {
      ++summary.failures;
      spdlog::error("user {}: {}", users[i].user_id, o.error);
      const json err = {{"user_id", users[i].user_id}, {"error", o.error}, {"seed", rt.seed()}};
      sf_out << err.dump() << '\n';
      audit_out << err.dump() << '\n';
      continue;
    }
    const auto& r = *o.result;
    if (r.storefront.provenance == Provenance::Fallback) {
      ++summary.fallback;
    } else {
      ++summary.generated;
    }
    if (!r.audit.reconciles()) {
      ++summary.unreconciled;
      spdlog::error("user {}: audit counts do not reconcile", users[i].user_id);
    }
    sf_out << to_json(r.storefront, rt.seed()).dump() << '\n';
    json a = to_json(r.audit, false);
    a["seed"] = rt.seed();
    audit_out << a.dump() << '\n';
  }
  return summary;
}

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> kNames = {"generated", "fallback"};
  return kNames;
}

EvalSummary cmd_eval(const Runtime& rt, const std::vector<std::string>& policies) {
  if (policies.empty()) throw InvalidInput("no policies given");
  const auto& names = policy_names();
  for (const auto& p : policies) {
    if (std::find(names.begin(), names.end(), p) == names.end()) {
      throw InvalidInput("unknown policy: " + p);
    }
  }
  const RunManifest& m = rt.manifest();
  DirectoryLock lock(lock_dir(m));
  fs::create_directories(m.out);

  const auto& cfg = rt.config();
  const auto deps = rt.deps();
  const auto sample = eval::sample_users(rt.users(), cfg.eval.sample_size, rt.seed());
  const eval::CategoryProductJudge product_judge;
  const eval::ProfileKeywordJudge keyword_judge(rt.index());
  const eval::Judges judges{product_judge, keyword_judge};

  EvalSummary summary;
  for (const auto& name : policies) {
    eval::StorefrontPolicy policy;
    if (name == "generated") {
      policy = [&](const UserContext& ctx) {
        return build_storefront(ctx, cfg.policy, cfg.pipeline, deps);
      };
    } else {
      policy = [&](const UserContext& ctx) {
        return serve_fallback(ctx, cfg.policy, cfg.pipeline, deps);
      };
    }
    auto report =
        eval::evaluate_policy(name, sample, policy, judges, cfg.eval.ks, thread_count(cfg));
    report.seed = rt.seed();
    if (report.n_failures > 0) summary.all_completed = false;
    summary.reports.push_back(std::move(report));
  }
  summary.table = eval::render_table(summary.reports, cfg.eval.ks);
  summary.report_path = m.out / "report.jsonl";
  {
    auto out = open_out(summary.report_path);
    for (const auto& r : summary.reports) out << to_json(r).dump() << '\n';
  }
  auto out = open_out(m.out / "report.txt");
  out << summary.table;
  return summary;
}

StorefrontServer::StorefrontServer(const Runtime& rt, StorefrontCache& cache)
    : rt_(rt), cache_(cache), server_(std::make_unique<httplib::Server>()) {
  // Small JSON responses on keep-alive sockets otherwise stall on Nagle.
  server_->set_tcp_nodelay(true);
  install_routes();
}

StorefrontServer::~StorefrontServer() { stop(); }

void StorefrontServer::install_routes() {
  const auto send_json = [](httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  };

  server_->Get(R"(/storefront/([^/]+))", [this, send_json](const httplib::Request& req,
                                                           httplib::Response& res) {
    const std::string user_id = req.matches[1];
    const auto& cfg = rt_.config();
    try {
      Storefront sf;
      if (const UserContext* ctx = rt_.find_user(user_id)) {
        sf = get_or_build(*ctx, cfg.policy, cfg.pipeline, cache_, rt_.deps());
      } else if (cfg.fallback_enabled) {
        UserContext anon;
        anon.user_id = user_id;
        sf = serve_fallback(anon, cfg.policy, cfg.pipeline, rt_.deps());
      } else {
        send_json(res, 404, {{"error", "unknown user"}, {"user_id", user_id}});
        return;
      }
      res.set_header("X-Provenance", to_string(sf.provenance));
      send_json(res, 200, to_json(sf, rt_.seed()));
    } catch (const std::exception& e) {
      spdlog::error("GET /storefront/{}: {}", user_id, e.what());
      send_json(res, 500, {{"error", e.what()}});
    }
  });

  server_->Get("/health", [this, send_json](const httplib::Request&, httplib::Response& res) {
    json files = json::object();
    for (const auto& [name, sha] : rt_.file_digests()) files[name] = sha;
    send_json(res, 200,
              {{"status", "ok"},
               {"config_version", rt_.config().config_version},
               {"seed", rt_.seed()},
               {"input_digest", rt_.input_digest()},
               {"artifacts", {{"loaded", rt_.artifacts_loaded()}, {"files", files}}},
               {"cache_size", cache_.size()},
               {"users", rt_.users().size()}});
  });

  server_->Post("/invalidate", [this, send_json](const httplib::Request& req,
                                                 httplib::Response& res) {
    std::optional<std::string> user_id;
    std::optional<std::string> version;
    try {
      const json body = req.body.empty() ? json::object() : json::parse(req.body);
      if (body.contains("user_id")) user_id = body.at("user_id").get<std::string>();
      if (body.contains("config_version")) version = body.at("config_version").get<std::string>();
    } catch (const json::exception& e) {
      send_json(res, 400, {{"error", e.what()}});
      return;
    }
    const std::size_t removed = invalidate(cache_, [&](const CacheKey& k) {
      return (!user_id || k.user_id == *user_id) && (!version || k.config_version == *version);
    });
    send_json(res, 200, {{"removed", removed}});
  });
}

int StorefrontServer::start(const std::string& host, int port) {
  if (thread_.joinable()) throw Error("server already started");
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void StorefrontServer::stop() {
  if (!thread_.joinable()) return;
  server_->stop();
  thread_.join();
}

}  // namespace cascade::service
