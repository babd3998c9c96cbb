#pragma once

// Batch commands and the storefront HTTP server.
//
// Manifest (paths relative to the manifest's directory):
//   {config, corpus, catalog, users, seed, out, artifacts?}
//
// HTTP:
//   GET  /storefront/{user_id}   storefront record; X-Provenance header
//   GET  /health                 {status, config_version, seed, input_digest,
//                                 artifacts{loaded, files{}}, cache_size, users}
//   POST /invalidate             {user_id?, config_version?} -> {removed}

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cascade/artifacts.hpp"
#include "cascade/cache.hpp"
#include "cascade/config.hpp"
#include "cascade/eval.hpp"
#include "cascade/pipeline.hpp"

namespace httplib {
class Server;
}

namespace cascade::service {

struct RunManifest {
  std::filesystem::path config;
  std::filesystem::path corpus;
  std::filesystem::path catalog;
  std::filesystem::path users;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  std::optional<std::filesystem::path> artifacts;
};

RunManifest manifest_from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir);
// Throws InvalidInput when a field is missing or a path is unreadable.
RunManifest load_manifest(const std::filesystem::path& path);

// Generator factories. Names: "stub", "http://host:port/path"; themes also
// accept "failing", "failing:malformed" and "failing:short".
std::unique_ptr<ThemeGenerator> make_theme_generator(const std::string& name,
                                                     const ProductIndex& catalog,
                                                     std::uint64_t seed);
std::unique_ptr<KeywordGenerator> make_keyword_generator(const std::string& name);
std::unique_ptr<RelevanceScorer> make_relevance_scorer(const std::string& name);

// Everything a command needs, loaded once: config, corpus, product index,
// user contexts and the configured generators. Not movable: deps() hands out
// references into it.
class Runtime {
 public:
  // Loads artifacts from manifest.artifacts when they match the inputs,
  // otherwise parses and embeds the raw corpus and catalog in memory.
  explicit Runtime(RunManifest manifest);
  Runtime(RunManifest manifest, AppConfig config);
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  const RunManifest& manifest() const noexcept { return manifest_; }
  const AppConfig& config() const noexcept { return config_; }
  std::uint64_t seed() const noexcept { return manifest_.seed; }
  const KeywordCorpus& corpus() const noexcept { return corpus_; }
  const ProductIndex& index() const noexcept { return index_; }
  const std::vector<UserContext>& users() const noexcept { return users_; }
  const UserContext* find_user(const std::string& user_id) const;

  PipelineDeps deps() const;

  const std::string& input_digest() const noexcept { return input_digest_; }
  bool artifacts_loaded() const noexcept { return artifacts_loaded_; }
  const std::map<std::string, std::string>& file_digests() const noexcept {
    return file_digests_;
  }

 private:
  void load();

  RunManifest manifest_;
  AppConfig config_;
  KeywordCorpus corpus_;
  ProductIndex index_;
  std::vector<UserContext> users_;
  std::map<std::string, std::size_t> user_pos_;
  std::unique_ptr<EmbeddingProvider> embedder_;
  std::unique_ptr<ThemeGenerator> theme_generator_;
  std::unique_ptr<KeywordGenerator> keyword_generator_;
  std::unique_ptr<RelevanceScorer> scorer_;
  std::string input_digest_;
  bool artifacts_loaded_ = false;
  std::map<std::string, std::string> file_digests_;
};

IngestResult cmd_ingest(const std::filesystem::path& corpus_path,
                        const std::filesystem::path& catalog_path,
                        const std::filesystem::path& out_dir,
                        const EmbeddingSettings& embedding);

struct GenerateSummary {
  std::size_t users = 0;
  std::size_t generated = 0;
  std::size_t fallback = 0;
  std::size_t failures = 0;  // users for which even the fallback failed
  std::size_t unreconciled = 0;
  std::filesystem::path storefronts_path;
  std::filesystem::path audit_path;
};

// One storefront and one audit record per user, in users-file order, to
// <out>/storefronts.jsonl and <out>/audit.jsonl.
GenerateSummary cmd_generate(const Runtime& rt);

struct EvalSummary {
  std::vector<eval::PolicyReport> reports;
  std::string table;
  std::filesystem::path report_path;
  bool all_completed = true;
};

// Known policy names.
const std::vector<std::string>& policy_names();

// Evaluates each named policy on one seeded user sample and writes
// <out>/report.jsonl and <out>/report.txt. Throws InvalidInput for an
// unknown policy name.
EvalSummary cmd_eval(const Runtime& rt, const std::vector<std::string>& policies);

class StorefrontServer {
 public:
  StorefrontServer(const Runtime& rt, StorefrontCache& cache);
  ~StorefrontServer();
  StorefrontServer(const StorefrontServer&) = delete;
  StorefrontServer& operator=(const StorefrontServer&) = delete;

  // Binds host:port (0 picks a free port), serves on a background thread
  // and returns the bound port. Throws Error when binding fails.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();

 private:
  void install_routes();

  const Runtime& rt_;
  StorefrontCache& cache_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace cascade::service
