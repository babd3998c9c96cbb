// cascade: command-line front end.
//
//   cascade synth      --out DIR [--seed N] [--users N] [--corpus-size N]
//                      [--catalog-size N] [--coverage P] [--config BASE]
//   cascade ingest     (--manifest M | --corpus F --catalog F --out DIR) [--config F]
//   cascade generate   --manifest M [--seed N] [--out DIR] [--config F]
//   cascade eval       --manifest M [--policies a,b] [--seed N] [--out DIR] [--config F]
//   cascade serve      --manifest M [--host H] [--port P] [--seed N] [--config F]
//   cascade invalidate [--host H] --port P [--user-id ID] [--config-version V]
//
// Exit status: 0 success, 1 runtime failure, 2 usage error.

#include <httplib.h>
#include <signal.h>

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cascade/config.hpp"
#include "cascade/errors.hpp"
#include "cascade/service.hpp"
#include "cascade/synth.hpp"

namespace {

namespace fs = std::filesystem;
using namespace cascade;

struct RunFlags {
  std::string manifest;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string config;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool manifest_required = true) {
  auto* opt = cmd->add_option("--manifest", f.manifest, "Run manifest (JSON)");
  if (manifest_required) opt->required();
  cmd->add_option("--seed", f.seed, "Override the manifest seed");
  cmd->add_option("--out", f.out, "Override the output directory");
  cmd->add_option("--config", f.config, "Override the config file");
}

service::RunManifest resolve_manifest(const RunFlags& f) {
  auto m = service::load_manifest(f.manifest);
  if (f.seed) m.seed = *f.seed;
  if (!f.out.empty()) m.out = f.out;
  if (!f.config.empty()) m.config = f.config;
  return m;
}

int run_synth(const fs::path& out, const synth::Options& opts, const std::string& base) {
  const AppConfig cfg = base.empty() ? AppConfig{} : load_config(base);
  const auto data = synth::generate(opts);
  synth::write(data, opts, cfg, out);
  std::cout << "wrote " << data.corpus.size() << " keywords, " << data.catalog.size()
            << " products, " << data.users.size() << " users to " << out.string() << '\n';
  return 0;
}

int run_ingest(const RunFlags& f, std::string corpus, std::string catalog) {
  EmbeddingSettings embedding;
  fs::path out_dir = f.out;
  if (!f.manifest.empty()) {
    auto m = service::load_manifest(f.manifest);
    if (corpus.empty()) corpus = m.corpus.string();
    if (catalog.empty()) catalog = m.catalog.string();
    if (out_dir.empty() && m.artifacts) out_dir = *m.artifacts;
    embedding = load_config(f.config.empty() ? m.config : fs::path(f.config)).embedding;
  } else if (!f.config.empty()) {
    embedding = load_config(f.config).embedding;
  }
  if (corpus.empty() || catalog.empty() || out_dir.empty()) {
    throw InvalidInput("ingest needs --manifest or --corpus, --catalog and --out");
  }
  const auto r = service::cmd_ingest(corpus, catalog, out_dir, embedding);
  if (r.up_to_date) {
    std::cout << "up to date (" << r.digest << ")\n";
  } else {
    std::cout << "ingested " << r.keywords << " keywords, " << r.products << " products into "
              << out_dir.string() << " (" << r.digest << ")\n";
  }
  return 0;
}

int run_generate(const RunFlags& f) {
  const service::Runtime rt(resolve_manifest(f));
  const auto s = service::cmd_generate(rt);
  std::cout << s.users << " users: " << s.generated << " generated, " << s.fallback
            << " fallback, " << s.failures << " failed -> " << s.storefronts_path.string()
            << '\n';
  if (s.unreconciled > 0) {
    std::cerr << s.unreconciled << " audit records do not reconcile\n";
    return 1;
  }
  return s.failures == 0 ? 0 : 1;
}

int run_eval(const RunFlags& f, const std::vector<std::string>& policies) {
  for (const auto& p : policies) {
    const auto& names = service::policy_names();
    if (std::find(names.begin(), names.end(), p) == names.end()) {
      throw CLI::ValidationError("--policies", "unknown policy '" + p + "'");
    }
  }
  const service::Runtime rt(resolve_manifest(f));
  const auto s = service::cmd_eval(rt, policies);
  std::cout << s.table;
  return s.all_completed ? 0 : 1;
}

int run_serve(const RunFlags& f, const std::string& host, int port) {
  // Block termination signals before any thread starts so they are all
  // delivered to sigwait below.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const service::Runtime rt(resolve_manifest(f));
  StorefrontCache cache;
  service::StorefrontServer server(rt, cache);
  const int bound = server.start(host, port);
  std::cout << "listening on http://" << host << ':' << bound << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("signal {}, shutting down", sig);
  server.stop();
  return 0;
}

int run_invalidate(const std::string& host, int port, const std::string& user_id,
                   const std::string& version) {
  nlohmann::json body = nlohmann::json::object();
  if (!user_id.empty()) body["user_id"] = user_id;
  if (!version.empty()) body["config_version"] = version;
  httplib::Client client(host, port);
  auto res = client.Post("/invalidate", body.dump(), "application/json");
  if (!res) throw Error("cannot reach " + host + ":" + std::to_string(port));
  if (res->status != 200) throw Error("server returned HTTP " + std::to_string(res->status));
  std::cout << res->body << '\n';
  return 0;
}

// Prints the CLI11 message; --help and --version stay 0, everything else is 2.
int usage_exit(const CLI::App& app, const CLI::ParseError& e) {
  return app.exit(e) == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascaded storefront generation: synth, ingest, generate, eval, serve"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  RunFlags flags;

  auto* synth_cmd = app.add_subcommand("synth", "Write a seeded synthetic dataset and manifest");
  synth::Options synth_opts;
  std::string synth_base;
  synth_cmd->add_option("--out", flags.out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth_opts.seed, "Dataset seed");
  synth_cmd->add_option("--users", synth_opts.users, "Number of users");
  synth_cmd->add_option("--corpus-size", synth_opts.corpus_size, "Keyword corpus size");
  synth_cmd->add_option("--catalog-size", synth_opts.catalog_size, "Catalog size");
  synth_cmd->add_option("--coverage", synth_opts.coverage, "Keyword->product posting rate")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--config", synth_base, "Base config to embed");

  auto* ingest_cmd = app.add_subcommand("ingest", "Embed and index a corpus and catalog");
  std::string corpus_path;
  std::string catalog_path;
  add_run_flags(ingest_cmd, flags, false);
  ingest_cmd->add_option("--corpus", corpus_path, "Keyword corpus (JSONL)");
  ingest_cmd->add_option("--catalog", catalog_path, "Product catalog (JSONL)");

  auto* generate_cmd = app.add_subcommand("generate", "Build storefronts for every user");
  add_run_flags(generate_cmd, flags);

  auto* eval_cmd = app.add_subcommand("eval", "Compare policies on a seeded user sample");
  std::vector<std::string> policies = {"generated", "fallback"};
  add_run_flags(eval_cmd, flags);
  eval_cmd->add_option("--policies", policies, "Comma-separated policy names")->delimiter(',');

  auto* serve_cmd = app.add_subcommand("serve", "Serve storefronts over HTTP");
  std::string host = "127.0.0.1";
  int port = 8080;
  add_run_flags(serve_cmd, flags);
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)");

  auto* invalidate_cmd = app.add_subcommand("invalidate", "Drop cache entries on a server");
  std::string user_id;
  std::string version;
  invalidate_cmd->add_option("--host", host, "Server address");
  invalidate_cmd->add_option("--port", port, "Server port")->required();
  invalidate_cmd->add_option("--user-id", user_id, "Only this user");
  invalidate_cmd->add_option("--config-version", version, "Only this config version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return usage_exit(app, e);
  }
  // Logs go to stderr so stdout carries only command output.
  spdlog::set_default_logger(spdlog::stderr_color_mt("cascade"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*synth_cmd) return run_synth(flags.out, synth_opts, synth_base);
    if (*ingest_cmd) return run_ingest(flags, corpus_path, catalog_path);
    if (*generate_cmd) return run_generate(flags);
    if (*eval_cmd) return run_eval(flags, policies);
    if (*serve_cmd) return run_serve(flags, host, port);
    if (*invalidate_cmd) return run_invalidate(host, port, user_id, version);
  } catch (const CLI::ParseError& e) {
    return usage_exit(app, e);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
