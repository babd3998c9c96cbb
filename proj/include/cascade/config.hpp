#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cascade/generators.hpp"
#include "cascade/pipeline.hpp"
#include "cascade/types.hpp"

namespace cascade {

struct EmbeddingSettings {
  std::size_t dimension = 64;
  std::uint64_t seed = 0;

  bool operator==(const EmbeddingSettings&) const = default;
};

struct EvalSettings {
  std::vector<std::size_t> ks = {5, 20};
  std::size_t sample_size = 1000;
};

// Every tunable in one versioned file. Missing keys keep the defaults below.
struct AppConfig {
  std::string config_version = "v1";
  EmbeddingSettings embedding;
  PolicyConstraints policy;
  PipelineConfig pipeline;
  EvalSettings eval;
  FallbackPlan fallback_plan;
  bool fallback_enabled = true;
  std::size_t threads = 0;  // 0: hardware concurrency
};

AppConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AppConfig& cfg);
AppConfig load_config(const std::filesystem::path& path);

}  // namespace cascade
