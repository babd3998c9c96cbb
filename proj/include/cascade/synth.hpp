#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "cascade/config.hpp"
#include "cascade/generators.hpp"
#include "cascade/types.hpp"

namespace cascade::synth {

struct Options {
  std::uint64_t seed = 7;
  std::size_t corpus_size = 10000;
  std::size_t catalog_size = 500;
  std::size_t users = 100;
  // Probability that an eligible keyword -> product posting is kept. Low
  // values produce sparse catalogs that exercise the collapse guard.
  double coverage = 0.9;
  double availability = 0.95;
  double empty_history_rate = 0.03;
};

struct Dataset {
  std::vector<Keyword> corpus;
  std::vector<Product> catalog;
  std::vector<UserContext> users;
  FallbackPlan fallback_plan;
};

// Fully determined by opts (bit-exact across platforms).
Dataset generate(const Options& opts);

// Writes corpus.jsonl, catalog.jsonl, users.jsonl, config.json and
// manifest.json under dir.
void write(const Dataset& data, const Options& opts, const AppConfig& base_config,
           const std::filesystem::path& dir);

}  // namespace cascade::synth
