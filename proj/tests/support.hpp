#pragma once

// Fixtures and independent reference implementations shared by the unit
// tests and the acceptance runner. The oracles here deliberately avoid the
// library's own ranking, merging and reduction code paths.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "cascade/config.hpp"
#include "cascade/corpus.hpp"
#include "cascade/digest.hpp"
#include "cascade/embedding.hpp"
#include "cascade/generators.hpp"
#include "cascade/pipeline.hpp"
#include "cascade/product_index.hpp"
#include "cascade/quality.hpp"
#include "cascade/synth.hpp"

namespace cascade::testing {

inline Keyword kw(std::string id, std::string surface,
                  std::vector<std::string> taxonomy = {}) {
  return {std::move(id), std::move(surface), std::move(taxonomy)};
}

inline Product product(std::string id, std::string name, std::vector<std::string> category,
                       std::vector<std::string> keyword_ids, bool available = true) {
  return {std::move(id), std::move(name), std::move(category), std::move(keyword_ids),
          available};
}

inline Theme theme(std::string title, std::vector<std::string> concepts,
                   std::size_t rank_hint = 0, std::string persona = "shopper") {
  return {std::move(title), std::move(persona), std::move(concepts), rank_hint};
}

// Unit-norm random vectors; a fraction `dup_rate` of rows copy an earlier row
// so that similarity ties occur and exercise id tie-breaking.
inline KeywordCorpus random_corpus(std::size_t n, std::size_t dim, std::mt19937_64& rng,
                                   double dup_rate = 0.05) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  std::vector<Keyword> entries;
  std::vector<float> data;
  data.reserve(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "k%06zu", i);
    entries.push_back(kw(id, std::string("surface ") + id));
    if (i > 0 && unit(rng) < dup_rate) {
      const std::size_t src = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
      for (std::size_t d = 0; d < dim; ++d) data.push_back(data[src * dim + d]);
      continue;
    }
    std::vector<double> v(dim);
    for (auto& x : v) x = normal(rng);
    const auto e = EmbeddingVector::normalized(std::move(v));
    data.insert(data.end(), e.values().begin(), e.values().end());
  }
  // Shuffle ids against rows so corpus order and id order differ.
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Keyword> shuffled;
  for (std::size_t i = 0; i < n; ++i) shuffled.push_back(entries[perm[i]]);
  return KeywordCorpus::from_parts(std::move(shuffled), std::move(data), dim);
}

inline EmbeddingVector random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(dim);
  for (auto& x : v) x = normal(rng);
  return EmbeddingVector::normalized(std::move(v));
}

struct OracleHit {
  std::string id;
  double sim;
};

inline double oracle_dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

// Full sort of every row by (similarity desc, id asc), then cut at k.
inline std::vector<OracleHit> knn_oracle(const KeywordCorpus& corpus,
                                         const EmbeddingVector& q, std::size_t k) {
  std::vector<OracleHit> all;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    all.push_back({corpus.entry(i).keyword_id, oracle_dot(corpus.vector(i), q.values())});
  }
  std::stable_sort(all.begin(), all.end(), [](const OracleHit& a, const OracleHit& b) {
    return a.sim > b.sim || (a.sim == b.sim && a.id < b.id);
  });
  if (all.size() > k) all.resize(k);
  return all;
}

// Per concept: oracle knn; merge keeping the max similarity per id; sort; cut.
inline std::vector<OracleHit> candidate_oracle(const Theme& t, const KeywordCorpus& corpus,
                                               const EmbeddingProvider& provider,
                                               std::size_t k_per_concept, std::size_t cap) {
  std::map<std::string, double> best;
  for (const auto& c : t.product_concepts) {
    for (const auto& h : knn_oracle(corpus, embed(c, provider), k_per_concept)) {
      auto it = best.find(h.id);
      if (it == best.end()) {
        best[h.id] = h.sim;
      } else {
        it->second = std::max(it->second, h.sim);
      }
    }
  }
  std::vector<OracleHit> merged;
  for (const auto& [id, s] : best) merged.push_back({id, s});
  std::stable_sort(merged.begin(), merged.end(), [](const OracleHit& a, const OracleHit& b) {
    return a.sim > b.sim;  // map order already breaks ties by id
  });
  if (merged.size() > cap) merged.resize(cap);
  return merged;
}

// Pairwise similarity matrix first, then the greedy first-wins sweep.
inline std::vector<std::size_t> dedup_oracle(const std::vector<Theme>& themes,
                                             const EmbeddingProvider& provider,
                                             const FilterConfig& cfg) {
  const std::size_t n = themes.size();
  std::vector<EmbeddingVector> vecs;
  for (const auto& t : themes) vecs.push_back(embed(dedup_text(t, cfg), provider));
  std::vector<std::vector<double>> sim(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) sim[i][j] = oracle_dot(vecs[i].values(), vecs[j].values());
  }
  std::vector<bool> keep(n, false);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    bool dup = false;
    for (std::size_t j = 0; j < i; ++j) {
      if (keep[j] && sim[i][j] >= cfg.dedup_threshold) dup = true;
    }
    keep[i] = !dup;
    if (keep[i]) out.push_back(i);
  }
  return out;
}

// Standard normal CDF by composite Simpson integration of the density from 0.
inline double normal_cdf_simpson(double x) {
  const double a = std::fabs(x);
  const int n = 20000;  // even
  const double h = a / n;
  auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
  double s = pdf(0.0) + pdf(a);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
  const double half = s * h / 3.0;
  return x >= 0 ? 0.5 + half : 0.5 - half;
}

// Two-sided pooled two-proportion z-test.
inline double z_test_oracle(double sc, double nc, double st, double nt) {
  const double pc = sc / nc;
  const double pt = st / nt;
  const double pooled = (sc + st) / (nc + nt);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / nc + 1.0 / nt));
  if (se == 0.0) return 1.0;
  const double z = (pt - pc) / se;
  return 2.0 * (1.0 - normal_cdf_simpson(std::fabs(z)));
}

// A synthetic dataset with its index and the stub models wired up.
struct World {
  synth::Dataset data;
  AppConfig config;
  StubEmbeddingProvider embedder;
  KeywordCorpus corpus;
  ProductIndex index;
  std::unique_ptr<ThemeGenerator> theme_gen;
  StubKeywordGenerator keyword_gen;
  LexicalOverlapScorer scorer;

  explicit World(const synth::Options& opts, std::uint64_t seed = 7)
      : data(synth::generate(opts)),
        embedder(config.embedding.dimension, config.embedding.seed) {
    config.fallback_plan = data.fallback_plan;
    corpus = build_corpus(data.corpus, embedder);
    index = ProductIndex::build(data.catalog, corpus);
    theme_gen = std::make_unique<StubThemeGenerator>(index, seed);
  }

  PipelineDeps deps() const {
    return {corpus, index, embedder, *theme_gen, keyword_gen, scorer, config.fallback_plan};
  }
  PipelineDeps deps_with(const ThemeGenerator& g) const {
    return {corpus, index, embedder, g, keyword_gen, scorer, config.fallback_plan};
  }
};

inline synth::Options small_options(std::size_t users = 20) {
  synth::Options o;
  o.corpus_size = 2000;
  o.catalog_size = 300;
  o.users = users;
  return o;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() /
                 ("cascade_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace cascade::testing
