#include <random>

#include <gtest/gtest.h>

#include "cascade/errors.hpp"
#include "cascade/quality.hpp"
#include "support.hpp"

namespace cascade {
namespace {

using testing::product;
using testing::theme;

// Titles drawn from a tiny vocabulary so exact and near duplicates are common.
std::vector<Theme> random_themes(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> words = {"fresh", "fruit", "snack", "time",
                                                 "Organic", "milk", "quick", "dinner"};
  std::vector<Theme> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string title;
    const std::size_t len = 1 + rng() % 3;
    for (std::size_t w = 0; w < len; ++w) {
      if (w) title += (rng() % 2 ? " " : "  ");
      title += words[rng() % words.size()];
    }
    out.push_back(theme(title, {words[rng() % words.size()]}, i));
  }
  return out;
}

TEST(Dedup, IdenticalNormalizedTitlesDropSecond) {
  const StubEmbeddingProvider p;
  const std::vector<Theme> in = {theme("Snack Time", {"chips"}, 0),
                                 theme("Breakfast", {"eggs"}, 1),
                                 theme("snack  time", {"nuts"}, 2)};
  const auto out = dedup_themes(in, p, FilterConfig{});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].title, "Snack Time");
  EXPECT_EQ(out[1].title, "Breakfast");
}

TEST(Dedup, DistinctTitlesPreservedAtHighThreshold) {
  const StubEmbeddingProvider p;
  FilterConfig cfg;
  cfg.dedup_threshold = 0.999;
  const std::vector<Theme> in = {theme("Fresh fruit picks", {"fruit"}, 0),
                                 theme("Organic milk picks", {"milk"}, 1),
                                 theme("Quick dinner", {"pasta"}, 2)};
  EXPECT_EQ(dedup_themes(in, p, cfg), in);
}

TEST(Dedup, MatchesGreedyOracleAndIsIdempotent) {
  const StubEmbeddingProvider p;
  std::mt19937_64 rng(2024);
  for (const double threshold : {0.9, 0.7, 0.5}) {
    for (const bool with_concepts : {false, true}) {
      FilterConfig cfg;
      cfg.dedup_threshold = threshold;
      cfg.dedup_with_concepts = with_concepts;
      for (int trial = 0; trial < 30; ++trial) {
        const auto in = random_themes(rng, 20);
        const auto out = dedup_themes(in, p, cfg);
        const auto keep = testing::dedup_oracle(in, p, cfg);
        ASSERT_EQ(out.size(), keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) ASSERT_EQ(out[i], in[keep[i]]);
        ASSERT_EQ(dedup_themes(out, p, cfg), out);
      }
    }
  }
}

TEST(Dedup, ConfigValidation) {
  FilterConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  cfg.dedup_threshold = 0.0;
  EXPECT_THROW(validate(cfg), InvalidInput);
  cfg.dedup_threshold = 1.01;
  EXPECT_THROW(validate(cfg), InvalidInput);
  cfg = {};
  cfg.relevance_threshold = -0.1;
  EXPECT_THROW(validate(cfg), InvalidInput);
}

TEST(LexicalScorer, Fixtures) {
  const LexicalOverlapScorer s;
  const Theme t = theme("Fresh fruit", {"fresh fruit"});
  EXPECT_DOUBLE_EQ(score_relevance(t, product("a", "fresh apple", {"fruit aisle"}, {}), s), 1.0);
  EXPECT_DOUBLE_EQ(score_relevance(t, product("b", "apple juice", {}, {}), s), 0.0);
  EXPECT_DOUBLE_EQ(score_relevance(t, product("c", "fruit cup", {"snacks"}, {}), s), 0.5);
  EXPECT_DOUBLE_EQ(
      score_relevance(theme("Organic milk picks", {"organic milk", "milk"}),
                      product("d", "Acme organic milk", {"dairy", "milk"}, {}), s),
      1.0);
  EXPECT_DOUBLE_EQ(score_relevance(theme("the", {}), product("e", "anything", {}, {}), s), 0.0);
}

TEST(LexicalScorer, PureAndBounded) {
  const LexicalOverlapScorer s;
  std::mt19937_64 rng(8);
  const std::vector<std::string> words = {"milk", "fresh", "bread", "x", "the", "fruit"};
  for (int i = 0; i < 500; ++i) {
    const Theme t = theme(words[rng() % 6] + " " + words[rng() % 6], {words[rng() % 6]});
    const Product p = product("p", words[rng() % 6], {words[rng() % 6]}, {});
    const double a = score_relevance(t, p, s);
    ASSERT_EQ(a, score_relevance(t, p, s));
    ASSERT_GE(a, 0.0);
    ASSERT_LE(a, 1.0);
  }
}

class ConstantScorer final : public RelevanceScorer {
 public:
  explicit ConstantScorer(double v, std::size_t batch_size = SIZE_MAX)
      : v_(v), batch_size_(batch_size) {}
  std::string id() const override { return "constant"; }
  double score(const Theme&, const Product&) const override { return v_; }
  std::vector<double> score_batch(const Theme& t, std::span<const Product> ps) const override {
    if (batch_size_ == SIZE_MAX) return RelevanceScorer::score_batch(t, ps);
    return std::vector<double>(batch_size_, v_);
  }

 private:
  double v_;
  std::size_t batch_size_;
};

TEST(Scoring, OutOfRangeIsClamped) {
  const Theme t = theme("t", {"c"});
  const Product p = product("p", "n", {}, {});
  EXPECT_EQ(score_relevance(t, p, ConstantScorer(1.7)), 1.0);
  EXPECT_EQ(score_relevance(t, p, ConstantScorer(-3)), 0.0);
  EXPECT_EQ(score_relevance(t, p, ConstantScorer(std::nan(""))), 0.0);
  const std::vector<Product> ps = {p, p};
  EXPECT_EQ(score_relevance_batch(t, ps, ConstantScorer(2.0)), (std::vector<double>{1.0, 1.0}));
  EXPECT_THROW(score_relevance_batch(t, ps, ConstantScorer(0.5, 1)), ScorerError);
}

Placement placement_with_scores(const std::string& title, const std::vector<double>& scores) {
  Placement pl;
  pl.theme = theme(title, {title});
  for (std::size_t i = 0; i < scores.size(); ++i) {
    pl.slate.push_back({product(title + std::to_string(i), "n", {}, {}), scores[i]});
  }
  sort_slate(pl.slate);
  pl.recall_volume = scores.size();
  return pl;
}

TEST(Prune, ZeroThresholdKeepsEveryProduct) {
  FilterConfig cfg;
  cfg.relevance_threshold = 0.0;
  const auto in = placement_with_scores("a", {0.0, 0.1, 0.2, 0.3, 0.9});
  const auto out = prune_placements({in}, cfg);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].slate, in.slate);
}

TEST(Prune, CollapsedPlacementDropped) {
  FilterConfig cfg;
  cfg.min_slate_size = 3;
  const auto out = prune_placements({placement_with_scores("a", {0.9, 0.1, 0.2})}, cfg);
  EXPECT_TRUE(out.empty());
}

TEST(Prune, TenProductFixtureAroundThreshold) {
  FilterConfig cfg;  // threshold 0.5, min slate 4
  const std::vector<double> scores = {0.49, 0.5, 0.51, 0.0, 1.0, 0.75, 0.499999, 0.6, 0.25, 0.5};
  const auto out = prune_placements({placement_with_scores("a", scores)}, cfg);
  ASSERT_EQ(out.size(), 1u);
  // By hand: 1.0 a4, 0.75 a5, 0.6 a7, 0.51 a2, 0.5 a1, 0.5 a9.
  std::vector<std::string> ids;
  for (const auto& sp : out[0].slate) ids.push_back(sp.product.product_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"a4", "a5", "a7", "a2", "a1", "a9"}));
  EXPECT_EQ(out[0].recall_volume, 10u);
}

TEST(Prune, NeverGrowsAndRespectsMinimum) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u;
  FilterConfig cfg;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Placement> in;
    for (int i = 0; i < 5; ++i) {
      std::vector<double> s(rng() % 12);
      for (auto& x : s) x = u(rng);
      in.push_back(placement_with_scores("t" + std::to_string(i), s));
    }
    const auto out = prune_placements(in, cfg);
    ASSERT_LE(out.size(), in.size());
    for (const auto& p : out) {
      ASSERT_GE(p.slate.size(), cfg.min_slate_size);
      ASSERT_TRUE(is_slate_sorted(p.slate));
      const auto src = std::find_if(in.begin(), in.end(),
                                    [&](const Placement& x) { return x.theme == p.theme; });
      ASSERT_NE(src, in.end());
      ASSERT_LE(p.slate.size(), src->slate.size());
    }
  }
}

}  // namespace
}  // namespace cascade
