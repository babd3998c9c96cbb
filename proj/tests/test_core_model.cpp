#include <random>

#include <gtest/gtest.h>

#include "cascade/digest.hpp"
#include "cascade/errors.hpp"
#include "cascade/text.hpp"
#include "cascade/types.hpp"
#include "support.hpp"

namespace cascade {
namespace {

using testing::product;
using testing::theme;

TEST(NormalizeText, Examples) {
  EXPECT_EQ(normalize_text("  Sparkling   Water "), "sparkling water");
  EXPECT_EQ(normalize_text("sparkling water"), "sparkling water");
  EXPECT_EQ(normalize_text(""), "");
  EXPECT_EQ(normalize_text("\tSnack\nTime\r"), "snack time");
}

TEST(NormalizeText, IdempotentOnRandomStrings) {
  std::mt19937_64 rng(11);
  const std::string alphabet = "aBcZ 09\t\n\r-_.!\x7f\xc3\xa9";
  std::uniform_int_distribution<std::size_t> len(0, 40);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) s.push_back(alphabet[pick(rng)]);
    const std::string once = normalize_text(s);
    ASSERT_EQ(normalize_text(once), once) << "input: " << s;
  }
}

TEST(Tokenize, SplitsAndDropsStopwords) {
  EXPECT_EQ(tokenize("Fresh fruit picks"), (std::vector<std::string>{"fresh", "fruit"}));
  EXPECT_EQ(tokenize("fresh apple / fruit aisle"),
            (std::vector<std::string>{"fresh", "apple", "fruit", "aisle"}));
  EXPECT_TRUE(tokenize("the and of").empty());
}

TEST(Digest, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Digest, SplitMixBelowStaysInRange) {
  SplitMix64 rng(3);
  for (int i = 0; i < 10000; ++i) ASSERT_LT(rng.below(7), 7u);
  SplitMix64 a(5), b(5);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next(), b.next());
}

UserContext sample_ctx() {
  UserContext ctx;
  ctx.user_id = "u1";
  ctx.purchase_history = {{"p1", 100, 2}, {"p2", 200, 1}};
  ctx.engagement_signals = {{"sessions_30d", 3.0}, {"cart_rate", 0.25}};
  ctx.preferences = {"dietary:vegetarian"};
  return ctx;
}

TEST(ContextHash, DeterministicAndSensitive) {
  const UserContext ctx = sample_ctx();
  PolicyConstraints v1;
  PolicyConstraints v2;
  v2.config_version = "v2";
  EXPECT_EQ(context_hash(ctx, v1), context_hash(ctx, v1));
  EXPECT_EQ(context_hash(ctx, v1).size(), 64u);
  EXPECT_NE(context_hash(ctx, v1), context_hash(ctx, v2));

  UserContext more = ctx;
  more.purchase_history.push_back({"p3", 300, 1});
  EXPECT_NE(context_hash(ctx, v1), context_hash(more, v1));
}

TEST(ContextHash, LengthPrefixPreventsConcatenationCollisions) {
  UserContext a = sample_ctx();
  UserContext b = sample_ctx();
  a.preferences = {"ab", "c"};
  b.preferences = {"a", "bc"};
  EXPECT_NE(context_hash(a, {}), context_hash(b, {}));
}

TEST(ContextHash, NegativeZeroSignalEqualsZero) {
  UserContext a = sample_ctx();
  UserContext b = sample_ctx();
  a.engagement_signals["x"] = 0.0;
  b.engagement_signals["x"] = -0.0;
  EXPECT_EQ(context_hash(a, {}), context_hash(b, {}));
}

TEST(Validate, RejectsBadContexts) {
  UserContext ctx = sample_ctx();
  EXPECT_NO_THROW(validate(ctx));
  ctx.user_id = "";
  EXPECT_THROW(validate(ctx), InvalidInput);
  ctx = sample_ctx();
  ctx.purchase_history[1].timestamp = 50;  // out of order
  EXPECT_THROW(validate(ctx), InvalidInput);
  ctx = sample_ctx();
  ctx.engagement_signals["bad"] = std::nan("");
  EXPECT_THROW(validate(ctx), InvalidInput);
}

TEST(Validate, RejectsBadPolicies) {
  PolicyConstraints p;
  EXPECT_NO_THROW(validate(p));
  p.min_placements = 9;
  EXPECT_THROW(validate(p), InvalidInput);
  p = {};
  p.min_placements = 0;
  EXPECT_THROW(validate(p), InvalidInput);
}

TEST(Slate, SortedByScoreThenId) {
  std::vector<ScoredProduct> slate = {
      {product("p3", "c", {}, {}), 0.5},
      {product("p1", "a", {}, {}), 0.5},
      {product("p2", "b", {}, {}), 0.9},
  };
  sort_slate(slate);
  EXPECT_EQ(slate[0].product.product_id, "p2");
  EXPECT_EQ(slate[1].product.product_id, "p1");
  EXPECT_EQ(slate[2].product.product_id, "p3");
  EXPECT_TRUE(is_slate_sorted(slate));
  const auto copy = slate;
  sort_slate(slate);
  EXPECT_EQ(slate, copy);
}

TEST(Provenance, RoundTrips) {
  for (auto p : {Provenance::Generated, Provenance::Fallback, Provenance::Cached}) {
    EXPECT_EQ(provenance_from_string(to_string(p)), p);
  }
  EXPECT_THROW(provenance_from_string("Other"), InvalidInput);
}

Storefront valid_storefront(std::size_t n) {
  Storefront sf;
  sf.user_id = "u1";
  sf.provenance = Provenance::Generated;
  sf.config_version = "v1";
  for (std::size_t i = 0; i < n; ++i) {
    Placement p;
    const std::string cat = "cat" + std::to_string(i);
    p.theme = theme("Theme " + cat, {cat}, i);
    p.keywords = {testing::kw("k" + std::to_string(i), cat)};
    for (int j = 0; j < 4; ++j) {
      p.slate.push_back({product("p" + std::to_string(i) + std::to_string(j), "n", {cat},
                                 {"k" + std::to_string(i)}),
                         1.0 - 0.1 * j});
    }
    p.recall_volume = 4;
    sf.placements.push_back(std::move(p));
  }
  return sf;
}

TEST(StorefrontViolation, AcceptsValidAndNamesProblems) {
  const PolicyConstraints policy;
  EXPECT_EQ(storefront_violation(valid_storefront(3), policy), "");

  EXPECT_NE(storefront_violation(valid_storefront(2), policy), "");

  auto dup = valid_storefront(3);
  dup.placements[1].theme.title = "  theme CAT0 ";
  EXPECT_NE(storefront_violation(dup, policy), "");

  auto unsorted = valid_storefront(3);
  std::swap(unsorted.placements[0].slate[0], unsorted.placements[0].slate[1]);
  EXPECT_NE(storefront_violation(unsorted, policy), "");

  auto unreachable = valid_storefront(3);
  unreachable.placements[0].slate[0].product.keyword_ids = {"elsewhere"};
  EXPECT_NE(storefront_violation(unreachable, policy), "");

  auto unavailable = valid_storefront(3);
  unavailable.placements[2].slate[3].product.available = false;
  EXPECT_NE(storefront_violation(unavailable, policy), "");
}

}  // namespace
}  // namespace cascade
