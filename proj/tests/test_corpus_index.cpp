#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "cascade/corpus.hpp"
#include "cascade/embedding.hpp"
#include "cascade/errors.hpp"
#include "cascade/product_index.hpp"
#include "support.hpp"

namespace cascade {
namespace {

using testing::kw;
using testing::product;

TEST(Embedding, DeterministicUnitNorm) {
  const StubEmbeddingProvider p;
  const auto a = embed("x", p);
  const auto b = embed("x", p);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.dimension(), 64u);
  EXPECT_NEAR(a.norm(), 1.0, kUnitNormTolerance);
  for (const char* text : {"fresh fruit", "", "a", "zzz yyy xxx www"}) {
    EXPECT_NEAR(embed(text, p).norm(), 1.0, kUnitNormTolerance) << text;
  }
}

TEST(Embedding, NormalizesTextFirst) {
  const StubEmbeddingProvider p;
  EXPECT_EQ(embed("Sparkling  Water", p), embed("sparkling water", p));
}

TEST(Embedding, SeedAndDimensionChangeVectors) {
  EXPECT_NE(embed("milk", StubEmbeddingProvider(64, 0)), embed("milk", StubEmbeddingProvider(64, 1)));
  EXPECT_EQ(embed("milk", StubEmbeddingProvider(16, 0)).dimension(), 16u);
}

TEST(Embedding, SharedTokensRaiseSimilarity) {
  const StubEmbeddingProvider p;
  const double related = dot(embed("organic milk", p), embed("milk", p));
  const double unrelated = dot(embed("organic milk", p), embed("detergent", p));
  EXPECT_GT(related, unrelated);
}

class WrongDimension final : public EmbeddingProvider {
 public:
  std::size_t dimension() const override { return 8; }
  std::string id() const override { return "wrong"; }
  EmbeddingVector embed_raw(std::string_view) const override {
    return EmbeddingVector(std::vector<float>(4, 0.5f));
  }
};

class NotNormalized final : public EmbeddingProvider {
 public:
  std::size_t dimension() const override { return 2; }
  std::string id() const override { return "unnormalized"; }
  EmbeddingVector embed_raw(std::string_view) const override {
    return EmbeddingVector(std::vector<float>{1.0f, 1.0f});
  }
};

TEST(Embedding, ProviderContractIsEnforced) {
  EXPECT_THROW(embed("x", WrongDimension()), ProviderError);
  EXPECT_THROW(embed("x", NotNormalized()), ProviderError);
  EXPECT_THROW(EmbeddingVector::normalized({0.0, 0.0}), ProviderError);
  EXPECT_THROW(dot(EmbeddingVector(std::vector<float>(3)), EmbeddingVector(std::vector<float>(4))),
               DimensionMismatch);
}

TEST(BuildCorpus, SizesAndDuplicates) {
  const StubEmbeddingProvider p;
  const auto c = build_corpus({kw("a", "milk"), kw("b", "bread"), kw("c", "eggs")}, p);
  EXPECT_EQ(c.size(), 3u);
  EXPECT_EQ(c.dimension(), 64u);
  EXPECT_EQ(c.find("b"), std::optional<std::size_t>(1));
  EXPECT_EQ(c.lookup("zz"), nullptr);
  try {
    build_corpus({kw("a", "milk"), kw("a", "bread")}, p);
    FAIL() << "expected DuplicateKeyword";
  } catch (const DuplicateKeyword& e) {
    EXPECT_EQ(e.id(), "a");
  }
}

TEST(BuildCorpus, SyntheticTenThousandAllUnitNorm) {
  synth::Options o;
  o.catalog_size = 1;
  o.users = 0;
  const auto data = synth::generate(o);
  const auto c = build_corpus(data.corpus, StubEmbeddingProvider());
  ASSERT_EQ(c.size(), 10000u);
  for (std::size_t i = 0; i < c.size(); ++i) {
    double n = 0;
    for (float x : c.vector(i)) n += static_cast<double>(x) * x;
    ASSERT_NEAR(std::sqrt(n), 1.0, kUnitNormTolerance) << i;
  }
}

TEST(ParseKeywordRecords, NormalizesAndReportsLine) {
  std::istringstream good(
      R"({"keyword_id":"k1","surface":"  Fresh  Fruit ","taxonomy_path":["produce","fruit"]})"
      "\n\n"
      R"({"keyword_id":"k2","surface":"milk"})"
      "\n");
  const auto rows = parse_keyword_records(good);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].surface, "fresh fruit");
  EXPECT_TRUE(rows[1].taxonomy_path.empty());

  std::istringstream bad(
      R"({"keyword_id":"k1","surface":"a"})"
      "\n\n"
      "{not json\n");
  try {
    parse_keyword_records(bad);
    FAIL() << "expected MalformedRecord";
  } catch (const MalformedRecord& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }

  std::istringstream missing(R"({"surface":"a"})");
  EXPECT_THROW(parse_keyword_records(missing), MalformedRecord);
}

TEST(Knn, SelfSimilarityFirst) {
  const StubEmbeddingProvider p;
  const auto c = build_corpus({kw("a", "milk"), kw("b", "bread"), kw("c", "eggs")}, p);
  const auto hits = knn(c, embed("bread", p), 1);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].keyword_id, "b");
  EXPECT_NEAR(hits[0].similarity, 1.0, 1e-6);
}

TEST(Knn, KLargerThanCorpusReturnsAllSorted) {
  const StubEmbeddingProvider p;
  const auto c = build_corpus({kw("a", "milk"), kw("b", "bread"), kw("c", "eggs")}, p);
  const auto hits = knn(c, embed("milk bread", p), 10);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_GE(hits[0].similarity, hits[1].similarity);
  EXPECT_GE(hits[1].similarity, hits[2].similarity);
}

TEST(Knn, Errors) {
  const StubEmbeddingProvider p;
  const auto c = build_corpus({kw("a", "milk")}, p);
  EXPECT_THROW(knn(c, embed("milk", p), 0), InvalidInput);
  EXPECT_THROW(knn(c, embed("milk", StubEmbeddingProvider(8)), 1), DimensionMismatch);
}

TEST(Knn, TiesBreakById) {
  std::vector<float> v = {1.0f, 0.0f, 1.0f, 0.0f, 0.0f, 1.0f};
  const auto c = KeywordCorpus::from_parts({kw("z", "z"), kw("m", "m"), kw("a", "a")}, v, 2);
  const auto hits = knn(c, EmbeddingVector(std::vector<float>{1.0f, 0.0f}), 3);
  EXPECT_EQ(hits[0].keyword_id, "m");
  EXPECT_EQ(hits[1].keyword_id, "z");
  EXPECT_EQ(hits[2].keyword_id, "a");
}

TEST(Knn, MatchesFullSortOracle) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 25; ++trial) {
    const auto c = testing::random_corpus(1000, 64, rng);
    const auto q = testing::random_unit(64, rng);
    const auto hits = knn(c, q, 10);
    const auto expect = testing::knn_oracle(c, q, 10);
    ASSERT_EQ(hits.size(), expect.size());
    std::set<std::string> ids;
    for (std::size_t i = 0; i < hits.size(); ++i) {
      ASSERT_EQ(hits[i].keyword_id, expect[i].id) << "trial " << trial << " rank " << i;
      ASSERT_EQ(hits[i].similarity, expect[i].sim);
      if (i > 0) ASSERT_LE(hits[i].similarity, hits[i - 1].similarity);
      ids.insert(hits[i].keyword_id);
    }
    ASSERT_EQ(ids.size(), hits.size());
  }
}

TEST(FromParts, RejectsBadShapes) {
  EXPECT_THROW(KeywordCorpus::from_parts({kw("a", "a")}, {1.0f, 0.0f, 0.0f}, 2), InvalidInput);
  EXPECT_THROW(KeywordCorpus::from_parts({kw("a", "a")}, {3.0f, 0.0f}, 2), InvalidInput);
  EXPECT_THROW(KeywordCorpus::from_parts({kw("a", "a"), kw("a", "b")}, {1, 0, 1, 0}, 2),
               DuplicateKeyword);
}

struct SmallCatalog {
  StubEmbeddingProvider p;
  KeywordCorpus corpus = build_corpus({kw("k1", "milk"), kw("k2", "bread"), kw("k3", "eggs")}, p);
  ProductIndex index = ProductIndex::build(
      {
          product("p3", "Whole milk", {"dairy", "milk"}, {"k1"}),
          product("p1", "Skim milk", {"dairy", "milk"}, {"k1", "k1"}),
          product("p2", "Oat milk", {"dairy", "milk"}, {"k1"}),
          product("p4", "Sourdough", {"bakery", "bread"}, {"k2"}, false),
          product("p5", "Rye", {"bakery", "bread"}, {"k2"}, false),
      },
      corpus);
};

TEST(RetrieveProducts, TruncatesInIdOrder) {
  SmallCatalog s;
  const auto got = retrieve_products(s.index, *s.corpus.lookup("k1"), 2);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].product_id, "p1");
  EXPECT_EQ(got[1].product_id, "p2");
  EXPECT_EQ(s.index.find("p1")->keyword_ids, std::vector<std::string>{"k1"});
}

TEST(RetrieveProducts, FiltersUnavailable) {
  SmallCatalog s;
  EXPECT_TRUE(retrieve_products(s.index, *s.corpus.lookup("k2"), 10).empty());
  EXPECT_TRUE(retrieve_products(s.index, *s.corpus.lookup("k3"), 10).empty());
}

TEST(RetrieveProducts, Errors) {
  SmallCatalog s;
  EXPECT_THROW(retrieve_products(s.index, kw("nope", "x"), 5), UnknownKeyword);
  EXPECT_THROW(retrieve_products(s.index, *s.corpus.lookup("k1"), 0), InvalidInput);
  EXPECT_THROW(ProductIndex::build({product("p", "n", {"c"}, {"missing"})}, s.corpus), InvalidInput);
  EXPECT_THROW(ProductIndex::build({product("p", "n", {"c"}, {}), product("p", "m", {"c"}, {})},
                                   s.corpus),
               InvalidInput);
}

TEST(RetrieveProducts, MatchesCatalogScanOracle) {
  testing::World w(testing::small_options(0));
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto& k = w.corpus.entry(rng() % w.corpus.size());
    const std::size_t limit = 1 + rng() % 30;
    std::vector<std::string> expect;
    for (const auto& p : w.data.catalog) {
      if (!p.available) continue;
      if (std::find(p.keyword_ids.begin(), p.keyword_ids.end(), k.keyword_id) == p.keyword_ids.end()) continue;
      expect.push_back(p.product_id);
    }
    std::sort(expect.begin(), expect.end());
    if (expect.size() > limit) expect.resize(limit);
    std::vector<std::string> got;
    for (const auto& p : retrieve_products(w.index, k, limit)) {
      ASSERT_TRUE(p.available);
      got.push_back(p.product_id);
    }
    ASSERT_EQ(got, expect) << k.keyword_id;
  }
}

TEST(ProductIndex, CategoriesByPopularity) {
  SmallCatalog s;
  EXPECT_EQ(s.index.categories_by_popularity(), (std::vector<std::string>{"milk", "bread"}));
}

}  // namespace
}  // namespace cascade
