#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cascade/artifacts.hpp"
#include "cascade/config.hpp"
#include "cascade/errors.hpp"
#include "cascade/records.hpp"
#include "cascade/synth.hpp"
#include "support.hpp"

namespace cascade {
namespace {

using nlohmann::json;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Records, UserRoundTrip) {
  UserContext u;
  u.user_id = "u1";
  u.purchase_history = {{"p1", 10, 2}, {"p2", 20, 1}};
  u.engagement_signals = {{"dwell", 0.5}, {"clicks", 3.0}};
  u.preferences = {"dietary:vegan"};
  EXPECT_EQ(user_from_json(to_json(u)), u);
}

TEST(Records, StorefrontRoundTrip) {
  const testing::World w(testing::small_options(3));
  for (const auto& u : w.data.users) {
    const auto sf = build_storefront(u, w.config.policy, w.config.pipeline, w.deps());
    const json j = to_json(sf, 42);
    EXPECT_EQ(j.at("seed"), 42);
    EXPECT_EQ(storefront_from_json(j), sf);
    EXPECT_EQ(storefront_from_json(json::parse(j.dump())), sf);
  }
}

TEST(Records, FallbackPlanRoundTrip) {
  const FallbackPlan plan{{{"Dairy", {"k1", "k2"}}, {"Bakery", {"k3"}}}};
  EXPECT_EQ(fallback_plan_from_json(to_json(plan)), plan);
}

TEST(Records, UserLinesReportLineNumbers) {
  std::istringstream in(
      "{\"user_id\":\"a\"}\n"
      "\n"
      "{\"user_id\":\"b\",\"purchase_history\":[{\"product_id\":\"p\",\"timestamp\":5},"
      "{\"product_id\":\"q\",\"timestamp\":1}]}\n");
  try {
    parse_user_records(in);
    FAIL() << "expected MalformedRecord";
  } catch (const MalformedRecord& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream ok("{\"user_id\":\"a\"}\n\n{\"user_id\":\"b\"}\n");
  EXPECT_EQ(parse_user_records(ok).size(), 2u);
  std::istringstream junk("{\"user_id\":\"a\"}\nnot json\n");
  EXPECT_THROW(parse_user_records(junk), MalformedRecord);
}

TEST(Records, AuditTimingsOptional) {
  AuditRecord a;
  a.user_id = "u";
  a.phase_ms["total"] = 1.5;
  EXPECT_TRUE(to_json(a, true).contains("phase_ms"));
  EXPECT_FALSE(to_json(a, false).contains("phase_ms"));
}

TEST(Config, DefaultsAndOverrides) {
  const AppConfig d = config_from_json(json::object());
  EXPECT_EQ(d.embedding.dimension, 64u);
  EXPECT_EQ(d.eval.ks, (std::vector<std::size_t>{5, 20}));
  const AppConfig c = config_from_json(json::parse(R"({
    "config_version": "v7",
    "policy": {"banned_terms": ["  Alcohol "], "min_slate_size": 5},
    "pipeline": {"k_per_concept": 10, "cap": 50},
    "filter": {"dedup_threshold": 0.8}
  })"));
  EXPECT_EQ(c.policy.config_version, "v7");
  EXPECT_EQ(c.pipeline.config_version, "v7");
  EXPECT_EQ(c.policy.banned_terms, (std::set<std::string>{"alcohol"}));
  EXPECT_EQ(c.pipeline.candidates.k_per_concept, 10u);
  EXPECT_EQ(c.pipeline.candidates.cap, 50u);
  EXPECT_DOUBLE_EQ(c.pipeline.filter.dedup_threshold, 0.8);
  EXPECT_EQ(to_json(config_from_json(to_json(c))), to_json(c));
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(config_from_json(json::parse(R"({"embedding": {"dimension": 0}})")), InvalidInput);
  EXPECT_THROW(config_from_json(json::parse(R"({"eval": {"ks": [0]}})")), InvalidInput);
  EXPECT_THROW(config_from_json(json::parse(R"({"policy": {"min_placements": "x"}})")),
               InvalidInput);
  EXPECT_THROW(load_config("/nonexistent/config.json"), InvalidInput);
}

TEST(Synth, DeterministicAndShaped) {
  const auto o = testing::small_options(10);
  const auto a = synth::generate(o);
  const auto b = synth::generate(o);
  EXPECT_EQ(a.corpus, b.corpus);
  EXPECT_EQ(a.catalog, b.catalog);
  EXPECT_EQ(a.users, b.users);
  EXPECT_EQ(a.fallback_plan, b.fallback_plan);
  EXPECT_EQ(a.corpus.size(), o.corpus_size);
  EXPECT_EQ(a.catalog.size(), o.catalog_size);
  EXPECT_EQ(a.users.size(), o.users);
  for (const auto& u : a.users) EXPECT_NO_THROW(validate(u));
  auto other = o;
  other.seed = 8;
  EXPECT_NE(synth::generate(other).users, a.users);
}

TEST(Synth, WrittenFilesReparse) {
  const auto dir = testing::temp_dir("synth_write");
  const auto o = testing::small_options(5);
  const auto data = synth::generate(o);
  synth::write(data, o, AppConfig{}, dir);
  for (const char* f : {"corpus.jsonl", "catalog.jsonl", "users.jsonl", "config.json",
                        "manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  std::ifstream users(dir / "users.jsonl");
  EXPECT_EQ(parse_user_records(users), data.users);
  const AppConfig cfg = load_config(dir / "config.json");
  EXPECT_EQ(cfg.fallback_plan, data.fallback_plan);
  std::filesystem::remove_all(dir);
}

class Artifacts : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = testing::temp_dir("artifacts");
    const auto o = testing::small_options(2);
    synth::write(synth::generate(o), o, AppConfig{}, dir);
  }
  void TearDown() override { std::filesystem::remove_all(dir); }
  std::filesystem::path dir;
  EmbeddingSettings emb;
};

TEST_F(Artifacts, IngestThenLoadMatchesInMemoryBuild) {
  const auto r = ingest(dir / "corpus.jsonl", dir / "catalog.jsonl", dir / "idx", emb);
  EXPECT_FALSE(r.up_to_date);
  EXPECT_EQ(r.keywords, 2000u);
  EXPECT_TRUE(artifacts_match(dir / "idx", r.digest));
  EXPECT_FALSE(artifacts_match(dir / "idx", "other"));

  const auto loaded = load_artifacts(dir / "idx");
  EXPECT_EQ(loaded.input_digest, r.digest);
  std::ifstream cin(dir / "corpus.jsonl");
  const StubEmbeddingProvider p(emb.dimension, emb.seed);
  const auto fresh = build_corpus(parse_keyword_records(cin), p);
  ASSERT_EQ(loaded.corpus.size(), fresh.size());
  for (std::size_t i = 0; i < fresh.size(); i += 97) {
    EXPECT_EQ(loaded.corpus.entry(i), fresh.entry(i));
    const auto a = loaded.corpus.vector(i);
    const auto b = fresh.vector(i);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST_F(Artifacts, ReingestIsNoOpAndByteStable) {
  ingest(dir / "corpus.jsonl", dir / "catalog.jsonl", dir / "idx", emb);
  const auto before = slurp(dir / "idx" / "vectors.bin");
  const auto again = ingest(dir / "corpus.jsonl", dir / "catalog.jsonl", dir / "idx", emb);
  EXPECT_TRUE(again.up_to_date);
  EXPECT_EQ(slurp(dir / "idx" / "vectors.bin"), before);

  EmbeddingSettings changed = emb;
  changed.seed = 99;
  EXPECT_NE(input_digest(dir / "corpus.jsonl", dir / "catalog.jsonl", changed), again.digest);
}

TEST_F(Artifacts, TamperedFileDetected) {
  ingest(dir / "corpus.jsonl", dir / "catalog.jsonl", dir / "idx", emb);
  {
    std::ofstream out(dir / "idx" / "products.jsonl", std::ios::app);
    out << "\n";
  }
  EXPECT_THROW(load_artifacts(dir / "idx"), Error);
  // A tampered artifact forces a rebuild rather than a no-op.
  EXPECT_FALSE(ingest(dir / "corpus.jsonl", dir / "catalog.jsonl", dir / "idx", emb).up_to_date);
  EXPECT_NO_THROW(load_artifacts(dir / "idx"));
}

TEST_F(Artifacts, CorruptInputCitesLine) {
  std::vector<std::string> lines;
  {
    std::ifstream in(dir / "corpus.jsonl");
    for (std::string l; std::getline(in, l);) lines.push_back(l);
  }
  lines[6] = "{\"keyword_id\": ";
  {
    std::ofstream out(dir / "corpus.jsonl");
    for (const auto& l : lines) out << l << "\n";
  }
  try {
    ingest(dir / "corpus.jsonl", dir / "catalog.jsonl", dir / "idx", emb);
    FAIL() << "expected MalformedRecord";
  } catch (const MalformedRecord& e) {
    EXPECT_EQ(e.line(), 7u);
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "idx" / "digest.json"));
}

TEST_F(Artifacts, LockIsExclusive) {
  const DirectoryLock held(dir);
  EXPECT_THROW(DirectoryLock{dir}, Error);
}

}  // namespace
}  // namespace cascade
