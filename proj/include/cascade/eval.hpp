#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cascade/product_index.hpp"
#include "cascade/types.hpp"

namespace cascade::eval {

struct JudgeVerdict {
  bool relevant = false;
  std::optional<std::string> rationale;
};

// Judges are deterministic per input by contract. Wrap nondeterministic
// (LLM-backed) judges in CachingProductJudge / CachingKeywordJudge.
class ProductJudge {
 public:
  virtual ~ProductJudge() = default;
  virtual JudgeVerdict judge(const Theme& theme, const Product& product) const = 0;
};

class KeywordJudge {
 public:
  virtual ~KeywordJudge() = default;
  virtual JudgeVerdict judge(const UserContext& ctx, const Keyword& keyword) const = 0;
};

// Relevant iff the product's category path shares a token with the theme's
// product concepts.
class CategoryProductJudge final : public ProductJudge {
 public:
  JudgeVerdict judge(const Theme& theme, const Product& product) const override;
};

// Relevant iff the keyword's surface or taxonomy shares a token with the
// user's profile: purchased leaf categories plus preference values.
class ProfileKeywordJudge final : public KeywordJudge {
 public:
  explicit ProfileKeywordJudge(const ProductIndex& catalog) : catalog_(catalog) {}
  JudgeVerdict judge(const UserContext& ctx, const Keyword& keyword) const override;

 private:
  const ProductIndex& catalog_;
};

// Pseudo-random but deterministic verdicts: relevant with probability `rate`
// keyed on (seed, theme title, product id).
class SeededProductJudge final : public ProductJudge {
 public:
  SeededProductJudge(std::uint64_t seed, double rate) : seed_(seed), rate_(rate) {}
  JudgeVerdict judge(const Theme& theme, const Product& product) const override;

 private:
  std::uint64_t seed_;
  double rate_;
};

class SeededKeywordJudge final : public KeywordJudge {
 public:
  SeededKeywordJudge(std::uint64_t seed, double rate) : seed_(seed), rate_(rate) {}
  JudgeVerdict judge(const UserContext& ctx, const Keyword& keyword) const override;

 private:
  std::uint64_t seed_;
  double rate_;
};

class CachingProductJudge final : public ProductJudge {
 public:
  explicit CachingProductJudge(const ProductJudge& inner) : inner_(inner) {}
  JudgeVerdict judge(const Theme& theme, const Product& product) const override;
  std::size_t size() const;

 private:
  const ProductJudge& inner_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<std::string, std::string>, JudgeVerdict> memo_;
};

class CachingKeywordJudge final : public KeywordJudge {
 public:
  explicit CachingKeywordJudge(const KeywordJudge& inner) : inner_(inner) {}
  JudgeVerdict judge(const UserContext& ctx, const Keyword& keyword) const override;

 private:
  const KeywordJudge& inner_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<std::string, std::string>, JudgeVerdict> memo_;
};

struct PrecisionResult {
  std::optional<double> value;      // absent when no placement qualified
  std::size_t placements_used = 0;
  std::size_t empty_skipped = 0;    // placements with no slate products
};

// Unweighted mean over placements of the relevant fraction among the top
// min(k, |slate|) products. Empty slates are skipped and counted.
PrecisionResult product_theme_precision(std::span<const Storefront> storefronts,
                                        const ProductJudge& judge, std::size_t k);

using ContextLookup = std::function<const UserContext*(const std::string& user_id)>;

struct PooledResult {
  std::optional<double> value;  // absent when there are no keywords
  std::size_t relevant = 0;
  std::size_t total = 0;
};

// Relevant keyword instances / all keyword instances, pooled over every
// placement of every storefront. Users missing from `contexts` are judged
// against an empty context with just their user_id.
PooledResult keyword_user_precision(std::span<const Storefront> storefronts,
                                    const KeywordJudge& judge,
                                    const ContextLookup& contexts);

// Mean recall_volume over all placements; 0 when there are none.
double recall_density(std::span<const Storefront> storefronts);

// 100 * (treatment - control) / control. Throws ZeroBaseline.
double relative_lift(double control_rate, double treatment_rate);
// e.g. "+2.7%".
std::string format_lift(double lift_percent);

// Two-sided pooled two-proportion z-test p-value. Throws InvalidCounts.
double two_proportion_significance(std::uint64_t successes_c, std::uint64_t trials_c,
                                   std::uint64_t successes_t, std::uint64_t trials_t);

struct PolicyReport {
  std::string policy_name;
  std::map<std::size_t, double> pt_at;  // absent key: no qualifying placement
  std::optional<double> ku;
  double density = 0.0;
  std::size_t n_users = 0;
  std::size_t n_placements = 0;
  std::size_t n_fallback = 0;
  std::size_t n_failures = 0;
  std::size_t empty_slates_skipped = 0;
  std::uint64_t seed = 0;
};

struct Judges {
  const ProductJudge& product;
  const KeywordJudge& keyword;
};

using StorefrontPolicy = std::function<Storefront(const UserContext&)>;

// Seeded sample of n users (all when n >= |users|), in a stable order.
std::vector<UserContext> sample_users(std::span<const UserContext> users,
                                      std::size_t n, std::uint64_t seed);

// Builds one storefront per user (fanned out over `threads` workers) and
// reduces every metric. Per-user exceptions are counted, not propagated.
PolicyReport evaluate_policy(const std::string& name,
                             std::span<const UserContext> users,
                             const StorefrontPolicy& policy, const Judges& judges,
                             std::span<const std::size_t> ks,
                             std::size_t threads = 1);

// Fixed-width side-by-side table: Policy | P-T@k... | K-U | Density.
std::string render_table(std::span<const PolicyReport> reports,
                         std::span<const std::size_t> ks);

// Fixed 3-decimal rendering used by reports.
std::string format_metric(double v);

}  // namespace cascade::eval
