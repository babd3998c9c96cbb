#include "cascade/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "cascade/digest.hpp"
#include "cascade/errors.hpp"
#include "cascade/parallel.hpp"
#include "cascade/text.hpp"

namespace cascade::eval {

namespace {

void add_tokens(std::set<std::string>& into, const std::string& text) {
  for (auto& t : tokenize(text)) into.insert(std::move(t));
}

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::any_of(a.begin(), a.end(),
                     [&](const std::string& t) { return b.count(t) > 0; });
}

bool seeded_draw(std::uint64_t seed, const std::string& a, const std::string& b,
                 double rate) {
  SplitMix64 rng(mix_seed(seed, a + '\x1f' + b));
  return rng.uniform() < rate;
}

}  // namespace

JudgeVerdict CategoryProductJudge::judge(const Theme& theme,
                                         const Product& product) const {
  std::set<std::string> concepts;
  for (const auto& c : theme.product_concepts) add_tokens(concepts, c);
  std::set<std::string> category;
  for (const auto& c : product.category_path) add_tokens(category, c);
  return {intersects(concepts, category), std::nullopt};
}

JudgeVerdict ProfileKeywordJudge::judge(const UserContext& ctx,
                                        const Keyword& keyword) const {
  std::set<std::string> profile;
  for (const auto& p : ctx.purchase_history) {
    if (const Product* prod = catalog_.find(p.product_id)) {
      add_tokens(profile, leaf_category(*prod));
    }
  }
  for (const auto& pref : ctx.preferences) {
    const auto colon = pref.find(':');
    add_tokens(profile, colon == std::string::npos ? pref : pref.substr(colon + 1));
  }
  std::set<std::string> kw;
  add_tokens(kw, keyword.surface);
  for (const auto& node : keyword.taxonomy_path) add_tokens(kw, node);
  return {intersects(profile, kw), std::nullopt};
}

JudgeVerdict SeededProductJudge::judge(const Theme& theme,
                                       const Product& product) const {
  return {seeded_draw(seed_, theme.title, product.product_id, rate_), std::nullopt};
}

JudgeVerdict SeededKeywordJudge::judge(const UserContext& ctx,
                                       const Keyword& keyword) const {
  return {seeded_draw(seed_, ctx.user_id, keyword.keyword_id, rate_), std::nullopt};
}

JudgeVerdict CachingProductJudge::judge(const Theme& theme,
                                        const Product& product) const {
  auto key = std::make_pair(normalize_text(theme.title), product.product_id);
  {
    std::lock_guard lock(mu_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  JudgeVerdict v = inner_.judge(theme, product);
  std::lock_guard lock(mu_);
  // First answer wins so every caller observes one verdict per input.
  return memo_.emplace(std::move(key), std::move(v)).first->second;
}

std::size_t CachingProductJudge::size() const {
  std::lock_guard lock(mu_);
  return memo_.size();
}

JudgeVerdict CachingKeywordJudge::judge(const UserContext& ctx,
                                        const Keyword& keyword) const {
  auto key = std::make_pair(ctx.user_id, keyword.keyword_id);
  {
    std::lock_guard lock(mu_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  JudgeVerdict v = inner_.judge(ctx, keyword);
  std::lock_guard lock(mu_);
  return memo_.emplace(std::move(key), std::move(v)).first->second;
}

PrecisionResult product_theme_precision(std::span<const Storefront> storefronts,
                                        const ProductJudge& judge, std::size_t k) {
  if (k == 0) throw InvalidInput("P-T@K requires k >= 1");
  PrecisionResult r;
  double sum = 0.0;
  for (const auto& sf : storefronts) {
    for (const auto& pl : sf.placements) {
      if (pl.slate.empty()) {
        ++r.empty_skipped;
        continue;
      }
      const std::size_t top = std::min(k, pl.slate.size());
      std::size_t relevant = 0;
      for (std::size_t i = 0; i < top; ++i) {
        if (judge.judge(pl.theme, pl.slate[i].product).relevant) ++relevant;
      }
      sum += static_cast<double>(relevant) / static_cast<double>(top);
      ++r.placements_used;
    }
  }
  if (r.empty_skipped > 0) {
    spdlog::warn("P-T@{}: skipped {} placements with empty slates", k, r.empty_skipped);
  }
  if (r.placements_used > 0) r.value = sum / static_cast<double>(r.placements_used);
  return r;
}

PooledResult keyword_user_precision(std::span<const Storefront> storefronts,
                                    const KeywordJudge& judge,
                                    const ContextLookup& contexts) {
  PooledResult r;
  for (const auto& sf : storefronts) {
    const UserContext* ctx = contexts ? contexts(sf.user_id) : nullptr;
    UserContext anonymous;
    if (ctx == nullptr) {
      anonymous.user_id = sf.user_id;
      ctx = &anonymous;
    }
    for (const auto& pl : sf.placements) {
      for (const auto& kw : pl.keywords) {
        ++r.total;
        if (judge.judge(*ctx, kw).relevant) ++r.relevant;
      }
    }
  }
  if (r.total > 0) {
    r.value = static_cast<double>(r.relevant) / static_cast<double>(r.total);
  }
  return r;
}

double recall_density(std::span<const Storefront> storefronts) {
  std::size_t placements = 0;
  std::size_t volume = 0;
  for (const auto& sf : storefronts) {
    for (const auto& pl : sf.placements) {
      ++placements;
      volume += pl.recall_volume;
    }
  }
  return placements == 0 ? 0.0
                         : static_cast<double>(volume) / static_cast<double>(placements);
}

double relative_lift(double control_rate, double treatment_rate) {
  if (!(control_rate > 0.0)) throw ZeroBaseline();
  return 100.0 * (treatment_rate - control_rate) / control_rate;
}

std::string format_lift(double lift_percent) {
  const double rounded = std::round(lift_percent * 10.0) / 10.0;
  if (rounded == 0.0) return "0.0%";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f%%", rounded);
  return buf;
}

double two_proportion_significance(std::uint64_t successes_c, std::uint64_t trials_c,
                                   std::uint64_t successes_t, std::uint64_t trials_t) {
  if (trials_c == 0 || trials_t == 0) throw InvalidCounts("trials must be > 0");
  if (successes_c > trials_c || successes_t > trials_t) {
    throw InvalidCounts("successes exceed trials");
  }
  const double nc = static_cast<double>(trials_c);
  const double nt = static_cast<double>(trials_t);
  const double pc = static_cast<double>(successes_c) / nc;
  const double pt = static_cast<double>(successes_t) / nt;
  const double pooled = static_cast<double>(successes_c + successes_t) / (nc + nt);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / nc + 1.0 / nt));
  if (!(se > 0.0)) return 1.0;
  const double z = (pt - pc) / se;
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

std::vector<UserContext> sample_users(std::span<const UserContext> users,
                                      std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(users.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (n < users.size()) {
    SplitMix64 rng(mix_seed(seed, "user-sample"));
    for (std::size_t i = 0; i < n; ++i) {
      std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<UserContext> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(users[i]);
  return out;
}

PolicyReport evaluate_policy(const std::string& name,
                             std::span<const UserContext> users,
                             const StorefrontPolicy& policy, const Judges& judges,
                             std::span<const std::size_t> ks, std::size_t threads) {
  std::vector<std::optional<Storefront>> built(users.size());
  parallel_for(users.size(), threads, [&](std::size_t i) {
    try {
      built[i] = policy(users[i]);
    } catch (const std::exception& e) {
      spdlog::warn("[eval] policy {} failed for {}: {}", name, users[i].user_id, e.what());
    }
  });

  PolicyReport report;
  report.policy_name = name;
  report.n_users = users.size();
  std::vector<Storefront> storefronts;
  std::map<std::string, const UserContext*> by_id;
  for (std::size_t i = 0; i < users.size(); ++i) {
    by_id.emplace(users[i].user_id, &users[i]);
    if (!built[i]) {
      ++report.n_failures;
      continue;
    }
    if (built[i]->provenance == Provenance::Fallback) ++report.n_fallback;
    report.n_placements += built[i]->placements.size();
    storefronts.push_back(std::move(*built[i]));
  }

  for (const std::size_t k : ks) {
    const PrecisionResult pt = product_theme_precision(storefronts, judges.product, k);
    if (pt.value) report.pt_at[k] = *pt.value;
    report.empty_slates_skipped = pt.empty_skipped;
  }
  const PooledResult ku = keyword_user_precision(
      storefronts, judges.keyword, [&](const std::string& id) -> const UserContext* {
        auto it = by_id.find(id);
        return it == by_id.end() ? nullptr : it->second;
      });
  report.ku = ku.value;
  report.density = recall_density(storefronts);
  return report;
}

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string render_table(std::span<const PolicyReport> reports,
                         std::span<const std::size_t> ks) {
  std::size_t name_w = 6;
  for (const auto& r : reports) name_w = std::max(name_w, r.policy_name.size());
  auto cell = [](const std::string& s, std::size_t w) {
    return s + std::string(w > s.size() ? w - s.size() : 1, ' ');
  };
  std::ostringstream out;
  out << cell("Policy", name_w + 2);
  for (auto k : ks) out << cell("P-T@" + std::to_string(k), 9);
  out << cell("K-U", 9) << "Density\n";
  for (const auto& r : reports) {
    out << cell(r.policy_name, name_w + 2);
    for (auto k : ks) {
      auto it = r.pt_at.find(k);
      out << cell(it == r.pt_at.end() ? "-" : format_metric(it->second), 9);
    }
    out << cell(r.ku ? format_metric(*r.ku) : "-", 9) << format_metric(r.density)
        << '\n';
  }
  return out.str();
}

}  // namespace cascade::eval
