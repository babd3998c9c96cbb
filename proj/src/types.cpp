#include "cascade/types.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "cascade/digest.hpp"
#include "cascade/errors.hpp"
#include "cascade/text.hpp"

namespace cascade {

void validate(const UserContext& ctx) {
  if (ctx.user_id.empty()) throw InvalidInput("user_id must be non-empty");
  for (std::size_t i = 1; i < ctx.purchase_history.size(); ++i) {
    if (ctx.purchase_history[i].timestamp <
        ctx.purchase_history[i - 1].timestamp) {
      throw InvalidInput("purchase_history of " + ctx.user_id +
                         " is not ordered by timestamp");
    }
  }
  for (const auto& [name, value] : ctx.engagement_signals) {
    if (!std::isfinite(value)) {
      throw InvalidInput("engagement signal '" + name + "' is not finite");
    }
  }
}

void validate(const PolicyConstraints& policy) {
  if (policy.min_placements < 1 ||
      policy.min_placements > policy.max_placements) {
    throw InvalidInput("policy requires 1 <= min_placements <= max_placements");
  }
  if (policy.min_slate_size < 1) {
    throw InvalidInput("policy requires min_slate_size >= 1");
  }
  if (policy.config_version.empty()) {
    throw InvalidInput("policy config_version must be non-empty");
  }
}

bool slate_order(const ScoredProduct& a, const ScoredProduct& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.product.product_id < b.product.product_id;
}

void sort_slate(std::vector<ScoredProduct>& slate) {
  std::sort(slate.begin(), slate.end(), slate_order);
}

bool is_slate_sorted(std::span<const ScoredProduct> slate) {
  return std::is_sorted(slate.begin(), slate.end(), slate_order);
}

const char* to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::Generated:
      return "Generated";
    case Provenance::Fallback:
      return "Fallback";
    case Provenance::Cached:
      return "Cached";
  }
  return "Generated";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "Generated") return Provenance::Generated;
  if (s == "Fallback") return Provenance::Fallback;
  if (s == "Cached") return Provenance::Cached;
  throw InvalidInput("unknown provenance: " + std::string(s));
}

std::string storefront_violation(const Storefront& sf,
                                 const PolicyConstraints& policy) {
  const auto n = sf.placements.size();
  if (sf.provenance != Provenance::Fallback &&
      (n < policy.min_placements || n > policy.max_placements)) {
    return "placement count " + std::to_string(n) + " outside [" +
           std::to_string(policy.min_placements) + ", " +
           std::to_string(policy.max_placements) + "]";
  }
  std::set<std::string> titles;
  std::set<std::size_t> ranks;
  for (const auto& p : sf.placements) {
    if (p.theme.title.empty()) return "empty placement title";
    if (!titles.insert(normalize_text(p.theme.title)).second) {
      return "duplicate placement title: " + p.theme.title;
    }
    if (!ranks.insert(p.theme.rank_hint).second) {
      return "duplicate rank_hint " + std::to_string(p.theme.rank_hint);
    }
    if (p.theme.product_concepts.empty()) {
      return "placement without product concepts: " + p.theme.title;
    }
    if (p.keywords.empty()) return "placement without keywords: " + p.theme.title;
    if (!is_slate_sorted(p.slate)) return "slate not sorted: " + p.theme.title;
    std::set<std::string> kw_ids;
    for (const auto& k : p.keywords) kw_ids.insert(k.keyword_id);
    for (const auto& sp : p.slate) {
      if (!(sp.score >= 0.0 && sp.score <= 1.0)) {
        return "score out of range in " + p.theme.title;
      }
      if (!sp.product.available) {
        return "unavailable product " + sp.product.product_id;
      }
      const bool reachable = std::any_of(
          sp.product.keyword_ids.begin(), sp.product.keyword_ids.end(),
          [&](const std::string& id) { return kw_ids.count(id) > 0; });
      if (!reachable) {
        return "product " + sp.product.product_id +
               " not retrievable from placement keywords";
      }
    }
  }
  return {};
}

namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

void put_str(std::string& out, std::string_view s) {
  put_u64(out, s.size());
  out.append(s);
}

void put_f64(std::string& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

}  // namespace

std::string canonical_encoding(const UserContext& ctx,
                               std::string_view config_version) {
  std::string out;
  put_str(out, "cascade.ctx.v1");
  put_str(out, ctx.user_id);
  put_u64(out, ctx.purchase_history.size());
  for (const auto& p : ctx.purchase_history) {
    put_str(out, p.product_id);
    put_u64(out, static_cast<std::uint64_t>(p.timestamp));
    put_u64(out, static_cast<std::uint64_t>(p.quantity));
  }
  // std::map iterates in key order, which fixes the encoding order.
  put_u64(out, ctx.engagement_signals.size());
  for (const auto& [name, value] : ctx.engagement_signals) {
    put_str(out, name);
    put_f64(out, value == 0.0 ? 0.0 : value);  // fold -0.0
  }
  put_u64(out, ctx.preferences.size());
  for (const auto& pref : ctx.preferences) put_str(out, pref);
  put_str(out, config_version);
  return out;
}

std::string context_hash(const UserContext& ctx,
                         const PolicyConstraints& policy) {
  return sha256_hex(canonical_encoding(ctx, policy.config_version));
}

}  // namespace cascade
