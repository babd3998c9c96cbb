#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cascade {

struct Purchase {
  std::string product_id;
  std::int64_t timestamp = 0;  // seconds
  std::int64_t quantity = 1;

  bool operator==(const Purchase&) const = default;
};

// Per-user signals consumed by theme generation. Arrives precomputed.
struct UserContext {
  std::string user_id;
  std::vector<Purchase> purchase_history;  // non-decreasing timestamps
  std::map<std::string, double> engagement_signals;
  std::vector<std::string> preferences;  // tagged, e.g. "dietary:vegan"

  bool operator==(const UserContext&) const = default;
};

// Throws InvalidInput on an empty user_id, out-of-order history, or a
// non-finite signal.
void validate(const UserContext& ctx);

// Latency, business and policy constraints applied to every storefront.
struct PolicyConstraints {
  std::size_t min_placements = 3;
  std::size_t max_placements = 8;
  std::size_t min_slate_size = 4;
  std::size_t max_keywords_per_placement = 5;
  std::set<std::string> banned_terms;  // normalized
  std::set<std::string> required_theme_tags;
  std::string config_version = "v1";

  bool operator==(const PolicyConstraints&) const = default;
};

void validate(const PolicyConstraints& policy);

struct Theme {
  std::string title;
  std::string persona;
  std::vector<std::string> product_concepts;
  std::size_t rank_hint = 0;

  bool operator==(const Theme&) const = default;
};

struct Keyword {
  std::string keyword_id;
  std::string surface;  // normalized
  std::vector<std::string> taxonomy_path;

  bool operator==(const Keyword&) const = default;
};

struct Product {
  std::string product_id;
  std::string name;
  std::vector<std::string> category_path;
  std::vector<std::string> keyword_ids;  // sorted, unique
  bool available = true;

  bool operator==(const Product&) const = default;
};

struct ScoredProduct {
  Product product;
  double score = 0.0;  // [0, 1]

  bool operator==(const ScoredProduct&) const = default;
};

// Orders by score descending, then product_id ascending.
bool slate_order(const ScoredProduct& a, const ScoredProduct& b);
void sort_slate(std::vector<ScoredProduct>& slate);
bool is_slate_sorted(std::span<const ScoredProduct> slate);

struct Placement {
  Theme theme;
  std::vector<Keyword> keywords;
  std::vector<ScoredProduct> slate;
  // Distinct available products retrieved across all keywords, before the
  // slate was truncated or pruned.
  std::size_t recall_volume = 0;
  // Set when the slate is under the policy's minimum size; such a placement
  // must be removed before serving.
  bool below_min_slate = false;

  bool operator==(const Placement&) const = default;
};

enum class Provenance { Generated, Fallback, Cached };

const char* to_string(Provenance p) noexcept;
Provenance provenance_from_string(std::string_view s);

struct Storefront {
  std::string user_id;
  std::vector<Placement> placements;
  Provenance provenance = Provenance::Generated;
  std::string context_hash;
  std::string config_version;

  bool operator==(const Storefront&) const = default;
};

// Empty string when the storefront satisfies every invariant, otherwise a
// description of the first violation found.
std::string storefront_violation(const Storefront& sf,
                                 const PolicyConstraints& policy);

// Deterministic SHA-256 over a length-prefixed canonical encoding of every
// context field plus the policy's config_version.
std::string context_hash(const UserContext& ctx,
                         const PolicyConstraints& policy);

// Canonical byte encoding hashed by context_hash. Exposed for tests.
std::string canonical_encoding(const UserContext& ctx,
                               std::string_view config_version);

}  // namespace cascade
