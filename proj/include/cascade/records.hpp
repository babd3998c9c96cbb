#pragma once

// JSON wire formats for every record the system reads or writes.
//
//   corpus      {keyword_id, surface, taxonomy_path[]}
//   catalog     {product_id, name, category_path[], keyword_ids[], availability}
//   users       {user_id, purchase_history[{product_id, timestamp, quantity}],
//                engagement_signals{name: score}, preferences[]}
//   storefront  {user_id, provenance, context_hash, config_version, seed?,
//                placements[{title, persona, product_concepts[], rank_hint,
//                            recall_volume, keywords[...], slate[...]}]}
//   audit       AuditRecord fields, phase_ms last
//   report      PolicyReport fields

#include <istream>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "cascade/eval.hpp"
#include "cascade/generators.hpp"
#include "cascade/pipeline.hpp"
#include "cascade/types.hpp"

namespace cascade {

nlohmann::json to_json(const Keyword& k);
Keyword keyword_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Product& p);
Product product_from_json(const nlohmann::json& j);

nlohmann::json to_json(const UserContext& ctx);
UserContext user_from_json(const nlohmann::json& j);

// Line-delimited users; validates each context. Throws MalformedRecord(line).
std::vector<UserContext> parse_user_records(std::istream& in);

nlohmann::json to_json(const Theme& t);
nlohmann::json to_json(const Placement& p);
Placement placement_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Storefront& sf,
                       std::optional<std::uint64_t> seed = std::nullopt);
Storefront storefront_from_json(const nlohmann::json& j);

// Timings included only when with_timings is set; they are the one
// nondeterministic part of a build.
nlohmann::json to_json(const AuditRecord& a, bool with_timings = true);

nlohmann::json to_json(const FallbackPlan& plan);
FallbackPlan fallback_plan_from_json(const nlohmann::json& j);

nlohmann::json to_json(const eval::PolicyReport& r);

}  // namespace cascade
