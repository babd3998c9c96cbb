#include "cascade/synth.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cascade/digest.hpp"
#include "cascade/errors.hpp"
#include "cascade/records.hpp"

namespace cascade::synth {

using nlohmann::json;

namespace {

struct Department {
  std::string_view name;
  std::vector<std::string_view> categories;
};

const std::vector<Department>& departments() {
  static const std::vector<Department> kDepartments = {
      {"produce", {"fruit", "vegetables", "herbs", "salad"}},
      {"dairy", {"milk", "cheese", "yogurt", "butter", "eggs"}},
      {"bakery", {"bread", "bagels", "pastries", "tortillas"}},
      {"meat", {"chicken", "beef", "pork", "sausage"}},
      {"seafood", {"salmon", "shrimp", "tuna"}},
      {"pantry", {"pasta", "rice", "beans", "sauce", "spices", "oil", "cereal", "soup"}},
      {"snacks", {"chips", "crackers", "cookies", "nuts", "popcorn", "candy"}},
      {"beverages", {"water", "juice", "coffee", "tea", "soda"}},
      {"frozen", {"pizza", "dessert", "meals"}},
      {"household", {"detergent", "soap", "towels"}},
  };
  return kDepartments;
}

constexpr std::array<std::string_view, 20> kModifiers = {
    "fresh",    "organic", "classic", "healthy",  "everyday", "family",   "premium",
    "seasonal", "quick",   "local",   "crunchy",  "sweet",    "spicy",    "sparkling",
    "roasted",  "whole",   "mini",    "lowfat",   "glutenfree", "smoked"};

constexpr std::array<std::string_view, 12> kBrands = {
    "Hillcrest", "Acme",     "Greenleaf", "Sunvale", "Northfork", "Brightday",
    "Oakridge",  "Bluewave", "Redbarn",   "Goldfield", "Maple & Co", "Riverbend"};

constexpr std::array<std::string_view, 6> kPreferences = {
    "dietary:vegetarian", "dietary:gluten free", "dietary:low sugar",
    "household:family",   "household:single",    "household:pet owner"};

struct CategoryRef {
  std::string department;
  std::string category;
};

std::vector<CategoryRef> all_categories() {
  std::vector<CategoryRef> out;
  for (const auto& d : departments()) {
    for (auto c : d.categories) out.push_back({std::string(d.name), std::string(c)});
  }
  return out;
}

std::string pad(std::string_view prefix, std::size_t n, int width) {
  std::string digits = std::to_string(n);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  }
  return std::string(prefix) + digits;
}

template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

Dataset generate(const Options& opts) {
  Dataset data;
  const auto cats = all_categories();

  // Corpus: every category, every modifier+category, then a seeded sample of
  // modifier+modifier+category phrases.
  struct Draft {
    std::string surface;
    std::size_t cat;
  };
  std::vector<Draft> drafts;
  for (std::size_t c = 0; c < cats.size(); ++c) drafts.push_back({cats[c].category, c});
  for (std::size_t c = 0; c < cats.size(); ++c) {
    for (auto m : kModifiers) drafts.push_back({std::string(m) + " " + cats[c].category, c});
  }
  std::vector<Draft> triples;
  for (std::size_t c = 0; c < cats.size(); ++c) {
    for (auto a : kModifiers) {
      for (auto b : kModifiers) {
        if (a == b) continue;
        triples.push_back({std::string(a) + " " + std::string(b) + " " + cats[c].category, c});
      }
    }
  }
  SplitMix64 corpus_rng(mix_seed(opts.seed, "corpus"));
  shuffle(triples, corpus_rng);
  drafts.insert(drafts.end(), triples.begin(), triples.end());
  if (drafts.size() > opts.corpus_size) drafts.resize(opts.corpus_size);

  std::map<std::string, std::string> id_by_surface;
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    Keyword k;
    k.keyword_id = pad("kw", i, 6);
    k.surface = drafts[i].surface;
    k.taxonomy_path = {cats[drafts[i].cat].department, cats[drafts[i].cat].category};
    id_by_surface.emplace(k.surface, k.keyword_id);
    data.corpus.push_back(std::move(k));
  }

  // Catalog: each product posts under the keywords its modifiers satisfy,
  // each posting kept with probability `coverage`.
  SplitMix64 cat_rng(mix_seed(opts.seed, "catalog"));
  std::vector<std::vector<std::string>> products_by_cat(cats.size());
  for (std::size_t i = 0; i < opts.catalog_size; ++i) {
    const std::size_t c = cat_rng.below(cats.size());
    std::vector<std::string> mods;
    const std::size_t n_mods = 1 + cat_rng.below(2);
    while (mods.size() < n_mods) {
      std::string m(kModifiers[cat_rng.below(kModifiers.size())]);
      if (std::find(mods.begin(), mods.end(), m) == mods.end()) mods.push_back(m);
    }
    Product p;
    p.product_id = pad("p", i, 6);
    p.name = std::string(kBrands[cat_rng.below(kBrands.size())]);
    for (const auto& m : mods) p.name += " " + m;
    p.name += " " + cats[c].category;
    p.category_path = {cats[c].department, cats[c].category};
    p.available = cat_rng.chance(opts.availability);

    std::vector<std::string> surfaces = {cats[c].category};
    for (const auto& m : mods) surfaces.push_back(m + " " + cats[c].category);
    if (mods.size() == 2) {
      surfaces.push_back(mods[0] + " " + mods[1] + " " + cats[c].category);
      surfaces.push_back(mods[1] + " " + mods[0] + " " + cats[c].category);
    }
    for (const auto& s : surfaces) {
      auto it = id_by_surface.find(s);
      if (it == id_by_surface.end()) continue;
      if (cat_rng.chance(opts.coverage)) p.keyword_ids.push_back(it->second);
    }
    std::sort(p.keyword_ids.begin(), p.keyword_ids.end());
    products_by_cat[c].push_back(p.product_id);
    data.catalog.push_back(std::move(p));
  }

  // Users: purchases concentrated on a few favorite categories.
  SplitMix64 user_rng(mix_seed(opts.seed, "users"));
  std::vector<std::size_t> stocked;
  for (std::size_t c = 0; c < cats.size(); ++c) {
    if (!products_by_cat[c].empty()) stocked.push_back(c);
  }
  for (std::size_t u = 0; u < opts.users; ++u) {
    UserContext ctx;
    ctx.user_id = pad("u", u, 5);
    const bool empty = user_rng.chance(opts.empty_history_rate) || stocked.empty();
    if (!empty) {
      std::vector<std::size_t> favorites;
      const std::size_t n_fav = 1 + user_rng.below(4);
      for (std::size_t f = 0; f < n_fav; ++f) {
        favorites.push_back(stocked[user_rng.below(stocked.size())]);
      }
      const std::size_t n_purchases = 3 + user_rng.below(28);
      std::int64_t ts = 1'700'000'000 + static_cast<std::int64_t>(user_rng.below(86'400 * 30));
      for (std::size_t k = 0; k < n_purchases; ++k) {
        const std::size_t c = user_rng.chance(0.8)
                                  ? favorites[user_rng.below(favorites.size())]
                                  : stocked[user_rng.below(stocked.size())];
        const auto& pool = products_by_cat[c];
        ctx.purchase_history.push_back({pool[user_rng.below(pool.size())], ts,
                                        static_cast<std::int64_t>(1 + user_rng.below(3))});
        ts += static_cast<std::int64_t>(user_rng.below(86'400 * 7));
      }
    }
    ctx.engagement_signals["sessions_30d"] = static_cast<double>(user_rng.below(40));
    ctx.engagement_signals["cart_rate"] =
        static_cast<double>(user_rng.below(1000)) / 1000.0;
    for (auto pref : kPreferences) {
      if (user_rng.chance(0.15)) ctx.preferences.emplace_back(pref);
    }
    data.users.push_back(std::move(ctx));
  }

  // Static fallback plan over broad category keywords.
  const std::vector<std::pair<std::string, std::vector<std::string>>> plan = {
      {"Popular produce", {"fruit", "vegetables", "salad"}},
      {"Dairy essentials", {"milk", "cheese", "yogurt", "eggs"}},
      {"Pantry staples", {"pasta", "rice", "beans", "sauce"}},
      {"Snack favorites", {"chips", "cookies", "nuts", "crackers"}},
      {"Drinks for the week", {"water", "juice", "coffee", "tea"}},
  };
  for (const auto& [title, surfaces] : plan) {
    FallbackEntry e{title, {}};
    for (const auto& s : surfaces) {
      if (auto it = id_by_surface.find(s); it != id_by_surface.end()) {
        e.keyword_ids.push_back(it->second);
      }
    }
    if (!e.keyword_ids.empty()) data.fallback_plan.entries.push_back(std::move(e));
  }
  return data;
}

namespace {

void write_lines(const std::filesystem::path& path, const std::vector<json>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : rows) out << r.dump() << '\n';
}

}  // namespace

void write(const Dataset& data, const Options& opts, const AppConfig& base_config,
           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<json> rows;
  for (const auto& k : data.corpus) rows.push_back(to_json(k));
  write_lines(dir / "corpus.jsonl", rows);
  rows.clear();
  for (const auto& p : data.catalog) rows.push_back(to_json(p));
  write_lines(dir / "catalog.jsonl", rows);
  rows.clear();
  for (const auto& u : data.users) rows.push_back(to_json(u));
  write_lines(dir / "users.jsonl", rows);

  AppConfig cfg = base_config;
  cfg.fallback_plan = data.fallback_plan;
  {
    std::ofstream out(dir / "config.json", std::ios::trunc);
    out << to_json(cfg).dump(2) << '\n';
  }
  const json manifest = {
      {"config", "config.json"},     {"corpus", "corpus.jsonl"},
      {"catalog", "catalog.jsonl"},  {"users", "users.jsonl"},
      {"seed", opts.seed},           {"out", "out"},
      {"artifacts", "artifacts"},
      {"synth",
       {{"corpus_size", opts.corpus_size},
        {"catalog_size", opts.catalog_size},
        {"users", opts.users},
        {"coverage", opts.coverage}}},
  };
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  out << manifest.dump(2) << '\n';
}

}  // namespace cascade::synth
