#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cascade/corpus.hpp"
#include "cascade/types.hpp"

namespace cascade {

// Inverted keyword -> product postings over an immutable catalog. Postings
// are sorted by product_id and include unavailable products; availability is
// filtered at retrieval time.
class ProductIndex {
 public:
  ProductIndex() = default;

  // Throws InvalidInput on duplicate product ids or keyword_ids missing
  // from the corpus.
  static ProductIndex build(std::vector<Product> products,
                            const KeywordCorpus& corpus);

  const Product* find(std::string_view product_id) const;
  const std::vector<std::string>& postings(std::string_view keyword_id) const;
  bool knows_keyword(std::string_view keyword_id) const;

  std::size_t size() const noexcept { return products_.size(); }
  const std::map<std::string, Product>& products() const noexcept {
    return products_;
  }

  // Leaf categories ordered by product count desc, then name asc.
  const std::vector<std::string>& categories_by_popularity() const noexcept {
    return popular_categories_;
  }

 private:
  std::map<std::string, Product> products_;
  std::unordered_map<std::string, std::vector<std::string>> inverted_;
  std::unordered_set<std::string> corpus_ids_;
  std::vector<std::string> popular_categories_;
};

// Line-delimited {product_id, name, category_path[], keyword_ids[],
// availability} records. Throws MalformedRecord(line).
std::vector<Product> parse_product_records(std::istream& in);

// Leaf of a category path, or "" for an empty path.
std::string leaf_category(const Product& p);

// Up to `limit` available products posted under kw, in posting order.
// Throws UnknownKeyword when kw is not part of the corpus.
std::vector<Product> retrieve_products(const ProductIndex& index,
                                       const Keyword& kw, std::size_t limit);

}  // namespace cascade
