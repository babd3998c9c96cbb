#include "cascade/product_index.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "cascade/errors.hpp"

namespace cascade {

using nlohmann::json;

ProductIndex ProductIndex::build(std::vector<Product> products,
                                 const KeywordCorpus& corpus) {
  ProductIndex idx;
  idx.corpus_ids_.reserve(corpus.size());
  for (const auto& k : corpus.entries()) idx.corpus_ids_.insert(k.keyword_id);

  std::map<std::string, std::size_t> category_counts;
  for (auto& p : products) {
    std::sort(p.keyword_ids.begin(), p.keyword_ids.end());
    p.keyword_ids.erase(std::unique(p.keyword_ids.begin(), p.keyword_ids.end()),
                        p.keyword_ids.end());
    for (const auto& kid : p.keyword_ids) {
      if (!idx.corpus_ids_.count(kid)) {
        throw InvalidInput("product " + p.product_id +
                           " references unknown keyword " + kid);
      }
    }
    const std::string leaf = leaf_category(p);
    if (!leaf.empty()) ++category_counts[leaf];
    const std::string pid = p.product_id;
    if (!idx.products_.emplace(pid, std::move(p)).second) {
      throw InvalidInput("duplicate product_id: " + pid);
    }
  }
  // Iterating the ordered map yields postings already sorted by product_id.
  for (const auto& [pid, p] : idx.products_) {
    for (const auto& kid : p.keyword_ids) idx.inverted_[kid].push_back(pid);
  }

  std::vector<std::pair<std::string, std::size_t>> cats(category_counts.begin(),
                                                        category_counts.end());
  std::stable_sort(cats.begin(), cats.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  for (auto& [name, count] : cats) idx.popular_categories_.push_back(name);
  return idx;
}

const Product* ProductIndex::find(std::string_view product_id) const {
  auto it = products_.find(std::string(product_id));
  return it == products_.end() ? nullptr : &it->second;
}

const std::vector<std::string>& ProductIndex::postings(
    std::string_view keyword_id) const {
  static const std::vector<std::string> kEmpty;
  auto it = inverted_.find(std::string(keyword_id));
  return it == inverted_.end() ? kEmpty : it->second;
}

bool ProductIndex::knows_keyword(std::string_view keyword_id) const {
  return corpus_ids_.count(std::string(keyword_id)) > 0;
}

std::vector<Product> parse_product_records(std::istream& in) {
  std::vector<Product> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Product p;
      p.product_id = j.at("product_id").get<std::string>();
      p.name = j.at("name").get<std::string>();
      p.category_path = j.value("category_path", std::vector<std::string>{});
      p.keyword_ids = j.value("keyword_ids", std::vector<std::string>{});
      p.available = j.value("availability", true);
      if (p.product_id.empty()) throw InvalidInput("empty product_id");
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    } catch (const InvalidInput& e) {
      throw MalformedRecord(line_no, e.what());
    }
  }
  return out;
}

std::string leaf_category(const Product& p) {
  return p.category_path.empty() ? std::string{} : p.category_path.back();
}

std::vector<Product> retrieve_products(const ProductIndex& index,
                                       const Keyword& kw, std::size_t limit) {
  if (limit == 0) throw InvalidInput("retrieve_products requires limit >= 1");
  if (!index.knows_keyword(kw.keyword_id)) throw UnknownKeyword(kw.keyword_id);
  std::vector<Product> out;
  for (const auto& pid : index.postings(kw.keyword_id)) {
    const Product* p = index.find(pid);
    if (p == nullptr || !p->available) continue;
    out.push_back(*p);
    if (out.size() == limit) break;
  }
  return out;
}

}  // namespace cascade
