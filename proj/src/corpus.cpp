#include "cascade/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "cascade/errors.hpp"
#include "cascade/text.hpp"

namespace cascade {

using nlohmann::json;

KeywordCorpus KeywordCorpus::from_parts(std::vector<Keyword> entries,
                                        std::vector<float> vectors,
                                        std::size_t dimension) {
  if (dimension == 0) throw InvalidInput("corpus dimension must be >= 1");
  if (vectors.size() != entries.size() * dimension) {
    throw InvalidInput("corpus vectors do not match entry count x dimension");
  }
  KeywordCorpus c;
  c.dimension_ = dimension;
  c.by_id_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!c.by_id_.emplace(entries[i].keyword_id, i).second) {
      throw DuplicateKeyword(entries[i].keyword_id);
    }
    double sq = 0.0;
    for (std::size_t d = 0; d < dimension; ++d) {
      const double v = vectors[i * dimension + d];
      sq += v * v;
    }
    if (std::abs(std::sqrt(sq) - 1.0) > kUnitNormTolerance) {
      throw InvalidInput("corpus vector for " + entries[i].keyword_id +
                         " is not unit-norm");
    }
  }
  c.entries_ = std::move(entries);
  c.vectors_ = std::move(vectors);
  return c;
}

std::span<const float> KeywordCorpus::vector(std::size_t i) const {
  if (i >= entries_.size()) throw std::out_of_range("corpus row");
  return std::span<const float>(vectors_).subspan(i * dimension_, dimension_);
}

std::optional<std::size_t> KeywordCorpus::find(
    std::string_view keyword_id) const {
  auto it = by_id_.find(std::string(keyword_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

const Keyword* KeywordCorpus::lookup(std::string_view keyword_id) const {
  auto idx = find(keyword_id);
  return idx ? &entries_[*idx] : nullptr;
}

std::vector<Keyword> parse_keyword_records(std::istream& in) {
  std::vector<Keyword> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Keyword k;
      k.keyword_id = j.at("keyword_id").get<std::string>();
      k.surface = normalize_text(j.at("surface").get<std::string>());
      if (j.contains("taxonomy_path")) {
        k.taxonomy_path = j.at("taxonomy_path").get<std::vector<std::string>>();
      }
      if (k.keyword_id.empty()) throw InvalidInput("empty keyword_id");
      if (k.surface.empty()) throw InvalidInput("empty surface");
      out.push_back(std::move(k));
    } catch (const json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    } catch (const InvalidInput& e) {
      throw MalformedRecord(line_no, e.what());
    }
  }
  return out;
}

KeywordCorpus build_corpus(std::vector<Keyword> entries,
                           const EmbeddingProvider& provider) {
  const std::size_t dim = provider.dimension();
  std::vector<float> vectors;
  vectors.reserve(entries.size() * dim);
  {
    std::unordered_map<std::string, std::size_t> seen;
    seen.reserve(entries.size());
    for (auto& e : entries) {
      if (!seen.emplace(e.keyword_id, 0).second) {
        throw DuplicateKeyword(e.keyword_id);
      }
      e.surface = normalize_text(e.surface);
    }
  }
  for (const auto& e : entries) {
    const EmbeddingVector v = embed(e.surface, provider);
    vectors.insert(vectors.end(), v.values().begin(), v.values().end());
  }
  return KeywordCorpus::from_parts(std::move(entries), std::move(vectors), dim);
}

KeywordCorpus build_corpus(std::istream& records,
                           const EmbeddingProvider& provider) {
  return build_corpus(parse_keyword_records(records), provider);
}

std::vector<Neighbor> knn(const KeywordCorpus& corpus,
                          const EmbeddingVector& query, std::size_t k) {
  if (k == 0) throw InvalidInput("knn requires k >= 1");
  if (query.dimension() != corpus.dimension()) {
    throw DimensionMismatch(corpus.dimension(), query.dimension());
  }
  const std::size_t n = corpus.size();
  const std::size_t dim = corpus.dimension();
  const auto rows = corpus.raw_vectors();
  const auto q = query.values();

  std::vector<double> sims(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float* row = rows.data() + i * dim;
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) s += static_cast<double>(row[d]) * q[d];
    sims[i] = s;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& entries = corpus.entries();
  auto better = [&](std::size_t a, std::size_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return entries[a].keyword_id < entries[b].keyword_id;
  };
  const std::size_t take = std::min(k, n);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                    order.end(), better);

  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t r = 0; r < take; ++r) {
    const std::size_t i = order[r];
    out.push_back({entries[i].keyword_id, sims[i], i});
  }
  return out;
}

}  // namespace cascade
