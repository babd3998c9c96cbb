#include "cascade/artifacts.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "cascade/digest.hpp"
#include "cascade/errors.hpp"
#include "cascade/records.hpp"

namespace cascade {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kVectorMagic[8] = {'C', 'S', 'C', 'V', 'E', 'C', '0', '1'};
constexpr const char* kFiles[] = {"keywords.jsonl", "vectors.bin", "products.jsonl"};

static_assert(std::endian::native == std::endian::little,
              "vectors.bin is written little-endian");

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  return in;
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error("vectors.bin truncated");
  return v;
}

std::optional<json> read_digest(const fs::path& dir) {
  std::ifstream in(dir / "digest.json");
  if (!in) return std::nullopt;
  try {
    return json::parse(in);
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

bool files_match(const fs::path& dir, const json& digest) {
  if (!digest.contains("files")) return false;
  for (const char* name : kFiles) {
    const fs::path p = dir / name;
    if (!fs::exists(p) || !digest["files"].contains(name)) return false;
    if (sha256_file(p) != digest["files"][name].get<std::string>()) return false;
  }
  return true;
}

}  // namespace

DirectoryLock::DirectoryLock(const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path lock = dir / ".lock";
  fd_ = ::open(lock.c_str(), O_CREAT | O_RDWR, 0644);
  if (fd_ < 0) throw Error("cannot open lock file " + lock.string());
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error("directory " + dir.string() + " is locked by another process");
  }
}

DirectoryLock::~DirectoryLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

std::string input_digest(const fs::path& corpus_path, const fs::path& catalog_path,
                         const EmbeddingSettings& embedding) {
  Sha256 h;
  h.update(kArtifactFormat);
  h.update("\ncorpus:");
  h.update(sha256_file(corpus_path));
  h.update("\ncatalog:");
  h.update(sha256_file(catalog_path));
  h.update("\nembedding:" + std::to_string(embedding.dimension) + "/" +
           std::to_string(embedding.seed));
  return h.hex_digest();
}

bool artifacts_match(const fs::path& dir, const std::string& digest) {
  auto d = read_digest(dir);
  return d && d->value("format", "") == kArtifactFormat &&
         d->value("input_digest", "") == digest && files_match(dir, *d);
}

IngestResult ingest(const fs::path& corpus_path, const fs::path& catalog_path,
                    const fs::path& out_dir, const EmbeddingSettings& embedding) {
  DirectoryLock lock(out_dir);
  IngestResult result;
  result.digest = input_digest(corpus_path, catalog_path, embedding);
  if (artifacts_match(out_dir, result.digest)) {
    const auto d = read_digest(out_dir);
    result.up_to_date = true;
    result.keywords = (*d)["counts"].value("keywords", std::size_t{0});
    result.products = (*d)["counts"].value("products", std::size_t{0});
    return result;
  }

  StubEmbeddingProvider provider(embedding.dimension, embedding.seed);
  KeywordCorpus corpus = [&] {
    auto in = open_in(corpus_path);
    return build_corpus(in, provider);
  }();
  std::vector<Product> products = [&] {
    auto in = open_in(catalog_path);
    return parse_product_records(in);
  }();
  const ProductIndex index = ProductIndex::build(std::move(products), corpus);

  // Write to temp names, then rename, so a crash never leaves a digest that
  // describes half-written files.
  const auto tmp = [&](const char* name) { return out_dir / (std::string(name) + ".tmp"); };
  {
    std::ofstream out(tmp("keywords.jsonl"), std::ios::binary | std::ios::trunc);
    for (const auto& k : corpus.entries()) out << to_json(k).dump() << '\n';
  }
  {
    std::ofstream out(tmp("vectors.bin"), std::ios::binary | std::ios::trunc);
    out.write(kVectorMagic, sizeof kVectorMagic);
    write_u64(out, corpus.size());
    write_u64(out, corpus.dimension());
    const auto raw = corpus.raw_vectors();
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(float)));
  }
  {
    std::ofstream out(tmp("products.jsonl"), std::ios::binary | std::ios::trunc);
    for (const auto& [pid, p] : index.products()) out << to_json(p).dump() << '\n';
  }
  json files = json::object();
  for (const char* name : kFiles) {
    fs::rename(tmp(name), out_dir / name);
    files[name] = sha256_file(out_dir / name);
  }
  const json digest = {
      {"format", kArtifactFormat},
      {"input_digest", result.digest},
      {"embedding",
       {{"provider", provider.id()},
        {"dimension", embedding.dimension},
        {"seed", embedding.seed}}},
      {"inputs",
       {{"corpus", sha256_file(corpus_path)}, {"catalog", sha256_file(catalog_path)}}},
      {"files", files},
      {"counts", {{"keywords", corpus.size()}, {"products", index.size()}}},
  };
  {
    std::ofstream out(out_dir / "digest.json.tmp", std::ios::trunc);
    out << digest.dump(2) << '\n';
  }
  fs::rename(out_dir / "digest.json.tmp", out_dir / "digest.json");
  result.keywords = corpus.size();
  result.products = index.size();
  return result;
}

LoadedArtifacts load_artifacts(const fs::path& dir) {
  const auto digest = read_digest(dir);
  if (!digest || digest->value("format", "") != kArtifactFormat) {
    throw Error("no artifacts in " + dir.string());
  }
  if (!files_match(dir, *digest)) {
    throw Error("artifacts in " + dir.string() + " do not match digest.json");
  }
  LoadedArtifacts out;
  out.input_digest = digest->at("input_digest").get<std::string>();
  for (const auto& [name, sha] : digest->at("files").items()) {
    out.file_digests[name] = sha.get<std::string>();
  }

  std::vector<Keyword> entries = [&] {
    auto in = open_in(dir / "keywords.jsonl");
    return parse_keyword_records(in);
  }();
  auto vin = open_in(dir / "vectors.bin");
  char magic[8];
  vin.read(magic, sizeof magic);
  if (!vin || std::memcmp(magic, kVectorMagic, sizeof magic) != 0) {
    throw Error("vectors.bin has a bad header");
  }
  const std::uint64_t rows = read_u64(vin);
  const std::uint64_t dim = read_u64(vin);
  if (rows != entries.size()) throw Error("vectors.bin row count mismatch");
  std::vector<float> vectors(rows * dim);
  vin.read(reinterpret_cast<char*>(vectors.data()),
           static_cast<std::streamsize>(vectors.size() * sizeof(float)));
  if (!vin) throw Error("vectors.bin truncated");
  out.corpus = KeywordCorpus::from_parts(std::move(entries), std::move(vectors), dim);

  auto pin = open_in(dir / "products.jsonl");
  out.index = ProductIndex::build(parse_product_records(pin), out.corpus);
  return out;
}

}  // namespace cascade
