#pragma once

// Persisted index artifacts. Directory layout:
//
//   keywords.jsonl   normalized corpus records, corpus order
//   vectors.bin      "CSCVEC01", u64 rows, u64 dim, rows*dim float32 (LE)
//   products.jsonl   catalog records, product_id order
//   digest.json      {format, input_digest, embedding{provider, dimension,
//                     seed}, inputs{corpus, catalog}, files{name: sha256},
//                     counts{keywords, products}}
//
// input_digest covers both input files plus the embedding settings, so an
// unchanged re-ingest is detected without rebuilding.

#include <filesystem>
#include <map>
#include <string>

#include "cascade/config.hpp"
#include "cascade/corpus.hpp"
#include "cascade/product_index.hpp"

namespace cascade {

inline constexpr const char* kArtifactFormat = "cascade-artifacts/1";

// Exclusive advisory lock on <dir>/.lock for the lifetime of the object.
// Throws Error when another process holds it.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  int fd_ = -1;
};

std::string input_digest(const std::filesystem::path& corpus_path,
                         const std::filesystem::path& catalog_path,
                         const EmbeddingSettings& embedding);

struct IngestResult {
  bool up_to_date = false;
  std::string digest;
  std::size_t keywords = 0;
  std::size_t products = 0;
};

// Parses and embeds the inputs and writes artifacts to out_dir. A no-op when
// digest.json already matches the inputs and every artifact file.
IngestResult ingest(const std::filesystem::path& corpus_path,
                    const std::filesystem::path& catalog_path,
                    const std::filesystem::path& out_dir,
                    const EmbeddingSettings& embedding);

struct LoadedArtifacts {
  KeywordCorpus corpus;
  ProductIndex index;
  std::string input_digest;
  std::map<std::string, std::string> file_digests;
};

// Throws Error when files are missing or do not match digest.json.
LoadedArtifacts load_artifacts(const std::filesystem::path& dir);

// True when dir holds artifacts whose input_digest equals `digest`.
bool artifacts_match(const std::filesystem::path& dir, const std::string& digest);

}  // namespace cascade
