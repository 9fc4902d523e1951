// News embedding store.
//
// Vectors are frozen news representations keyed by news id. Three sources
// feed a store: files (TSV text or NREC binary), a deterministic synthetic
// embedder built from topic mixes, and an optional HTTP embedding service.
//
// Text format:   news_id \t f1,f2,...,fd          (one row per line)
// Binary format: "NREC" | u32 version=1 | u32 d | records of
//                (u16 id length, id bytes, d little-endian f32)

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dwellrec/datagen.hpp"

namespace dwellrec::newsrep {

using NewsEmbedding = std::vector<float>;

// The empty id denotes a padding slot; it always maps to the zero vector.
inline const std::string kPaddingId;

class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim) : dim_(dim), zeros_(dim, 0.0f) {}

  // 0 until the first vector is inserted into a default-constructed store.
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  bool contains(const std::string& id) const { return rows_.count(id) != 0; }

  // Replaces an existing row (counted in duplicates()). Throws FormatError on
  // a dimension mismatch and NumericError on non-finite entries.
  void insert(const std::string& id, NewsEmbedding v);

  // Throws LookupError for unknown ids or when the dimension is undefined.
  std::span<const float> lookup(const std::string& id) const;

  std::size_t duplicates() const { return duplicates_; }
  // Sorted by id, which fixes file output order.
  const std::map<std::string, NewsEmbedding>& rows() const { return rows_; }

  bool operator==(const EmbeddingStore& o) const { return dim_ == o.dim_ && rows_ == o.rows_; }

 private:
  std::size_t dim_ = 0;
  std::map<std::string, NewsEmbedding> rows_;
  std::vector<float> zeros_;
  std::size_t duplicates_ = 0;
};

enum class StoreFormat { kText, kBinary };

// Picks the format from the file: NREC magic means binary, anything else text.
EmbeddingStore load_store(const std::filesystem::path& path);
EmbeddingStore load_store(const std::filesystem::path& path, StoreFormat format);
void save_store(const std::filesystem::path& path, const EmbeddingStore& store, StoreFormat format);
// ".bin" / ".nrec" extensions select binary, everything else text.
StoreFormat format_for_path(const std::filesystem::path& path);

struct SynthEmbedConfig {
  std::size_t dim = 64;
  std::uint64_t seed = 7;
  double noise_scale = 0.1;
};

// normalize(normalize(P * topic_mix) + noise_scale * n(id)) with P a
// seed-fixed Gaussian projection and n a per-id Gaussian vector hashed from
// (id, seed). Unit norm; pure in (item, cfg).
NewsEmbedding synth_embed(const datagen::NewsItem& item, const SynthEmbedConfig& cfg);
EmbeddingStore synth_store(const std::vector<datagen::NewsItem>& news, const SynthEmbedConfig& cfg);

// ---- remote embedding service ----------------------------------------------
// POST {"ids":[...]} -> {"vectors":{id:[floats]}}; ids missing from the
// response are reported as not found.

struct RemoteConfig {
  std::string endpoint;  // e.g. "http://127.0.0.1:8080/embed"
  std::size_t max_attempts = 3;
  std::chrono::milliseconds backoff{50};
  std::size_t batch_size = 64;
  std::size_t max_parallel = 4;
  std::chrono::seconds timeout{5};
};

struct FetchResult {
  // One entry per requested id, in request order; nullopt marks not-found.
  std::vector<std::optional<NewsEmbedding>> vectors;
  std::size_t cache_hits = 0;
  std::size_t requests = 0;
};

// Serves ids already present in `store` from it, fetches the rest and
// inserts them. When `cache_path` is non-empty the updated store is written
// there. Network failures are retried with exponential backoff and surface
// as RetryableError after max_attempts; a vector whose dimension differs
// from the store's throws FormatError.
FetchResult fetch_remote(const RemoteConfig& cfg, const std::vector<std::string>& ids,
                         EmbeddingStore& store, const std::filesystem::path& cache_path = {});

}  // namespace dwellrec::newsrep
