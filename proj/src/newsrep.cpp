#include "dwellrec/newsrep.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dwellrec/detail/binio.hpp"
#include "dwellrec/errors.hpp"

namespace dwellrec::newsrep {

void EmbeddingStore::insert(const std::string& id, NewsEmbedding v) {
  if (id == kPaddingId) throw InvalidInputError("the empty id is reserved for padding");
  if (v.empty()) throw FormatError("embedding for '" + id + "' is empty");
  if (dim_ == 0) {
    dim_ = v.size();
    zeros_.assign(dim_, 0.0f);
  }
  if (v.size() != dim_) {
    throw FormatError("embedding for '" + id + "' has dimension " + std::to_string(v.size()) +
                      ", store has " + std::to_string(dim_));
  }
  for (float f : v) {
    if (!std::isfinite(f)) throw NumericError("non-finite embedding entry for '" + id + "'");
  }
  auto [it, inserted] = rows_.insert_or_assign(id, std::move(v));
  if (!inserted) ++duplicates_;
}

std::span<const float> EmbeddingStore::lookup(const std::string& id) const {
  if (dim_ == 0) throw LookupError("lookup of '" + id + "' in a store with undefined dimension");
  if (id == kPaddingId) return zeros_;
  auto it = rows_.find(id);
  if (it == rows_.end()) throw LookupError("no embedding for news id '" + id + "'");
  return it->second;
}

StoreFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".bin" || ext == ".nrec" ? StoreFormat::kBinary : StoreFormat::kText;
}

namespace {

using detail::read_bytes;
using detail::read_le;
using detail::try_read_le;
using detail::write_le;

EmbeddingStore load_text(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  EmbeddingStore store;
  std::string line;
  std::size_t no = 0;
  while (std::getline(is, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = [&] { return path.string() + ":" + std::to_string(no) + ": "; };
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw FormatError(where() + "expected 'id<TAB>values'");
    const std::string id = line.substr(0, tab);
    NewsEmbedding v;
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    while (p < end) {
      float f = 0.0f;
      auto [next, ec] = std::from_chars(p, end, f);
      if (ec != std::errc() || (next != end && *next != ',')) {
        throw FormatError(where() + "unparseable float in row '" + id + "'");
      }
      v.push_back(f);
      p = next == end ? end : next + 1;
    }
    if (store.dim() != 0 && v.size() != store.dim()) {
      throw FormatError(where() + "row '" + id + "' has " + std::to_string(v.size()) +
                        " values, expected " + std::to_string(store.dim()));
    }
    store.insert(id, std::move(v));
  }
  return store;
}

EmbeddingStore load_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  if (read_bytes(is, 4, "store magic") != "NREC") throw FormatError(path.string() + ": bad magic");
  const auto version = read_le<std::uint32_t>(is, "store version");
  if (version != 1) throw FormatError("unsupported store version " + std::to_string(version));
  const auto dim = read_le<std::uint32_t>(is, "store dimension");
  EmbeddingStore store(dim);
  std::uint16_t len = 0;
  while (try_read_le(is, len, "record id length")) {
    std::string id = read_bytes(is, len, "record id");
    NewsEmbedding v(dim);
    for (auto& f : v) f = read_le<float>(is, "vector of '" + id + "'");
    store.insert(id, std::move(v));
  }
  return store;
}

}  // namespace

EmbeddingStore load_store(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  char magic[4] = {};
  is.read(magic, 4);
  const bool binary = is.gcount() == 4 && std::string(magic, 4) == "NREC";
  return load_store(path, binary ? StoreFormat::kBinary : StoreFormat::kText);
}

EmbeddingStore load_store(const std::filesystem::path& path, StoreFormat format) {
  return format == StoreFormat::kBinary ? load_binary(path) : load_text(path);
}

void save_store(const std::filesystem::path& path, const EmbeddingStore& store, StoreFormat format) {
  if (format == StoreFormat::kBinary) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot write " + path.string());
    os.write("NREC", 4);
    write_le<std::uint32_t>(os, 1);
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(store.dim()));
    for (const auto& [id, v] : store.rows()) {
      if (id.size() > 0xFFFF) throw FormatError("news id too long for binary store: " + id);
      write_le<std::uint16_t>(os, static_cast<std::uint16_t>(id.size()));
      os.write(id.data(), static_cast<std::streamsize>(id.size()));
      for (float f : v) write_le<float>(os, f);
    }
    if (!os) throw FormatError("failed writing " + path.string());
    return;
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw FormatError("cannot write " + path.string());
  char buf[64];
  for (const auto& [id, v] : store.rows()) {
    os << id << '\t';
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v[i]);
      if (i) os << ',';
      os.write(buf, end - buf);
    }
    os << '\n';
  }
  if (!os) throw FormatError("failed writing " + path.string());
}

// ---- synthetic embedder ----------------------------------------------------

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<double> projection(std::size_t dim, std::size_t topics, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> p(dim * topics);
  for (auto& v : p) v = n(rng);
  return p;
}

NewsEmbedding embed_with(const datagen::NewsItem& item, const SynthEmbedConfig& cfg,
                         const std::vector<double>& proj) {
  const std::size_t t = item.topic_mix.size();
  std::vector<double> v(cfg.dim, 0.0);
  for (std::size_t i = 0; i < cfg.dim; ++i)
    for (std::size_t k = 0; k < t; ++k) v[i] += proj[i * t + k] * item.topic_mix[k];

  auto normalize = [](std::vector<double>& x) {
    double s = 0.0;
    for (double e : x) s += e * e;
    s = std::sqrt(s);
    if (s > 0.0)
      for (double& e : x) e /= s;
  };
  normalize(v);

  std::mt19937_64 rng(fnv1a(item.news_id) ^ (cfg.seed * 0xBF58476D1CE4E5B9ULL));
  std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(static_cast<double>(cfg.dim)));
  for (double& e : v) e += cfg.noise_scale * n(rng);
  normalize(v);
  return NewsEmbedding(v.begin(), v.end());
}

}  // namespace

NewsEmbedding synth_embed(const datagen::NewsItem& item, const SynthEmbedConfig& cfg) {
  if (cfg.dim == 0) throw ConfigError("embedding dimension must be positive");
  if (item.topic_mix.empty()) throw InvalidInputError("news item '" + item.news_id + "' has no topics");
  return embed_with(item, cfg, projection(cfg.dim, item.topic_mix.size(), cfg.seed));
}

EmbeddingStore synth_store(const std::vector<datagen::NewsItem>& news, const SynthEmbedConfig& cfg) {
  if (cfg.dim == 0) throw ConfigError("embedding dimension must be positive");
  EmbeddingStore store(cfg.dim);
  std::vector<double> proj;
  std::size_t proj_topics = 0;
  for (const auto& item : news) {
    if (item.topic_mix.size() != proj_topics) {
      proj_topics = item.topic_mix.size();
      proj = projection(cfg.dim, proj_topics, cfg.seed);
    }
    store.insert(item.news_id, embed_with(item, cfg, proj));
  }
  return store;
}

// ---- remote ----------------------------------------------------------------

namespace {

struct Endpoint {
  std::string origin;  // scheme://host:port
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

using VectorMap = std::map<std::string, NewsEmbedding>;

VectorMap fetch_batch(const RemoteConfig& cfg, const Endpoint& ep,
                      const std::vector<std::string>& ids) {
  nlohmann::json body;
  body["ids"] = ids;
  const std::string payload = body.dump();
  std::string last_error;
  auto backoff = cfg.backoff;
  for (std::size_t attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    httplib::Client cli(ep.origin);
    cli.set_connection_timeout(cfg.timeout);
    cli.set_read_timeout(cfg.timeout);
    auto res = cli.Post(ep.path, payload, "application/json");
    if (res && res->status == 200) {
      VectorMap out;
      try {
        const auto j = nlohmann::json::parse(res->body);
        for (const auto& [id, vec] : j.at("vectors").items()) {
          out[id] = vec.get<NewsEmbedding>();
        }
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed embedding response: ") + e.what());
      }
      return out;
    }
    if (res && res->status < 500) {
      throw FormatError("embedding service returned HTTP " + std::to_string(res->status));
    }
    last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    if (attempt < cfg.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw RetryableError("embedding service unreachable after " + std::to_string(cfg.max_attempts) +
                       " attempts: " + last_error);
}

}  // namespace

FetchResult fetch_remote(const RemoteConfig& cfg, const std::vector<std::string>& ids,
                         EmbeddingStore& store, const std::filesystem::path& cache_path) {
  if (cfg.max_attempts == 0 || cfg.batch_size == 0 || cfg.max_parallel == 0) {
    throw ConfigError("remote fetch needs positive attempts, batch size and parallelism");
  }
  FetchResult result;
  std::vector<std::string> missing;
  for (const auto& id : ids) {
    if (store.contains(id)) {
      ++result.cache_hits;
    } else if (std::find(missing.begin(), missing.end(), id) == missing.end()) {
      missing.push_back(id);
    }
  }

  if (!missing.empty()) {
    const Endpoint ep = split_endpoint(cfg.endpoint);
    std::vector<std::vector<std::string>> batches;
    for (std::size_t i = 0; i < missing.size(); i += cfg.batch_size) {
      const auto end = std::min(missing.size(), i + cfg.batch_size);
      batches.emplace_back(missing.begin() + static_cast<std::ptrdiff_t>(i),
                           missing.begin() + static_cast<std::ptrdiff_t>(end));
    }
    std::vector<VectorMap> fetched(batches.size());
    for (std::size_t start = 0; start < batches.size(); start += cfg.max_parallel) {
      const auto stop = std::min(batches.size(), start + cfg.max_parallel);
      std::vector<std::future<VectorMap>> inflight;
      for (std::size_t b = start; b < stop; ++b) {
        inflight.push_back(std::async(std::launch::async, fetch_batch, std::cref(cfg),
                                      std::cref(ep), std::cref(batches[b])));
      }
      for (std::size_t b = start; b < stop; ++b) fetched[b] = inflight[b - start].get();
      result.requests += stop - start;
    }
    // Insert in request order so the store contents do not depend on timing.
    for (std::size_t b = 0; b < batches.size(); ++b) {
      for (const auto& id : batches[b]) {
        auto it = fetched[b].find(id);
        if (it != fetched[b].end()) store.insert(id, std::move(it->second));
      }
    }
    if (!cache_path.empty()) save_store(cache_path, store, format_for_path(cache_path));
  }

  result.vectors.reserve(ids.size());
  for (const auto& id : ids) {
    if (store.contains(id)) {
      auto v = store.lookup(id);
      result.vectors.emplace_back(NewsEmbedding(v.begin(), v.end()));
    } else {
      result.vectors.emplace_back(std::nullopt);
    }
  }
  return result;
}

}  // namespace dwellrec::newsrep
