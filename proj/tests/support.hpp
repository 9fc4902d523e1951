// Test-side oracles and random generators. The oracles are deliberately naive
// second implementations and share no code with the library paths they check.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dwellrec/datagen.hpp"
#include "dwellrec/encoders.hpp"
#include "dwellrec/newsrep.hpp"

namespace testsupport {

// ---- metric oracles -------------------------------------------------------------

// Fraction of (positive, negative) pairs ordered correctly, ties count half.
inline double oracle_auc(const std::vector<int>& y, const std::vector<double>& s) {
  double good = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) good += 1.0;
      else if (s[i] == s[j]) good += 0.5;
    }
  }
  return good / pairs;
}

// 1-based rank of item i: items with a higher score, or an equal score and a
// smaller index, come first.
inline std::size_t oracle_rank(const std::vector<double>& s, std::size_t i) {
  std::size_t ahead = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s[j] > s[i] || (s[j] == s[i] && j < i)) ++ahead;
  }
  return ahead + 1;
}

inline double oracle_mrr(const std::vector<int>& y, const std::vector<double>& s) {
  double sum = 0.0;
  int pos = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1) continue;
    sum += 1.0 / static_cast<double>(oracle_rank(s, i));
    ++pos;
  }
  return sum / pos;
}

inline double oracle_ndcg(const std::vector<int>& y, const std::vector<double>& s, std::size_t k) {
  double dcg = 0.0, idcg = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1) continue;
    ++pos;
    const std::size_t r = oracle_rank(s, i);
    if (r <= k) dcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
  }
  for (std::size_t r = 1; r <= std::min(k, pos); ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
  return dcg / idcg;
}

// Labels with at least one positive and one negative; scores from a coarse
// grid half of the time so ties are common.
struct LabeledScores {
  std::vector<int> labels;
  std::vector<double> scores;
};

inline LabeledScores random_labeled_scores(std::mt19937_64& rng, std::size_t max_n = 10) {
  std::uniform_int_distribution<std::size_t> len(2, max_n);
  const std::size_t n = len(rng);
  LabeledScores out;
  out.labels.assign(n, 0);
  std::bernoulli_distribution pos(0.3), coarse(0.5);
  for (auto& y : out.labels) y = pos(rng) ? 1 : 0;
  std::uniform_int_distribution<std::size_t> idx(0, n - 1);
  const std::size_t a = idx(rng);
  std::size_t b = idx(rng);
  while (b == a) b = idx(rng);
  out.labels[a] = 1;
  out.labels[b] = 0;
  const bool grid = coarse(rng);
  std::uniform_int_distribution<int> g(0, 3);
  std::normal_distribution<double> z(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) out.scores.push_back(grid ? g(rng) * 0.5 : z(rng));
  return out;
}

// ---- model fixtures ----------------------------------------------------------------

inline dwellrec::enc::EncoderConfig tiny_config(dwellrec::enc::Variant v) {
  dwellrec::enc::EncoderConfig c;
  c.variant = v;
  c.d = 6;
  c.d_dw = 3;
  c.heads = 2;
  c.head_dim = 3;
  c.pool_dim = 4;
  c.max_history = 8;
  c.k_negatives = 2;
  return c;
}

inline const std::vector<dwellrec::enc::Variant>& all_variants() {
  using dwellrec::enc::Variant;
  static const std::vector<Variant> v = {Variant::kBaseAttPool, Variant::kBaseMha, Variant::kDweW,
                                         Variant::kDweA};
  return v;
}

inline dwellrec::newsrep::EmbeddingStore random_store(std::size_t n, std::size_t d,
                                                      std::mt19937_64& rng) {
  dwellrec::newsrep::EmbeddingStore store(d);
  std::normal_distribution<double> z(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    dwellrec::newsrep::NewsEmbedding e(d);
    for (auto& x : e) x = static_cast<float>(z(rng));
    store.insert("n" + std::to_string(i), e);
  }
  return store;
}

inline dwellrec::dwell::RawDwell random_dwell(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 9);
  std::uniform_real_distribution<double> secs(0.0, 700.0);
  const int k = kind(rng);
  if (k == 0) return dwellrec::dwell::RawDwell::unknown();
  if (k <= 3) return dwellrec::dwell::RawDwell::seconds(std::floor(secs(rng) / 100.0));  // short
  return dwellrec::dwell::RawDwell::seconds(std::floor(secs(rng)));
}

inline std::vector<dwellrec::datagen::ClickRecord> random_history(std::size_t len, std::size_t n_news,
                                                                  std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> nid(0, n_news - 1);
  std::vector<dwellrec::datagen::ClickRecord> h;
  for (std::size_t i = 0; i < len; ++i) h.push_back({"n" + std::to_string(nid(rng)), random_dwell(rng)});
  return h;
}

// Small generated corpus with synthetic embeddings matching tiny_config().
struct World {
  dwellrec::datagen::Corpus corpus;
  dwellrec::newsrep::EmbeddingStore store;
};

inline World small_world(std::uint64_t seed, std::size_t users = 40) {
  dwellrec::datagen::GeneratorConfig g;
  g.n_topics = 4;
  g.n_news = 80;
  g.n_users = users;
  g.history_min = 3;
  g.history_max = 12;
  World w;
  w.corpus = dwellrec::datagen::generate_corpus(g, seed);
  w.store = dwellrec::newsrep::synth_store(w.corpus.news, {6, seed, 0.1});
  return w;
}

// ---- files -------------------------------------------------------------------------

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("dwellrec_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os << text;
}

}  // namespace testsupport
