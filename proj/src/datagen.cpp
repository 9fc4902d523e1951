#include "dwellrec/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "dwellrec/errors.hpp"

namespace dwellrec::datagen {

namespace {

using Rng = std::mt19937_64;

double sample_gamma(Rng& rng, double shape) {
  std::gamma_distribution<double> g(shape, 1.0);
  return g(rng);
}

double sample_beta(Rng& rng, double mean, double concentration) {
  if (concentration <= 0.0 || mean <= 0.0 || mean >= 1.0) return mean;
  const double x = sample_gamma(rng, mean * concentration);
  const double y = sample_gamma(rng, (1.0 - mean) * concentration);
  return x + y > 0.0 ? x / (x + y) : mean;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return aa > 0.0 && bb > 0.0 ? ab / std::sqrt(aa * bb) : 0.0;
}

struct UserModel {
  std::vector<std::size_t> aligned;
  std::vector<std::size_t> unaligned;
  double interest_prob = 0.0;
};

class ClickSampler {
 public:
  ClickSampler(const GeneratorConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng) {}

  // Whole seconds, as in the production logs the defaults are calibrated to.
  RawDwell long_dwell() {
    std::lognormal_distribution<double> law(std::log(cfg_.long_median_s), cfg_.long_sigma);
    for (;;) {
      const double t = std::floor(std::min(law(rng_), cfg_.long_max_s));
      if (t > cfg_.long_min_s) return maybe_unknown(t);
    }
  }

  RawDwell short_dwell() {
    std::uniform_real_distribution<double> law(0.0, cfg_.short_max_s);
    return maybe_unknown(std::floor(law(rng_)));
  }

  // Picks a news index from `pool` that is not in `used`; falls back to the
  // other pool when this one is exhausted.
  std::size_t pick(const std::vector<std::size_t>& pool, const std::vector<std::size_t>& other,
                   const std::unordered_set<std::size_t>& used, bool& from_first) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const auto& p = attempt < 32 && !pool.empty() ? pool : other;
      if (p.empty()) break;
      std::uniform_int_distribution<std::size_t> idx(0, p.size() - 1);
      const std::size_t n = p[idx(rng_)];
      if (!used.count(n)) {
        from_first = &p == &pool;
        return n;
      }
    }
    // Exhaustive fallback keeps generation total for tiny catalogs.
    for (const auto* p : {&pool, &other}) {
      for (std::size_t n : *p) {
        if (!used.count(n)) {
          from_first = p == &pool;
          return n;
        }
      }
    }
    throw ConfigError("catalog too small for requested history and candidate sizes");
  }

  // One click: interest-driven with the user's probability, noise otherwise.
  // Returns the news index and its dwell.
  std::pair<std::size_t, RawDwell> click(const UserModel& user,
                                         const std::unordered_set<std::size_t>& used) {
    std::bernoulli_distribution interest(user.interest_prob);
    const bool want_interest = interest(rng_);
    bool aligned = false;
    std::size_t n = 0;
    if (want_interest) {
      n = pick(user.aligned, user.unaligned, used, aligned);
    } else {
      bool unaligned = false;
      n = pick(user.unaligned, user.aligned, used, unaligned);
      aligned = !unaligned;
    }
    return {n, aligned ? long_dwell() : short_dwell()};
  }

 private:
  RawDwell maybe_unknown(double t) {
    std::bernoulli_distribution unknown(cfg_.unknown_rate);
    if (unknown(rng_)) return RawDwell::unknown();
    return RawDwell::seconds(t);
  }

  const GeneratorConfig& cfg_;
  Rng& rng_;
};

std::string news_id(std::size_t i) { return "n" + std::to_string(i); }

}  // namespace

std::size_t Impression::num_positive() const {
  return static_cast<std::size_t>(std::count_if(
      candidates.begin(), candidates.end(), [](const Candidate& c) { return c.label == 1; }));
}

void GeneratorConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("generator.") + name + " must be positive");
  };
  auto prob = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ConfigError(std::string("generator.") + name + " must lie in [0, 1]");
    }
  };
  positive(n_topics, "n_topics");
  positive(n_news, "n_news");
  positive(n_users, "n_users");
  positive(history_max, "history_max");
  positive(candidates, "candidates");
  positive(user_topics, "user_topics");
  if (candidates < 2) throw ConfigError("generator.candidates must be at least 2");
  if (history_min > history_max) throw ConfigError("generator.history_min exceeds history_max");
  if (user_topics > n_topics) throw ConfigError("generator.user_topics exceeds n_topics");
  if (train_impressions_per_user + test_impressions_per_user == 0) {
    throw ConfigError("generator.train_impressions_per_user: no impressions requested");
  }
  if (n_news < history_max + candidates) {
    throw ConfigError("generator.n_news must cover history_max + candidates");
  }
  prob(news_topic_peak, "news_topic_peak");
  prob(interest_prob, "interest_prob");
  prob(alignment_threshold, "alignment_threshold");
  prob(extra_positive_prob, "extra_positive_prob");
  prob(unknown_rate, "unknown_rate");
  if (!(interest_concentration >= 0.0)) {
    throw ConfigError("generator.interest_concentration must be non-negative");
  }
  if (!(long_median_s > 0.0)) throw ConfigError("generator.long_median_s must be positive");
  if (!(long_sigma > 0.0)) throw ConfigError("generator.long_sigma must be positive");
  if (!(long_min_s >= 0.0 && long_max_s > long_min_s + 1.0)) {
    throw ConfigError("generator.long_max_s must exceed long_min_s + 1");
  }
  if (!(short_max_s > 0.0)) throw ConfigError("generator.short_max_s must be positive");
}

Corpus generate_corpus(const GeneratorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  Corpus corpus;

  std::uniform_int_distribution<std::size_t> topic(0, cfg.n_topics - 1);
  corpus.news.reserve(cfg.n_news);
  for (std::size_t i = 0; i < cfg.n_news; ++i) {
    std::vector<double> spread(cfg.n_topics);
    double total = 0.0;
    for (auto& s : spread) total += (s = sample_gamma(rng, 1.0));
    const std::size_t dominant = topic(rng);
    NewsItem item{news_id(i), std::vector<double>(cfg.n_topics)};
    for (std::size_t t = 0; t < cfg.n_topics; ++t) {
      item.topic_mix[t] = (1.0 - cfg.news_topic_peak) * spread[t] / total;
    }
    item.topic_mix[dominant] += cfg.news_topic_peak;
    corpus.news.push_back(std::move(item));
  }

  ClickSampler sampler(cfg, rng);
  std::vector<std::size_t> topics(cfg.n_topics);
  std::iota(topics.begin(), topics.end(), 0);
  std::uniform_int_distribution<std::size_t> history_len(cfg.history_min, cfg.history_max);
  std::uniform_int_distribution<std::size_t> any_news(0, cfg.n_news - 1);
  std::bernoulli_distribution extra_positive(cfg.extra_positive_prob);
  const std::size_t per_user = cfg.train_impressions_per_user + cfg.test_impressions_per_user;

  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    const std::string uid = "u" + std::to_string(u);
    std::shuffle(topics.begin(), topics.end(), rng);
    std::vector<double> pref(cfg.n_topics, 0.0);
    for (std::size_t k = 0; k < cfg.user_topics; ++k) pref[topics[k]] = 1.0;

    UserModel user;
    user.interest_prob = sample_beta(rng, cfg.interest_prob, cfg.interest_concentration);
    for (std::size_t n = 0; n < cfg.n_news; ++n) {
      const bool ok = cosine(pref, corpus.news[n].topic_mix) >= cfg.alignment_threshold;
      (ok ? user.aligned : user.unaligned).push_back(n);
    }

    std::vector<ClickRecord> history;
    std::unordered_set<std::size_t> clicked;
    const std::size_t len = history_len(rng);
    for (std::size_t i = 0; i < len; ++i) {
      auto [n, dwell] = sampler.click(user, clicked);
      clicked.insert(n);
      history.push_back({news_id(n), dwell});
    }

    for (std::size_t j = 0; j < per_user; ++j) {
      std::unordered_set<std::size_t> used = clicked;
      std::vector<Candidate> cands;
      const std::size_t n_pos = std::min(cfg.candidates - 1, extra_positive(rng) ? 2UL : 1UL);
      for (std::size_t p = 0; p < n_pos; ++p) {
        auto [n, dwell] = sampler.click(user, used);
        used.insert(n);
        cands.push_back({news_id(n), 1, dwell});
      }
      while (cands.size() < cfg.candidates) {
        std::size_t n = any_news(rng);
        if (used.size() >= cfg.n_news) throw ConfigError("catalog too small for candidates");
        while (used.count(n)) n = any_news(rng);
        used.insert(n);
        cands.push_back({news_id(n), 0, RawDwell::unknown()});
      }
      std::shuffle(cands.begin(), cands.end(), rng);

      Impression imp{uid + "-" + std::to_string(j), uid, history, std::move(cands)};
      (j < cfg.train_impressions_per_user ? corpus.train : corpus.test).push_back(std::move(imp));
    }
  }
  return corpus;
}

std::vector<RawDwell> collect_history_dwell(const std::vector<Impression>& impressions) {
  std::set<std::string> seen;
  std::vector<RawDwell> out;
  for (const auto& imp : impressions) {
    if (!seen.insert(imp.user_id).second) continue;
    for (const auto& c : imp.history) out.push_back(c.dwell);
  }
  return out;
}

TrainSampleSet build_train_samples(const std::vector<Impression>& impressions, std::size_t k,
                                   std::uint64_t seed) {
  if (k == 0) throw ConfigError("k_negatives must be at least 1");
  Rng rng(seed);
  TrainSampleSet out;
  for (const auto& imp : impressions) {
    std::vector<std::string> unclicked;
    for (const auto& c : imp.candidates)
      if (c.label == 0) unclicked.push_back(c.news_id);

    for (const auto& c : imp.candidates) {
      if (c.label != 1) continue;
      if (unclicked.empty()) {
        ++out.skipped;
        continue;
      }
      TrainSample s;
      s.history = imp.history;
      s.positive = c.news_id;
      if (unclicked.size() >= k) {
        std::vector<std::string> pool = unclicked;
        std::shuffle(pool.begin(), pool.end(), rng);
        s.negatives.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
      } else {
        std::uniform_int_distribution<std::size_t> idx(0, unclicked.size() - 1);
        for (std::size_t i = 0; i < k; ++i) s.negatives.push_back(unclicked[idx(rng)]);
      }
      std::uniform_int_distribution<std::size_t> slot(0, k);
      s.positive_slot = slot(rng);
      out.samples.push_back(std::move(s));
    }
  }
  return out;
}

std::string to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::kNormal: return "normal";
    case EvalMode::kReal: return "real";
    case EvalMode::kRobust: return "robust";
  }
  return "normal";
}

EvalMode parse_eval_mode(const std::string& name) {
  if (name == "normal") return EvalMode::kNormal;
  if (name == "real") return EvalMode::kReal;
  if (name == "robust") return EvalMode::kRobust;
  throw ConfigError("unknown evaluation set '" + name + "' (normal|real|robust)");
}

EvalSet build_eval_set(const std::vector<Impression>& impressions, EvalMode mode, double theta) {
  EvalSet set;
  set.mode = mode;
  set.theta = theta;
  if (mode == EvalMode::kNormal) {
    set.impressions = impressions;
    set.unknown_flags.assign(impressions.size(), 0);
    return set;
  }
  if (!(theta > 0.0)) throw InvalidInputError("effective-click threshold must be positive");

  for (const auto& imp : impressions) {
    Impression kept = imp;
    bool any_unknown = false;
    for (auto& c : kept.candidates) {
      if (c.label != 1) continue;
      if (!c.dwell.known()) {
        if (mode == EvalMode::kRobust) {
          any_unknown = true;
        } else {
          c.label = 0;
        }
      } else if (c.dwell.value() <= theta) {
        c.label = 0;
      }
    }
    if (kept.num_positive() == 0) continue;
    set.impressions.push_back(std::move(kept));
    set.unknown_flags.push_back(any_unknown ? 1 : 0);
  }
  return set;
}

EvalSet mask_eval_dwell(const EvalSet& set) {
  EvalSet out = set;
  for (auto& imp : out.impressions)
    for (auto& c : imp.history) c.dwell = RawDwell::unknown();
  return out;
}

// ---- JSONL -----------------------------------------------------------------

namespace {

using ojson = nlohmann::ordered_json;

ojson dwell_json(const RawDwell& d) { return d.known() ? ojson(d.value()) : ojson(nullptr); }

[[noreturn]] void bad_line(const std::filesystem::path& path, std::size_t line,
                           const std::string& why) {
  throw FormatError(path.string() + ":" + std::to_string(line) + ": " + why);
}

RawDwell parse_dwell(const nlohmann::json& j) {
  if (j.is_null()) return RawDwell::unknown();
  if (!j.is_number()) throw FormatError("dwell must be a number or null");
  return RawDwell::seconds(j.get<double>());
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  std::string line;
  std::size_t no = 0;
  while (std::getline(is, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      bad_line(path, no, e.what());
    } catch (const Error& e) {
      bad_line(path, no, e.what());
    }
  }
}

}  // namespace

void write_news_jsonl(std::ostream& os, const std::vector<NewsItem>& news) {
  for (const auto& n : news) {
    ojson j;
    j["nid"] = n.news_id;
    j["topics"] = n.topic_mix;
    os << j.dump() << '\n';
  }
}

void write_impressions_jsonl(std::ostream& os, const std::vector<Impression>& impressions) {
  for (const auto& imp : impressions) {
    ojson j;
    j["iid"] = imp.impression_id;
    j["uid"] = imp.user_id;
    ojson hist = ojson::array();
    for (const auto& c : imp.history) {
      ojson h;
      h["nid"] = c.news_id;
      h["dwell"] = dwell_json(c.dwell);
      hist.push_back(std::move(h));
    }
    j["history"] = std::move(hist);
    ojson cands = ojson::array();
    for (const auto& c : imp.candidates) {
      ojson cj;
      cj["nid"] = c.news_id;
      cj["y"] = c.label;
      if (c.label == 1) cj["dwell"] = dwell_json(c.dwell);
      cands.push_back(std::move(cj));
    }
    j["cands"] = std::move(cands);
    os << j.dump() << '\n';
  }
}

std::vector<NewsItem> read_news_jsonl(const std::filesystem::path& path) {
  std::vector<NewsItem> out;
  for_each_line(path, [&](const nlohmann::json& j) {
    NewsItem n{j.at("nid").get<std::string>(), j.at("topics").get<std::vector<double>>()};
    double s = 0.0;
    for (double v : n.topic_mix) {
      if (!(v >= 0.0)) throw FormatError("negative topic weight in " + n.news_id);
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw FormatError("topic mix of " + n.news_id + " does not sum to 1");
    out.push_back(std::move(n));
  });
  return out;
}

std::vector<Impression> read_impressions_jsonl(const std::filesystem::path& path) {
  std::vector<Impression> out;
  for_each_line(path, [&](const nlohmann::json& j) {
    Impression imp;
    imp.impression_id = j.at("iid").get<std::string>();
    imp.user_id = j.at("uid").get<std::string>();
    for (const auto& h : j.at("history")) {
      imp.history.push_back({h.at("nid").get<std::string>(), parse_dwell(h.at("dwell"))});
    }
    for (const auto& c : j.at("cands")) {
      Candidate cand;
      cand.news_id = c.at("nid").get<std::string>();
      cand.label = c.at("y").get<int>();
      if (cand.label != 0 && cand.label != 1) throw FormatError("label must be 0 or 1");
      if (c.contains("dwell")) cand.dwell = parse_dwell(c.at("dwell"));
      imp.candidates.push_back(std::move(cand));
    }
    if (imp.candidates.empty()) throw FormatError("impression " + imp.impression_id + " has no candidates");
    out.push_back(std::move(imp));
  });
  return out;
}

}  // namespace dwellrec::datagen
