#include "dwellrec/config.hpp"

#include <fstream>
#include <set>

#include "dwellrec/errors.hpp"

namespace dwellrec::app {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

Profile parse_profile(const std::string& name) {
  if (name == "paper") return Profile::kPaper;
  if (name == "desk") return Profile::kDesk;
  throw ConfigError("unknown profile '" + name + "' (paper|desk)");
}

std::string to_string(Profile p) { return p == Profile::kPaper ? "paper" : "desk"; }

AppConfig defaults(Profile profile) {
  AppConfig c;
  c.encoder.max_history = 50;
  c.encoder.k_negatives = 4;
  c.encoder.dropout = 0.2;
  c.encoder.theta = 5.0;
  c.encoder.d_dw = 20;
  c.training.adam.lr = 1e-3;
  c.training.batch_size = 32;
  c.training.epochs = 3;
  if (profile == Profile::kPaper) {
    c.encoder.d = 1536;
    c.encoder.heads = 10;
    c.encoder.head_dim = 20;
    c.encoder.pool_dim = 200;
  } else {
    c.encoder.d = 64;
    c.encoder.heads = 2;
    c.encoder.head_dim = 8;
    c.encoder.pool_dim = 16;
  }
  return c;
}

namespace {

// Reads the keys of one section and remembers which it consumed, so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& doc, std::string name) : name_(std::move(name)) {
    if (!doc.contains(name_)) return;
    const json& s = doc.at(name_);
    if (!s.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
    node_ = &s;
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    const json& v = node_->at(key);
    const std::string full = name_ + "." + key;
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(full + " must be a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError(full + " must be a number");
      out = v.get<double>();
    } else {
      static_assert(std::is_unsigned_v<T>);
      if (!v.is_number_integer()) throw ConfigError(full + " must be an integer");
      if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
        throw ConfigError(full + " must be non-negative");
      }
      out = v.get<T>();
    }
  }

  void finish() const {
    if (!node_) return;
    for (const auto& [key, _] : node_->items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + name_ + "." + key + "'");
    }
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> seen_;
};

}  // namespace

void AppConfig::validate() const {
  generator.validate();
  encoder.validate();
  training.validate();
  datagen::parse_eval_mode(evaluation.set);
  if (!(evaluation.theta > 0.0)) throw ConfigError("evaluation.theta must be positive");
  if (!(evaluation.max_skip_fraction >= 0.0 && evaluation.max_skip_fraction <= 1.0)) {
    throw ConfigError("evaluation.max_skip_fraction must lie in [0, 1]");
  }
  if (!(embedding.noise_scale >= 0.0)) throw ConfigError("embedding.noise_scale must be non-negative");
}

AppConfig parse_config(const json& doc, Profile profile) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> sections = {"generator", "embedding", "encoder",
                                                 "training",  "evaluation", "paths"};
  for (const auto& [key, _] : doc.items()) {
    if (!sections.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  AppConfig c = defaults(profile);
  {
    auto& g = c.generator;
    Section s(doc, "generator");
    s.get("n_topics", g.n_topics);
    s.get("n_news", g.n_news);
    s.get("n_users", g.n_users);
    s.get("history_min", g.history_min);
    s.get("history_max", g.history_max);
    s.get("candidates", g.candidates);
    s.get("train_impressions_per_user", g.train_impressions_per_user);
    s.get("test_impressions_per_user", g.test_impressions_per_user);
    s.get("user_topics", g.user_topics);
    s.get("news_topic_peak", g.news_topic_peak);
    s.get("interest_prob", g.interest_prob);
    s.get("interest_concentration", g.interest_concentration);
    s.get("alignment_threshold", g.alignment_threshold);
    s.get("extra_positive_prob", g.extra_positive_prob);
    s.get("unknown_rate", g.unknown_rate);
    s.get("long_median_s", g.long_median_s);
    s.get("long_sigma", g.long_sigma);
    s.get("long_min_s", g.long_min_s);
    s.get("long_max_s", g.long_max_s);
    s.get("short_max_s", g.short_max_s);
    s.finish();
  }
  {
    Section s(doc, "embedding");
    s.get("seed", c.embedding.seed);
    s.get("noise_scale", c.embedding.noise_scale);
    s.finish();
  }
  {
    auto& e = c.encoder;
    Section s(doc, "encoder");
    std::string variant = enc::to_string(e.variant);
    std::string scheme(dwell::to_string(e.dwell_scheme));
    s.get("variant", variant);
    s.get("d", e.d);
    s.get("d_dw", e.d_dw);
    s.get("heads", e.heads);
    s.get("head_dim", e.head_dim);
    s.get("pool_dim", e.pool_dim);
    s.get("max_history", e.max_history);
    s.get("theta", e.theta);
    s.get("k_negatives", e.k_negatives);
    s.get("dwell_scheme", scheme);
    s.get("dropout", e.dropout);
    s.finish();
    e.variant = enc::parse_variant(variant);
    e.dwell_scheme = dwell::parse_scheme(scheme);
  }
  {
    auto& t = c.training;
    Section s(doc, "training");
    s.get("lr", t.adam.lr);
    s.get("beta1", t.adam.beta1);
    s.get("beta2", t.adam.beta2);
    s.get("eps", t.adam.eps);
    s.get("batch_size", t.batch_size);
    s.get("epochs", t.epochs);
    s.finish();
  }
  {
    Section s(doc, "evaluation");
    s.get("set", c.evaluation.set);
    s.get("theta", c.evaluation.theta);
    s.get("max_skip_fraction", c.evaluation.max_skip_fraction);
    s.finish();
  }
  {
    Section s(doc, "paths");
    s.get("data_dir", c.paths.data_dir);
    s.get("embeddings", c.paths.embeddings);
    s.finish();
  }
  c.validate();
  return c;
}

AppConfig load_config(const std::filesystem::path& path, Profile profile) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return parse_config(json::object(), profile);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, profile);
}

ojson to_json(const enc::EncoderConfig& e) {
  ojson j;
  j["variant"] = enc::to_string(e.variant);
  j["d"] = e.d;
  j["d_dw"] = e.d_dw;
  j["heads"] = e.heads;
  j["head_dim"] = e.head_dim;
  j["pool_dim"] = e.pool_dim;
  j["max_history"] = e.max_history;
  j["theta"] = e.theta;
  j["k_negatives"] = e.k_negatives;
  j["dwell_scheme"] = std::string(dwell::to_string(e.dwell_scheme));
  j["dropout"] = e.dropout;
  return j;
}

ojson to_json(const AppConfig& c) {
  ojson j;
  const auto& g = c.generator;
  j["generator"] = {
      {"n_topics", g.n_topics},
      {"n_news", g.n_news},
      {"n_users", g.n_users},
      {"history_min", g.history_min},
      {"history_max", g.history_max},
      {"candidates", g.candidates},
      {"train_impressions_per_user", g.train_impressions_per_user},
      {"test_impressions_per_user", g.test_impressions_per_user},
      {"user_topics", g.user_topics},
      {"news_topic_peak", g.news_topic_peak},
      {"interest_prob", g.interest_prob},
      {"interest_concentration", g.interest_concentration},
      {"alignment_threshold", g.alignment_threshold},
      {"extra_positive_prob", g.extra_positive_prob},
      {"unknown_rate", g.unknown_rate},
      {"long_median_s", g.long_median_s},
      {"long_sigma", g.long_sigma},
      {"long_min_s", g.long_min_s},
      {"long_max_s", g.long_max_s},
      {"short_max_s", g.short_max_s},
  };
  j["embedding"] = {{"seed", c.embedding.seed}, {"noise_scale", c.embedding.noise_scale}};
  j["encoder"] = to_json(c.encoder);
  const auto& t = c.training;
  j["training"] = {{"lr", t.adam.lr},     {"beta1", t.adam.beta1},         {"beta2", t.adam.beta2},
                   {"eps", t.adam.eps},   {"batch_size", t.batch_size}, {"epochs", t.epochs}};
  j["evaluation"] = {{"set", c.evaluation.set},
                     {"theta", c.evaluation.theta},
                     {"max_skip_fraction", c.evaluation.max_skip_fraction}};
  j["paths"] = {{"data_dir", c.paths.data_dir}, {"embeddings", c.paths.embeddings}};
  return j;
}

void save_config(const std::filesystem::path& path, const AppConfig& cfg) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ConfigError("cannot write config " + path.string());
  os << to_json(cfg).dump(2) << '\n';
}

}  // namespace dwellrec::app
