#include "dwellrec/evaluation.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "dwellrec/errors.hpp"
#include "dwellrec/metrics.hpp"

namespace dwellrec::eval {

namespace {

struct ImpressionScore {
  bool scored = false;
  double auc = 0.0, mrr = 0.0, ndcg5 = 0.0, ndcg10 = 0.0;
};

ImpressionScore score_one(const datagen::Impression& imp, const Scorer& scorer) {
  std::vector<int> labels;
  labels.reserve(imp.candidates.size());
  for (const auto& c : imp.candidates) labels.push_back(c.label);
  const std::size_t pos = imp.num_positive();
  if (pos == 0 || pos == labels.size()) return {};
  const std::vector<double> scores = scorer(imp);
  return {true, auc(labels, scores), mrr(labels, scores), ndcg_at_k(labels, scores, 5),
          ndcg_at_k(labels, scores, 10)};
}

double sorted_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::size_t threads_from_env() {
  const char* env = std::getenv("DWELLREC_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw ConfigError("DWELLREC_THREADS must be a positive integer");
  return static_cast<std::size_t>(v);
}

MetricReport evaluate_scores(const std::vector<datagen::Impression>& impressions,
                             const Scorer& scorer, const EvalOptions& opts) {
  std::vector<ImpressionScore> per(impressions.size());
  const std::size_t threads = std::max<std::size_t>(1, std::min(opts.threads, impressions.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < impressions.size(); ++i) per[i] = score_one(impressions[i], scorer);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < impressions.size(); i += threads)
            per[i] = score_one(impressions[i], scorer);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<double> a, m, n5, n10;
  MetricReport r;
  for (const auto& s : per) {
    if (!s.scored) {
      ++r.skipped;
      continue;
    }
    a.push_back(s.auc);
    m.push_back(s.mrr);
    n5.push_back(s.ndcg5);
    n10.push_back(s.ndcg10);
  }
  r.n_impressions = a.size();
  if (r.n_impressions == 0) throw EmptyInputError("no impression had both a positive and a negative");
  if (static_cast<double>(r.skipped) >
      opts.max_skip_fraction * static_cast<double>(impressions.size())) {
    throw InvalidInputError(std::to_string(r.skipped) + " of " +
                            std::to_string(impressions.size()) +
                            " impressions lack a positive or a negative");
  }
  r.auc = sorted_mean(std::move(a));
  r.mrr = sorted_mean(std::move(m));
  r.ndcg5 = sorted_mean(std::move(n5));
  r.ndcg10 = sorted_mean(std::move(n10));
  return r;
}

MetricReport evaluate(const enc::Model& model, const newsrep::EmbeddingStore& store,
                      const datagen::EvalSet& set, const EvalOptions& opts) {
  const Scorer scorer = [&](const datagen::Impression& imp) {
    std::vector<std::string> ids;
    ids.reserve(imp.candidates.size());
    for (const auto& c : imp.candidates) ids.push_back(c.news_id);
    const auto eh = enc::encode_history(imp.history, store, model.config());
    return model.score_candidates(eh, ids, store);
  };
  return evaluate_scores(set.impressions, scorer, opts);
}

GtbReport run_masked_eval(const enc::Model& model, const newsrep::EmbeddingStore& store,
                          const datagen::EvalSet& set, const EvalOptions& opts) {
  GtbReport g;
  g.unmasked = evaluate(model, store, set, opts);
  g.masked = evaluate(model, store, datagen::mask_eval_dwell(set), opts);
  g.auc = g.masked.auc - g.unmasked.auc;
  g.mrr = g.masked.mrr - g.unmasked.mrr;
  g.ndcg5 = g.masked.ndcg5 - g.unmasked.ndcg5;
  g.ndcg10 = g.masked.ndcg10 - g.unmasked.ndcg10;
  return g;
}

namespace {

nlohmann::ordered_json report_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["auc"] = r.auc;
  j["mrr"] = r.mrr;
  j["ndcg5"] = r.ndcg5;
  j["ndcg10"] = r.ndcg10;
  j["n"] = r.n_impressions;
  j["skipped"] = r.skipped;
  return j;
}

}  // namespace

std::string to_json(const MetricReport& r) { return report_json(r).dump(); }

std::string to_json(const GtbReport& r) {
  nlohmann::ordered_json j;
  j["unmasked"] = report_json(r.unmasked);
  j["masked"] = report_json(r.masked);
  j["gtb"] = {{"auc", r.auc}, {"mrr", r.mrr}, {"ndcg5", r.ndcg5}, {"ndcg10", r.ndcg10}};
  return j.dump();
}

}  // namespace dwellrec::eval
