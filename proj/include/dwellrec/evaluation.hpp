#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "dwellrec/datagen.hpp"
#include "dwellrec/encoders.hpp"
#include "dwellrec/newsrep.hpp"

namespace dwellrec::eval {

struct MetricReport {
  double auc = 0.0;
  double mrr = 0.0;
  double ndcg5 = 0.0;
  double ndcg10 = 0.0;
  std::size_t n_impressions = 0;
  std::size_t skipped = 0;  // impressions lacking a positive or a negative
};

// Per-metric masked - unmasked.
struct GtbReport {
  MetricReport unmasked;
  MetricReport masked;
  double auc = 0.0;
  double mrr = 0.0;
  double ndcg5 = 0.0;
  double ndcg10 = 0.0;
};

// Scores of every candidate of one impression, in candidate order.
using Scorer = std::function<std::vector<double>(const datagen::Impression&)>;

struct EvalOptions {
  std::size_t threads = 1;
  // More skipped impressions than this share is an error.
  double max_skip_fraction = 0.5;
};

// Macro average over impressions. Per-impression values are reduced in
// sorted order, so the report does not depend on impression order or on the
// number of worker threads. Throws EmptyInputError when nothing could be
// scored and InvalidInputError when the skip share exceeds the limit.
MetricReport evaluate_scores(const std::vector<datagen::Impression>& impressions,
                             const Scorer& scorer, const EvalOptions& opts = {});

MetricReport evaluate(const enc::Model& model, const newsrep::EmbeddingStore& store,
                      const datagen::EvalSet& set, const EvalOptions& opts = {});

GtbReport run_masked_eval(const enc::Model& model, const newsrep::EmbeddingStore& store,
                          const datagen::EvalSet& set, const EvalOptions& opts = {});

// {"auc":..,"mrr":..,"ndcg5":..,"ndcg10":..,"n":..,"skipped":..}
std::string to_json(const MetricReport& r);
std::string to_json(const GtbReport& r);

// Worker count from DWELLREC_THREADS (default 1, minimum 1).
std::size_t threads_from_env();

}  // namespace dwellrec::eval
