// Effective-click threshold sweep over trained models.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dwellrec/datagen.hpp"
#include "dwellrec/encoders.hpp"
#include "dwellrec/evaluation.hpp"
#include "dwellrec/newsrep.hpp"

namespace dwellrec::eval {

// min, min + step, ... up to and including max (within 1e-9).
std::vector<double> threshold_grid(double min, double max, double step);

struct SweepRow {
  std::string variant;
  double theta = 0.0;
  std::optional<MetricReport> report;  // empty when Real(theta) has no impression
};

struct NamedModel {
  std::string name;
  const enc::Model* model = nullptr;
};

// Rows ordered by model, then threshold.
std::vector<SweepRow> run_sweep(const std::vector<NamedModel>& models,
                                const newsrep::EmbeddingStore& store,
                                const std::vector<datagen::Impression>& test,
                                const std::vector<double>& thresholds,
                                const EvalOptions& opts = {});

// Header `variant,theta,auc,mrr,ndcg5,ndcg10`; empty rows leave the metric
// fields blank.
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace dwellrec::eval
