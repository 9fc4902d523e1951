#include "dwellrec/experiments.hpp"

#include <cmath>
#include <sstream>

#include "dwellrec/errors.hpp"

namespace dwellrec::eval {

std::vector<double> threshold_grid(double min, double max, double step) {
  if (!(min > 0.0) || !(step > 0.0) || !(max >= min)) {
    throw ConfigError("threshold grid needs 0 < min <= max and step > 0");
  }
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double t = min + step * static_cast<double>(i);
    if (t > max + 1e-9) break;
    out.push_back(t);
  }
  return out;
}

std::vector<SweepRow> run_sweep(const std::vector<NamedModel>& models,
                                const newsrep::EmbeddingStore& store,
                                const std::vector<datagen::Impression>& test,
                                const std::vector<double>& thresholds, const EvalOptions& opts) {
  std::vector<datagen::EvalSet> sets;
  sets.reserve(thresholds.size());
  for (double t : thresholds) sets.push_back(datagen::build_eval_set(test, datagen::EvalMode::kReal, t));

  std::vector<SweepRow> rows;
  for (const auto& m : models) {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      SweepRow row{m.name, thresholds[i], std::nullopt};
      if (!sets[i].impressions.empty()) {
        try {
          row.report = evaluate(*m.model, store, sets[i], opts);
        } catch (const EmptyInputError&) {
          row.report.reset();
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "variant,theta,auc,mrr,ndcg5,ndcg10\n";
  for (const auto& r : rows) {
    os << r.variant << ',' << r.theta;
    if (r.report) {
      os << ',' << r.report->auc << ',' << r.report->mrr << ',' << r.report->ndcg5 << ','
         << r.report->ndcg10 << '\n';
    } else {
      os << ",,,,\n";
    }
  }
  return os.str();
}

}  // namespace dwellrec::eval
