#include "dwellrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "dwellrec/errors.hpp"

namespace dwellrec::eval {

namespace {

void check_lengths(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) {
    throw InvalidInputError("metric inputs differ in length: " + std::to_string(labels.size()) +
                            " labels vs " + std::to_string(scores.size()) + " scores");
  }
}

std::size_t count_positive(std::span<const int> labels) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

std::vector<std::size_t> ranking(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

void require_positive(std::span<const int> labels, const char* metric) {
  if (count_positive(labels) == 0) {
    throw InvalidInputError(std::string(metric) + " needs at least one positive");
  }
}

}  // namespace

double auc(std::span<const int> labels, std::span<const double> scores) {
  check_lengths(labels, scores);
  const std::size_t pos = count_positive(labels);
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw InvalidInputError("auc needs both a positive and a negative");

  // Rank-sum with average ranks for tied scores.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]] == 1) pos_rank_sum += avg_rank;
    i = j;
  }
  const double p = static_cast<double>(pos);
  const double n = static_cast<double>(neg);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double mrr(std::span<const int> labels, std::span<const double> scores) {
  check_lengths(labels, scores);
  require_positive(labels, "mrr");
  const auto order = ranking(scores);
  double sum = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r)
    if (labels[order[r]] == 1) sum += 1.0 / static_cast<double>(r + 1);
  return sum / static_cast<double>(count_positive(labels));
}

double ndcg_at_k(std::span<const int> labels, std::span<const double> scores, int k) {
  if (k <= 0) throw ConfigError("ndcg cutoff k must be positive");
  check_lengths(labels, scores);
  require_positive(labels, "ndcg");
  const auto order = ranking(scores);
  const std::size_t cut = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  double dcg = 0.0;
  for (std::size_t r = 0; r < cut; ++r)
    if (labels[order[r]] == 1) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  const std::size_t ideal = std::min(cut, count_positive(labels));
  double idcg = 0.0;
  for (std::size_t r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  return dcg / idcg;
}

}  // namespace dwellrec::eval
