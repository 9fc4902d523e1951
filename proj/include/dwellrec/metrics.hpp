// Per-impression ranking metrics. Rankings sort by descending score with
// ties kept in input order.

#pragma once

#include <cstddef>
#include <span>

namespace dwellrec::eval {

// Share of (positive, negative) pairs ranked correctly, ties counting 0.5.
// Needs at least one positive and one negative (InvalidInputError otherwise).
double auc(std::span<const int> labels, std::span<const double> scores);

// Mean of 1/rank over the positives. Needs at least one positive.
double mrr(std::span<const int> labels, std::span<const double> scores);

// Binary-gain nDCG@k with DCG = sum_{i<=k} rel_i / log2(i + 1). k <= 0 throws
// ConfigError. Needs at least one positive.
double ndcg_at_k(std::span<const int> labels, std::span<const double> scores, int k);

}  // namespace dwellrec::eval
