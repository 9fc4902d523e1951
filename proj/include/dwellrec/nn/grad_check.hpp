// Central finite-difference check of reverse-mode gradients.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "dwellrec/nn/graph.hpp"
#include "dwellrec/nn/param.hpp"

namespace dwellrec::nn {

// Builds the scalar (1x1) loss on a fresh graph from the current parameter
// values. Must be pure: the same parameters always give the same loss.
using LossBuilder = std::function<Var(Graph&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

// |g - g_fd| / max(1e-8, |g| + |g_fd|), the error measure used throughout.
double relative_error(double analytic, double numeric);

struct GradCheckOptions {
  double eps = 1e-5;
  // Every graph is built in this mode with this dropout seed, so dropout
  // masks are identical across the perturbed evaluations.
  bool training = false;
  std::uint64_t dropout_seed = 0;
};

// Compares reverse-mode gradients with (f(x+eps) - f(x-eps)) / 2eps for
// every trainable entry of every parameter. Parameter values are restored.
// Throws NumericError if the loss is ever non-finite.
GradCheckResult grad_check(const LossBuilder& loss, ParamStore& params,
                           const GradCheckOptions& opts = {});

}  // namespace dwellrec::nn
