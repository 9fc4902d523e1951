#include "dwellrec/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dwellrec/errors.hpp"

namespace dwellrec::nn {

namespace {

double eval_loss(const LossBuilder& loss, const GradCheckOptions& opts) {
  Graph g(opts.training, opts.dropout_seed);
  const double v = g.value(loss(g))[0];
  if (!std::isfinite(v)) throw NumericError("grad_check: loss is not finite");
  return v;
}

}  // namespace

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradCheckResult grad_check(const LossBuilder& loss, ParamStore& params,
                           const GradCheckOptions& opts) {
  const double eps = opts.eps;
  if (!(eps > 0.0)) throw ConfigError("grad_check: eps must be positive");

  params.zero_grad();
  {
    Graph g(opts.training, opts.dropout_seed);
    const Var root = loss(g);
    if (!std::isfinite(g.value(root)[0])) throw NumericError("grad_check: loss is not finite");
    g.backward(root);
    g.accumulate_param_grads();
  }

  GradCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = params[i];
    const Tensor analytic = p.grad;
    for (std::size_t j = p.frozen_rows * p.value.cols(); j < p.value.size(); ++j) {
      const double saved = p.value[j];
      p.value[j] = saved + eps;
      const double up = eval_loss(loss, opts);
      p.value[j] = saved - eps;
      const double down = eval_loss(loss, opts);
      p.value[j] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double err = relative_error(analytic[j], numeric);
      ++result.checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_param = p.name;
        result.worst_index = j;
        result.worst_analytic = analytic[j];
        result.worst_numeric = numeric;
      }
    }
  }
  params.zero_grad();
  return result;
}

}  // namespace dwellrec::nn
