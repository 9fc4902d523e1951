#include "dwellrec/nn/adam.hpp"

#include <cmath>

#include "dwellrec/errors.hpp"

namespace dwellrec::nn {

Adam::Adam(ParamStore& params, AdamConfig cfg) : params_(params), cfg_(cfg) {
  if (!(cfg.lr >= 0.0) || !(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) ||
      !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0) || !(cfg.eps > 0.0)) {
    throw ConfigError("invalid Adam hyperparameters");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Tensor& v = params_[i].value;
    m_.emplace_back(v.rows(), v.cols());
    v_.emplace_back(v.rows(), v.cols());
  }
}

void Adam::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].grad.all_finite()) {
      throw NumericError("non-finite gradient in parameter '" + params_[i].name + "'");
    }
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Param& p = params_[i];
    const std::size_t begin = p.frozen_rows * p.value.cols();
    for (std::size_t j = begin; j < p.value.size(); ++j) {
      const double gj = p.grad[j];
      m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * gj;
      v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * gj * gj;
      const double m_hat = m_[i][j] / c1;
      const double v_hat = v_[i][j] / c2;
      p.value[j] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

}  // namespace dwellrec::nn
