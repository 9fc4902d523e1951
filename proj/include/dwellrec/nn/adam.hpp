#pragma once

#include <cstddef>
#include <vector>

#include "dwellrec/nn/param.hpp"

namespace dwellrec::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias-corrected moments. Moments are allocated per parameter in
// store order on construction; the store must not gain parameters afterwards.
class Adam {
 public:
  Adam(ParamStore& params, AdamConfig cfg);

  // Applies one update from the current Param::grad values. A NaN or Inf
  // gradient throws NumericError naming the parameter and leaves every
  // parameter untouched.
  void step();

  std::size_t steps() const { return step_; }
  const AdamConfig& config() const { return cfg_; }
  const Tensor& first_moment(std::size_t i) const { return m_[i]; }
  const Tensor& second_moment(std::size_t i) const { return v_[i]; }

 private:
  ParamStore& params_;
  AdamConfig cfg_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::size_t step_ = 0;
};

}  // namespace dwellrec::nn
