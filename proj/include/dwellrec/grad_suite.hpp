// Randomized finite-difference checks of every layer and encoder variant at
// tiny dimensions. Shared by the grad-check command and the test suite.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dwellrec::check {

inline constexpr double kGradTolerance = 1e-4;

struct GradCaseResult {
  std::string name;
  std::size_t trials = 0;
  std::size_t failed_trials = 0;  // max relative error >= kGradTolerance
  double max_rel_error = 0.0;
  std::string worst_param;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Case names: linear, tanh, softmax_rows, dropout, embed_concat, att_pool,
// mha, softmax_xent, BaseAttPool, BaseMHA, DweW, DweA.
std::vector<std::string> grad_case_names();

// Runs `trials` random instances of the named case (all cases when `only`
// is empty). Unknown names throw ConfigError.
std::vector<GradCaseResult> run_grad_suite(std::size_t trials, std::uint64_t seed,
                                           const std::vector<std::string>& only = {});

}  // namespace dwellrec::check
