#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "dwellrec/nn/tensor.hpp"

namespace dwellrec::nn {

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;  // same shape as value
  // Leading rows that never receive gradient or updates (padding row of an
  // embedding table).
  std::size_t frozen_rows = 0;

  Param(std::string n, std::size_t rows, std::size_t cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols) {}

  void zero_grad() { grad.fill(0.0); }
};

// Named parameters with stable addresses and a fixed iteration order
// (insertion order), which checkpoints and optimizers rely on.
class ParamStore {
 public:
  Param& add(const std::string& name, std::size_t rows, std::size_t cols);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  Param* find(const std::string& name);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  std::size_t num_values() const;
  Param& operator[](std::size_t i) { return *params_[i]; }
  const Param& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad();

  // Xavier-uniform fill for weight matrices; used for every initializer in
  // the encoders.
  static void xavier_uniform(Param& p, std::mt19937_64& rng);
  static void normal(Param& p, double stddev, std::mt19937_64& rng);

 private:
  std::vector<std::unique_ptr<Param>> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace dwellrec::nn
