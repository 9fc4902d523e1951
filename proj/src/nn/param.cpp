#include "dwellrec/nn/param.hpp"

#include <cmath>

#include "dwellrec/errors.hpp"

namespace dwellrec::nn {

Param& ParamStore::add(const std::string& name, std::size_t rows, std::size_t cols) {
  if (index_.count(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  index_[name] = params_.size();
  params_.push_back(std::make_unique<Param>(name, rows, cols));
  return *params_.back();
}

Param& ParamStore::get(const std::string& name) {
  auto* p = find(name);
  if (!p) throw LookupError("no parameter named '" + name + "'");
  return *p;
}

const Param& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw LookupError("no parameter named '" + name + "'");
  return *params_[it->second];
}

Param* ParamStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

std::size_t ParamStore::num_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

void ParamStore::xavier_uniform(Param& p, std::mt19937_64& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (std::size_t r = p.frozen_rows; r < p.value.rows(); ++r) {
    for (auto& v : p.value.row(r)) v = dist(rng);
  }
}

void ParamStore::normal(Param& p, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (std::size_t r = p.frozen_rows; r < p.value.rows(); ++r) {
    for (auto& v : p.value.row(r)) v = dist(rng);
  }
}

}  // namespace dwellrec::nn
