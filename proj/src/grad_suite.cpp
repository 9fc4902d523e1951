#include "dwellrec/grad_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include "dwellrec/encoders.hpp"
#include "dwellrec/errors.hpp"
#include "dwellrec/nn/grad_check.hpp"
#include "dwellrec/nn/layers.hpp"

namespace dwellrec::check {

namespace {

using nn::Graph;
using nn::Param;
using nn::ParamStore;
using nn::Tensor;
using nn::Var;

struct Trial {
  std::shared_ptr<ParamStore> store = std::make_shared<ParamStore>();
  std::shared_ptr<void> owner;  // keeps encoder state alive for the loss
  ParamStore* params = store.get();
  nn::LossBuilder loss;
  nn::GradCheckOptions opts;
};

Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor t(r, c);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = n(rng);
  return t;
}

Param& add_random(ParamStore& s, const std::string& name, std::size_t r, std::size_t c,
                  std::mt19937_64& rng, double scale = 1.0) {
  Param& p = s.add(name, r, c);
  p.value = random_tensor(r, c, rng, scale);
  return p;
}

// At least one valid entry.
nn::Mask random_mask(std::size_t n, std::mt19937_64& rng) {
  nn::Mask m(n);
  std::bernoulli_distribution keep(0.7);
  for (auto& v : m) v = keep(rng) ? 1 : 0;
  m[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] = 1;
  return m;
}

// Contracts an arbitrary output with a fixed random tensor to get a scalar.
Var contract(Graph& g, Var y, const Tensor& r) { return nn::dot(g, y, g.constant(r)); }

Trial make_linear(std::mt19937_64& rng) {
  Trial t;
  Param& x = add_random(*t.store, "x", 3, 4, rng);
  Param& w = add_random(*t.store, "w", 4, 5, rng);
  Param& b = add_random(*t.store, "b", 1, 5, rng);
  const Tensor r = random_tensor(3, 5, rng);
  t.loss = [&x, &w, &b, r](Graph& g) {
    return contract(g, nn::linear(g, g.param(x), g.param(w), g.param(b)), r);
  };
  return t;
}

Trial make_tanh(std::mt19937_64& rng) {
  Trial t;
  Param& x = add_random(*t.store, "x", 3, 4, rng);
  const Tensor r = random_tensor(3, 4, rng);
  t.loss = [&x, r](Graph& g) { return contract(g, nn::tanh(g, g.param(x)), r); };
  return t;
}

Trial make_softmax(std::mt19937_64& rng) {
  Trial t;
  Param& x = add_random(*t.store, "x", 3, 5, rng);
  const nn::Mask mask = random_mask(5, rng);
  const Tensor r = random_tensor(3, 5, rng);
  t.loss = [&x, mask, r](Graph& g) {
    return contract(g, nn::softmax_rows(g, g.param(x), mask), r);
  };
  return t;
}

Trial make_dropout(std::mt19937_64& rng) {
  Trial t;
  Param& x = add_random(*t.store, "x", 4, 5, rng);
  const Tensor r = random_tensor(4, 5, rng);
  t.loss = [&x, r](Graph& g) {
    return contract(g, nn::tanh(g, nn::dropout(g, g.param(x), 0.2)), r);
  };
  t.opts.training = true;
  t.opts.dropout_seed = rng();
  return t;
}

Trial make_embed_concat(std::mt19937_64& rng) {
  Trial t;
  Param& table = add_random(*t.store, "table", 6, 3, rng);
  Param& x = add_random(*t.store, "x", 4, 2, rng);
  std::uniform_int_distribution<std::size_t> id(0, 5);
  std::vector<std::size_t> ids(4);
  for (auto& i : ids) i = id(rng);
  const Tensor r = random_tensor(4, 5, rng);
  t.loss = [&table, &x, ids, r](Graph& g) {
    const Var e = nn::embed_lookup(g, g.param(table), ids);
    return contract(g, nn::tanh(g, nn::concat_cols(g, {e, g.param(x)})), r);
  };
  return t;
}

Trial make_att_pool(std::mt19937_64& rng) {
  Trial t;
  Param& x = add_random(*t.store, "x", 5, 8, rng);
  nn::AttPoolParams p = nn::make_att_pool(*t.store, "pool", 8, 4);
  for (Param* q : {p.proj, p.bias, p.query}) q->value = random_tensor(q->value.rows(), q->value.cols(), rng, 0.5);
  const nn::Mask mask = random_mask(5, rng);
  const Tensor r = random_tensor(1, 8, rng);
  t.loss = [&x, p, mask, r](Graph& g) {
    return contract(g, nn::att_pool(g, g.param(x), p, mask), r);
  };
  return t;
}

Trial make_mha(std::mt19937_64& rng) {
  Trial t;
  Param& q = add_random(*t.store, "q", 4, 5, rng);
  Param& v = add_random(*t.store, "v", 4, 6, rng);
  nn::MhaParams p = nn::make_mha(*t.store, "mha", 5, 6, 2, 3);
  for (Param* w : {p.wq, p.wk, p.wv, p.wo}) w->value = random_tensor(w->value.rows(), w->value.cols(), rng, 0.5);
  const nn::Mask mask = random_mask(4, rng);
  const Tensor r = random_tensor(4, 6, rng);
  t.loss = [&q, &v, p, mask, r](Graph& g) {
    const Var qv = g.param(q);
    return contract(g, nn::multi_head_attention(g, qv, qv, g.param(v), p, mask), r);
  };
  return t;
}

Trial make_xent(std::mt19937_64& rng) {
  Trial t;
  Param& x = add_random(*t.store, "logits", 1, 5, rng);
  const std::size_t target = std::uniform_int_distribution<std::size_t>(0, 4)(rng);
  t.loss = [&x, target](Graph& g) { return nn::softmax_xent(g, g.param(x), target); };
  return t;
}

// Encoder trials own their model, store and sample; the loss closure shares
// them through a heap block kept alive by the closure.
struct EncoderWorld {
  enc::Model model;
  newsrep::EmbeddingStore news{6};
  datagen::TrainSample sample;
  explicit EncoderWorld(const enc::EncoderConfig& cfg, std::uint64_t seed) : model(cfg, seed) {}
};

Trial make_encoder(enc::Variant variant, std::mt19937_64& rng) {
  enc::EncoderConfig cfg;
  cfg.variant = variant;
  cfg.d = 6;
  cfg.d_dw = 3;
  cfg.heads = 2;
  cfg.head_dim = 3;
  cfg.pool_dim = 4;
  cfg.max_history = 4;
  cfg.k_negatives = 2;
  cfg.theta = 5.0;
  auto world = std::make_shared<EncoderWorld>(cfg, rng());

  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    // Fixed norm 2.5: small inputs make attention rows nearly identical,
    // large ones saturate the pool tanh.
    std::vector<double> v(6);
    double norm = 0.0;
    for (auto& x : v) {
      x = n(rng);
      norm += x * x;
    }
    newsrep::NewsEmbedding e(6);
    for (std::size_t k = 0; k < 6; ++k) e[k] = static_cast<float>(2.5 * v[k] / std::sqrt(norm));
    world->news.insert("n" + std::to_string(i), e);
  }
  // Four clicks with distinct dwell buckets, at least one long and one short,
  // so attention weights and the gate are not constant. -1 marks Unknown.
  std::vector<double> pool = {-1.0, 0.0, 3.0, 5.0, 15.0, 30.0, 120.0, 700.0};
  std::vector<double> dwell_s;
  do {
    std::shuffle(pool.begin(), pool.end(), rng);
    dwell_s.assign(pool.begin(), pool.begin() + 4);
  } while (std::none_of(dwell_s.begin(), dwell_s.end(), [](double s) { return s > 5.0; }) ||
           std::all_of(dwell_s.begin(), dwell_s.end(), [](double s) { return s > 5.0; }));
  // Distinct news everywhere: repeated rows would make attention weights
  // irrelevant and their gradients structurally zero.
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) ids.push_back("n" + std::to_string(i));
  std::shuffle(ids.begin(), ids.end(), rng);
  std::size_t next = 0;
  for (double s : dwell_s) {
    world->sample.history.push_back(
        {ids[next++], s < 0.0 ? dwell::RawDwell::unknown() : dwell::RawDwell::seconds(s)});
  }
  world->sample.positive = ids[next++];
  world->sample.negatives = {ids[next], ids[next + 1]};
  world->sample.positive_slot = std::uniform_int_distribution<std::size_t>(0, 2)(rng);

  // Model initialization with biases off zero, a wider dwell table and
  // sharper pool queries. At the training init the pool and gate gradients
  // sit close to the finite-difference noise floor.
  for (std::size_t i = 0; i < world->model.params().size(); ++i) {
    Param& p = world->model.params()[i];
    if (p.name == "dwell.table") {
      for (std::size_t j = p.value.cols(); j < p.value.size(); ++j) p.value[j] = 0.5 * n(rng);
    } else if (p.name.ends_with("pool.query")) {
      for (std::size_t j = 0; j < p.value.size(); ++j) p.value[j] *= 3.0;
    } else if (p.value.rows() == 1 && !p.name.ends_with("query")) {
      for (std::size_t j = 0; j < p.value.size(); ++j) p.value[j] = 0.1 * n(rng);
    }
  }

  Trial t;
  EncoderWorld* w = world.get();
  t.owner = world;
  t.params = &w->model.params();
  t.loss = [w](Graph& g) { return w->model.sample_loss(g, w->sample, w->news); };
  return t;
}

using Maker = std::function<Trial(std::mt19937_64&)>;

const std::vector<std::pair<std::string, Maker>>& cases() {
  static const std::vector<std::pair<std::string, Maker>> all = {
      {"linear", make_linear},
      {"tanh", make_tanh},
      {"softmax_rows", make_softmax},
      {"dropout", make_dropout},
      {"embed_concat", make_embed_concat},
      {"att_pool", make_att_pool},
      {"mha", make_mha},
      {"softmax_xent", make_xent},
  };
  return all;
}

GradCaseResult run_case(const std::string& name, const Maker& make, std::size_t trials,
                        std::mt19937_64& rng) {
  GradCaseResult res;
  res.name = name;
  res.trials = trials;
  for (std::size_t i = 0; i < trials; ++i) {
    Trial t = make(rng);
    const nn::GradCheckResult r = nn::grad_check(t.loss, *t.params, t.opts);
    if (r.max_rel_error >= kGradTolerance) ++res.failed_trials;
    if (r.max_rel_error > res.max_rel_error) {
      res.max_rel_error = r.max_rel_error;
      res.worst_param = r.worst_param;
      res.worst_analytic = r.worst_analytic;
      res.worst_numeric = r.worst_numeric;
    }
  }
  return res;
}

std::vector<std::pair<std::string, Maker>> all_cases() {
  auto out = cases();
  for (auto v : {enc::Variant::kBaseAttPool, enc::Variant::kBaseMha, enc::Variant::kDweW,
                 enc::Variant::kDweA}) {
    out.emplace_back(enc::to_string(v), [v](std::mt19937_64& rng) { return make_encoder(v, rng); });
  }
  return out;
}

}  // namespace

std::vector<std::string> grad_case_names() {
  std::vector<std::string> names;
  for (const auto& [n, _] : all_cases()) names.push_back(n);
  return names;
}

std::vector<GradCaseResult> run_grad_suite(std::size_t trials, std::uint64_t seed,
                                           const std::vector<std::string>& only) {
  const auto table = all_cases();
  for (const auto& name : only) {
    const bool known = std::any_of(table.begin(), table.end(),
                                   [&](const auto& c) { return c.first == name; });
    if (!known) throw ConfigError("unknown gradient check case '" + name + "'");
  }
  std::vector<GradCaseResult> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& [name, make] = table[i];
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    // Each case draws from its own stream so selecting a subset does not
    // change the instances a case sees.
    std::mt19937_64 rng(seed * 1000003ULL + i);
    out.push_back(run_case(name, make, trials, rng));
  }
  return out;
}

}  // namespace dwellrec::check
