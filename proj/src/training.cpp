#include "dwellrec/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>
#include <unordered_map>

#include "dwellrec/errors.hpp"
#include "dwellrec/nn/checkpoint.hpp"

namespace dwellrec::train {

void TrainingConfig::validate() const {
  if (batch_size == 0) throw ConfigError("training.batch_size must be positive");
  if (epochs == 0) throw ConfigError("training.epochs must be positive");
  if (!(adam.lr >= 0.0)) throw ConfigError("training.lr must be non-negative");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) throw ConfigError("training.beta1 must lie in [0, 1)");
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) throw ConfigError("training.beta2 must lie in [0, 1)");
  if (!(adam.eps > 0.0)) throw ConfigError("training.eps must be positive");
}

namespace {

struct SampleResult {
  double loss = 0.0;
  std::vector<nn::Tensor> grads;  // parallel to the model's ParamStore; empty = untouched
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t epoch, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  return rng();
}

}  // namespace

TrainRun run_training(enc::Model& model, const std::vector<datagen::TrainSample>& samples,
                      const newsrep::EmbeddingStore& store, const TrainingConfig& cfg,
                      std::uint64_t seed, const TrainOptions& opts) {
  cfg.validate();
  if (samples.empty()) throw EmptyInputError("no training samples");
  const auto started = std::chrono::steady_clock::now();

  nn::ParamStore& params = model.params();
  std::unordered_map<const nn::Param*, std::size_t> slot;
  for (std::size_t i = 0; i < params.size(); ++i) slot[&params[i]] = i;

  nn::Adam adam(params, cfg.adam);
  TrainRun run;
  run.seed = seed;
  std::mt19937_64 order_rng(seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  const std::size_t workers = std::max<std::size_t>(1, opts.threads);

  auto process = [&](std::size_t epoch, std::size_t sample_idx, double scale) {
    nn::Graph g(true, mix_seed(seed, epoch, sample_idx));
    const nn::Var loss = model.sample_loss(g, samples[sample_idx], store);
    const nn::Var scaled = nn::scale(g, loss, scale);
    g.backward(scaled);
    SampleResult r;
    r.loss = g.value(loss)[0];
    r.grads.resize(params.size());
    for (auto [param, grad] : g.param_grads()) r.grads[slot.at(param)] = *grad;
    return r;
  };

  std::size_t batch_index = 0;
  if (!opts.checkpoint_dir.empty()) std::filesystem::create_directories(opts.checkpoint_dir);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      std::vector<SampleResult> results(stop - start);

      if (workers == 1) {
        for (std::size_t i = start; i < stop; ++i) results[i - start] = process(epoch, order[i], scale);
      } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; ++w) {
          pool.emplace_back([&, w] {
            try {
              for (std::size_t i = start + w; i < stop; i += workers)
                results[i - start] = process(epoch, order[i], scale);
            } catch (...) {
              errors[w] = std::current_exception();
            }
          });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
          if (e) std::rethrow_exception(e);
      }

      params.zero_grad();
      for (const auto& r : results) {
        if (!std::isfinite(r.loss)) {
          throw NumericError("non-finite loss in batch " + std::to_string(batch_index));
        }
        epoch_loss += r.loss;
        for (std::size_t p = 0; p < r.grads.size(); ++p) {
          if (r.grads[p].size() == 0) continue;
          nn::Param& param = params[p];
          for (std::size_t j = param.frozen_rows * param.value.cols(); j < param.grad.size(); ++j)
            param.grad[j] += r.grads[p][j];
        }
      }
      adam.step();
    }
    run.epoch_losses.push_back(epoch_loss / static_cast<double>(samples.size()));
    if (!opts.checkpoint_dir.empty()) {
      auto path = opts.checkpoint_dir / ("epoch_" + std::to_string(epoch) + ".nrck");
      nn::save_checkpoint(path, params);
      run.checkpoints.push_back(path);
    }
  }
  params.zero_grad();
  if (!opts.checkpoint_dir.empty()) {
    run.final_checkpoint = opts.checkpoint_dir / "final.nrck";
    nn::save_checkpoint(run.final_checkpoint, params);
  }
  run.steps = adam.steps();
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return run;
}

}  // namespace dwellrec::train
