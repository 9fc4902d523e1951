// Mini-batch training of a user encoder with Adam and the sampled softmax
// loss.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "dwellrec/datagen.hpp"
#include "dwellrec/encoders.hpp"
#include "dwellrec/newsrep.hpp"
#include "dwellrec/nn/adam.hpp"

namespace dwellrec::train {

struct TrainingConfig {
  nn::AdamConfig adam;
  std::size_t batch_size = 32;
  std::size_t epochs = 3;

  void validate() const;
};

struct TrainRun {
  std::uint64_t seed = 0;
  std::vector<double> epoch_losses;  // mean sample loss per epoch
  std::vector<std::filesystem::path> checkpoints;
  std::filesystem::path final_checkpoint;
  double wall_seconds = 0.0;
  std::size_t steps = 0;
};

struct TrainOptions {
  // When set, epoch_<n>.nrck and final.nrck are written here.
  std::filesystem::path checkpoint_dir;
  // Batch members are spread over this many workers; gradients are reduced
  // in sample order, so results do not depend on the worker count.
  std::size_t threads = 1;
};

// Trains `model` in place. Sample order and dropout masks derive from
// `seed` alone. A non-finite loss throws NumericError naming the batch.
TrainRun run_training(enc::Model& model, const std::vector<datagen::TrainSample>& samples,
                      const newsrep::EmbeddingStore& store, const TrainingConfig& cfg,
                      std::uint64_t seed, const TrainOptions& opts = {});

}  // namespace dwellrec::train
