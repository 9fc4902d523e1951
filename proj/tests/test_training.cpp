#include <doctest.h>

#include "dwellrec/errors.hpp"
#include "dwellrec/training.hpp"
#include "support.hpp"

using namespace dwellrec;

namespace {

train::TrainingConfig quick(std::size_t epochs = 1) {
  train::TrainingConfig c;
  c.adam.lr = 5e-3;
  c.batch_size = 8;
  c.epochs = epochs;
  return c;
}

}  // namespace

TEST_CASE("zero learning rate leaves parameters unchanged") {
  const auto w = testsupport::small_world(1, 20);
  const auto samples = datagen::build_train_samples(w.corpus.train, 2, 1).samples;
  enc::Model m(testsupport::tiny_config(enc::Variant::kDweW), 1);
  enc::Model ref(testsupport::tiny_config(enc::Variant::kDweW), 1);
  auto cfg = quick();
  cfg.adam.lr = 0.0;
  const auto run = train::run_training(m, samples, w.store, cfg, 1);
  CHECK(run.steps == (samples.size() + 7) / 8);
  for (std::size_t i = 0; i < m.params().size(); ++i)
    CHECK(m.params()[i].value == ref.params()[i].value);
}

TEST_CASE("training loss goes down") {
  const auto w = testsupport::small_world(2, 80);
  const auto samples = datagen::build_train_samples(w.corpus.train, 2, 2).samples;
  enc::Model m(testsupport::tiny_config(enc::Variant::kBaseMha), 2);
  const auto run = train::run_training(m, samples, w.store, quick(4), 2);
  REQUIRE(run.epoch_losses.size() == 4);
  CHECK(run.epoch_losses.back() < run.epoch_losses.front());
}

TEST_CASE("same seed gives byte-identical checkpoints for any worker count") {
  const auto w = testsupport::small_world(3, 20);
  const auto samples = datagen::build_train_samples(w.corpus.train, 2, 3).samples;
  testsupport::TempDir a, b, c;
  auto run_into = [&](const testsupport::TempDir& dir, std::size_t threads, std::uint64_t seed) {
    enc::Model m(testsupport::tiny_config(enc::Variant::kDweA), seed);
    train::TrainOptions opts;
    opts.checkpoint_dir = dir.path();
    opts.threads = threads;
    return train::run_training(m, samples, w.store, quick(2), seed, opts);
  };
  const auto ra = run_into(a, 1, 7);
  const auto rb = run_into(b, 3, 7);
  const auto rc = run_into(c, 1, 8);
  CHECK(ra.epoch_losses == rb.epoch_losses);
  REQUIRE(ra.checkpoints.size() == 2);
  CHECK(std::filesystem::exists(a / "epoch_1.nrck"));
  CHECK(ra.final_checkpoint == a / "final.nrck");
  CHECK(testsupport::slurp(a / "final.nrck") == testsupport::slurp(b / "final.nrck"));
  CHECK(testsupport::slurp(a / "epoch_1.nrck") == testsupport::slurp(b / "epoch_1.nrck"));
  CHECK(testsupport::slurp(a / "final.nrck") != testsupport::slurp(c / "final.nrck"));
}

TEST_CASE("training config and input errors") {
  auto cfg = quick();
  cfg.batch_size = 0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("batch_size"), ConfigError);
  cfg = quick();
  cfg.adam.beta2 = 1.0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("beta2"), ConfigError);
  const auto w = testsupport::small_world(4, 10);
  enc::Model m(testsupport::tiny_config(enc::Variant::kBaseMha), 1);
  CHECK_THROWS_AS(train::run_training(m, {}, w.store, quick(), 1), EmptyInputError);
}
