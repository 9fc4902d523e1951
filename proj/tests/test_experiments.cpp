#include <doctest.h>

#include "dwellrec/errors.hpp"
#include "dwellrec/experiments.hpp"
#include "support.hpp"

using namespace dwellrec;

TEST_CASE("threshold grid includes both ends") {
  CHECK(eval::threshold_grid(5, 40, 5) == std::vector<double>{5, 10, 15, 20, 25, 30, 35, 40});
  CHECK(eval::threshold_grid(0.1, 0.3, 0.1).size() == 3);
  CHECK(eval::threshold_grid(5, 5, 1) == std::vector<double>{5});
  CHECK_THROWS_AS(eval::threshold_grid(0, 10, 5), ConfigError);
  CHECK_THROWS_AS(eval::threshold_grid(10, 5, 5), ConfigError);
  CHECK_THROWS_AS(eval::threshold_grid(5, 10, 0), ConfigError);
}

TEST_CASE("sweep covers every model and threshold and matches direct evaluation") {
  const auto w = testsupport::small_world(11);
  enc::Model a(testsupport::tiny_config(enc::Variant::kBaseMha), 1);
  enc::Model b(testsupport::tiny_config(enc::Variant::kDweW), 2);
  enc::Model c(testsupport::tiny_config(enc::Variant::kDweA), 3);
  const auto grid = eval::threshold_grid(5, 40, 5);
  const auto rows = eval::run_sweep({{"BaseMHA", &a}, {"DweW", &b}, {"DweA", &c}}, w.store,
                                    w.corpus.test, grid);
  REQUIRE(rows.size() == 24);
  CHECK(rows[0].variant == "BaseMHA");
  CHECK(rows[8].variant == "DweW");
  CHECK(rows[9].theta == 10.0);

  const auto direct =
      eval::evaluate(c, w.store, datagen::build_eval_set(w.corpus.test, datagen::EvalMode::kReal, 5));
  REQUIRE(rows[16].report);
  CHECK(eval::to_json(*rows[16].report) == eval::to_json(direct));

  const std::string csv = eval::sweep_csv(rows);
  CHECK(csv.rfind("variant,theta,auc,mrr,ndcg5,ndcg10\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 25);
}

TEST_CASE("thresholds beyond every dwell produce empty rows") {
  const auto w = testsupport::small_world(12);
  enc::Model m(testsupport::tiny_config(enc::Variant::kDweA), 1);
  const auto rows = eval::run_sweep({{"DweA", &m}}, w.store, w.corpus.test, {5.0, 1000.0});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].report.has_value());
  CHECK_FALSE(rows[1].report.has_value());
  CHECK(eval::sweep_csv(rows).find("DweA,1000,,,,\n") != std::string::npos);
}
