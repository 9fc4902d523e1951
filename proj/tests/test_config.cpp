#include <doctest.h>

#include "dwellrec/config.hpp"
#include "dwellrec/errors.hpp"
#include "support.hpp"

using namespace dwellrec;
using nlohmann::json;

TEST_CASE("an empty config file yields the full-size defaults") {
  testsupport::TempDir dir;
  testsupport::spit(dir / "empty.json", "  \n");
  const auto c = app::load_config(dir / "empty.json");
  CHECK(c.encoder.d == 1536);
  CHECK(c.encoder.heads == 10);
  CHECK(c.encoder.head_dim == 20);
  CHECK(c.encoder.max_history == 50);
  CHECK(c.encoder.k_negatives == 4);
  CHECK(c.encoder.dropout == 0.2);
  CHECK(c.training.adam.lr == 1e-3);
  CHECK(c.training.batch_size == 32);
  CHECK(app::to_json(c) == app::to_json(app::defaults(app::Profile::kPaper)));
  testsupport::spit(dir / "obj.json", "{}");
  CHECK(app::to_json(app::load_config(dir / "obj.json")) == app::to_json(c));
}

TEST_CASE("desk profile shrinks the model only") {
  const auto desk = app::defaults(app::Profile::kDesk);
  const auto paper = app::defaults(app::Profile::kPaper);
  CHECK(desk.encoder.d == 64);
  CHECK(desk.encoder.k_negatives == paper.encoder.k_negatives);
  CHECK(desk.training.adam.lr == paper.training.adam.lr);
  CHECK(app::parse_profile("desk") == app::Profile::kDesk);
  CHECK_THROWS_AS(app::parse_profile("laptop"), ConfigError);
}

TEST_CASE("explicit keys override defaults") {
  const auto c = app::parse_config(
      json::parse(R"({"encoder":{"variant":"DweW","d":32,"theta":10},"training":{"lr":0.01}})"),
      app::Profile::kDesk);
  CHECK(c.encoder.variant == enc::Variant::kDweW);
  CHECK(c.encoder.d == 32);
  CHECK(c.encoder.theta == 10.0);
  CHECK(c.encoder.heads == 2);
  CHECK(c.training.adam.lr == 0.01);
  CHECK(c.synth_embed().dim == 32);
}

TEST_CASE("config errors name the offending key") {
  auto fails = [](const char* text, const char* needle) {
    CAPTURE(text);
    CHECK_THROWS_WITH_AS(app::parse_config(json::parse(text)), doctest::Contains(needle),
                         ConfigError);
  };
  fails(R"({"encoder":{"k_negatives":0}})", "k_negatives");
  fails(R"({"encoder":{"hedas":2}})", "encoder.hedas");
  fails(R"({"encodr":{}})", "encodr");
  fails(R"({"encoder":{"d":"big"}})", "encoder.d");
  fails(R"({"encoder":{"d":2.5}})", "encoder.d");
  fails(R"({"training":{"batch_size":-1}})", "training.batch_size");
  fails(R"({"encoder":{"variant":"Transformer"}})", "Transformer");
  fails(R"({"evaluation":{"theta":0}})", "evaluation.theta");
  fails(R"({"generator":{"unknown_rate":1.5}})", "unknown_rate");
  fails(R"({"encoder":[]})", "encoder");
  fails(R"([1,2])", "object");
}

TEST_CASE("malformed config files") {
  testsupport::TempDir dir;
  testsupport::spit(dir / "bad.json", "{\"encoder\": ");
  CHECK_THROWS_AS(app::load_config(dir / "bad.json"), FormatError);
  CHECK_THROWS_AS(app::load_config(dir / "absent.json"), ConfigError);
}

TEST_CASE("saved config round trips") {
  testsupport::TempDir dir;
  auto c = app::defaults(app::Profile::kDesk);
  c.encoder.variant = enc::Variant::kBaseAttPool;
  c.encoder.dwell_scheme = dwell::DwellScheme::kMonotonic;
  c.generator.n_users = 123;
  c.paths.data_dir = "data";
  c.evaluation.set = "robust";
  app::save_config(dir / "c.json", c);
  const auto back = app::load_config(dir / "c.json");
  CHECK(app::to_json(back) == app::to_json(c));
  CHECK(back.encoder.dwell_scheme == dwell::DwellScheme::kMonotonic);
}
