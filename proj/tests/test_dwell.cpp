#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dwellrec/dwell.hpp"
#include "dwellrec/errors.hpp"

using namespace dwellrec;
using dwell::DwellScheme;
using dwell::RawDwell;

namespace {

// Piecewise map written straight from its definition.
int literal_oracle(std::optional<double> t) {
  if (!t) return 1;
  const double s = *t;
  if (s == 0.0) return 2;
  if (s < 5.0) return 3;
  if (s < 60.0) return static_cast<int>(std::floor(s / 5.0)) + 3;
  if (s < 600.0) return static_cast<int>(std::floor(s / 60.0)) + 5;
  return 9;
}

}  // namespace

TEST_CASE("literal discretization on the probe set") {
  CHECK(dwell::discretize(RawDwell::unknown()).id == 1);
  const std::pair<double, int> probes[] = {{0, 2},    {3, 3},    {5, 4},   {7, 4},
                                           {59, 14},  {60, 6},   {120, 7}, {599, 14},
                                           {600, 9},  {10000, 9}};
  for (auto [t, want] : probes) {
    CAPTURE(t);
    CHECK(dwell::discretize_seconds(t).id == want);
  }
}

TEST_CASE("literal scheme collides across branches") {
  CHECK(dwell::discretize_seconds(59).id == dwell::discretize_seconds(540).id);
  CHECK(dwell::discretize_seconds(600).id == dwell::discretize_seconds(240).id);
}

TEST_CASE("literal discretization matches the piecewise oracle on random inputs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1200.0);
  std::bernoulli_distribution whole(0.5);
  for (int i = 0; i < 2000; ++i) {
    double t = u(rng);
    if (whole(rng)) t = std::floor(t);
    CAPTURE(t);
    CHECK(dwell::discretize_seconds(t).id == literal_oracle(t));
  }
}

TEST_CASE("monotonic scheme is order preserving over known dwell") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  for (int i = 0; i < 500; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    CAPTURE(a);
    CAPTURE(b);
    CHECK(dwell::discretize_seconds(a, DwellScheme::kMonotonic).id <=
          dwell::discretize_seconds(b, DwellScheme::kMonotonic).id);
  }
  CHECK(dwell::discretize_seconds(59, DwellScheme::kMonotonic).id == 14);
  CHECK(dwell::discretize_seconds(60, DwellScheme::kMonotonic).id == 16);
  CHECK(dwell::discretize_seconds(599, DwellScheme::kMonotonic).id == 24);
  CHECK(dwell::discretize_seconds(600, DwellScheme::kMonotonic).id == 25);
}

TEST_CASE("buckets stay inside the vocabulary and never hit padding") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 5000.0);
  for (auto scheme : {DwellScheme::kLiteral, DwellScheme::kMonotonic}) {
    for (int i = 0; i < 300; ++i) {
      const auto b = dwell::discretize_seconds(u(rng), scheme);
      CHECK(b.id >= 2);
      CHECK(b.id < dwell::vocab_size(scheme));
    }
  }
  CHECK(dwell::vocab_size(DwellScheme::kLiteral) == 15);
  CHECK(dwell::vocab_size(DwellScheme::kMonotonic) == 26);
}

TEST_CASE("invalid raw dwell is rejected") {
  CHECK_THROWS_AS(RawDwell::seconds(-1.0), InvalidInputError);
  CHECK_THROWS_AS(RawDwell::seconds(std::numeric_limits<double>::quiet_NaN()), InvalidInputError);
  CHECK_THROWS_AS(dwell::discretize_seconds(std::numeric_limits<double>::infinity()),
                  InvalidInputError);
  CHECK_THROWS_AS(dwell::parse_scheme("log"), ConfigError);
}

TEST_CASE("mask_bucket keeps padding and hides everything else") {
  CHECK(dwell::mask_bucket({0}).id == 0);
  for (std::uint8_t id = 1; id < 26; ++id) CHECK(dwell::mask_bucket({id}).id == 1);
}

TEST_CASE("dwell_stats counts and fractions") {
  const std::vector<RawDwell> recs = {RawDwell::unknown(), RawDwell::seconds(0),
                                      RawDwell::seconds(3),  RawDwell::seconds(10),
                                      RawDwell::seconds(45), RawDwell::seconds(700)};
  const auto d = dwell::dwell_stats(recs);
  CHECK(d.total == 6);
  CHECK(d.counts[1] == 1);
  CHECK(d.counts[2] == 1);
  CHECK(d.counts[3] == 1);
  CHECK(d.counts[5] == 1);
  CHECK(d.counts[12] == 1);
  CHECK(d.counts[9] == 1);
  CHECK(d.unknown_fraction == doctest::Approx(1.0 / 6));
  CHECK(d.over_5s_fraction == doctest::Approx(3.0 / 5));
  double sum = 0.0;
  for (double f : d.fractions) sum += f;
  CHECK(sum == doctest::Approx(1.0));
  double bars = 0.0;
  for (auto [start, share] : d.bar_30s) bars += share;
  CHECK(bars == doctest::Approx(1.0 - d.unknown_fraction));
}

TEST_CASE("dwell_stats edge cases") {
  CHECK_THROWS_AS(dwell::dwell_stats(std::vector<RawDwell>{}), EmptyInputError);
  const std::vector<RawDwell> unknown(4);
  const auto d = dwell::dwell_stats(unknown);
  CHECK(d.unknown_fraction == 1.0);
  CHECK_FALSE(d.over_5s_defined);
  const std::vector<RawDwell> five = {RawDwell::seconds(5)};
  CHECK(dwell::dwell_stats(five).over_5s_fraction == 0.0);
}

TEST_CASE("dwell CSV layout") {
  const std::vector<RawDwell> recs = {RawDwell::seconds(0), RawDwell::seconds(0)};
  const std::string csv = dwell::to_csv(dwell::dwell_stats(recs));
  CHECK(csv.rfind("bucket,count,fraction\n0,0,0\n1,0,0\n2,2,1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 16);
}
