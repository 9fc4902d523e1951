// Dwell-time discretization and distribution analytics.
//
// Raw dwell is either Unknown (telemetry arrived late or never) or a
// non-negative number of seconds. Discretization maps it onto a small
// bucket vocabulary that feeds the dwell embedding table:
//
//   Unknown      -> 1
//   t == 0       -> 2
//   t in (0, 5)  -> 3
//   t in [5, 60) -> floor(t / 5) + 3
//   t in [60,600)-> floor(t / 60) + 5
//   t >= 600     -> 9
//
// The literal scheme above reuses ids across branches (59 s and 540 s both
// land in 14, 600 s and 240 s both land in 9). DwellScheme::kMonotonic keeps
// the first four branches and renumbers the rest to floor(t / 60) + 15 and 25.
// Bucket 0 is reserved for sequence padding and never produced here.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dwellrec::dwell {

class RawDwell {
 public:
  RawDwell() = default;  // Unknown

  static RawDwell unknown() { return RawDwell{}; }
  // Throws InvalidInputError for negative or non-finite seconds.
  static RawDwell seconds(double s);

  bool known() const { return seconds_.has_value(); }
  // Precondition: known().
  double value() const { return *seconds_; }
  const std::optional<double>& optional() const { return seconds_; }

  bool operator==(const RawDwell&) const = default;

 private:
  std::optional<double> seconds_;
};

struct DwellBucket {
  std::uint8_t id = 0;

  static constexpr std::uint8_t kPadding = 0;
  static constexpr std::uint8_t kUnknown = 1;

  bool is_padding() const { return id == kPadding; }
  auto operator<=>(const DwellBucket&) const = default;
};

enum class DwellScheme { kLiteral, kMonotonic };

std::string_view to_string(DwellScheme scheme);
// Accepts "literal" / "monotonic"; throws ConfigError otherwise.
DwellScheme parse_scheme(std::string_view name);

// Number of embedding rows needed for a scheme, padding row included.
std::size_t vocab_size(DwellScheme scheme);

DwellBucket discretize(const RawDwell& raw, DwellScheme scheme = DwellScheme::kLiteral);
// Raw-seconds overload; negative or non-finite input throws InvalidInputError.
DwellBucket discretize_seconds(double seconds, DwellScheme scheme = DwellScheme::kLiteral);

// Maps every non-padding bucket to Unknown; padding stays padding.
DwellBucket mask_bucket(DwellBucket b);

struct DwellDistribution {
  DwellScheme scheme = DwellScheme::kLiteral;
  std::size_t total = 0;
  std::vector<std::size_t> counts;  // indexed by bucket id
  std::vector<double> fractions;    // counts / total
  double unknown_fraction = 0.0;
  // Share of known dwells strictly above 5 s. Reported as 0 with
  // over_5s_defined == false when every record is Unknown.
  double over_5s_fraction = 0.0;
  bool over_5s_defined = true;
  // (interval start in seconds, share of all records) at 30 s widths;
  // Unknown records fall in no bar, so the shares sum to 1 - unknown_fraction.
  std::vector<std::pair<double, double>> bar_30s;
};

// Throws EmptyInputError on an empty sequence.
DwellDistribution dwell_stats(std::span<const RawDwell> records,
                              DwellScheme scheme = DwellScheme::kLiteral);

// CSV with header `bucket,count,fraction`, one row per bucket id.
std::string to_csv(const DwellDistribution& dist);

}  // namespace dwellrec::dwell
