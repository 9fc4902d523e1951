#include "dwellrec/dwell.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "dwellrec/errors.hpp"

namespace dwellrec::dwell {

RawDwell RawDwell::seconds(double s) {
  if (!std::isfinite(s) || s < 0.0) {
    std::ostringstream os;
    os << "dwell seconds must be finite and non-negative, got " << s;
    throw InvalidInputError(os.str());
  }
  RawDwell r;
  r.seconds_ = s;
  return r;
}

std::string_view to_string(DwellScheme scheme) {
  return scheme == DwellScheme::kLiteral ? "literal" : "monotonic";
}

DwellScheme parse_scheme(std::string_view name) {
  if (name == "literal") return DwellScheme::kLiteral;
  if (name == "monotonic") return DwellScheme::kMonotonic;
  throw ConfigError("unknown dwell scheme '" + std::string(name) + "'");
}

std::size_t vocab_size(DwellScheme scheme) {
  return scheme == DwellScheme::kLiteral ? 15 : 26;
}

DwellBucket discretize_seconds(double t, DwellScheme scheme) {
  if (!std::isfinite(t) || t < 0.0) {
    std::ostringstream os;
    os << "cannot discretize dwell " << t << " s";
    throw InvalidInputError(os.str());
  }
  auto bucket = [](double v) { return DwellBucket{static_cast<std::uint8_t>(v)}; };
  if (t == 0.0) return bucket(2);
  if (t < 5.0) return bucket(3);
  if (t < 60.0) return bucket(std::floor(t / 5.0) + 3);
  if (scheme == DwellScheme::kLiteral) {
    if (t < 600.0) return bucket(std::floor(t / 60.0) + 5);
    return bucket(9);
  }
  if (t < 600.0) return bucket(std::floor(t / 60.0) + 15);
  return bucket(25);
}

DwellBucket discretize(const RawDwell& raw, DwellScheme scheme) {
  if (!raw.known()) return DwellBucket{DwellBucket::kUnknown};
  return discretize_seconds(raw.value(), scheme);
}

DwellBucket mask_bucket(DwellBucket b) {
  return b.is_padding() ? b : DwellBucket{DwellBucket::kUnknown};
}

DwellDistribution dwell_stats(std::span<const RawDwell> records, DwellScheme scheme) {
  if (records.empty()) throw EmptyInputError("dwell_stats needs at least one record");

  DwellDistribution dist;
  dist.scheme = scheme;
  dist.total = records.size();
  dist.counts.assign(vocab_size(scheme), 0);

  std::size_t unknown = 0;
  std::size_t over5 = 0;
  std::vector<std::size_t> bars;
  for (const auto& r : records) {
    ++dist.counts[discretize(r, scheme).id];
    if (!r.known()) {
      ++unknown;
      continue;
    }
    if (r.value() > 5.0) ++over5;
    auto bar = static_cast<std::size_t>(std::floor(r.value() / 30.0));
    if (bar >= bars.size()) bars.resize(bar + 1, 0);
    ++bars[bar];
  }

  const double n = static_cast<double>(dist.total);
  dist.fractions.reserve(dist.counts.size());
  for (auto c : dist.counts) dist.fractions.push_back(static_cast<double>(c) / n);
  dist.unknown_fraction = static_cast<double>(unknown) / n;

  const std::size_t known = dist.total - unknown;
  if (known == 0) {
    dist.over_5s_defined = false;
    dist.over_5s_fraction = 0.0;
  } else {
    dist.over_5s_fraction = static_cast<double>(over5) / static_cast<double>(known);
  }
  for (std::size_t i = 0; i < bars.size(); ++i) {
    dist.bar_30s.emplace_back(30.0 * static_cast<double>(i), static_cast<double>(bars[i]) / n);
  }
  return dist;
}

std::string to_csv(const DwellDistribution& dist) {
  std::ostringstream os;
  os << "bucket,count,fraction\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < dist.counts.size(); ++i) {
    os << i << ',' << dist.counts[i] << ',' << dist.fractions[i] << '\n';
  }
  return os.str();
}

}  // namespace dwellrec::dwell
