#include "dwellrec/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "dwellrec/errors.hpp"

namespace dwellrec {

void RunManifest::add_input(const std::filesystem::path& p) {
  inputs.emplace_back(p.string(), file_digest(p));
}

std::string file_digest(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw InvalidInputError("cannot open " + p.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (is) {
    is.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + hex;
}

nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["version"] = m.version;
  j["seed"] = m.seed ? nlohmann::ordered_json(*m.seed) : nlohmann::ordered_json(nullptr);
  j["config"] = m.config;
  auto& in = j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& [path, digest] : m.inputs) in.push_back({{"path", path}, {"digest", digest}});
  j["outputs"] = m.outputs;
  j["started_at"] = m.started_at;
  j["wall_seconds"] = m.wall_seconds;
  return j;
}

void write_manifest(const std::filesystem::path& p, const RunManifest& m) {
  std::ofstream os(p, std::ios::trunc);
  if (!os) throw InvalidInputError("cannot write manifest " + p.string());
  os << to_json(m).dump(2) << '\n';
}

std::string utc_now_iso8601() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace dwellrec
