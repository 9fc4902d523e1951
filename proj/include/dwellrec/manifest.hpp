// Run manifests: what a command read, wrote and was configured with, enough
// to rerun it.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace dwellrec {

inline constexpr const char* kVersion = "0.1.0";

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::ordered_json config;  // null when the command takes no config
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
  std::vector<std::string> outputs;
  std::string started_at;  // UTC, ISO 8601
  double wall_seconds = 0.0;
  std::string version = kVersion;

  void add_input(const std::filesystem::path& p);
  void add_output(const std::filesystem::path& p) { outputs.push_back(p.string()); }
};

// "fnv1a64:<16 hex digits>" over the file bytes.
std::string file_digest(const std::filesystem::path& p);

nlohmann::ordered_json to_json(const RunManifest& m);
void write_manifest(const std::filesystem::path& p, const RunManifest& m);

std::string utc_now_iso8601();

}  // namespace dwellrec
