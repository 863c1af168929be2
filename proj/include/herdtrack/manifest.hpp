#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace herdtrack {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Snapshot written next to every command output so the run can be repeated.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();  ///< effective options
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> inputs;
  std::vector<std::string> argv;
  std::string tool_version{kToolVersion};
  std::string started_at;
  std::string finished_at;

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

/// Current UTC time as ISO-8601 with a trailing Z.
std::string utc_timestamp();

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace herdtrack
