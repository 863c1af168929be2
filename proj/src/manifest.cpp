#include "herdtrack/manifest.hpp"

#include <chrono>
#include <ctime>

#include "herdtrack/error.hpp"
#include "herdtrack/image_io.hpp"

namespace herdtrack {

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["tool_version"] = tool_version;
  j["argv"] = argv;
  j["config"] = config;
  j["seeds"] = seeds;
  j["inputs"] = inputs;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.argv = j.at("argv").get<std::vector<std::string>>();
  m.config = nlohmann::ordered_json::parse(j.at("config").dump());
  m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
  m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  return m;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
  std::filesystem::create_directories(dir);
  const auto text = manifest.to_json().dump(2) + "\n";
  io::write_file(dir / "manifest.json", std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

RunManifest read_manifest(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  try {
    return RunManifest::from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, path.string() + ": " + e.what());
  }
}

}  // namespace herdtrack
