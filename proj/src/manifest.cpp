#include "manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace qha::cli {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
  nlohmann::json j;
  j["kind"] = manifest.kind;
  j["version"] = manifest.version;
  j["seed"] = manifest.seed;
  j["config"] = manifest.config_echo;
  j["started_utc"] = manifest.started_utc;
  j["finished_utc"] = manifest.finished_utc;
  j["outputs"] = manifest.outputs;
  j["status"] = manifest.ok ? "ok" : "failed";
  nlohmann::json asserts = nlohmann::json::array();
  for (const auto& a : manifest.assertions)
    asserts.push_back({{"name", a.name},
                       {"value", a.value},
                       {"threshold", a.threshold},
                       {"pass", a.passed}});
  j["assertions"] = asserts;

  // every listed output must exist before the manifest is written
  for (const auto& name : manifest.outputs)
    if (!std::filesystem::exists(dir / name))
      throw std::runtime_error("write_manifest: listed output missing: " + name);

  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("write_manifest: cannot write in " + dir.string());
  out << j.dump(2) << '\n';
}

}  // namespace qha::cli
