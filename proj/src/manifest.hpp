#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qha::cli {

struct Assertion {
  std::string name;
  double value = 0;
  double threshold = 0;
  bool passed = false;
};

// Run record written as one JSON document, always last, so the listed
// outputs are on disk by the time the manifest exists.
struct RunManifest {
  std::string kind;
  std::string version;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config_echo;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> outputs;
  std::vector<Assertion> assertions;
  bool ok = true;

  void add_assertion(const std::string& name, double value, double threshold, bool passed) {
    assertions.push_back({name, value, threshold, passed});
    ok = ok && passed;
  }
};

std::string utc_timestamp();

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

}  // namespace qha::cli
