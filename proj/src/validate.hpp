#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qha::cli {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0;      // measured quantity for the headline bound
  double threshold = 0;  // headline bound after any scaling
  std::string detail;    // all sub-bounds, human readable
  double seconds = 0;
};

struct ValidationOptions {
  std::string level = "full";  // quick | full
  std::vector<std::string> only;  // run the named checks only (empty: all)
  // test hook: scales the thresholds of the named check
  std::map<std::string, double> tolerance_scale;
  std::filesystem::path work_dir;  // scratch space for file-based checks
  std::uint64_t seed = 20240915;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  double total_seconds = 0;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

// Runs the cross-representation validation checks at the requested level and
// returns one result per check. Never throws for a failing bound; hard
// errors (missing scratch space and the like) do propagate.
ValidationReport validate_all(const ValidationOptions& options);

}  // namespace qha::cli
