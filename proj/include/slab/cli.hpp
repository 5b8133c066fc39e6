#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace slab::cli {

inline const std::vector<std::string>& kinds() {
  static const std::vector<std::string> k = {"geometry-audit", "egorov",      "commutator", "smoothing",
                                             "lap",            "restriction", "duality",    "hl-oracle"};
  return k;
}

/// A validated experiment description. `doc` keeps every key after defaults
/// are filled in, so the manifest hash covers the effective configuration.
struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 1;
  std::string out = "out";
  nlohmann::json doc;
};

/// Throws Error(ConfigInvalid) naming the offending key on unknown keys,
/// wrong types or invalid values.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& kind);
ExperimentConfig load_config(const std::string& path, const std::string& kind,
                             const std::vector<std::string>& overrides);

/// Applies "a.b=value" to doc; value is read as JSON, falling back to a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// 64-bit FNV-1a of the bytes of s.
std::uint64_t fnv1a(const std::string& s);

struct RunOutcome {
  /// 0 when every verdict matches, 2 otherwise.
  int exit_code = 0;
  std::vector<std::string> artifacts;
  std::vector<std::string> summary;
};

/// Runs the experiment, writing CSVs, summary.txt and manifest.json into cfg.out.
RunOutcome run(const ExperimentConfig& cfg);

/// Full command-line entry: parses flags, runs, maps errors to exit code 1.
int main_entry(int argc, char** argv);

}  // namespace slab::cli
