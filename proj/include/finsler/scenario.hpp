#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace finsler {

/// One named check in a report. Hypothesis verdicts gate the others: when one
/// fails the scenario is uncertified rather than failed.
struct Verdict {
  std::string name;
  bool passed = false;
  bool hypothesis = false;
  /// Measured quantity, the tolerance applied to it and the signed distance
  /// to the threshold (>= 0 means pass).
  double value = 0.0;
  double tolerance = 0.0;
  double margin = 0.0;
  std::string note;
};

/// Exit codes of the runner.
enum class ScenarioStatus : int { Pass = 0, Error = 1, Fail = 2, Uncertified = 3 };

const char* to_string(ScenarioStatus s);

struct ScenarioFile {
  /// Output name relative to the output directory.
  std::string name;
  std::string contents;
};

struct ScenarioResult {
  std::string name;
  std::string verifier;
  std::uint64_t seed = 0;
  std::vector<Verdict> verdicts;
  ScenarioStatus status = ScenarioStatus::Pass;
  /// Complete report, including every verdict with its tolerance.
  nlohmann::json report;
  std::vector<ScenarioFile> files;
};

struct RunOptions {
  /// Overrides the seed in the config.
  std::optional<std::uint64_t> seed;
  bool parallel = true;
};

/// Verifier names understood by run_scenario.
const std::vector<std::string>& verifier_names();

/// Parses a scenario file. Throws ConfigurationError naming the offending
/// field for malformed JSON or schema violations.
nlohmann::json load_scenario(const std::filesystem::path& path);

/// Validates and runs one scenario. Schema violations throw
/// ConfigurationError; numerical failures propagate as engine errors.
ScenarioResult run_scenario(const nlohmann::json& config, const RunOptions& opts = {});

/// Writes "<name>.report.json" and the CSV side files into dir.
void write_scenario_outputs(const ScenarioResult& r, const std::filesystem::path& dir);

/// Bundled scenario files (sorted by name) in dir.
std::vector<std::filesystem::path> list_scenarios(const std::filesystem::path& dir);

}  // namespace finsler
