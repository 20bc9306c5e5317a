#pragma once

#include "congruence_kit/congruence.hpp"
#include "congruence_kit/report.hpp"
#include "congruence_kit/scenarios.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ck {

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Every gate used by the commands, with its default.
const std::map<std::string, double>& default_tolerances();

struct RunConfig {
  std::string command;
  std::string scenario = "sphere-gauss";
  ScenarioParams params;
  std::optional<int> n, k, m, p;  // expected dims, checked against the scenario
  double fd_step = 1e-5;
  DerivMode mode = DerivMode::Analytic;
  std::map<std::string, double> tol = default_tolerances();
  std::string output_dir = ".";

  // curves
  double a0 = 0.4, b0 = 0.2, a1 = 0.1, b1 = 0.7;
  int nodes = 401;
  // reconstruct
  std::vector<double> constants;
  // spaceform
  int t_sweep = 64;
  double theta0 = 0.0;
  // gaussbonnet
  int cells = 128;

  nlohmann::json to_json() const;
};

const std::vector<std::string>& command_names();

// Reads a TOML or JSON file (JSON when the first non-blank character is '{').
nlohmann::json read_config_file(const std::string& path);
// Applies a config tree onto the defaults; unknown keys are errors.
void apply_config(RunConfig& cfg, const nlohmann::json& tree);
// Range and consistency checks against the scenario; throws ConfigError.
Scenario validate(const RunConfig& cfg);

RunReport cmd_check(const RunConfig& cfg);
RunReport cmd_reconstruct(const RunConfig& cfg);
RunReport cmd_curves(const RunConfig& cfg);
RunReport cmd_spaceform(const RunConfig& cfg);
RunReport cmd_gaussbonnet(const RunConfig& cfg);

// Dispatch on cfg.command, write report.json into the output directory and
// return the exit code (0 pass, 1 failed check, 2 configuration error).
int run_command(const RunConfig& cfg, RunReport* out = nullptr);

}  // namespace ck
