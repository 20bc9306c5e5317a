#include "congruence_kit/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

// Flags are collected into a tree with the config file layout, so that the
// same key checks apply to both.
template <class T>
void put(nlohmann::json& tree, const std::string& section, const std::string& key, const std::optional<T>& v) {
  if (!v) return;
  if (section.empty())
    tree[key] = *v;
  else
    tree[section][key] = *v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"congruence-kit: affine plane congruences, integrability and reconstruction"};
  std::string command, config_path;
  std::optional<std::string> scenario, output_dir, derivatives;
  std::optional<unsigned> seed;
  std::optional<double> amplitude, plane_amplitude, fd_step, a0, b0, a1, b1, theta0, lambda_c, lambda_a;
  std::optional<int> p, nodes, t_sweep, cells;
  std::vector<int> res;
  std::vector<double> constants;
  std::vector<std::string> tols;

  std::string names;
  for (const auto& c : ck::command_names()) names += (names.empty() ? "" : "|") + c;
  app.add_option("command", command, "one of " + names)->required();
  app.add_option("--config", config_path, "TOML or JSON config file");
  app.add_option("--scenario", scenario, "scenario key");
  app.add_option("--seed", seed, "random-fourier seed");
  app.add_option("--amplitude", amplitude, "random-fourier foot amplitude");
  app.add_option("--plane-amplitude", plane_amplitude, "random-fourier plane amplitude");
  app.add_option("--p", p, "signature index p (s3-hypersurface variant)");
  app.add_option("--res", res, "grid resolution per axis");
  app.add_option("--fd-step", fd_step, "finite difference step");
  app.add_option("--derivatives", derivatives, "analytic or fd");
  app.add_option("--output-dir", output_dir, "directory for report.json and CSV files");
  app.add_option("--a0", a0, "curves: A(0) of the first solution");
  app.add_option("--b0", b0, "curves: B(0) of the first solution");
  app.add_option("--a1", a1, "curves: A(0) of the second solution");
  app.add_option("--b1", b1, "curves: B(0) of the second solution");
  app.add_option("--nodes", nodes, "curves: arclength nodes");
  app.add_option("--lambda-c", lambda_c, "curves: lambda = c + a sin t, constant part");
  app.add_option("--lambda-a", lambda_a, "curves: lambda = c + a sin t, amplitude");
  app.add_option("--constants", constants, "reconstruct: family constants");
  app.add_option("--t-sweep", t_sweep, "spaceform: samples of the parallel family");
  app.add_option("--theta0", theta0, "spaceform: initial angle");
  app.add_option("--cells", cells, "gaussbonnet: quadrature cells per axis and chart");
  app.add_option("--tol", tols, "tolerance override name=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  ck::RunConfig cfg;
  cfg.command = command;
  try {
    if (!config_path.empty()) ck::apply_config(cfg, ck::read_config_file(config_path));
    nlohmann::json over = nlohmann::json::object();
    put(over, "", "scenario", scenario);
    put(over, "", "output_dir", output_dir);
    put(over, "", "fd_step", fd_step);
    put(over, "", "derivatives", derivatives);
    put(over, "dims", "p", p);
    put(over, "random_fourier", "seed", seed);
    put(over, "random_fourier", "amplitude", amplitude);
    put(over, "random_fourier", "plane_amplitude", plane_amplitude);
    put(over, "curve", "a0", a0);
    put(over, "curve", "b0", b0);
    put(over, "curve", "a1", a1);
    put(over, "curve", "b1", b1);
    put(over, "curve", "nodes", nodes);
    put(over, "curve", "lambda_c", lambda_c);
    put(over, "curve", "lambda_a", lambda_a);
    put(over, "spaceform", "t_sweep", t_sweep);
    put(over, "spaceform", "theta0", theta0);
    put(over, "gaussbonnet", "cells", cells);
    if (!res.empty()) over["grid"]["res"] = res;
    if (!constants.empty()) over["reconstruct"]["constants"] = constants;
    for (const std::string& t : tols) {
      auto eq = t.find('=');
      if (eq == std::string::npos) throw ck::ConfigError("--tol expects name=value, got '" + t + "'");
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(t.substr(eq + 1), &used);
        if (used != t.size() - eq - 1) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw ck::ConfigError("--tol " + t + ": value is not a number");
      }
      over["tolerances"][t.substr(0, eq)] = v;
    }
    ck::apply_config(cfg, over);
  } catch (const ck::ConfigError& e) {
    std::cerr << "congruence-kit: configuration error: " << e.what() << "\n";
    return 2;
  }
  return ck::run_command(cfg);
}
