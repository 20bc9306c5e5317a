#include "congruence_kit/cli.hpp"

#include "congruence_kit/curvature4.hpp"
#include "congruence_kit/curves.hpp"
#include "congruence_kit/numerics.hpp"
#include "congruence_kit/reconstruct.hpp"
#include "congruence_kit/spaceform.hpp"

#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace ck {

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t = {
      {"lagrangian_kernel", 1e-6},
      {"symmetry_infeasible_nodes", 0.0},
      {"compatibility", kCompatibilityTol},
      {"support_order", 1.9},
      {"gauss_map_foot", 1e-8},
      {"gauss_map_orthogonality", 1e-3},
      {"family_fit", 1e-5},
      {"equidistance", 1e-6},
      {"curve_rk4", 1e-8},
      {"curve_system", 1e-8},
      {"curve_equidistance", 1e-8},
      {"hyperquadric", 1e-8},
      {"frame", 1e-10},
      {"dmu", 1e-5},
      {"normal_residual", 1e-3},
      {"normal_order", 1.8},
      {"theta_path", 1e-6},
      {"degree_integer", 1e-2},
      {"gauss_bonnet", 1e-3},
      {"pullback", 1e-8},
      {"atlas", kAtlasTol},
      {"rank1_parallel", 1e-3},
      {"rank1_hyperquadric", 1e-8},
  };
  return t;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> n = {"check", "reconstruct", "curves", "spaceform", "gaussbonnet"};
  return n;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario;
  j["output_dir"] = output_dir;
  j["fd_step"] = fd_step;
  j["derivatives"] = mode == DerivMode::Analytic ? "analytic" : "fd";
  nlohmann::json dims = nlohmann::json::object();
  if (n) dims["n"] = *n;
  if (k) dims["k"] = *k;
  if (m) dims["m"] = *m;
  if (p) dims["p"] = *p;
  j["dims"] = dims;
  j["grid"] = {{"res", params.res}};
  j["random_fourier"] = {{"seed", params.seed},
                         {"amplitude", params.amplitude},
                         {"plane_amplitude", params.plane_amplitude}};
  j["curve"] = {{"a0", a0},
                {"b0", b0},
                {"a1", a1},
                {"b1", b1},
                {"nodes", nodes},
                {"lambda_c", params.lambda_c},
                {"lambda_a", params.lambda_a}};
  j["reconstruct"] = {{"constants", constants}};
  j["spaceform"] = {{"t_sweep", t_sweep}, {"theta0", theta0}};
  j["gaussbonnet"] = {{"cells", cells}};
  j["tolerances"] = tol;
  return j;
}

// ---------------------------------------------------------------- parsing

namespace {

nlohmann::json toml_to_json(const toml::node& node) {
  if (const toml::table* t = node.as_table()) {
    nlohmann::json j = nlohmann::json::object();
    for (auto&& [key, value] : *t) j[std::string(key.str())] = toml_to_json(value);
    return j;
  }
  if (const toml::array* a = node.as_array()) {
    nlohmann::json j = nlohmann::json::array();
    for (const toml::node& v : *a) j.push_back(toml_to_json(v));
    return j;
  }
  if (auto v = node.as_integer()) return v->get();
  if (auto v = node.as_floating_point()) return v->get();
  if (auto v = node.as_boolean()) return v->get();
  if (auto v = node.as_string()) return v->get();
  throw ConfigError("unsupported TOML value type (dates and times are not accepted)");
}

template <class T>
T get_as(const nlohmann::json& j, const std::string& where) {
  try {
    if constexpr (std::is_integral_v<T>) {
      if (j.is_number_float()) {
        double d = j.get<double>();
        if (d != std::floor(d)) throw ConfigError(where + ": expected an integer");
        return static_cast<T>(d);
      }
      if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (j.get<long long>() < 0) throw ConfigError(where + ": expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!j.is_number()) throw ConfigError(where + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!j.is_string()) throw ConfigError(where + ": expected a string");
    }
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

const nlohmann::json& table(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a table");
  return j;
}

}  // namespace

nlohmann::json read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  auto first = std::find_if(text.begin(), text.end(), [](char ch) { return !std::isspace(static_cast<unsigned char>(ch)); });
  if (first != text.end() && *first == '{') {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  try {
    toml::table t = toml::parse(text, path);
    return toml_to_json(t);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << path << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    throw ConfigError(msg.str());
  }
}

void apply_config(RunConfig& cfg, const nlohmann::json& tree) {
  table(tree, "config");
  for (auto it = tree.begin(); it != tree.end(); ++it) {
    const std::string& key = it.key();
    const nlohmann::json& v = it.value();
    if (key == "scenario") {
      cfg.scenario = get_as<std::string>(v, key);
    } else if (key == "command") {
      std::string c = get_as<std::string>(v, key);
      if (!cfg.command.empty() && c != cfg.command)
        throw ConfigError("config is for command '" + c + "', invoked as '" + cfg.command + "'");
    } else if (key == "output_dir") {
      cfg.output_dir = get_as<std::string>(v, key);
    } else if (key == "fd_step") {
      cfg.fd_step = get_as<double>(v, key);
    } else if (key == "derivatives") {
      std::string d = get_as<std::string>(v, key);
      if (d == "analytic")
        cfg.mode = DerivMode::Analytic;
      else if (d == "fd")
        cfg.mode = DerivMode::FiniteDifference;
      else
        throw ConfigError("derivatives: expected 'analytic' or 'fd', got '" + d + "'");
    } else if (key == "dims") {
      for (auto d = table(v, key).begin(); d != v.end(); ++d) {
        const std::string w = "dims." + d.key();
        int val = get_as<int>(d.value(), w);
        if (d.key() == "n")
          cfg.n = val;
        else if (d.key() == "k")
          cfg.k = val;
        else if (d.key() == "m")
          cfg.m = val;
        else if (d.key() == "p")
          cfg.p = cfg.params.p = val;
        else
          throw ConfigError("unknown key " + w);
      }
    } else if (key == "grid") {
      for (auto d = table(v, key).begin(); d != v.end(); ++d) {
        if (d.key() != "res") throw ConfigError("unknown key grid." + d.key());
        if (!d.value().is_array()) throw ConfigError("grid.res: expected an array of integers");
        cfg.params.res.clear();
        for (const auto& r : d.value()) cfg.params.res.push_back(get_as<int>(r, "grid.res"));
      }
    } else if (key == "random_fourier") {
      for (auto d = table(v, key).begin(); d != v.end(); ++d) {
        const std::string w = "random_fourier." + d.key();
        if (d.key() == "seed")
          cfg.params.seed = get_as<unsigned>(d.value(), w);
        else if (d.key() == "amplitude")
          cfg.params.amplitude = get_as<double>(d.value(), w);
        else if (d.key() == "plane_amplitude")
          cfg.params.plane_amplitude = get_as<double>(d.value(), w);
        else
          throw ConfigError("unknown key " + w);
      }
    } else if (key == "curve") {
      for (auto d = table(v, key).begin(); d != v.end(); ++d) {
        const std::string w = "curve." + d.key();
        if (d.key() == "a0")
          cfg.a0 = get_as<double>(d.value(), w);
        else if (d.key() == "b0")
          cfg.b0 = get_as<double>(d.value(), w);
        else if (d.key() == "a1")
          cfg.a1 = get_as<double>(d.value(), w);
        else if (d.key() == "b1")
          cfg.b1 = get_as<double>(d.value(), w);
        else if (d.key() == "nodes")
          cfg.nodes = get_as<int>(d.value(), w);
        else if (d.key() == "lambda_c")
          cfg.params.lambda_c = get_as<double>(d.value(), w);
        else if (d.key() == "lambda_a")
          cfg.params.lambda_a = get_as<double>(d.value(), w);
        else
          throw ConfigError("unknown key " + w);
      }
    } else if (key == "reconstruct") {
      for (auto d = table(v, key).begin(); d != v.end(); ++d) {
        if (d.key() != "constants") throw ConfigError("unknown key reconstruct." + d.key());
        if (!d.value().is_array()) throw ConfigError("reconstruct.constants: expected an array of numbers");
        cfg.constants.clear();
        for (const auto& c : d.value()) cfg.constants.push_back(get_as<double>(c, "reconstruct.constants"));
      }
    } else if (key == "spaceform") {
      for (auto d = table(v, key).begin(); d != v.end(); ++d) {
        const std::string w = "spaceform." + d.key();
        if (d.key() == "t_sweep")
          cfg.t_sweep = get_as<int>(d.value(), w);
        else if (d.key() == "theta0")
          cfg.theta0 = get_as<double>(d.value(), w);
        else
          throw ConfigError("unknown key " + w);
      }
    } else if (key == "gaussbonnet") {
      for (auto d = table(v, key).begin(); d != v.end(); ++d) {
        if (d.key() != "cells") throw ConfigError("unknown key gaussbonnet." + d.key());
        cfg.cells = get_as<int>(d.value(), "gaussbonnet.cells");
      }
    } else if (key == "tolerances") {
      for (auto d = table(v, key).begin(); d != v.end(); ++d) {
        if (!default_tolerances().count(d.key())) throw ConfigError("unknown tolerance '" + d.key() + "'");
        double t = get_as<double>(d.value(), "tolerances." + d.key());
        if (!std::isfinite(t) || t < 0.0) throw ConfigError("tolerances." + d.key() + ": expected a finite value >= 0");
        cfg.tol[d.key()] = t;
      }
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

Scenario validate(const RunConfig& cfg) {
  const auto& cmds = command_names();
  if (std::find(cmds.begin(), cmds.end(), cfg.command) == cmds.end())
    throw ConfigError("unknown command '" + cfg.command + "'");
  const auto keys = scenario_keys();
  if (std::find(keys.begin(), keys.end(), cfg.scenario) == keys.end()) {
    std::string list;
    for (const auto& k : keys) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown scenario '" + cfg.scenario + "' (known: " + list + ")");
  }
  if (!(cfg.fd_step >= 1e-8 && cfg.fd_step <= 1e-2)) throw ConfigError("fd_step must lie in [1e-8, 1e-2]");
  for (int r : cfg.params.res)
    if (r < 5) throw ConfigError("grid.res entries must be at least 5");
  if (cfg.nodes < 3) throw ConfigError("curve.nodes must be at least 3");
  if (cfg.t_sweep < 4) throw ConfigError("spaceform.t_sweep must be at least 4");
  if (cfg.cells < 1) throw ConfigError("gaussbonnet.cells must be positive");
  if (!std::isfinite(cfg.params.amplitude) || !std::isfinite(cfg.params.plane_amplitude))
    throw ConfigError("random_fourier amplitudes must be finite");

  const bool curve = is_curve_scenario(cfg.scenario);
  if (cfg.command == "curves" && !curve)
    throw ConfigError("command 'curves' needs a curve scenario, got '" + cfg.scenario + "'");
  if ((cfg.command == "spaceform" || cfg.command == "gaussbonnet") && curve)
    throw ConfigError("command '" + cfg.command + "' does not apply to the curve scenario '" + cfg.scenario + "'");

  Scenario s;
  try {
    s = make_scenario(cfg.scenario, cfg.params);
  } catch (const Error& e) {
    throw ConfigError(std::string("scenario '") + cfg.scenario + "': " + e.what());
  }
  if (!cfg.params.res.empty() && static_cast<int>(cfg.params.res.size()) != s.n)
    throw ConfigError("grid.res has " + std::to_string(cfg.params.res.size()) + " entries, scenario has n = " +
                      std::to_string(s.n));
  auto dim = [&](const std::optional<int>& want, int have, const char* name) {
    if (want && *want != have)
      throw ConfigError(std::string("dims.") + name + " = " + std::to_string(*want) + " but scenario '" +
                        cfg.scenario + "' has " + name + " = " + std::to_string(have));
  };
  dim(cfg.n, s.n, "n");
  dim(cfg.k, s.k(), "k");
  dim(cfg.m, s.m(), "m");
  dim(cfg.p, s.sig.p, "p");
  if (cfg.command == "gaussbonnet" && s.atlas.empty())
    throw ConfigError("command 'gaussbonnet' needs a closed surface; scenario '" + cfg.scenario + "' has no atlas");
  if (cfg.command == "gaussbonnet" && !(s.n == 2 && s.m() == 4 && s.sig.p == 0))
    throw ConfigError("command 'gaussbonnet' needs planes in Euclidean R^4");
  return s;
}

// ---------------------------------------------------------------- commands

namespace {

RunReport start(const RunConfig& cfg, const char* name) {
  RunReport rep;
  rep.command = name;
  rep.config = cfg.to_json();
  return rep;
}

double tol(const RunConfig& cfg, const std::string& name) {
  auto it = cfg.tol.find(name);
  if (it == cfg.tol.end()) throw Error("no tolerance named " + name);
  return it->second;
}

std::string path_in(const RunConfig& cfg, const std::string& file) {
  return (std::filesystem::path(cfg.output_dir) / file).string();
}

void write_csv(RunReport& rep, const RunConfig& cfg, const CsvWriter& w, const std::string& file) {
  w.write(path_in(cfg, file));
  rep.artifacts.push_back(file);
}

std::vector<std::string> indexed(const std::string& prefix, int count) {
  std::vector<std::string> h;
  for (int i = 0; i < count; ++i) h.push_back(prefix + std::to_string(i));
  return h;
}

std::vector<double> values(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void append(std::vector<double>& row, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v[i]);
}

void hyperquadric_metrics(RunReport& rep, const HyperquadricReport& hq) {
  rep.metrics["hyperquadric_contained"] = hq.contained;
  rep.metrics["hyperquadric_max_foot"] = hq.max_foot;
  if (hq.contained) rep.metrics["hyperquadric_beta_residual"] = hq.beta_residual;
}

// O(h^2) gate from the fine and doubled-stencil residuals; rounding-level
// residuals carry no order information.
void order_gate(RunReport& rep, const std::string& name, double fine, double coarse, double threshold) {
  rep.metrics[name + "_fine"] = fine;
  rep.metrics[name + "_coarse"] = coarse;
  if (fine < 1e-9) {
    rep.skip(name + "_order", "residual at rounding level");
    return;
  }
  rep.at_least(name + "_order", observed_order(coarse, fine), threshold);
}

}  // namespace

RunReport cmd_check(const RunConfig& cfg) {
  Scenario s = validate(cfg);
  Congruence c = make_congruence(s, cfg.mode, cfg.fd_step);
  RunReport rep = start(cfg, "check");
  rep.metrics["n"] = c.n();
  rep.metrics["k"] = c.k();
  rep.metrics["m"] = c.m();
  rep.metrics["p"] = c.signature().p;

  hyperquadric_metrics(rep, check_hyperquadric(c, tol(cfg, "hyperquadric")));

  const Box& box = c.domain();
  double pullback = 0.0, kernel = 0.0, complement = 0.0, flatness = 0.0;
  std::size_t worst = 0;
  int infeasible = 0;
  std::map<std::string, int> status_counts;
  for (std::size_t i = 0; i < box.size(); ++i) {
    Vec x = box.point(i);
    LagrangianReport lr = check_lagrangian(c, x);
    if (lr.kernel_part > kernel) {
      kernel = lr.kernel_part;
      worst = i;
    }
    pullback = std::max(pullback, lr.pullback_omega);
    complement = std::max(complement, lr.complement_part);
    flatness = std::max(flatness, lr.normal_flatness);
    SymmetryReport sr = check_symmetry(c, x);
    status_counts[to_string(sr.status)]++;
    if (sr.status == SymmetryStatus::Infeasible) ++infeasible;
  }
  rep.at_most("lagrangian_kernel", kernel, tol(cfg, "lagrangian_kernel"));
  rep.metrics["lagrangian_worst_node"] = values(box.point(worst));
  rep.metrics["pullback_omega"] = pullback;
  rep.metrics["complement_part"] = complement;
  rep.metrics["normal_flatness"] = flatness;
  rep.at_most("symmetry_infeasible_nodes", infeasible, tol(cfg, "symmetry_infeasible_nodes"));
  rep.metrics["symmetry_status"] = status_counts;

  try {
    KernelSplitting ks = kernel_splitting(c);
    rep.flag("kernel_rank_constant", true);
    rep.metrics["r"] = ks.r;
    rep.metrics["stability_residual"] = ks.stability_residual;
  } catch (const RankNotConstant& e) {
    rep.flag("kernel_rank_constant", false);
    rep.metrics["rank_jump_nodes"] = e.nodes.size();
  } catch (const KernelNotStable& e) {
    rep.flag("kernel_rank_constant", true);
    rep.flag("kernel_stable", false);
    rep.metrics["stability_residual"] = e.residual;
  }
  return rep;
}

RunReport cmd_reconstruct(const RunConfig& cfg) {
  Scenario s = validate(cfg);
  Congruence c = make_congruence(s, cfg.mode, cfg.fd_step);
  RunReport rep = start(cfg, "reconstruct");
  const Box& box = c.domain();

  KernelSplitting ks;
  try {
    ks = kernel_splitting(c);
  } catch (const RankNotConstant& e) {
    rep.flag("kernel_rank_constant", false);
    rep.error = e.what();
    return rep;
  } catch (const KernelNotStable& e) {
    rep.flag("kernel_stable", false);
    rep.error = e.what();
    return rep;
  }
  rep.metrics["r"] = ks.r;

  const double ctol = tol(cfg, "compatibility");
  SupportSolution sol;
  try {
    sol = solve_support(c, ks, ctol);
  } catch (const CompatibilityError& e) {
    const CompatibilityReport& cr = e.report;
    rep.at_most("kernel_closedness", cr.kernel_closedness, ctol);
    rep.at_most("gamma_in_image", cr.image_residual, ctol);
    rep.at_most("complement_equation", cr.complement_residual, ctol);
    rep.metrics["refused_at"] = cr.failing();
    rep.error = e.what();
    return rep;
  }
  const CompatibilityReport& cr = sol.compatibility;
  rep.at_most("kernel_closedness", cr.kernel_closedness, ctol);
  rep.at_most("gamma_in_image", cr.image_residual, ctol);
  rep.at_most("complement_equation", cr.complement_residual, ctol);
  rep.metrics["mainsyst_residual"] = cr.mainsyst_residual;
  rep.metrics["branch"] = to_string(sol.branch);
  rep.metrics["holonomy_residual"] = sol.frame.holonomy_residual;
  rep.metrics["lambda_path_residual"] = sol.lambda_path_residual;
  order_gate(rep, "support_residual", support_residual(c, sol.s.values), support_residual_coarse(c, sol.s.values),
             tol(cfg, "support_order"));

  std::vector<double> constants = cfg.constants;
  if (constants.empty()) constants.assign(sol.r, 0.0);
  if (static_cast<int>(constants.size()) != sol.r)
    throw ConfigError("reconstruct.constants has " + std::to_string(constants.size()) + " entries, the family has r = " +
                      std::to_string(sol.r));
  ImmersionField im = assemble_immersion(c, sol, constants);
  rep.flag("immersion_regular", im.singular_nodes.empty() && !im.search_failed);
  rep.metrics["regularized"] = im.regularized;
  rep.metrics["constants_used"] = im.constants;
  rep.metrics["orientation_preserving"] = im.orientation_preserving;

  GaussMapResidual gm = verify_gauss_map(c, im.phi);
  rep.at_most("gauss_map_foot", gm.foot, tol(cfg, "gauss_map_foot"));
  rep.at_most("gauss_map_orthogonality", gm.orthogonality, tol(cfg, "gauss_map_orthogonality"));

  if (s.immersion) {
    std::vector<Vec> ref(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) ref[i] = s.immersion(box.point(i));
    FamilyFit fit = fit_family(sol, im.phi, ref);
    rep.at_most("family_fit", fit.deviation, tol(cfg, "family_fit"));
    rep.metrics["fitted_constants"] = fit.constants;
  } else {
    rep.skip("family_fit", "scenario has no generating immersion");
  }

  if (sol.r > 0) {
    std::vector<double> other = constants;
    for (std::size_t i = 0; i < other.size(); ++i) other[i] += 0.1 * static_cast<double>(i + 1);
    FoliationReport fr = foliation_check(c, sol, {constants, other});
    rep.at_most("equidistance", fr.equidistance_deviation, tol(cfg, "equidistance"));
    rep.metrics["leaf_distance"] = fr.min_distance;
    rep.metrics["leaves_disjoint"] = fr.leaves_disjoint;
  } else {
    rep.skip("equidistance", "unique solution, no family");
  }

  HyperquadricReport hq = check_hyperquadric(c, tol(cfg, "hyperquadric"));
  hyperquadric_metrics(rep, hq);
  if (hq.contained) {
    rep.at_most("hyperquadric", hyperquadric_residual(c.signature(), im.phi), tol(cfg, "rank1_hyperquadric"));
    if (sol.r == 1) {
      Rank1Section rs = rank1_parallel_section(c, ks, {}, tol(cfg, "dmu"));
      rep.at_most("rank1_parallel", rs.parallel_residual, tol(cfg, "rank1_parallel"));
      rep.at_most("rank1_hyperquadric", rs.hyperquadric, tol(cfg, "rank1_hyperquadric"));
      rep.metrics["rank1_dmu"] = rs.dmu_residual;
    }
  } else {
    rep.skip("hyperquadric", "feet do not vanish");
  }

  std::vector<std::string> header = indexed("x", c.n());
  for (const auto& h : indexed("phi", c.m())) header.push_back(h);
  CsvWriter w(header);
  for (std::size_t i = 0; i < box.size(); ++i) {
    std::vector<double> row = values(box.point(i));
    append(row, im.phi[i]);
    w.row(row);
  }
  write_csv(rep, cfg, w, "immersion.csv");
  return rep;
}

RunReport cmd_curves(const RunConfig& cfg) {
  validate(cfg);
  RunReport rep = start(cfg, "curves");
  SphereCurve curve = curve_scenario(cfg.scenario, cfg.params.lambda_c, cfg.params.lambda_a);
  CurveSolution a = solve_curve_closed_form(curve, cfg.a0, cfg.b0, cfg.nodes);
  CurveSolution b = solve_curve_closed_form(curve, cfg.a1, cfg.b1, cfg.nodes);
  rep.at_most("curve_system", std::max(a.system_residual, b.system_residual), tol(cfg, "curve_system"));

  RkCurve rk = solve_curve_rk4(curve, cfg.a0, cfg.b0, a.s);
  double dev = 0.0;
  for (std::size_t i = 0; i < a.s.size(); ++i)
    dev = std::max({dev, std::abs(rk.A[i] - a.A[i]), std::abs(rk.B[i] - a.B[i])});
  rep.at_most("closed_form_vs_rk4", dev, tol(cfg, "curve_rk4"));

  Equidistance eq = equidistance_check(a, b);
  rep.at_most("curve_equidistance", eq.deviation, tol(cfg, "curve_equidistance"));
  rep.metrics["distance"] = eq.distance;
  rep.metrics["alpha_component"] = eq.alpha_component;
  rep.metrics["distance_derivative"] = eq.derivative;

  RegularityReport rr = regularity_scan(a);
  rep.metrics["singular_parameters"] = rr.roots;
  rep.metrics["degenerate"] = rr.degenerate;
  rep.metrics["collinearity_residual"] = rr.collinearity_residual;

  const int dim = static_cast<int>(a.gamma.front().size());
  std::vector<std::string> header = {"s", "A", "B", "theta"};
  for (const auto& h : indexed("gamma", dim)) header.push_back(h);
  for (const auto& h : indexed("gamma_b", dim)) header.push_back(h);
  CsvWriter w(header);
  for (std::size_t i = 0; i < a.s.size(); ++i) {
    std::vector<double> row = {a.s[i], a.A[i], a.B[i], a.theta[i]};
    append(row, a.gamma[i]);
    append(row, b.gamma[i]);
    w.row(row);
  }
  write_csv(rep, cfg, w, "curve_gamma.csv");
  return rep;
}

RunReport cmd_spaceform(const RunConfig& cfg) {
  Scenario s = validate(cfg);
  Congruence c = make_congruence(s, cfg.mode, cfg.fd_step);
  RunReport rep = start(cfg, "spaceform");
  const Box& box = c.domain();

  HyperquadricReport hq = check_hyperquadric(c, tol(cfg, "hyperquadric"));
  hyperquadric_metrics(rep, hq);
  rep.flag("hyperquadric", hq.contained);
  if (!hq.contained) {
    rep.error = "feet do not vanish, the congruence is not centred at the origin";
    return rep;
  }

  if (c.k() == 2) {
    FramedNormalPair pair(c);
    rep.metrics["eps"] = pair.eps();
    rep.at_most("frame_orthonormality", pair.orthonormality_residual(), tol(cfg, "frame"));
    ThetaSolution th = theta_equation(pair, cfg.theta0, tol(cfg, "dmu"));
    rep.at_most("dmu_closedness", th.dmu_residual, tol(cfg, "dmu"));
    if (!th.closed) {
      rep.metrics["dmu_worst_node"] = values(box.point(th.dmu_node));
      rep.error = "d mu does not vanish, no parallel normal field";
      return rep;
    }
    rep.at_most("theta_path", th.path_residual, tol(cfg, "theta_path"));
    rep.at_most("normal_residual", th.normal_residual, tol(cfg, "normal_residual"));
    order_gate(rep, "normal_residual", th.normal_residual, th.normal_residual_coarse, tol(cfg, "normal_order"));

    SingularLeafReport sl = singular_leaf_scan(pair, th, cfg.t_sweep);
    rep.metrics["singular_leaves"] = sl.leaves;
    rep.metrics["immersion"] = sl.immersion;
    if (sl.immersion)
      rep.at_most("singular_leaf_count", sl.max_count, c.n());
    else
      rep.skip("singular_leaf_count", "base member is not an immersion");

    // Sweep samples match the leaf scan's t window.
    const double span = pair.eps() > 0 ? std::numbers::pi : 6.0;
    const double t_lo = pair.eps() > 0 ? 0.0 : -3.0;
    std::vector<std::string> header = {"t"};
    for (const auto& h : indexed("x", c.n())) header.push_back(h);
    for (const auto& h : indexed("phi", c.m())) header.push_back(h);
    CsvWriter fam(header);
    double eq_dev = 0.0;
    for (int j = 0; j < cfg.t_sweep; ++j) {
      double t = t_lo + span * j / cfg.t_sweep;
      std::vector<Vec> phi = parallel_family(pair, th, t);
      double lo = 1e300, hi = -1e300;
      for (std::size_t i = 0; i < box.size(); ++i) {
        Vec d = phi[i] - th.phi[i];
        double q = c.signature().dot(d, d);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
        std::vector<double> row = {t};
        append(row, box.point(i));
        append(row, phi[i]);
        fam.row(row);
      }
      eq_dev = std::max(eq_dev, hi - lo);
    }
    rep.at_most("family_equidistance", eq_dev, tol(cfg, "equidistance"));
    write_csv(rep, cfg, fam, "spaceform_family.csv");
    CsvWriter lv({"leaf", "t"});
    for (std::size_t i = 0; i < sl.leaves.size(); ++i) lv.row({static_cast<double>(i), sl.leaves[i]});
    write_csv(rep, cfg, lv, "spaceform_leaves.csv");
    return rep;
  }

  KernelSplitting ks;
  try {
    ks = kernel_splitting(c);
  } catch (const Error& e) {
    rep.flag("kernel_rank_constant", false);
    rep.error = e.what();
    return rep;
  }
  rep.metrics["r"] = ks.r;
  if (ks.r != 1) {
    rep.flag("supported_case", false);
    rep.error = "codimension " + std::to_string(c.k()) + " needs a rank-one kernel, found r = " + std::to_string(ks.r);
    return rep;
  }
  Rank1Section rs = rank1_parallel_section(c, ks, {}, tol(cfg, "dmu"));
  rep.at_most("dmu_closedness", rs.dmu_residual, tol(cfg, "dmu"));
  rep.at_most("rank1_parallel", rs.parallel_residual, tol(cfg, "rank1_parallel"));
  rep.at_most("rank1_hyperquadric", rs.hyperquadric, tol(cfg, "rank1_hyperquadric"));
  rep.metrics["kernel_residual"] = rs.kernel_residual;
  rep.metrics["path_residual"] = rs.path_residual;
  std::vector<std::string> header = indexed("x", c.n());
  for (const auto& h : indexed("s", c.m())) header.push_back(h);
  CsvWriter w(header);
  for (std::size_t i = 0; i < box.size(); ++i) {
    std::vector<double> row = values(box.point(i));
    append(row, rs.s.values[i]);
    w.row(row);
  }
  write_csv(rep, cfg, w, "spaceform_section.csv");
  return rep;
}

RunReport cmd_gaussbonnet(const RunConfig& cfg) {
  Scenario s = validate(cfg);
  RunReport rep = start(cfg, "gaussbonnet");
  ClosedSurfaceCongruence cs = ClosedSurfaceCongruence::from_scenario(s, cfg.cells);
  cs.mode = cfg.mode;
  cs.fd_step = cfg.fd_step;

  GaussBonnetReport gb;
  try {
    gb = gauss_bonnet(cs);
  } catch (const AtlasError& e) {
    rep.at_most("atlas_mismatch", cs.atlas_mismatch(), tol(cfg, "atlas"));
    rep.error = e.what();
    return rep;
  }
  rep.at_most("atlas_mismatch", gb.atlas_mismatch, tol(cfg, "atlas"));
  rep.at_most("degree_g1_integer", gb.deg_g1.residual, tol(cfg, "degree_integer"));
  rep.at_most("degree_g2_integer", gb.deg_g2.residual, tol(cfg, "degree_integer"));
  rep.at_most("identity_T", gb.identity_T, tol(cfg, "gauss_bonnet"));
  rep.at_most("identity_N", gb.identity_N, tol(cfg, "gauss_bonnet"));
  rep.at_most("pullback", gb.pullback_residual, tol(cfg, "pullback"));
  rep.metrics["int_omega_T"] = gb.int_omega_T;
  rep.metrics["int_omega_N"] = gb.int_omega_N;
  rep.metrics["chi_T"] = gb.chi_T;
  rep.metrics["chi_N"] = gb.chi_N;
  rep.metrics["deg_g1"] = gb.deg_g1.degree;
  rep.metrics["deg_g2"] = gb.deg_g2.degree;
  rep.metrics["deg_g1_value"] = gb.deg_g1.value;
  rep.metrics["deg_g2_value"] = gb.deg_g2.value;
  rep.metrics["cells"] = gb.cells;
  if (!gb.suggestion.empty()) rep.metrics["suggestion"] = gb.suggestion;

  CsvWriter w({"chart", "x0", "x1", "omega_T", "omega_N", "K", "K_N", "metric_defined"});
  for (std::size_t a = 0; a < s.atlas.size(); ++a) {
    Congruence c(s.sig, s.n, s.atlas[a].domain, s.atlas[a].map, cfg.mode, cfg.fd_step);
    auto zero = [&](const Vec&) { return Vec(Vec::Zero(c.m())); };
    for (const CurvatureSample& cv : curvature_samples(c, zero))
      w.row({static_cast<double>(a), cv.x[0], cv.x[1], cv.omega_T, cv.omega_N, cv.K, cv.K_N, cv.metric_defined ? 1.0 : 0.0});
  }
  write_csv(rep, cfg, w, "gaussbonnet_pointwise.csv");
  return rep;
}

int run_command(const RunConfig& cfg, RunReport* out) {
  RunReport rep;
  try {
    validate(cfg);
    std::filesystem::create_directories(cfg.output_dir);
  } catch (const ConfigError& e) {
    std::cerr << "congruence-kit: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "congruence-kit: cannot create output directory: " << e.what() << "\n";
    return 2;
  }
  try {
    if (cfg.command == "check")
      rep = cmd_check(cfg);
    else if (cfg.command == "reconstruct")
      rep = cmd_reconstruct(cfg);
    else if (cfg.command == "curves")
      rep = cmd_curves(cfg);
    else if (cfg.command == "spaceform")
      rep = cmd_spaceform(cfg);
    else
      rep = cmd_gaussbonnet(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "congruence-kit: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    rep.command = cfg.command;
    rep.config = cfg.to_json();
    rep.error = e.what();
  }
  try {
    write_json(path_in(cfg, "report.json"), rep.to_json());
  } catch (const std::exception& e) {
    std::cerr << "congruence-kit: " << e.what() << "\n";
    return 2;
  }
  for (const Check& c : rep.checks)
    std::cout << (c.pass ? "pass " : "FAIL ") << c.name << " = " << format_double(c.value)
              << (c.at_least ? " >= " : " <= ") << format_double(c.threshold) << "\n";
  for (const std::string& sk : rep.skipped) std::cout << "skip " << sk << "\n";
  if (!rep.error.empty()) std::cerr << "congruence-kit: " << rep.error << "\n";
  const bool ok = rep.pass();
  if (out) *out = std::move(rep);
  return ok ? 0 : 1;
}

}  // namespace ck
