#include "congruence_kit/cli.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ck;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("ck_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig config(const std::string& command, const std::string& scenario, const fs::path& out) {
  RunConfig c;
  c.command = command;
  c.scenario = scenario;
  c.output_dir = out.string();
  return c;
}

const Check* find(const RunReport& r, const std::string& name) {
  for (const Check& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("TOML and JSON configs give the same settings") {
  fs::path d = scratch("parse");
  std::ofstream(d / "a.toml") << "scenario = \"random-fourier\"\nfd_step = 1e-4\n"
                                 "[random_fourier]\nseed = 11\namplitude = 0.1\n"
                                 "[grid]\nres = [9, 9]\n[tolerances]\nfamily_fit = 1e-4\n";
  std::ofstream(d / "a.json") << "  {\"scenario\": \"random-fourier\", \"fd_step\": 1e-4,"
                                 " \"random_fourier\": {\"seed\": 11, \"amplitude\": 0.1},"
                                 " \"grid\": {\"res\": [9, 9]}, \"tolerances\": {\"family_fit\": 1e-4}}";
  RunConfig a, b;
  apply_config(a, read_config_file((d / "a.toml").string()));
  apply_config(b, read_config_file((d / "a.json").string()));
  CHECK(a.to_json() == b.to_json());
  CHECK(a.params.seed == 11u);
  CHECK(a.params.res == std::vector<int>{9, 9});
  CHECK(a.tol.at("family_fit") == 1e-4);
  CHECK(a.tol.at("equidistance") == default_tolerances().at("equidistance"));
}

TEST_CASE("malformed and inconsistent configs are configuration errors") {
  fs::path d = scratch("bad");
  std::ofstream(d / "broken.toml") << "scenario = \"sphere-gauss\n[grid\n";
  CHECK_THROWS_AS(read_config_file((d / "broken.toml").string()), ConfigError);
  std::ofstream(d / "broken.json") << "{\"scenario\": ";
  CHECK_THROWS_AS(read_config_file((d / "broken.json").string()), ConfigError);
  CHECK_THROWS_AS(read_config_file((d / "missing.toml").string()), ConfigError);

  RunConfig c;
  CHECK_THROWS_AS(apply_config(c, {{"scenaro", "sphere-gauss"}}), ConfigError);
  CHECK_THROWS_AS(apply_config(c, {{"tolerances", {{"nonsense", 1.0}}}}), ConfigError);
  CHECK_THROWS_AS(apply_config(c, {{"grid", {{"res", {9.5, 9}}}}}), ConfigError);
  CHECK_THROWS_AS(apply_config(c, {{"fd_step", "small"}}), ConfigError);

  RunConfig bad = config("check", "sphere-gauss", d);
  bad.fd_step = 0.1;
  CHECK(run_command(bad) == 2);
  bad = config("check", "no-such-scenario", d);
  CHECK(run_command(bad) == 2);
  bad = config("check", "sphere-gauss", d);
  bad.k = 3;
  CHECK(run_command(bad) == 2);
  bad = config("curves", "sphere-gauss", d);
  CHECK(run_command(bad) == 2);
  bad = config("gaussbonnet", "rank1-k3", d);
  CHECK(run_command(bad) == 2);
  bad = config("check", "sphere-gauss", d);
  bad.params.res = {9, 9, 9};
  CHECK(run_command(bad) == 2);
  CHECK_FALSE(fs::exists(d / "report.json"));
}

TEST_CASE("check: integrable passes, non-integrable fails") {
  fs::path d = scratch("check");
  RunConfig c = config("check", "sphere-gauss", d);
  c.params.res = {13, 13};
  RunReport rep;
  CHECK(run_command(c, &rep) == 0);
  CHECK(rep.metrics["r"] == 2);
  CHECK(rep.metrics["k"] == 2);
  REQUIRE(fs::exists(d / "report.json"));
  nlohmann::json j = nlohmann::json::parse(slurp(d / "report.json"));
  CHECK(j["command"] == "check");
  CHECK(j["pass"] == true);
  for (const auto& ch : j["checks"]) {
    CHECK(ch.contains("name"));
    CHECK(ch.contains("value"));
    CHECK(ch.contains("threshold"));
    CHECK(ch.contains("pass"));
  }

  RunConfig rf = config("check", "random-fourier", d);
  rf.params.res = {13, 13};
  CHECK(run_command(rf, &rep) == 1);
  const Check* lag = find(rep, "lagrangian_kernel");
  REQUIRE(lag);
  CHECK_FALSE(lag->pass);
  CHECK(lag->value > lag->threshold);
}

TEST_CASE("reconstruct: round trip passes, random-fourier is refused") {
  fs::path d = scratch("reconstruct");
  RunConfig c = config("reconstruct", "sphere-gauss", d);
  RunReport rep;
  CHECK(run_command(c, &rep) == 0);
  CHECK(find(rep, "support_residual_order"));
  CHECK(find(rep, "family_fit")->pass);
  CHECK(fs::exists(d / "immersion.csv"));

  RunConfig r1 = config("reconstruct", "rank1-k3", d);
  CHECK(run_command(r1, &rep) == 0);
  REQUIRE(find(rep, "rank1_hyperquadric"));
  CHECK(find(rep, "rank1_hyperquadric")->pass);

  RunConfig rf = config("reconstruct", "random-fourier", d);
  rf.params.res = {13, 13};
  CHECK(run_command(rf, &rep) == 1);
  CHECK(rep.metrics["refused_at"] == "kernel_closedness");
  CHECK_FALSE(rep.error.empty());
}

TEST_CASE("curves, spaceform and gaussbonnet commands") {
  fs::path d = scratch("others");
  RunReport rep;
  RunConfig cv = config("curves", "great-circle-curve", d);
  cv.a0 = 1.0;
  cv.b0 = 2.0;
  CHECK(run_command(cv, &rep) == 0);
  std::string csv = slurp(d / "curve_gamma.csv");
  CHECK(csv.rfind("s,A,B,theta,gamma0", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);

  RunConfig sf = config("spaceform", "s3-hypersurface", d);
  sf.t_sweep = 32;
  CHECK(run_command(sf, &rep) == 0);
  REQUIRE(find(rep, "singular_leaf_count"));
  CHECK(find(rep, "singular_leaf_count")->value <= 3);

  RunConfig gb = config("gaussbonnet", "clifford-torus", d);
  gb.cells = 32;
  CHECK(run_command(gb, &rep) == 0);
  CHECK(std::abs(rep.metrics["chi_T"].get<double>()) < 1e-3);
  CHECK(std::abs(rep.metrics["chi_N"].get<double>()) < 1e-3);
}

TEST_CASE("identical configs give byte-identical reports") {
  fs::path a = scratch("det_a"), b = scratch("det_b");
  RunConfig ca = config("check", "random-fourier", a), cb = config("check", "random-fourier", b);
  ca.params.res = cb.params.res = {11, 11};
  run_command(ca);
  const std::string first = slurp(a / "report.json");
  run_command(ca);
  CHECK(first == slurp(a / "report.json"));
  // Only the echoed output directory differs between the two locations.
  run_command(cb);
  nlohmann::json ja = nlohmann::json::parse(first), jb = nlohmann::json::parse(slurp(b / "report.json"));
  ja["config"].erase("output_dir");
  jb["config"].erase("output_dir");
  CHECK(ja.dump() == jb.dump());
}
