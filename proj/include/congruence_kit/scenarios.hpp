#pragma once

#include "congruence_kit/congruence.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace ck {

struct ScenarioParams {
  unsigned seed = 7;
  double amplitude = 0.05;        // random-fourier foot perturbation
  double plane_amplitude = 0.0;   // random-fourier plane perturbation
  int p = 0;                      // signature variant (s3-hypersurface only)
  std::vector<int> res;           // grid override, empty for the default
  double lambda_c = 0.5;          // curve scenarios: lambda(t) = c + a sin t
  double lambda_a = 0.3;
};

// One chart of a closed surface. The sphere uses two polar charts that meet
// along the equator theta = pi/2.
struct Chart {
  Box domain;
  PlaneMap map;
};

struct Scenario {
  std::string key;
  Signature sig;
  int n = 0;
  Box domain;
  PlaneMap map;
  std::function<Vec(const Vec&)> immersion;  // generating immersion, when one exists
  std::vector<Chart> atlas;                  // closed-surface charts, when the surface is closed
  bool sphere_atlas = false;

  int m() const { return sig.m; }
  int k() const { return sig.m - n; }
};

std::vector<std::string> scenario_keys();
bool is_curve_scenario(const std::string& key);
Scenario make_scenario(const std::string& key, const ScenarioParams& params = {});
Congruence make_congruence(const Scenario& s, DerivMode mode = DerivMode::Analytic, double fd_step = 1e-5);

// ---------------------------------------------------------------- curves on S^2

// Generic callables t -> alpha(t) in S^2, arclength parametrized.
struct GreatCircle {
  template <class T>
  VecT<T> operator()(const T& t) const {
    using std::cos, std::sin;
    return {cos(t), sin(t), T(0.0)};
  }
};

struct LatitudeCircle {
  double phi0 = 0.9;
  template <class T>
  VecT<T> operator()(const T& t) const {
    using std::cos, std::sin;
    const double r = std::sin(phi0);
    return {r * cos(t / r), r * sin(t / r), T(std::cos(phi0))};
  }
};

// Latitude circle traversed at non-unit speed (exercises reparametrization).
struct SlowLatitude {
  double phi0 = 0.9;
  template <class T>
  VecT<T> operator()(const T& t) const {
    using std::cos, std::sin;
    const double r = std::sin(phi0);
    T u = t + 0.3 * sin(t);
    return {r * cos(u), r * sin(u), T(std::cos(phi0))};
  }
};

struct SineLambda {
  double c = 0.5;
  double a = 0.3;
  template <class T>
  T operator()(const T& t) const {
    using std::sin;
    return c + a * sin(t);
  }
};

}  // namespace ck
