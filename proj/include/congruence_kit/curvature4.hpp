#pragma once

#include "congruence_kit/congruence.hpp"
#include "congruence_kit/scenarios.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace ck {

// eps_n [d phi_o(u), d phi_o(v)] split along Lambda^2 p + Lambda^2 p^perp.
struct CongruenceCurvature {
  Multivector R;
  Multivector tangent_part;  // component along Lambda^2 p
  Multivector normal_part;   // component along Lambda^2 p^perp
  Mat tangent_op, normal_op; // the same as operators on R^m
  double off_diagonal = 0.0; // size of the part in p ^ p^perp (zero in exact arithmetic)
};

CongruenceCurvature congruence_curvature(const Congruence& c, const Vec& x, const Vec& u, const Vec& v);
CongruenceCurvature congruence_curvature(const Congruence& c, const Jet& j, const Vec& u, const Vec& v);

struct OmegaValue {
  double omega_T = 0.0;
  double omega_N = 0.0;
};

// Requires a Euclidean R^4 with n = k = 2. The normal plane is oriented as *p.
OmegaValue omega_forms(const Congruence& c, const Vec& x, const Vec& u, const Vec& v);
OmegaValue omega_forms(const Congruence& c, const Jet& j, const Vec& u, const Vec& v);

struct PointCurvatures {
  double K = 0.0, K_N = 0.0;
  double dA = 0.0;               // signed area of (d_1, d_2) for the metric at (x, lambda)
  double omega_T = 0.0, omega_N = 0.0;
  double basis_deviation = 0.0;  // spread of K, K_N between two tangent bases
};

// Also covers line congruences (m = 3, k = 1), where omega_N = 0.
// Throws when the metric at (x, lambda) is singular.
PointCurvatures pointwise_curvatures(const Congruence& c, const Vec& x, const Vec& lambda);

// ---------------------------------------------------------------- Lambda^2 R^4

// Orthonormal bases of Lambda^+ and Lambda^-, ordered so that the bracket
// induces the positive area form on each sphere.
const std::array<Multivector, 3>& lambda_plus_basis();
const std::array<Multivector, 3>& lambda_minus_basis();

struct SelfDualSplit {
  Multivector plus, minus;   // w^+ and w^-
  Vec g1, g2;                // coordinates in the bases above
  double star_residual = 0.0;  // max of |*w^+ - w^+|, |*w^- + w^-|, |**w - w|
};

SelfDualSplit selfdual_split(const Multivector& w);

// ---------------------------------------------------------------- closed surfaces

struct ClosedSurfaceCongruence {
  Signature sig;
  std::vector<Chart> atlas;
  bool sphere_atlas = false;  // two polar caps glued along theta = pi / 2
  int cells = 128;            // quadrature cells per axis and chart
  DerivMode mode = DerivMode::Analytic;
  double fd_step = 1e-5;

  static ClosedSurfaceCongruence from_scenario(const Scenario& s, int cells = 128);
  // Largest blade and foot mismatch across the identifications.
  double atlas_mismatch() const;
};

class AtlasError : public Error {
 public:
  using Error::Error;
};
constexpr double kAtlasTol = 1e-8;

struct DegreeResult {
  double value = 0.0;
  int degree = 0;
  double residual = 0.0;  // distance to the nearest integer
  bool integral = false;  // residual below 1e-2
};

// Degree of a map of the closed surface into S^2(r) in R^3, given chart-wise
// as functions with their two partial derivatives.
using SphereMap = std::function<void(std::size_t chart, const Vec& x, Vec& g, Vec& d1, Vec& d2)>;
DegreeResult degree(const std::vector<Box>& charts, const SphereMap& g, double r, int cells = 128);
// Partial derivatives by Richardson differences.
DegreeResult degree(const std::vector<Box>& charts, const std::function<Vec(std::size_t, const Vec&)>& g, double r,
                    int cells = 128, double h = 1e-4);

struct GaussBonnetReport {
  double int_omega_T = 0.0, int_omega_N = 0.0;
  double chi_T = 0.0, chi_N = 0.0;  // integrals over 2 pi
  DegreeResult deg_g1, deg_g2;
  double identity_T = 0.0;  // |int omega_T - 2 pi (deg g1 + deg g2)|
  double identity_N = 0.0;  // |int omega_N - 2 pi (deg g1 - deg g2)|
  double pullback_residual = 0.0;  // max |omega_T - g1^* omega_1 - g2^* omega_2| at the nodes
  double atlas_mismatch = 0.0;
  int cells = 0;
  bool degrees_integral = false;
  std::string suggestion;  // set when a degree is not near an integer
};

// Throws AtlasError when the identifications disagree beyond kAtlasTol.
GaussBonnetReport gauss_bonnet(const ClosedSurfaceCongruence& cs);

// Pointwise values at the nodes of one chart, for export.
struct CurvatureSample {
  Vec x;
  double omega_T, omega_N, K, K_N;
  bool metric_defined;
};
std::vector<CurvatureSample> curvature_samples(const Congruence& c, const std::function<Vec(const Vec&)>& lambda);

}  // namespace ck
