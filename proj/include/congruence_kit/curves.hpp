#pragma once

#include "congruence_kit/algebra.hpp"
#include "congruence_kit/dual.hpp"
#include "congruence_kit/frames.hpp"
#include "congruence_kit/numerics.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ck {

using D2 = Dual<Dual<double>>;

// Position with first and second derivatives.
struct CurveJet {
  Vec a, da, dda;
};

// Curve t -> alpha(t) on the unit sphere of R^m with support function lambda.
// Non-arclength inputs are reparametrized; all public evaluations take the
// arclength parameter s in [0, length].
class SphereCurve {
 public:
  template <class A, class L>
  static SphereCurve make(A alpha, L lambda, double t0, double t1);

  int dim() const { return dim_; }
  double length() const { return length_; }
  bool reparametrized() const { return reparam_; }
  double t_of_s(double s) const;  // original parameter at arclength s

  CurveJet jet(double s) const;
  double lambda(double s) const;
  double dlambda(double s) const;
  // Raw input parametrization.
  CurveJet raw_jet(double t) const;

 private:
  int dim_ = 3;
  double t0_ = 0, t1_ = 0, length_ = 0;
  bool reparam_ = false;
  std::function<VecT<D2>(const D2&)> alpha_;
  std::function<Dual<double>(const Dual<double>&)> lambda_;
  std::vector<double> s_table_, t_table_;
  std::shared_ptr<Pchip> inverse_;
  void build();
};

struct Frenet {
  double kappa = 0.0;
  Vec nu;
  double residual_alpha = 0.0;  // |alpha'' - kappa nu + alpha|
  double residual_nu = 0.0;     // |nu' + kappa alpha'|
};

// Frenet data on S^2 at arclength s.
Frenet frenet_s2(const SphereCurve& c, double s);

struct CurveSolution {
  const SphereCurve* curve = nullptr;
  double A0 = 0, B0 = 0;
  std::vector<double> s, A, B, theta, kappa;
  std::vector<Vec> gamma;
  double system_residual = 0.0;  // max |A' - (B kappa - lambda)|, |B' + A kappa| at the nodes

  // Closed form at an arbitrary arclength parameter.
  struct Value {
    double A, B, theta;
    Vec gamma;
  };
  Value at(double s) const;
  std::vector<double> theta_table, ic_table, is_table;  // cumulative integrals at the nodes
};

// Variation of constants: (B + iA)(s) = e^{i theta}(B0 + i A0 - i int lambda e^{-i theta}).
CurveSolution solve_curve_closed_form(const SphereCurve& c, double A0, double B0, int nodes = 401,
                                      double quad_tol = 1e-10);

// Adaptive RK4 integration of the linear system with the same initial data.
struct RkCurve {
  std::vector<double> s, A, B;
};
RkCurve solve_curve_rk4(const SphereCurve& c, double A0, double B0, const std::vector<double>& at, double tol = 1e-12);
// Fixed step RK4 from 0 to s_end with n steps; returns (A, B).
std::pair<double, double> curve_rk4_fixed(const SphereCurve& c, double A0, double B0, double s_end, int n);

struct RegularityReport {
  std::vector<double> roots;           // arclength parameters where A = lambda'
  std::vector<double> gamma_speed;     // |gamma'| at each root
  bool degenerate = false;             // A - lambda' vanishes on the whole interval
  double collinearity_residual = 0.0;  // max |gamma' - (lambda' - A) alpha| at sample points
};
RegularityReport regularity_scan(const CurveSolution& sol, double tol = 1e-10);

struct Equidistance {
  double deviation = 0.0;       // max - min of |gamma1 - gamma2|
  double distance = 0.0;        // value at s = 0
  double alpha_component = 0.0; // max |<gamma1 - gamma2, alpha>|
  double derivative = 0.0;      // max |d/ds |gamma1 - gamma2|^2|
};
Equidistance equidistance_check(const CurveSolution& a, const CurveSolution& b);

struct CurveRm {
  std::vector<double> s;
  std::vector<Vec> gamma, support;
  double orthogonality_residual = 0.0;  // max |(gamma')^{perp alpha}| by finite differences
  double alpha_residual = 0.0;          // max |<s, alpha>|
};
// Integrates s' = -lambda alpha' - <s, alpha'> alpha with s(0) = s0 orthogonal to alpha(0).
CurveRm solve_curve_ode_rm(const SphereCurve& c, const Vec& s0, int nodes = 401, double tol = 1e-12);
// Initial support from (A0, B0) in the frame (alpha', nu) on S^2.
Vec support_from_frame(const SphereCurve& c, double A0, double B0);

// Catalog curves (great-circle-curve, latitude-curve); slow = true uses a
// non-arclength input for the latitude circle.
SphereCurve curve_scenario(const std::string& key, double lambda_c, double lambda_a, bool slow = false,
                           double length = 6.0);

// ---------------------------------------------------------------- template

template <class A, class L>
SphereCurve SphereCurve::make(A alpha, L lambda, double t0, double t1) {
  if (!(t1 > t0)) throw Error("SphereCurve: empty parameter interval");
  SphereCurve c;
  c.t0_ = t0;
  c.t1_ = t1;
  c.alpha_ = [alpha](const D2& t) { return alpha(t); };
  c.lambda_ = [lambda](const Dual<double>& t) { return lambda(t); };
  c.dim_ = static_cast<int>(alpha(t0).size());
  c.build();
  return c;
}

}  // namespace ck
