#pragma once

#include "congruence_kit/dual.hpp"
#include "congruence_kit/frames.hpp"
#include "congruence_kit/grassmann.hpp"

#include <functional>
#include <string>
#include <type_traits>
#include <vector>

namespace ck {

using D1 = Dual<double>;

// Spanning columns of the plane and a foot point (not yet normalized).
template <class T>
struct PlaneT {
  std::vector<VecT<T>> cols;
  VecT<T> foot;
};

struct PlaneMap {
  std::function<PlaneT<double>(const VecT<double>&)> value;
  std::function<PlaneT<D1>(const VecT<D1>&)> dual;  // empty: finite differences only
};

// Wraps a generic callable (templated on the scalar type).
template <class F>
PlaneMap make_plane_map(F f) {
  PlaneMap pm;
  pm.value = [f](const VecT<double>& x) { return f(x); };
  pm.dual = [f](const VecT<D1>& x) { return f(x); };
  return pm;
}

// Tangent plane of a generic immersion phi, with foot phi(x).
template <class Phi>
PlaneMap plane_map_from_immersion(Phi phi, int n) {
  auto f = [phi, n](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::value_type;
    PlaneT<T> p;
    p.foot = phi(x);
    for (int i = 0; i < n; ++i) {
      VecT<Dual<T>> xd(x.size());
      for (std::size_t j = 0; j < x.size(); ++j) xd[j] = Dual<T>(x[j], T(static_cast<int>(j) == i ? 1.0 : 0.0));
      auto y = phi(xd);
      VecT<T> c(y.size());
      for (std::size_t a = 0; a < y.size(); ++a) c[a] = y[a].d;
      p.cols.push_back(c);
    }
    return p;
  };
  return make_plane_map(f);
}

// Orthonormalize the columns and project the foot into the plane.
template <class T>
PlaneT<T> normalize_plane(const Signature& s, const PlaneT<T>& raw) {
  PlaneT<T> out;
  out.cols = gram_schmidt<T>(s, raw.cols);
  out.foot.assign(s.m, T(0.0));
  for (const auto& f : out.cols) {
    double sign = value_of(pdot(s, f, f)) < 0.0 ? -1.0 : 1.0;
    T c = pdot(s, raw.foot, f) * sign;
    for (int i = 0; i < s.m; ++i) out.foot[i] += c * f[i];
  }
  return out;
}

// Axis-aligned grid. Non-periodic axes carry res nodes including both ends;
// periodic axes carry res nodes with spacing (hi - lo) / res.
struct Box {
  Vec lo, hi;
  std::vector<int> res;
  std::vector<bool> periodic;

  Box() = default;
  Box(Vec lo_, Vec hi_, std::vector<int> res_, std::vector<bool> periodic_ = {});

  int dim() const { return static_cast<int>(lo.size()); }
  double spacing(int axis) const;
  std::size_t size() const;
  std::vector<int> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::vector<int>& idx) const;
  Vec point(const std::vector<int>& idx) const;
  Vec point(std::size_t flat) const { return point(unflatten(flat)); }
  std::vector<int> base_index() const;
  Vec centre() const;
  // Neighbour index along axis (with wrap on periodic axes); -1 if outside.
  long neighbour(std::size_t flat, int axis, int step) const;
};

enum class DerivMode { Analytic, FiniteDifference };

// First-order data of the congruence at x.
struct Jet {
  Vec x;
  Mat F;                    // m x n frame
  Mat J;                    // (F^T G F)^{-1}
  Vec v;                    // foot, in the plane
  std::vector<Mat> dF;      // d F / d x_i
  std::vector<Vec> dv;      // d v / d x_i
  Mat P, Q;                 // projectors onto the plane and its complement
  std::vector<Mat> dP;      // d P / d x_i
  std::vector<GrassTangent> U;  // d(phi_o)(d_i) = Q dF_i

  OrientedPlane plane(const Signature& s) const { return OrientedPlane(s, F); }
  AffinePlane affine(const Signature& s) const { return AffinePlane(plane(s), v); }
  GrassTangent tangent(const Vec& X) const;
  Mat rate(const Vec& X) const;  // dP(X)
};

class Congruence {
 public:
  Congruence(Signature sig, int n, Box domain, PlaneMap map, DerivMode mode = DerivMode::Analytic,
             double fd_step = 1e-5);

  const Signature& signature() const { return sig_; }
  int n() const { return n_; }
  int m() const { return sig_.m; }
  int k() const { return sig_.m - n_; }
  const Box& domain() const { return domain_; }
  DerivMode mode() const { return mode_; }
  double fd_step() const { return fd_step_; }
  // Step for derivatives of derived quantities (beta, kernel projectors).
  double derived_step() const { return derived_step_; }
  void set_derived_step(double h) { derived_step_ = h; }
  const PlaneMap& map() const { return map_; }

  AffinePlane at(const Vec& x) const;
  PlaneT<double> normalized(const Vec& x) const;
  // Normalized plane with derivative seeded along direction dir.
  PlaneT<D1> normalized_dual(const Vec& x, const Vec& dir) const;
  Jet jet(const Vec& x) const;

 private:
  Signature sig_;
  int n_;
  Box domain_;
  PlaneMap map_;
  DerivMode mode_;
  double fd_step_;
  double derived_step_ = 1e-3;
};

// beta(d_i) as the columns of an m x n matrix; beta(X) = -(dv(X))^N.
Mat beta(const Jet& j);
Mat beta(const Congruence& c, const Vec& x);
Vec beta(const Congruence& c, const Vec& x, const Vec& X);

enum class Bundle { T, N };

// Grid-sampled section of E_T or E_N.
struct SectionField {
  const Congruence* owner = nullptr;
  Bundle bundle = Bundle::N;
  std::vector<Vec> values;  // one per grid node, flat order

  // Largest projection residual of a value outside its declared fibre.
  double membership_residual() const;
};

SectionField sample_section(const Congruence& c, Bundle which, const std::function<Vec(const Vec&)>& f);

struct CovariantValue {
  Vec value;
  bool one_sided = false;
};

// Grid central differences of the raw field, then projection.
CovariantValue covariant_derivative(const SectionField& field, std::size_t node, const Vec& X, Bundle which);
// Same for a field given as a function, Richardson central differences from h.
Vec covariant_derivative(const Congruence& c, const std::function<Vec(const Vec&)>& field, const Vec& x,
                         const Vec& X, Bundle which, double h);

// Normal curvature from the bracket formula at a jet.
Mat normal_curvature(const Congruence& c, const Jet& j, const Vec& X, const Vec& Y);
Mat tangent_curvature(const Congruence& c, const Jet& j, const Vec& X, const Vec& Y);

// Curvature by parallel transport of the normal (or tangent) bundle around a
// small loop spanned by X and Y; Richardson-extrapolated from h and h/2
// unless extrapolate is false.
Mat holonomy_curvature(const Congruence& c, const Vec& x, const Vec& X, const Vec& Y, Bundle which, double h,
                       int steps = 8, bool extrapolate = true);

struct CurvatureRN {
  Mat bracket;    // Clifford bracket form
  Mat holonomy;   // loop transport
  double deviation = 0.0;  // relative
};
CurvatureRN curvature_RN(const Congruence& c, const Vec& x, const Vec& X, const Vec& Y, double h = 1e-3,
                         double tol = 1e-4);

// The operator L at one point.
struct LPoint {
  Mat L;          // (k * n(n-1)/2) x k in normal coordinates
  Mat N;          // m x k normal frame
  Vec singular_values;
  int r = 0;      // kernel dimension
  Mat kernel;     // m x r, ambient, orthonormal
  Mat K;          // projector onto the kernel
  Mat pinv;       // k x (k * n(n-1)/2) pseudo-inverse on the complement
};

constexpr double kKernelRelTol = 1e-7;
constexpr double kKernelAbsTol = 1e-8;
constexpr double kStabilityTol = 1e-4;

LPoint script_L(const Congruence& c, const Jet& j, double rel_tol = kKernelRelTol, double abs_tol = kKernelAbsTol);
LPoint script_L(const Congruence& c, const Vec& x, double rel_tol = kKernelRelTol, double abs_tol = kKernelAbsTol);
// L^{-1} applied to the stacked values of a normal-valued 2-form (m x npairs).
Vec apply_pinv(const Congruence& c, const LPoint& lp, const Mat& form);
// Stack an m x npairs normal-valued form into normal coordinates.
Vec stack_form(const Congruence& c, const LPoint& lp, const Mat& form);

class RankNotConstant : public Error {
 public:
  RankNotConstant(const std::string& what, std::vector<std::size_t> nodes) : Error(what), nodes(std::move(nodes)) {}
  std::vector<std::size_t> nodes;
};

class KernelNotStable : public Error {
 public:
  KernelNotStable(const std::string& what, double residual) : Error(what), residual(residual) {}
  double residual;
};

struct KernelSplitting {
  int r = 0;
  std::vector<LPoint> grid;  // one per node
  double stability_residual = 0.0;
  std::size_t stability_node = 0;
};

// Sweeps the grid; throws RankNotConstant or KernelNotStable.
KernelSplitting kernel_splitting(const Congruence& c, double stability_tol = kStabilityTol);
// Kernel projector of L at x (used for derivatives of the splitting).
Mat kernel_projector(const Congruence& c, const Vec& x);
// max_i |(Q - K) dK_i K| at x.
double stability_residual(const Congruence& c, const Vec& x);

enum class SymmetryStatus { Infeasible, FeasibleSingularOnly, FeasibleInvertible };
std::string to_string(SymmetryStatus s);

struct SymmetryReport {
  SymmetryStatus status = SymmetryStatus::Infeasible;
  int solution_dim = 0;
  Mat system;   // constraint matrix acting on vec(C)
  Mat witness;  // m x n map Phi(d_j) = column j, when found
  double witness_det = 0.0;
};

SymmetryReport check_symmetry(const Congruence& c, const Vec& x, unsigned seed = 12345);

// gamma(d_i, d_j) = Q (d_i beta_j - d_j beta_i) for i < j, columns in
// lexicographic pair order.
Mat gamma_form(const Congruence& c, const Vec& x);

struct LagrangianReport {
  double pullback_omega = 0.0;  // max |phi*omega(d_i, d_j)|
  double kernel_part = 0.0;
  double complement_part = 0.0;
  double normal_flatness = 0.0;  // max |R^N(d_i, d_j)|
};

LagrangianReport check_lagrangian(const Congruence& c, const Vec& x);

// B(xi)(X) = dphi_o(X)^*(xi), in the plane.
Vec shape_B(const Congruence& c, const Jet& j, const Vec& xi, const Vec& X);
Vec shape_B(const Congruence& c, const Vec& x, const Vec& xi, const Vec& X);
// h(X, Y) = (dY(X))^N for a tangent section Y near x.
Vec second_fundamental_h(const Congruence& c, const Vec& x, const Vec& X, const std::function<Vec(const Vec&)>& Y,
                         double h = 1e-5);

// Columns (dv(d_i))^T - B(lambda)(d_i).
Mat metric_map(const Congruence& c, const Jet& j, const Vec& lambda);
// Gram matrix of metric_map; throws when the map is not injective.
Mat metric_at(const Congruence& c, const Vec& x, const Vec& lambda, double tol = 1e-10);
Mat metric_at(const Congruence& c, const Jet& j, const Vec& lambda, double tol = 1e-10);

// Lexicographic pairs (i, j), i < j.
std::vector<std::pair<int, int>> index_pairs(int n);

}  // namespace ck
