#include <doctest.h>

#include "congruence_kit/curves.hpp"
#include "congruence_kit/reconstruct.hpp"
#include "congruence_kit/scenarios.hpp"

#include <cmath>

using namespace ck;

namespace {

struct Zero {
  template <class T>
  T operator()(const T&) const {
    return T(0.0);
  }
};

// A generic curve on S^3 at unit speed: (cos a t, sin a t, cos b t, sin b t) / sqrt 2
// with a^2 + b^2 = 2.
struct S3Curve {
  template <class T>
  VecT<T> operator()(const T& t) const {
    using std::cos, std::sin;
    const double a = 1.2, b = std::sqrt(2.0 - 1.44), r = 1.0 / std::sqrt(2.0);
    return {r * cos(a * t), r * sin(a * t), r * cos(b * t), r * sin(b * t)};
  }
};

// Non-circular curve on S^2 in arclength-free form.
struct Wobble {
  template <class T>
  VecT<T> operator()(const T& t) const {
    using std::cos, std::sin;
    T th = 1.2 + 0.3 * sin(2.0 * t);
    return {sin(th) * cos(t), sin(th) * sin(t), cos(th)};
  }
};

}  // namespace

TEST_CASE("Frenet data: great circle and latitude circle") {
  SphereCurve g = SphereCurve::make(GreatCircle{}, Zero{}, 0.0, 6.0);
  CHECK_FALSE(g.reparametrized());
  Frenet f = frenet_s2(g, 1.3);
  CHECK(std::abs(f.kappa) < 1e-15);
  CHECK((f.nu - Vec(Eigen::Vector3d(0, 0, 1))).norm() < 1e-15);
  CHECK(f.residual_alpha < 1e-14);
  CHECK(f.residual_nu < 1e-14);

  const double phi0 = 0.9;
  for (bool slow : {false, true}) {
    SphereCurve l = curve_scenario("latitude-curve", 0.5, 0.3, slow);
    CHECK(l.reparametrized() == slow);
    for (double s : {0.2, 1.7, 3.9}) {
      Frenet fl = frenet_s2(l, s);
      // Sign: alpha x alpha' points away from the pole for a counter-clockwise circle.
      CHECK(std::abs(fl.kappa) == doctest::Approx(1.0 / std::tan(phi0)).epsilon(1e-10));
      CHECK(fl.residual_alpha < (slow ? 1e-8 : 1e-13));
      CHECK(fl.residual_nu < (slow ? 1e-8 : 1e-13));
    }
  }
  SphereCurve slow = curve_scenario("latitude-curve", 0.5, 0.3, true);
  CHECK(std::abs(slow.raw_jet(1.0).da.norm() - 1.0) > 1e-2);
}

TEST_CASE("reparametrization inverts the arclength") {
  SphereCurve w = SphereCurve::make(Wobble{}, Zero{}, 0.0, 3.0);
  REQUIRE(w.reparametrized());
  for (double s : {0.0, 0.4, 1.1, w.length() * 0.9}) {
    double t = w.t_of_s(s);
    double back = adaptive_simpson([&](double u) { return w.raw_jet(u).da.norm(); }, 0.0, t, 1e-13);
    CHECK(std::abs(back - s) < 1e-8);
    CHECK(std::abs(w.jet(s).da.norm() - 1.0) < 1e-8);
  }
  // Second derivative against a difference quotient of the first.
  double s = 1.0, h = 1e-4;
  Vec fd = (w.jet(s + h).da - w.jet(s - h).da) / (2 * h);
  CHECK((fd - w.jet(s).dda).norm() < 1e-6);
}

TEST_CASE("closed form: great circle with zero support") {
  SphereCurve g = SphereCurve::make(GreatCircle{}, Zero{}, 0.0, 6.0);
  const double A0 = 0.7, B0 = -0.4;
  CurveSolution sol = solve_curve_closed_form(g, A0, B0, 61);
  for (std::size_t i = 0; i < sol.s.size(); ++i) {
    double t = sol.s[i];
    CHECK(std::abs(sol.A[i] - A0) < 1e-14);
    CHECK(std::abs(sol.B[i] - B0) < 1e-14);
    Vec expect(3);
    expect << -A0 * std::sin(t), A0 * std::cos(t), B0;
    CHECK((sol.gamma[i] - expect).norm() < 1e-14);
  }
  CurveSolution z = solve_curve_closed_form(g, 0.0, 0.0, 21);
  for (const Vec& p : z.gamma) CHECK(p.norm() == 0.0);
  // gamma' = -A0 alpha
  auto v = sol.at(2.5);
  Vec gp = (sol.at(2.5 + 1e-5).gamma - sol.at(2.5 - 1e-5).gamma) / 2e-5;
  CHECK((gp + A0 * g.jet(2.5).a).norm() < 1e-9);
  CHECK(v.A == doctest::Approx(A0));
}

TEST_CASE("closed form agrees with RK4") {
  for (bool slow : {false, true}) {
    SphereCurve l = curve_scenario("latitude-curve", 0.5, 0.3, slow);
    CurveSolution sol = solve_curve_closed_form(l, 0.4, 0.2, slow ? 61 : 201);
    CHECK(sol.system_residual < 1e-8);
    RkCurve rk = solve_curve_rk4(l, 0.4, 0.2, sol.s);
    double dev = 0.0;
    for (std::size_t i = 0; i < sol.s.size(); ++i)
      dev = std::max({dev, std::abs(rk.A[i] - sol.A[i]), std::abs(rk.B[i] - sol.B[i])});
    CHECK(dev < 1e-8);
  }
}

TEST_CASE("fixed-step RK4 converges at fourth order") {
  SphereCurve l = curve_scenario("latitude-curve", 0.5, 0.3);
  CurveSolution sol = solve_curve_closed_form(l, 0.4, 0.2, 101);
  const double L = l.length();
  auto ref = sol.at(L);
  std::vector<double> errs;
  for (int n : {20, 40, 80}) {
    auto [A, B] = curve_rk4_fixed(l, 0.4, 0.2, L, n);
    errs.push_back(std::hypot(A - ref.A, B - ref.B));
  }
  CHECK(observed_order(errs[0], errs[1]) > 3.8);
  CHECK(observed_order(errs[1], errs[2]) > 3.8);
}

TEST_CASE("gamma lies on the plane and moves along alpha") {
  SphereCurve l = curve_scenario("latitude-curve", 0.5, 0.3);
  CurveSolution sol = solve_curve_closed_form(l, 0.4, 0.2, 201);
  for (std::size_t i = 0; i < sol.s.size(); i += 10) {
    CurveJet j = l.jet(sol.s[i]);
    CHECK(std::abs(sol.gamma[i].dot(j.a) - l.lambda(sol.s[i])) < 1e-12);
  }
  RegularityReport rr = regularity_scan(sol);
  CHECK(rr.collinearity_residual < 1e-8);
}

TEST_CASE("regularity scan") {
  SphereCurve g = SphereCurve::make(GreatCircle{}, Zero{}, 0.0, 6.0);
  RegularityReport none = regularity_scan(solve_curve_closed_form(g, 0.8, 0.1, 61));
  CHECK(none.roots.empty());
  CHECK_FALSE(none.degenerate);
  RegularityReport deg = regularity_scan(solve_curve_closed_form(g, 0.0, 0.3, 61));
  CHECK(deg.degenerate);

  SphereCurve l = curve_scenario("latitude-curve", 0.5, 0.3);
  RegularityReport rr = regularity_scan(solve_curve_closed_form(l, 0.4, 0.2, 201));
  REQUIRE_FALSE(rr.roots.empty());
  for (std::size_t i = 0; i < rr.roots.size(); ++i) CHECK(rr.gamma_speed[i] < 1e-8);
  // Independent root check: A - lambda' by RK4 at each root.
  CurveSolution sol = solve_curve_closed_form(l, 0.4, 0.2, 201);
  for (double r : rr.roots) {
    RkCurve rk = solve_curve_rk4(l, 0.4, 0.2, {r});
    CHECK(std::abs(rk.A[0] - l.dlambda(r)) < 1e-8);
  }
}

TEST_CASE("equidistance of the family") {
  SphereCurve l = curve_scenario("latitude-curve", 0.5, 0.3);
  CurveSolution a = solve_curve_closed_form(l, 0.4, 0.2, 121), b = solve_curve_closed_form(l, -0.3, 0.9, 121);
  Equidistance e = equidistance_check(a, b);
  CHECK(e.deviation < 1e-10);
  CHECK(e.alpha_component < 1e-12);
  CHECK(e.derivative < 1e-10);
  CHECK(e.distance == doctest::Approx(std::hypot(0.7, 0.7)).epsilon(1e-12));
  CHECK(equidistance_check(a, a).distance == 0.0);

  SphereCurve g = curve_scenario("great-circle-curve", 0.5, 0.3);
  Equidistance eg = equidistance_check(solve_curve_closed_form(g, 1.0, 2.0, 61), solve_curve_closed_form(g, -0.5, 0.5, 61));
  CHECK(eg.distance == doctest::Approx(std::hypot(1.5, 1.5)).epsilon(1e-12));
  CHECK(eg.deviation < 1e-10);
}

TEST_CASE("R^m ODE: cross check and invariants") {
  SphereCurve l = curve_scenario("latitude-curve", 0.5, 0.3);
  CurveSolution sol = solve_curve_closed_form(l, 0.4, 0.2, 201);
  CurveRm rm = solve_curve_ode_rm(l, support_from_frame(l, 0.4, 0.2), 201);
  double dev = 0.0;
  for (std::size_t i = 0; i < sol.s.size(); ++i) dev = std::max(dev, (rm.gamma[i] - sol.gamma[i]).norm());
  CHECK(dev < 1e-8);
  CHECK(rm.orthogonality_residual < 1e-8);

  SphereCurve c3 = SphereCurve::make(S3Curve{}, Zero{}, 0.0, 5.0);
  CurveJet j0 = c3.jet(0.0);
  Vec s0 = Vec(Eigen::Vector4d(0.1, -0.3, 0.4, 0.2));
  s0 -= s0.dot(j0.a) * j0.a;
  CurveRm r3 = solve_curve_ode_rm(c3, s0, 101);
  for (const Vec& s : r3.support) CHECK(std::abs(s.norm() - s0.norm()) < 1e-9);
  CHECK(r3.alpha_residual < 1e-9);
  for (std::size_t i = 0; i < r3.s.size(); ++i) CHECK((r3.gamma[i] - r3.support[i]).norm() < 1e-15);

  CurveRm z = solve_curve_ode_rm(c3, Vec::Zero(4), 21);
  for (const Vec& g : z.gamma) CHECK(g.norm() == 0.0);
  CHECK_THROWS_AS(solve_curve_ode_rm(c3, j0.a, 21), Error);
}

TEST_CASE("n = 1 reconstruction matches the closed form") {
  Scenario s = make_scenario("latitude-curve");
  Congruence c = make_congruence(s);
  SupportSolution sol = solve_support(c, kernel_splitting(c));
  CHECK(sol.branch == Branch::Flat);
  ImmersionField im = assemble_immersion(c, sol, {0.0, 0.0});

  SphereCurve l = curve_scenario("latitude-curve", 0.5, 0.3);
  // Initial data from the reconstructed curve at s = 0.
  const Box& b = c.domain();
  std::size_t first = 0;
  CurveJet j0 = l.jet(b.point(first)[0]);
  Vec frame_nu(3);
  frame_nu << j0.a[1] * j0.da[2] - j0.a[2] * j0.da[1], j0.a[2] * j0.da[0] - j0.a[0] * j0.da[2],
      j0.a[0] * j0.da[1] - j0.a[1] * j0.da[0];
  double A0 = im.phi[first].dot(j0.da), B0 = im.phi[first].dot(frame_nu);
  CurveSolution cf = solve_curve_closed_form(l, A0, B0, 121);
  double dev = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) dev = std::max(dev, (cf.at(b.point(i)[0]).gamma - im.phi[i]).norm());
  CHECK(dev < 1e-6);
  FoliationReport fr = foliation_check(c, sol, {{0.0, 0.0}, {0.3, -0.2}});
  CHECK(fr.equidistance_deviation < 1e-6);
}
