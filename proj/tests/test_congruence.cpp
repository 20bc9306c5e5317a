#include <doctest.h>

#include "congruence_kit/congruence.hpp"
#include "congruence_kit/numerics.hpp"
#include "congruence_kit/scenarios.hpp"

#include <cmath>
#include <random>

using namespace ck;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Plane e1^e2 with foot x1 e1 + x2 e2 over the unit square.
struct ConstantPlane {
  template <class T>
  PlaneT<T> operator()(const VecT<T>& x) const {
    PlaneT<T> p;
    p.cols = {{T(1.0), T(0.0), T(0.0), T(0.0)}, {T(0.0), T(1.0), T(0.0), T(0.0)}};
    p.foot = {x[0], x[1], T(0.0), T(0.0)};
    return p;
  }
};

Congruence constant_congruence() {
  Box b(vec2(0, 0), vec2(1, 1), {5, 5});
  return Congruence(Signature(4), 2, b, make_plane_map(ConstantPlane{}));
}

Congruence scenario(const std::string& key, ScenarioParams p = {}) { return make_congruence(make_scenario(key, p)); }

// Graph that is flat for x1 < 0 and curved for x1 > 0.
struct Bump {
  template <class T>
  VecT<T> operator()(const VecT<T>& x) const {
    T s = value_of(x[0]) > 0.0 ? T(x[0] * x[0] * x[0]) : T(0.0);
    return {x[0], x[1], s * x[1], s * x[0]};
  }
};

}  // namespace

TEST_CASE("beta vanishes when the foot is zero") {
  Congruence c = scenario("clifford-torus");
  Vec x = vec2(0.7, 2.1);
  CHECK(beta(c, x).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(c.jet(x).v.norm() < 1e-14);
}

TEST_CASE("beta equals the normal derivative of the support of an immersion") {
  Scenario s = make_scenario("sphere-gauss");
  Congruence c = make_congruence(s);
  auto support = [&](const Vec& y) {
    AffinePlane ap = c.at(y);
    return Vec(s.immersion(y) - ap.foot);
  };
  for (Vec x : {vec2(1.0, 0.2), vec2(2.0, -0.7)}) {
    for (int i = 0; i < 2; ++i) {
      Vec X = Vec::Unit(2, i);
      Vec lhs = covariant_derivative(c, support, x, X, Bundle::N, 1e-5);
      CHECK((lhs - beta(c, x, X)).norm() < 1e-8);
    }
    CHECK(beta(c, x, Vec::Zero(2)).norm() == 0.0);
  }
}

TEST_CASE("covariant derivative: constant field and foot") {
  Congruence c = constant_congruence();
  auto cst = [](const Vec&) { return Vec(Vec::Unit(4, 2)); };
  Vec x = vec2(0.5, 0.5);
  CHECK(covariant_derivative(c, cst, x, vec2(1, 0), Bundle::N, 1e-4).norm() < 1e-12);

  Congruence t = scenario("random-fourier", {7, 0.1, 0.0});
  auto foot = [&](const Vec& y) { return t.at(y).foot; };
  for (int i = 0; i < 2; ++i) {
    Vec X = Vec::Unit(2, i);
    Vec d = covariant_derivative(t, foot, vec2(1.1, 2.3), X, Bundle::N, 1e-5);
    CHECK((d + beta(t, vec2(1.1, 2.3), X)).norm() < 1e-8);
  }
}

TEST_CASE("grid covariant derivative is second order") {
  std::vector<double> errs;
  for (int res : {32, 64}) {
    ScenarioParams p;
    p.res = {res, res};
    p.amplitude = 0.1;
    Congruence c = scenario("random-fourier", p);
    SectionField foot = sample_section(c, Bundle::T, [&](const Vec& y) { return c.at(y).foot; });
    std::size_t node = c.domain().flatten({res / 2, res / 4});
    CovariantValue cv = covariant_derivative(foot, node, vec2(1, 0), Bundle::N);
    CHECK_FALSE(cv.one_sided);
    errs.push_back((cv.value + beta(c, c.domain().point(node), vec2(1, 0))).norm());
  }
  CHECK(observed_order(errs[0], errs[1]) > 1.9);
  Congruence c = scenario("sphere-gauss");
  SectionField f = sample_section(c, Bundle::T, [&](const Vec& y) { return c.at(y).foot; });
  CHECK(f.membership_residual() < 1e-12);
  CHECK(covariant_derivative(f, 0, vec2(1, 0), Bundle::N).one_sided);
}

TEST_CASE("normal curvature: trivial cases") {
  Congruence lines = scenario("line-congruence-r3");
  Jet j = lines.jet(vec2(1.2, 0.3));
  CHECK(normal_curvature(lines, j, vec2(1, 0), vec2(0, 1)).norm() < 1e-14);
  Congruence g = scenario("graph-z2");
  Jet jg = g.jet(vec2(0.1, 0.2));
  CHECK(normal_curvature(g, jg, vec2(1, 2), vec2(1, 2)).norm() < 1e-14);
}

TEST_CASE("normal curvature: bracket, adjoint and holonomy agree") {
  ScenarioParams p;
  p.amplitude = 0.1;
  p.plane_amplitude = 0.3;
  Congruence c = scenario("random-fourier", p);
  Vec x = vec2(0.9, 2.5);
  Jet j = c.jet(x);
  Mat adj = normal_curvature_adjoint(j.plane(c.signature()), j.U[0], j.U[1]);
  CurvatureRN r = curvature_RN(c, x, vec2(1, 0), vec2(0, 1));
  CHECK(r.bracket.norm() > 1e-2);
  CHECK((r.bracket - adj).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(r.deviation < 1e-4);

  // Raw loop estimate converges at second order.
  std::vector<double> errs;
  for (double h : {0.04, 0.02})
    errs.push_back((holonomy_curvature(c, x, vec2(1, 0), vec2(0, 1), Bundle::N, h, 8, false) - r.bracket).norm());
  CHECK(observed_order(errs[0], errs[1]) > 1.9);

  // Tangent part from holonomy as well.
  Mat ht = holonomy_curvature(c, x, vec2(1, 0), vec2(0, 1), Bundle::T, 1e-3);
  Mat bt = tangent_curvature(c, j, vec2(1, 0), vec2(0, 1));
  CHECK((ht - bt).norm() / std::max(1e-3, bt.norm()) < 1e-4);
}

TEST_CASE("finite-difference jets match analytic jets") {
  Scenario s = make_scenario("random-fourier", {3, 0.1, 0.2});
  Congruence a = make_congruence(s, DerivMode::Analytic);
  Congruence f = make_congruence(s, DerivMode::FiniteDifference, 1e-5);
  Vec x = vec2(2.0, 0.4);
  Jet ja = a.jet(x), jf = f.jet(x);
  for (int i = 0; i < 2; ++i) {
    CHECK((ja.dF[i] - jf.dF[i]).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((ja.dv[i] - jf.dv[i]).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((ja.dP[i] - jf.dP[i]).cwiseAbs().maxCoeff() < 1e-8);
  }
  // Central differences: errors shrink by four under step halving.
  double e1 = (make_congruence(s, DerivMode::FiniteDifference, 1e-2).jet(x).dv[0] - ja.dv[0]).norm();
  double e2 = (make_congruence(s, DerivMode::FiniteDifference, 5e-3).jet(x).dv[0] - ja.dv[0]).norm();
  CHECK(observed_order(e1, e2) > 1.9);
}

TEST_CASE("operator L: kernel rank on reference scenarios") {
  {
    Congruence c = scenario("sphere-gauss");
    LPoint lp = script_L(c, vec2(1.3, 0.4));
    CHECK(lp.r == 2);
    CHECK(lp.L.cwiseAbs().maxCoeff() < 1e-12);
  }
  {
    Congruence c = scenario("graph-z2");
    LPoint lp = script_L(c, vec2(0.2, -0.1));
    CHECK(lp.r == 0);
    CHECK(lp.K.norm() == 0.0);
  }
  {
    Scenario s = make_scenario("rank1-k3");
    Congruence c = make_congruence(s);
    Vec x = vec2(0.8, 0.6);
    LPoint lp = script_L(c, x);
    CHECK(lp.r == 1);
    // The kernel is spanned by the position vector.
    Vec pos = s.immersion(x);
    CHECK(std::abs(std::abs(lp.kernel.col(0).dot(pos)) - pos.norm()) < 1e-10);
    CHECK(stability_residual(c, x) < 1e-8);
  }
  {
    // n = 1: no 2-forms, every normal vector is in the kernel.
    Congruence c = scenario("great-circle-curve");
    Vec x(1);
    x << 1.0;
    CHECK(script_L(c, x).r == 2);
  }
}

TEST_CASE("kernel splitting over the grid") {
  ScenarioParams p;
  p.res = {7, 7};
  KernelSplitting ks = kernel_splitting(scenario("rank1-k3", p));
  CHECK(ks.r == 1);
  CHECK(ks.stability_residual < 1e-8);
  CHECK(kernel_splitting(scenario("graph-z2", p)).r == 0);
}

TEST_CASE("kernel rank change is reported with nodes") {
  Box b(vec2(-0.5, -0.5), vec2(0.5, 0.5), {7, 7});
  Congruence c(Signature(4), 2, b, plane_map_from_immersion(Bump{}, 2));
  CHECK_THROWS_AS(kernel_splitting(c), RankNotConstant);
  try {
    kernel_splitting(c);
  } catch (const RankNotConstant& e) {
    CHECK(!e.nodes.empty());
  }
}

TEST_CASE("symmetry condition: immersion witness") {
  Scenario s = make_scenario("torus-r4");
  Congruence c = make_congruence(s);
  Vec x = vec2(0.3, 1.7);
  SymmetryReport rep = check_symmetry(c, x);
  CHECK(rep.status == SymmetryStatus::FeasibleInvertible);
  // dphi itself satisfies the constraints.
  Jet j = c.jet(x);
  Mat G = c.signature().matrix();
  Vec vc(4);
  for (int q = 0; q < 2; ++q) {
    Vec d = central_partial(s.immersion, x, q, 1e-5);
    vc.segment(2 * q, 2) = j.J * j.F.transpose() * G * d;
  }
  CHECK((rep.system * vc).norm() < 1e-8);
  // Witness satisfies the constraints and is tangent.
  Mat C = j.J * j.F.transpose() * G * rep.witness;
  Vec wc = Eigen::Map<Vec>(C.data(), 4);
  CHECK((rep.system * wc).norm() < 1e-10);
}

TEST_CASE("symmetry condition: curves and a dense oracle") {
  Congruence curve = scenario("latitude-curve");
  Vec t(1);
  t << 2.0;
  SymmetryReport rc = check_symmetry(curve, t);
  CHECK(rc.status == SymmetryStatus::FeasibleInvertible);
  CHECK(rc.solution_dim == 1);

  ScenarioParams p;
  p.plane_amplitude = 0.4;
  for (unsigned seed : {1u, 2u, 3u}) {
    p.seed = seed;
    Congruence c = scenario("random-fourier", p);
    Vec x = vec2(1.0, 4.0);
    SymmetryReport rep = check_symmetry(c, x);
    // Independent formulation in normal coordinates: rows N^T (U_0 c_1 - U_1 c_0).
    Jet j = c.jet(x);
    Mat N = j.plane(c.signature()).normal_frame();
    Mat A(2, 4);
    A.block(0, 0, 2, 2) = -N.transpose() * j.U[1].map;
    A.block(0, 2, 2, 2) = N.transpose() * j.U[0].map;
    Eigen::FullPivLU<Mat> lu(A);
    CHECK(rep.solution_dim == 4 - lu.rank());
    CHECK(rep.status != SymmetryStatus::Infeasible);
  }
}

TEST_CASE("Lagrangian residuals") {
  Congruence sphere = scenario("sphere-gauss");
  LagrangianReport ls = check_lagrangian(sphere, vec2(1.4, 0.3));
  CHECK(ls.pullback_omega < 1e-8);
  CHECK(ls.normal_flatness < 1e-12);

  Congruence cl = scenario("clifford-torus");
  CHECK(check_lagrangian(cl, vec2(0.4, 0.9)).pullback_omega < 1e-12);

  std::vector<double> amps{0.01, 0.02, 0.04}, res;
  for (double a : amps) {
    ScenarioParams p;
    p.amplitude = a;
    LagrangianReport lr = check_lagrangian(scenario("random-fourier", p), vec2(1.0, 2.0));
    CHECK(lr.kernel_part == doctest::Approx(lr.pullback_omega).epsilon(1e-9));
    res.push_back(lr.pullback_omega);
  }
  CHECK(res[0] > 1e-4);
  CHECK(res[1] / res[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(res[2] / res[0] == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("shape operator of the sphere and duality with h") {
  Scenario s = make_scenario("sphere-gauss");
  Congruence c = make_congruence(s);
  Vec x = vec2(1.2, 0.5);
  Jet j = c.jet(x);
  Vec sigma = s.immersion(x) - Vec(Eigen::Vector4d(0.3, -0.2, 0.1, 0.25));
  for (int i = 0; i < 2; ++i) {
    Vec X = Vec::Unit(2, i);
    Vec dphi = central_partial(s.immersion, x, i, 1e-5);
    CHECK((shape_B(c, j, sigma, X) + dphi).norm() < 1e-9);
    CHECK(shape_B(c, j, Vec::Zero(4), X).norm() == 0.0);
  }
  CHECK_THROWS_AS(shape_B(c, j, j.F.col(0), vec2(1, 0)), Error);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Congruence t = scenario("random-fourier", {5, 0.1, 0.3});
  for (int trial = 0; trial < 10; ++trial) {
    Vec y = vec2(1.0 + 0.3 * trial, 2.0 - 0.1 * trial);
    Jet jt = t.jet(y);
    Vec w(4);
    for (int a = 0; a < 4; ++a) w[a] = nd(rng);
    auto Y = [&](const Vec& z) { return Vec(t.jet(z).P * (w + z[0] * Vec::Unit(4, 1) + z[1] * z[1] * Vec::Unit(4, 3))); };
    Vec xi = jt.Q * Vec::Random(4);
    Vec X = vec2(nd(rng), nd(rng));
    Vec h = second_fundamental_h(t, y, X, Y);
    CHECK(std::abs(h.dot(xi) - shape_B(t, jt, xi, X).dot(Y(y))) < 1e-8);
    // Tensoriality in xi.
    double f = 1.0 + y[0] * y[1];
    CHECK((shape_B(t, jt, f * xi, X) - f * shape_B(t, jt, xi, X)).norm() < 1e-12);
  }
}

TEST_CASE("metric from the support") {
  Scenario s = make_scenario("sphere-gauss");
  Congruence c = make_congruence(s);
  Vec x = vec2(1.1, -0.4);
  Jet j = c.jet(x);
  Vec support = j.Q * s.immersion(x);
  Mat g = metric_at(c, j, support);
  CHECK(g(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g(1, 1) == doctest::Approx(std::sin(x[0]) * std::sin(x[0])).epsilon(1e-12));
  CHECK(std::abs(g(0, 1)) < 1e-12);
  // Focal support: the normal plane through the centre.
  Vec centre = Eigen::Vector4d(0.3, -0.2, 0.1, 0.25);
  CHECK_THROWS_AS(metric_at(c, j, Vec(j.Q * centre)), Error);

  Congruence flat = constant_congruence();
  Mat gi = metric_at(flat, vec2(0.3, 0.6), Vec::Zero(4));
  CHECK((gi - Mat::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("flat normal bundle: shape operators commute") {
  Scenario s = make_scenario("torus-r4");
  Congruence c = make_congruence(s);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    Vec x = vec2(0.5 * trial, 1.0 + 0.2 * trial);
    Jet j = c.jet(x);
    Vec nu = j.Q * Vec::Random(4), nu2 = j.Q * Vec::Random(4);
    Vec X = vec2(nd(rng), nd(rng)), Y = vec2(nd(rng), nd(rng));
    double lhs = shape_B(c, j, nu, X).dot(shape_B(c, j, nu2, Y));
    double rhs = shape_B(c, j, nu2, X).dot(shape_B(c, j, nu, Y));
    CHECK(std::abs(lhs - rhs) < 1e-12);
    // With Phi = dphi the operators Phi^{-1} B(nu) are symmetric and commute.
    Mat Phi(4, 2);
    for (int q = 0; q < 2; ++q) Phi.col(q) = central_partial(s.immersion, x, q, 1e-6);
    auto op = [&](const Vec& v) {
      Mat B(4, 2);
      for (int q = 0; q < 2; ++q) B.col(q) = shape_B(c, j, v, Vec::Unit(2, q));
      return Mat(Phi.colPivHouseholderQr().solve(B));
    };
    Mat A1 = op(nu), A2 = op(nu2);
    Mat g = Phi.transpose() * Phi;
    CHECK(((g * A1) - (g * A1).transpose()).norm() < 1e-8);
    CHECK((A1 * A2 - A2 * A1).norm() < 1e-8);
  }
}
