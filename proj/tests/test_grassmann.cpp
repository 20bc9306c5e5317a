#include <doctest.h>

#include "congruence_kit/grassmann.hpp"
#include "holonomy_oracle.hpp"

#include <cmath>
#include <random>

using namespace ck;

namespace {

Mat random_orthonormal(int m, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
  return OrientedPlane::from_columns(Signature(m), a).frame;
}

GrassTangent random_tangent(const OrientedPlane& p, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat a(p.m(), p.n());
  for (int i = 0; i < p.m(); ++i)
    for (int j = 0; j < p.n(); ++j) a(i, j) = nd(rng);
  return GrassTangent{p.normal_projector() * a};
}

}  // namespace

TEST_CASE("eta to linear map: explicit example") {
  Signature s(4);
  OrientedPlane p(s, Mat::Identity(4, 2));
  Multivector eta = wedge(Multivector::basis(s, 2), Multivector::basis(s, 1));
  GrassTangent u = eta_to_linmap(p, eta);
  CHECK((u.map.col(0) - Vec::Unit(4, 2)).norm() < 1e-15);
  CHECK(u.map.col(1).norm() < 1e-15);
  CHECK(eta_to_linmap(p, Multivector(s)).map.norm() == 0.0);
}

TEST_CASE("eta to linear map round trip and tangency check") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    OrientedPlane p(Signature(5), random_orthonormal(5, 2, rng));
    GrassTangent u = random_tangent(p, rng);
    Multivector eta = linmap_to_eta(p, u);
    GrassTangent back = eta_to_linmap(p, eta);
    CHECK((back.map - u.map).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((linmap_to_eta(p, back) - eta).max_abs() < 1e-12);
  }
  OrientedPlane p(Signature(4), Mat::Identity(4, 2));
  CHECK_THROWS_AS(eta_to_linmap(p, p.blade()), Error);
}

TEST_CASE("alpha definitions agree on consistent tangent vectors") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 100; ++t) {
    int m = 3 + t % 3, n = 1 + t % (m - 1);
    Signature s(m);
    OrientedPlane p(s, random_orthonormal(m, n, rng));
    GrassTangent u = random_tangent(p, rng);
    Vec a(n), da(n);
    for (int j = 0; j < n; ++j) a[j] = nd(rng), da[j] = nd(rng);
    // Foot v(t) = F(t) a(t) with F(t) = F + t U; differentiate at t = 0.
    Vec v = p.frame * a;
    Vec w = u.map * a + p.frame * da;
    AffinePlane ap(p, v);
    AlphaValue al = alpha(ap, u, w);
    CHECK(al.deviation < 1e-9);
    CHECK((al.def1 - u.map * a).norm() < 1e-12);
  }
}

TEST_CASE("alpha on the zero section and inconsistent input") {
  Signature s(4);
  OrientedPlane p(s, Mat::Identity(4, 2));
  AffinePlane zero(p, Vec::Zero(4));
  GrassTangent u{Mat::Zero(4, 2)};
  u.map(2, 0) = 1.0;
  CHECK(alpha(zero, u, Vec::Unit(4, 0)).def1.norm() == 0.0);
  AffinePlane ap(p, Vec::Unit(4, 0));
  CHECK_THROWS_AS(alpha(ap, GrassTangent{Mat::Zero(4, 2)}, Vec::Unit(4, 3)), Error);
}

TEST_CASE("hypersurface case reduces to the classical form") {
  // m = n + 1: the unit normal N plays the role of p_o.
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    Signature s(3);
    OrientedPlane p(s, random_orthonormal(3, 2, rng));
    Vec N = p.normal_frame().col(0);
    GrassTangent u = random_tangent(p, rng);
    Vec v = p.frame * Vec::Random(2);
    Vec al = -interior(p.blade(), wedge(linmap_to_eta(p, u), Multivector::vector(s, v)));
    // The derivative of N along u is -u^*(N).
    Vec dN = -u.adjoint(p) * N;
    CHECK((al - (-dN.dot(v)) * N).norm() < 1e-12);
  }
}

TEST_CASE("curvature operator basics") {
  std::mt19937_64 rng(4);
  OrientedPlane p(Signature(4), random_orthonormal(4, 2, rng));
  GrassTangent u = random_tangent(p, rng), v = random_tangent(p, rng);
  CHECK(curvature(p, u, u).full.cwiseAbs().maxCoeff() < 1e-14);
  CurvatureOperator r = curvature(p, u, v);
  Mat P = p.tangent_projector(), Q = p.normal_projector();
  CHECK((r.full - r.tangent - r.normal).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r.tangent + r.tangent.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r.normal + r.normal.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r.bivector.homogeneous(2, 1e-12));
  // [u, v] lies in L2(p) + L2(p^perp): no mixed components.
  Mat b = bivector_to_matrix(r.bivector);
  CHECK((P * b * Q).cwiseAbs().maxCoeff() < 1e-12);

  OrientedPlane line(Signature(3), random_orthonormal(3, 1, rng));
  CurvatureOperator rl = curvature(line, random_tangent(line, rng), random_tangent(line, rng));
  CHECK(rl.tangent.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("curvature matches finite-difference holonomy") {
  std::mt19937_64 rng(5);
  for (auto [m, n] : {std::pair{4, 2}, std::pair{3, 1}, std::pair{5, 2}, std::pair{5, 3}}) {
    for (int t = 0; t < 5; ++t) {
      OrientedPlane p(Signature(m), random_orthonormal(m, n, rng));
      GrassTangent u = random_tangent(p, rng), v = random_tangent(p, rng);
      CurvatureOperator r = curvature(p, u, v);
      Mat fd_t = oracle::holonomy_curvature(p.frame, u.map, v.map, 1e-3, true);
      Mat fd_n = oracle::holonomy_curvature(p.frame, u.map, v.map, 1e-3, false);
      double scale = r.full.norm();
      CHECK((fd_t - r.tangent).norm() / scale < 1e-4);
      CHECK((fd_n - r.normal).norm() / scale < 1e-4);
    }
  }
}

TEST_CASE("adjoint formula for the normal curvature") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 50; ++t) {
    int m = 4 + t % 3, n = 2;
    OrientedPlane p(Signature(m), random_orthonormal(m, n, rng));
    GrassTangent u = random_tangent(p, rng), v = random_tangent(p, rng);
    Mat a = normal_curvature_adjoint(p, u, v);
    CHECK((a - curvature(p, u, v).normal).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(normal_curvature_adjoint(p, u, u).cwiseAbs().maxCoeff() < 1e-15);
  }
  // Orthogonal images: u maps into span(e3), v into span(e4).
  Signature s(5);
  OrientedPlane p(s, Mat::Identity(5, 2));
  GrassTangent u{Mat::Zero(5, 2)}, v{Mat::Zero(5, 2)};
  u.map(2, 0) = 1.0, u.map(2, 1) = 0.5;
  v.map(3, 1) = 2.0;
  Mat a = normal_curvature_adjoint(p, u, v);
  Eigen::JacobiSVD<Mat> svd(a);
  CHECK(svd.singularValues()[2] < 1e-14);
  CHECK(svd.singularValues()[0] > 0.1);
}

TEST_CASE("shape tensor on the Grassmannian") {
  Signature s(4);
  OrientedPlane p(s, Mat::Identity(4, 2));
  GrassTangent y{Mat::Zero(4, 2)};
  y.map(2, 0) = 1.0;
  CHECK((shape_Bprime(p, Vec::Unit(4, 2), y) - Vec::Unit(4, 0)).norm() < 1e-15);
  CHECK(shape_Bprime(p, Vec::Unit(4, 3), GrassTangent{Mat::Zero(4, 2)}).norm() == 0.0);
  CHECK_THROWS_AS(shape_Bprime(p, Vec::Unit(4, 0), y), Error);
  std::mt19937_64 rng(7);
  for (int t = 0; t < 30; ++t) {
    OrientedPlane q(Signature(5), random_orthonormal(5, 2, rng));
    GrassTangent yy = random_tangent(q, rng);
    Vec xi = q.normal_projector() * Vec::Random(5);
    Vec x = q.frame * Vec::Random(2);
    Vec coeff = q.frame.transpose() * x;
    CHECK(std::abs(shape_Bprime(q, xi, yy).dot(x) - xi.dot(yy.map * coeff)) < 1e-12);
  }
}

TEST_CASE("projection onto plane and complement") {
  Signature s(4);
  OrientedPlane p(s, Mat::Identity(4, 2));
  auto [t, nn] = project(p, Vec::Unit(4, 0) + Vec::Unit(4, 2));
  CHECK((t - Vec::Unit(4, 0)).norm() < 1e-15);
  CHECK((nn - Vec::Unit(4, 2)).norm() < 1e-15);
  auto [t2, n2] = project(p, t);
  CHECK((t2 - t).norm() < 1e-15);
  CHECK(n2.norm() < 1e-15);
}

TEST_CASE("pseudo-orthonormal frames") {
  Signature s(4, 1);
  Mat a(4, 2);
  a << 0.3, 0.1, 1.0, 0.2, 0.0, 1.0, 0.5, 0.0;
  OrientedPlane p = OrientedPlane::from_columns(s, a);
  CHECK(p.orthonormality_residual() < kOrthonormalTol);
  Mat P = p.tangent_projector();
  CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-12);
  Mat nf = p.normal_frame();
  CHECK((p.frame.transpose() * s.matrix() * nf).cwiseAbs().maxCoeff() < 1e-12);
}
