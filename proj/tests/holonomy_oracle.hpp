#pragma once

// Finite-difference holonomy of the projection connection, used as an
// independent reference for curvature formulas.

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;

// Family of planes span(F0 + s U + t V); returns P and its derivative along
// the direction (ds, dt).
inline void projector_and_rate(const Mat& f0, const Mat& u, const Mat& v, double s, double t, double ds, double dt,
                               Mat& P, Mat& dP) {
  Mat F = f0 + s * u + t * v;
  Mat dF = ds * u + dt * v;
  Mat G = F.transpose() * F;
  Mat Gi = G.inverse();
  Mat dG = dF.transpose() * F + F.transpose() * dF;
  P = F * Gi * F.transpose();
  dP = dF * Gi * F.transpose() + F * Gi * dF.transpose() - F * Gi * dG * Gi * F.transpose();
}

// Parallel transport matrix (xi' = P' xi for the plane bundle, xi' = -P' xi
// for the complement) along the straight segment a -> b.
inline Mat transport_segment(const Mat& f0, const Mat& u, const Mat& v, std::array<double, 2> a,
                             std::array<double, 2> b, bool tangent, int steps) {
  const int m = static_cast<int>(f0.rows());
  Mat X = Mat::Identity(m, m);
  const double ds = b[0] - a[0], dt = b[1] - a[1];
  const double sign = tangent ? 1.0 : -1.0;
  auto rhs = [&](double tau, const Mat& Y) {
    Mat P, dP;
    projector_and_rate(f0, u, v, a[0] + tau * ds, a[1] + tau * dt, ds, dt, P, dP);
    return Mat(sign * dP * Y);
  };
  const double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) {
    double tau = i * h;
    Mat k1 = rhs(tau, X);
    Mat k2 = rhs(tau + 0.5 * h, X + 0.5 * h * k1);
    Mat k3 = rhs(tau + 0.5 * h, X + 0.5 * h * k2);
    Mat k4 = rhs(tau + h, X + h * k3);
    X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return X;
}

// Holonomy around a loop: centre -> bottom midpoint -> square of side h
// (counter-clockwise) -> back to the centre.
inline Mat lasso_holonomy(const Mat& f0, const Mat& u, const Mat& v, double h, bool tangent, int steps = 8) {
  const double r = 0.5 * h;
  std::vector<std::array<double, 2>> pts = {{0.0, 0.0}, {0.0, -r}, {r, -r}, {r, r}, {-r, r}, {-r, -r}, {0.0, -r}, {0.0, 0.0}};
  const int m = static_cast<int>(f0.rows());
  Mat H = Mat::Identity(m, m);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) H = transport_segment(f0, u, v, pts[i], pts[i + 1], tangent, steps) * H;
  return H;
}

// Curvature estimate R(u, v) ~ (I - Hol) / h^2 restricted to the bundle,
// Richardson-extrapolated from h and h/2.
inline Mat holonomy_curvature(const Mat& f0, const Mat& u, const Mat& v, double h, bool tangent) {
  const int m = static_cast<int>(f0.rows());
  Mat P = f0 * f0.transpose();
  Mat B = tangent ? P : Mat(Mat::Identity(m, m) - P);
  auto est = [&](double hh) {
    Mat H = lasso_holonomy(f0, u, v, hh, tangent);
    return Mat(B * (Mat::Identity(m, m) - H) * B / (hh * hh));
  };
  Mat r1 = est(h), r2 = est(0.5 * h);
  return (4.0 * r2 - r1) / 3.0;
}

}  // namespace oracle
