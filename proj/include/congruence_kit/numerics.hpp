#pragma once

#include "congruence_kit/algebra.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace ck {

// Sum in a fixed binary-tree order so results do not depend on thread layout.
double pairwise_sum(const double* a, std::size_t n);
inline double pairwise_sum(const std::vector<double>& a) { return pairwise_sum(a.data(), a.size()); }

// Adaptive Simpson on [a, b] with absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-10,
                        int max_depth = 50);

// Composite Simpson with an even number of panels n (rounded up).
double composite_simpson(const std::function<double(double)>& f, double a, double b, int n);

// Simpson weights for n (even) panels of width h.
std::vector<double> simpson_weights(int n, double h);

// Central difference of f along coordinate i, Richardson-extrapolated from
// steps h and h/2 (error O(h^4)).
template <class F>
auto richardson_partial(F&& f, const Vec& x, int i, double h) {
  auto central = [&](double s) {
    Vec xp = x, xm = x;
    xp[i] += s;
    xm[i] -= s;
    return decltype(f(x))((f(xp) - f(xm)) / (2.0 * s));
  };
  auto d1 = central(h);
  auto d2 = central(0.5 * h);
  return decltype(f(x))((4.0 * d2 - d1) / 3.0);
}

template <class F>
auto central_partial(F&& f, const Vec& x, int i, double h) {
  Vec xp = x, xm = x;
  xp[i] += h;
  xm[i] -= h;
  return decltype(f(x))((f(xp) - f(xm)) / (2.0 * h));
}

// Classical RK4 for y' = f(t, y), n fixed steps from t0 to t1.
template <class Y, class F>
Y rk4(F&& f, double t0, double t1, Y y, int n) {
  const double h = (t1 - t0) / n;
  for (int i = 0; i < n; ++i) {
    double t = t0 + i * h;
    Y k1 = f(t, y);
    Y k2 = f(t + 0.5 * h, Y(y + 0.5 * h * k1));
    Y k3 = f(t + 0.5 * h, Y(y + 0.5 * h * k2));
    Y k4 = f(t + h, Y(y + h * k3));
    y = Y(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  }
  return y;
}

// RK4 with step doubling; local error per step kept below tol.
Vec rk4_adaptive(const std::function<Vec(double, const Vec&)>& f, double t0, double t1, Vec y, double tol,
                 double h0 = 1e-2, int max_steps = 1000000);

// Golden-section minimization of a unimodal f on [a, b].
double golden_section_min(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

// Bisection for a sign change of f on [a, b]; stops when |b - a| < tol.
double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-10);

// Monotone piecewise cubic Hermite interpolant (Fritsch-Carlson).
class Pchip {
 public:
  Pchip(std::vector<double> x, std::vector<double> y);
  double operator()(double t) const;

 private:
  std::vector<double> x_, y_, d_;
};

// Least-squares line y = a + b x with coefficient of determination.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Observed order log2(e(h) / e(h/2)).
inline double observed_order(double e_h, double e_h2) {
  if (e_h2 <= 0.0) return std::numeric_limits<double>::infinity();
  return std::log2(e_h / e_h2);
}

}  // namespace ck
