#include "congruence_kit/numerics.hpp"

#include <algorithm>
#include <stdexcept>

namespace ck {

double pairwise_sum(const double* a, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(a, h) + pairwise_sum(a + h, n - h);
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm)) throw Error("adaptive_simpson: non-finite integrand");
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  // Split once so that symmetric integrands cannot fool the first estimate.
  double m = 0.5 * (a + b);
  double flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  (void)whole;
  double r = simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, max_depth) +
             simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, max_depth);
  if (!std::isfinite(r)) throw Error("adaptive_simpson: non-finite result");
  return r;
}

std::vector<double> simpson_weights(int n, double h) {
  if (n % 2) ++n;
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
  for (double& x : w) x *= h / 3.0;
  return w;
}

double composite_simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n < 2) n = 2;
  if (n % 2) ++n;
  double h = (b - a) / n;
  std::vector<double> w = simpson_weights(n, h);
  std::vector<double> terms(n + 1);
  for (int i = 0; i <= n; ++i) terms[i] = w[i] * f(a + i * h);
  return pairwise_sum(terms);
}

Vec rk4_adaptive(const std::function<Vec(double, const Vec&)>& f, double t0, double t1, Vec y, double tol, double h0,
                 int max_steps) {
  double t = t0;
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  double h = dir * std::min(std::abs(h0), std::abs(t1 - t0));
  if (h == 0.0) return y;
  auto step = [&](double tt, const Vec& yy, double hh) {
    Vec k1 = f(tt, yy);
    Vec k2 = f(tt + 0.5 * hh, yy + 0.5 * hh * k1);
    Vec k3 = f(tt + 0.5 * hh, yy + 0.5 * hh * k2);
    Vec k4 = f(tt + hh, yy + hh * k3);
    return Vec(yy + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  };
  for (int it = 0; it < max_steps; ++it) {
    if (dir * (t1 - t) <= 0.0) return y;
    if (dir * (t + h - t1) > 0.0) h = t1 - t;
    Vec big = step(t, y, h);
    Vec half = step(t, y, 0.5 * h);
    Vec small = step(t + 0.5 * h, half, 0.5 * h);
    double err = (small - big).cwiseAbs().maxCoeff() / 15.0;
    if (err <= tol || std::abs(h) < 1e-12) {
      t += h;
      y = small + (small - big) / 15.0;
      double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 4.0;
      h *= std::clamp(grow, 0.2, 4.0);
    } else {
      h *= std::clamp(0.9 * std::pow(tol / err, 0.2), 0.1, 0.5);
    }
  }
  throw Error("rk4_adaptive: step budget exhausted");
}

double golden_section_min(const std::function<double(double)>& f, double a, double b, double tol) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (std::abs(b - a) > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double bisect(const std::function<double(double)>& f, double a, double b, double tol) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw Error("bisect: no sign change on the bracket");
  while (std::abs(b - a) >= tol) {
    double m = 0.5 * (a + b);
    double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)), d_(x_.size()) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw Error("Pchip: need at least two matching samples");
  std::vector<double> h(n - 1), del(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    if (h[i] <= 0.0) throw Error("Pchip: abscissae must increase");
    del[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  if (n == 2) {
    d_[0] = d_[1] = del[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (del[i - 1] * del[i] <= 0.0) {
      d_[i] = 0.0;
    } else {
      double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
    }
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(d) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return d;
  };
  d_[0] = end_slope(h[0], h[1], del[0], del[1]);
  d_[n - 1] = end_slope(h[n - 2], h[n - 3 < n ? n - 3 : 0], del[n - 2], del[n - 3 < n ? n - 3 : 0]);
}

double Pchip::operator()(double t) const {
  std::size_t n = x_.size();
  std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin());
  i = i == 0 ? 0 : i - 1;
  if (i >= n - 1) i = n - 2;
  double h = x_[i + 1] - x_[i];
  double s = (t - x_[i]) / h;
  double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error("fit_line: need at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = y[i] - (f.intercept + f.slope * x[i]);
    sse += e * e;
  }
  f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
  return f;
}

}  // namespace ck
