#include "congruence_kit/curves.hpp"

#include "congruence_kit/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace ck {

namespace {

Vec cross(const Vec& a, const Vec& b) {
  Vec c(3);
  c << a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0];
  return c;
}

constexpr int kTableNodes = 257;

}  // namespace

// ---------------------------------------------------------------- SphereCurve

CurveJet SphereCurve::raw_jet(double t) const {
  D2 x{Dual<double>(t, 1.0), Dual<double>(1.0, 0.0)};
  VecT<D2> y = alpha_(x);
  CurveJet j;
  j.a.resize(dim_);
  j.da.resize(dim_);
  j.dda.resize(dim_);
  for (int i = 0; i < dim_; ++i) {
    j.a[i] = y[i].v.v;
    j.da[i] = y[i].v.d;
    j.dda[i] = y[i].d.d;
  }
  return j;
}

void SphereCurve::build() {
  double worst = 0.0;
  for (int i = 0; i < kTableNodes; ++i) {
    double t = t0_ + (t1_ - t0_) * i / (kTableNodes - 1);
    CurveJet j = raw_jet(t);
    if (std::abs(j.a.norm() - 1.0) > 1e-8) throw Error("SphereCurve: alpha leaves the unit sphere");
    worst = std::max(worst, std::abs(j.da.norm() - 1.0));
  }
  if (worst <= 1e-6) {
    length_ = t1_ - t0_;
    return;
  }
  reparam_ = true;
  auto speed = [this](double t) { return raw_jet(t).da.norm(); };
  t_table_.resize(kTableNodes);
  s_table_.assign(kTableNodes, 0.0);
  for (int i = 0; i < kTableNodes; ++i) t_table_[i] = t0_ + (t1_ - t0_) * i / (kTableNodes - 1);
  for (int i = 1; i < kTableNodes; ++i) {
    double seg = adaptive_simpson(speed, t_table_[i - 1], t_table_[i], 1e-13);
    if (!(seg > 0.0)) throw Error("SphereCurve: parametrization is not regular");
    s_table_[i] = s_table_[i - 1] + seg;
  }
  length_ = s_table_.back();
  inverse_ = std::make_shared<Pchip>(s_table_, t_table_);
}

double SphereCurve::t_of_s(double s) const {
  if (!reparam_) return t0_ + s;
  double t = (*inverse_)(s);
  auto speed = [this](double u) { return raw_jet(u).da.norm(); };
  for (int it = 0; it < 30; ++it) {
    auto jt = std::upper_bound(t_table_.begin(), t_table_.end(), t);
    std::size_t j = jt == t_table_.begin() ? 0 : static_cast<std::size_t>(jt - t_table_.begin()) - 1;
    j = std::min<std::size_t>(j, t_table_.size() - 1);
    double S = s_table_[j] + adaptive_simpson(speed, t_table_[j], t, 1e-13);
    double step = (S - s) / speed(t);
    t -= step;
    if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(t))) break;
  }
  return t;
}

CurveJet SphereCurve::jet(double s) const {
  if (!reparam_) return raw_jet(t0_ + s);
  const double t = t_of_s(s);
  CurveJet r = raw_jet(t);
  const double sp = r.da.norm();
  const double dt = 1.0 / sp;
  const double ddt = -r.da.dot(r.dda) / (sp * sp * sp * sp);
  CurveJet j;
  j.a = r.a;
  j.da = r.da * dt;
  j.dda = r.dda * dt * dt + r.da * ddt;
  return j;
}

double SphereCurve::lambda(double s) const { return lambda_(Dual<double>(t_of_s(s), 0.0)).v; }

double SphereCurve::dlambda(double s) const {
  const double t = t_of_s(s);
  double dt = reparam_ ? 1.0 / raw_jet(t).da.norm() : 1.0;
  return lambda_(Dual<double>(t, 1.0)).d * dt;
}

// ---------------------------------------------------------------- Frenet

Frenet frenet_s2(const SphereCurve& c, double s) {
  if (c.dim() != 3) throw DimensionMismatch("frenet_s2: curve must lie in S^2");
  CurveJet j = c.jet(s);
  if (std::abs(j.da.norm() - 1.0) > 1e-6) throw Error("frenet_s2: curve is not parametrized by arclength");
  Frenet f;
  f.nu = cross(j.a, j.da);
  f.kappa = j.dda.dot(f.nu);
  Vec dnu = cross(j.a, j.dda);
  f.residual_alpha = (j.dda - f.kappa * f.nu + j.a).norm();
  f.residual_nu = (dnu + f.kappa * j.da).norm();
  return f;
}

// ---------------------------------------------------------------- closed form

namespace {

double kappa_at(const SphereCurve& c, double s) {
  CurveJet j = c.jet(s);
  return j.dda.dot(cross(j.a, j.da));
}

}  // namespace

CurveSolution::Value CurveSolution::at(double sv) const {
  const SphereCurve& c = *curve;
  const double h = s[1] - s[0];
  std::size_t j = static_cast<std::size_t>(std::clamp(std::floor(sv / h), 0.0, static_cast<double>(s.size() - 2)));
  auto kap = [&](double u) { return kappa_at(c, u); };
  auto th = [&](double u) { return theta_table[j] + adaptive_simpson(kap, s[j], u, 1e-12); };
  Value v;
  v.theta = th(sv);
  double ic = ic_table[j] + adaptive_simpson([&](double u) { return c.lambda(u) * std::cos(th(u)); }, s[j], sv, 1e-12);
  double is = is_table[j] + adaptive_simpson([&](double u) { return c.lambda(u) * std::sin(th(u)); }, s[j], sv, 1e-12);
  std::complex<double> z = std::exp(std::complex<double>(0.0, v.theta)) *
                           (std::complex<double>(B0, A0) - std::complex<double>(is, ic));
  v.B = z.real();
  v.A = z.imag();
  CurveJet cj = c.jet(sv);
  v.gamma = c.lambda(sv) * cj.a + v.A * cj.da + v.B * cross(cj.a, cj.da);
  return v;
}

CurveSolution solve_curve_closed_form(const SphereCurve& c, double A0, double B0, int nodes, double quad_tol) {
  if (c.dim() != 3) throw DimensionMismatch("solve_curve_closed_form: curve must lie in S^2");
  if (nodes < 5) throw Error("solve_curve_closed_form: need at least 5 nodes");
  CurveSolution sol;
  sol.curve = &c;
  sol.A0 = A0;
  sol.B0 = B0;
  const double L = c.length();
  sol.s.resize(nodes);
  for (int i = 0; i < nodes; ++i) sol.s[i] = L * i / (nodes - 1);
  sol.theta_table.assign(nodes, 0.0);
  sol.ic_table.assign(nodes, 0.0);
  sol.is_table.assign(nodes, 0.0);
  auto kap = [&](double u) { return kappa_at(c, u); };
  for (int i = 1; i < nodes; ++i) {
    const double a = sol.s[i - 1], th0 = sol.theta_table[i - 1];
    auto th = [&](double u) { return th0 + adaptive_simpson(kap, a, u, quad_tol); };
    auto fc = [&](double u) {
      double l = c.lambda(u);
      if (!std::isfinite(l)) throw Error("solve_curve_closed_form: lambda is not finite");
      return l * std::cos(th(u));
    };
    auto fs = [&](double u) { return c.lambda(u) * std::sin(th(u)); };
    sol.theta_table[i] = th(sol.s[i]);
    sol.ic_table[i] = sol.ic_table[i - 1] + adaptive_simpson(fc, a, sol.s[i], quad_tol);
    sol.is_table[i] = sol.is_table[i - 1] + adaptive_simpson(fs, a, sol.s[i], quad_tol);
  }
  for (int i = 0; i < nodes; ++i) {
    std::complex<double> z = std::exp(std::complex<double>(0.0, sol.theta_table[i])) *
                             (std::complex<double>(B0, A0) - std::complex<double>(sol.is_table[i], sol.ic_table[i]));
    sol.B.push_back(z.real());
    sol.A.push_back(z.imag());
    sol.theta.push_back(sol.theta_table[i]);
    sol.kappa.push_back(kap(sol.s[i]));
    CurveJet cj = c.jet(sol.s[i]);
    sol.gamma.push_back(c.lambda(sol.s[i]) * cj.a + sol.A.back() * cj.da + sol.B.back() * cross(cj.a, cj.da));
  }
  // System residual at interior nodes, Richardson differences of the closed form.
  const double h = std::min(1e-3, 0.25 * (sol.s[1] - sol.s[0]));
  for (int i = 1; i + 1 < nodes; ++i) {
    const double t = sol.s[i];
    auto d = [&](double step) {
      auto p = sol.at(t + step), m = sol.at(t - step);
      return std::pair<double, double>((p.A - m.A) / (2 * step), (p.B - m.B) / (2 * step));
    };
    auto d1 = d(h), d2 = d(0.5 * h);
    double dA = (4 * d2.first - d1.first) / 3, dB = (4 * d2.second - d1.second) / 3;
    double k = sol.kappa[i], l = c.lambda(t);
    sol.system_residual = std::max({sol.system_residual, std::abs(dA - (sol.B[i] * k - l)), std::abs(dB + sol.A[i] * k)});
  }
  return sol;
}

RkCurve solve_curve_rk4(const SphereCurve& c, double A0, double B0, const std::vector<double>& at, double tol) {
  auto f = [&](double s, const Vec& y) {
    Vec d(2);
    double k = kappa_at(c, s);
    d << y[1] * k - c.lambda(s), -y[0] * k;
    return d;
  };
  RkCurve out;
  Vec y(2);
  y << A0, B0;
  double s = 0.0;
  for (double target : at) {
    if (target > s) y = rk4_adaptive(f, s, target, y, tol, 1e-2);
    s = target;
    out.s.push_back(target);
    out.A.push_back(y[0]);
    out.B.push_back(y[1]);
  }
  return out;
}

std::pair<double, double> curve_rk4_fixed(const SphereCurve& c, double A0, double B0, double s_end, int n) {
  auto f = [&](double s, const Vec& y) {
    Vec d(2);
    double k = kappa_at(c, s);
    d << y[1] * k - c.lambda(s), -y[0] * k;
    return d;
  };
  Vec y(2);
  y << A0, B0;
  y = rk4<Vec>(f, 0.0, s_end, y, n);
  return {y[0], y[1]};
}

// ---------------------------------------------------------------- regularity

RegularityReport regularity_scan(const CurveSolution& sol, double tol) {
  const SphereCurve& c = *sol.curve;
  RegularityReport rep;
  auto g = [&](double s) { return sol.at(s).A - c.dlambda(s); };
  std::vector<double> gv(sol.s.size());
  double gmax = 0.0;
  for (std::size_t i = 0; i < sol.s.size(); ++i) {
    gv[i] = sol.A[i] - c.dlambda(sol.s[i]);
    gmax = std::max(gmax, std::abs(gv[i]));
  }
  auto gamma_speed = [&](double s) {
    const double L = c.length();
    double h = std::min({1e-3, s, L - s});
    if (h < 1e-6) h = 1e-6;
    auto cd = [&](double st) { return Vec((sol.at(s + st).gamma - sol.at(s - st).gamma) / (2 * st)); };
    return Vec((4.0 * cd(0.5 * h) - cd(h)) / 3.0);
  };
  if (gmax < 1e-12) {
    rep.degenerate = true;
    return rep;
  }
  for (std::size_t i = 0; i + 1 < gv.size(); ++i) {
    if (gv[i] == 0.0) {
      rep.roots.push_back(sol.s[i]);
    } else if (gv[i] * gv[i + 1] < 0.0) {
      rep.roots.push_back(bisect(g, sol.s[i], sol.s[i + 1], tol));
    }
  }
  if (gv.back() == 0.0) rep.roots.push_back(sol.s.back());
  const double L = c.length();
  for (double r : rep.roots) rep.gamma_speed.push_back(r > 1e-3 && r < L - 1e-3 ? gamma_speed(r).norm() : std::abs(g(r)));
  for (std::size_t i = 1; i + 1 < sol.s.size(); i += std::max<std::size_t>(1, sol.s.size() / 40)) {
    double s = sol.s[i];
    if (s < 1e-3 || s > L - 1e-3) continue;
    Vec gp = gamma_speed(s);
    Vec pred = (c.dlambda(s) - sol.A[i]) * c.jet(s).a;
    rep.collinearity_residual = std::max(rep.collinearity_residual, (gp - pred).norm());
  }
  return rep;
}

Equidistance equidistance_check(const CurveSolution& a, const CurveSolution& b) {
  if (a.curve != b.curve || a.s.size() != b.s.size()) throw Error("equidistance_check: solutions of different problems");
  Equidistance e;
  double lo = 1e300, hi = 0.0;
  for (std::size_t i = 0; i < a.s.size(); ++i) {
    Vec d = a.gamma[i] - b.gamma[i];
    double n = d.norm();
    lo = std::min(lo, n);
    hi = std::max(hi, n);
    e.alpha_component = std::max(e.alpha_component, std::abs(d.dot(a.curve->jet(a.s[i]).a)));
  }
  e.deviation = hi - lo;
  e.distance = (a.gamma[0] - b.gamma[0]).norm();
  const double L = a.curve->length();
  for (std::size_t i = 1; i + 1 < a.s.size(); i += std::max<std::size_t>(1, a.s.size() / 40)) {
    double s = a.s[i];
    double h = std::min(1e-3, std::min(s, L - s) * 0.5);
    auto d2 = [&](double t) { return (a.at(t).gamma - b.at(t).gamma).squaredNorm(); };
    auto cd = [&](double st) { return (d2(s + st) - d2(s - st)) / (2 * st); };
    e.derivative = std::max(e.derivative, std::abs((4.0 * cd(0.5 * h) - cd(h)) / 3.0));
  }
  return e;
}

// ---------------------------------------------------------------- R^m

Vec support_from_frame(const SphereCurve& c, double A0, double B0) {
  if (c.dim() != 3) throw DimensionMismatch("support_from_frame: curve must lie in S^2");
  CurveJet j = c.jet(0.0);
  return A0 * j.da + B0 * cross(j.a, j.da);
}

CurveRm solve_curve_ode_rm(const SphereCurve& c, const Vec& s0, int nodes, double tol) {
  if (s0.size() != c.dim()) throw DimensionMismatch("solve_curve_ode_rm: initial support has the wrong size");
  CurveJet j0 = c.jet(0.0);
  if (std::abs(j0.a.dot(s0)) > 1e-10 * std::max(1.0, s0.norm()))
    throw Error("solve_curve_ode_rm: initial support is not orthogonal to alpha");
  if (std::abs(j0.da.norm() - 1.0) > 1e-6 || j0.da.norm() < 1e-8)
    throw Error("solve_curve_ode_rm: degenerate frame at the initial point");
  auto f = [&](double s, const Vec& y) {
    CurveJet j = c.jet(s);
    return Vec(-c.lambda(s) * j.da - y.dot(j.da) * j.a);
  };
  CurveRm out;
  const double L = c.length();
  Vec y = s0;
  double prev = 0.0;
  for (int i = 0; i < nodes; ++i) {
    double s = L * i / (nodes - 1);
    if (s > prev) y = rk4_adaptive(f, prev, s, y, tol, 1e-2);
    prev = s;
    CurveJet j = c.jet(s);
    out.s.push_back(s);
    out.support.push_back(y);
    out.gamma.push_back(c.lambda(s) * j.a + y);
    out.alpha_residual = std::max(out.alpha_residual, std::abs(y.dot(j.a)));
  }
  const double h = L / (nodes - 1);
  for (int i = 3; i + 3 < nodes; ++i) {
    const auto& g = out.gamma;
    Vec gp = (45.0 * (g[i + 1] - g[i - 1]) - 9.0 * (g[i + 2] - g[i - 2]) + (g[i + 3] - g[i - 3])) / (60.0 * h);
    Vec a = c.jet(out.s[i]).a;
    out.orthogonality_residual = std::max(out.orthogonality_residual, (gp - gp.dot(a) * a).norm());
  }
  return out;
}

// ---------------------------------------------------------------- catalog

SphereCurve curve_scenario(const std::string& key, double lambda_c, double lambda_a, bool slow, double length) {
  SineLambda lam{lambda_c, lambda_a};
  if (key == "great-circle-curve") return SphereCurve::make(GreatCircle{}, lam, 0.0, length);
  if (key == "latitude-curve") {
    if (slow) return SphereCurve::make(SlowLatitude{0.9}, lam, 0.0, length);
    return SphereCurve::make(LatitudeCircle{0.9}, lam, 0.0, length);
  }
  throw Error("curve_scenario: unknown curve scenario '" + key + "'");
}

}  // namespace ck
