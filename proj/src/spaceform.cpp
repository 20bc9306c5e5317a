#include "congruence_kit/spaceform.hpp"

#include "congruence_kit/numerics.hpp"
#include "congruence_kit/parallel.hpp"
#include "congruence_kit/reconstruct.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ck {

namespace {

void require_spaceform_signature(const Signature& s) {
  if (s.p != 0 && s.p != 1)
    throw UnsupportedSignature("spaceform: only signatures (0, m) and (1, m - 1) are supported");
}

template <class T>
VecT<T> project_normal(const Signature& s, const PlaneT<T>& pl, const Vec& w) {
  VecT<T> out(s.m);
  for (int a = 0; a < s.m; ++a) out[a] = T(w[a]);
  VecT<T> orig = out;
  for (const auto& f : pl.cols) {
    double sign = value_of(pdot(s, f, f)) < 0.0 ? -1.0 : 1.0;
    T c = pdot(s, orig, f) * sign;
    for (int a = 0; a < s.m; ++a) out[a] -= c * f[a];
  }
  return out;
}

struct RawPair {
  double n1 = 0.0, n2 = 0.0;  // <q1,q1>_p, <r2,r2>_p before normalization
};

template <class T>
std::pair<VecT<T>, VecT<T>> pair_from(const Signature& s, const PlaneT<T>& pl, const Vec& s1, const Vec& s2,
                                      RawPair* raw = nullptr) {
  using std::abs, std::sqrt;
  VecT<T> q1 = project_normal(s, pl, s1);
  T n1 = pdot(s, q1, q1);
  if (raw) raw->n1 = value_of(n1);
  if (!(value_of(n1) > 0.0)) throw Error("FramedNormalPair: first seed is not spacelike in the normal plane");
  T l1 = sqrt(n1);
  for (auto& v : q1) v = v / l1;
  VecT<T> q2 = project_normal(s, pl, s2);
  T c = pdot(s, q2, q1);
  for (int a = 0; a < s.m; ++a) q2[a] -= c * q1[a];
  T n2 = pdot(s, q2, q2);
  if (raw) raw->n2 = value_of(n2);
  T l2 = sqrt(abs(n2));
  if (!(value_of(l2) > 0.0)) throw Error("FramedNormalPair: seeds are dependent in the normal plane");
  for (auto& v : q2) v = v / l2;
  return {q1, q2};
}

Vec to_eigen(const VecT<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

template <class T>
Vec values(const VecT<T>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = value_of(v[i]);
  return out;
}

Vec derivs(const VecT<D1>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i].d;
  return out;
}

}  // namespace

// ---------------------------------------------------------------- hyperquadric

HyperquadricReport check_hyperquadric(const Congruence& c, double tol) {
  const Box& b = c.domain();
  HyperquadricReport rep;
  rep.profile.resize(b.size());
  std::vector<double> bres(b.size(), 0.0);
  parallel_for(b.size(), [&](std::size_t i) {
    Jet j = c.jet(b.point(i));
    rep.profile[i] = j.v.norm();
    bres[i] = beta(j).cwiseAbs().maxCoeff();
  });
  rep.max_foot = *std::max_element(rep.profile.begin(), rep.profile.end());
  rep.contained = rep.max_foot < tol;
  if (rep.contained) rep.beta_residual = *std::max_element(bres.begin(), bres.end());
  return rep;
}

double hyperquadric_residual(const Signature& s, const std::vector<Vec>& phi) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec& p : phi) {
    double q = s.dot(p, p);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  return phi.empty() ? 0.0 : hi - lo;
}

// ---------------------------------------------------------------- frame

FramedNormalPair::FramedNormalPair(const Congruence& c) : c_(&c) {
  require_spaceform_signature(c.signature());
  if (c.k() != 2) throw DimensionMismatch("FramedNormalPair: the normal planes must be 2-dimensional");
  // Pick the pair of coordinate seeds with the best worst-case conditioning.
  const int m = c.m();
  const Box& b = c.domain();
  double best = -1.0;
  for (int a = 0; a < m; ++a) {
    for (int q = 0; q < m; ++q) {
      if (q == a) continue;
      Vec s1 = Vec::Unit(m, a), s2 = Vec::Unit(m, q);
      double worst = std::numeric_limits<double>::infinity();
      double sgn = 0.0;
      bool ok = true;
      for (std::size_t i = 0; i < b.size() && ok; ++i) {
        RawPair raw;
        try {
          pair_from<double>(c.signature(), c.normalized(b.point(i)), s1, s2, &raw);
        } catch (const Error&) {
          ok = false;
          break;
        }
        double sg = raw.n2 < 0.0 ? -1.0 : 1.0;
        if (sgn == 0.0) sgn = sg;
        if (sg != sgn) ok = false;
        worst = std::min({worst, raw.n1, std::abs(raw.n2)});
      }
      if (ok && worst > best) {
        best = worst;
        seed1_ = s1;
        seed2_ = s2;
      }
    }
  }
  if (best <= 1e-6) throw Error("FramedNormalPair: no seed pair gives a regular frame on the grid");
  check_grid();
}

FramedNormalPair::FramedNormalPair(const Congruence& c, Vec seed1, Vec seed2)
    : c_(&c), seed1_(std::move(seed1)), seed2_(std::move(seed2)) {
  require_spaceform_signature(c.signature());
  if (c.k() != 2) throw DimensionMismatch("FramedNormalPair: the normal planes must be 2-dimensional");
  check_grid();
}

void FramedNormalPair::check_grid() {
  const Box& b = c_->domain();
  double sgn = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    RawPair raw;
    pair_from<double>(c_->signature(), c_->normalized(b.point(i)), seed1_, seed2_, &raw);
    double sg = raw.n2 < 0.0 ? -1.0 : 1.0;
    if (sgn == 0.0) sgn = sg;
    if (sg != sgn) throw Error("FramedNormalPair: causal type of e2 changes over the grid");
  }
  eps_ = sgn;
}

NormalFrameAt FramedNormalPair::at(const Vec& x) const {
  const Congruence& c = *c_;
  const Signature& s = c.signature();
  const int n = c.n();
  NormalFrameAt fa;
  PlaneT<double> pl = c.normalized(x);
  auto p = pair_from<double>(s, pl, seed1_, seed2_);
  fa.e1 = to_eigen(p.first);
  fa.e2 = to_eigen(p.second);
  fa.de1.resize(n);
  fa.de2.resize(n);
  const bool analytic = c.mode() == DerivMode::Analytic && static_cast<bool>(c.map().dual);
  for (int i = 0; i < n; ++i) {
    if (analytic) {
      auto pd = pair_from<D1>(s, c.normalized_dual(x, Vec::Unit(n, i)), seed1_, seed2_);
      fa.de1[i] = derivs(pd.first);
      fa.de2[i] = derivs(pd.second);
    } else {
      const double h = c.fd_step();
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      auto pp = pair_from<double>(s, c.normalized(xp), seed1_, seed2_);
      auto pm = pair_from<double>(s, c.normalized(xm), seed1_, seed2_);
      fa.de1[i] = (to_eigen(pp.first) - to_eigen(pm.first)) / (2 * h);
      fa.de2[i] = (to_eigen(pp.second) - to_eigen(pm.second)) / (2 * h);
    }
  }
  fa.mu.resize(n);
  const Mat F = cols_to_mat(pl.cols, s.m);
  const Mat G = s.matrix();
  fa.A1.resize(n, n);
  fa.A2.resize(n, n);
  for (int i = 0; i < n; ++i) {
    fa.mu[i] = s.dot(fa.de2[i], fa.e1);
    fa.A1.col(i) = F.transpose() * G * fa.de1[i];
    fa.A2.col(i) = F.transpose() * G * fa.de2[i];
  }
  return fa;
}

double FramedNormalPair::orthonormality_residual() const {
  const Box& b = c_->domain();
  const Signature& s = c_->signature();
  double worst = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    Vec x = b.point(i);
    NormalFrameAt fa = at(x);
    AffinePlane ap = c_->at(x);
    Mat P = ap.plane.tangent_projector();
    worst = std::max({worst, std::abs(s.dot(fa.e1, fa.e1) - 1.0), std::abs(s.dot(fa.e2, fa.e2) - eps_),
                      std::abs(s.dot(fa.e1, fa.e2)), (P * fa.e1).norm(), (P * fa.e2).norm()});
  }
  return worst;
}

// ---------------------------------------------------------------- theta

double cos_eps(double eps, double t) { return eps > 0 ? std::cos(t) : std::cosh(t); }
double sin_eps(double eps, double t) { return eps > 0 ? std::sin(t) : std::sinh(t); }

namespace {

std::vector<Vec> leaf(const FramedNormalPair& pair, const std::vector<double>& theta, double t) {
  const Box& b = pair.congruence().domain();
  std::vector<Vec> out(b.size());
  const double e = pair.eps();
  parallel_for(b.size(), [&](std::size_t i) {
    NormalFrameAt fa = pair.at(b.point(i));
    out[i] = cos_eps(e, theta[i] + t) * fa.e1 + sin_eps(e, theta[i] + t) * fa.e2;
  });
  return out;
}

// max |Q d phi| over nodes with a +-2 stencil, central differences with the given stride.
double normal_residual(const Congruence& c, const std::vector<Vec>& phi, int stride) {
  const Box& b = c.domain();
  std::vector<double> worst(b.size(), 0.0);
  parallel_for(b.size(), [&](std::size_t nd) {
    for (int a = 0; a < b.dim(); ++a)
      if (b.neighbour(nd, a, 2) < 0 || b.neighbour(nd, a, -2) < 0) return;
    Mat Q = c.at(b.point(nd)).plane.normal_projector();
    for (int a = 0; a < b.dim(); ++a) {
      Vec d = (phi[static_cast<std::size_t>(b.neighbour(nd, a, stride))] -
               phi[static_cast<std::size_t>(b.neighbour(nd, a, -stride))]) /
              (2.0 * stride * b.spacing(a));
      worst[nd] = std::max(worst[nd], (Q * d).norm());
    }
  });
  return *std::max_element(worst.begin(), worst.end());
}

// Richardson exterior derivative of a 1-form given pointwise on R^2.
double exterior_d(const std::function<Vec(const Vec&)>& form, const Vec& x, double h) {
  auto c0 = [&](const Vec& y) { return Vec(Vec::Constant(1, form(y)[1])); };
  auto c1 = [&](const Vec& y) { return Vec(Vec::Constant(1, form(y)[0])); };
  return richardson_partial(c0, x, 0, h)[0] - richardson_partial(c1, x, 1, h)[0];
}

}  // namespace

ThetaSolution theta_equation(const FramedNormalPair& pair, double theta0, double tol) {
  const Congruence& c = pair.congruence();
  if (c.n() != 2) throw DimensionMismatch("theta_equation: implemented for surfaces (n = 2)");
  const Box& b = c.domain();
  ThetaSolution th;
  th.dmu.resize(b.size());
  auto mu = [&](const Vec& y) { return pair.at(y).mu; };
  parallel_for(b.size(), [&](std::size_t i) { th.dmu[i] = exterior_d(mu, b.point(i), c.derived_step()); });
  for (std::size_t i = 0; i < b.size(); ++i)
    if (std::abs(th.dmu[i]) > th.dmu_residual) {
      th.dmu_residual = std::abs(th.dmu[i]);
      th.dmu_node = i;
    }
  th.closed = th.dmu_residual < tol;
  if (!th.closed) return th;

  const double e = pair.eps();
  AxisRhs rhs = [&](const Vec& x, int axis, const Vec&) { return Vec::Constant(1, e * pair.at(x).mu[axis]); };
  const std::size_t base = b.flatten(b.base_index());
  Vec y0 = Vec::Constant(1, theta0);
  auto ya = staircase_integrate(b, base, y0, {0, 1}, rhs);
  auto yb = staircase_integrate(b, base, y0, {1, 0}, rhs);
  th.theta.resize(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    th.theta[i] = ya[i][0];
    th.path_residual = std::max(th.path_residual, std::abs(ya[i][0] - yb[i][0]));
  }
  th.phi = leaf(pair, th.theta, 0.0);
  th.normal_residual = normal_residual(c, th.phi, 1);
  th.normal_residual_coarse = normal_residual(c, th.phi, 2);
  return th;
}

std::vector<Vec> parallel_family(const FramedNormalPair& pair, const ThetaSolution& th, double t) {
  if (th.theta.empty()) throw Error("parallel_family: theta equation was refused");
  return leaf(pair, th.theta, t);
}

// ---------------------------------------------------------------- singular leaves

SingularLeafReport singular_leaf_scan(const FramedNormalPair& pair, const ThetaSolution& th, int sweep,
                                      double rel_tol, double t_range) {
  if (th.theta.empty()) throw Error("singular_leaf_scan: theta equation was refused");
  if (sweep < 4) throw Error("singular_leaf_scan: sweep needs at least 4 samples");
  const Congruence& c = pair.congruence();
  const Box& b = c.domain();
  const double e = pair.eps();
  const bool periodic = e > 0;
  const double lo = periodic ? 0.0 : -t_range;
  const double span = periodic ? M_PI : 2.0 * t_range;
  const double dt = periodic ? span / sweep : span / (sweep - 1);

  SingularLeafReport rep;
  rep.counts.assign(b.size(), 0);
  std::vector<std::vector<double>> roots(b.size());
  std::vector<char> immersed(b.size(), 1);
  double scale_max = 0.0;
  std::vector<double> scales(b.size());
  parallel_for(b.size(), [&](std::size_t nd) {
    Vec x = b.point(nd);
    NormalFrameAt fa = pair.at(x);
    Jet j = c.jet(x);
    Mat U(c.m() * c.n(), c.n());
    for (int i = 0; i < c.n(); ++i) U.col(i) = Eigen::Map<const Vec>(j.U[i].map.data(), j.U[i].map.size());
    Eigen::JacobiSVD<Mat> su(U);
    Vec sv = su.singularValues();
    if (sv[sv.size() - 1] <= 1e-8 * std::max(1.0, sv[0])) immersed[nd] = 0;
    const double theta = th.theta[nd];
    auto smin = [&](double t) {
      Mat T = cos_eps(e, theta + t) * fa.A1 + sin_eps(e, theta + t) * fa.A2;
      Eigen::JacobiSVD<Mat> s(T);
      return s.singularValues()[s.singularValues().size() - 1];
    };
    auto smax = [&](double t) {
      Mat T = cos_eps(e, theta + t) * fa.A1 + sin_eps(e, theta + t) * fa.A2;
      Eigen::JacobiSVD<Mat> s(T);
      return s.singularValues()[0];
    };
    std::vector<double> ts(sweep), vs(sweep);
    double scale = 1.0;
    for (int q = 0; q < sweep; ++q) {
      ts[q] = lo + q * dt;
      vs[q] = smin(ts[q]);
      scale = std::max(scale, smax(ts[q]));
    }
    scales[nd] = scale;
    const double thr = rel_tol * scale;
    for (int q = 0; q < sweep; ++q) {
      int qm = q - 1, qp = q + 1;
      if (periodic) {
        qm = (qm + sweep) % sweep;
        qp = qp % sweep;
      } else if (qm < 0 || qp >= sweep) {
        continue;
      }
      if (!(vs[q] <= vs[qm] && vs[q] < vs[qp])) continue;
      double a = ts[q] - dt, bb = ts[q] + dt;
      double tmin = golden_section_min(smin, a, bb, 1e-13);
      if (smin(tmin) < thr) {
        double r = periodic ? std::fmod(std::fmod(tmin, M_PI) + M_PI, M_PI) : tmin;
        bool dup = false;
        for (double o : roots[nd]) {
          double d = std::abs(o - r);
          if (periodic) d = std::min(d, M_PI - d);
          if (d < 1e-6) dup = true;
        }
        if (!dup) roots[nd].push_back(r);
      }
    }
    rep.counts[nd] = static_cast<int>(roots[nd].size());
  });
  for (double s : scales) scale_max = std::max(scale_max, s);
  rep.threshold = rel_tol * scale_max;
  rep.immersion = std::all_of(immersed.begin(), immersed.end(), [](char v) { return v != 0; });
  for (std::size_t nd = 0; nd < b.size(); ++nd) {
    if (rep.counts[nd] > rep.max_count) {
      rep.max_count = rep.counts[nd];
      rep.max_node = nd;
    }
    for (double r : roots[nd]) {
      bool dup = false;
      for (double o : rep.leaves) {
        double d = std::abs(o - r);
        if (periodic) d = std::min(d, M_PI - d);
        if (d < 1e-6) dup = true;
      }
      if (!dup) rep.leaves.push_back(r);
    }
  }
  std::sort(rep.leaves.begin(), rep.leaves.end());
  rep.bound_holds = !rep.immersion || rep.max_count <= c.n();
  return rep;
}

// ---------------------------------------------------------------- rank one

Rank1Section rank1_parallel_section(const Congruence& c, const KernelSplitting& split,
                                    std::function<Vec(const Vec&)> sigma, double tol) {
  if (split.r != 1) throw Error("rank1_parallel_section: kernel rank must be 1");
  if (c.n() != 2) throw DimensionMismatch("rank1_parallel_section: implemented for surfaces (n = 2)");
  const Box& b = c.domain();
  const Signature& s = c.signature();
  const int m = c.m();
  if (!sigma) {
    // Constant seed whose kernel projection stays farthest from zero.
    int best = -1;
    double best_min = -1.0;
    for (int a = 0; a < m; ++a) {
      double mn = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < b.size(); ++i) mn = std::min(mn, (split.grid[i].K * Vec::Unit(m, a)).norm());
      if (mn > best_min) {
        best_min = mn;
        best = a;
      }
    }
    Vec w0 = Vec::Unit(m, best);
    sigma = [&c, w0](const Vec& x) { return Vec(script_L(c, x).K * w0); };
  }
  Rank1Section out;
  out.sigma.resize(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    out.sigma[i] = sigma(b.point(i));
    if (std::abs(s.dot(out.sigma[i], out.sigma[i])) < 1e-10)
      throw Error("rank1_parallel_section: sigma vanishes (or is null) at a grid node");
  }
  const double h = c.derived_step();
  auto mu = [&](const Vec& x) {
    Vec sg = sigma(x);
    Mat Q = c.at(x).plane.normal_projector();
    Vec out_mu(2);
    for (int i = 0; i < 2; ++i) out_mu[i] = s.dot(Q * richardson_partial(sigma, x, i, h), sg) / s.dot(sg, sg);
    return out_mu;
  };
  std::vector<double> dmu(b.size()), kres(b.size());
  parallel_for(b.size(), [&](std::size_t i) {
    Vec x = b.point(i);
    dmu[i] = std::abs(exterior_d(mu, x, h));
    Vec sg = sigma(x);
    Vec m_ = mu(x);
    Mat Q = c.at(x).plane.normal_projector();
    for (int a = 0; a < 2; ++a)
      kres[i] = std::max(kres[i], (Q * richardson_partial(sigma, x, a, h) - m_[a] * sg).norm());
  });
  out.dmu_residual = *std::max_element(dmu.begin(), dmu.end());
  out.kernel_residual = *std::max_element(kres.begin(), kres.end());
  if (out.dmu_residual > tol) {
    std::ostringstream os;
    os << "rank1_parallel_section: d mu residual " << out.dmu_residual << " exceeds " << tol;
    throw Error(os.str());
  }
  AxisRhs rhs = [&](const Vec& x, int axis, const Vec&) { return Vec::Constant(1, -mu(x)[axis]); };
  const std::size_t base = b.flatten(b.base_index());
  auto ya = staircase_integrate(b, base, Vec::Zero(1), {0, 1}, rhs);
  auto yb = staircase_integrate(b, base, Vec::Zero(1), {1, 0}, rhs);
  out.f.resize(b.size());
  out.s = SectionField{&c, Bundle::N, std::vector<Vec>(b.size())};
  std::vector<Vec> full(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    out.f[i] = ya[i][0];
    out.path_residual = std::max(out.path_residual, std::abs(ya[i][0] - yb[i][0]));
    out.s.values[i] = std::exp(out.f[i]) * out.sigma[i];
    full[i] = c.at(b.point(i)).foot + out.s.values[i];
  }
  out.parallel_residual = normal_residual(c, out.s.values, 1);
  out.parallel_residual_coarse = normal_residual(c, out.s.values, 2);
  out.hyperquadric = hyperquadric_residual(s, full);
  return out;
}

}  // namespace ck
