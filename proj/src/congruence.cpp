#include "congruence_kit/congruence.hpp"

#include "congruence_kit/numerics.hpp"
#include "congruence_kit/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

namespace ck {

std::vector<std::pair<int, int>> index_pairs(int n) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.emplace_back(i, j);
  return out;
}

// ---------------------------------------------------------------- Box

Box::Box(Vec lo_, Vec hi_, std::vector<int> res_, std::vector<bool> periodic_)
    : lo(std::move(lo_)), hi(std::move(hi_)), res(std::move(res_)), periodic(std::move(periodic_)) {
  if (periodic.empty()) periodic.assign(lo.size(), false);
  if (hi.size() != lo.size() || res.size() != static_cast<std::size_t>(lo.size()) ||
      periodic.size() != static_cast<std::size_t>(lo.size()))
    throw DimensionMismatch("Box: bounds, resolution and periodic flags must have the same length");
  for (int i = 0; i < dim(); ++i) {
    if (!(hi[i] > lo[i])) throw Error("Box: empty axis " + std::to_string(i));
    if (res[i] < 3) throw Error("Box: each axis needs at least 3 nodes");
  }
}

double Box::spacing(int axis) const {
  return (hi[axis] - lo[axis]) / (periodic[axis] ? res[axis] : res[axis] - 1);
}

std::size_t Box::size() const {
  std::size_t s = 1;
  for (int r : res) s *= static_cast<std::size_t>(r);
  return s;
}

std::vector<int> Box::unflatten(std::size_t flat) const {
  std::vector<int> idx(res.size());
  for (std::size_t a = 0; a < res.size(); ++a) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(res[a]));
    flat /= static_cast<std::size_t>(res[a]);
  }
  return idx;
}

std::size_t Box::flatten(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (int a = dim() - 1; a >= 0; --a) flat = flat * static_cast<std::size_t>(res[a]) + static_cast<std::size_t>(idx[a]);
  return flat;
}

Vec Box::point(const std::vector<int>& idx) const {
  Vec x(dim());
  for (int a = 0; a < dim(); ++a) x[a] = lo[a] + idx[a] * spacing(a);
  return x;
}

std::vector<int> Box::base_index() const {
  std::vector<int> idx(res.size());
  for (std::size_t a = 0; a < res.size(); ++a) idx[a] = res[a] / 2;
  return idx;
}

Vec Box::centre() const { return point(base_index()); }

long Box::neighbour(std::size_t flat, int axis, int step) const {
  std::vector<int> idx = unflatten(flat);
  int j = idx[axis] + step;
  if (periodic[axis]) {
    j = ((j % res[axis]) + res[axis]) % res[axis];
  } else if (j < 0 || j >= res[axis]) {
    return -1;
  }
  idx[axis] = j;
  return static_cast<long>(flatten(idx));
}

// ---------------------------------------------------------------- Jet

GrassTangent Jet::tangent(const Vec& X) const {
  Mat u = Mat::Zero(F.rows(), F.cols());
  for (std::size_t i = 0; i < U.size(); ++i) u += X[static_cast<Eigen::Index>(i)] * U[i].map;
  return GrassTangent{u};
}

Mat Jet::rate(const Vec& X) const {
  Mat r = Mat::Zero(P.rows(), P.cols());
  for (std::size_t i = 0; i < dP.size(); ++i) r += X[static_cast<Eigen::Index>(i)] * dP[i];
  return r;
}

// ---------------------------------------------------------------- Congruence

Congruence::Congruence(Signature sig, int n, Box domain, PlaneMap map, DerivMode mode, double fd_step)
    : sig_(sig), n_(n), domain_(std::move(domain)), map_(std::move(map)), mode_(mode), fd_step_(fd_step) {
  if (n < 1 || n >= sig.m) throw DimensionMismatch("Congruence: need 1 <= n < m");
  if (domain_.dim() != n) throw DimensionMismatch("Congruence: domain dimension must equal n");
  if (!map_.value) throw Error("Congruence: missing plane map");
  if (mode_ == DerivMode::Analytic && !map_.dual) throw Error("Congruence: analytic mode needs a dual callback");
  if (!(fd_step_ > 0.0)) throw Error("Congruence: fd_step must be positive");
}

PlaneT<double> Congruence::normalized(const Vec& x) const {
  VecT<double> xv(x.data(), x.data() + x.size());
  PlaneT<double> raw = map_.value(xv);
  if (static_cast<int>(raw.cols.size()) != n_ || static_cast<int>(raw.foot.size()) != sig_.m)
    throw DimensionMismatch("Congruence: plane map returned wrong shape");
  return normalize_plane(sig_, raw);
}

PlaneT<D1> Congruence::normalized_dual(const Vec& x, const Vec& dir) const {
  if (!map_.dual) throw Error("Congruence: no dual callback");
  VecT<D1> xd(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) xd[i] = D1(x[i], dir[i]);
  PlaneT<D1> raw = map_.dual(xd);
  if (static_cast<int>(raw.cols.size()) != n_ || static_cast<int>(raw.foot.size()) != sig_.m)
    throw DimensionMismatch("Congruence: plane map returned wrong shape");
  return normalize_plane(sig_, raw);
}

AffinePlane Congruence::at(const Vec& x) const {
  PlaneT<double> p = normalized(x);
  Vec v(sig_.m);
  for (int i = 0; i < sig_.m; ++i) v[i] = p.foot[i];
  return AffinePlane(OrientedPlane(sig_, cols_to_mat(p.cols, sig_.m)), v);
}

Jet Congruence::jet(const Vec& x) const {
  const int m = sig_.m;
  Jet j;
  j.x = x;
  j.F = Mat(m, n_);
  j.v = Vec(m);
  j.dF.assign(n_, Mat(m, n_));
  j.dv.assign(n_, Vec(m));
  if (mode_ == DerivMode::Analytic) {
    for (int i = 0; i < n_; ++i) {
      PlaneT<D1> p = normalized_dual(x, Vec::Unit(n_, i));
      for (int c = 0; c < n_; ++c)
        for (int a = 0; a < m; ++a) {
          j.F(a, c) = p.cols[c][a].v;
          j.dF[i](a, c) = p.cols[c][a].d;
        }
      for (int a = 0; a < m; ++a) {
        j.v[a] = p.foot[a].v;
        j.dv[i][a] = p.foot[a].d;
      }
    }
  } else {
    PlaneT<double> p0 = normalized(x);
    j.F = cols_to_mat(p0.cols, m);
    for (int a = 0; a < m; ++a) j.v[a] = p0.foot[a];
    for (int i = 0; i < n_; ++i) {
      Vec xp = x, xm = x;
      xp[i] += fd_step_;
      xm[i] -= fd_step_;
      PlaneT<double> pp = normalized(xp), pm = normalized(xm);
      j.dF[i] = (cols_to_mat(pp.cols, m) - cols_to_mat(pm.cols, m)) / (2.0 * fd_step_);
      for (int a = 0; a < m; ++a) j.dv[i][a] = (pp.foot[a] - pm.foot[a]) / (2.0 * fd_step_);
    }
  }
  const Mat G = sig_.matrix();
  j.J = frame_gram_inverse(sig_, j.F);
  j.P = j.F * j.J * j.F.transpose() * G;
  j.Q = Mat::Identity(m, m) - j.P;
  j.dP.resize(n_);
  j.U.resize(n_);
  for (int i = 0; i < n_; ++i) {
    j.dP[i] = j.dF[i] * j.J * j.F.transpose() * G + j.F * j.J * j.dF[i].transpose() * G;
    j.U[i] = GrassTangent{j.Q * j.dF[i]};
  }
  return j;
}

// ---------------------------------------------------------------- beta

Mat beta(const Jet& j) {
  Mat b(j.F.rows(), static_cast<Eigen::Index>(j.dv.size()));
  for (std::size_t i = 0; i < j.dv.size(); ++i) b.col(static_cast<Eigen::Index>(i)) = -(j.Q * j.dv[i]);
  return b;
}

Mat beta(const Congruence& c, const Vec& x) { return beta(c.jet(x)); }

Vec beta(const Congruence& c, const Vec& x, const Vec& X) {
  if (X.size() != c.n()) throw DimensionMismatch("beta: tangent vector has wrong length");
  return beta(c, x) * X;
}

// ---------------------------------------------------------------- sections

double SectionField::membership_residual() const {
  if (!owner) throw Error("SectionField: no owner");
  double worst = 0.0;
  const Box& b = owner->domain();
  for (std::size_t i = 0; i < values.size(); ++i) {
    AffinePlane ap = owner->at(b.point(i));
    Mat proj = bundle == Bundle::N ? ap.plane.tangent_projector() : ap.plane.normal_projector();
    worst = std::max(worst, (proj * values[i]).norm());
  }
  return worst;
}

SectionField sample_section(const Congruence& c, Bundle which, const std::function<Vec(const Vec&)>& f) {
  SectionField s;
  s.owner = &c;
  s.bundle = which;
  s.values.resize(c.domain().size());
  parallel_for(s.values.size(), [&](std::size_t i) { s.values[i] = f(c.domain().point(i)); });
  return s;
}

CovariantValue covariant_derivative(const SectionField& field, std::size_t node, const Vec& X, Bundle which) {
  if (!field.owner) throw Error("covariant_derivative: field has no owner");
  const Congruence& c = *field.owner;
  const Box& b = c.domain();
  CovariantValue out;
  Vec raw = Vec::Zero(c.m());
  for (int a = 0; a < b.dim(); ++a) {
    if (X[a] == 0.0) continue;
    const double h = b.spacing(a);
    long up = b.neighbour(node, a, 1), dn = b.neighbour(node, a, -1);
    Vec d;
    if (up >= 0 && dn >= 0) {
      d = (field.values[up] - field.values[dn]) / (2.0 * h);
    } else {
      out.one_sided = true;
      int dir = up >= 0 ? 1 : -1;
      long n1 = b.neighbour(node, a, dir), n2 = b.neighbour(node, a, 2 * dir);
      if (n1 < 0 || n2 < 0) throw Error("covariant_derivative: axis too short for a one-sided stencil");
      d = dir * (-3.0 * field.values[node] + 4.0 * field.values[n1] - field.values[n2]) / (2.0 * h);
    }
    raw += X[a] * d;
  }
  AffinePlane ap = c.at(b.point(node));
  out.value = (which == Bundle::T ? ap.plane.tangent_projector() : ap.plane.normal_projector()) * raw;
  return out;
}

Vec covariant_derivative(const Congruence& c, const std::function<Vec(const Vec&)>& field, const Vec& x,
                         const Vec& X, Bundle which, double h) {
  auto central = [&](double s) { return Vec((field(x + s * X) - field(x - s * X)) / (2.0 * s)); };
  Vec raw = (4.0 * central(0.5 * h) - central(h)) / 3.0;
  AffinePlane ap = c.at(x);
  return (which == Bundle::T ? ap.plane.tangent_projector() : ap.plane.normal_projector()) * raw;
}

// ---------------------------------------------------------------- curvature

Mat normal_curvature(const Congruence& c, const Jet& j, const Vec& X, const Vec& Y) {
  return curvature(j.plane(c.signature()), j.tangent(X), j.tangent(Y)).normal;
}

Mat tangent_curvature(const Congruence& c, const Jet& j, const Vec& X, const Vec& Y) {
  return curvature(j.plane(c.signature()), j.tangent(X), j.tangent(Y)).tangent;
}

namespace {

Mat transport(const Congruence& c, const Vec& x0, const Vec& X, const Vec& Y, std::array<double, 2> a,
              std::array<double, 2> b, double sign, int steps) {
  const int m = c.m();
  Mat T = Mat::Identity(m, m);
  const Vec vel = (b[0] - a[0]) * X + (b[1] - a[1]) * Y;
  const Vec start = x0 + a[0] * X + a[1] * Y;
  auto rhs = [&](double tau, const Mat& Z) {
    Jet j = c.jet(start + tau * vel);
    return Mat(sign * j.rate(vel) * Z);
  };
  return rk4<Mat>(rhs, 0.0, 1.0, T, steps);
}

Mat loop_holonomy(const Congruence& c, const Vec& x, const Vec& X, const Vec& Y, double h, double sign, int steps) {
  const double r = 0.5 * h;
  std::vector<std::array<double, 2>> pts = {{0.0, 0.0}, {0.0, -r}, {r, -r}, {r, r}, {-r, r}, {-r, -r}, {0.0, -r}, {0.0, 0.0}};
  Mat H = Mat::Identity(c.m(), c.m());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) H = transport(c, x, X, Y, pts[i], pts[i + 1], sign, steps) * H;
  return H;
}

}  // namespace

Mat holonomy_curvature(const Congruence& c, const Vec& x, const Vec& X, const Vec& Y, Bundle which, double h,
                       int steps, bool extrapolate) {
  Jet j = c.jet(x);
  const Mat& Bp = which == Bundle::T ? j.P : j.Q;
  const double sign = which == Bundle::T ? 1.0 : -1.0;
  const Mat I = Mat::Identity(c.m(), c.m());
  auto est = [&](double hh) { return Mat(Bp * (I - loop_holonomy(c, x, X, Y, hh, sign, steps)) * Bp / (hh * hh)); };
  if (!extrapolate) return est(h);
  Mat r1 = est(h), r2 = est(0.5 * h);
  return (4.0 * r2 - r1) / 3.0;
}

CurvatureRN curvature_RN(const Congruence& c, const Vec& x, const Vec& X, const Vec& Y, double h, double tol) {
  Jet j = c.jet(x);
  CurvatureRN out;
  out.bracket = normal_curvature(c, j, X, Y);
  out.holonomy = holonomy_curvature(c, x, X, Y, Bundle::N, h);
  double scale = std::max(out.bracket.norm(), j.tangent(X).map.norm() * j.tangent(Y).map.norm());
  double diff = (out.bracket - out.holonomy).norm();
  out.deviation = scale > 0.0 ? diff / scale : diff;
  if (out.deviation > tol) {
    std::ostringstream os;
    os << "curvature_RN: bracket and holonomy forms disagree (relative " << out.deviation
       << "); the derivative provider is suspect";
    throw Error(os.str());
  }
  return out;
}

// ---------------------------------------------------------------- script L

namespace {

Mat normal_curvature_fast(const Congruence& c, const Jet& j, int a, int b) {
  OrientedPlane p = j.plane(c.signature());
  if (c.signature().euclidean()) return normal_curvature_adjoint(p, j.U[a], j.U[b]);
  return curvature(p, j.U[a], j.U[b]).normal;
}

}  // namespace

LPoint script_L(const Congruence& c, const Jet& j, double rel_tol, double abs_tol) {
  const Signature& s = c.signature();
  const int k = c.k();
  const Mat G = s.matrix();
  OrientedPlane plane = j.plane(s);
  LPoint lp;
  lp.N = plane.normal_frame();
  Mat JN = (lp.N.transpose() * G * lp.N).inverse();
  auto pairs = index_pairs(c.n());
  lp.L = Mat::Zero(static_cast<Eigen::Index>(pairs.size()) * k, k);
  double ui = 0.0;
  for (const auto& u : j.U) ui += u.map.squaredNorm();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    Mat R = normal_curvature_fast(c, j, pairs[p].first, pairs[p].second);
    lp.L.block(static_cast<Eigen::Index>(p) * k, 0, k, k) = JN * lp.N.transpose() * G * R * lp.N;
  }
  if (pairs.empty()) {
    lp.singular_values = Vec::Zero(0);
    lp.r = k;
    lp.kernel = lp.N;
    lp.pinv = Mat::Zero(k, 0);
  } else {
    Eigen::JacobiSVD<Mat> svd(lp.L, Eigen::ComputeFullU | Eigen::ComputeFullV);
    lp.singular_values = svd.singularValues();
    const double smax = lp.singular_values.size() ? lp.singular_values[0] : 0.0;
    const double thr = std::max(rel_tol * smax, abs_tol * std::max(1.0, ui));
    int rank = 0;
    for (Eigen::Index i = 0; i < lp.singular_values.size(); ++i)
      if (lp.singular_values[i] > thr) ++rank;
    lp.r = k - rank;
    const Mat& V = svd.matrixV();
    lp.kernel = lp.N * V.rightCols(lp.r);
    lp.pinv = Mat::Zero(k, lp.L.rows());
    for (int i = 0; i < rank; ++i)
      lp.pinv += V.col(i) * svd.matrixU().col(i).transpose() / lp.singular_values[i];
  }
  if (lp.r == 0) {
    lp.K = Mat::Zero(s.m, s.m);
  } else {
    Mat JK = (lp.kernel.transpose() * G * lp.kernel).inverse();
    lp.K = lp.kernel * JK * lp.kernel.transpose() * G;
  }
  return lp;
}

LPoint script_L(const Congruence& c, const Vec& x, double rel_tol, double abs_tol) {
  return script_L(c, c.jet(x), rel_tol, abs_tol);
}

Vec stack_form(const Congruence& c, const LPoint& lp, const Mat& form) {
  const int k = c.k();
  const Mat G = c.signature().matrix();
  Mat JN = (lp.N.transpose() * G * lp.N).inverse();
  Vec out(form.cols() * k);
  for (Eigen::Index p = 0; p < form.cols(); ++p) out.segment(p * k, k) = JN * lp.N.transpose() * G * form.col(p);
  return out;
}

Vec apply_pinv(const Congruence& c, const LPoint& lp, const Mat& form) {
  return lp.N * (lp.pinv * stack_form(c, lp, form));
}

Mat kernel_projector(const Congruence& c, const Vec& x) { return script_L(c, x).K; }

double stability_residual(const Congruence& c, const Vec& x) {
  LPoint lp = script_L(c, x);
  if (lp.r == 0 || lp.r == c.k()) return 0.0;
  Jet j = c.jet(x);
  double worst = 0.0;
  for (int i = 0; i < c.n(); ++i) {
    auto kp = [&](const Vec& y) {
      LPoint q = script_L(c, y);
      if (q.r != lp.r) throw RankNotConstant("stability_residual: kernel rank changes near the evaluation point", {});
      return q.K;
    };
    Mat dK = richardson_partial(kp, x, i, c.derived_step());
    worst = std::max(worst, ((j.Q - lp.K) * dK * lp.K).norm());
  }
  return worst;
}

KernelSplitting kernel_splitting(const Congruence& c, double stability_tol) {
  const Box& b = c.domain();
  KernelSplitting ks;
  ks.grid.resize(b.size());
  parallel_for(b.size(), [&](std::size_t i) { ks.grid[i] = script_L(c, b.point(i)); });
  ks.r = ks.grid[b.flatten(b.base_index())].r;
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < ks.grid.size(); ++i)
    if (ks.grid[i].r != ks.r) bad.push_back(i);
  if (!bad.empty()) {
    std::ostringstream os;
    os << "kernel rank is not constant: " << bad.size() << " grid nodes differ from r = " << ks.r
       << " (first offending node " << bad.front() << ")";
    throw RankNotConstant(os.str(), bad);
  }
  if (ks.r != 0 && ks.r != c.k()) {
    std::vector<double> res(b.size());
    parallel_for(b.size(), [&](std::size_t i) { res[i] = stability_residual(c, b.point(i)); });
    auto it = std::max_element(res.begin(), res.end());
    ks.stability_residual = *it;
    ks.stability_node = static_cast<std::size_t>(it - res.begin());
    if (ks.stability_residual > stability_tol) {
      std::ostringstream os;
      os << "kernel is not stable under the normal connection: residual " << ks.stability_residual << " at node "
         << ks.stability_node;
      throw KernelNotStable(os.str(), ks.stability_residual);
    }
  }
  return ks;
}

// ---------------------------------------------------------------- symmetry

std::string to_string(SymmetryStatus s) {
  switch (s) {
    case SymmetryStatus::Infeasible: return "infeasible";
    case SymmetryStatus::FeasibleSingularOnly: return "feasible_singular_only";
    case SymmetryStatus::FeasibleInvertible: return "feasible_invertible";
  }
  return "unknown";
}

SymmetryReport check_symmetry(const Congruence& c, const Vec& x, unsigned seed) {
  const int n = c.n(), m = c.m();
  Jet j = c.jet(x);
  auto pairs = index_pairs(n);
  SymmetryReport rep;
  // Unknown C (n x n), Phi(d_q) = F c_q, vec index a + n q.
  rep.system = Mat::Zero(static_cast<Eigen::Index>(pairs.size()) * m, n * n);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    auto [a, b] = pairs[p];
    Eigen::Index row = static_cast<Eigen::Index>(p) * m;
    // U_a c_b - U_b c_a = 0
    rep.system.block(row, n * b, m, n) += j.U[a].map;
    rep.system.block(row, n * a, m, n) -= j.U[b].map;
  }
  Mat null;
  if (pairs.empty()) {
    null = Mat::Identity(n * n, n * n);
  } else {
    Eigen::JacobiSVD<Mat> svd(rep.system, Eigen::ComputeFullV);
    Vec sv = svd.singularValues();
    double scale = 0.0;
    for (const auto& u : j.U) scale = std::max(scale, u.map.norm());
    double thr = std::max(1e-7 * (sv.size() ? sv[0] : 0.0), 1e-10 * std::max(1.0, scale));
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv[i] > thr) ++rank;
    null = svd.matrixV().rightCols(n * n - rank);
  }
  rep.solution_dim = static_cast<int>(null.cols());
  if (rep.solution_dim == 0) {
    rep.status = SymmetryStatus::Infeasible;
    return rep;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  rep.status = SymmetryStatus::FeasibleSingularOnly;
  for (int trial = 0; trial < 16; ++trial) {
    Vec coef(null.cols());
    for (Eigen::Index i = 0; i < coef.size(); ++i) coef[i] = nd(rng);
    Vec vc = null * coef;
    Mat C = Eigen::Map<Mat>(vc.data(), n, n);
    double det = C.determinant();
    double norm = C.norm() / std::sqrt(static_cast<double>(n));
    if (std::abs(det) > 1e-8 * std::pow(norm, n)) {
      rep.status = SymmetryStatus::FeasibleInvertible;
      rep.witness = j.F * C;
      rep.witness_det = det;
      return rep;
    }
  }
  return rep;
}

// ---------------------------------------------------------------- gamma, Lagrangian

Mat gamma_form(const Congruence& c, const Vec& x) {
  const int n = c.n();
  Jet j = c.jet(x);
  auto bfun = [&](const Vec& y) { return beta(c, y); };
  std::vector<Mat> db(n);
  for (int i = 0; i < n; ++i) db[i] = richardson_partial(bfun, x, i, c.derived_step());
  auto pairs = index_pairs(n);
  Mat g(c.m(), static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    auto [a, b] = pairs[p];
    g.col(static_cast<Eigen::Index>(p)) = j.Q * (db[a].col(b) - db[b].col(a));
  }
  return g;
}

LagrangianReport check_lagrangian(const Congruence& c, const Vec& x) {
  LagrangianReport r;
  Jet j = c.jet(x);
  LPoint lp = script_L(c, j);
  Mat g = gamma_form(c, x);
  auto pairs = index_pairs(c.n());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    Vec gp = g.col(static_cast<Eigen::Index>(p));
    r.pullback_omega = std::max(r.pullback_omega, gp.norm());
    r.kernel_part = std::max(r.kernel_part, (lp.K * gp).norm());
    r.complement_part = std::max(r.complement_part, ((j.Q - lp.K) * gp).norm());
    r.normal_flatness =
        std::max(r.normal_flatness, normal_curvature_fast(c, j, pairs[p].first, pairs[p].second).norm());
  }
  return r;
}

// ---------------------------------------------------------------- B, h, metric

Vec shape_B(const Congruence& c, const Jet& j, const Vec& xi, const Vec& X) {
  if ((j.P * xi).norm() > 1e-8 * std::max(1.0, xi.norm())) throw Error("shape_B: xi is not in the normal fibre");
  OrientedPlane p = j.plane(c.signature());
  return j.tangent(X).adjoint(p) * xi;
}

Vec shape_B(const Congruence& c, const Vec& x, const Vec& xi, const Vec& X) { return shape_B(c, c.jet(x), xi, X); }

Vec second_fundamental_h(const Congruence& c, const Vec& x, const Vec& X, const std::function<Vec(const Vec&)>& Y,
                         double h) {
  return covariant_derivative(c, Y, x, X, Bundle::N, h);
}

Mat metric_map(const Congruence& c, const Jet& j, const Vec& lambda) {
  if ((j.P * lambda).norm() > 1e-8 * std::max(1.0, lambda.norm()))
    throw Error("metric_map: lambda is not in the normal fibre");
  const Mat G = c.signature().matrix();
  Mat M(c.m(), c.n());
  for (int i = 0; i < c.n(); ++i) M.col(i) = j.P * j.dv[i] - j.F * j.J * j.U[i].map.transpose() * G * lambda;
  return M;
}

Mat metric_at(const Congruence& c, const Jet& j, const Vec& lambda, double tol) {
  const Mat G = c.signature().matrix();
  Mat M = metric_map(c, j, lambda);
  Mat A = j.J * j.F.transpose() * G * M;
  Eigen::JacobiSVD<Mat> svd(A);
  Vec sv = svd.singularValues();
  if (sv[sv.size() - 1] <= tol * std::max(1.0, sv[0]))
    throw Error("metric_at: the map is singular here; the metric is undefined");
  return M.transpose() * G * M;
}

Mat metric_at(const Congruence& c, const Vec& x, const Vec& lambda, double tol) {
  return metric_at(c, c.jet(x), lambda, tol);
}

}  // namespace ck
