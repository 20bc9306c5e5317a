#include "congruence_kit/grassmann.hpp"

#include "congruence_kit/frames.hpp"

#include <algorithm>
#include <cmath>

namespace ck {

OrientedPlane::OrientedPlane(const Signature& s, const Mat& orthonormal_frame) : sig(s), frame(orthonormal_frame) {
  if (frame.rows() != s.m) throw DimensionMismatch("plane frame rows do not match ambient dimension");
  if (frame.cols() < 1 || frame.cols() >= s.m) throw DimensionMismatch("plane dimension must be in [1, m)");
}

OrientedPlane OrientedPlane::from_columns(const Signature& s, const Mat& cols) {
  return OrientedPlane(s, orthonormalize(s, cols));
}

Multivector OrientedPlane::blade() const { return blade_from_frame(sig, frame); }

Mat OrientedPlane::gram_inverse() const { return frame_gram_inverse(sig, frame); }

Mat OrientedPlane::tangent_projector() const { return ck::tangent_projector(sig, frame); }

Mat OrientedPlane::normal_projector() const {
  return Mat::Identity(sig.m, sig.m) - tangent_projector();
}

Mat OrientedPlane::normal_frame() const {
  const int m = sig.m;
  Mat q = normal_projector();
  std::vector<VecT<double>> cols = mat_to_cols(frame);
  // Greedy choice of seeds: the coordinate axes with the largest normal parts.
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  std::vector<double> score(m);
  for (int i = 0; i < m; ++i) score[i] = q.col(i).norm();
  std::sort(order.begin(), order.end(), [&](int a, int b) { return score[a] > score[b]; });
  std::vector<VecT<double>> normals;
  for (int idx : order) {
    if (static_cast<int>(normals.size()) == m - n()) break;
    VecT<double> c(m);
    for (int i = 0; i < m; ++i) c[i] = q(i, idx);
    std::vector<VecT<double>> trial = normals;
    trial.push_back(c);
    try {
      std::vector<VecT<double>> all = cols;
      all.insert(all.end(), trial.begin(), trial.end());
      auto gs = gram_schmidt<double>(sig, all, 1e-8);
      normals.assign(gs.begin() + n(), gs.end());
    } catch (const Error&) {
      continue;
    }
  }
  if (static_cast<int>(normals.size()) != m - n()) throw Error("normal_frame: could not complete the frame");
  Mat nf = cols_to_mat(normals, m);
  Mat full(m, m);
  full << frame, nf;
  if (full.determinant() < 0.0) nf.col(0) *= -1.0;
  return nf;
}

double OrientedPlane::orthonormality_residual() const {
  Mat gram = frame.transpose() * sig.matrix() * frame;
  Mat target = Mat::Zero(n(), n());
  for (int i = 0; i < n(); ++i) target(i, i) = gram(i, i) < 0.0 ? -1.0 : 1.0;
  return (gram - target).cwiseAbs().maxCoeff();
}

AffinePlane::AffinePlane(OrientedPlane p, Vec v) : plane(std::move(p)), foot(std::move(v)) {
  if (foot.size() != plane.m()) throw DimensionMismatch("foot length does not match ambient dimension");
}

double AffinePlane::containment_residual() const {
  return wedge(plane.blade(), Multivector::vector(plane.sig, foot)).coeff_norm();
}

Mat GrassTangent::ambient(const OrientedPlane& p) const {
  return map * p.gram_inverse() * p.frame.transpose() * p.sig.matrix();
}

Mat GrassTangent::adjoint(const OrientedPlane& p) const {
  return p.frame * p.gram_inverse() * map.transpose() * p.sig.matrix();
}

double GrassTangent::normality_residual(const OrientedPlane& p) const {
  return (p.tangent_projector() * map).cwiseAbs().maxCoeff();
}

Multivector linmap_to_eta(const OrientedPlane& p, const GrassTangent& u) {
  if (u.map.rows() != p.m() || u.map.cols() != p.n()) throw DimensionMismatch("tangent map has wrong shape");
  Multivector eta(p.sig);
  for (int j = 0; j < p.n(); ++j) {
    Mat cols = p.frame;
    cols.col(j) = u.map.col(j);
    eta += blade_from_frame(p.sig, cols);
  }
  return eta;
}

GrassTangent eta_to_linmap(const OrientedPlane& p, const Multivector& eta, double tol) {
  if (eta.signature() != p.sig) throw DimensionMismatch("eta signature does not match plane");
  Multivector pb = p.blade();
  GrassTangent u{Mat(p.m(), p.n())};
  for (int j = 0; j < p.n(); ++j) {
    Multivector w = wedge(eta, Multivector::vector(p.sig, p.frame.col(j)));
    u.map.col(j) = -interior(pb, w);
  }
  double scale = std::max(1.0, eta.coeff_norm());
  double res = (linmap_to_eta(p, u) - eta).coeff_norm() / scale;
  if (res > tol) throw Error("eta_to_linmap: eta is not tangent to the Grassmannian (residual " + std::to_string(res) + ")");
  return u;
}

GrassTangent tangent_from_frame_derivative(const OrientedPlane& p, const Mat& dframe) {
  return GrassTangent{p.normal_projector() * dframe};
}

static AlphaValue finish_alpha(AlphaValue a, double tol) {
  a.deviation = (a.def1 - a.def2).cwiseAbs().maxCoeff();
  if (a.deviation > tol)
    throw Error("alpha: the two definitions disagree by " + std::to_string(a.deviation) +
                " (foot derivative incompatible with the plane)");
  return a;
}

AlphaValue alpha(const AffinePlane& p, const Multivector& eta, const Vec& w, double tol) {
  const Signature& s = p.plane.sig;
  Multivector pb = p.plane.blade();
  AlphaValue a;
  a.def1 = -interior(pb, wedge(eta, Multivector::vector(s, p.foot)));
  a.def2 = interior(pb, wedge(pb, Multivector::vector(s, w)));
  return finish_alpha(a, tol);
}

AlphaValue alpha(const AffinePlane& p, const GrassTangent& u, const Vec& w, double tol) {
  return alpha(p, linmap_to_eta(p.plane, u), w, tol);
}

CurvatureOperator curvature(const OrientedPlane& p, const GrassTangent& u, const GrassTangent& v) {
  const Signature& s = p.sig;
  const double e = eps_n(p.n());
  CurvatureOperator r;
  r.bivector = e * bracket(linmap_to_eta(p, u), linmap_to_eta(p, v));
  r.full = Mat(s.m, s.m);
  for (int k = 0; k < s.m; ++k)
    r.full.col(k) = bracket(Multivector::basis(s, k), r.bivector).vector_part();
  Mat P = p.tangent_projector();
  Mat Q = Mat::Identity(s.m, s.m) - P;
  r.tangent = P * r.full * P;
  r.normal = Q * r.full * Q;
  return r;
}

Mat normal_curvature_adjoint(const OrientedPlane& p, const GrassTangent& u, const GrassTangent& v) {
  Mat J = p.gram_inverse();
  Mat G = p.sig.matrix();
  return u.map * J * v.map.transpose() * G - v.map * J * u.map.transpose() * G;
}

Vec shape_Bprime(const OrientedPlane& p, const Vec& xi, const GrassTangent& y, double tol) {
  Vec t = p.tangent_projector() * xi;
  if (t.norm() > tol * std::max(1.0, xi.norm())) throw Error("shape_Bprime: xi is not normal to the plane");
  return y.adjoint(p) * xi;
}

std::pair<Vec, Vec> project(const OrientedPlane& p, const Vec& w) {
  Vec t = p.tangent_projector() * w;
  return {t, w - t};
}

}  // namespace ck
