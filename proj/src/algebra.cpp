#include "congruence_kit/algebra.hpp"

#include <algorithm>
#include <cmath>

namespace ck {

Signature::Signature(int m_, int p_) : m(m_), p(p_) {
  if (m < 2 || m > 8) throw DimensionMismatch("ambient dimension must be in [2, 8], got " + std::to_string(m));
  if (p < 0 || p >= m) throw UnsupportedSignature("signature p must be in [0, m)");
}

Vec Signature::diag() const {
  Vec d(m);
  for (int i = 0; i < m; ++i) d[i] = g(i);
  return d;
}

Mat Signature::matrix() const { return diag().asDiagonal(); }

double Signature::dot(const Vec& a, const Vec& b) const {
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += g(i) * a[i] * b[i];
  return s;
}

double eps_n(int n) {
  int e = n * (n + 1) / 2 + 1;
  return (e % 2 == 0) ? 1.0 : -1.0;
}

int reorder_sign(std::uint32_t a, std::uint32_t b) {
  int swaps = 0;
  a >>= 1;
  while (a) {
    swaps += popcount(a & b);
    a >>= 1;
  }
  return (swaps & 1) ? -1 : 1;
}

Multivector::Multivector(const Signature& s) : sig_(s), c_(std::size_t(1) << s.m, 0.0) {}

Multivector Multivector::scalar(const Signature& s, double c) {
  Multivector r(s);
  r.c_[0] = c;
  return r;
}

Multivector Multivector::basis(const Signature& s, int i) {
  if (i < 0 || i >= s.m) throw DimensionMismatch("basis index out of range");
  return blade(s, 1u << i);
}

Multivector Multivector::blade(const Signature& s, std::uint32_t mask, double c) {
  Multivector r(s);
  if (mask >= r.c_.size()) throw DimensionMismatch("blade mask out of range");
  r.c_[mask] = c;
  return r;
}

Multivector Multivector::vector(const Signature& s, const Vec& v) {
  if (v.size() != s.m) throw DimensionMismatch("vector length does not match signature");
  Multivector r(s);
  for (int i = 0; i < s.m; ++i) r.c_[1u << i] = v[i];
  return r;
}

Multivector Multivector::grade(int g) const {
  Multivector r(sig_);
  for (std::uint32_t i = 0; i < c_.size(); ++i)
    if (popcount(i) == g) r.c_[i] = c_[i];
  return r;
}

int Multivector::max_grade(double tol) const {
  int best = -1;
  for (std::uint32_t i = 0; i < c_.size(); ++i)
    if (std::abs(c_[i]) > tol) best = std::max(best, popcount(i));
  return best;
}

bool Multivector::homogeneous(int g, double tol) const {
  for (std::uint32_t i = 0; i < c_.size(); ++i)
    if (popcount(i) != g && std::abs(c_[i]) > tol) return false;
  return true;
}

Vec Multivector::vector_part() const {
  Vec v(sig_.m);
  for (int i = 0; i < sig_.m; ++i) v[i] = c_[1u << i];
  return v;
}

double Multivector::max_abs() const {
  double r = 0.0;
  for (double x : c_) r = std::max(r, std::abs(x));
  return r;
}

double Multivector::coeff_norm() const {
  double r = 0.0;
  for (double x : c_) r += x * x;
  return std::sqrt(r);
}

static void check_same(const Multivector& a, const Multivector& b) {
  if (a.signature() != b.signature())
    throw DimensionMismatch("multivectors have different signatures (m=" + std::to_string(a.signature().m) +
                            ", m=" + std::to_string(b.signature().m) + ")");
}

Multivector& Multivector::operator+=(const Multivector& o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Multivector& Multivector::operator-=(const Multivector& o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Multivector& Multivector::operator*=(double s) {
  for (double& x : c_) x *= s;
  return *this;
}

Multivector operator+(Multivector a, const Multivector& b) { return a += b; }
Multivector operator-(Multivector a, const Multivector& b) { return a -= b; }
Multivector operator-(Multivector a) { return a *= -1.0; }
Multivector operator*(double s, Multivector a) { return a *= s; }
Multivector operator*(Multivector a, double s) { return a *= s; }

Multivector wedge(const Multivector& a, const Multivector& b) {
  check_same(a, b);
  Multivector r(a.signature());
  const std::uint32_t n = static_cast<std::uint32_t>(a.size());
  for (std::uint32_t i = 0; i < n; ++i) {
    if (a[i] == 0.0) continue;
    for (std::uint32_t j = 0; j < n; ++j) {
      if (b[j] == 0.0 || (i & j)) continue;
      r[i | j] += reorder_sign(i, j) * a[i] * b[j];
    }
  }
  return r;
}

Multivector clifford(const Multivector& a, const Multivector& b) {
  check_same(a, b);
  const Signature& s = a.signature();
  Multivector r(s);
  const std::uint32_t n = static_cast<std::uint32_t>(a.size());
  for (std::uint32_t i = 0; i < n; ++i) {
    if (a[i] == 0.0) continue;
    for (std::uint32_t j = 0; j < n; ++j) {
      if (b[j] == 0.0) continue;
      double sign = reorder_sign(i, j);
      std::uint32_t common = i & j;
      for (int k = 0; common; ++k, common >>= 1)
        if (common & 1u) sign *= -s.g(k);
      r[i ^ j] += sign * a[i] * b[j];
    }
  }
  return r;
}

Multivector bracket(const Multivector& a, const Multivector& b) {
  Multivector r = clifford(a, b);
  r -= clifford(b, a);
  r *= 0.5;
  return r;
}

double inner(const Multivector& a, const Multivector& b) {
  check_same(a, b);
  const Signature& s = a.signature();
  double r = 0.0;
  for (std::uint32_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0 || b[i] == 0.0) continue;
    double g = 1.0;
    std::uint32_t bits = i;
    for (int k = 0; bits; ++k, bits >>= 1)
      if (bits & 1u) g *= s.g(k);
    r += g * a[i] * b[i];
  }
  return r;
}

Multivector blade_from_frame(const Signature& s, const Mat& frame) {
  if (frame.rows() != s.m) throw DimensionMismatch("frame rows do not match ambient dimension");
  Multivector r = Multivector::scalar(s, 1.0);
  for (int j = 0; j < frame.cols(); ++j) r = wedge(r, Multivector::vector(s, frame.col(j)));
  return r;
}

double plucker_residual(const Multivector& b, int g) {
  const Signature& s = b.signature();
  double nb = b.coeff_norm();
  if (nb == 0.0) return 1.0;
  if (g <= 1 || g >= s.m) return 0.0;
  // Columns: coefficients of e_i ^ B.
  Mat w = Mat::Zero(static_cast<Eigen::Index>(b.size()), s.m);
  for (int i = 0; i < s.m; ++i) {
    Multivector e = wedge(Multivector::basis(s, i), b);
    for (std::uint32_t k = 0; k < e.size(); ++k) w(k, i) = e[k];
  }
  Eigen::JacobiSVD<Mat> svd(w);
  const Vec& sv = svd.singularValues();
  return sv[s.m - g] / nb;
}

Vec interior(const Multivector& pblade, const Multivector& w) {
  check_same(pblade, w);
  const Signature& s = pblade.signature();
  int g = pblade.max_grade(1e-14);
  if (g < 1 || !pblade.homogeneous(g, 1e-12)) throw NotDecomposable("interior: p is not a homogeneous blade");
  if (plucker_residual(pblade, g) > kDecomposableTol)
    throw NotDecomposable("interior: p is not decomposable (Plucker residual " +
                          std::to_string(plucker_residual(pblade, g)) + ")");
  double pp = inner(pblade, pblade);
  if (std::abs(pp) < 1e-14) throw NotDecomposable("interior: p is degenerate");
  Vec x(s.m);
  for (int j = 0; j < s.m; ++j) {
    Multivector pe = wedge(pblade, Multivector::basis(s, j));
    x[j] = inner(w, pe) / (s.g(j) * pp);
  }
  return x;
}

Multivector hodge(const Multivector& w) {
  const Signature& s = w.signature();
  if (!s.euclidean()) throw UnsupportedSignature("hodge star is only available for Euclidean signature");
  Multivector r(s);
  const std::uint32_t full = (1u << s.m) - 1u;
  for (std::uint32_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    std::uint32_t c = full ^ i;
    r[c] += reorder_sign(i, c) * w[i];
  }
  return r;
}

Mat bivector_to_matrix(const Multivector& b) {
  const int m = b.signature().m;
  Mat a = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      double c = b[(1u << i) | (1u << j)];
      a(i, j) += c;
      a(j, i) -= c;
    }
  return a;
}

Multivector matrix_to_bivector(const Signature& s, const Mat& a) {
  if (a.rows() != s.m || a.cols() != s.m) throw DimensionMismatch("matrix size does not match signature");
  Multivector r(s);
  for (int i = 0; i < s.m; ++i)
    for (int j = i + 1; j < s.m; ++j) r[(1u << i) | (1u << j)] = 0.5 * (a(i, j) - a(j, i));
  return r;
}

}  // namespace ck
