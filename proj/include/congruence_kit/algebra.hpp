#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ck {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct NotDecomposable : Error {
  using Error::Error;
};
struct UnsupportedSignature : Error {
  using Error::Error;
};

// Flat metric diag(-1 x p, +1 x (m-p)) on R^m.
struct Signature {
  int m = 0;
  int p = 0;

  Signature() = default;
  Signature(int m_, int p_ = 0);

  double g(int i) const { return i < p ? -1.0 : 1.0; }
  bool euclidean() const { return p == 0; }
  Vec diag() const;
  Mat matrix() const;
  double dot(const Vec& a, const Vec& b) const;
  bool operator==(const Signature& o) const { return m == o.m && p == o.p; }
  bool operator!=(const Signature& o) const { return !(*this == o); }
};

// eps_n = (-1)^(n(n+1)/2 + 1)
double eps_n(int n);

// Sign picked up when reordering e_A e_B into canonical increasing order.
int reorder_sign(std::uint32_t a, std::uint32_t b);

inline int popcount(std::uint32_t x) { return __builtin_popcount(x); }

// Dense element of the exterior/Clifford algebra over R^m; coefficient i
// belongs to the basis blade whose bit set is i.
class Multivector {
 public:
  Multivector() = default;
  explicit Multivector(const Signature& s);

  static Multivector scalar(const Signature& s, double c);
  static Multivector basis(const Signature& s, int i);
  static Multivector blade(const Signature& s, std::uint32_t mask, double c = 1.0);
  static Multivector vector(const Signature& s, const Vec& v);

  const Signature& signature() const { return sig_; }
  std::size_t size() const { return c_.size(); }
  double& operator[](std::uint32_t mask) { return c_[mask]; }
  double operator[](std::uint32_t mask) const { return c_[mask]; }
  const std::vector<double>& coefficients() const { return c_; }

  Multivector grade(int g) const;
  // Highest grade with a coefficient above tol, or -1 for zero.
  int max_grade(double tol = 0.0) const;
  bool homogeneous(int g, double tol = 1e-12) const;
  Vec vector_part() const;
  double scalar_part() const { return c_.empty() ? 0.0 : c_[0]; }
  double max_abs() const;
  // sqrt of sum of squared coefficients (basis-orthonormal, ignores signs).
  double coeff_norm() const;

  Multivector& operator+=(const Multivector& o);
  Multivector& operator-=(const Multivector& o);
  Multivector& operator*=(double s);

 private:
  Signature sig_;
  std::vector<double> c_;
};

Multivector operator+(Multivector a, const Multivector& b);
Multivector operator-(Multivector a, const Multivector& b);
Multivector operator-(Multivector a);
Multivector operator*(double s, Multivector a);
Multivector operator*(Multivector a, double s);

Multivector wedge(const Multivector& a, const Multivector& b);
// Convention v.v = -<v,v>_p.
Multivector clifford(const Multivector& a, const Multivector& b);
Multivector bracket(const Multivector& a, const Multivector& b);

// Metric-induced inner product: <e_I, e_J> = delta_IJ prod_{i in I} g_ii.
double inner(const Multivector& a, const Multivector& b);

Multivector blade_from_frame(const Signature& s, const Mat& frame);

// Ratio sigma_{m-g+1} / |B| of the map v -> v ^ B; zero iff B is a blade.
double plucker_residual(const Multivector& b, int g);
constexpr double kDecomposableTol = 1e-9;

// i_p(w) for a unit decomposable g-blade p and a (g+1)-vector w.
Vec interior(const Multivector& pblade, const Multivector& w);

// Euclidean Hodge star with e_1 ^ ... ^ e_m positive.
Multivector hodge(const Multivector& w);

// 2-vector <-> skew matrix, e_i ^ e_j <-> e_i e_j^T - e_j e_i^T.
Mat bivector_to_matrix(const Multivector& b);
Multivector matrix_to_bivector(const Signature& s, const Mat& a);

}  // namespace ck
