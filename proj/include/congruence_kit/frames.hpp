#pragma once

#include "congruence_kit/algebra.hpp"
#include "congruence_kit/dual.hpp"

#include <cmath>
#include <vector>

namespace ck {

template <class T>
using VecT = std::vector<T>;

template <class T>
T pdot(const Signature& s, const VecT<T>& a, const VecT<T>& b) {
  T r = T(0.0);
  for (int i = 0; i < s.m; ++i) r += s.g(i) * (a[i] * b[i]);
  return r;
}

// Gram-Schmidt for the flat metric of signature s. Keeps the orientation of
// the input columns; output columns satisfy <f_i, f_j>_p = +-delta_ij.
template <class T>
std::vector<VecT<T>> gram_schmidt(const Signature& s, std::vector<VecT<T>> cols, double tol = 1e-12) {
  using std::abs;
  using std::sqrt;
  std::vector<VecT<T>> out;
  std::vector<double> norms;
  for (auto& c : cols) {
    for (std::size_t j = 0; j < out.size(); ++j) {
      T a = pdot(s, c, out[j]) * norms[j];
      for (int i = 0; i < s.m; ++i) c[i] -= a * out[j][i];
    }
    T q = pdot(s, c, c);
    double qv = value_of(q);
    if (std::abs(qv) < tol) throw Error("gram_schmidt: degenerate or lightlike column");
    T len = sqrt(qv < 0.0 ? T(0.0) - q : q);
    for (int i = 0; i < s.m; ++i) c[i] = c[i] / len;
    out.push_back(c);
    norms.push_back(qv < 0.0 ? -1.0 : 1.0);
  }
  return out;
}

inline Mat cols_to_mat(const std::vector<VecT<double>>& cols, int m) {
  Mat a(m, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (int i = 0; i < m; ++i) a(i, j) = cols[j][i];
  return a;
}

inline std::vector<VecT<double>> mat_to_cols(const Mat& a) {
  std::vector<VecT<double>> cols(static_cast<std::size_t>(a.cols()), VecT<double>(static_cast<std::size_t>(a.rows())));
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) cols[j][i] = a(i, j);
  return cols;
}

inline Mat orthonormalize(const Signature& s, const Mat& a) {
  return cols_to_mat(gram_schmidt<double>(s, mat_to_cols(a)), s.m);
}

// (F^T G F)^{-1} for a pseudo-orthonormal frame F; diagonal with entries +-1.
inline Mat frame_gram_inverse(const Signature& s, const Mat& f) {
  Mat gram = f.transpose() * s.matrix() * f;
  return gram.inverse();
}

// Projector onto span(F) along its metric orthogonal complement.
inline Mat tangent_projector(const Signature& s, const Mat& f) {
  return f * frame_gram_inverse(s, f) * f.transpose() * s.matrix();
}

}  // namespace ck
