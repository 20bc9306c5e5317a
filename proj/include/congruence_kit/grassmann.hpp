#pragma once

#include "congruence_kit/algebra.hpp"

#include <utility>

namespace ck {

constexpr double kOrthonormalTol = 1e-10;
constexpr double kAlphaTol = 1e-8;

// Oriented linear n-plane, stored as a pseudo-orthonormal frame.
struct OrientedPlane {
  Signature sig;
  Mat frame;  // m x n

  OrientedPlane() = default;
  OrientedPlane(const Signature& s, const Mat& orthonormal_frame);
  // Gram-Schmidt on arbitrary spanning columns; column order fixes orientation.
  static OrientedPlane from_columns(const Signature& s, const Mat& cols);

  int n() const { return static_cast<int>(frame.cols()); }
  int m() const { return sig.m; }
  Multivector blade() const;
  Mat gram_inverse() const;        // (F^T G F)^{-1}
  Mat tangent_projector() const;   // P
  Mat normal_projector() const;    // Q = I - P
  // Pseudo-orthonormal basis of the orthogonal complement, oriented so that
  // frame followed by it is positively oriented.
  Mat normal_frame() const;
  double orthonormality_residual() const;
};

struct AffinePlane {
  OrientedPlane plane;
  Vec foot;  // lies in the plane

  AffinePlane() = default;
  AffinePlane(OrientedPlane p, Vec v);
  double containment_residual() const;  // |p ^ v|
};

// Tangent vector at p: column j is the image of frame column j, in p^perp.
struct GrassTangent {
  Mat map;  // m x n

  // The same map as an operator on R^m, zero on p^perp.
  Mat ambient(const OrientedPlane& p) const;
  // Adjoint p^perp -> p as an operator on R^m, zero on p.
  Mat adjoint(const OrientedPlane& p) const;
  double normality_residual(const OrientedPlane& p) const;
};

GrassTangent eta_to_linmap(const OrientedPlane& p, const Multivector& eta, double tol = 1e-8);
Multivector linmap_to_eta(const OrientedPlane& p, const GrassTangent& u);
// Tangent vector from a derivative of the frame columns.
GrassTangent tangent_from_frame_derivative(const OrientedPlane& p, const Mat& dframe);

struct AlphaValue {
  Vec def1;  // -i_p(eta ^ v)
  Vec def2;  // i_p(p ^ w) = w^N
  double deviation = 0.0;
};

// alpha at (p, v) of the tangent vector (eta, w); throws when the two
// definitions disagree beyond tol.
AlphaValue alpha(const AffinePlane& p, const Multivector& eta, const Vec& w, double tol = kAlphaTol);
AlphaValue alpha(const AffinePlane& p, const GrassTangent& u, const Vec& w, double tol = kAlphaTol);

struct CurvatureOperator {
  Multivector bivector;  // eps_n [u, v]
  Mat full;              // xi -> eps_n [xi, [u, v]] on R^m
  Mat tangent;           // restriction to p
  Mat normal;            // restriction to p^perp
};

CurvatureOperator curvature(const OrientedPlane& p, const GrassTangent& u, const GrassTangent& v);
// u o v^* - v o u^* on p^perp.
Mat normal_curvature_adjoint(const OrientedPlane& p, const GrassTangent& u, const GrassTangent& v);
// Y^*(xi) for xi in p^perp.
Vec shape_Bprime(const OrientedPlane& p, const Vec& xi, const GrassTangent& y, double tol = 1e-8);
std::pair<Vec, Vec> project(const OrientedPlane& p, const Vec& w);

}  // namespace ck
