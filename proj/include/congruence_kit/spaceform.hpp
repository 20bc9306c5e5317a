#pragma once

#include "congruence_kit/congruence.hpp"

#include <functional>
#include <vector>

namespace ck {

struct HyperquadricReport {
  bool contained = false;
  double max_foot = 0.0;       // max |v| over the grid
  double beta_residual = 0.0;  // max |beta|, reported when contained
  std::vector<double> profile; // |v| per node
};

HyperquadricReport check_hyperquadric(const Congruence& c, double tol = 1e-8);
// max - min of <phi, phi>_p over a sampled field.
double hyperquadric_residual(const Signature& s, const std::vector<Vec>& phi);

// Pointwise data of the normal frame at x.
struct NormalFrameAt {
  Vec e1, e2;
  std::vector<Vec> de1, de2;  // d_i e1, d_i e2
  Vec mu;                     // mu_i = <d_i e2, e1>_p
  Mat A1, A2;                 // n x n: F^T G d_i e_j (tangent parts)
};

// Normal frame (e1, e2) with <e1,e1>_p = 1, <e2,e2>_p = eps, from two fixed
// seed vectors projected to the normal plane.
class FramedNormalPair {
 public:
  explicit FramedNormalPair(const Congruence& c);
  FramedNormalPair(const Congruence& c, Vec seed1, Vec seed2);

  const Congruence& congruence() const { return *c_; }
  double eps() const { return eps_; }
  const Vec& seed1() const { return seed1_; }
  const Vec& seed2() const { return seed2_; }
  NormalFrameAt at(const Vec& x) const;
  // Largest pseudo-orthonormality and normal-plane residuals over the grid.
  double orthonormality_residual() const;

 private:
  const Congruence* c_;
  Vec seed1_, seed2_;
  double eps_ = 1.0;
  void check_grid();
};

struct ThetaSolution {
  bool closed = false;
  double dmu_residual = 0.0;       // max |d mu|
  std::size_t dmu_node = 0;
  std::vector<double> dmu;         // per node
  std::vector<double> theta;       // empty when refused
  double path_residual = 0.0;
  std::vector<Vec> phi;            // cos_eps(theta) e1 + sin_eps(theta) e2
  double normal_residual = 0.0;    // max |(d phi)^N| by grid differences
  double normal_residual_coarse = 0.0;
};

ThetaSolution theta_equation(const FramedNormalPair& pair, double theta0 = 0.0, double tol = 1e-5);

// cos_eps and sin_eps.
double cos_eps(double eps, double t);
double sin_eps(double eps, double t);

std::vector<Vec> parallel_family(const FramedNormalPair& pair, const ThetaSolution& th, double t);

struct SingularLeafReport {
  bool immersion = true;          // d(phi_o) injective on the grid; bound asserted only then
  int max_count = 0;              // largest number of singular t at one node
  std::size_t max_node = 0;
  std::vector<double> leaves;     // distinct singular t (mod pi when eps = 1)
  std::vector<int> counts;        // per node
  double threshold = 0.0;
  bool bound_holds = true;        // max_count <= n, when asserted
};

// Sweep of t with local minima of sigma_min refined by golden section.
SingularLeafReport singular_leaf_scan(const FramedNormalPair& pair, const ThetaSolution& th, int sweep = 64,
                                      double rel_tol = 1e-6, double t_range = 3.0);

struct Rank1Section {
  SectionField s;
  std::vector<Vec> sigma;
  std::vector<double> f;
  double dmu_residual = 0.0;
  double kernel_residual = 0.0;     // max |nabla^N sigma - mu sigma|
  double parallel_residual = 0.0;   // max |nabla^N s| by grid differences
  double parallel_residual_coarse = 0.0;
  double path_residual = 0.0;
  double hyperquadric = 0.0;        // hyperquadric_residual of v + s
};

// sigma defaults to K w0 with a fixed seed w0.
Rank1Section rank1_parallel_section(const Congruence& c, const KernelSplitting& split,
                                    std::function<Vec(const Vec&)> sigma = {}, double tol = 1e-5);

}  // namespace ck
