#pragma once

#include "congruence_kit/congruence.hpp"

#include <functional>
#include <string>
#include <vector>

namespace ck {

// Right-hand side of an ODE along one coordinate axis: dy/dx_axis at x.
using AxisRhs = std::function<Vec(const Vec& x, int axis, const Vec& y)>;

// Integrates y along monotone staircase paths from the base node: first along
// order[0] through the base, then along order[1] from every node reached, and
// so on. RK4 with `substeps` steps per grid interval; 0 picks steps no
// longer than kMaxTransportStep.
constexpr double kMaxTransportStep = 0.01;
std::vector<Vec> staircase_integrate(const Box& box, std::size_t base, const Vec& y0, const std::vector<int>& order,
                                     const AxisRhs& f, int substeps = 0);

// Central difference along axis on grid values, using the widest symmetric
// stencil available (orders 6, 4, 2) and one-sided second order otherwise.
struct GridPartial {
  Vec value;
  int order = 0;  // negative for one-sided
};
GridPartial grid_partial(const Box& box, const std::vector<Vec>& values, std::size_t node, int axis);

struct ParallelFrame {
  std::vector<SectionField> sections;  // r parallel sections of Ker L
  std::vector<double> signs;           // <s_i, s_i>_p
  std::size_t base = 0;
  double holonomy_residual = 0.0;      // two staircase orders compared
  double orthonormality_residual = 0.0;
  double kernel_residual = 0.0;        // largest component outside Ker L
};

ParallelFrame parallel_frame(const Congruence& c, const KernelSplitting& split, std::size_t base, int substeps = 0);
ParallelFrame parallel_frame(const Congruence& c, const KernelSplitting& split);

constexpr double kCompatibilityTol = 1e-5;
constexpr double kHolonomyTol = 1e-4;

struct CompatibilityReport {
  double kernel_closedness = 0.0;    // max |K gamma|
  double image_residual = 0.0;       // max |gamma - L L^+ gamma| (normal coordinates)
  double complement_residual = 0.0;  // max |nabla^N (L^{-1} gamma) - (Q - K) beta|
  double mainsyst_residual = 0.0;    // max |nabla^N (L^{-1} d beta'') - beta''|, reported only
  std::size_t kernel_node = 0, image_node = 0, complement_node = 0, mainsyst_node = 0;
  double tol = kCompatibilityTol;

  bool pass() const {
    return kernel_closedness <= tol && image_residual <= tol && complement_residual <= tol;
  }
  // Name of the first failing condition, empty if none.
  std::string failing() const;
};

CompatibilityReport check_compatibility(const Congruence& c, const KernelSplitting& split,
                                        double tol = kCompatibilityTol, bool mainsyst = true);

class CompatibilityError : public Error {
 public:
  CompatibilityError(const std::string& what, CompatibilityReport report) : Error(what), report(report) {}
  CompatibilityReport report;
};

class HolonomyError : public Error {
 public:
  HolonomyError(const std::string& what, double residual) : Error(what), residual(residual) {}
  double residual;
};

enum class Branch { Flat, Split, Injective };
std::string to_string(Branch b);

struct SupportSolution {
  const Congruence* owner = nullptr;
  Branch branch = Branch::Flat;
  int r = 0;
  SectionField s;                          // particular solution, lambda(base) = 0
  SectionField particular;                 // L^{-1} gamma
  ParallelFrame frame;                     // family basis
  std::vector<std::vector<double>> lambda; // r grid functions
  CompatibilityReport compatibility;
  double lambda_path_residual = 0.0;
  double residual = 0.0;                   // max |nabla^N s - beta| on the interior grid
  double family_residual = 0.0;            // same for sampled s + sum c_i s_i

  // s + sum c_i s_i at every node.
  std::vector<Vec> member(const std::vector<double>& constants) const;
};

// Max over nodes with a symmetric stencil of |nabla^N s - beta|.
double support_residual(const Congruence& c, const std::vector<Vec>& s);
// Same node set with the stencil spacing doubled, for order estimates.
double support_residual_coarse(const Congruence& c, const std::vector<Vec>& s);

SupportSolution solve_support(const Congruence& c, const KernelSplitting& split, double tol = kCompatibilityTol,
                              int substeps = 0);

struct ImmersionField {
  std::vector<Vec> phi;
  std::vector<double> constants;
  std::vector<double> sigma_min;          // smallest singular value of F^T G dphi
  std::vector<int> orientation;           // sign of det(F^T G dphi), 0 when singular
  std::vector<std::size_t> singular_nodes;
  bool orientation_preserving = false;
  bool regularized = false;               // constants adjusted by the search
  bool search_failed = false;
  std::vector<double> search_direction;   // nu coefficients, when the search ran
  double search_t = 0.0;
};

constexpr double kRankTol = 1e-6;

// Grid differential of a field: columns d_i phi.
Mat grid_differential(const Box& box, const std::vector<Vec>& phi, std::size_t node);

ImmersionField assemble_immersion(const Congruence& c, const SupportSolution& sol, std::vector<double> constants,
                                  unsigned seed = 2024, double rank_tol = kRankTol);

struct GaussMapResidual {
  double foot = 0.0;           // max distance from phi(x) to the affine plane
  double orthogonality = 0.0;  // max |(d phi(d_i))^N|
};
GaussMapResidual verify_gauss_map(const Congruence& c, const std::vector<Vec>& phi);

// Least-squares constants with reference - phi ~ sum c_i s_i; max deviation.
struct FamilyFit {
  std::vector<double> constants;
  double deviation = 0.0;
};
FamilyFit fit_family(const SupportSolution& sol, const std::vector<Vec>& phi, const std::vector<Vec>& reference);

struct FoliationReport {
  double equidistance_deviation = 0.0;  // max over pairs of (max - min) distance
  double min_distance = 0.0;            // smallest pointwise distance between distinct members
  double min_cross_distance = 0.0;      // smallest distance between the sampled leaves
  bool leaves_disjoint = true;
};
FoliationReport foliation_check(const Congruence& c, const SupportSolution& sol,
                                const std::vector<std::vector<double>>& constants);

}  // namespace ck
