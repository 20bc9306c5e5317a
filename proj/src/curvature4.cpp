#include "congruence_kit/curvature4.hpp"

#include "congruence_kit/numerics.hpp"
#include "congruence_kit/parallel.hpp"

#include <cmath>
#include <sstream>

namespace ck {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

void require_euclidean(const Congruence& c, const char* who) {
  if (!c.signature().euclidean())
    throw UnsupportedSignature(std::string(who) + ": curvature forms are implemented for Euclidean signatures");
}

void require_r4(const Congruence& c, const char* who) {
  require_euclidean(c, who);
  if (c.m() != 4 || c.n() != 2) throw DimensionMismatch(std::string(who) + ": needs planes in R^4 (m = 4, n = k = 2)");
}

struct JetForms {
  OrientedPlane plane;
  Multivector blade;
  Multivector eta1, eta2;  // d phi_o(d_1), d phi_o(d_2)
};

JetForms jet_forms(const Congruence& c, const Jet& j) {
  JetForms f;
  f.plane = j.plane(c.signature());
  f.blade = f.plane.blade();
  f.eta1 = linmap_to_eta(f.plane, j.U[0]);
  f.eta2 = linmap_to_eta(f.plane, j.U[1]);
  return f;
}

// omega_T, omega_N on (d_1, d_2); omega_N vanishes unless m = 4.
OmegaValue omega_coordinate(const Congruence& c, const JetForms& f) {
  Multivector R = eps_n(c.n()) * bracket(f.eta1, f.eta2);
  OmegaValue w;
  w.omega_T = inner(R, f.blade);
  if (c.m() == 4) w.omega_N = inner(R, hodge(f.blade));
  return w;
}

double simpson_weight(int i, int nodes) {
  if (i == 0 || i == nodes - 1) return 1.0;
  return i % 2 == 1 ? 4.0 : 2.0;
}

Vec cross3(const Vec& a, const Vec& b) {
  Vec c(3);
  c << a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0];
  return c;
}

// Integrand values on the node lattice of one chart, summed with Simpson weights
// row by row in a fixed order.
template <class F>
std::vector<double> chart_quadrature(const Box& b, int cells, std::size_t nvals, F&& eval) {
  const int nodes = 2 * cells + 1;
  const double h0 = (b.hi[0] - b.lo[0]) / (2.0 * cells), h1 = (b.hi[1] - b.lo[1]) / (2.0 * cells);
  std::vector<std::vector<double>> vals(static_cast<std::size_t>(nodes) * nodes);
  parallel_for(vals.size(), [&](std::size_t k) {
    const int i = static_cast<int>(k / nodes), jj = static_cast<int>(k % nodes);
    Vec x(2);
    x << b.lo[0] + i * h0, b.lo[1] + jj * h1;
    vals[k] = eval(x);
  });
  std::vector<double> total(nvals, 0.0);
  for (int i = 0; i < nodes; ++i) {
    std::vector<double> row(nvals, 0.0);
    for (int jj = 0; jj < nodes; ++jj) {
      const double w = simpson_weight(jj, nodes);
      const auto& v = vals[static_cast<std::size_t>(i) * nodes + jj];
      for (std::size_t q = 0; q < nvals; ++q) row[q] += w * v[q];
    }
    const double w = simpson_weight(i, nodes);
    for (std::size_t q = 0; q < nvals; ++q) total[q] += w * row[q];
  }
  for (double& t : total) t *= h0 * h1 / 9.0;
  return total;
}

DegreeResult to_degree(double value) {
  DegreeResult d;
  d.value = value;
  d.degree = static_cast<int>(std::lround(value));
  d.residual = std::abs(value - d.degree);
  d.integral = d.residual < 1e-2;
  return d;
}

}  // namespace

// ---------------------------------------------------------------- pointwise

CongruenceCurvature congruence_curvature(const Congruence& c, const Jet& j, const Vec& u, const Vec& v) {
  require_euclidean(c, "congruence_curvature");
  OrientedPlane pl = j.plane(c.signature());
  CurvatureOperator op = curvature(pl, j.tangent(u), j.tangent(v));
  CongruenceCurvature out;
  out.R = op.bivector;
  out.tangent_op = op.tangent;
  out.normal_op = op.normal;
  out.tangent_part = matrix_to_bivector(c.signature(), op.tangent);
  out.normal_part = matrix_to_bivector(c.signature(), op.normal);
  Mat P = pl.tangent_projector();
  out.off_diagonal = (P * op.full * (Mat::Identity(c.m(), c.m()) - P)).norm();
  return out;
}

CongruenceCurvature congruence_curvature(const Congruence& c, const Vec& x, const Vec& u, const Vec& v) {
  return congruence_curvature(c, c.jet(x), u, v);
}

OmegaValue omega_forms(const Congruence& c, const Jet& j, const Vec& u, const Vec& v) {
  require_r4(c, "omega_forms");
  OmegaValue w = omega_coordinate(c, jet_forms(c, j));
  const double det = u[0] * v[1] - u[1] * v[0];
  return {w.omega_T * det, w.omega_N * det};
}

OmegaValue omega_forms(const Congruence& c, const Vec& x, const Vec& u, const Vec& v) {
  return omega_forms(c, c.jet(x), u, v);
}

PointCurvatures pointwise_curvatures(const Congruence& c, const Vec& x, const Vec& lambda) {
  require_euclidean(c, "pointwise_curvatures");
  if (c.n() != 2 || (c.m() != 3 && c.m() != 4))
    throw DimensionMismatch("pointwise_curvatures: needs surfaces in R^3 or R^4");
  Jet j = c.jet(x);
  metric_at(c, j, lambda);  // throws on a singular metric
  Mat M = metric_map(c, j, lambda);
  JetForms f = jet_forms(c, j);
  OmegaValue w = omega_coordinate(c, f);
  Mat E = f.plane.frame;
  auto area = [&](const Vec& a, const Vec& b) {
    Vec pa = E.transpose() * M * a, pb = E.transpose() * M * b;
    return pa[0] * pb[1] - pa[1] * pb[0];
  };
  PointCurvatures pc;
  pc.omega_T = w.omega_T;
  pc.omega_N = w.omega_N;
  pc.dA = area(Vec::Unit(2, 0), Vec::Unit(2, 1));
  pc.K = w.omega_T / pc.dA;
  pc.K_N = w.omega_N / pc.dA;
  // Second basis.
  Vec a(2), b(2);
  a << 1.0, 0.3;
  b << -0.4, 1.2;
  const double det = a[0] * b[1] - a[1] * b[0];
  const double dA2 = area(a, b);
  const double K2 = w.omega_T * det / dA2, KN2 = w.omega_N * det / dA2;
  pc.basis_deviation = std::max(std::abs(K2 - pc.K), std::abs(KN2 - pc.K_N));
  return pc;
}

// ---------------------------------------------------------------- Lambda^2 R^4

namespace {

std::array<Multivector, 3> make_basis(bool plus) {
  Signature s(4);
  auto B = [&](std::uint32_t mask) { return Multivector::blade(s, mask); };
  const double r = 1.0 / std::sqrt(2.0);
  const std::uint32_t e12 = 0b0011, e13 = 0b0101, e14 = 0b1001, e23 = 0b0110, e24 = 0b1010, e34 = 0b1100;
  if (plus) return {r * (B(e12) + B(e34)), r * (B(e13) - B(e24)), r * (B(e14) + B(e23))};
  return {r * (B(e12) - B(e34)), r * (B(e13) + B(e24)), r * (B(e23) - B(e14))};
}

}  // namespace

const std::array<Multivector, 3>& lambda_plus_basis() {
  static const std::array<Multivector, 3> b = make_basis(true);
  return b;
}

const std::array<Multivector, 3>& lambda_minus_basis() {
  static const std::array<Multivector, 3> b = make_basis(false);
  return b;
}

SelfDualSplit selfdual_split(const Multivector& w) {
  if (w.signature().m != 4 || !w.signature().euclidean())
    throw DimensionMismatch("selfdual_split: needs a 2-vector of Euclidean R^4");
  if (!w.homogeneous(2, 1e-12 * std::max(1.0, w.max_abs())))
    throw Error("selfdual_split: argument is not a 2-vector");
  SelfDualSplit sd;
  Multivector sw = hodge(w);
  sd.plus = 0.5 * (w + sw);
  sd.minus = 0.5 * (w - sw);
  sd.g1 = Vec(3);
  sd.g2 = Vec(3);
  for (int i = 0; i < 3; ++i) {
    sd.g1[i] = inner(sd.plus, lambda_plus_basis()[i]);
    sd.g2[i] = inner(sd.minus, lambda_minus_basis()[i]);
  }
  sd.star_residual = std::max({(hodge(sd.plus) - sd.plus).coeff_norm(), (hodge(sd.minus) + sd.minus).coeff_norm(),
                               (hodge(sw) - w).coeff_norm()});
  return sd;
}

// ---------------------------------------------------------------- closed surfaces

ClosedSurfaceCongruence ClosedSurfaceCongruence::from_scenario(const Scenario& s, int cells) {
  if (s.atlas.empty()) throw AtlasError("scenario " + s.key + " has no closed-surface atlas");
  if (s.n != 2) throw DimensionMismatch("closed surfaces need n = 2");
  ClosedSurfaceCongruence cs;
  cs.sig = s.sig;
  cs.atlas = s.atlas;
  cs.sphere_atlas = s.sphere_atlas;
  cs.cells = cells;
  return cs;
}

double ClosedSurfaceCongruence::atlas_mismatch() const {
  auto compare = [&](const Congruence& a, const Vec& xa, const Congruence& b, const Vec& xb) {
    AffinePlane pa = a.at(xa), pb = b.at(xb);
    return std::max((pa.plane.blade() - pb.plane.blade()).coeff_norm(), (pa.foot - pb.foot).norm());
  };
  const int samples = 64;
  double worst = 0.0;
  if (sphere_atlas) {
    if (atlas.size() != 2) throw AtlasError("sphere atlas needs exactly two charts");
    Congruence north(sig, 2, atlas[0].domain, atlas[0].map, mode, fd_step);
    Congruence south(sig, 2, atlas[1].domain, atlas[1].map, mode, fd_step);
    // The south cap uses the coordinates (pi - theta, -phi).
    const Box& b = atlas[0].domain;
    for (int q = 0; q < samples; ++q) {
      double ph = b.lo[1] + (b.hi[1] - b.lo[1]) * q / samples;
      Vec xn(2), xs(2);
      xn << b.hi[0], ph;
      xs << b.hi[0], -ph;
      worst = std::max(worst, compare(north, xn, south, xs));
    }
    return worst;
  }
  for (const Chart& ch : atlas) {
    Congruence c(sig, 2, ch.domain, ch.map, mode, fd_step);
    const Box& b = ch.domain;
    for (int axis = 0; axis < 2; ++axis) {
      if (!b.periodic[axis]) throw AtlasError("closed-surface chart is not periodic along every axis");
      const int other = 1 - axis;
      for (int q = 0; q < samples; ++q) {
        Vec x0(2), x1(2);
        x0[other] = x1[other] = b.lo[other] + (b.hi[other] - b.lo[other]) * q / samples;
        x0[axis] = b.lo[axis];
        x1[axis] = b.hi[axis];
        worst = std::max(worst, compare(c, x0, c, x1));
      }
    }
  }
  return worst;
}

DegreeResult degree(const std::vector<Box>& charts, const SphereMap& g, double r, int cells) {
  if (!(r > 0.0)) throw Error("degree: radius must be positive");
  double total = 0.0;
  for (std::size_t k = 0; k < charts.size(); ++k) {
    auto q = chart_quadrature(charts[k], cells, 1, [&](const Vec& x) {
      Vec v, d1, d2;
      g(k, x, v, d1, d2);
      return std::vector<double>{v.dot(cross3(d1, d2)) / r};
    });
    total += q[0];
  }
  return to_degree(total / (4.0 * M_PI * r * r));
}

DegreeResult degree(const std::vector<Box>& charts, const std::function<Vec(std::size_t, const Vec&)>& g, double r,
                    int cells, double h) {
  SphereMap sm = [&](std::size_t k, const Vec& x, Vec& v, Vec& d1, Vec& d2) {
    auto f = [&](const Vec& y) { return g(k, y); };
    v = f(x);
    d1 = richardson_partial(f, x, 0, h);
    d2 = richardson_partial(f, x, 1, h);
  };
  return degree(charts, sm, r, cells);
}

GaussBonnetReport gauss_bonnet(const ClosedSurfaceCongruence& cs) {
  if (cs.sig.m != 4 || !cs.sig.euclidean()) throw DimensionMismatch("gauss_bonnet: needs planes in Euclidean R^4");
  if (cs.cells < 2) throw Error("gauss_bonnet: needs at least 2 cells per axis");
  GaussBonnetReport rep;
  rep.cells = cs.cells;
  rep.atlas_mismatch = cs.atlas_mismatch();
  if (rep.atlas_mismatch > kAtlasTol) {
    std::ostringstream os;
    os << "gauss_bonnet: atlas identifications disagree by " << rep.atlas_mismatch;
    throw AtlasError(os.str());
  }
  const double r = 1.0 / std::sqrt(2.0);
  double iT = 0.0, iN = 0.0, a1 = 0.0, a2 = 0.0;
  std::vector<double> pull_worst(cs.atlas.size(), 0.0);
  for (std::size_t k = 0; k < cs.atlas.size(); ++k) {
    const Chart& ch = cs.atlas[k];
    Congruence c(cs.sig, 2, ch.domain, ch.map, cs.mode, cs.fd_step);
    auto q = chart_quadrature(ch.domain, cs.cells, 4, [&](const Vec& x) {
      Jet j = c.jet(x);
      JetForms f = jet_forms(c, j);
      OmegaValue w = omega_coordinate(c, f);
      SelfDualSplit p = selfdual_split(f.blade), e1 = selfdual_split(f.eta1), e2 = selfdual_split(f.eta2);
      double w1 = p.g1.dot(cross3(e1.g1, e2.g1)) / r;
      double w2 = p.g2.dot(cross3(e1.g2, e2.g2)) / r;
      return std::vector<double>{w.omega_T, w.omega_N, w1, w2};
    });
    iT += q[0];
    iN += q[1];
    a1 += q[2];
    a2 += q[3];
    // Pointwise residual at the chart grid nodes.
    const Box& b = ch.domain;
    std::vector<double> res(b.size(), 0.0);
    parallel_for(b.size(), [&](std::size_t i) {
      Jet j = c.jet(b.point(i));
      JetForms f = jet_forms(c, j);
      OmegaValue w = omega_coordinate(c, f);
      SelfDualSplit p = selfdual_split(f.blade), e1 = selfdual_split(f.eta1), e2 = selfdual_split(f.eta2);
      res[i] = std::abs(w.omega_T - p.g1.dot(cross3(e1.g1, e2.g1)) / r - p.g2.dot(cross3(e1.g2, e2.g2)) / r);
    });
    for (double v : res) pull_worst[k] = std::max(pull_worst[k], v);
  }
  for (double v : pull_worst) rep.pullback_residual = std::max(rep.pullback_residual, v);
  rep.int_omega_T = iT;
  rep.int_omega_N = iN;
  rep.chi_T = iT / kTwoPi;
  rep.chi_N = iN / kTwoPi;
  const double area = 4.0 * M_PI * r * r;
  rep.deg_g1 = to_degree(a1 / area);
  rep.deg_g2 = to_degree(a2 / area);
  rep.degrees_integral = rep.deg_g1.integral && rep.deg_g2.integral;
  rep.identity_T = std::abs(iT - kTwoPi * (rep.deg_g1.degree + rep.deg_g2.degree));
  rep.identity_N = std::abs(iN - kTwoPi * (rep.deg_g1.degree - rep.deg_g2.degree));
  if (!rep.degrees_integral) {
    std::ostringstream os;
    os << "degree not within 1e-2 of an integer at " << cs.cells << " cells per axis; rerun with " << 2 * cs.cells;
    rep.suggestion = os.str();
  }
  return rep;
}

std::vector<CurvatureSample> curvature_samples(const Congruence& c, const std::function<Vec(const Vec&)>& lambda) {
  require_euclidean(c, "curvature_samples");
  const Box& b = c.domain();
  std::vector<CurvatureSample> out(b.size());
  parallel_for(b.size(), [&](std::size_t i) {
    Vec x = b.point(i);
    CurvatureSample& s = out[i];
    s.x = x;
    Jet j = c.jet(x);
    OmegaValue w = omega_coordinate(c, jet_forms(c, j));
    s.omega_T = w.omega_T;
    s.omega_N = w.omega_N;
    s.K = s.K_N = std::nan("");
    s.metric_defined = false;
    try {
      PointCurvatures pc = pointwise_curvatures(c, x, lambda ? lambda(x) : Vec(Vec::Zero(c.m())));
      s.K = pc.K;
      s.K_N = pc.K_N;
      s.metric_defined = true;
    } catch (const Error&) {
    }
  });
  return out;
}

}  // namespace ck
