#include "congruence_kit/reconstruct.hpp"

#include "congruence_kit/numerics.hpp"
#include "congruence_kit/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace ck {

std::vector<Vec> staircase_integrate(const Box& box, std::size_t base, const Vec& y0, const std::vector<int>& order,
                                     const AxisRhs& f, int substeps) {
  std::vector<Vec> out(box.size());
  out[base] = y0;
  std::vector<std::size_t> reached{base};
  for (int axis : order) {
    const double h = box.spacing(axis);
    const int steps = substeps > 0 ? substeps : std::max(2, static_cast<int>(std::ceil(h / kMaxTransportStep)));
    std::vector<std::vector<std::size_t>> lines(reached.size());
    parallel_for(reached.size(), [&](std::size_t i) {
      for (int dir : {1, -1}) {
        std::vector<int> idx = box.unflatten(reached[i]);
        Vec y = out[reached[i]];
        while (idx[axis] + dir >= 0 && idx[axis] + dir < box.res[axis]) {
          const Vec x0 = box.point(idx);
          auto rhs = [&](double t, const Vec& yy) {
            Vec x = x0;
            x[axis] = t;
            return f(x, axis, yy);
          };
          y = rk4(rhs, x0[axis], x0[axis] + dir * h, y, steps);
          idx[axis] += dir;
          std::size_t flat = box.flatten(idx);
          out[flat] = y;
          lines[i].push_back(flat);
        }
      }
    });
    for (const auto& l : lines) reached.insert(reached.end(), l.begin(), l.end());
  }
  return out;
}

namespace {

GridPartial partial_impl(const Box& box, const std::vector<Vec>& values, std::size_t node, int axis, int stride,
                         int max_order) {
  const double h = box.spacing(axis) * stride;
  auto at = [&](int j) -> const Vec* {
    long nb = box.neighbour(node, axis, j * stride);
    return nb < 0 ? nullptr : &values[static_cast<std::size_t>(nb)];
  };
  const Vec *p1 = at(1), *m1 = at(-1), *p2 = at(2), *m2 = at(-2), *p3 = at(3), *m3 = at(-3);
  GridPartial g;
  if (max_order >= 6 && p3 && m3 && p2 && m2 && p1 && m1) {
    g.value = (45.0 * (*p1 - *m1) - 9.0 * (*p2 - *m2) + (*p3 - *m3)) / (60.0 * h);
    g.order = 6;
  } else if (max_order >= 4 && p2 && m2 && p1 && m1) {
    g.value = (8.0 * (*p1 - *m1) - (*p2 - *m2)) / (12.0 * h);
    g.order = 4;
  } else if (p1 && m1) {
    g.value = (*p1 - *m1) / (2.0 * h);
    g.order = 2;
  } else if (p1 && p2) {
    g.value = (-3.0 * values[node] + 4.0 * *p1 - *p2) / (2.0 * h);
    g.order = -2;
  } else if (m1 && m2) {
    g.value = (3.0 * values[node] - 4.0 * *m1 + *m2) / (2.0 * h);
    g.order = -2;
  } else {
    throw Error("grid_partial: grid too small along axis");
  }
  return g;
}

double pnorm(const Signature& s, const Vec& a) { return std::sqrt(std::abs(s.dot(a, a))); }

}  // namespace

GridPartial grid_partial(const Box& box, const std::vector<Vec>& values, std::size_t node, int axis) {
  return partial_impl(box, values, node, axis, 1, 6);
}

// ---------------------------------------------------------------- parallel frame

namespace {

struct Transport {
  ParallelFrame frame;
  std::vector<std::vector<double>> lambda;
  double lambda_path_residual = 0.0;
};

Transport transport(const Congruence& c, const KernelSplitting& split, std::size_t base, int substeps,
                    bool with_lambda) {
  const Box& box = c.domain();
  const Signature& sig = c.signature();
  const int m = c.m();
  const int r = split.r;
  if (r < 1) throw Error("parallel_frame: kernel is trivial");
  Transport out;
  ParallelFrame& fr = out.frame;
  fr.base = base;
  Mat k0 = orthonormalize(sig, split.grid[base].kernel);
  if (k0.cols() != r) throw Error("parallel_frame: degenerate kernel basis at the base node");
  for (int i = 0; i < r; ++i) fr.signs.push_back(sig.dot(k0.col(i), k0.col(i)) < 0.0 ? -1.0 : 1.0);

  const int dim = r * m + (with_lambda ? r : 0);
  Vec y0 = Vec::Zero(dim);
  for (int i = 0; i < r; ++i) y0.segment(i * m, m) = k0.col(i);
  AxisRhs rhs = [&](const Vec& x, int axis, const Vec& y) {
    Jet j = c.jet(x);
    Vec dy(dim);
    Vec b = with_lambda ? Vec(beta(j).col(axis)) : Vec();
    for (int i = 0; i < r; ++i) {
      Vec si = y.segment(i * m, m);
      dy.segment(i * m, m) = -j.dP[axis] * si;
      if (with_lambda) dy[r * m + i] = fr.signs[i] * sig.dot(b, si);
    }
    return dy;
  };
  std::vector<int> order_a(box.dim()), order_b(box.dim());
  for (int a = 0; a < box.dim(); ++a) {
    order_a[a] = a;
    order_b[a] = box.dim() - 1 - a;
  }
  std::vector<Vec> ya = staircase_integrate(box, base, y0, order_a, rhs, substeps);
  std::vector<Vec> yb = box.dim() > 1 ? staircase_integrate(box, base, y0, order_b, rhs, substeps) : ya;

  fr.sections.assign(r, SectionField{&c, Bundle::N, std::vector<Vec>(box.size())});
  if (with_lambda) out.lambda.assign(r, std::vector<double>(box.size()));
  for (std::size_t nd = 0; nd < box.size(); ++nd) {
    fr.holonomy_residual = std::max(fr.holonomy_residual, (ya[nd].head(r * m) - yb[nd].head(r * m)).norm());
    for (int i = 0; i < r; ++i) {
      fr.sections[i].values[nd] = ya[nd].segment(i * m, m);
      if (with_lambda) {
        out.lambda[i][nd] = ya[nd][r * m + i];
        out.lambda_path_residual = std::max(out.lambda_path_residual, std::abs(ya[nd][r * m + i] - yb[nd][r * m + i]));
      }
    }
    const Mat& K = split.grid[nd].K;
    for (int i = 0; i < r; ++i) {
      const Vec& si = fr.sections[i].values[nd];
      fr.kernel_residual = std::max(fr.kernel_residual, (si - K * si).norm());
      for (int q = 0; q < r; ++q) {
        double target = i == q ? fr.signs[i] : 0.0;
        fr.orthonormality_residual =
            std::max(fr.orthonormality_residual, std::abs(sig.dot(si, fr.sections[q].values[nd]) - target));
      }
    }
  }
  if (fr.holonomy_residual > kHolonomyTol) {
    std::ostringstream os;
    os << "parallel_frame: holonomy residual " << fr.holonomy_residual << " exceeds " << kHolonomyTol
       << "; the kernel bundle is not flat";
    throw HolonomyError(os.str(), fr.holonomy_residual);
  }
  return out;
}

}  // namespace

ParallelFrame parallel_frame(const Congruence& c, const KernelSplitting& split, std::size_t base, int substeps) {
  return transport(c, split, base, substeps, false).frame;
}

ParallelFrame parallel_frame(const Congruence& c, const KernelSplitting& split) {
  return parallel_frame(c, split, c.domain().flatten(c.domain().base_index()));
}

// ---------------------------------------------------------------- compatibility

std::string CompatibilityReport::failing() const {
  if (kernel_closedness > tol) return "kernel_closedness";
  if (image_residual > tol) return "gamma_in_image";
  if (complement_residual > tol) return "complement_equation";
  return "";
}

CompatibilityReport check_compatibility(const Congruence& c, const KernelSplitting& split, double tol,
                                        bool mainsyst) {
  const Box& box = c.domain();
  const int n = c.n();
  const auto pairs = index_pairs(n);
  const double h = c.derived_step();
  struct NodeRes {
    double kc = 0, im = 0, co = 0, ms = 0;
  };
  std::vector<NodeRes> res(box.size());
  const bool has_complement = split.r < c.k() && !pairs.empty();

  auto pinv_gamma = [&](const Vec& y) { return apply_pinv(c, script_L(c, y), gamma_form(c, y)); };
  auto beta2 = [&](const Vec& y) {
    Jet j = c.jet(y);
    LPoint lp = script_L(c, j);
    return Mat((j.Q - lp.K) * beta(j));
  };
  auto pinv_dbeta2 = [&](const Vec& y) {
    Jet j = c.jet(y);
    std::vector<Mat> db(n);
    for (int i = 0; i < n; ++i) db[i] = richardson_partial(beta2, y, i, h);
    Mat g(c.m(), static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t p = 0; p < pairs.size(); ++p)
      g.col(static_cast<Eigen::Index>(p)) = j.Q * (db[pairs[p].first].col(pairs[p].second) -
                                                   db[pairs[p].second].col(pairs[p].first));
    return apply_pinv(c, script_L(c, j), g);
  };

  parallel_for(box.size(), [&](std::size_t nd) {
    if (pairs.empty()) return;
    const Vec x = box.point(nd);
    const LPoint& lp = split.grid[nd];
    Jet j = c.jet(x);
    Mat g = gamma_form(c, x);
    NodeRes& r = res[nd];
    for (Eigen::Index p = 0; p < g.cols(); ++p) r.kc = std::max(r.kc, (lp.K * g.col(p)).norm());
    Vec st = stack_form(c, lp, g);
    r.im = (st - lp.L * (lp.pinv * st)).norm();
    if (!has_complement) return;
    Mat b = beta(j);
    Mat b2 = (j.Q - lp.K) * b;
    for (int i = 0; i < n; ++i) {
      Vec d = j.Q * richardson_partial(pinv_gamma, x, i, h);
      r.co = std::max(r.co, (d - b2.col(i)).norm());
      if (mainsyst) {
        Vec d2 = j.Q * richardson_partial(pinv_dbeta2, x, i, h);
        r.ms = std::max(r.ms, (d2 - b2.col(i)).norm());
      }
    }
  });

  CompatibilityReport rep;
  rep.tol = tol;
  for (std::size_t nd = 0; nd < res.size(); ++nd) {
    auto upd = [nd](double v, double& best, std::size_t& where) {
      if (v > best) {
        best = v;
        where = nd;
      }
    };
    upd(res[nd].kc, rep.kernel_closedness, rep.kernel_node);
    upd(res[nd].im, rep.image_residual, rep.image_node);
    upd(res[nd].co, rep.complement_residual, rep.complement_node);
    upd(res[nd].ms, rep.mainsyst_residual, rep.mainsyst_node);
  }
  return rep;
}

// ---------------------------------------------------------------- support

std::string to_string(Branch b) {
  switch (b) {
    case Branch::Flat: return "flat";
    case Branch::Split: return "split";
    case Branch::Injective: return "injective";
  }
  return "";
}

std::vector<Vec> SupportSolution::member(const std::vector<double>& constants) const {
  if (static_cast<int>(constants.size()) != r) throw DimensionMismatch("SupportSolution::member: need r constants");
  std::vector<Vec> out = s.values;
  for (std::size_t nd = 0; nd < out.size(); ++nd)
    for (int i = 0; i < r; ++i) out[nd] += constants[i] * frame.sections[i].values[nd];
  return out;
}

namespace {

double support_residual_stride(const Congruence& c, const std::vector<Vec>& s, int stride) {
  const Box& box = c.domain();
  std::vector<double> worst(box.size(), 0.0);
  parallel_for(box.size(), [&](std::size_t nd) {
    for (int a = 0; a < box.dim(); ++a)
      if (box.neighbour(nd, a, 2) < 0 || box.neighbour(nd, a, -2) < 0) return;
    Jet j = c.jet(box.point(nd));
    Mat b = beta(j);
    for (int a = 0; a < box.dim(); ++a) {
      GridPartial g = partial_impl(box, s, nd, a, stride, 2);
      worst[nd] = std::max(worst[nd], (j.Q * g.value - b.col(a)).norm());
    }
  });
  return *std::max_element(worst.begin(), worst.end());
}

}  // namespace

double support_residual(const Congruence& c, const std::vector<Vec>& s) { return support_residual_stride(c, s, 1); }

// Residual with doubled stencil spacing on the same node set (for order estimates).
double support_residual_coarse(const Congruence& c, const std::vector<Vec>& s) {
  return support_residual_stride(c, s, 2);
}

SupportSolution solve_support(const Congruence& c, const KernelSplitting& split, double tol, int substeps) {
  const Box& box = c.domain();
  SupportSolution sol;
  sol.owner = &c;
  sol.r = split.r;
  sol.branch = split.r == c.k() ? Branch::Flat : (split.r == 0 ? Branch::Injective : Branch::Split);
  sol.compatibility = check_compatibility(c, split, tol);
  if (!sol.compatibility.pass()) {
    const auto& cr = sol.compatibility;
    std::string which = cr.failing();
    double mag = which == "kernel_closedness" ? cr.kernel_closedness
                 : which == "gamma_in_image"  ? cr.image_residual
                                              : cr.complement_residual;
    std::size_t node = which == "kernel_closedness" ? cr.kernel_node
                       : which == "gamma_in_image"  ? cr.image_node
                                                    : cr.complement_node;
    std::ostringstream os;
    os << "solve_support: compatibility condition " << which << " fails with residual " << mag << " > " << tol
       << " at node " << node;
    throw CompatibilityError(os.str(), cr);
  }

  const std::size_t base = box.flatten(box.base_index());
  sol.particular = SectionField{&c, Bundle::N, std::vector<Vec>(box.size(), Vec::Zero(c.m()))};
  if (sol.branch != Branch::Flat) {
    parallel_for(box.size(), [&](std::size_t nd) {
      Vec x = box.point(nd);
      sol.particular.values[nd] = apply_pinv(c, split.grid[nd], gamma_form(c, x));
    });
  }
  sol.s = sol.particular;
  if (sol.r > 0) {
    Transport t = transport(c, split, base, substeps, true);
    sol.frame = std::move(t.frame);
    sol.lambda = std::move(t.lambda);
    sol.lambda_path_residual = t.lambda_path_residual;
    for (std::size_t nd = 0; nd < box.size(); ++nd)
      for (int i = 0; i < sol.r; ++i) sol.s.values[nd] += sol.lambda[i][nd] * sol.frame.sections[i].values[nd];
  } else {
    sol.frame.base = base;
  }
  sol.residual = support_residual(c, sol.s.values);
  if (sol.r > 0) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<double> cs(sol.r);
      for (double& v : cs) v = u(rng);
      sol.family_residual = std::max(sol.family_residual, support_residual(c, sol.member(cs)));
    }
  } else {
    sol.family_residual = sol.residual;
  }
  return sol;
}

// ---------------------------------------------------------------- immersion

Mat grid_differential(const Box& box, const std::vector<Vec>& phi, std::size_t node) {
  Mat d(phi[node].size(), box.dim());
  for (int a = 0; a < box.dim(); ++a) d.col(a) = grid_partial(box, phi, node, a).value;
  return d;
}

namespace {

struct RankScan {
  std::vector<double> sigma_min;
  std::vector<int> orientation;
  std::vector<std::size_t> singular;
};

RankScan scan_rank(const Congruence& c, const std::vector<Vec>& phi, double rank_tol) {
  const Box& box = c.domain();
  const Mat G = c.signature().matrix();
  RankScan rs;
  rs.sigma_min.resize(box.size());
  rs.orientation.resize(box.size());
  parallel_for(box.size(), [&](std::size_t nd) {
    AffinePlane ap = c.at(box.point(nd));
    const Mat& F = ap.plane.frame;
    Mat T = F.transpose() * G * grid_differential(box, phi, nd);
    Eigen::JacobiSVD<Mat> svd(T);
    Vec sv = svd.singularValues();
    rs.sigma_min[nd] = sv[sv.size() - 1];
    bool singular = rs.sigma_min[nd] <= rank_tol * std::max(1.0, sv[0]);
    rs.orientation[nd] = singular ? 0 : (T.determinant() > 0.0 ? 1 : -1);
  });
  for (std::size_t nd = 0; nd < box.size(); ++nd)
    if (rs.orientation[nd] == 0) rs.singular.push_back(nd);
  return rs;
}

std::vector<Vec> immersion_values(const Congruence& c, const SupportSolution& sol, const std::vector<double>& cs) {
  std::vector<Vec> phi = sol.member(cs);
  const Box& box = c.domain();
  parallel_for(box.size(), [&](std::size_t nd) { phi[nd] += c.at(box.point(nd)).foot; });
  return phi;
}

}  // namespace

ImmersionField assemble_immersion(const Congruence& c, const SupportSolution& sol, std::vector<double> constants,
                                  unsigned seed, double rank_tol) {
  ImmersionField out;
  out.constants = constants;
  out.phi = immersion_values(c, sol, constants);
  RankScan rs = scan_rank(c, out.phi, rank_tol);
  if (!rs.singular.empty() && sol.r >= 1) {
    std::vector<std::vector<double>> dirs;
    for (int i = 0; i < sol.r; ++i) {
      std::vector<double> e(sol.r, 0.0);
      e[i] = 1.0;
      dirs.push_back(e);
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    for (int q = 0; q < 32; ++q) {
      std::vector<double> a(sol.r);
      double norm = 0.0;
      for (double& v : a) {
        v = nd(rng);
        norm += v * v;
      }
      for (double& v : a) v /= std::sqrt(norm);
      dirs.push_back(a);
    }
    out.search_failed = true;
    for (const auto& a : dirs) {
      for (int jexp = -3; jexp <= 3 && out.search_failed; ++jexp) {
        for (double sgn : {1.0, -1.0}) {
          double t = sgn * std::ldexp(1.0, jexp);
          std::vector<double> cs = constants;
          for (int i = 0; i < sol.r; ++i) cs[i] += t * a[i];
          std::vector<Vec> phi = immersion_values(c, sol, cs);
          RankScan trial = scan_rank(c, phi, rank_tol);
          if (trial.singular.empty()) {
            out.search_failed = false;
            out.regularized = true;
            out.search_direction = a;
            out.search_t = t;
            out.constants = cs;
            out.phi = std::move(phi);
            rs = std::move(trial);
            break;
          }
        }
      }
      if (!out.search_failed) break;
    }
  }
  out.sigma_min = std::move(rs.sigma_min);
  out.orientation = std::move(rs.orientation);
  out.singular_nodes = std::move(rs.singular);
  out.orientation_preserving =
      std::all_of(out.orientation.begin(), out.orientation.end(), [](int o) { return o > 0; });
  return out;
}

GaussMapResidual verify_gauss_map(const Congruence& c, const std::vector<Vec>& phi) {
  const Box& box = c.domain();
  std::vector<GaussMapResidual> res(box.size());
  parallel_for(box.size(), [&](std::size_t nd) {
    AffinePlane ap = c.at(box.point(nd));
    const Mat P = ap.plane.tangent_projector();
    const Mat Q = ap.plane.normal_projector();
    res[nd].foot = (P * phi[nd] - ap.foot).norm();
    for (int a = 0; a < box.dim(); ++a) {
      GridPartial g = partial_impl(box, phi, nd, a, 1, 2);
      res[nd].orthogonality = std::max(res[nd].orthogonality, (Q * g.value).norm());
    }
  });
  GaussMapResidual out;
  for (const auto& r : res) {
    out.foot = std::max(out.foot, r.foot);
    out.orthogonality = std::max(out.orthogonality, r.orthogonality);
  }
  return out;
}

FamilyFit fit_family(const SupportSolution& sol, const std::vector<Vec>& phi, const std::vector<Vec>& reference) {
  const int r = sol.r;
  Mat A = Mat::Zero(r, r);
  Vec b = Vec::Zero(r);
  for (std::size_t nd = 0; nd < phi.size(); ++nd) {
    Vec d = reference[nd] - phi[nd];
    for (int i = 0; i < r; ++i) {
      const Vec& si = sol.frame.sections[i].values[nd];
      b[i] += si.dot(d);
      for (int q = 0; q < r; ++q) A(i, q) += si.dot(sol.frame.sections[q].values[nd]);
    }
  }
  FamilyFit fit;
  Vec cst = r > 0 ? Vec(A.ldlt().solve(b)) : Vec();
  fit.constants.assign(cst.data(), cst.data() + cst.size());
  for (std::size_t nd = 0; nd < phi.size(); ++nd) {
    Vec d = reference[nd] - phi[nd];
    for (int i = 0; i < r; ++i) d -= cst[i] * sol.frame.sections[i].values[nd];
    fit.deviation = std::max(fit.deviation, d.norm());
  }
  return fit;
}

FoliationReport foliation_check(const Congruence& c, const SupportSolution& sol,
                                const std::vector<std::vector<double>>& constants) {
  if (constants.size() < 2) throw Error("foliation_check: need at least two constant tuples");
  const Signature& sig = c.signature();
  std::vector<std::vector<Vec>> members;
  for (const auto& cs : constants) members.push_back(immersion_values(c, sol, cs));
  FoliationReport rep;
  rep.min_distance = std::numeric_limits<double>::infinity();
  rep.min_cross_distance = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (std::size_t nd = 0; nd < members[a].size(); ++nd) {
        double d = pnorm(sig, members[a][nd] - members[b][nd]);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
      rep.equidistance_deviation = std::max(rep.equidistance_deviation, hi - lo);
      if (constants[a] == constants[b]) continue;
      rep.min_distance = std::min(rep.min_distance, lo);
      std::vector<double> cross(members[a].size(), std::numeric_limits<double>::infinity());
      parallel_for(members[a].size(), [&](std::size_t i) {
        for (const Vec& q : members[b]) cross[i] = std::min(cross[i], (members[a][i] - q).norm());
      });
      double mc = *std::min_element(cross.begin(), cross.end());
      rep.min_cross_distance = std::min(rep.min_cross_distance, mc);
      if (mc <= 1e-6) rep.leaves_disjoint = false;
    }
  }
  if (!std::isfinite(rep.min_distance)) rep.min_distance = 0.0;
  if (!std::isfinite(rep.min_cross_distance)) rep.min_cross_distance = 0.0;
  return rep;
}

}  // namespace ck
