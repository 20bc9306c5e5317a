#include "congruence_kit/scenarios.hpp"

#include <array>
#include <cmath>
#include <random>

namespace ck {

namespace {

constexpr double kPi = 3.14159265358979323846;

template <class T>
VecT<T> to_vec4(T a, T b, T c, T d) {
  return {a, b, c, d};
}

// Round sphere S^2 x {0} in R^4 shifted by c0, framed by (e_theta, e_phi).
// The south chart reads (theta', phi') as (pi - theta', -phi').
struct SpherePlane {
  std::array<double, 4> c0{};
  bool south = false;
  template <class T>
  PlaneT<T> operator()(const VecT<T>& x) const {
    using std::cos, std::sin;
    T th = south ? T(kPi - x[0]) : x[0];
    T ph = south ? T(-x[1]) : x[1];
    const double sg = south ? -1.0 : 1.0;
    PlaneT<T> p;
    p.cols.push_back(to_vec4<T>(sg * (cos(th) * cos(ph)), sg * (cos(th) * sin(ph)), sg * (-sin(th)), T(0.0)));
    p.cols.push_back(to_vec4<T>(sg * (-sin(ph)), sg * cos(ph), T(0.0), T(0.0)));
    p.foot = to_vec4<T>(c0[0] + sin(th) * cos(ph), c0[1] + sin(th) * sin(ph), c0[2] + cos(th), T(c0[3]));
    return p;
  }
};

struct TorusR4 {
  double r1 = 1.0, r2 = 0.6;
  std::array<double, 4> c0{};
  template <class T>
  VecT<T> operator()(const VecT<T>& x) const {
    using std::cos, std::sin;
    return to_vec4<T>(c0[0] + r1 * cos(x[0]), c0[1] + r1 * sin(x[0]), c0[2] + r2 * cos(x[1]), c0[3] + r2 * sin(x[1]));
  }
};

// Spacelike round sphere in de Sitter space {<x,x>_1 = 1} of R^{1,3}.
struct DeSitterSphere {
  double rho0 = 0.5;
  template <class T>
  VecT<T> operator()(const VecT<T>& x) const {
    using std::cos, std::sin;
    const double ch = std::cosh(rho0);
    return to_vec4<T>(T(std::sinh(rho0)), ch * (sin(x[0]) * cos(x[1])), ch * (sin(x[0]) * sin(x[1])), ch * cos(x[0]));
  }
};

struct Veronese {
  template <class T>
  VecT<T> operator()(const VecT<T>& x) const {
    using std::cos, std::sin;
    const double s3 = std::sqrt(3.0);
    T a = sin(x[0]) * cos(x[1]), b = sin(x[0]) * sin(x[1]), c = cos(x[0]);
    return {s3 * (a * b), s3 * (a * c), s3 * (b * c), 0.5 * s3 * (a * a - b * b), 0.5 * (a * a + b * b - 2.0 * (c * c))};
  }
};

struct GraphZ2 {
  template <class T>
  VecT<T> operator()(const VecT<T>& x) const {
    return to_vec4<T>(x[0], x[1], x[0] * x[0] - x[1] * x[1], 2.0 * (x[0] * x[1]));
  }
};

// Sum of a few seeded trigonometric modes on the torus, one per component.
struct FourierField {
  struct Mode {
    int p = 0, q = 0;
    double c = 0.0, s = 0.0;
  };
  int dim = 4;
  std::vector<std::vector<Mode>> modes;  // per component

  static FourierField random(int dim, std::mt19937_64& rng, int count = 3) {
    FourierField f;
    f.dim = dim;
    std::uniform_int_distribution<int> mode(-2, 2);
    std::normal_distribution<double> nd;
    for (int a = 0; a < dim; ++a) {
      std::vector<Mode> ms;
      for (int i = 0; i < count; ++i) {
        Mode md;
        do {
          md.p = mode(rng);
          md.q = mode(rng);
        } while (md.p == 0 && md.q == 0);
        md.c = nd(rng) / std::sqrt(static_cast<double>(count));
        md.s = nd(rng) / std::sqrt(static_cast<double>(count));
        ms.push_back(md);
      }
      f.modes.push_back(ms);
    }
    return f;
  }

  template <class T>
  VecT<T> operator()(const T& a, const T& b) const {
    using std::cos, std::sin;
    VecT<T> out(dim, T(0.0));
    for (int i = 0; i < dim; ++i)
      for (const Mode& md : modes[i]) {
        T arg = md.p * a + md.q * b;
        out[i] += md.c * cos(arg) + md.s * sin(arg);
      }
    return out;
  }
};

struct RandomFourierPlane {
  TorusR4 torus;
  FourierField foot_field;
  FourierField col_field0, col_field1;
  double amplitude = 0.0;
  double plane_amplitude = 0.0;
  template <class T>
  PlaneT<T> operator()(const VecT<T>& x) const {
    PlaneT<T> p;
    auto base = plane_map_tangent(x);
    p.cols = base.cols;
    p.foot = base.foot;
    VecT<T> w = foot_field(x[0], x[1]);
    VecT<T> w0 = col_field0(x[0], x[1]), w1 = col_field1(x[0], x[1]);
    for (int i = 0; i < 4; ++i) {
      p.foot[i] += amplitude * w[i];
      p.cols[0][i] += plane_amplitude * w0[i];
      p.cols[1][i] += plane_amplitude * w1[i];
    }
    return p;
  }
  template <class T>
  PlaneT<T> plane_map_tangent(const VecT<T>& x) const {
    using std::cos, std::sin;
    PlaneT<T> p;
    p.foot = torus(x);
    p.cols.push_back(to_vec4<T>(-sin(x[0]), cos(x[0]), T(0.0), T(0.0)));
    p.cols.push_back(to_vec4<T>(T(0.0), T(0.0), -sin(x[1]), cos(x[1])));
    return p;
  }
};

// Lines in R^3 with direction the sphere normal and a tangential foot field.
struct LineCongruenceR3 {
  template <class T>
  PlaneT<T> operator()(const VecT<T>& x) const {
    using std::cos, std::sin;
    T th = x[0], ph = x[1];
    PlaneT<T> p;
    p.cols.push_back({cos(th) * cos(ph), cos(th) * sin(ph), -sin(th)});
    p.cols.push_back({-sin(ph), cos(ph), T(0.0)});
    p.foot = {0.2 + 0.25 * cos(ph), -0.1 + 0.25 * sin(2.0 * th), 0.3 + 0.25 * (sin(ph) * cos(th))};
    return p;
  }
};

template <class Alpha>
struct CurvePlane {
  Alpha alpha;
  SineLambda lambda;
  template <class T>
  PlaneT<T> operator()(const VecT<T>& x) const {
    PlaneT<T> p;
    VecT<T> a = alpha(x[0]);
    T l = lambda(x[0]);
    p.cols.push_back(a);
    p.foot = {l * a[0], l * a[1], l * a[2]};
    return p;
  }
};

template <class Phi>
std::function<Vec(const Vec&)> as_function(Phi phi) {
  return [phi](const Vec& x) {
    VecT<double> xv(x.data(), x.data() + x.size());
    VecT<double> y = phi(xv);
    return Vec(Eigen::Map<Vec>(y.data(), static_cast<Eigen::Index>(y.size())));
  };
}

std::vector<int> pick_res(const ScenarioParams& p, std::vector<int> dflt) {
  if (p.res.empty()) return dflt;
  if (p.res.size() != dflt.size()) throw DimensionMismatch("grid resolution must list one entry per axis");
  return p.res;
}

Box box2(double a0, double a1, double b0, double b1, std::vector<int> res, bool periodic = false) {
  Vec lo(2), hi(2);
  lo << a0, b0;
  hi << a1, b1;
  return Box(lo, hi, std::move(res), {periodic, periodic});
}

}  // namespace

std::vector<std::string> scenario_keys() {
  return {"sphere-gauss",   "clifford-torus", "torus-r4",           "great-circle-curve", "latitude-curve",
          "s3-hypersurface", "rank1-k3",      "random-fourier",     "line-congruence-r3", "graph-z2"};
}

bool is_curve_scenario(const std::string& key) { return key == "great-circle-curve" || key == "latitude-curve"; }

Scenario make_scenario(const std::string& key, const ScenarioParams& params) {
  Scenario s;
  s.key = key;
  if (params.p != 0 && key != "s3-hypersurface")
    throw UnsupportedSignature("scenario " + key + " is only defined for the Euclidean signature");
  if (key == "sphere-gauss") {
    const std::array<double, 4> c0{0.3, -0.2, 0.1, 0.25};
    s.sig = Signature(4);
    s.n = 2;
    s.domain = box2(0.5, 2.6, -1.5, 1.5, pick_res(params, {33, 33}));
    s.map = make_plane_map(SpherePlane{c0, false});
    s.immersion = [c0](const Vec& x) {
      Vec y(4);
      y << c0[0] + std::sin(x[0]) * std::cos(x[1]), c0[1] + std::sin(x[0]) * std::sin(x[1]), c0[2] + std::cos(x[0]), c0[3];
      return y;
    };
    Box north = box2(0.0, kPi / 2, 0.0, 2 * kPi, {129, 128});
    north.periodic[1] = true;
    s.atlas.push_back({north, make_plane_map(SpherePlane{c0, false})});
    s.atlas.push_back({north, make_plane_map(SpherePlane{c0, true})});
    s.sphere_atlas = true;
  } else if (key == "clifford-torus") {
    const double r = 1.0 / std::sqrt(2.0);
    TorusR4 t{r, r, {0, 0, 0, 0}};
    s.sig = Signature(4);
    s.n = 2;
    s.domain = box2(0.0, 2 * kPi, 0.0, 2 * kPi, pick_res(params, {32, 32}), true);
    s.map = plane_map_from_immersion(t, 2);
    s.immersion = as_function(t);
    s.atlas.push_back({s.domain, s.map});
  } else if (key == "torus-r4" || key == "random-fourier") {
    TorusR4 t{1.0, 0.6, {0.2, 0.1, -0.3, 0.15}};
    s.sig = Signature(4);
    s.n = 2;
    s.domain = box2(0.0, 2 * kPi, 0.0, 2 * kPi, pick_res(params, {32, 32}), true);
    if (key == "torus-r4") {
      s.map = plane_map_from_immersion(t, 2);
      s.immersion = as_function(t);
    } else {
      std::mt19937_64 rng(params.seed);
      RandomFourierPlane rf;
      rf.torus = t;
      rf.foot_field = FourierField::random(4, rng);
      rf.col_field0 = FourierField::random(4, rng);
      rf.col_field1 = FourierField::random(4, rng);
      rf.amplitude = params.amplitude;
      rf.plane_amplitude = params.plane_amplitude;
      s.map = make_plane_map(rf);
      if (params.amplitude == 0.0 && params.plane_amplitude == 0.0) s.immersion = as_function(t);
    }
    s.atlas.push_back({s.domain, s.map});
  } else if (key == "s3-hypersurface") {
    s.n = 2;
    if (params.p == 0) {
      s.sig = Signature(4);
      const double r = 0.5, rr = std::sqrt(1.0 - r * r);
      TorusR4 t{r, rr, {0, 0, 0, 0}};
      s.domain = box2(0.2, 2.9, 0.3, 3.0, pick_res(params, {25, 25}));
      s.map = plane_map_from_immersion(t, 2);
      s.immersion = as_function(t);
    } else if (params.p == 1) {
      s.sig = Signature(4, 1);
      DeSitterSphere d{0.5};
      s.domain = box2(0.5, 2.6, -1.5, 1.5, pick_res(params, {25, 25}));
      s.map = plane_map_from_immersion(d, 2);
      s.immersion = as_function(d);
    } else {
      throw UnsupportedSignature("s3-hypersurface supports signatures p = 0 and p = 1 only");
    }
  } else if (key == "rank1-k3") {
    s.sig = Signature(5);
    s.n = 2;
    s.domain = box2(0.5, 1.2, 0.3, 1.0, pick_res(params, {15, 15}));
    s.map = plane_map_from_immersion(Veronese{}, 2);
    s.immersion = as_function(Veronese{});
  } else if (key == "line-congruence-r3") {
    s.sig = Signature(3);
    s.n = 2;
    s.domain = box2(0.6, 2.5, -1.2, 1.2, pick_res(params, {21, 21}));
    s.map = make_plane_map(LineCongruenceR3{});
  } else if (key == "graph-z2") {
    s.sig = Signature(4);
    s.n = 2;
    s.domain = box2(-0.5, 0.5, -0.5, 0.5, pick_res(params, {21, 21}));
    s.map = plane_map_from_immersion(GraphZ2{}, 2);
    s.immersion = as_function(GraphZ2{});
  } else if (is_curve_scenario(key)) {
    s.sig = Signature(3);
    s.n = 1;
    Vec lo(1), hi(1);
    lo << 0.0;
    hi << 6.0;
    s.domain = Box(lo, hi, pick_res(params, {121}));
    SineLambda lam{params.lambda_c, params.lambda_a};
    if (key == "great-circle-curve")
      s.map = make_plane_map(CurvePlane<GreatCircle>{GreatCircle{}, lam});
    else
      s.map = make_plane_map(CurvePlane<LatitudeCircle>{LatitudeCircle{0.9}, lam});
  } else {
    throw Error("unknown scenario key '" + key + "'");
  }
  return s;
}

Congruence make_congruence(const Scenario& s, DerivMode mode, double fd_step) {
  return Congruence(s.sig, s.n, s.domain, s.map, mode, fd_step);
}

}  // namespace ck
