#pragma once

#include <cmath>
#include <type_traits>

namespace ck {

// Forward-mode dual number v + d·ε with ε² = 0. Nests (Dual<Dual<double>>)
// for second derivatives. Scenario callbacks are written generically over the
// scalar type so the same code yields values and exact first derivatives.
template <class T>
struct Dual {
  T v{};
  T d{};

  constexpr Dual() = default;
  constexpr Dual(double c) : v(c), d(0.0) {}  // NOLINT: implicit constants
  constexpr Dual(T value, T deriv) : v(value), d(deriv) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) {
    d = (d * o.v - v * o.d) / (o.v * o.v);
    v /= o.v;
    return *this;
  }
};

template <class T> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};

template <class T> Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <class T> Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <class T> Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <class T> Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T> Dual<T> operator+(const Dual<T>& a) { return a; }

template <class T> Dual<T> operator+(Dual<T> a, double b) { a.v += b; return a; }
template <class T> Dual<T> operator+(double b, Dual<T> a) { a.v += b; return a; }
template <class T> Dual<T> operator-(Dual<T> a, double b) { a.v -= b; return a; }
template <class T> Dual<T> operator-(double b, const Dual<T>& a) { return {b - a.v, -a.d}; }
template <class T> Dual<T> operator*(Dual<T> a, double b) { a.v *= b; a.d *= b; return a; }
template <class T> Dual<T> operator*(double b, Dual<T> a) { a.v *= b; a.d *= b; return a; }
template <class T> Dual<T> operator/(Dual<T> a, double b) { a.v /= b; a.d /= b; return a; }
template <class T> Dual<T> operator/(double b, const Dual<T>& a) {
  return {b / a.v, -b * a.d / (a.v * a.v)};
}

template <class T> bool operator<(const Dual<T>& a, const Dual<T>& b) { return a.v < b.v; }
template <class T> bool operator>(const Dual<T>& a, const Dual<T>& b) { return a.v > b.v; }
template <class T> bool operator<(const Dual<T>& a, double b) { return a.v < b; }
template <class T> bool operator>(const Dual<T>& a, double b) { return a.v > b; }

template <class T> Dual<T> sin(const Dual<T>& a) { using std::sin, std::cos; return {sin(a.v), a.d * cos(a.v)}; }
template <class T> Dual<T> cos(const Dual<T>& a) { using std::sin, std::cos; return {cos(a.v), -(a.d * sin(a.v))}; }
template <class T> Dual<T> exp(const Dual<T>& a) { using std::exp; T e = exp(a.v); return {e, a.d * e}; }
template <class T> Dual<T> log(const Dual<T>& a) { using std::log; return {log(a.v), a.d / a.v}; }
template <class T> Dual<T> sinh(const Dual<T>& a) { using std::sinh, std::cosh; return {sinh(a.v), a.d * cosh(a.v)}; }
template <class T> Dual<T> cosh(const Dual<T>& a) { using std::sinh, std::cosh; return {cosh(a.v), a.d * sinh(a.v)}; }
template <class T> Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  T s = sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}
template <class T> Dual<T> abs(const Dual<T>& a) { return a.v < 0.0 ? -a : a; }

// Value part, recursively for nested duals.
inline double value_of(double x) { return x; }
template <class T> double value_of(const Dual<T>& x) { return value_of(x.v); }

}  // namespace ck
