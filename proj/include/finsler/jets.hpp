#pragma once

// Truncated Taylor arithmetic.
//
// Jet1<T, N> carries a value and its gradient with respect to N seeded
// variables; Jet2<T, N> additionally carries the (symmetric) Hessian. The
// coefficient type T may itself be a jet, which is how mixed derivatives of
// order three and four are obtained: evaluate an inner Jet2 whose coefficients
// are outer jets seeded on the same base point.
//
// Every primitive is branch-free. Piecewise metrics pick their sign sector
// with primal() before calling into this header.

#include <array>
#include <cmath>
#include <utility>

#include "finsler/errors.hpp"

namespace finsler {

template <typename T, int N>
struct Jet1;
template <typename T, int N>
struct Jet2;

inline double primal(double v) { return v; }
template <typename T, int N>
double primal(const Jet1<T, N>& a);
template <typename T, int N>
double primal(const Jet2<T, N>& a);

template <typename T, int N>
struct Jet1 {
  using value_type = T;
  static constexpr int vars = N;

  T v{};
  std::array<T, N> d{};

  Jet1() = default;
  Jet1(double c) : v(c) {}  // NOLINT: constants promote implicitly

  static Jet1 constant(const T& c) {
    Jet1 r;
    r.v = c;
    return r;
  }
  static Jet1 variable(const T& value, int i) {
    Jet1 r;
    r.v = value;
    r.d[i] = T(1.0);
    return r;
  }
};

template <typename T, int N>
struct Jet2 {
  using value_type = T;
  static constexpr int vars = N;

  T v{};
  std::array<T, N> g{};
  std::array<T, N * N> h{};

  Jet2() = default;
  Jet2(double c) : v(c) {}  // NOLINT

  static Jet2 constant(const T& c) {
    Jet2 r;
    r.v = c;
    return r;
  }
  static Jet2 variable(const T& value, int i) {
    Jet2 r;
    r.v = value;
    r.g[i] = T(1.0);
    return r;
  }

  const T& hess(int i, int j) const { return h[i * N + j]; }
  T& hess(int i, int j) { return h[i * N + j]; }
};

template <typename T, int N>
double primal(const Jet1<T, N>& a) {
  return primal(a.v);
}
template <typename T, int N>
double primal(const Jet2<T, N>& a) {
  return primal(a.v);
}

// ---------------------------------------------------------------- Jet1 ops

template <typename T, int N>
Jet1<T, N> operator-(const Jet1<T, N>& a) {
  Jet1<T, N> r;
  r.v = -a.v;
  for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
  return r;
}
template <typename T, int N>
Jet1<T, N> operator+(const Jet1<T, N>& a, const Jet1<T, N>& b) {
  Jet1<T, N> r;
  r.v = a.v + b.v;
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}
template <typename T, int N>
Jet1<T, N> operator-(const Jet1<T, N>& a, const Jet1<T, N>& b) {
  Jet1<T, N> r;
  r.v = a.v - b.v;
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}
template <typename T, int N>
Jet1<T, N> operator*(const Jet1<T, N>& a, const Jet1<T, N>& b) {
  Jet1<T, N> r;
  r.v = a.v * b.v;
  for (int i = 0; i < N; ++i) r.d[i] = a.v * b.d[i] + b.v * a.d[i];
  return r;
}
template <typename T, int N>
Jet1<T, N> operator*(const Jet1<T, N>& a, double s) {
  Jet1<T, N> r;
  r.v = a.v * s;
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * s;
  return r;
}
template <typename T, int N>
Jet1<T, N> operator*(double s, const Jet1<T, N>& a) {
  return a * s;
}
template <typename T, int N>
Jet1<T, N> operator+(const Jet1<T, N>& a, double s) {
  Jet1<T, N> r = a;
  r.v = r.v + s;
  return r;
}
template <typename T, int N>
Jet1<T, N> operator+(double s, const Jet1<T, N>& a) {
  return a + s;
}
template <typename T, int N>
Jet1<T, N> operator-(const Jet1<T, N>& a, double s) {
  return a + (-s);
}
template <typename T, int N>
Jet1<T, N> operator-(double s, const Jet1<T, N>& a) {
  return (-a) + s;
}

template <typename T, int N>
Jet1<T, N> chain(const Jet1<T, N>& a, const T& f0, const T& f1) {
  Jet1<T, N> r;
  r.v = f0;
  for (int i = 0; i < N; ++i) r.d[i] = f1 * a.d[i];
  return r;
}

// ---------------------------------------------------------------- Jet2 ops

template <typename T, int N>
Jet2<T, N> operator-(const Jet2<T, N>& a) {
  Jet2<T, N> r;
  r.v = -a.v;
  for (int i = 0; i < N; ++i) r.g[i] = -a.g[i];
  for (int k = 0; k < N * N; ++k) r.h[k] = -a.h[k];
  return r;
}
template <typename T, int N>
Jet2<T, N> operator+(const Jet2<T, N>& a, const Jet2<T, N>& b) {
  Jet2<T, N> r;
  r.v = a.v + b.v;
  for (int i = 0; i < N; ++i) r.g[i] = a.g[i] + b.g[i];
  for (int k = 0; k < N * N; ++k) r.h[k] = a.h[k] + b.h[k];
  return r;
}
template <typename T, int N>
Jet2<T, N> operator-(const Jet2<T, N>& a, const Jet2<T, N>& b) {
  Jet2<T, N> r;
  r.v = a.v - b.v;
  for (int i = 0; i < N; ++i) r.g[i] = a.g[i] - b.g[i];
  for (int k = 0; k < N * N; ++k) r.h[k] = a.h[k] - b.h[k];
  return r;
}
template <typename T, int N>
Jet2<T, N> operator*(const Jet2<T, N>& a, const Jet2<T, N>& b) {
  Jet2<T, N> r;
  r.v = a.v * b.v;
  for (int i = 0; i < N; ++i) r.g[i] = a.v * b.g[i] + b.v * a.g[i];
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      T hij = a.v * b.h[i * N + j] + b.v * a.h[i * N + j] + a.g[i] * b.g[j] + a.g[j] * b.g[i];
      r.h[j * N + i] = hij;
      r.h[i * N + j] = std::move(hij);
    }
  }
  return r;
}
template <typename T, int N>
Jet2<T, N> operator*(const Jet2<T, N>& a, double s) {
  Jet2<T, N> r;
  r.v = a.v * s;
  for (int i = 0; i < N; ++i) r.g[i] = a.g[i] * s;
  for (int k = 0; k < N * N; ++k) r.h[k] = a.h[k] * s;
  return r;
}
template <typename T, int N>
Jet2<T, N> operator*(double s, const Jet2<T, N>& a) {
  return a * s;
}
template <typename T, int N>
Jet2<T, N> operator+(const Jet2<T, N>& a, double s) {
  Jet2<T, N> r = a;
  r.v = r.v + s;
  return r;
}
template <typename T, int N>
Jet2<T, N> operator+(double s, const Jet2<T, N>& a) {
  return a + s;
}
template <typename T, int N>
Jet2<T, N> operator-(const Jet2<T, N>& a, double s) {
  return a + (-s);
}
template <typename T, int N>
Jet2<T, N> operator-(double s, const Jet2<T, N>& a) {
  return (-a) + s;
}

/// Composition with a scalar function given its value and first two derivatives at a.v.
template <typename T, int N>
Jet2<T, N> chain(const Jet2<T, N>& a, const T& f0, const T& f1, const T& f2) {
  Jet2<T, N> r;
  r.v = f0;
  for (int i = 0; i < N; ++i) r.g[i] = f1 * a.g[i];
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      T hij = f1 * a.h[i * N + j] + f2 * (a.g[i] * a.g[j]);
      r.h[j * N + i] = hij;
      r.h[i * N + j] = std::move(hij);
    }
  }
  return r;
}

// ------------------------------------------------------- elementary functions
//
// Each function is defined for the two jet flavours; the coefficient-level
// call resolves either to <cmath> (T = double) or recursively to these
// overloads (T = jet) through argument-dependent lookup.

namespace jet_detail {
inline void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw JetDomainError(name);
}
}  // namespace jet_detail

#define FINSLER_JET_UNARY(NAME, CHECK, F0, F1, F2)                 \
  template <typename T, int N>                                     \
  Jet1<T, N> NAME(const Jet1<T, N>& a) {                           \
    using std::NAME;                                               \
    CHECK;                                                         \
    const T& x = a.v;                                              \
    T f0 = F0;                                                     \
    return chain(a, f0, T(F1));                                    \
  }                                                                \
  template <typename T, int N>                                     \
  Jet2<T, N> NAME(const Jet2<T, N>& a) {                           \
    using std::NAME;                                               \
    CHECK;                                                         \
    const T& x = a.v;                                              \
    T f0 = F0;                                                     \
    return chain(a, f0, T(F1), T(F2));                             \
  }

using std::cos;
using std::cosh;
using std::exp;
using std::log;
using std::sin;
using std::sinh;
using std::sqrt;

FINSLER_JET_UNARY(exp, (void)0, exp(x), f0, f0)
FINSLER_JET_UNARY(log, jet_detail::require_positive(primal(a), "log"), log(x), 1.0 / x,
                  -1.0 / (x * x))
FINSLER_JET_UNARY(sin, (void)0, sin(x), cos(x), -f0)
FINSLER_JET_UNARY(cos, (void)0, cos(x), -sin(x), -f0)
FINSLER_JET_UNARY(sinh, (void)0, sinh(x), cosh(x), f0)
FINSLER_JET_UNARY(cosh, (void)0, cosh(x), sinh(x), f0)
FINSLER_JET_UNARY(sqrt, jet_detail::require_positive(primal(a), "sqrt"), sqrt(x), 0.5 / f0,
                  -0.25 / (f0 * x))

#undef FINSLER_JET_UNARY

template <typename T, int N>
Jet1<T, N> reciprocal(const Jet1<T, N>& a) {
  if (primal(a) == 0.0) throw JetDomainError("division");
  T f0 = 1.0 / a.v;
  return chain(a, f0, T(-(f0 * f0)));
}
template <typename T, int N>
Jet2<T, N> reciprocal(const Jet2<T, N>& a) {
  if (primal(a) == 0.0) throw JetDomainError("division");
  T f0 = 1.0 / a.v;
  T f1 = -(f0 * f0);
  return chain(a, f0, f1, T(-2.0 * (f1 * f0)));
}

template <typename T, int N>
Jet1<T, N> operator/(const Jet1<T, N>& a, const Jet1<T, N>& b) {
  return a * reciprocal(b);
}
template <typename T, int N>
Jet2<T, N> operator/(const Jet2<T, N>& a, const Jet2<T, N>& b) {
  return a * reciprocal(b);
}
template <typename T, int N>
Jet1<T, N> operator/(const Jet1<T, N>& a, double s) {
  return a * (1.0 / s);
}
template <typename T, int N>
Jet2<T, N> operator/(const Jet2<T, N>& a, double s) {
  return a * (1.0 / s);
}
template <typename T, int N>
Jet1<T, N> operator/(double s, const Jet1<T, N>& a) {
  return reciprocal(a) * s;
}
template <typename T, int N>
Jet2<T, N> operator/(double s, const Jet2<T, N>& a) {
  return reciprocal(a) * s;
}

/// Real power with a constant exponent; the base must be positive.
template <typename T, int N>
Jet2<T, N> pow(const Jet2<T, N>& a, double p) {
  using std::pow;
  jet_detail::require_positive(primal(a), "pow");
  T f0 = pow(a.v, p);
  T f1 = p * pow(a.v, p - 1.0);
  T f2 = (p * (p - 1.0)) * pow(a.v, p - 2.0);
  return chain(a, f0, f1, f2);
}
template <typename T, int N>
Jet1<T, N> pow(const Jet1<T, N>& a, double p) {
  using std::pow;
  jet_detail::require_positive(primal(a), "pow");
  T f0 = pow(a.v, p);
  return chain(a, f0, T(p * pow(a.v, p - 1.0)));
}

template <typename S>
S square(const S& a) {
  return a * a;
}

// ---------------------------------------------------------------- evaluation

/// Value, gradient and Hessian of f at x. f is a generic callable taking
/// std::array<Jet2<double, N>, N>.
template <int N, typename Fn>
Jet2<double, N> jet2_eval(Fn&& f, const std::array<double, N>& x) {
  std::array<Jet2<double, N>, N> vars;
  for (int i = 0; i < N; ++i) vars[i] = Jet2<double, N>::variable(x[i], i);
  return f(vars);
}

struct DirectionalDerivatives {
  double value = 0.0;
  double first = 0.0;   // Df(x) v
  double second = 0.0;  // v^T Hf(x) v, only filled for order 2
};

/// Derivatives of t -> f(x + t v) at t = 0, via a single-variable jet.
template <int N, typename Fn>
DirectionalDerivatives directional_jet(Fn&& f, const std::array<double, N>& x,
                                       const std::array<double, N>& v, int order) {
  DirectionalDerivatives out;
  if (order == 1) {
    std::array<Jet1<double, 1>, N> line;
    for (int i = 0; i < N; ++i) line[i] = Jet1<double, 1>::variable(0.0, 0) * v[i] + x[i];
    auto r = f(line);
    out.value = r.v;
    out.first = r.d[0];
    return out;
  }
  if (order != 2) throw ParameterError("directional_jet: order must be 1 or 2");
  std::array<Jet2<double, 1>, N> line;
  for (int i = 0; i < N; ++i) line[i] = Jet2<double, 1>::variable(0.0, 0) * v[i] + x[i];
  auto r = f(line);
  out.value = r.v;
  out.first = r.g[0];
  out.second = r.h[0];
  return out;
}

}  // namespace finsler
