#pragma once

#include <Eigen/Dense>
#include <span>
#include <type_traits>
#include <utility>

#include "finsler/errors.hpp"
#include "finsler/jets.hpp"

namespace finsler {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Scalar types at which metrics and measures are instantiated. The engine
// supports dimensions 1..3; phase-space jets therefore have 2, 4 or 6
// variables and position-only jets 1, 2 or 3.
using J2d1 = Jet2<double, 1>;
using J2d2 = Jet2<double, 2>;
using J2d3 = Jet2<double, 3>;
using J2d4 = Jet2<double, 4>;
using J2d6 = Jet2<double, 6>;
using J2J2d1 = Jet2<J2d1, 1>;
using J2J2d2 = Jet2<J2d2, 2>;
using J2J2d3 = Jet2<J2d3, 3>;
using J2J2d4 = Jet2<J2d4, 4>;
using J2J2d6 = Jet2<J2d6, 6>;
using J1d1 = Jet1<double, 1>;
using J1d2 = Jet1<double, 2>;
using J2J1d1x4 = Jet2<J1d1, 4>;
using J2J1d2x6 = Jet2<J1d2, 6>;

#define FINSLER_METRIC_SCALARS(X) \
  X(double)                       \
  X(J2d1)                         \
  X(J2d2)                         \
  X(J2d3)                         \
  X(J2d4)                         \
  X(J2d6)                         \
  X(J2J2d1)                       \
  X(J2J2d2)                       \
  X(J2J2d3)                       \
  X(J2J2d4)                       \
  X(J2J2d6)                       \
  X(J2J1d1x4)                     \
  X(J2J1d2x6)

#define FINSLER_POSITION_SCALARS(X) \
  X(double)                         \
  X(J2d1)                           \
  X(J2d2)                           \
  X(J2d3)

/// Calls fn(std::integral_constant<int, n>{}) for the runtime dimension n.
template <class Fn>
decltype(auto) dispatch_dim(int n, Fn&& fn) {
  switch (n) {
    case 1:
      return fn(std::integral_constant<int, 1>{});
    case 2:
      return fn(std::integral_constant<int, 2>{});
    case 3:
      return fn(std::integral_constant<int, 3>{});
    default:
      throw ParameterError("dimension must be 1, 2 or 3");
  }
}

template <int n>
std::array<double, n> to_array(const Vec& v) {
  if (v.size() != n) throw ParameterError("vector has wrong dimension");
  std::array<double, n> a{};
  for (int i = 0; i < n; ++i) a[i] = v[i];
  return a;
}

template <int n>
Vec to_vec(const std::array<double, n>& a) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = a[i];
  return v;
}

/// Solves A x = b for a small symmetric positive definite A stored row-major,
/// by Gaussian elimination without pivoting. T may be a jet type.
template <typename T, int n>
std::array<T, n> solve_spd(std::array<T, n * n> a, std::array<T, n> b) {
  for (int k = 0; k < n; ++k) {
    if (!(primal(a[k * n + k]) > 0.0)) throw ConvexityViolationError("fundamental tensor is not positive definite");
    for (int i = k + 1; i < n; ++i) {
      T f = a[i * n + k] / a[k * n + k];
      for (int j = k; j < n; ++j) a[i * n + j] = a[i * n + j] - f * a[k * n + j];
      b[i] = b[i] - f * b[k];
    }
  }
  std::array<T, n> x{};
  for (int i = n - 1; i >= 0; --i) {
    T s = b[i];
    for (int j = i + 1; j < n; ++j) s = s - a[i * n + j] * x[j];
    x[i] = s / a[i * n + i];
  }
  return x;
}

template <typename T, int n>
T determinant(const std::array<T, n * n>& a) {
  if constexpr (n == 1) {
    return a[0];
  } else if constexpr (n == 2) {
    return a[0] * a[3] - a[1] * a[2];
  } else {
    static_assert(n == 3);
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
  }
}

}  // namespace finsler
