#pragma once

// Templated pointwise calculus shared by the metric, curvature and geodesic
// kernels. T is the coefficient scalar (double, or an outer jet when higher
// derivatives in the base point are needed).

#include <array>

#include "finsler/metric.hpp"

namespace finsler::calc {

/// g_ij = 1/2 [F^2]_{y^i y^j}, row-major.
template <int n, typename T>
std::array<T, n * n> fundamental_tensor(const MetricInstance& m, const std::array<T, n>& x,
                                        const std::array<T, n>& y) {
  using J = Jet2<T, n>;
  std::array<J, n> xj, yj;
  for (int i = 0; i < n; ++i) {
    xj[i] = J::constant(x[i]);
    yj[i] = J::variable(y[i], i);
  }
  J f = m.eval(xj, yj);
  J f2 = f * f;
  std::array<T, n * n> g;
  for (int k = 0; k < n * n; ++k) g[k] = f2.h[k] * 0.5;
  return g;
}

/// Spray coefficients G^i = 1/4 g^{il} ([F^2]_{x^k y^l} y^k - [F^2]_{x^l}).
template <int n, typename T>
std::array<T, n> spray(const MetricInstance& m, const std::array<T, n>& x, const std::array<T, n>& y) {
  using J = Jet2<T, 2 * n>;
  std::array<J, n> xj, yj;
  for (int i = 0; i < n; ++i) {
    xj[i] = J::variable(x[i], i);
    yj[i] = J::variable(y[i], n + i);
  }
  J f = m.eval(xj, yj);
  J f2 = f * f;
  std::array<T, n * n> g;
  std::array<T, n> rhs;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g[i * n + j] = f2.hess(n + i, n + j) * 0.5;
    T r = -f2.g[i];
    for (int k = 0; k < n; ++k) r = r + f2.hess(k, n + i) * y[k];
    rhs[i] = r;
  }
  std::array<T, n> w = solve_spd<T, n>(g, rhs);
  for (int i = 0; i < n; ++i) w[i] = w[i] * 0.25;
  return w;
}

/// x-jet of the position-only function F(x, y) for a fixed direction y.
template <int n>
Jet2<double, n> metric_x_jet(const MetricInstance& m, const std::array<double, n>& x,
                             const std::array<double, n>& y) {
  using J = Jet2<double, n>;
  std::array<J, n> xj, yj;
  for (int i = 0; i < n; ++i) {
    xj[i] = J::variable(x[i], i);
    yj[i] = J::constant(y[i]);
  }
  return m.eval(xj, yj);
}

}  // namespace finsler::calc
