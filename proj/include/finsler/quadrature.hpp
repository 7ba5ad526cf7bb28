#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "finsler/errors.hpp"

namespace finsler {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
inline QuadratureRule gauss_legendre(int order) {
  if (order < 1) throw ParameterError("gauss_legendre: order must be positive");
  QuadratureRule q;
  q.nodes.resize(order);
  q.weights.resize(order);
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= order; ++k) {
        double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (order == 1) p0 = 1.0;
      dp = order * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - z * z) * dp * dp);
    q.nodes[i] = -z;
    q.nodes[order - 1 - i] = z;
    q.weights[i] = w;
    q.weights[order - 1 - i] = w;
  }
  return q;
}

struct IntegralEstimate {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

namespace quad_detail {
inline double simpson_recurse(const std::function<double(double)>& f, double a, double b, double fa,
                              double fm, double fb, double whole, double tol, int depth,
                              IntegralEstimate& out) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  out.evaluations += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) {
    out.error += std::abs(diff) / 15.0;
    return left + right + diff / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}
}  // namespace quad_detail

/// Adaptive Simpson with absolute tolerance tol. The interval is first split
/// into 8 panels so that narrow features are not missed.
inline IntegralEstimate adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                         double tol = 1e-10, int max_depth = 50) {
  IntegralEstimate out;
  if (b == a) return out;
  constexpr int panels = 8;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h, hi = (p + 1 == panels) ? b : a + (p + 1) * h;
    const double fa = f(lo), fm = f(0.5 * (lo + hi)), fb = f(hi);
    out.evaluations += 3;
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    out.value += quad_detail::simpson_recurse(f, lo, hi, fa, fm, fb, whole, tol / panels, max_depth, out);
  }
  return out;
}

/// Composite Simpson on uniformly spaced samples; an odd number of intervals
/// is closed with a 3/8 panel at the end.
inline double simpson_samples(const std::vector<double>& f, double h) {
  const int m = static_cast<int>(f.size()) - 1;
  if (m <= 0) return 0.0;
  if (m == 1) return 0.5 * h * (f[0] + f[1]);
  double s = 0.0;
  int end = (m % 2 == 0) ? m : m - 3;
  for (int i = 0; i + 2 <= end; i += 2) s += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
  if (m % 2 == 1) s += 3.0 * h / 8.0 * (f[end] + 3.0 * f[end + 1] + 3.0 * f[end + 2] + f[end + 3]);
  return s;
}

}  // namespace finsler
