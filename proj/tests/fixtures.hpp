#pragma once

#include <random>
#include <vector>

#include "finsler/metric.hpp"

namespace fixtures {

using finsler::Mat;
using finsler::MetricInstance;
using finsler::Vec;

inline MetricInstance randers2() {
  Mat A = Mat::Identity(2, 2);
  A(0, 0) = 1.2;
  A(0, 1) = A(1, 0) = 0.1;
  Vec b0(2);
  b0 << 0.3, -0.1;
  Mat B(2, 2);
  B << 0.05, 0.1, -0.1, 0.02;
  return finsler::zoo::randers(A, b0, B, Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
}

inline MetricInstance asym() {
  finsler::zoo::Asym1DParams p;
  p.a0 = 1.0;
  p.a1 = 0.3;
  p.b0 = 2.0;
  p.b1 = 0.5;
  p.length = 1.0;
  return finsler::zoo::asym1d(p);
}

inline std::vector<MetricInstance> zoo_all() {
  return {finsler::zoo::euclidean(2),
          finsler::zoo::euclidean(3),
          finsler::zoo::round_sphere(2),
          finsler::zoo::hyperbolic(2),
          finsler::zoo::funk(2),
          finsler::zoo::funk(3),
          randers2(),
          asym(),
          finsler::zoo::round_sphere(3)};
}

/// Uniform point well inside the chart.
inline Vec random_point(const MetricInstance& m, std::mt19937_64& rng, double limit = 1.0) {
  Vec lo, hi;
  m.chart().sampling_box(limit, lo, hi);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Vec x(m.dim());
  do {
    for (int i = 0; i < m.dim(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * (0.1 + 0.8 * U(rng));
  } while (!m.chart().contains(x) || x.norm() > 0.8 * m.chart().ball_radius);
  return x;
}

inline Vec random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec y(n);
  do {
    for (int i = 0; i < n; ++i) y[i] = N(rng);
  } while (y.norm() < 1e-3);
  return y;
}

}  // namespace fixtures
