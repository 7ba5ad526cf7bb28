#pragma once

#include <limits>
#include <vector>

#include "finsler/measure.hpp"

namespace finsler {

inline constexpr double kInfiniteN = std::numeric_limits<double>::infinity();

struct WeightedRicciParams {
  double N = kInfiniteN;
  /// Must be set to request N = n; the value is then -inf whenever |S| >= 1e-10.
  bool allow_n_equals_dim = false;
};

/// Validates N against the dimension; throws ParameterError.
void validate_weighted_params(const WeightedRicciParams& p, int n);

struct CurvatureSample {
  Vec x;
  Vec y;
  double F = 0.0;
  double ric = 0.0;
  double s = 0.0;
  double s_dot = 0.0;
  double ric_N = 0.0;
  /// True when ric_N is the -inf value of the N = n convention.
  bool ric_N_sentinel = false;
};

Vec spray(const MetricInstance& m, const Vec& x, const Vec& y);
double ricci(const MetricInstance& m, const Vec& x, const Vec& y);
double s_curvature(const MetricInstance& m, const MeasureSpec& mu, const Vec& x, const Vec& y);
double s_dot(const MetricInstance& m, const MeasureSpec& mu, const Vec& x, const Vec& y);
double weighted_ricci(const MetricInstance& m, const MeasureSpec& mu, const Vec& x, const Vec& y,
                      const WeightedRicciParams& params);
/// Ric^N from precomputed pieces.
double assemble_weighted_ricci(double ric, double s, double s_dot, double N, int n, bool* sentinel = nullptr);

/// All curvature quantities from one nested-jet spray evaluation.
CurvatureSample curvature_sample(const MetricInstance& m, const MeasureSpec& mu, const Vec& x, const Vec& y,
                                 const WeightedRicciParams& params);

struct ScanGrid {
  std::vector<Vec> points;
  /// Directions per point (Euclidean unit vectors, rescaled to F = 1).
  int directions = 16;
};

/// Sampled curvature bounds over unit-F directions; the hypothesis
/// certificate consumed by the comparison verifiers.
struct RicciBound {
  double N = kInfiniteN;
  double inf_ric = std::numeric_limits<double>::infinity();
  double inf_ric_inf = std::numeric_limits<double>::infinity();
  double inf_ric_N = std::numeric_limits<double>::infinity();
  double s_min = std::numeric_limits<double>::infinity();
  double s_max = -std::numeric_limits<double>::infinity();
  double tau_abs_max = 0.0;
  int samples = 0;
  Vec argmin_x;
  Vec argmin_y;
};

RicciBound ricci_bound_scan(const MetricInstance& m, const MeasureSpec& mu, const WeightedRicciParams& params,
                            const ScanGrid& grid);
/// Single-threaded reference for ricci_bound_scan; results are identical.
RicciBound ricci_bound_scan_serial(const MetricInstance& m, const MeasureSpec& mu,
                                   const WeightedRicciParams& params, const ScanGrid& grid);

/// Regular grid over the box [lo, hi] with `per_axis` points per axis,
/// restricted to the chart and to |x - center| <= radius.
std::vector<Vec> box_grid(const MetricInstance& m, const Vec& center, double radius, int per_axis);

}  // namespace finsler
