#include "finsler/curvature.hpp"

#include <cmath>
#include <exception>
#include <sstream>

#include "finsler/calculus.hpp"

namespace finsler {

namespace {

constexpr double kSentinelThreshold = 1e-10;

void require_point(const MetricInstance& m, const Vec& x, const Vec& y) {
  if (x.size() != m.dim() || y.size() != m.dim()) throw ParameterError("curvature: wrong vector dimension");
  if (y.squaredNorm() == 0.0) throw DegenerateDirectionError();
  if (!m.chart().contains(x)) throw ChartBoundaryError("curvature evaluated outside the chart");
}

/// Spray with first and second derivatives in z = (x, y).
template <int n>
std::array<Jet2<double, 2 * n>, n> spray_jet(const MetricInstance& m, const std::array<double, n>& x,
                                             const std::array<double, n>& y) {
  using T = Jet2<double, 2 * n>;
  std::array<T, n> xs, ys;
  for (int i = 0; i < n; ++i) {
    xs[i] = T::variable(x[i], i);
    ys[i] = T::variable(y[i], n + i);
  }
  return calc::spray<n, T>(m, xs, ys);
}

struct RawCurvature {
  double ric = 0.0;
  double s = 0.0;
  double s_dot = 0.0;
};

template <int n>
RawCurvature raw_curvature(const MetricInstance& m, const MeasureSpec* mu, const std::array<double, n>& x,
                           const std::array<double, n>& y) {
  const auto G = spray_jet<n>(m, x, y);
  RawCurvature out;
  for (int i = 0; i < n; ++i) {
    double r = 2.0 * G[i].g[i];
    for (int j = 0; j < n; ++j) {
      r -= y[j] * G[i].hess(j, n + i);
      r += 2.0 * G[j].v * G[i].hess(n + j, n + i);
      r -= G[i].g[n + j] * G[j].g[n + i];
    }
    out.ric += r;
  }
  if (!mu) return out;
  const Jet2<double, n> ls = mu->log_sigma_jet<n>(m, x);
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += G[k].g[n + k] - y[k] * ls.g[k];
  double sd = 0.0;
  for (int k = 0; k < n; ++k) {
    double sx = 0.0, sy = 0.0;
    for (int j = 0; j < n; ++j) {
      sx += G[j].hess(k, n + j) - y[j] * ls.hess(j, k);
      sy += G[j].hess(n + k, n + j);
    }
    sy -= ls.g[k];
    sd += sx * y[k] - 2.0 * sy * G[k].v;
  }
  out.s = s;
  out.s_dot = sd;
  return out;
}

RawCurvature raw(const MetricInstance& m, const MeasureSpec* mu, const Vec& x, const Vec& y) {
  require_point(m, x, y);
  return dispatch_dim(m.dim(), [&](auto nc) {
    constexpr int n = decltype(nc)::value;
    return raw_curvature<n>(m, mu, to_array<n>(x), to_array<n>(y));
  });
}

}  // namespace

void validate_weighted_params(const WeightedRicciParams& p, int n) {
  if (std::isnan(p.N)) throw ParameterError("weighted Ricci: N is NaN");
  if (p.N < n) throw ParameterError("weighted Ricci: N must be >= n");
  if (p.N == n && !p.allow_n_equals_dim)
    throw ParameterError("weighted Ricci: N = n requires acknowledging the -inf convention");
}

double assemble_weighted_ricci(double ric, double s, double s_dot, double N, int n, bool* sentinel) {
  if (sentinel) *sentinel = false;
  if (std::isinf(N)) return ric + s_dot;
  if (N == n) {
    if (std::abs(s) < kSentinelThreshold) return ric + s_dot;
    if (sentinel) *sentinel = true;
    return -std::numeric_limits<double>::infinity();
  }
  return ric + s_dot - s * s / (N - n);
}

Vec spray(const MetricInstance& m, const Vec& x, const Vec& y) {
  if (y.squaredNorm() == 0.0) throw DegenerateDirectionError();
  return dispatch_dim(m.dim(), [&](auto nc) {
    constexpr int n = decltype(nc)::value;
    return to_vec<n>(calc::spray<n, double>(m, to_array<n>(x), to_array<n>(y)));
  });
}

double ricci(const MetricInstance& m, const Vec& x, const Vec& y) { return raw(m, nullptr, x, y).ric; }

double s_curvature(const MetricInstance& m, const MeasureSpec& mu, const Vec& x, const Vec& y) {
  return raw(m, &mu, x, y).s;
}

double s_dot(const MetricInstance& m, const MeasureSpec& mu, const Vec& x, const Vec& y) {
  return raw(m, &mu, x, y).s_dot;
}

double weighted_ricci(const MetricInstance& m, const MeasureSpec& mu, const Vec& x, const Vec& y,
                      const WeightedRicciParams& params) {
  validate_weighted_params(params, m.dim());
  RawCurvature c = raw(m, &mu, x, y);
  return assemble_weighted_ricci(c.ric, c.s, c.s_dot, params.N, m.dim());
}

CurvatureSample curvature_sample(const MetricInstance& m, const MeasureSpec& mu, const Vec& x, const Vec& y,
                                 const WeightedRicciParams& params) {
  validate_weighted_params(params, m.dim());
  RawCurvature c = raw(m, &mu, x, y);
  CurvatureSample s;
  s.x = x;
  s.y = y;
  s.F = m.F(x, y);
  s.ric = c.ric;
  s.s = c.s;
  s.s_dot = c.s_dot;
  s.ric_N = assemble_weighted_ricci(c.ric, c.s, c.s_dot, params.N, m.dim(), &s.ric_N_sentinel);
  return s;
}

std::vector<Vec> box_grid(const MetricInstance& m, const Vec& center, double radius, int per_axis) {
  if (per_axis < 1) throw ParameterError("box_grid: per_axis must be positive");
  const int n = m.dim();
  std::vector<Vec> pts;
  int total = 1;
  for (int i = 0; i < n; ++i) total *= per_axis;
  for (int idx = 0; idx < total; ++idx) {
    Vec x(n);
    int r = idx;
    for (int i = 0; i < n; ++i) {
      const int k = r % per_axis;
      r /= per_axis;
      x[i] = per_axis == 1 ? center[i] : center[i] - radius + 2.0 * radius * k / (per_axis - 1);
    }
    if ((x - center).norm() <= radius * (1.0 + 1e-12) && m.chart().contains(x)) pts.push_back(x);
  }
  return pts;
}

namespace {

struct ScanItem {
  CurvatureSample c;
  double tau = 0.0;
};

ScanItem scan_one(const MetricInstance& m, const MeasureSpec& mu, const WeightedRicciParams& params,
                  const Vec& x, const Vec& u) {
  ScanItem it;
  Vec y = u / m.F(x, u);
  it.c = curvature_sample(m, mu, x, y, params);
  it.tau = distortion(m, mu, x, y);
  return it;
}

RicciBound reduce(const std::vector<ScanItem>& items, const WeightedRicciParams& params) {
  RicciBound b;
  b.N = params.N;
  for (const ScanItem& it : items) {
    const CurvatureSample& c = it.c;
    b.inf_ric = std::min(b.inf_ric, c.ric);
    b.inf_ric_inf = std::min(b.inf_ric_inf, c.ric + c.s_dot);
    if (c.ric_N < b.inf_ric_N || b.samples == 0) {
      b.inf_ric_N = c.ric_N;
      b.argmin_x = c.x;
      b.argmin_y = c.y;
    }
    b.s_min = std::min(b.s_min, c.s);
    b.s_max = std::max(b.s_max, c.s);
    b.tau_abs_max = std::max(b.tau_abs_max, std::abs(it.tau));
    ++b.samples;
  }
  return b;
}

RicciBound scan(const MetricInstance& m, const MeasureSpec& mu, const WeightedRicciParams& params,
                const ScanGrid& grid, bool parallel) {
  validate_weighted_params(params, m.dim());
  if (grid.points.empty()) throw ParameterError("ricci_bound_scan: empty sample grid");
  const auto dirs = sample_directions(m.dim(), grid.directions);
  const long nd = static_cast<long>(dirs.size());
  const long total = static_cast<long>(grid.points.size()) * nd;
  std::vector<ScanItem> items(total);
  std::vector<std::exception_ptr> errors(total);
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (long k = 0; k < total; ++k) {
    try {
      items[k] = scan_one(m, mu, params, grid.points[k / nd], dirs[k % nd]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (long k = 0; k < total; ++k) {
    if (!errors[k]) continue;
    std::ostringstream os;
    os << "ricci_bound_scan: sample " << k << " (point " << k / nd << ", direction " << k % nd << ") failed: ";
    try {
      std::rethrow_exception(errors[k]);
    } catch (const std::exception& e) {
      os << e.what();
    }
    throw Error(os.str());
  }
  return reduce(items, params);
}

}  // namespace

RicciBound ricci_bound_scan(const MetricInstance& m, const MeasureSpec& mu, const WeightedRicciParams& params,
                            const ScanGrid& grid) {
  return scan(m, mu, params, grid, true);
}

RicciBound ricci_bound_scan_serial(const MetricInstance& m, const MeasureSpec& mu,
                                   const WeightedRicciParams& params, const ScanGrid& grid) {
  return scan(m, mu, params, grid, false);
}

}  // namespace finsler
