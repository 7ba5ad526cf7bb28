#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "finsler/types.hpp"

namespace finsler {

/// Coordinate domain of a metric: a box (some axes may be periodic) optionally
/// intersected with an open Euclidean ball centred at the origin.
struct Chart {
  Vec lo;
  Vec hi;
  std::vector<bool> periodic;
  double ball_radius = std::numeric_limits<double>::infinity();

  static Chart unbounded(int n);
  static Chart box(const Vec& lo, const Vec& hi);
  static Chart ball(int n, double radius);

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& x) const;
  /// Reduces periodic coordinates into [lo, hi).
  Vec wrap(const Vec& x) const;
  /// Finite box used for random sampling; infinite sides are clipped to +-limit.
  void sampling_box(double limit, Vec& lo_out, Vec& hi_out) const;
};

/// Type-erased F(x, y). One virtual overload per scalar type listed in
/// FINSLER_METRIC_SCALARS; implementations derive from MetricModelT.
class MetricModel {
 public:
  virtual ~MetricModel() = default;
  virtual int dim() const = 0;
  /// True when F^2 is quadratic in y.
  virtual bool riemannian() const { return false; }

#define FINSLER_DECLARE_EVAL(T) \
  virtual T eval(std::span<const T> x, std::span<const T> y) const = 0;
  FINSLER_METRIC_SCALARS(FINSLER_DECLARE_EVAL)
#undef FINSLER_DECLARE_EVAL
};

template <class Impl>
class MetricModelT : public MetricModel {
 public:
#define FINSLER_FORWARD_EVAL(T)                                         \
  T eval(std::span<const T> x, std::span<const T> y) const override { \
    return static_cast<const Impl*>(this)->template F<T>(x, y);         \
  }
  FINSLER_METRIC_SCALARS(FINSLER_FORWARD_EVAL)
#undef FINSLER_FORWARD_EVAL
};

class MetricInstance {
 public:
  MetricInstance(std::string name, Chart chart, std::shared_ptr<const MetricModel> model);

  int dim() const { return model_->dim(); }
  const std::string& name() const { return name_; }
  const Chart& chart() const { return chart_; }
  bool riemannian() const { return model_->riemannian(); }

  /// F(x, y); y = 0 returns 0.
  double F(const Vec& x, const Vec& y) const;

  template <typename T, std::size_t n>
  T eval(const std::array<T, n>& x, const std::array<T, n>& y) const {
    return model_->eval(std::span<const T>(x.data(), n), std::span<const T>(y.data(), n));
  }

 private:
  std::string name_;
  Chart chart_;
  std::shared_ptr<const MetricModel> model_;
};

namespace zoo {

MetricInstance euclidean(int n);
/// F = sqrt(y^T A y) with constant symmetric positive definite A.
MetricInstance riemannian_constant(const Mat& A);
/// Round sphere of the given radius in the stereographic chart from the south
/// pole: g = 4 / (1 + |x|^2/R^2)^2 delta. The chart is cut at |x| < chart_limit*R.
MetricInstance round_sphere(int n, double radius = 1.0, double chart_limit = 30.0);
/// Hyperbolic space of curvature -1/R^2 in the Poincare ball |x| < R.
MetricInstance hyperbolic(int n, double radius = 1.0);
/// F = sqrt(y^T A y) + (b0 + B x) . y on the box [lo, hi]. Requires
/// ||beta||_alpha < 1 on the box (checked at the corners, where the convex
/// function x -> ||b(x)||_alpha attains its maximum).
MetricInstance randers(const Mat& A, const Vec& b0, const Mat& B, const Vec& lo, const Vec& hi);
/// Funk metric of the unit ball.
MetricInstance funk(int n);

struct Asym1DParams {
  double a0 = 1.0, a1 = 0.0;  // a(x) = a0 + a1 sin(2 pi (x - x0) / L)
  double b0 = 1.0, b1 = 0.0;  // b(x) = b0 + b1 cos(2 pi (x - x0) / L)
  double x0 = 0.0;
  double length = 1.0;
  bool periodic = true;
};
/// F(x, y) = a(x) y for y > 0 and b(x) (-y) for y < 0, on [x0, x0 + L).
MetricInstance asym1d(const Asym1DParams& p);

}  // namespace zoo

Mat fundamental_tensor(const MetricInstance& m, const Vec& x, const Vec& y);
Vec legendre(const MetricInstance& m, const Vec& x, const Vec& y);
Vec legendre_inverse(const MetricInstance& m, const Vec& x, const Vec& xi);
Vec gradient(const MetricInstance& m, const Vec& x, const Vec& du);
/// F*(x, xi) through the Legendre identity F*(L(y)) = F(y).
double dual_norm(const MetricInstance& m, const Vec& x, const Vec& xi);
/// F*(x, xi) as a maximum of xi(u)/F(x,u) over sampled directions u.
double dual_norm_sampled(const MetricInstance& m, const Vec& x, const Vec& xi, int directions = 4096);

/// Unit Euclidean directions: n=1 gives {+1, -1}; n=2 an equispaced circle;
/// n=3 a Fibonacci sphere.
std::vector<Vec> sample_directions(int n, int count);

struct ReversibilityEstimate {
  double value = 1.0;
  int points = 0;
  int directions = 0;
};
ReversibilityEstimate reversibility(const MetricInstance& m, int points, int directions,
                                    std::uint64_t seed);

}  // namespace finsler
