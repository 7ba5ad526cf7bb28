#pragma once

#include <string>

#include "finsler/metric.hpp"

namespace finsler {

/// Density sigma(x) of dm = sigma dx^1...dx^n in chart coordinates.
class MeasureSpec {
 public:
  enum class Kind { BusemannHausdorff, RiemannianVolume, Gaussian, CustomExponential };

  /// quad_order: angular nodes for n = 2, Gauss-Legendre nodes in z for n = 3
  /// (with twice as many azimuthal nodes).
  static MeasureSpec busemann_hausdorff(int quad_order = 0);
  static MeasureSpec riemannian_volume();
  /// sigma = exp(-K |x|^2 / 2).
  static MeasureSpec gaussian(double K);
  /// sigma = exp(-psi), psi = 1/2 sum k_i x_i^2 + sum l_i x_i.
  static MeasureSpec custom_exponential(const Vec& k, const Vec& l);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  int quad_order() const { return quad_order_; }
  /// Gaussian curvature parameter K (Gaussian kind only).
  double gaussian_K() const { return K_; }

  double sigma(const MetricInstance& m, const Vec& x) const;
  /// ln sigma with exact gradient and Hessian in x.
  template <int n>
  Jet2<double, n> log_sigma_jet(const MetricInstance& m, const std::array<double, n>& x) const;

 private:
  Kind kind_ = Kind::BusemannHausdorff;
  std::string name_;
  int quad_order_ = 0;
  double K_ = 0.0;
  Vec k_, l_;
};

int default_bh_order(int n);

/// Busemann-Hausdorff density as a jet in x.
template <int n>
Jet2<double, n> bh_density_jet(const MetricInstance& m, const std::array<double, n>& x, int order);

double bh_density(const MetricInstance& m, const Vec& x, int order = 0);

struct DensityEstimate {
  double value = 0.0;
  double doubled_order_value = 0.0;
  bool precision_warning = false;
};
/// bh_density with an order-doubling check (warning above 1e-8 relative).
DensityEstimate bh_density_checked(const MetricInstance& m, const Vec& x, int order = 0);

double phi_factor(const MetricInstance& m, const MeasureSpec& mu, const Vec& x);
/// tau = ln sqrt(det g(x, y)) - ln sigma(x).
double distortion(const MetricInstance& m, const MeasureSpec& mu, const Vec& x, const Vec& y);

/// Euclidean unit-ball volume in dimension n (omega_{n-1} / n).
double unit_ball_volume(int n);
/// Euclidean unit-sphere area omega_{n-1}.
double unit_sphere_area(int n);

}  // namespace finsler
