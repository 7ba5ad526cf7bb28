#include "finsler/measure.hpp"

#include <cmath>
#include <numbers>

#include "finsler/calculus.hpp"
#include "finsler/quadrature.hpp"

namespace finsler {

MeasureSpec MeasureSpec::busemann_hausdorff(int quad_order) {
  if (quad_order < 0) throw ParameterError("busemann-hausdorff: quadrature order must be >= 0");
  MeasureSpec s;
  s.kind_ = Kind::BusemannHausdorff;
  s.name_ = "busemann-hausdorff";
  s.quad_order_ = quad_order;
  return s;
}

MeasureSpec MeasureSpec::riemannian_volume() {
  MeasureSpec s;
  s.kind_ = Kind::RiemannianVolume;
  s.name_ = "riemannian-volume";
  return s;
}

MeasureSpec MeasureSpec::gaussian(double K) {
  if (!std::isfinite(K)) throw ParameterError("gaussian: K must be finite");
  MeasureSpec s;
  s.kind_ = Kind::Gaussian;
  s.name_ = "gaussian";
  s.K_ = K;
  return s;
}

MeasureSpec MeasureSpec::custom_exponential(const Vec& k, const Vec& l) {
  if (k.size() != l.size()) throw ParameterError("custom-exponential: k and l differ in length");
  MeasureSpec s;
  s.kind_ = Kind::CustomExponential;
  s.name_ = "custom-exponential";
  s.k_ = k;
  s.l_ = l;
  return s;
}

int default_bh_order(int n) { return n == 3 ? 20 : 64; }

template <int n>
Jet2<double, n> bh_density_jet(const MetricInstance& m, const std::array<double, n>& x, int order) {
  if (order <= 0) order = default_bh_order(n);
  using J = Jet2<double, n>;
  auto F = [&](const std::array<double, n>& u) { return calc::metric_x_jet<n>(m, x, u); };
  if constexpr (n == 1) {
    J inv = 1.0 / F({1.0}) + 1.0 / F({-1.0});
    return 2.0 / inv;
  } else if constexpr (n == 2) {
    J area(0.0);
    const double dth = 2.0 * std::numbers::pi / order;
    for (int k = 0; k < order; ++k) {
      const double th = k * dth;
      J f = F({std::cos(th), std::sin(th)});
      area = area + 1.0 / (f * f);
    }
    area = area * (0.5 * dth);
    return std::numbers::pi / area;
  } else {
    static_assert(n == 3);
    const QuadratureRule gl = gauss_legendre(order);
    const int nphi = 2 * order;
    const double dphi = 2.0 * std::numbers::pi / nphi;
    J vol(0.0);
    for (int a = 0; a < order; ++a) {
      const double z = gl.nodes[a];
      const double rho = std::sqrt(1.0 - z * z);
      for (int b = 0; b < nphi; ++b) {
        const double ph = b * dphi;
        J f = F({rho * std::cos(ph), rho * std::sin(ph), z});
        vol = vol + (gl.weights[a] * dphi) / (f * f * f);
      }
    }
    vol = vol * (1.0 / 3.0);
    return (4.0 * std::numbers::pi / 3.0) / vol;
  }
}

template Jet2<double, 1> bh_density_jet<1>(const MetricInstance&, const std::array<double, 1>&, int);
template Jet2<double, 2> bh_density_jet<2>(const MetricInstance&, const std::array<double, 2>&, int);
template Jet2<double, 3> bh_density_jet<3>(const MetricInstance&, const std::array<double, 3>&, int);

template <int n>
Jet2<double, n> MeasureSpec::log_sigma_jet(const MetricInstance& m, const std::array<double, n>& x) const {
  using J = Jet2<double, n>;
  switch (kind_) {
    case Kind::BusemannHausdorff:
      return log(bh_density_jet<n>(m, x, quad_order_));
    case Kind::RiemannianVolume: {
      if (!m.riemannian()) throw ParameterError("riemannian-volume requires a Riemannian metric");
      std::array<J, n> xj, yj;
      for (int i = 0; i < n; ++i) {
        xj[i] = J::variable(x[i], i);
        yj[i] = J(i == 0 ? 1.0 : 0.0);
      }
      auto g = calc::fundamental_tensor<n, J>(m, xj, yj);
      return 0.5 * log(determinant<J, n>(g));
    }
    case Kind::Gaussian: {
      J psi(0.0);
      for (int i = 0; i < n; ++i) {
        J xi = J::variable(x[i], i);
        psi = psi + xi * xi * (0.5 * K_);
      }
      return -psi;
    }
    case Kind::CustomExponential: {
      if (k_.size() != n) throw ParameterError("custom-exponential: parameter length differs from dimension");
      J psi(0.0);
      for (int i = 0; i < n; ++i) {
        J xi = J::variable(x[i], i);
        psi = psi + xi * xi * (0.5 * k_[i]) + xi * l_[i];
      }
      return -psi;
    }
  }
  throw ParameterError("unknown measure");
}

template Jet2<double, 1> MeasureSpec::log_sigma_jet<1>(const MetricInstance&, const std::array<double, 1>&) const;
template Jet2<double, 2> MeasureSpec::log_sigma_jet<2>(const MetricInstance&, const std::array<double, 2>&) const;
template Jet2<double, 3> MeasureSpec::log_sigma_jet<3>(const MetricInstance&, const std::array<double, 3>&) const;

double MeasureSpec::sigma(const MetricInstance& m, const Vec& x) const {
  return dispatch_dim(m.dim(), [&](auto nc) {
    constexpr int n = decltype(nc)::value;
    return std::exp(log_sigma_jet<n>(m, to_array<n>(x)).v);
  });
}

double bh_density(const MetricInstance& m, const Vec& x, int order) {
  return dispatch_dim(m.dim(), [&](auto nc) {
    constexpr int n = decltype(nc)::value;
    return bh_density_jet<n>(m, to_array<n>(x), order).v;
  });
}

DensityEstimate bh_density_checked(const MetricInstance& m, const Vec& x, int order) {
  if (order <= 0) order = default_bh_order(m.dim());
  DensityEstimate e;
  e.value = bh_density(m, x, order);
  e.doubled_order_value = bh_density(m, x, 2 * order);
  e.precision_warning = std::abs(e.value - e.doubled_order_value) > 1e-8 * std::abs(e.doubled_order_value);
  return e;
}

double phi_factor(const MetricInstance& m, const MeasureSpec& mu, const Vec& x) {
  return mu.sigma(m, x) / bh_density(m, x, mu.quad_order());
}

double distortion(const MetricInstance& m, const MeasureSpec& mu, const Vec& x, const Vec& y) {
  Mat g = fundamental_tensor(m, x, y);
  return 0.5 * std::log(g.determinant()) - std::log(mu.sigma(m, x));
}

double unit_sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double unit_ball_volume(int n) { return unit_sphere_area(n) / n; }

}  // namespace finsler
