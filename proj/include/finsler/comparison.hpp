#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "finsler/curvature.hpp"
#include "finsler/geodesics.hpp"
#include "finsler/jets.hpp"
#include "finsler/quadrature.hpp"

namespace finsler {

/// s_c for any jet-supported scalar type, without domain checks.
template <class T>
T s_c_generic(double c, const T& t) {
  using std::sin;
  using std::sinh;
  if (c > 0.0) return sin(t * std::sqrt(c)) * (1.0 / std::sqrt(c));
  if (c < 0.0) return sinh(t * std::sqrt(-c)) * (1.0 / std::sqrt(-c));
  return t;
}

/// s_c: the solution of f'' + c f = 0 with f(0) = 0, f'(0) = 1.
/// Requires t > 0, and t < pi/sqrt(c) when c > 0.
double s_c(double c, double t);
double s_c_prime(double c, double t);
/// s_c'/s_c on the same domain.
double ct_c(double c, double t);

/// Comparison function chi on (rho_lo, t_hi).
struct ChiFamily {
  enum class Kind { SinPower, DistortionPower, NPower, LogConcaveExp };

  Kind kind = Kind::SinPower;
  /// SinPower, DistortionPower: curvature c (Ric or Ric^inf >= (n-1)c).
  double c = 0.0;
  double n = 2.0;
  /// SinPower: S >= -delta.
  double delta = 0.0;
  /// DistortionPower: |tau| <= k.
  double k = 0.0;
  /// NPower: Ric^N >= (N-1)K. LogConcaveExp: Ric^inf >= K.
  double K = 0.0;
  double N = 2.0;
  double m_o = 0.0;
  double rho_o = 0.0;
  /// SinPower under a Ric^inf hypothesis (domain pi/(2 sqrt c)) rather than
  /// an unweighted Ric hypothesis (domain pi/sqrt c).
  bool weighted = false;

  /// s_c^{n-1} e^{delta t}.
  static ChiFamily sin_power(double c, double n, double delta, bool weighted = false);
  /// s_c^{n+4k-1}.
  static ChiFamily distortion_power(double c, double n, double k);
  /// s_K^{N-1}.
  static ChiFamily n_power(double K, double N);
  /// exp(m_o (t - rho_o) - K (t - rho_o)^2 / 2).
  static ChiFamily log_concave_exp(double m_o, double K, double rho_o);

  double rho_lo() const;
  double t_hi() const;
  std::string name() const;
  /// True if chi(t) = t^{dim-1}(1 + O(t)) at 0, the normalization needed for
  /// absolute volume bounds.
  bool small_ball_normalized(int dim) const;
};

const char* to_string(ChiFamily::Kind k);

double chi_eval(const ChiFamily& fam, double t);
/// Closed-form d/dt ln chi.
double chi_log_derivative(const ChiFamily& fam, double t);
/// Integral of chi over [a, b] within the closed domain; adaptive Simpson to
/// 1e-10 with the upper end capped at t_hi - 1e-9.
IntegralEstimate chi_integral(const ChiFamily& fam, double a, double b);

struct HypothesisStatus {
  bool certified = false;
  std::string requirement;
  /// Certified bound minus required bound (>= 0 when certified).
  double margin = -std::numeric_limits<double>::infinity();
};

/// Checks the curvature hypothesis that licenses `fam` against a scan result.
/// NPower needs a certificate computed with the same N.
HypothesisStatus check_hypothesis(const ChiFamily& fam, const RicciBound& certificate, double tol = 1e-8);

struct LaplacianComparisonOptions {
  /// Geodesic directions; 0 selects the volume default.
  int directions = 0;
  /// Integration horizon; capped at t_hi - 1e-6. Required when t_hi is infinite.
  double horizon = 0.0;
  double step = 0.0;
  /// Samples with t < max(rho_lo, min_rho) are not compared.
  double min_rho = 0.2;
  double tol = 1e-3;
  bool parallel = true;
};

struct LaplacianComparisonReport {
  /// The family actually compared (m_o filled in for LogConcaveExp).
  ChiFamily family;
  HypothesisStatus hypothesis;
  int geodesics = 0;
  int samples = 0;
  int past_cut_skipped = 0;
  int chart_exits = 0;
  int conjugate_cuts = 0;
  double tol = 0.0;
  /// min over samples of (ln chi)' - Delta rho.
  double worst_margin = std::numeric_limits<double>::infinity();
  /// min over samples of (ln chi)' - Delta rho + tol + fd_error.
  double worst_slack = std::numeric_limits<double>::infinity();
  double worst_t = 0.0;
  Vec worst_x;
  Vec worst_direction;
  /// max |Delta rho - (ln chi)'|; the sharpness gap in equality cases.
  double max_abs_gap = 0.0;
  double max_fd_error = 0.0;
  bool passed = false;
};

/// Compares Delta rho from the Jacobi determinant with (ln chi)' along
/// geodesics from p. Throws ConfigurationError if no certificate is given.
LaplacianComparisonReport laplacian_comparison_check(const MetricInstance& m, const MeasureSpec& mu,
                                                     const Vec& p, const ChiFamily& fam,
                                                     const RicciBound* certificate,
                                                     const LaplacianComparisonOptions& opts = {});

struct BishopGromovOptions {
  double tol = 5e-3;
  VolumeOptions volume;
};

struct BishopGromovReport {
  ChiFamily family;
  double rho_o = 0.0;
  std::vector<double> radii;
  std::vector<double> annulus;
  std::vector<double> chi_integral;
  std::vector<double> ratio;
  double tol = 0.0;
  /// max over r < R of ratio(R)/ratio(r) - 1; <= tol for a pass.
  double worst_increase = -std::numeric_limits<double>::infinity();
  bool monotone = false;
  /// Absolute bound Vol(B(R) \ B(r)) <= phi(p) omega_{n-1} int_r^R chi.
  bool absolute_applicable = false;
  double phi_p = 0.0;
  /// max over pairs of Vol/bound - 1.
  double absolute_worst = -std::numeric_limits<double>::infinity();
  /// max over pairs of |Vol/bound - 1|; zero in the equality case.
  double absolute_gap = 0.0;
  bool absolute_ok = true;
  double quadrature_error = 0.0;
  int directions = 0;
  double step = 0.0;
  int conjugate_cuts = 0;
  int chart_exits = 0;
  bool precondition_passed = false;
  bool passed = false;
};

/// Relative volume comparison on the radius grid (increasing, inside
/// (rho_o, t_hi)). Throws ConfigurationError without a precondition report.
BishopGromovReport bishop_gromov_check(const MetricInstance& m, const MeasureSpec& mu, const Vec& p,
                                       const ChiFamily& fam, double rho_o, const std::vector<double>& radii,
                                       const LaplacianComparisonReport* precondition,
                                       const BishopGromovOptions& opts = {});

void write_ratio_csv(std::ostream& os, const BishopGromovReport& r);

struct VolumeBound {
  int n = 0;
  double K = 0.0;
  double delta = 0.0;
  double phi_p = 0.0;
  /// c(n, delta/sqrt K) so that value = phi_p K^{-n/2} constant.
  double constant = 0.0;
  double value = 0.0;
  double quadrature_error = 0.0;
};

/// Total-volume bound under Ric^inf >= K > 0 and S >= -delta on the ball of
/// radius (pi/2) sqrt((n-1)/K).
VolumeBound total_volume_bound(int n, double K, double delta, double phi_p);
/// Radius of the ball on which the S-curvature bound is needed.
double volume_bound_radius(int n, double K);

struct BonnetMyersReport {
  int n = 0;
  double K = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  double diameter_bound = 0.0;
  double N_star = 0.0;
  double H = 0.0;
  /// C(n, delta/sqrt K): Vol(M) <= phi_p K^{-n/2} C.
  double volume_constant = 0.0;
  double volume_quadrature_error = 0.0;
  /// Numerical minimization of f_{K,delta} over (n + delta^2/K, inf).
  double numeric_argmin = 0.0;
  double numeric_min = 0.0;
  int golden_iterations = 0;
  int bisection_iterations = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

double f_K_delta(int n, double K, double delta, double N);
BonnetMyersReport bonnet_myers(int n, double K, double delta);

}  // namespace finsler
