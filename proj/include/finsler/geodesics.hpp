#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "finsler/measure.hpp"

namespace finsler {

/// Fixed RK4 step: min(0.01, |T|/2000), shrunk so that |T|/h is an integer.
double default_step(double T);

struct StateTrajectory {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> v;
  bool chart_exit = false;
  double step = 0.0;
  /// max |F(x(t), v(t)) - F(x0, v0)|.
  double speed_drift = 0.0;
};

/// Solves x'' + 2 G(x, x') = 0 on [0, T] (T < 0 integrates backwards). Stops at
/// the last sample inside the chart when the trajectory leaves it.
StateTrajectory integrate_geodesic(const MetricInstance& m, const Vec& x0, const Vec& y0, double T,
                                   double step = 0.0);

struct DistortionRates {
  double s = 0.0;
  double s_dot = 0.0;
};
/// S and its derivative from finite differences of the distortion along the
/// geodesic through (x, y), integrated forwards and backwards with step h/8.
/// Shares no code with the jet spray; used as a cross-check.
DistortionRates distortion_rates_fd(const MetricInstance& m, const MeasureSpec& mu, const Vec& x, const Vec& y,
                                    double h = 1e-3);

/// exp_p(y): the geodesic with initial velocity y evaluated at t = 1.
Vec exp_map(const MetricInstance& m, const Vec& p, const Vec& y);

enum class CutReason { Conjugate, ChartExit, Horizon };
const char* to_string(CutReason r);

struct GeodesicTrace {
  Vec p;
  /// Unit-F initial direction.
  Vec y;
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> v;
  /// det[x', J_1, ..., J_{n-1}] in coordinates (x' alone for n = 1).
  std::vector<double> jacobian;
  /// Volume density pulled back to the indicatrix; ~ t^{n-1} as t -> 0.
  std::vector<double> eta;
  double i_y = 0.0;
  CutReason cut = CutReason::Horizon;
  double step = 0.0;
  double speed_drift = 0.0;
  /// d/dt ln eta on window_begin..window_end-1 (indices into t).
  std::vector<double> delta_rho;
  std::vector<double> delta_rho_error;
  int window_begin = 0;
  int window_end = 0;

  /// eta with the convention eta~ = 0 past a conjugate point.
  double eta_tilde(int k) const { return (cut != CutReason::Conjugate || t[k] < i_y) ? eta[k] : 0.0; }
};

/// Integrates the geodesic from p in direction y (rescaled to F = 1) together
/// with n-1 Jacobi fields J(0) = 0, J'(0) = e_k, where (e_k) is an oriented
/// orthonormal Euclidean basis of the complement of y.
GeodesicTrace jacobi_determinant(const MetricInstance& m, const MeasureSpec& mu, const Vec& p, const Vec& y,
                                 double T, double step = 0.0);

struct LaplacianSamples {
  std::vector<double> t;
  std::vector<double> value;
  /// |D_h - D_2h|, the stencil-halving error estimate.
  std::vector<double> error;
};
/// Fourth-order finite differences of ln eta on 0 < t < i_y; one-sided
/// stencils at the window ends. Throws PastCutError if eta <= 0 there.
LaplacianSamples laplacian_distance(const GeodesicTrace& trace);

void write_trace_csv(std::ostream& os, const GeodesicTrace& trace);

/// Quadrature directions on the Euclidean unit sphere with weights summing to
/// omega_{n-1}. n = 2: equispaced; n = 3: Gauss-Legendre in z x trapezoid in phi.
struct DirectionSet {
  std::vector<Vec> u;
  std::vector<double> w;
};
DirectionSet direction_set(int n, int count);

struct VolumeOptions {
  /// 0 selects 128 (n = 2) or about 288 (n = 3).
  int directions = 0;
  double step = 0.0;
  bool parallel = true;
};

/// Sphere volumes Vol(S~_p(t)) on a uniform grid t_k = k h, 0 <= t_k <= R.
struct SphereProfile {
  std::vector<double> t;
  std::vector<double> sphere;
  double step = 0.0;
  int directions = 0;
  int conjugate_cuts = 0;
  int chart_exits = 0;
  double sigma_p = 0.0;
  double phi_p = 0.0;
  double max_speed_drift = 0.0;
  /// Integral of the profile from 0 to t_k.
  std::vector<double> cumulative;

  double sphere_at(double t) const;
  /// Integral of the sphere profile over [0, r].
  double ball_at(double r) const;
};

SphereProfile sphere_profile(const MetricInstance& m, const MeasureSpec& mu, const Vec& p, double R,
                             const VolumeOptions& opts = {});

double sphere_volume(const MetricInstance& m, const MeasureSpec& mu, const Vec& p, double t,
                     const VolumeOptions& opts = {});
double ball_volume(const MetricInstance& m, const MeasureSpec& mu, const Vec& p, double r,
                   const VolumeOptions& opts = {});
double annulus_volume(const MetricInstance& m, const MeasureSpec& mu, const Vec& p, double rho_o, double R,
                      const VolumeOptions& opts = {});

struct BallVolumeReport {
  Vec p;
  std::vector<double> radii;
  std::vector<double> ball;
  std::vector<double> sphere;
  double rho_o = 0.0;
  std::vector<double> annulus;
  int directions = 0;
  double step = 0.0;
  int conjugate_cuts = 0;
  int chart_exits = 0;
};

BallVolumeReport ball_volume_report(const MetricInstance& m, const MeasureSpec& mu, const Vec& p,
                                    const std::vector<double>& radii, double rho_o,
                                    const VolumeOptions& opts = {});

}  // namespace finsler
