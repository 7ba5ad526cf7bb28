#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "finsler/curvature.hpp"

namespace finsler {

/// How the measure is sampled on faces (half-nodes).
enum class FaceWeights {
  /// sigma at the face midpoint.
  Midpoint,
  /// Faces chosen so that the discrete Laplacian of u = x equals (ln sigma)'
  /// at every node (reflecting interval only). Makes the Ornstein-Uhlenbeck
  /// eigenfunction u = x exact on the grid.
  DriftMatched,
};

struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = true;
  FaceWeights face_weights = FaceWeights::Midpoint;
};

/// One-dimensional Finsler grid. Nodes carry the measure weights w (sum 1);
/// face f joins node f and node f+1 (mod M when periodic) and carries the
/// metric coefficients a, b and the face weight wf on the same scale as w.
/// Reflecting intervals use cell-centred nodes and zero flux at both ends.
struct Grid1D {
  int M = 0;
  bool periodic = true;
  double lo = 0.0;
  double hi = 0.0;
  double h = 0.0;
  std::vector<double> x, a, b, w;
  std::vector<double> xf, af, bf, wf;

  int faces() const { return periodic ? M : M - 1; }
  int right(int f) const { return f + 1 == M ? 0 : f + 1; }
  /// Rescales w and wf so that sum w = 1.
  void normalize();
  /// Throws ParameterError unless a, b, w, wf > 0 and sum w = 1 within 1e-12.
  void validate() const;
};

/// Samples a one-dimensional metric and measure. The interval must lie in the
/// chart; F(x, +1) and F(x, -1) give the coefficients a and b.
Grid1D make_grid(const MetricInstance& m, const MeasureSpec& mu, int M, const GridSpec& spec);

/// Face slopes and the Finsler gradient on faces. The gradient of du = s dx is
/// s/a^2 for s > 0, s/b^2 for s < 0 and 0 for s = 0.
struct GridGradient {
  std::vector<double> slope;
  std::vector<double> grad;
  /// F(grad u) = F*(du).
  std::vector<double> F;
};
GridGradient grid_gradient(const Grid1D& G, const std::vector<double>& u);

/// g_{grad u} on faces: a^2 (slope > 0), b^2 (slope < 0), (a^2 + b^2)/2 at
/// zero slope.
std::vector<double> sector_weights(const Grid1D& G, const std::vector<double>& u);

/// Flux-form Laplacian: w_j (Delta u)_j = Q_{j+1/2} - Q_{j-1/2} with
/// Q_f = wf_f s_f / (h W_f). Exactly the negative adjoint of the gradient pairing.
std::vector<double> finsler_laplacian(const Grid1D& G, const std::vector<double>& u);

/// Linearized gradient of f with the weights frozen at grad u.
std::vector<double> linearized_gradient(const Grid1D& G, const std::vector<double>& u, const std::vector<double>& f);
std::vector<double> linearized_laplacian(const Grid1D& G, const std::vector<double>& u,
                                         const std::vector<double>& f);

/// Discrete divergence div_m of a face field.
std::vector<double> divergence(const Grid1D& G, const std::vector<double>& V);
/// Node field d phi(V): the wf-weighted average of the adjacent face values
/// of slope(phi) * V. Satisfies div(phi_bar V) = phi div V + d phi(V) exactly.
std::vector<double> node_pairing(const Grid1D& G, const std::vector<double>& phi, const std::vector<double>& V);
/// Face average of a node field.
std::vector<double> face_average(const Grid1D& G, const std::vector<double>& f);

/// g_{grad u}(grad^{grad u} f, grad^{grad u} f) at nodes, defined as the
/// node pairing of f with its own linearized gradient. It satisfies
/// Delta^{grad u} f^2 = 2 f Delta^{grad u} f + 2 (this) exactly.
std::vector<double> carre_du_champ(const Grid1D& G, const std::vector<double>& u, const std::vector<double>& f);

/// F(grad u) at nodes: the average of the adjacent face values F*(du).
std::vector<double> node_speed(const Grid1D& G, const std::vector<double>& u);

/// The correction integrand of the improved Poincare inequality, g = g_{grad u}(grad^{grad u} F(grad u), same) at nodes.
std::vector<double> g_field(const Grid1D& G, const std::vector<double>& u);

double mean(const Grid1D& G, const std::vector<double>& f);
/// Two-pass variance sum w (f - mean)^2.
double variance(const Grid1D& G, const std::vector<double>& f);
/// One-pass variance sum w f^2 - (sum w f)^2.
double variance_one_pass(const Grid1D& G, const std::vector<double>& f);
/// E(u) = sum_f wf F*(du)^2.
double energy(const Grid1D& G, const std::vector<double>& u);
/// sum w f^2.
double l2_squared(const Grid1D& G, const std::vector<double>& f);

/// Explicit Euler stability limit 1/max_j(diag of the Laplacian), with the
/// smaller of a^2, b^2 on every face (Gershgorin).
double heat_stable_step(const Grid1D& G);

struct HeatOptions {
  double T = 1.0;
  /// 0 selects 0.8 times the stability limit (shrunk so T/dt is an integer).
  double dt = 0.0;
  /// Snapshots of u are stored every this many steps; 0 selects about 200.
  int snapshot_every = 0;
  bool parallel = true;
};

struct HeatTrajectory {
  double dt = 0.0;
  double dt_stable = 0.0;
  long steps = 0;
  int snapshot_every = 0;
  /// Sample times (every snapshot_every steps, including 0 and T).
  std::vector<double> t;
  std::vector<std::vector<double>> u;
  /// Phi = sum w u^2.
  std::vector<double> phi;
  /// -2 E(u_t).
  std::vector<double> dphi;
  /// Centred difference of Phi at step resolution (one-sided at the ends).
  std::vector<double> dphi_fd;
  /// 4 ||Delta u_t||^2.
  std::vector<double> ddphi;
  std::vector<double> ddphi_fd;
  std::vector<double> energy;
  std::vector<double> var;
  std::vector<double> mean;
  /// sum w g(t) at the samples.
  std::vector<double> g_total;
  /// Per-node trapezoid integral of g over [0, T] at step resolution.
  std::vector<double> g_integral;
  /// Part of sum w g_integral carried by nodes whose adjacent slopes differ in sign.
  double g_sign_change = 0.0;
  std::vector<double> g_final;
  /// |mean(u_T) - mean(u_0)| / T.
  double mass_drift_rate = 0.0;
};

/// Explicit Euler for du/dt = Delta u. Throws StepSizeError if dt exceeds the
/// stability limit or Phi increases by more than 1e-12 Phi(0) in a step.
HeatTrajectory heat_flow(const Grid1D& G, const std::vector<double>& f0, const HeatOptions& opts);

void write_heat_csv(std::ostream& os, const HeatTrajectory& tr);

struct GCorrection {
  std::vector<double> per_node;
  /// sum w int_0^inf g dt.
  double total = 0.0;
  double accumulated = 0.0;
  double tail = 0.0;
  double tail_share = 0.0;
  /// Fitted decay rate r in g_total ~ e^{-r t} on the last decade.
  double decay_rate = 0.0;
  double sign_change_share = 0.0;
  /// Sign-change nodes carry more than 1% of the total.
  bool sign_change_flag = false;
};

/// Time integral of g with an exponential tail fitted on the last decade of
/// g_total. Throws HorizonError if g is not decaying there.
GCorrection g_correction(const Grid1D& G, const HeatTrajectory& tr);

struct PLOptions {
  /// Heat horizon; 0 selects 12/K.
  double T = 0.0;
  double dt = 0.0;
  double tol = 0.02;
  bool parallel = true;
};

struct PLReport {
  double K = 0.0;
  double variance = 0.0;
  double energy = 0.0;
  double g_total = 0.0;
  double rhs_plain = 0.0;
  double rhs_improved = 0.0;
  double tol = 0.0;
  /// (rhs_improved - variance) / variance; 0 for constant f.
  double slack = 0.0;
  double tail_share = 0.0;
  bool sign_change_flag = false;
  bool improved_holds = false;
  /// rhs_improved <= rhs_plain, no tolerance.
  bool dominance = false;
  bool passed = false;
};

/// Improved Poincare-Lichnerowicz check. K must be a certified lower bound of
/// Ric^inf (ParameterError if K <= 0).
PLReport pl_check(const Grid1D& G, const std::vector<double>& f0, double K, const PLOptions& opts = {});

struct BochnerReport {
  double K = 0.0;
  double energy = 0.0;
  double laplacian_sq = 0.0;
  double g_integral = 0.0;
  /// K E / (||Delta u||^2 - int g); 1 in the equality case.
  double ratio = 0.0;
  double tol = 0.0;
  bool passed = false;
};

/// K int F^2(grad u) <= int (Delta u)^2 - int g, within a relative tolerance.
BochnerReport bochner_integrated_check(const Grid1D& G, const std::vector<double>& u, double K,
                                       double tol = 0.02);

struct Lambda1Options {
  int restarts = 10;
  std::uint64_t seed = 1;
  int max_sector_iterations = 60;
  /// Heat horizon T = horizon_factor / lambda_rayleigh; the decay fit uses the
  /// second half of the part of [0, T] where Var is above roundoff.
  double horizon_factor = 12.0;
  bool parallel = true;
};

struct Lambda1Report {
  double rayleigh = 0.0;
  std::vector<double> restart_values;
  std::vector<double> eigenfunction;
  int sector_iterations = 0;
  double decay_rate = 0.0;
  double decay_T = 0.0;
  double relative_gap = 0.0;
  /// a = b on every face.
  bool reversible = true;
  /// Reversible grids: estimators agree within 3%. Otherwise the decay rate is
  /// only an upper bound and must not fall below the Rayleigh value by 3%.
  bool converged = false;
};

/// lambda_1 by (i) Rayleigh-quotient minimization over mean-zero functions
/// (sector-frozen inverse iteration, seeded restarts) and (ii) the decay rate
/// of ln Var(u_t) along the heat flow from a seeded random start.
Lambda1Report lambda1_estimate(const Grid1D& G, const Lambda1Options& opts = {});

struct EigenBoundReport {
  double lambda1 = 0.0;
  double K = 0.0;
  /// min over the tested functions of 2 (int int g) / Var.
  double delta_est = 0.0;
  std::vector<double> delta_values;
  /// lambda1 - (K + delta_est).
  double margin = 0.0;
  double tol = 0.0;
  bool passed = false;
};

/// lambda_1 >= K + delta_est, within tol * lambda_1. The Rayleigh minimizer is
/// always among the tested functions, which makes the check meaningful: the
/// estimate of the infimum is attained by the function realizing lambda_1.
EigenBoundReport eigenvalue_bound_check(const Grid1D& G, const Lambda1Report& l1, double K,
                                        const std::vector<std::vector<double>>& tested, double tol = 0.03,
                                        bool parallel = true);

/// R(f) = E(f) / Var(f).
double rayleigh_quotient(const Grid1D& G, const std::vector<double>& f);

/// Smooth random grid function: a few Fourier modes with decaying amplitudes
/// (cosines on reflecting intervals), drawn from mt19937_64.
std::vector<double> random_smooth(const Grid1D& G, std::uint64_t seed, int modes = 6);

}  // namespace finsler
