#include "finsler/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>

#include "finsler/calculus.hpp"
#include "finsler/quadrature.hpp"

namespace finsler {

double default_step(double T) {
  const double span = std::abs(T);
  if (!(span > 0.0)) throw ParameterError("geodesic horizon must be nonzero");
  const double h = std::min(0.01, span / 2000.0);
  const long steps = static_cast<long>(std::ceil(span / h - 1e-9));
  return span / steps;
}

namespace {

double fit_step(double T, double requested) {
  if (requested <= 0.0) return default_step(T);
  const double span = std::abs(T);
  const long steps = std::max(1L, static_cast<long>(std::ceil(span / requested - 1e-9)));
  return span / steps;
}

/// State layout: x (n), v (n), J_1..J_q (q n), J'_1..J'_q (q n), q = jacobi ? n-1 : 0.
template <int n>
Vec geodesic_rhs(const MetricInstance& m, const Vec& s, bool jacobi) {
  const Vec x = s.head(n);
  if (!m.chart().contains(x)) throw ChartBoundaryError("geodesic left the chart");
  Vec d(s.size());
  d.head(n) = s.segment(n, n);
  if constexpr (n == 1) {
    (void)jacobi;
    auto G = calc::spray<1, double>(m, {s[0]}, {s[1]});
    d[1] = -2.0 * G[0];
  } else {
    constexpr int q = n - 1;
    if (!jacobi) {
      std::array<double, n> xa, va;
      for (int i = 0; i < n; ++i) {
        xa[i] = s[i];
        va[i] = s[n + i];
      }
      auto G = calc::spray<n, double>(m, xa, va);
      for (int i = 0; i < n; ++i) d[n + i] = -2.0 * G[i];
      return d;
    }
    using T = Jet1<double, q>;
    std::array<T, n> xs, vs;
    for (int i = 0; i < n; ++i) {
      xs[i] = T(s[i]);
      vs[i] = T(s[n + i]);
      for (int k = 0; k < q; ++k) {
        xs[i].d[k] = s[2 * n + k * n + i];
        vs[i].d[k] = s[2 * n + q * n + k * n + i];
      }
    }
    auto G = calc::spray<n, T>(m, xs, vs);
    for (int i = 0; i < n; ++i) d[n + i] = -2.0 * G[i].v;
    for (int k = 0; k < q; ++k) {
      d.segment(2 * n + k * n, n) = s.segment(2 * n + q * n + k * n, n);
      for (int i = 0; i < n; ++i) d[2 * n + q * n + k * n + i] = -2.0 * G[i].d[k];
    }
  }
  return d;
}

Vec rhs(const MetricInstance& m, const Vec& s, bool jacobi) {
  return dispatch_dim(m.dim(), [&](auto nc) -> Vec {
    constexpr int n = decltype(nc)::value;
    return geodesic_rhs<n>(m, s, jacobi);
  });
}

/// One classical RK4 step; returns false if a stage left the chart.
bool rk4_step(const MetricInstance& m, Vec& s, double h, bool jacobi) {
  try {
    const Vec k1 = rhs(m, s, jacobi);
    const Vec k2 = rhs(m, s + 0.5 * h * k1, jacobi);
    const Vec k3 = rhs(m, s + 0.5 * h * k2, jacobi);
    const Vec k4 = rhs(m, s + h * k3, jacobi);
    Vec next = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!m.chart().contains(next.head(m.dim()))) return false;
    if (!next.allFinite()) throw StiffnessError("geodesic state became non-finite");
    s = std::move(next);
    return true;
  } catch (const ChartBoundaryError&) {
    return false;
  }
}

/// Oriented orthonormal basis of the Euclidean complement of u (|u| = 1).
std::vector<Vec> complement_basis(const Vec& u) {
  const int n = static_cast<int>(u.size());
  std::vector<Vec> e;
  if (n == 2) {
    Vec a(2);
    a << -u[1], u[0];
    e.push_back(a);
  } else if (n == 3) {
    Vec ref = Vec::Unit(3, 2);
    if (std::abs(u[2]) > 0.9) ref = Vec::Unit(3, 0);
    Eigen::Vector3d uu = u, r = ref;
    Eigen::Vector3d e1 = r.cross(uu).normalized();
    Eigen::Vector3d e2 = uu.cross(e1);
    e.push_back(Vec(e1));
    e.push_back(Vec(e2));
  }
  return e;
}

double frame_det(const Vec& v, const Vec& s, int n) {
  if (n == 1) return v[0];
  Mat M(n, n);
  M.col(0) = v;
  for (int k = 0; k < n - 1; ++k) M.col(k + 1) = s.segment(2 * n + k * n, n);
  return M.determinant();
}

}  // namespace

StateTrajectory integrate_geodesic(const MetricInstance& m, const Vec& x0, const Vec& y0, double T,
                                   double step) {
  const int n = m.dim();
  if (x0.size() != n || y0.size() != n) throw ParameterError("integrate_geodesic: wrong vector dimension");
  if (!m.chart().contains(x0)) throw ChartBoundaryError("integrate_geodesic: start point outside the chart");
  const double F0 = m.F(x0, y0);
  if (!(F0 > 0.0)) throw DegenerateDirectionError();
  StateTrajectory tr;
  const double h = fit_step(T, step) * (T < 0 ? -1.0 : 1.0);
  const long steps = std::lround(std::abs(T / h));
  tr.step = std::abs(h);
  Vec s(2 * n);
  s << x0, y0;
  tr.t.push_back(0.0);
  tr.x.push_back(x0);
  tr.v.push_back(y0);
  for (long k = 1; k <= steps; ++k) {
    if (!rk4_step(m, s, h, false)) {
      tr.chart_exit = true;
      break;
    }
    tr.t.push_back(k * h);
    tr.x.push_back(s.head(n));
    tr.v.push_back(s.segment(n, n));
    tr.speed_drift = std::max(tr.speed_drift, std::abs(m.F(tr.x.back(), tr.v.back()) - F0));
  }
  return tr;
}

Vec exp_map(const MetricInstance& m, const Vec& p, const Vec& y) {
  if (y.squaredNorm() == 0.0) return p;
  StateTrajectory tr = integrate_geodesic(m, p, y, 1.0);
  if (tr.chart_exit) throw ChartBoundaryError("exp_map: geodesic left the chart before t = 1");
  return tr.x.back();
}

DistortionRates distortion_rates_fd(const MetricInstance& m, const MeasureSpec& mu, const Vec& x, const Vec& y,
                                    double h) {
  const StateTrajectory fwd = integrate_geodesic(m, x, y, 2 * h, h / 8);
  const StateTrajectory bwd = integrate_geodesic(m, x, y, -2 * h, h / 8);
  if (fwd.chart_exit || bwd.chart_exit) throw ChartBoundaryError("distortion_rates_fd: geodesic left the chart");
  auto tau = [&](const StateTrajectory& tr, int k) { return distortion(m, mu, tr.x[k], tr.v[k]); };
  const int k1 = 8, k2 = 16;
  DistortionRates r;
  r.s = (-tau(fwd, k2) + 8 * tau(fwd, k1) - 8 * tau(bwd, k1) + tau(bwd, k2)) / (12 * h);
  r.s_dot = (tau(fwd, k1) - 2 * tau(fwd, 0) + tau(bwd, k1)) / (h * h);
  return r;
}

const char* to_string(CutReason r) {
  switch (r) {
    case CutReason::Conjugate:
      return "conjugate";
    case CutReason::ChartExit:
      return "chart-exit";
    case CutReason::Horizon:
      return "horizon";
  }
  return "unknown";
}

GeodesicTrace jacobi_determinant(const MetricInstance& m, const MeasureSpec& mu, const Vec& p, const Vec& y,
                                 double T, double step) {
  const int n = m.dim();
  if (!(T > 0.0)) throw ParameterError("jacobi_determinant: horizon must be positive");
  if (!m.chart().contains(p)) throw ChartBoundaryError("jacobi_determinant: base point outside the chart");
  const double Fy = m.F(p, y);
  if (!(Fy > 0.0)) throw DegenerateDirectionError();
  GeodesicTrace tr;
  tr.p = p;
  tr.y = y / Fy;
  const double h = fit_step(T, step);
  const long steps = std::lround(T / h);
  tr.step = h;

  const Vec u = y / y.norm();
  const auto basis = complement_basis(u);
  const int q = n - 1;
  Vec s = Vec::Zero(2 * n + 2 * q * n);
  s.head(n) = p;
  s.segment(n, n) = tr.y;
  for (int k = 0; k < q; ++k) s.segment(2 * n + q * n + k * n, n) = basis[k];

  const double sigma_p = mu.sigma(m, p);
  // det[y^, e_1, ..., e_q] = y^ . u = 1 / F(p, u).
  const double denom = sigma_p * (n == 1 ? tr.y[0] : tr.y.dot(u));

  auto record = [&](double t) {
    const Vec x = s.head(n), v = s.segment(n, n);
    const double J = frame_det(v, s, n);
    tr.t.push_back(t);
    tr.x.push_back(x);
    tr.v.push_back(v);
    tr.jacobian.push_back(n == 1 ? J / tr.y[0] : J);
    tr.eta.push_back(mu.sigma(m, x) * J / denom);
    tr.speed_drift = std::max(tr.speed_drift, std::abs(m.F(x, v) - 1.0));
  };
  record(0.0);
  tr.cut = CutReason::Horizon;
  tr.i_y = T;
  for (long k = 1; k <= steps; ++k) {
    if (!rk4_step(m, s, h, n > 1)) {
      tr.cut = CutReason::ChartExit;
      tr.i_y = tr.t.back();
      break;
    }
    record(k * h);
    const double Jk = tr.jacobian.back();
    if (Jk <= 0.0) {
      if (k == 1) throw ResolutionError("conjugate point before the first output time");
      const double Jp = tr.jacobian[k - 1];
      tr.cut = CutReason::Conjugate;
      tr.i_y = tr.t[k - 1] + h * Jp / (Jp - Jk);
      break;
    }
  }
  try {
    LaplacianSamples lap = laplacian_distance(tr);
    if (!lap.t.empty()) {
      tr.window_begin = static_cast<int>(std::lround(lap.t.front() / h));
      tr.window_end = tr.window_begin + static_cast<int>(lap.t.size());
      tr.delta_rho = std::move(lap.value);
      tr.delta_rho_error = std::move(lap.error);
    }
  } catch (const ResolutionError&) {
    // Too few samples before the cut for the stencil; Delta rho stays empty.
  }
  return tr;
}

namespace {

/// Fourth-order first derivative at index k of f with spacing h and stride s,
/// using a centred stencil if it fits in [lo, hi) and a one-sided one otherwise.
/// Returns false if no five-point stencil fits.
bool fd4(const std::vector<double>& f, int k, int lo, int hi, double h, int s, double& out) {
  auto at = [&](int j) { return f[k + j * s]; };
  const double H = 12.0 * h * s;
  if (k - 2 * s >= lo && k + 2 * s < hi) {
    out = (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / H;
    return true;
  }
  if (k - s >= lo && k + 3 * s < hi) {
    out = (-3.0 * at(-1) - 10.0 * at(0) + 18.0 * at(1) - 6.0 * at(2) + at(3)) / H;
    return true;
  }
  if (k >= lo && k + 4 * s < hi) {
    out = (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) / H;
    return true;
  }
  if (k + s < hi && k - 3 * s >= lo) {
    out = (3.0 * at(1) + 10.0 * at(0) - 18.0 * at(-1) + 6.0 * at(-2) - at(-3)) / H;
    return true;
  }
  if (k < hi && k - 4 * s >= lo) {
    out = (25.0 * at(0) - 48.0 * at(-1) + 36.0 * at(-2) - 16.0 * at(-3) + 3.0 * at(-4)) / H;
    return true;
  }
  return false;
}

/// Second-order estimate used when no stride-2 stencil fits.
double fd2(const std::vector<double>& f, int k, int lo, int hi, double h) {
  if (k - 1 >= lo && k + 1 < hi) return (f[k + 1] - f[k - 1]) / (2.0 * h);
  if (k + 2 < hi) return (-3.0 * f[k] + 4.0 * f[k + 1] - f[k + 2]) / (2.0 * h);
  return (3.0 * f[k] - 4.0 * f[k - 1] + f[k - 2]) / (2.0 * h);
}

}  // namespace

LaplacianSamples laplacian_distance(const GeodesicTrace& trace) {
  const int total = static_cast<int>(trace.t.size());
  int lo = trace.eta.size() > 1 && trace.eta[0] > 0.0 && trace.p.size() == 1 ? 0 : 1;
  int hi = 0;
  for (int k = 0; k < total; ++k)
    if (trace.t[k] < trace.i_y || trace.cut != CutReason::Conjugate) hi = k + 1;
  if (hi - lo < 5) throw ResolutionError("laplacian_distance: fewer than five samples before the cut");
  std::vector<double> lneta(total, 0.0);
  for (int k = lo; k < hi; ++k) {
    if (!(trace.eta[k] > 0.0)) throw PastCutError("laplacian_distance: eta <= 0 inside the window");
    lneta[k] = std::log(trace.eta[k]);
  }
  const double h = trace.step;
  LaplacianSamples out;
  for (int k = lo; k < hi; ++k) {
    double d1 = 0.0, d2 = 0.0;
    fd4(lneta, k, lo, hi, h, 1, d1);
    if (!fd4(lneta, k, lo, hi, h, 2, d2)) d2 = fd2(lneta, k, lo, hi, h);
    out.t.push_back(trace.t[k]);
    out.value.push_back(d1);
    out.error.push_back(std::abs(d1 - d2));
  }
  return out;
}

void write_trace_csv(std::ostream& os, const GeodesicTrace& trace) {
  const int n = static_cast<int>(trace.p.size());
  os << "t";
  for (int i = 0; i < n; ++i) os << ",x" << i;
  os << ",eta,delta_rho\n";
  os.precision(17);
  for (std::size_t k = 0; k < trace.t.size(); ++k) {
    os << trace.t[k];
    for (int i = 0; i < n; ++i) os << ',' << trace.x[k][i];
    os << ',' << trace.eta[k] << ',';
    const int j = static_cast<int>(k) - trace.window_begin;
    if (j >= 0 && j < static_cast<int>(trace.delta_rho.size())) os << trace.delta_rho[j];
    os << '\n';
  }
}

DirectionSet direction_set(int n, int count) {
  DirectionSet d;
  if (n == 1) {
    d.u = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
    d.w = {1.0, 1.0};
    return d;
  }
  if (n == 2) {
    if (count <= 0) count = 128;
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * k / count;
      Vec u(2);
      u << std::cos(th), std::sin(th);
      d.u.push_back(u);
      d.w.push_back(2.0 * std::numbers::pi / count);
    }
    return d;
  }
  if (n != 3) throw ParameterError("direction_set: dimension must be 1, 2 or 3");
  if (count <= 0) count = 288;
  const int q = std::max(2, static_cast<int>(std::lround(std::sqrt(count / 2.0))));
  const QuadratureRule gl = gauss_legendre(q);
  const int nphi = 2 * q;
  for (int a = 0; a < q; ++a) {
    const double z = gl.nodes[a], rho = std::sqrt(1.0 - z * z);
    for (int b = 0; b < nphi; ++b) {
      const double ph = 2.0 * std::numbers::pi * b / nphi;
      Vec u(3);
      u << rho * std::cos(ph), rho * std::sin(ph), z;
      d.u.push_back(u);
      d.w.push_back(gl.weights[a] * 2.0 * std::numbers::pi / nphi);
    }
  }
  return d;
}

double SphereProfile::sphere_at(double t) const {
  if (t < 0.0 || t > this->t.back() * (1.0 + 1e-12)) throw ParameterError("sphere_at: t outside the profile");
  const int M = static_cast<int>(this->t.size()) - 1;
  int k = std::min(M - 1, static_cast<int>(std::floor(t / step)));
  if (M < 2) return sphere[0] + (sphere[M] - sphere[0]) * t / this->t.back();
  int c = std::clamp(k, 1, M - 1);
  const double s = (t - this->t[c]) / step;
  return sphere[c - 1] * s * (s - 1.0) / 2.0 + sphere[c] * (1.0 - s * s) + sphere[c + 1] * s * (s + 1.0) / 2.0;
}

double SphereProfile::ball_at(double r) const {
  if (r < 0.0 || r > t.back() * (1.0 + 1e-12)) throw ParameterError("ball_at: r outside the profile");
  const int M = static_cast<int>(t.size()) - 1;
  const int k = std::min(M, static_cast<int>(std::floor(r / step + 1e-9)));
  const double s = r / step - k;
  if (s <= 1e-12 || M < 2) {
    if (M < 2 && s > 1e-12) return cumulative[k] + 0.5 * step * s * (2.0 * sphere[k] + s * (sphere[k + 1] - sphere[k]));
    return cumulative[k];
  }
  // Quadratic through k-1, k, k+1 (or k, k+1, k+2 at the start), integrated over [t_k, r].
  const double s2 = s * s, s3 = s2 * s;
  if (k >= 1 && k + 1 <= M) {
    return cumulative[k] + step * (sphere[k - 1] * (s3 / 3.0 - s2 / 2.0) / 2.0 + sphere[k] * (s - s3 / 3.0) +
                                   sphere[k + 1] * (s3 / 3.0 + s2 / 2.0) / 2.0);
  }
  return cumulative[k] + step * (sphere[k] * (s3 / 3.0 - 1.5 * s2 + 2.0 * s) / 2.0 - sphere[k + 1] * (s3 / 3.0 - s2) +
                                 sphere[k + 2] * (s3 / 3.0 - s2 / 2.0) / 2.0);
}

SphereProfile sphere_profile(const MetricInstance& m, const MeasureSpec& mu, const Vec& p, double R,
                             const VolumeOptions& opts) {
  if (!(R > 0.0)) throw ParameterError("sphere_profile: radius must be positive");
  const int n = m.dim();
  const DirectionSet dirs = direction_set(n, opts.directions);
  const int D = static_cast<int>(dirs.u.size());
  SphereProfile prof;
  prof.step = fit_step(R, opts.step);
  const int M = static_cast<int>(std::lround(R / prof.step));
  prof.directions = D;
  prof.sigma_p = mu.sigma(m, p);
  prof.phi_p = prof.sigma_p / bh_density(m, p, mu.quad_order());
  std::vector<std::vector<double>> contrib(D);
  std::vector<CutReason> cuts(D);
  std::vector<double> drift(D, 0.0);
  std::vector<std::exception_ptr> errors(D);
#pragma omp parallel for schedule(dynamic, 1) if (opts.parallel)
  for (int d = 0; d < D; ++d) {
    try {
      const GeodesicTrace tr = jacobi_determinant(m, mu, p, dirs.u[d], R, prof.step);
      const double r = 1.0 / m.F(p, dirs.u[d]);
      const double scale = dirs.w[d] * prof.sigma_p * std::pow(r, n);
      contrib[d].assign(M + 1, 0.0);
      for (std::size_t k = 0; k < tr.t.size() && static_cast<int>(k) <= M; ++k)
        contrib[d][k] = scale * tr.eta_tilde(static_cast<int>(k));
      cuts[d] = tr.cut;
      drift[d] = tr.speed_drift;
    } catch (...) {
      errors[d] = std::current_exception();
    }
  }
  for (int d = 0; d < D; ++d)
    if (errors[d]) std::rethrow_exception(errors[d]);
  prof.t.resize(M + 1);
  prof.sphere.assign(M + 1, 0.0);
  for (int k = 0; k <= M; ++k) prof.t[k] = k * prof.step;
  for (int d = 0; d < D; ++d) {
    for (int k = 0; k <= M; ++k) prof.sphere[k] += contrib[d][k];
    if (cuts[d] == CutReason::Conjugate) ++prof.conjugate_cuts;
    if (cuts[d] == CutReason::ChartExit) ++prof.chart_exits;
    prof.max_speed_drift = std::max(prof.max_speed_drift, drift[d]);
  }
  const double h = prof.step;
  const auto& f = prof.sphere;
  prof.cumulative.assign(M + 1, 0.0);
  if (M == 1) prof.cumulative[1] = 0.5 * h * (f[0] + f[1]);
  if (M >= 2) prof.cumulative[1] = h * (5.0 * f[0] + 8.0 * f[1] - f[2]) / 12.0;
  for (int k = 2; k <= M; ++k) prof.cumulative[k] = prof.cumulative[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
  return prof;
}

double sphere_volume(const MetricInstance& m, const MeasureSpec& mu, const Vec& p, double t,
                     const VolumeOptions& opts) {
  return sphere_profile(m, mu, p, t, opts).sphere.back();
}

double ball_volume(const MetricInstance& m, const MeasureSpec& mu, const Vec& p, double r,
                   const VolumeOptions& opts) {
  if (r == 0.0) return 0.0;
  return sphere_profile(m, mu, p, r, opts).cumulative.back();
}

double annulus_volume(const MetricInstance& m, const MeasureSpec& mu, const Vec& p, double rho_o, double R,
                      const VolumeOptions& opts) {
  if (!(rho_o >= 0.0 && rho_o < R)) throw ParameterError("annulus_volume: need 0 <= rho_o < R");
  SphereProfile prof = sphere_profile(m, mu, p, R, opts);
  return prof.cumulative.back() - prof.ball_at(rho_o);
}

BallVolumeReport ball_volume_report(const MetricInstance& m, const MeasureSpec& mu, const Vec& p,
                                    const std::vector<double>& radii, double rho_o, const VolumeOptions& opts) {
  if (radii.empty()) throw ParameterError("ball_volume_report: no radii");
  double R = 0.0;
  for (double r : radii) {
    if (!(r > 0.0)) throw ParameterError("ball_volume_report: radii must be positive");
    R = std::max(R, r);
  }
  if (!(rho_o >= 0.0 && rho_o < R)) throw ParameterError("ball_volume_report: need 0 <= rho_o < max radius");
  SphereProfile prof = sphere_profile(m, mu, p, R, opts);
  BallVolumeReport rep;
  rep.p = p;
  rep.radii = radii;
  rep.rho_o = rho_o;
  rep.directions = prof.directions;
  rep.step = prof.step;
  rep.conjugate_cuts = prof.conjugate_cuts;
  rep.chart_exits = prof.chart_exits;
  const double inner = prof.ball_at(rho_o);
  for (double r : radii) {
    rep.ball.push_back(prof.ball_at(r));
    rep.sphere.push_back(prof.sphere_at(r));
    rep.annulus.push_back(rep.ball.back() - inner);
  }
  return rep;
}

}  // namespace finsler
