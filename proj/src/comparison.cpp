#include "finsler/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>
#include <sstream>

#include "finsler/jets.hpp"

namespace finsler {

namespace {

constexpr double kPi = std::numbers::pi;

void require_s_domain(double c, double t, const char* what) {
  if (!(t > 0.0) || (c > 0.0 && !(t < kPi / std::sqrt(c)))) {
    std::ostringstream os;
    os << what << ": t = " << t << " outside the positivity domain for c = " << c;
    throw DomainError(os.str());
  }
}

// Unchecked versions; valid on the closed domain (t = 0 gives s = 0).
double s_raw(double c, double t) { return s_c_generic(c, t); }

double ct_raw(double c, double t) {
  if (c > 0.0) return std::sqrt(c) / std::tan(std::sqrt(c) * t);
  if (c < 0.0) return std::sqrt(-c) / std::tanh(std::sqrt(-c) * t);
  return 1.0 / t;
}

double power_exponent(const ChiFamily& f) {
  switch (f.kind) {
    case ChiFamily::Kind::SinPower:
      return f.n - 1.0;
    case ChiFamily::Kind::DistortionPower:
      return f.n + 4.0 * f.k - 1.0;
    case ChiFamily::Kind::NPower:
      return f.N - 1.0;
    case ChiFamily::Kind::LogConcaveExp:
      break;
  }
  return 0.0;
}

double chi_raw(const ChiFamily& f, double t) {
  if (f.kind == ChiFamily::Kind::LogConcaveExp) {
    const double u = t - f.rho_o;
    return std::exp(f.m_o * u - 0.5 * f.K * u * u);
  }
  const double c = f.kind == ChiFamily::Kind::NPower ? f.K : f.c;
  const double s = std::max(s_raw(c, t), 0.0);
  double v = std::pow(s, power_exponent(f));
  if (f.kind == ChiFamily::Kind::SinPower) v *= std::exp(f.delta * t);
  return v;
}

void require_chi_domain(const ChiFamily& f, double t, const char* what) {
  if (!(t > f.rho_lo() && t < f.t_hi())) {
    std::ostringstream os;
    os << what << ": t = " << t << " outside (" << f.rho_lo() << ", " << f.t_hi() << ") for " << f.name();
    throw DomainError(os.str());
  }
}

}  // namespace

double s_c(double c, double t) {
  require_s_domain(c, t, "s_c");
  return s_raw(c, t);
}

double s_c_prime(double c, double t) {
  require_s_domain(c, t, "s_c'");
  if (c > 0.0) return std::cos(std::sqrt(c) * t);
  if (c < 0.0) return std::cosh(std::sqrt(-c) * t);
  return 1.0;
}

double ct_c(double c, double t) {
  require_s_domain(c, t, "ct_c");
  return ct_raw(c, t);
}

ChiFamily ChiFamily::sin_power(double c, double n, double delta, bool weighted) {
  if (n < 1.0 || delta < 0.0) throw ParameterError("sin-power: need n >= 1 and delta >= 0");
  ChiFamily f;
  f.kind = Kind::SinPower;
  f.c = c;
  f.n = n;
  f.delta = delta;
  f.weighted = weighted;
  return f;
}

ChiFamily ChiFamily::distortion_power(double c, double n, double k) {
  if (n < 1.0 || k < 0.0) throw ParameterError("distortion-power: need n >= 1 and k >= 0");
  ChiFamily f;
  f.kind = Kind::DistortionPower;
  f.c = c;
  f.n = n;
  f.k = k;
  return f;
}

ChiFamily ChiFamily::n_power(double K, double N) {
  if (!(N >= 1.0)) throw ParameterError("n-power: need N >= 1");
  ChiFamily f;
  f.kind = Kind::NPower;
  f.K = K;
  f.N = N;
  return f;
}

ChiFamily ChiFamily::log_concave_exp(double m_o, double K, double rho_o) {
  if (rho_o < 0.0) throw ParameterError("log-concave-exp: rho_o must be >= 0");
  ChiFamily f;
  f.kind = Kind::LogConcaveExp;
  f.m_o = m_o;
  f.K = K;
  f.rho_o = rho_o;
  return f;
}

double ChiFamily::rho_lo() const { return kind == Kind::LogConcaveExp ? rho_o : 0.0; }

double ChiFamily::t_hi() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind) {
    case Kind::SinPower:
      if (c <= 0.0) return inf;
      return (weighted ? 0.5 : 1.0) * kPi / std::sqrt(c);
    case Kind::DistortionPower:
      return c > 0.0 ? 0.25 * kPi / std::sqrt(c) : inf;
    case Kind::NPower:
      return K > 0.0 ? kPi / std::sqrt(K) : inf;
    case Kind::LogConcaveExp:
      return inf;
  }
  return inf;
}

const char* to_string(ChiFamily::Kind k) {
  switch (k) {
    case ChiFamily::Kind::SinPower:
      return "sin-power";
    case ChiFamily::Kind::DistortionPower:
      return "distortion-power";
    case ChiFamily::Kind::NPower:
      return "n-power";
    case ChiFamily::Kind::LogConcaveExp:
      return "log-concave-exp";
  }
  return "?";
}

std::string ChiFamily::name() const {
  std::ostringstream os;
  os << to_string(kind) << '(';
  switch (kind) {
    case Kind::SinPower:
      os << "c=" << c << ", n=" << n << ", delta=" << delta << (weighted ? ", weighted" : "");
      break;
    case Kind::DistortionPower:
      os << "c=" << c << ", n=" << n << ", k=" << k;
      break;
    case Kind::NPower:
      os << "K=" << K << ", N=" << N;
      break;
    case Kind::LogConcaveExp:
      os << "m_o=" << m_o << ", K=" << K << ", rho_o=" << rho_o;
      break;
  }
  os << ')';
  return os.str();
}

bool ChiFamily::small_ball_normalized(int dim) const {
  if (rho_lo() != 0.0) return false;
  switch (kind) {
    case Kind::SinPower:
      return n == dim;
    case Kind::DistortionPower:
      return n + 4.0 * k == dim;
    case Kind::NPower:
      return N == dim;
    case Kind::LogConcaveExp:
      return false;
  }
  return false;
}

double chi_eval(const ChiFamily& fam, double t) {
  require_chi_domain(fam, t, "chi_eval");
  return chi_raw(fam, t);
}

double chi_log_derivative(const ChiFamily& fam, double t) {
  require_chi_domain(fam, t, "chi_log_derivative");
  switch (fam.kind) {
    case ChiFamily::Kind::SinPower:
      return (fam.n - 1.0) * ct_raw(fam.c, t) + fam.delta;
    case ChiFamily::Kind::DistortionPower:
      return power_exponent(fam) * ct_raw(fam.c, t);
    case ChiFamily::Kind::NPower:
      return power_exponent(fam) * ct_raw(fam.K, t);
    case ChiFamily::Kind::LogConcaveExp:
      return fam.m_o - fam.K * (t - fam.rho_o);
  }
  return 0.0;
}

IntegralEstimate chi_integral(const ChiFamily& fam, double a, double b) {
  const double lo = fam.rho_lo(), hi = fam.t_hi();
  if (a < lo || b < a || b > hi || !std::isfinite(b)) {
    std::ostringstream os;
    os << "chi_integral: [" << a << ", " << b << "] outside [" << lo << ", " << hi << "]";
    throw DomainError(os.str());
  }
  b = std::min(b, hi - 1e-9);
  a = std::min(a, b);
  return adaptive_simpson([&](double t) { return chi_raw(fam, t); }, a, b, 1e-10);
}

HypothesisStatus check_hypothesis(const ChiFamily& fam, const RicciBound& cert, double tol) {
  HypothesisStatus h;
  std::ostringstream req;
  double margin = 0.0;
  switch (fam.kind) {
    case ChiFamily::Kind::SinPower: {
      const double need = (fam.n - 1.0) * fam.c;
      const double have = fam.weighted ? cert.inf_ric_inf : cert.inf_ric;
      req << (fam.weighted ? "Ric^inf" : "Ric") << " >= " << need << " and S >= " << -fam.delta;
      margin = std::min(have - need, cert.s_min + fam.delta);
      break;
    }
    case ChiFamily::Kind::DistortionPower: {
      const double need = (fam.n - 1.0) * fam.c;
      req << "Ric^inf >= " << need << " and |tau| <= " << fam.k;
      margin = std::min(cert.inf_ric_inf - need, fam.k - cert.tau_abs_max);
      break;
    }
    case ChiFamily::Kind::NPower: {
      const double need = (fam.N - 1.0) * fam.K;
      req << "Ric^N >= " << need << " with N = " << fam.N;
      if (cert.N != fam.N) {
        req << " (certificate computed for N = " << cert.N << ")";
        h.requirement = req.str();
        return h;
      }
      margin = cert.inf_ric_N - need;
      break;
    }
    case ChiFamily::Kind::LogConcaveExp:
      req << "Ric^inf >= " << fam.K;
      margin = cert.inf_ric_inf - fam.K;
      break;
  }
  h.requirement = req.str();
  h.margin = margin;
  h.certified = cert.samples > 0 && margin >= -tol;
  return h;
}

namespace {

struct DirectionTrace {
  GeodesicTrace trace;
  bool ok = false;
  std::exception_ptr error;
};

// Delta rho at time t by quadratic interpolation on the Laplacian window.
bool delta_rho_at(const GeodesicTrace& tr, double t, double& out) {
  const int w = static_cast<int>(tr.delta_rho.size());
  if (w < 3) return false;
  const double h = tr.step;
  const double pos = t / h - tr.window_begin;
  if (pos < 0.0 || pos > w - 1) return false;
  int j = std::clamp(static_cast<int>(std::lround(pos)), 1, w - 2);
  const double s = pos - j;
  const double fm = tr.delta_rho[j - 1], f0 = tr.delta_rho[j], fp = tr.delta_rho[j + 1];
  out = f0 + 0.5 * s * (fp - fm) + 0.5 * s * s * (fp - 2.0 * f0 + fm);
  return true;
}

}  // namespace

LaplacianComparisonReport laplacian_comparison_check(const MetricInstance& m, const MeasureSpec& mu,
                                                     const Vec& p, const ChiFamily& fam,
                                                     const RicciBound* certificate,
                                                     const LaplacianComparisonOptions& opts) {
  if (certificate == nullptr) throw ConfigurationError("laplacian comparison: hypothesis certificate missing");
  if (p.size() != m.dim()) throw ParameterError("laplacian comparison: base point has wrong dimension");
  LaplacianComparisonReport rep;
  rep.family = fam;
  rep.hypothesis = check_hypothesis(fam, *certificate);
  rep.tol = opts.tol;

  double T = opts.horizon;
  if (std::isfinite(fam.t_hi())) {
    const double cap = fam.t_hi() - 1e-6;
    T = T > 0.0 ? std::min(T, cap) : cap;
  } else if (!(T > 0.0)) {
    throw ParameterError("laplacian comparison: horizon required when the family domain is unbounded");
  }
  const double lo = std::max(fam.rho_lo(), opts.min_rho);
  if (!(T > lo)) throw ParameterError("laplacian comparison: horizon does not exceed the lower radius");

  const DirectionSet dirs = direction_set(m.dim(), opts.directions);
  const int nd = static_cast<int>(dirs.u.size());
  std::vector<DirectionTrace> traces(nd);
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
  for (int d = 0; d < nd; ++d) {
    try {
      traces[d].trace = jacobi_determinant(m, mu, p, dirs.u[d], T, opts.step);
      traces[d].ok = true;
    } catch (...) {
      traces[d].error = std::current_exception();
    }
  }
  for (const auto& dt : traces)
    if (dt.error) std::rethrow_exception(dt.error);

  if (fam.kind == ChiFamily::Kind::LogConcaveExp) {
    double m_o = -std::numeric_limits<double>::infinity();
    for (const auto& dt : traces) {
      double v = 0.0;
      if (!delta_rho_at(dt.trace, fam.rho_o, v))
        throw ResolutionError("laplacian comparison: a geodesic does not reach rho_o smoothly");
      m_o = std::max(m_o, v);
    }
    rep.family.m_o = m_o;
  }

  rep.geodesics = nd;
  for (int d = 0; d < nd; ++d) {
    const GeodesicTrace& tr = traces[d].trace;
    if (tr.cut == CutReason::ChartExit) ++rep.chart_exits;
    if (tr.cut == CutReason::Conjugate) {
      ++rep.conjugate_cuts;
      const long expected = std::lround(T / tr.step) + 1;
      rep.past_cut_skipped += static_cast<int>(expected - tr.window_end);
    }
    for (int j = 0; j < static_cast<int>(tr.delta_rho.size()); ++j) {
      const int k = tr.window_begin + j;
      const double t = tr.t[k];
      if (t < lo || t <= fam.rho_lo() || t >= fam.t_hi()) continue;
      const double bound = chi_log_derivative(rep.family, t);
      const double margin = bound - tr.delta_rho[j];
      const double err = tr.delta_rho_error[j];
      const double slack = margin + opts.tol + err;
      ++rep.samples;
      rep.max_abs_gap = std::max(rep.max_abs_gap, std::abs(margin));
      rep.max_fd_error = std::max(rep.max_fd_error, err);
      rep.worst_margin = std::min(rep.worst_margin, margin);
      if (slack < rep.worst_slack) {
        rep.worst_slack = slack;
        rep.worst_t = t;
        rep.worst_x = tr.x[k];
        rep.worst_direction = tr.y;
      }
    }
  }
  rep.passed = rep.samples > 0 && rep.worst_slack >= 0.0;
  return rep;
}

BishopGromovReport bishop_gromov_check(const MetricInstance& m, const MeasureSpec& mu, const Vec& p,
                                       const ChiFamily& fam, double rho_o, const std::vector<double>& radii,
                                       const LaplacianComparisonReport* precondition,
                                       const BishopGromovOptions& opts) {
  if (precondition == nullptr)
    throw ConfigurationError("bishop-gromov: laplacian comparison precondition missing");
  if (radii.empty()) throw ParameterError("bishop-gromov: empty radius grid");
  if (rho_o < fam.rho_lo()) throw ParameterError("bishop-gromov: rho_o below the family domain");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > rho_o) || !(radii[k] < fam.t_hi()) || (k > 0 && !(radii[k] > radii[k - 1])))
      throw ParameterError("bishop-gromov: radii must increase inside (rho_o, t_hi)");
  }
  BishopGromovReport rep;
  rep.family = fam;
  rep.rho_o = rho_o;
  rep.radii = radii;
  rep.tol = opts.tol;
  rep.precondition_passed = precondition->passed && precondition->hypothesis.certified;

  const BallVolumeReport vol = ball_volume_report(m, mu, p, radii, rho_o, opts.volume);
  rep.annulus = vol.annulus;
  rep.directions = vol.directions;
  rep.step = vol.step;
  rep.conjugate_cuts = vol.conjugate_cuts;
  rep.chart_exits = vol.chart_exits;

  const std::size_t R = radii.size();
  for (std::size_t k = 0; k < R; ++k) {
    IntegralEstimate I = chi_integral(fam, rho_o, radii[k]);
    rep.quadrature_error += I.error;
    rep.chi_integral.push_back(I.value);
    rep.ratio.push_back(rep.annulus[k] / I.value);
  }
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = i + 1; j < R; ++j)
      rep.worst_increase = std::max(rep.worst_increase, rep.ratio[j] / rep.ratio[i] - 1.0);
  if (R == 1) rep.worst_increase = 0.0;
  rep.monotone = rep.worst_increase <= opts.tol;

  rep.absolute_applicable = rho_o == 0.0 && fam.small_ball_normalized(m.dim());
  rep.phi_p = phi_factor(m, mu, p);
  if (rep.absolute_applicable) {
    const double scale = rep.phi_p * unit_sphere_area(m.dim());
    // Pairs r < R from the grid, with r = 0 included.
    for (std::size_t j = 0; j < R; ++j) {
      for (std::size_t i = 0; i <= j; ++i) {
        const double inner_vol = i == 0 ? 0.0 : vol.ball[i - 1];
        const double inner_int = i == 0 ? 0.0 : rep.chi_integral[i - 1];
        const double rel = (vol.ball[j] - inner_vol) / (scale * (rep.chi_integral[j] - inner_int)) - 1.0;
        rep.absolute_worst = std::max(rep.absolute_worst, rel);
        rep.absolute_gap = std::max(rep.absolute_gap, std::abs(rel));
      }
    }
    rep.absolute_ok = rep.absolute_worst <= opts.tol;
  }
  rep.passed = rep.monotone && rep.absolute_ok;
  return rep;
}

void write_ratio_csv(std::ostream& os, const BishopGromovReport& r) {
  os << "r,annulus,chi_integral,ratio\n";
  os.precision(17);
  for (std::size_t k = 0; k < r.radii.size(); ++k)
    os << r.radii[k] << ',' << r.annulus[k] << ',' << r.chi_integral[k] << ',' << r.ratio[k] << '\n';
}

namespace {

void require_bound_inputs(int n, double K, double delta, const char* what) {
  if (n < 2 || !(K > 0.0) || !(delta >= 0.0)) {
    std::ostringstream os;
    os << what << ": need n >= 2, K > 0, delta >= 0";
    throw ParameterError(os.str());
  }
}

// Integrals of sin^{n-1}(s) e^{beta s} over [0, pi/4] and [pi/4, pi/2].
std::pair<IntegralEstimate, IntegralEstimate> small_ball_integrals(int n, double beta) {
  auto g = [n, beta](double s) { return std::pow(std::sin(s), n - 1) * std::exp(beta * s); };
  return {adaptive_simpson(g, 0.0, 0.25 * kPi), adaptive_simpson(g, 0.25 * kPi, 0.5 * kPi)};
}

}  // namespace

double volume_bound_radius(int n, double K) { return 0.5 * kPi * std::sqrt((n - 1) / K); }

VolumeBound total_volume_bound(int n, double K, double delta, double phi_p) {
  require_bound_inputs(n, K, delta, "volume bound");
  const double a = delta / std::sqrt(K);
  const double sq = std::sqrt(n - 1.0);
  auto [I1, I2] = small_ball_integrals(n, a * sq);
  // int_0^X e^{s - K_o s^2/2} ds is proportional to
  // erf((K_o X - 1)/sqrt(2 K_o)) + erf(1/sqrt(2 K_o)); only the ratio is needed.
  const double Ko = 1.0 / ((sq + a) * (sq + a));
  const double h = 0.25 * kPi * sq * (sq + a);
  const double r2 = std::sqrt(2.0 * Ko);
  const double e0 = std::erf(1.0 / r2);
  const double ratio = (1.0 + e0) / (std::erf((Ko * h - 1.0) / r2) + e0);

  VolumeBound b;
  b.n = n;
  b.K = K;
  b.delta = delta;
  b.phi_p = phi_p;
  const double pre = unit_sphere_area(n) * std::pow(n - 1.0, 0.5 * n);
  b.constant = pre * (I1.value + I2.value * ratio);
  b.quadrature_error = pre * (I1.error + I2.error * ratio);
  b.value = phi_p * std::pow(K, -0.5 * n) * b.constant;
  b.quadrature_error *= phi_p * std::pow(K, -0.5 * n);
  return b;
}

namespace {

template <class T>
T f_K_delta_t(int n, double K, double delta, const T& N) {
  return kPi * sqrt((N - 1.0) * (N - n) / (K * (N - n) - delta * delta));
}

}  // namespace

double f_K_delta(int n, double K, double delta, double N) {
  require_bound_inputs(n, K, delta, "f_K_delta");
  if (!(N > n + delta * delta / K)) throw DomainError("f_K_delta: N must exceed n + delta^2/K");
  return f_K_delta_t(n, K, delta, N);
}

BonnetMyersReport bonnet_myers(int n, double K, double delta) {
  require_bound_inputs(n, K, delta, "bonnet-myers");
  BonnetMyersReport r;
  r.n = n;
  r.K = K;
  r.delta = delta;
  const double a = delta / std::sqrt(K);
  r.gamma = a + std::sqrt(a * a + n - 1.0);
  r.diameter_bound = kPi * r.gamma / std::sqrt(K);
  r.N_star = n + a * r.gamma;
  r.H = K / (r.gamma * r.gamma);

  // Numerical minimization of f over (lo, inf): expand a bracket until f
  // increases, golden-section down to 1e-6, then bisect on the sign of f'.
  const double lo = n + delta * delta / K;
  auto f = [&](double N) { return f_K_delta_t(n, K, delta, N); };
  auto df = [&](double N) {
    using J = Jet1<double, 1>;
    return f_K_delta_t(n, K, delta, J::variable(N, 0)).d[0];
  };
  double hi = lo + 1.0;
  while (df(hi) < 0.0) hi = lo + 2.0 * (hi - lo);
  r.bracket_lo = lo;
  r.bracket_hi = hi;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double A = lo, B = hi;
  double c = B - phi * (B - A), d = A + phi * (B - A);
  double fc = f(c), fd = f(d);
  while (B - A > 1e-6 * (1.0 + std::abs(B))) {
    ++r.golden_iterations;
    if (fc < fd) {
      B = d;
      d = c;
      fd = fc;
      c = B - phi * (B - A);
      fc = f(c);
    } else {
      A = c;
      c = d;
      fc = fd;
      d = A + phi * (B - A);
      fd = f(d);
    }
  }
  if (A <= lo || !(df(A) < 0.0)) A = lo;
  if (!(df(B) > 0.0)) B = hi;
  while (B - A > 1e-15 * std::max(1.0, std::abs(B)) && r.bisection_iterations < 200) {
    ++r.bisection_iterations;
    const double mid = 0.5 * (A + B);
    if (mid <= A || mid >= B) break;
    if (df(mid) > 0.0)
      B = mid;
    else
      A = mid;
  }
  r.numeric_argmin = 0.5 * (A + B);
  r.numeric_min = f(std::max(r.numeric_argmin, std::nextafter(lo, hi)));

  // Volume constant: small-ball pieces from the Ric^inf/S bound, the rest from
  // the Ric^N >= (N-1)H comparison with chi = s_H^{N-1}, in the variable
  // s = sqrt(H) t.
  const double sq = std::sqrt(n - 1.0);
  auto [I1, I2] = small_ball_integrals(n, a * sq);
  const double hh = 0.25 * kPi * sq / r.gamma;
  auto sn = [e = r.N_star - 1.0](double s) { return std::pow(std::max(std::sin(s), 0.0), e); };
  IntegralEstimate J1 = adaptive_simpson(sn, hh, 2.0 * hh);
  IntegralEstimate J2 = adaptive_simpson(sn, hh, kPi);
  const double pre = unit_sphere_area(n) * std::pow(n - 1.0, 0.5 * n);
  r.volume_constant = pre * (I1.value + I2.value * J2.value / J1.value);
  r.volume_quadrature_error = pre * (I1.error + I2.error * J2.value / J1.value +
                                     I2.value * (J2.error / J1.value + J2.value * J1.error / (J1.value * J1.value)));
  return r;
}

}  // namespace finsler
