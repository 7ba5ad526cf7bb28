#include "finsler/analysis.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "finsler/errors.hpp"

namespace finsler {

namespace {

inline double sector_weight(double s, double af, double bf) {
  if (s > 0.0) return af * af;
  if (s < 0.0) return bf * bf;
  return 0.5 * (af * af + bf * bf);
}

inline double dual_speed(double s, double af, double bf) {
  if (s > 0.0) return s / af;
  if (s < 0.0) return -s / bf;
  return 0.0;
}

// Faces adjacent to node j; -1 where a reflecting end has none.
inline int face_left(const Grid1D& G, int j) {
  if (j > 0) return j - 1;
  return G.periodic ? G.M - 1 : -1;
}
inline int face_right(const Grid1D& G, int j) {
  if (j < G.M - 1) return j;
  return G.periodic ? G.M - 1 : -1;
}

void check_size(const Grid1D& G, const std::vector<double>& f, const char* what) {
  if (static_cast<int>(f.size()) != G.M) {
    std::ostringstream os;
    os << what << ": expected " << G.M << " node values, got " << f.size();
    throw ParameterError(os.str());
  }
}

void check_face_size(const Grid1D& G, const std::vector<double>& V, const char* what) {
  if (static_cast<int>(V.size()) != G.faces()) {
    std::ostringstream os;
    os << what << ": expected " << G.faces() << " face values, got " << V.size();
    throw ParameterError(os.str());
  }
}

void slopes_into(const Grid1D& G, const std::vector<double>& u, std::vector<double>& s) {
  const int F = G.faces();
  s.resize(F);
  for (int f = 0; f < F; ++f) s[f] = (u[G.right(f)] - u[f]) / G.h;
}

void weights_into(const Grid1D& G, const std::vector<double>& s, std::vector<double>& W) {
  W.resize(s.size());
  for (std::size_t f = 0; f < s.size(); ++f) W[f] = sector_weight(s[f], G.af[f], G.bf[f]);
}

// Node divergence of a face flux Q given on the wf scale: (Q_right - Q_left) / (h w_j).
void divergence_into(const Grid1D& G, const std::vector<double>& Q, std::vector<double>& out, bool parallel) {
  out.resize(G.M);
  const int M = G.M;
#pragma omp parallel for schedule(static) if (parallel)
  for (int j = 0; j < M; ++j) {
    const int fl = face_left(G, j), fr = face_right(G, j);
    const double qr = fr >= 0 ? Q[fr] : 0.0;
    const double ql = fl >= 0 ? Q[fl] : 0.0;
    out[j] = (qr - ql) / (G.h * G.w[j]);
  }
}

// (1 / (2 w_j)) sum over adjacent faces of wf * P_f.
void pair_into(const Grid1D& G, const std::vector<double>& P, std::vector<double>& out, bool parallel) {
  out.resize(G.M);
  const int M = G.M;
#pragma omp parallel for schedule(static) if (parallel)
  for (int j = 0; j < M; ++j) {
    const int fl = face_left(G, j), fr = face_right(G, j);
    double acc = 0.0;
    if (fl >= 0) acc += G.wf[fl] * P[fl];
    if (fr >= 0 && fr != fl) acc += G.wf[fr] * P[fr];
    out[j] = acc / (2.0 * G.w[j]);
  }
}

void node_speed_into(const Grid1D& G, const std::vector<double>& s, std::vector<double>& psi) {
  psi.resize(G.M);
  for (int j = 0; j < G.M; ++j) {
    const int fl = face_left(G, j), fr = face_right(G, j);
    double acc = 0.0;
    int cnt = 0;
    if (fl >= 0) acc += dual_speed(s[fl], G.af[fl], G.bf[fl]), ++cnt;
    if (fr >= 0) acc += dual_speed(s[fr], G.af[fr], G.bf[fr]), ++cnt;
    psi[j] = acc / cnt;
  }
}

bool sign_change_node(const Grid1D& G, const std::vector<double>& s, int j) {
  const int fl = face_left(G, j), fr = face_right(G, j);
  if (fl < 0 || fr < 0) return false;
  return s[fl] * s[fr] < 0.0;
}

double two_pass_variance(const std::vector<double>& w, const std::vector<double>& f, double* mean_out) {
  double m = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) m += w[j] * f[j];
  double v = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double d = f[j] - m;
    v += w[j] * d * d;
  }
  if (mean_out) *mean_out = m;
  return v;
}

// Scratch state for one heat step: every diagnostic at the current u.
struct HeatWork {
  std::vector<double> s, W, q, lap, psi, spsi, P, g;
  double energy = 0.0, lap_sq = 0.0, g_total = 0.0, g_sign = 0.0;

  void eval(const Grid1D& G, const std::vector<double>& u, bool parallel) {
    const int F = G.faces();
    s.resize(F);
    W.resize(F);
    q.resize(F);
#pragma omp parallel for schedule(static) if (parallel)
    for (int f = 0; f < F; ++f) {
      s[f] = (u[G.right(f)] - u[f]) / G.h;
      W[f] = sector_weight(s[f], G.af[f], G.bf[f]);
      q[f] = G.wf[f] * s[f] / W[f];
    }
    divergence_into(G, q, lap, parallel);
    node_speed_into(G, s, psi);
    slopes_into(G, psi, spsi);
    P.resize(F);
    for (int f = 0; f < F; ++f) P[f] = spsi[f] * spsi[f] / W[f];
    pair_into(G, P, g, parallel);

    energy = 0.0;
    for (int f = 0; f < F; ++f) energy += G.wf[f] * s[f] * s[f] / W[f];
    lap_sq = 0.0;
    g_total = 0.0;
    g_sign = 0.0;
    for (int j = 0; j < G.M; ++j) {
      lap_sq += G.w[j] * lap[j] * lap[j];
      g_total += G.w[j] * g[j];
      if (sign_change_node(G, s, j)) g_sign += G.w[j] * g[j];
    }
  }
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit least_squares(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  double st = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) st += t[i], sy += y[i];
  const double tm = st / n, ym = sy / n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (y[i] - ym);
  }
  LineFit r;
  r.slope = stt > 0.0 ? sty / stt : 0.0;
  r.intercept = ym - r.slope * tm;
  return r;
}

}  // namespace

void Grid1D::normalize() {
  double Z = 0.0;
  for (double v : w) Z += v;
  if (!(Z > 0.0)) throw ParameterError("Grid1D::normalize: total node weight is not positive");
  for (double& v : w) v /= Z;
  for (double& v : wf) v /= Z;
}

void Grid1D::validate() const {
  if (M < 3) throw ParameterError("Grid1D: need at least 3 nodes");
  if (static_cast<int>(x.size()) != M || static_cast<int>(a.size()) != M || static_cast<int>(b.size()) != M ||
      static_cast<int>(w.size()) != M)
    throw ParameterError("Grid1D: node field sizes do not match M");
  const int F = faces();
  if (static_cast<int>(xf.size()) != F || static_cast<int>(af.size()) != F || static_cast<int>(bf.size()) != F ||
      static_cast<int>(wf.size()) != F)
    throw ParameterError("Grid1D: face field sizes do not match the face count");
  double total = 0.0;
  for (int j = 0; j < M; ++j) {
    if (!(a[j] > 0.0) || !(b[j] > 0.0) || !(w[j] > 0.0)) {
      std::ostringstream os;
      os << "Grid1D: non-positive node coefficient at x = " << x[j];
      throw ParameterError(os.str());
    }
    total += w[j];
  }
  for (int f = 0; f < F; ++f) {
    if (!(af[f] > 0.0) || !(bf[f] > 0.0) || !(wf[f] > 0.0)) {
      std::ostringstream os;
      os << "Grid1D: non-positive face coefficient at x = " << xf[f];
      throw ParameterError(os.str());
    }
  }
  if (std::abs(total - 1.0) > 1e-12) throw ParameterError("Grid1D: node weights do not sum to 1");
}

Grid1D make_grid(const MetricInstance& m, const MeasureSpec& mu, int M, const GridSpec& spec) {
  if (m.dim() != 1) throw ParameterError("make_grid: metric must be one-dimensional");
  if (M < 3) throw ParameterError("make_grid: need at least 3 nodes");
  if (!(spec.hi > spec.lo)) throw ParameterError("make_grid: need lo < hi");
  if (spec.periodic && spec.face_weights == FaceWeights::DriftMatched)
    throw ParameterError("make_grid: drift-matched face weights need a reflecting interval");

  Grid1D G;
  G.M = M;
  G.periodic = spec.periodic;
  G.lo = spec.lo;
  G.hi = spec.hi;
  G.h = (spec.hi - spec.lo) / M;
  const double shift = spec.periodic ? 0.0 : 0.5;

  Vec xv(1), plus(1), minus(1);
  plus[0] = 1.0;
  minus[0] = -1.0;
  auto sample = [&](double x, double& a, double& b) {
    xv[0] = x;
    if (!m.chart().contains(xv)) {
      std::ostringstream os;
      os << "make_grid: x = " << x << " lies outside the chart of " << m.name();
      throw ChartBoundaryError(os.str());
    }
    a = m.F(xv, plus);
    b = m.F(xv, minus);
  };

  G.x.resize(M);
  G.a.resize(M);
  G.b.resize(M);
  G.w.resize(M);
  for (int j = 0; j < M; ++j) {
    G.x[j] = spec.lo + (j + shift) * G.h;
    sample(G.x[j], G.a[j], G.b[j]);
    xv[0] = G.x[j];
    G.w[j] = mu.sigma(m, xv) * G.h;
  }
  const int F = G.faces();
  G.xf.resize(F);
  G.af.resize(F);
  G.bf.resize(F);
  G.wf.resize(F);
  for (int f = 0; f < F; ++f) {
    G.xf[f] = G.x[f] + 0.5 * G.h;
    sample(G.xf[f], G.af[f], G.bf[f]);
    xv[0] = G.xf[f];
    G.wf[f] = mu.sigma(m, xv) * G.h;
  }
  G.normalize();

  if (spec.face_weights == FaceWeights::DriftMatched) {
    for (int f = 0; f < F; ++f)
      if (std::abs(G.af[f] - 1.0) > 1e-12 || std::abs(G.bf[f] - 1.0) > 1e-12)
        throw ParameterError("make_grid: drift-matched face weights need F(x, +-1) = 1");
    // wf_{j+1/2} - wf_{j-1/2} = h w_j (ln sigma)'(x_j), zero at both ends. Each face
    // is summed from the nearer end so the cancellation stays small.
    std::vector<double> D(M);
    double total = 0.0, scale = 0.0;
    for (int j = 0; j < M; ++j) {
      const auto js = mu.log_sigma_jet<1>(m, {G.x[j]});
      D[j] = G.h * G.w[j] * js.g[0];
      total += D[j];
      scale += std::abs(D[j]);
    }
    if (std::abs(total) > 1e-10 * std::max(scale, 1e-300))
      throw ParameterError("make_grid: drift-matched face weights need sum w (ln sigma)' = 0 on the interval");
    std::vector<double> left(F), right(F);
    double acc = 0.0;
    for (int f = 0; f < F; ++f) left[f] = (acc += D[f]);
    acc = 0.0;
    for (int f = F - 1; f >= 0; --f) right[f] = (acc -= D[f + 1]);
    for (int f = 0; f < F; ++f) G.wf[f] = 2 * f < F ? left[f] : right[f];
  }
  G.validate();
  return G;
}

GridGradient grid_gradient(const Grid1D& G, const std::vector<double>& u) {
  check_size(G, u, "grid_gradient");
  GridGradient r;
  slopes_into(G, u, r.slope);
  const int F = G.faces();
  r.grad.resize(F);
  r.F.resize(F);
  for (int f = 0; f < F; ++f) {
    const double s = r.slope[f];
    r.grad[f] = s / sector_weight(s, G.af[f], G.bf[f]);
    r.F[f] = dual_speed(s, G.af[f], G.bf[f]);
  }
  return r;
}

std::vector<double> sector_weights(const Grid1D& G, const std::vector<double>& u) {
  check_size(G, u, "sector_weights");
  std::vector<double> s, W;
  slopes_into(G, u, s);
  weights_into(G, s, W);
  return W;
}

std::vector<double> finsler_laplacian(const Grid1D& G, const std::vector<double>& u) {
  return linearized_laplacian(G, u, u);
}

std::vector<double> linearized_gradient(const Grid1D& G, const std::vector<double>& u,
                                        const std::vector<double>& f) {
  check_size(G, f, "linearized_gradient");
  const std::vector<double> W = sector_weights(G, u);
  std::vector<double> s;
  slopes_into(G, f, s);
  for (std::size_t k = 0; k < s.size(); ++k) s[k] /= W[k];
  return s;
}

std::vector<double> linearized_laplacian(const Grid1D& G, const std::vector<double>& u,
                                         const std::vector<double>& f) {
  return divergence(G, linearized_gradient(G, u, f));
}

std::vector<double> divergence(const Grid1D& G, const std::vector<double>& V) {
  check_face_size(G, V, "divergence");
  std::vector<double> Q(V.size()), out;
  for (std::size_t f = 0; f < V.size(); ++f) Q[f] = G.wf[f] * V[f];
  divergence_into(G, Q, out, false);
  return out;
}

std::vector<double> node_pairing(const Grid1D& G, const std::vector<double>& phi, const std::vector<double>& V) {
  check_size(G, phi, "node_pairing");
  check_face_size(G, V, "node_pairing");
  std::vector<double> s, out;
  slopes_into(G, phi, s);
  for (std::size_t f = 0; f < s.size(); ++f) s[f] *= V[f];
  pair_into(G, s, out, false);
  return out;
}

std::vector<double> face_average(const Grid1D& G, const std::vector<double>& f) {
  check_size(G, f, "face_average");
  std::vector<double> out(G.faces());
  for (int k = 0; k < G.faces(); ++k) out[k] = 0.5 * (f[k] + f[G.right(k)]);
  return out;
}

std::vector<double> carre_du_champ(const Grid1D& G, const std::vector<double>& u, const std::vector<double>& f) {
  return node_pairing(G, f, linearized_gradient(G, u, f));
}

std::vector<double> node_speed(const Grid1D& G, const std::vector<double>& u) {
  check_size(G, u, "node_speed");
  std::vector<double> s, psi;
  slopes_into(G, u, s);
  node_speed_into(G, s, psi);
  return psi;
}

std::vector<double> g_field(const Grid1D& G, const std::vector<double>& u) {
  check_size(G, u, "g_field");
  HeatWork hw;
  hw.eval(G, u, false);
  return hw.g;
}

double mean(const Grid1D& G, const std::vector<double>& f) {
  check_size(G, f, "mean");
  double m = 0.0;
  for (int j = 0; j < G.M; ++j) m += G.w[j] * f[j];
  return m;
}

double variance(const Grid1D& G, const std::vector<double>& f) {
  check_size(G, f, "variance");
  return two_pass_variance(G.w, f, nullptr);
}

double variance_one_pass(const Grid1D& G, const std::vector<double>& f) {
  check_size(G, f, "variance_one_pass");
  double s1 = 0.0, s2 = 0.0;
  for (int j = 0; j < G.M; ++j) {
    s1 += G.w[j] * f[j];
    s2 += G.w[j] * f[j] * f[j];
  }
  return s2 - s1 * s1;
}

double energy(const Grid1D& G, const std::vector<double>& u) {
  check_size(G, u, "energy");
  std::vector<double> s;
  slopes_into(G, u, s);
  double E = 0.0;
  for (int f = 0; f < G.faces(); ++f) E += G.wf[f] * s[f] * s[f] / sector_weight(s[f], G.af[f], G.bf[f]);
  return E;
}

double l2_squared(const Grid1D& G, const std::vector<double>& f) {
  check_size(G, f, "l2_squared");
  double r = 0.0;
  for (int j = 0; j < G.M; ++j) r += G.w[j] * f[j] * f[j];
  return r;
}

double heat_stable_step(const Grid1D& G) {
  double dmax = 0.0;
  for (int j = 0; j < G.M; ++j) {
    const int fl = face_left(G, j), fr = face_right(G, j);
    double d = 0.0;
    for (int f : {fl, fr}) {
      if (f < 0) continue;
      const double mn = std::min(G.af[f] * G.af[f], G.bf[f] * G.bf[f]);
      d += G.wf[f] / (G.h * G.h * mn);
    }
    dmax = std::max(dmax, d / G.w[j]);
  }
  return 1.0 / dmax;
}

HeatTrajectory heat_flow(const Grid1D& G, const std::vector<double>& f0, const HeatOptions& opts) {
  check_size(G, f0, "heat_flow");
  if (!(opts.T > 0.0)) throw ParameterError("heat_flow: horizon T must be positive");
  HeatTrajectory tr;
  tr.dt_stable = heat_stable_step(G);
  if (opts.dt > 0.0 && opts.dt > tr.dt_stable * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << std::setprecision(6) << "heat_flow: dt = " << opts.dt << " exceeds the explicit stability limit "
       << tr.dt_stable;
    throw StepSizeError(os.str());
  }
  const double dt0 = opts.dt > 0.0 ? opts.dt : 0.8 * tr.dt_stable;
  const long N = std::max<long>(2, static_cast<long>(std::ceil(opts.T / dt0 - 1e-9)));
  tr.steps = N;
  tr.dt = opts.T / static_cast<double>(N);
  const double dt = tr.dt;
  const int stride = opts.snapshot_every > 0 ? opts.snapshot_every : static_cast<int>(std::max<long>(1, N / 200));
  tr.snapshot_every = stride;

  std::vector<double> u = f0;
  std::vector<double> phi(N + 1);
  std::vector<long> sample_steps;
  tr.g_integral.assign(G.M, 0.0);
  std::vector<double> g_prev;
  double gsign_prev = 0.0;
  double mean0 = 0.0;
  HeatWork hw;
  const int M = G.M;

  for (long n = 0; n <= N; ++n) {
    hw.eval(G, u, opts.parallel);
    double mn = 0.0;
    const double var = two_pass_variance(G.w, u, &mn);
    phi[n] = 0.0;
    for (int j = 0; j < M; ++j) phi[n] += G.w[j] * u[j] * u[j];
    if (n == 0) mean0 = mn;
    if (n > 0 && phi[n] > phi[n - 1] + 1e-12 * phi[0]) {
      std::ostringstream os;
      os << "heat_flow: Phi increased at step " << n << " (dt = " << dt << ")";
      throw StepSizeError(os.str());
    }
    if (n > 0) {
      for (int j = 0; j < M; ++j) tr.g_integral[j] += 0.5 * dt * (g_prev[j] + hw.g[j]);
      tr.g_sign_change += 0.5 * dt * (gsign_prev + hw.g_sign);
    }
    if (n % stride == 0 || n == N) {
      sample_steps.push_back(n);
      tr.t.push_back(dt * static_cast<double>(n));
      tr.u.push_back(u);
      tr.energy.push_back(hw.energy);
      tr.dphi.push_back(-2.0 * hw.energy);
      tr.ddphi.push_back(4.0 * hw.lap_sq);
      tr.phi.push_back(phi[n]);
      tr.var.push_back(var);
      tr.mean.push_back(mn);
      tr.g_total.push_back(hw.g_total);
    }
    if (n == N) {
      tr.g_final = hw.g;
      tr.mass_drift_rate = std::abs(mn - mean0) / opts.T;
      break;
    }
    g_prev = hw.g;
    gsign_prev = hw.g_sign;
#pragma omp parallel for schedule(static) if (opts.parallel)
    for (int j = 0; j < M; ++j) u[j] += dt * hw.lap[j];
  }

  for (long n : sample_steps) {
    double d1, d2;
    if (n == 0) {
      d1 = (phi[1] - phi[0]) / dt;
    } else if (n == N) {
      d1 = (phi[N] - phi[N - 1]) / dt;
    } else {
      d1 = (phi[n + 1] - phi[n - 1]) / (2.0 * dt);
    }
    const long c = std::clamp<long>(n, 1, N - 1);
    d2 = (phi[c + 1] - 2.0 * phi[c] + phi[c - 1]) / (dt * dt);
    tr.dphi_fd.push_back(d1);
    tr.ddphi_fd.push_back(d2);
  }
  return tr;
}

void write_heat_csv(std::ostream& os, const HeatTrajectory& tr) {
  os << "t,phi,dphi_analytic,dphi_fd,ddphi_analytic,ddphi_fd,energy,variance,g_total\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    os << tr.t[i] << ',' << tr.phi[i] << ',' << tr.dphi[i] << ',' << tr.dphi_fd[i] << ',' << tr.ddphi[i] << ','
       << tr.ddphi_fd[i] << ',' << tr.energy[i] << ',' << tr.var[i] << ',' << tr.g_total[i] << '\n';
  }
}

GCorrection g_correction(const Grid1D& G, const HeatTrajectory& tr) {
  if (tr.t.size() < 3 || static_cast<int>(tr.g_integral.size()) != G.M)
    throw ParameterError("g_correction: trajectory does not belong to this grid");
  GCorrection r;
  for (int j = 0; j < G.M; ++j) r.accumulated += G.w[j] * tr.g_integral[j];

  const double T = tr.t.back();
  std::vector<double> ts, ys;
  double window_max = 0.0;
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    if (tr.t[i] < 0.9 * T) continue;
    window_max = std::max(window_max, tr.g_total[i]);
    if (tr.g_total[i] > 0.0) {
      ts.push_back(tr.t[i]);
      ys.push_back(std::log(tr.g_total[i]));
    }
  }
  const double scale = std::max(tr.energy.front(), r.accumulated);
  const bool negligible = window_max <= 1e-13 * scale;
  r.per_node = tr.g_integral;
  if (!negligible) {
    if (ts.size() < 3) throw HorizonError("g_correction: too few positive samples in the last decade of the horizon");
    r.decay_rate = -least_squares(ts, ys).slope;
    if (!(r.decay_rate > 0.0)) {
      std::ostringstream os;
      os << "g_correction: g is not decaying at the end of the horizon (fitted rate " << r.decay_rate
         << "); extend T";
      throw HorizonError(os.str());
    }
    r.tail = tr.g_total.back() / r.decay_rate;
    for (int j = 0; j < G.M; ++j) r.per_node[j] += tr.g_final[j] / r.decay_rate;
  }
  r.total = r.accumulated + r.tail;
  r.tail_share = r.total > 0.0 ? r.tail / r.total : 0.0;
  r.sign_change_share = r.accumulated > 0.0 ? tr.g_sign_change / r.accumulated : 0.0;
  r.sign_change_flag = r.sign_change_share > 0.01;
  return r;
}

PLReport pl_check(const Grid1D& G, const std::vector<double>& f0, double K, const PLOptions& opts) {
  check_size(G, f0, "pl_check");
  if (!(K > 0.0)) throw ParameterError("pl_check: needs a certified Ric^inf lower bound K > 0");
  PLReport r;
  r.K = K;
  r.tol = opts.tol;
  r.variance = variance(G, f0);
  r.energy = energy(G, f0);
  HeatOptions ho;
  ho.T = opts.T > 0.0 ? opts.T : 12.0 / K;
  ho.dt = opts.dt;
  ho.parallel = opts.parallel;
  const HeatTrajectory tr = heat_flow(G, f0, ho);
  const GCorrection gc = g_correction(G, tr);
  r.g_total = gc.total;
  r.tail_share = gc.tail_share;
  r.sign_change_flag = gc.sign_change_flag;
  r.rhs_plain = r.energy / K;
  r.rhs_improved = (r.energy - 2.0 * r.g_total) / K;
  r.slack = r.variance > 0.0 ? (r.rhs_improved - r.variance) / r.variance : 0.0;
  r.improved_holds = r.variance <= r.rhs_improved + opts.tol * r.rhs_plain;
  r.dominance = r.rhs_improved <= r.rhs_plain;
  r.passed = r.improved_holds && r.dominance;
  return r;
}

BochnerReport bochner_integrated_check(const Grid1D& G, const std::vector<double>& u, double K, double tol) {
  check_size(G, u, "bochner_integrated_check");
  if (!(K > 0.0)) throw ParameterError("bochner_integrated_check: needs a certified Ric^inf lower bound K > 0");
  HeatWork hw;
  hw.eval(G, u, false);
  BochnerReport r;
  r.K = K;
  r.tol = tol;
  r.energy = hw.energy;
  r.laplacian_sq = hw.lap_sq;
  r.g_integral = hw.g_total;
  const double rhs = r.laplacian_sq - r.g_integral;
  if (rhs > 0.0)
    r.ratio = K * r.energy / rhs;
  else
    r.ratio = r.energy > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  r.passed = K * r.energy <= rhs + tol * r.laplacian_sq;
  return r;
}

double rayleigh_quotient(const Grid1D& G, const std::vector<double>& f) {
  const double v = variance(G, f);
  if (!(v > 0.0)) throw ParameterError("rayleigh_quotient: constant function");
  return energy(G, f) / v;
}

std::vector<double> random_smooth(const Grid1D& G, std::uint64_t seed, int modes) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double L = G.hi - G.lo;
  std::vector<double> f(G.M, 0.0);
  for (int k = 1; k <= modes; ++k) {
    const double amp = 1.0 / (static_cast<double>(k) * k);
    const double A = nd(rng) * amp;
    const double B = G.periodic ? nd(rng) * amp : 0.0;
    for (int j = 0; j < G.M; ++j) {
      const double th = (G.periodic ? 2.0 : 1.0) * std::numbers::pi * k * (G.x[j] - G.lo) / L;
      f[j] += A * std::cos(th) + B * std::sin(th);
    }
  }
  return f;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Stiffness matrix of sum wf (slope)^2 / W with W frozen.
SpMat stiffness(const Grid1D& G, const std::vector<double>& W) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int f = 0; f < G.faces(); ++f) {
    const double c = G.wf[f] / (G.h * G.h * W[f]);
    const int l = f, r = G.right(f);
    trip.emplace_back(l, l, c);
    trip.emplace_back(r, r, c);
    trip.emplace_back(l, r, -c);
    trip.emplace_back(r, l, -c);
  }
  SpMat A(G.M, G.M);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

void center(const Grid1D& G, Eigen::VectorXd& v) {
  double m = 0.0;
  for (int j = 0; j < G.M; ++j) m += G.w[j] * v[j];
  v.array() -= m;
  double n2 = 0.0;
  for (int j = 0; j < G.M; ++j) n2 += G.w[j] * v[j] * v[j];
  v /= std::sqrt(n2);
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

struct SectorResult {
  double R = 0.0;
  std::vector<double> f;
  int iterations = 0;
};

// Alternates a frozen-sector eigenproblem (inverse iteration, constants
// deflated) with re-freezing at the better of +-v.
SectorResult sector_minimize(const Grid1D& G, std::vector<double> f, int max_outer) {
  SectorResult best;
  best.R = rayleigh_quotient(G, f);
  best.f = f;
  double dmax = 0.0;
  for (int f2 = 0; f2 < G.faces(); ++f2)
    dmax = std::max(dmax, G.wf[f2] / (G.h * G.h * std::min(G.af[f2] * G.af[f2], G.bf[f2] * G.bf[f2])));
  const double eps = 1e-8 * dmax;
  SpMat B(G.M, G.M);
  {
    std::vector<Eigen::Triplet<double>> trip;
    for (int j = 0; j < G.M; ++j) trip.emplace_back(j, j, G.w[j]);
    B.setFromTriplets(trip.begin(), trip.end());
  }
  std::vector<double> s, W, prev_sign;
  for (int outer = 0; outer < max_outer; ++outer) {
    ++best.iterations;
    slopes_into(G, f, s);
    weights_into(G, s, W);
    std::vector<double> sign(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) sign[k] = (s[k] > 0.0) - (s[k] < 0.0);
    if (sign == prev_sign) break;
    prev_sign = sign;

    const SpMat A = stiffness(G, W);
    Eigen::SimplicialLDLT<SpMat> ldlt(A + eps * B);
    if (ldlt.info() != Eigen::Success) throw Error("lambda1_estimate: sparse factorization failed");
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(f.data(), G.M);
    center(G, v);
    double Rw = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 2000; ++it) {
      Eigen::VectorXd Bv = B * v;
      v = ldlt.solve(Bv);
      center(G, v);
      const double Rn = v.dot(A * v);
      if (std::abs(Rn - Rw) <= 1e-14 * Rn) {
        Rw = Rn;
        break;
      }
      Rw = Rn;
    }
    std::vector<double> fp = to_std(v), fm = to_std(-v);
    const double Rp = rayleigh_quotient(G, fp), Rm = rayleigh_quotient(G, fm);
    f = Rp <= Rm ? fp : fm;
    const double R = std::min(Rp, Rm);
    if (R < best.R) {
      best.R = R;
      best.f = f;
    }
  }
  return best;
}

}  // namespace

Lambda1Report lambda1_estimate(const Grid1D& G, const Lambda1Options& opts) {
  if (opts.restarts < 1) throw ParameterError("lambda1_estimate: need at least one restart");
  Lambda1Report r;
  std::mt19937_64 rng(opts.seed);
  r.rayleigh = std::numeric_limits<double>::infinity();
  for (int k = 0; k < opts.restarts; ++k) {
    const SectorResult s = sector_minimize(G, random_smooth(G, rng()), opts.max_sector_iterations);
    r.restart_values.push_back(s.R);
    if (s.R < r.rayleigh) {
      r.rayleigh = s.R;
      r.eigenfunction = s.f;
      r.sector_iterations = s.iterations;
    }
  }
  HeatOptions ho;
  ho.T = opts.horizon_factor / r.rayleigh;
  ho.parallel = opts.parallel;
  const HeatTrajectory tr = heat_flow(G, random_smooth(G, rng()), ho);
  // Below 1e-20 Var(0) the variance is roundoff; the window is the second
  // half of the resolved part of the trajectory.
  const double floor = 1e-20 * tr.var.front();
  double t_end = 0.0;
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    if (tr.var[i] > floor) t_end = tr.t[i];
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < tr.t.size() && tr.t[i] <= t_end; ++i) {
    if (tr.t[i] < 0.5 * t_end) continue;
    ts.push_back(tr.t[i]);
    ys.push_back(std::log(tr.var[i]));
  }
  if (ts.size() < 3) throw HorizonError("lambda1_estimate: variance vanished before the fitting window");
  r.decay_T = t_end;
  r.decay_rate = -0.5 * least_squares(ts, ys).slope;
  r.relative_gap = std::abs(r.decay_rate - r.rayleigh) / r.rayleigh;
  r.reversible = true;
  for (int f = 0; f < G.faces(); ++f)
    if (std::abs(G.af[f] - G.bf[f]) > 1e-12 * G.af[f]) r.reversible = false;
  // Var' = -2 E <= -2 lambda1 Var, so the decay rate bounds lambda1 from above.
  // Without reversibility the flow may settle in a sector other than the
  // minimizer's, and only that bound is checked.
  r.converged = r.reversible ? r.relative_gap <= 0.03 : r.decay_rate >= (1.0 - 0.03) * r.rayleigh;
  return r;
}

EigenBoundReport eigenvalue_bound_check(const Grid1D& G, const Lambda1Report& l1, double K,
                                        const std::vector<std::vector<double>>& tested, double tol, bool parallel) {
  if (!(K > 0.0)) throw ParameterError("eigenvalue_bound_check: needs a certified Ric^inf lower bound K > 0");
  EigenBoundReport r;
  r.lambda1 = l1.rayleigh;
  r.K = K;
  r.tol = tol;
  std::vector<const std::vector<double>*> fs;
  if (!l1.eigenfunction.empty()) fs.push_back(&l1.eigenfunction);
  for (const auto& f : tested) fs.push_back(&f);
  if (fs.empty()) throw ParameterError("eigenvalue_bound_check: no test functions");
  PLOptions po;
  po.parallel = parallel;
  r.delta_est = std::numeric_limits<double>::infinity();
  for (const auto* f : fs) {
    const PLReport pl = pl_check(G, *f, K, po);
    if (!(pl.variance > 0.0)) continue;
    const double d = 2.0 * pl.g_total / pl.variance;
    r.delta_values.push_back(d);
    r.delta_est = std::min(r.delta_est, d);
  }
  if (r.delta_values.empty()) throw ParameterError("eigenvalue_bound_check: every test function is constant");
  r.margin = r.lambda1 - (K + r.delta_est);
  r.passed = r.margin >= -tol * r.lambda1;
  return r;
}

}  // namespace finsler
