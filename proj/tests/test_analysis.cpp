#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "finsler/analysis.hpp"
#include "finsler/errors.hpp"

using namespace finsler;
using std::numbers::pi;

namespace {

Grid1D wavy_circle(int M = 128) {
  zoo::Asym1DParams p;
  p.a0 = 1.0;
  p.a1 = 0.3;
  p.b0 = 1.6;
  p.b1 = 0.4;
  p.x0 = 0.0;
  p.length = 2 * pi;
  p.periodic = true;
  const MetricInstance m = zoo::asym1d(p);
  return make_grid(m, MeasureSpec::busemann_hausdorff(), M, {0.0, 2 * pi, true, FaceWeights::Midpoint});
}

Grid1D uniform_circle(int M = 256) {
  zoo::Asym1DParams p;
  p.length = 2 * pi;
  p.periodic = true;
  return make_grid(zoo::asym1d(p), MeasureSpec::busemann_hausdorff(), M, {0.0, 2 * pi, true, FaceWeights::Midpoint});
}

Grid1D ou_interval(double K, int M = 200) {
  const double L = 8.0 / std::sqrt(K);
  return make_grid(zoo::euclidean(1), MeasureSpec::gaussian(K), M, {-L, L, false, FaceWeights::DriftMatched});
}

Grid1D asym_interval(int M = 256) {
  zoo::Asym1DParams p;
  p.a0 = 1.0;
  p.b0 = 2.0;
  p.x0 = -8.0;
  p.length = 16.0;
  p.periodic = false;
  return make_grid(zoo::asym1d(p), MeasureSpec::gaussian(1.0), M, {-8.0, 8.0, false, FaceWeights::Midpoint});
}

std::vector<double> node_fn(const Grid1D& G, double (*f)(double)) {
  std::vector<double> r(G.M);
  for (int j = 0; j < G.M; ++j) r[j] = f(G.x[j]);
  return r;
}

double wsum(const Grid1D& G, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (int j = 0; j < G.M; ++j) s += G.w[j] * a[j] * b[j];
  return s;
}

}  // namespace

TEST_CASE("grid construction") {
  const Grid1D G = wavy_circle();
  CHECK(G.faces() == G.M);
  double s = 0.0;
  for (double v : G.w) s += v;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(G.a[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(G.b[0] == doctest::Approx(2.0).epsilon(1e-14));

  const Grid1D R = ou_interval(1.0, 50);
  CHECK(R.faces() == R.M - 1);
  CHECK(R.x[0] == doctest::Approx(-8.0 + R.h / 2).epsilon(1e-14));

  zoo::Asym1DParams p;
  p.length = 2 * pi;
  CHECK_THROWS_AS(make_grid(zoo::asym1d(p), MeasureSpec::busemann_hausdorff(), 16,
                            {0.0, 2 * pi, true, FaceWeights::DriftMatched}),
                  ParameterError);
  CHECK_THROWS_AS(make_grid(zoo::euclidean(2), MeasureSpec::busemann_hausdorff(), 16, {}), ParameterError);
  // Asymmetric interval: the drift does not sum to zero.
  CHECK_THROWS_AS(make_grid(zoo::euclidean(1), MeasureSpec::gaussian(1.0), 64,
                            {-8.0, 6.0, false, FaceWeights::DriftMatched}),
                  ParameterError);
}

TEST_CASE("gradient is the Legendre inverse of the slope") {
  const Grid1D G = wavy_circle(64);
  const std::vector<double> u = random_smooth(G, 7);
  const GridGradient g = grid_gradient(G, u);
  for (int f = 0; f < G.faces(); ++f) {
    const double s = g.slope[f];
    const double a = s > 0 ? G.af[f] : G.bf[f];
    CHECK(g.grad[f] == doctest::Approx(s / (a * a)).epsilon(1e-15));
    CHECK(g.F[f] == doctest::Approx(std::abs(s) / a).epsilon(1e-15));
    // Euler identity: du(grad u) = F*(du)^2.
    CHECK(s * g.grad[f] == doctest::Approx(g.F[f] * g.F[f]).epsilon(1e-13));
  }
}

TEST_CASE("Laplacian is the negative adjoint of the gradient and conserves mass") {
  for (const Grid1D& G : {wavy_circle(), asym_interval(96)}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const std::vector<double> u = random_smooth(G, seed);
      const std::vector<double> phi = random_smooth(G, seed + 100);
      const std::vector<double> lap = finsler_laplacian(G, u);
      const GridGradient gu = grid_gradient(G, u);
      const GridGradient gp = grid_gradient(G, phi);
      double weak = 0.0;
      for (int f = 0; f < G.faces(); ++f) weak += G.wf[f] * gp.slope[f] * gu.grad[f];
      const std::vector<double> one(G.M, 1.0);
      CHECK(wsum(G, phi, lap) == doctest::Approx(-weak).epsilon(1e-11));
      CHECK(std::abs(wsum(G, one, lap)) < 1e-11 * std::sqrt(l2_squared(G, lap)));
      // Sum u Delta u = -E(u).
      CHECK(wsum(G, u, lap) == doctest::Approx(-energy(G, u)).epsilon(1e-11));
    }
  }
}

TEST_CASE("discrete calculus identities hold exactly") {
  const Grid1D G = asym_interval(80);
  const std::vector<double> u = random_smooth(G, 11);
  const std::vector<double> f = random_smooth(G, 12);
  const std::vector<double> phi = random_smooth(G, 13);
  const std::vector<double> V = linearized_gradient(G, u, f);

  // div(phi_bar V) = phi div V + d phi(V).
  const std::vector<double> pbar = face_average(G, phi);
  std::vector<double> pV(V.size());
  for (std::size_t k = 0; k < V.size(); ++k) pV[k] = pbar[k] * V[k];
  const std::vector<double> lhs = divergence(G, pV);
  const std::vector<double> dv = divergence(G, V);
  const std::vector<double> pair = node_pairing(G, phi, V);
  for (int j = 0; j < G.M; ++j) CHECK(lhs[j] == doctest::Approx(phi[j] * dv[j] + pair[j]).epsilon(1e-10));

  // Delta^{grad u} f^2 = 2 f Delta^{grad u} f + 2 Gamma(f).
  std::vector<double> f2(G.M);
  for (int j = 0; j < G.M; ++j) f2[j] = f[j] * f[j];
  const std::vector<double> l2 = linearized_laplacian(G, u, f2);
  const std::vector<double> l1 = linearized_laplacian(G, u, f);
  const std::vector<double> gam = carre_du_champ(G, u, f);
  double scale = 0.0;
  for (double v : l2) scale = std::max(scale, std::abs(v));
  for (int j = 0; j < G.M; ++j) CHECK(std::abs(l2[j] - 2 * f[j] * l1[j] - 2 * gam[j]) < 1e-10 * scale);

  // sum w Gamma^{grad u}(u) = E(u); linearized Laplacian at u is the Laplacian.
  CHECK(mean(G, carre_du_champ(G, u, u)) == doctest::Approx(energy(G, u)).epsilon(1e-12));
  const std::vector<double> lu = linearized_laplacian(G, u, u);
  const std::vector<double> nu = finsler_laplacian(G, u);
  for (int j = 0; j < G.M; ++j) CHECK(lu[j] == nu[j]);
  for (double g : g_field(G, u)) CHECK(g >= 0.0);
}

TEST_CASE("uniform circle: Laplacian of sin and first eigenvalue") {
  const Grid1D G = uniform_circle(256);
  const std::vector<double> s = node_fn(G, [](double x) { return std::sin(x); });
  const std::vector<double> lap = finsler_laplacian(G, s);
  const double expect = 4.0 / (G.h * G.h) * std::pow(std::sin(G.h / 2), 2);
  for (int j = 0; j < G.M; ++j) CHECK(lap[j] == doctest::Approx(-expect * s[j]).epsilon(1e-9).scale(1.0));
  CHECK(expect == doctest::Approx(1.0).epsilon(1e-4));

  const Lambda1Report r = lambda1_estimate(G);
  CHECK(r.rayleigh == doctest::Approx(expect).epsilon(1e-9));
  CHECK(r.decay_rate == doctest::Approx(1.0).epsilon(0.01));
  CHECK(r.converged);
  CHECK(r.restart_values.size() == 10u);
}

TEST_CASE("Ornstein-Uhlenbeck interval: u = x is an exact eigenfunction") {
  for (double K : {1.0, 2.5}) {
    const Grid1D G = ou_interval(K);
    const std::vector<double> x = G.x;
    const std::vector<double> lap = finsler_laplacian(G, x);
    for (int j = 0; j < G.M; ++j) CHECK(lap[j] == doctest::Approx(-K * x[j]).epsilon(1e-10).scale(1.0));
    CHECK(energy(G, x) == doctest::Approx(K * variance(G, x)).epsilon(1e-12));
    for (double g : g_field(G, x)) CHECK(std::abs(g) < 1e-20);

    const PLReport pl = pl_check(G, x, K);
    CHECK(pl.passed);
    CHECK(pl.dominance);
    CHECK(std::abs(pl.slack) < 1e-10);
    CHECK(pl.g_total < 1e-12);

    const Lambda1Report r = lambda1_estimate(G);
    CHECK(r.rayleigh == doctest::Approx(K).epsilon(1e-9));
    CHECK(r.converged);
  }
}

TEST_CASE("heat flow: monotone Phi and derivative identities") {
  const Grid1D G = asym_interval(128);
  const std::vector<double> f0 = random_smooth(G, 3);
  HeatOptions o;
  o.T = 4.0;
  const HeatTrajectory tr = heat_flow(G, f0, o);
  CHECK(tr.dt <= 0.8 * tr.dt_stable * (1 + 1e-12));
  CHECK(tr.t.front() == 0.0);
  CHECK(tr.t.back() == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(tr.mass_drift_rate < 1e-13);
  for (std::size_t i = 1; i < tr.phi.size(); ++i) CHECK(tr.phi[i] <= tr.phi[i - 1]);
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    // First-order Euler: differences agree with the analytic values to O(dt).
    CHECK(tr.dphi_fd[i] == doctest::Approx(tr.dphi[i]).epsilon(5e-3).scale(std::abs(tr.dphi[0]) * 1e-3));
  }
  // Phi'' comparison away from t = 0, where the sector pattern has settled.
  for (std::size_t i = tr.t.size() / 4; i < tr.t.size(); ++i)
    CHECK(tr.ddphi_fd[i] == doctest::Approx(tr.ddphi[i]).epsilon(0.02).scale(tr.ddphi[0] * 1e-4));

  std::ostringstream os;
  write_heat_csv(os, tr);
  CHECK(os.str().rfind("t,phi,dphi_analytic,dphi_fd,ddphi_analytic,ddphi_fd,energy,variance,g_total\n", 0) == 0);
}

TEST_CASE("heat flow: serial and parallel agree bit for bit") {
  const Grid1D G = wavy_circle(96);
  const std::vector<double> f0 = random_smooth(G, 5);
  HeatOptions o;
  o.T = 1.0;
  o.parallel = true;
  const HeatTrajectory a = heat_flow(G, f0, o);
  o.parallel = false;
  const HeatTrajectory b = heat_flow(G, f0, o);
  CHECK(a.phi == b.phi);
  CHECK(a.u.back() == b.u.back());
  CHECK(a.g_integral == b.g_integral);
}

TEST_CASE("heat flow: step size guard") {
  const Grid1D G = wavy_circle(64);
  const std::vector<double> f0 = random_smooth(G, 2);
  HeatOptions o;
  o.T = 0.1;
  o.dt = 1.5 * heat_stable_step(G);
  CHECK_THROWS_AS(heat_flow(G, f0, o), StepSizeError);
  o.dt = heat_stable_step(G);
  CHECK_NOTHROW(heat_flow(G, f0, o));
  o.T = -1.0;
  CHECK_THROWS_AS(heat_flow(G, f0, o), ParameterError);
}

TEST_CASE("variance: two-pass survives a large offset") {
  const Grid1D G = wavy_circle(64);
  std::vector<double> f = random_smooth(G, 9);
  const double v0 = variance(G, f);
  CHECK(variance_one_pass(G, f) == doctest::Approx(v0).epsilon(1e-12));
  for (double& v : f) v += 1e8;
  CHECK(variance(G, f) == doctest::Approx(v0).epsilon(1e-7));
  CHECK(std::abs(variance_one_pass(G, f) - v0) > 1e-3 * v0);
}

TEST_CASE("improved Poincare-Lichnerowicz on the asymmetric interval") {
  const Grid1D G = asym_interval(256);
  const double K = 0.25;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const std::vector<double> f0 = random_smooth(G, seed);
    const PLReport r = pl_check(G, f0, K);
    CHECK(r.passed);
    CHECK(r.dominance);
    CHECK(r.g_total > 0.0);
    CHECK(r.rhs_improved < r.rhs_plain);
    CHECK(r.variance <= r.rhs_plain);
    CHECK(r.tail_share < 1e-3);
  }
  CHECK_THROWS_AS(pl_check(G, random_smooth(G, 1), 0.0), ParameterError);
}

TEST_CASE("integrated Bochner inequality is sharp on weighted Riemannian lines") {
  // With a = b = 1 and Gaussian weight, int (Delta u)^2 = K E + int u''^2 and g = u''^2.
  const Grid1D G = ou_interval(1.0, 400);
  for (std::uint64_t seed : {4u, 5u}) {
    std::vector<double> u(G.M);
    const std::vector<double> r = random_smooth(G, seed, 4);
    for (int j = 0; j < G.M; ++j) u[j] = r[j] * std::exp(-G.x[j] * G.x[j] / 40.0);
    const BochnerReport b = bochner_integrated_check(G, u, 1.0);
    CHECK(b.passed);
    CHECK(b.ratio == doctest::Approx(1.0).epsilon(0.02));
  }
  const Grid1D A = asym_interval(256);
  const BochnerReport b = bochner_integrated_check(A, random_smooth(A, 8), 0.25);
  CHECK(b.passed);
  CHECK(b.ratio < 1.0);
}

TEST_CASE("g correction: tail fit and horizon error") {
  const Grid1D G = asym_interval(128);
  HeatOptions o;
  o.T = 24.0;
  HeatTrajectory tr = heat_flow(G, random_smooth(G, 6), o);
  const GCorrection gc = g_correction(G, tr);
  CHECK(gc.total >= gc.accumulated);
  CHECK(gc.decay_rate > 0.0);
  CHECK(gc.tail_share < 1e-3);
  double s = 0.0;
  for (int j = 0; j < G.M; ++j) s += G.w[j] * gc.per_node[j];
  CHECK(s == doctest::Approx(gc.total).epsilon(1e-10));

  for (std::size_t i = 0; i < tr.g_total.size(); ++i) tr.g_total[i] = 1.0 + tr.t[i];
  CHECK_THROWS_AS(g_correction(G, tr), HorizonError);
}

TEST_CASE("uniform circle: Fourier mode oracles for the heat flow and g") {
  double totals[2];
  int k = 0;
  for (int M : {128, 256}) {
    const Grid1D G = uniform_circle(M);
    const std::vector<double> f0 = node_fn(G, [](double x) { return std::sin(x); });
    HeatOptions o;
    o.T = 2.0;
    const HeatTrajectory tr = heat_flow(G, f0, o);
    for (std::size_t i = 0; i < tr.t.size(); ++i)
      CHECK(std::sqrt(2.0 * tr.phi[i]) == doctest::Approx(std::exp(-tr.t[i])).epsilon(0.01));
    // Long horizon for the g integral: g = sin^2 x e^{-2t}, total 1/4 on the normalized circle.
    o.T = 12.0;
    const GCorrection gc = g_correction(G, heat_flow(G, f0, o));
    CHECK(gc.total >= 0.0);
    CHECK(gc.total == doctest::Approx(0.25).epsilon(0.05));
    totals[k++] = gc.total;
  }
  CHECK(std::abs(totals[1] - 0.25) <= std::abs(totals[0] - 0.25) + 1e-12);
}

TEST_CASE("heat flow: constants are equilibria and the flow is ergodic") {
  const Grid1D G = asym_interval(64);
  HeatOptions o;
  o.T = 1.0;
  const HeatTrajectory c = heat_flow(G, std::vector<double>(G.M, 2.5), o);
  for (double v : c.u.back()) CHECK(v == 2.5);
  const std::vector<double> f0 = random_smooth(G, 17);
  o.T = 80.0;
  const HeatTrajectory tr = heat_flow(G, f0, o);
  double dev = 0.0;
  for (double v : tr.u.back()) dev = std::max(dev, std::abs(v - mean(G, f0)));
  CHECK(dev < 1e-4);
  for (double d2 : tr.ddphi) CHECK(d2 >= 0.0);
}

TEST_CASE("linearized gradient pairing is symmetric") {
  const Grid1D G = wavy_circle(64);
  const std::vector<double> u = random_smooth(G, 21), f1 = random_smooth(G, 22), f2 = random_smooth(G, 23);
  const std::vector<double> a = node_pairing(G, f2, linearized_gradient(G, u, f1));
  const std::vector<double> b = node_pairing(G, f1, linearized_gradient(G, u, f2));
  for (int j = 0; j < G.M; ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-14));
  const GridGradient g0 = grid_gradient(G, std::vector<double>(G.M, 1.0));
  for (double v : g0.grad) CHECK(v == 0.0);
}

TEST_CASE("sector closed forms for a = 1, b = 2") {
  zoo::Asym1DParams p;
  p.a0 = 1.0;
  p.b0 = 2.0;
  p.length = 4.0;
  const Grid1D G = make_grid(zoo::asym1d(p), MeasureSpec::busemann_hausdorff(), 40, {0.0, 4.0, true, FaceWeights::Midpoint});
  std::vector<double> u(G.M);
  for (int j = 0; j < G.M; ++j) u[j] = G.x[j] < 2.0 ? G.x[j] : 4.0 - G.x[j];
  const GridGradient g = grid_gradient(G, u);
  for (int f = 0; f < G.faces(); ++f) {
    if (g.slope[f] > 0) CHECK(g.F[f] * g.F[f] == doctest::Approx(1.0));
    if (g.slope[f] < 0) CHECK(g.F[f] * g.F[f] == doctest::Approx(0.25));
  }
}

TEST_CASE("eigenvalue bound: scale invariance and lambda1 >= K + delta") {
  Grid1D G = asym_interval(128);
  const Lambda1Report a = lambda1_estimate(G);
  for (double& v : G.w) v *= 2.0;
  for (double& v : G.wf) v *= 2.0;
  G.normalize();
  const Lambda1Report b = lambda1_estimate(G);
  CHECK(a.rayleigh == doctest::Approx(b.rayleigh).epsilon(1e-10));

  std::vector<std::vector<double>> tested;
  for (std::uint64_t s = 1; s <= 3; ++s) tested.push_back(random_smooth(G, s));
  const EigenBoundReport e = eigenvalue_bound_check(G, a, 0.25, tested);
  CHECK(e.passed);
  CHECK(e.delta_values.size() == 4u);
  CHECK(e.delta_est >= 0.0);
  CHECK(e.delta_est < 1e-3);

  const BochnerReport c = bochner_integrated_check(G, std::vector<double>(G.M, 1.0), 0.25);
  CHECK(c.passed);
  CHECK_THROWS_AS(bochner_integrated_check(G, tested[0], -1.0), ParameterError);
}
