#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "finsler/curvature.hpp"
#include "fixtures.hpp"

using namespace finsler;

namespace {
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
Vec unit(const MetricInstance& m, const Vec& x, const Vec& y) { return y / m.F(x, y); }
}  // namespace

TEST_CASE("spray examples") {
  auto e = zoo::euclidean(2);
  CHECK(spray(e, v2(1, 2), v2(0.3, -0.4)).norm() == 0.0);

  // Conformal metric e^{2f} delta: 2G^i = 2 (y . grad f) y^i - |y|^2 f_i.
  auto s = zoo::round_sphere(2);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    Vec x = fixtures::random_point(s, rng);
    Vec y = fixtures::random_vector(2, rng);
    auto f = jet2_eval<2>([](const auto& v) { return log(2.0 / (v[0] * v[0] + v[1] * v[1] + 1.0)); },
                          {x[0], x[1]});
    Vec gf = v2(f.g[0], f.g[1]);
    Vec oracle = 2.0 * gf.dot(y) * y - y.squaredNorm() * gf;
    CHECK((2.0 * spray(s, x, y) - oracle).norm() < 1e-8 * std::max(1.0, oracle.norm()));
  }

  auto fk = zoo::funk(2);
  Vec x = v2(0.2, -0.5), y = v2(0.7, 0.4);
  CHECK((spray(fk, x, 2.0 * y) - 4.0 * spray(fk, x, y)).norm() < 1e-10);
}

TEST_CASE("ricci on constant-curvature charts") {
  std::mt19937_64 rng(2);
  struct Case {
    MetricInstance m;
    double k;
  };
  std::vector<Case> cases = {{zoo::euclidean(2), 0.0}, {zoo::round_sphere(2), 1.0}, {zoo::hyperbolic(2), -1.0},
                             {zoo::round_sphere(3), 2.0}, {zoo::hyperbolic(3), -2.0}};
  for (const auto& c : cases) {
    for (int k = 0; k < 10; ++k) {
      Vec x = fixtures::random_point(c.m, rng);
      Vec y = unit(c.m, x, fixtures::random_vector(c.m.dim(), rng));
      CHECK(std::abs(ricci(c.m, x, y) - c.k) < 1e-6);
    }
  }
  auto s1 = zoo::round_sphere(1);
  CHECK(std::abs(ricci(s1, Vec::Constant(1, 0.3), Vec::Constant(1, 1.0))) < 1e-12);
}

TEST_CASE("s-curvature examples") {
  std::mt19937_64 rng(3);
  auto vol = MeasureSpec::riemannian_volume();
  for (const auto& m : {zoo::round_sphere(2), zoo::hyperbolic(2), zoo::euclidean(2)}) {
    Vec x = fixtures::random_point(m, rng);
    Vec y = fixtures::random_vector(2, rng);
    CHECK(std::abs(s_curvature(m, vol, x, y)) < 1e-8);
    CHECK(std::abs(s_dot(m, vol, x, y)) < 1e-8);
  }
  auto e = zoo::euclidean(2);
  for (double K : {0.5, 1.0, 3.0}) {
    auto g = MeasureSpec::gaussian(K);
    Vec x = v2(0.4, -1.3), y = unit(e, x, v2(0.6, 0.8));
    CHECK(s_curvature(e, g, x, y) == doctest::Approx(K * x.dot(y)).epsilon(1e-12));
    CHECK(s_dot(e, g, x, y) == doctest::Approx(K).epsilon(1e-12));
  }
  auto f = zoo::funk(2);
  auto bh = MeasureSpec::busemann_hausdorff();
  for (int k = 0; k < 10; ++k) {
    Vec x = fixtures::random_point(f, rng);
    Vec y = unit(f, x, fixtures::random_vector(2, rng));
    CHECK(std::abs(s_curvature(f, bh, x, y) - 1.5) < 1e-6);
    CHECK(std::abs(s_dot(f, bh, x, y)) < 1e-6);
    CHECK(std::abs(ricci(f, x, y) + 0.25) < 1e-6);
  }
}

TEST_CASE("weighted ricci examples and validation") {
  auto e = zoo::euclidean(2);
  auto g = MeasureSpec::gaussian(2.0);
  Vec x = v2(0.5, 0.25), y = v2(0.6, 0.8);
  CHECK(weighted_ricci(e, g, x, y, {}) == doctest::Approx(2.0).epsilon(1e-12));
  WeightedRicciParams p;
  p.N = 5.0;
  const double xy = x.dot(y);
  CHECK(weighted_ricci(e, g, x, y, p) == doctest::Approx(2.0 - 4.0 * xy * xy / 3.0).epsilon(1e-12));

  auto s = zoo::round_sphere(2);
  auto vol = MeasureSpec::riemannian_volume();
  Vec xs = v2(0.3, 0.1), ys = unit(s, xs, v2(1.0, -0.5));
  WeightedRicciParams pn;
  pn.N = 2.0;
  CHECK_THROWS_AS(weighted_ricci(s, vol, xs, ys, pn), ParameterError);
  pn.allow_n_equals_dim = true;
  CHECK(weighted_ricci(s, vol, xs, ys, pn) == doctest::Approx(1.0).epsilon(1e-6));
  for (double N : {2.5, 10.0, kInfiniteN}) {
    WeightedRicciParams q;
    q.N = N;
    CHECK(weighted_ricci(s, vol, xs, ys, q) == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK(std::isinf(weighted_ricci(e, g, x, y, pn)));
  WeightedRicciParams bad;
  bad.N = 1.5;
  CHECK_THROWS_AS(weighted_ricci(e, g, x, y, bad), ParameterError);
}

TEST_CASE("ricci bound scan examples") {
  auto e = zoo::euclidean(2);
  ScanGrid grid;
  grid.points = box_grid(e, v2(0, 0), 2.0, 5);
  grid.directions = 12;
  auto b = ricci_bound_scan(e, MeasureSpec::gaussian(1.0), {}, grid);
  CHECK(std::abs(b.inf_ric_N - 1.0) < 1e-8);
  CHECK(b.samples == static_cast<int>(grid.points.size()) * 12);

  auto s = zoo::round_sphere(2);
  ScanGrid gs;
  gs.points = box_grid(s, v2(0, 0), 1.5, 5);
  WeightedRicciParams pn;
  pn.N = 2.0;
  pn.allow_n_equals_dim = true;
  auto bs = ricci_bound_scan(s, MeasureSpec::riemannian_volume(), pn, gs);
  CHECK(std::abs(bs.inf_ric_N - 1.0) < 1e-6);

  auto b0 = ricci_bound_scan(e, MeasureSpec::riemannian_volume(), {}, grid);
  CHECK(std::abs(b0.inf_ric_N) < 1e-12);
  ScanGrid empty;
  CHECK_THROWS_AS(ricci_bound_scan(e, MeasureSpec::riemannian_volume(), {}, empty), ParameterError);
}

TEST_CASE("serial and parallel scans agree exactly") {
  auto r = fixtures::randers2();
  ScanGrid grid;
  grid.points = box_grid(r, v2(0, 0), 0.8, 4);
  grid.directions = 8;
  WeightedRicciParams p;
  p.N = 4.0;
  auto a = ricci_bound_scan(r, MeasureSpec::busemann_hausdorff(), p, grid);
  auto b = ricci_bound_scan_serial(r, MeasureSpec::busemann_hausdorff(), p, grid);
  CHECK(a.inf_ric_N == b.inf_ric_N);
  CHECK(a.s_min == b.s_min);
  CHECK(a.s_max == b.s_max);
  CHECK(a.tau_abs_max == b.tau_abs_max);
  CHECK(a.argmin_x == b.argmin_x);
}

TEST_CASE("curvature homogeneity") {
  std::mt19937_64 rng(4);
  auto bh = MeasureSpec::busemann_hausdorff();
  for (const auto& m : {zoo::funk(2), fixtures::randers2(), fixtures::asym()}) {
    for (int k = 0; k < 5; ++k) {
      Vec x = fixtures::random_point(m, rng);
      Vec y = fixtures::random_vector(m.dim(), rng);
      auto c = curvature_sample(m, bh, x, y, {});
      for (double lam : {0.5, 2.0, 7.0}) {
        auto d = curvature_sample(m, bh, x, lam * y, {});
        auto rel = [](double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * std::max(scale, 1e-6); };
        CHECK(rel(d.ric, lam * lam * c.ric, std::abs(lam * lam * c.ric) + lam * lam));
        CHECK(rel(d.s_dot, lam * lam * c.s_dot, std::abs(lam * lam * c.s_dot) + lam * lam));
        CHECK(rel(d.s, lam * c.s, std::abs(lam * c.s) + lam));
      }
    }
  }
}

TEST_CASE("weighted ricci consistency and monotonicity in N") {
  std::mt19937_64 rng(6);
  auto m = fixtures::randers2();
  auto bh = MeasureSpec::busemann_hausdorff();
  for (int k = 0; k < 10; ++k) {
    Vec x = fixtures::random_point(m, rng);
    Vec y = unit(m, x, fixtures::random_vector(2, rng));
    auto c = curvature_sample(m, bh, x, y, {});
    CHECK(c.ric_N == c.ric + c.s_dot);
    if (std::abs(c.s) <= 1e-6) continue;
    double prev = -std::numeric_limits<double>::infinity();
    for (double N : {2.1, 3.0, 5.0, 50.0, kInfiniteN}) {
      WeightedRicciParams p;
      p.N = N;
      double v = weighted_ricci(m, bh, x, y, p);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("riemannian reduction with a weighted measure") {
  // sigma = exp(-psi0) in coordinates; relative to vol_g the weight is
  // psi = psi0 + ln sqrt det g.
  auto s = zoo::round_sphere(2);
  Vec k = v2(0.7, 1.3), l = v2(0.2, -0.4);
  auto mu = MeasureSpec::custom_exponential(k, l);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    Vec x = fixtures::random_point(s, rng);
    Vec y = unit(s, x, fixtures::random_vector(2, rng));
    auto psi = jet2_eval<2>(
        [&](const auto& v) {
          auto r2 = v[0] * v[0] + v[1] * v[1];
          auto psi0 = v[0] * v[0] * (0.5 * k[0]) + v[1] * v[1] * (0.5 * k[1]) + v[0] * l[0] + v[1] * l[1];
          return psi0 + 2.0 * log(2.0 / (r2 + 1.0));
        },
        {x[0], x[1]});
    Vec G = spray(s, x, y);
    double hess = 0.0, dpsi = 0.0;
    for (int i = 0; i < 2; ++i) {
      dpsi += psi.g[i] * y[i];
      hess -= 2.0 * G[i] * psi.g[i];
      for (int j = 0; j < 2; ++j) hess += psi.hess(i, j) * y[i] * y[j];
    }
    for (double N : {3.0, 6.0}) {
      WeightedRicciParams p;
      p.N = N;
      double oracle = 1.0 + hess - dpsi * dpsi / (N - 2.0);
      CHECK(std::abs(weighted_ricci(s, mu, x, y, p) - oracle) < 1e-6);
    }
  }
}
