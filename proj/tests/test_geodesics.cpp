#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "finsler/curvature.hpp"
#include "finsler/geodesics.hpp"
#include "fixtures.hpp"

using namespace finsler;

namespace {
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
const auto kBH = MeasureSpec::busemann_hausdorff();
const auto kVol = MeasureSpec::riemannian_volume();
}  // namespace

TEST_CASE("euclidean geodesics are straight lines") {
  auto e = zoo::euclidean(2);
  Vec x0 = v2(0.3, -1.0), y0 = v2(0.6, 0.8);
  auto tr = integrate_geodesic(e, x0, y0, 3.0);
  CHECK_FALSE(tr.chart_exit);
  for (std::size_t k = 0; k < tr.t.size(); ++k) CHECK((tr.x[k] - (x0 + tr.t[k] * y0)).norm() < 1e-12);
  CHECK((exp_map(e, x0, y0) - (x0 + y0)).norm() < 1e-12);
  CHECK((exp_map(e, x0, Vec::Zero(2)) - x0).norm() == 0.0);
}

TEST_CASE("great circles on the sphere chart") {
  auto s = zoo::round_sphere(2);
  Vec p = v2(0.5, 0.0);
  Vec y = v2(-1.0, 0.0);
  y /= s.F(p, y);
  auto tr = integrate_geodesic(s, p, y, M_PI);
  CHECK((tr.x.back() - v2(-2.0, 0.0)).norm() < 1e-6);
  CHECK(tr.speed_drift < 1e-8 * M_PI);

  Vec u = v2(std::cos(0.3), std::sin(0.3));
  Vec yq = u * (M_PI / 2.0) / s.F(Vec::Zero(2), u);
  CHECK(std::abs(exp_map(s, Vec::Zero(2), yq).norm() - 1.0) < 1e-6);
}

TEST_CASE("funk geodesics from the origin are straight rays") {
  auto f = zoo::funk(2);
  Vec u = v2(std::cos(1.1), std::sin(1.1));
  auto tr = integrate_geodesic(f, Vec::Zero(2), u, 5.0);
  CHECK_FALSE(tr.chart_exit);
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    CHECK(std::abs(u[0] * tr.x[k][1] - u[1] * tr.x[k][0]) < 1e-8);
    CHECK(std::abs(tr.x[k].norm() - (1.0 - std::exp(-tr.t[k]))) < 1e-8);
  }
  CHECK(tr.speed_drift < 1e-8 * 5.0);
}

TEST_CASE("chart exit is flagged") {
  auto s = zoo::round_sphere(2);
  auto tr = integrate_geodesic(s, Vec::Zero(2), v2(0.5, 0.0), 3.2);
  CHECK(tr.chart_exit);
  CHECK(tr.t.back() < 3.2);
  CHECK(tr.t.back() > M_PI - 0.08);
}

TEST_CASE("jacobi determinant on model spaces") {
  auto e = zoo::euclidean(2);
  auto tre = jacobi_determinant(e, kBH, v2(0.1, 0.2), v2(1.0, 2.0), 2.0);
  for (std::size_t k = 0; k < tre.t.size(); ++k) CHECK(std::abs(tre.eta[k] - tre.t[k]) < 1e-12);
  CHECK(tre.cut == CutReason::Horizon);

  auto s = zoo::round_sphere(2);
  auto trs = jacobi_determinant(s, kVol, v2(0.5, 0.0), v2(-1.0, 0.0), 3.3);
  CHECK(trs.cut == CutReason::Conjugate);
  CHECK(std::abs(trs.i_y - M_PI) < 1e-4);
  for (std::size_t k = 0; k < trs.t.size(); ++k)
    if (trs.t[k] < M_PI) CHECK(std::abs(trs.eta[k] - std::sin(trs.t[k])) < 1e-4);

  auto h = zoo::hyperbolic(2);
  auto trh = jacobi_determinant(h, kVol, v2(0.1, -0.2), v2(0.3, 1.0), 2.0);
  for (std::size_t k = 0; k < trh.t.size(); ++k) CHECK(std::abs(trh.eta[k] - std::sinh(trh.t[k])) < 1e-4);

  auto s3 = zoo::round_sphere(3);
  Vec p3 = Vec::Zero(3), y3(3);
  y3 << 0.2, -0.5, 0.7;
  auto tr3 = jacobi_determinant(s3, kVol, p3, y3, 2.5);
  for (std::size_t k = 0; k < tr3.t.size(); ++k)
    CHECK(std::abs(tr3.eta[k] - std::pow(std::sin(tr3.t[k]), 2)) < 1e-4);
}

TEST_CASE("laplacian of the distance function") {
  auto e = zoo::euclidean(2);
  auto tre = jacobi_determinant(e, kBH, Vec::Zero(2), v2(0.6, -0.8), 3.0);
  auto le = laplacian_distance(tre);
  for (std::size_t k = 0; k < le.t.size(); ++k)
    if (le.t[k] >= 0.1) CHECK(std::abs(le.value[k] - 1.0 / le.t[k]) < 1e-4);

  auto s = zoo::round_sphere(2);
  auto trs = jacobi_determinant(s, kVol, v2(0.5, 0.0), v2(-1.0, 0.0), 3.0);
  auto ls = laplacian_distance(trs);
  int checked = 0;
  for (std::size_t k = 0; k < ls.t.size(); ++k) {
    if (ls.t[k] < 0.2 || ls.t[k] > 2.9) continue;
    CHECK(std::abs(ls.value[k] - 1.0 / std::tan(ls.t[k])) < 1e-3);
    ++checked;
  }
  CHECK(checked > 200);

  for (double K : {0.5, 1.0}) {
    auto trg = jacobi_determinant(e, MeasureSpec::gaussian(K), Vec::Zero(2), v2(1.0, 1.0), 2.5);
    auto lg = laplacian_distance(trg);
    for (std::size_t k = 0; k < lg.t.size(); ++k)
      if (lg.t[k] >= 0.1) CHECK(std::abs(lg.value[k] - (1.0 / lg.t[k] - K * lg.t[k])) < 1e-3);
  }
}

TEST_CASE("sphere and ball volumes") {
  auto e = zoo::euclidean(2);
  CHECK(sphere_volume(e, kBH, v2(0.3, 0.3), 1.0) == doctest::Approx(2.0 * M_PI).epsilon(1e-12));
  CHECK(std::abs(ball_volume(e, kBH, v2(0.3, 0.3), 1.0) - M_PI) < 1e-6);

  auto s = zoo::round_sphere(2);
  CHECK(std::abs(sphere_volume(s, kVol, Vec::Zero(2), M_PI / 2) / (2.0 * M_PI) - 1.0) < 5e-3);
  CHECK(std::abs(ball_volume(s, kVol, Vec::Zero(2), M_PI) / (4.0 * M_PI) - 1.0) < 5e-3);

  auto s3 = zoo::round_sphere(3);
  VolumeOptions o3;
  o3.directions = 128;
  CHECK(std::abs(ball_volume(s3, kVol, Vec::Zero(3), 1.0, o3) / (2.0 * M_PI * (1.0 - std::sin(2.0) / 2.0)) - 1.0) <
        1e-3);
}

TEST_CASE("ball volume report is monotone and consistent") {
  auto r = fixtures::randers2();
  std::vector<double> radii{0.1, 0.2, 0.3, 0.4, 0.5};
  auto rep = ball_volume_report(r, kBH, v2(0.1, 0.0), radii, 0.15);
  for (std::size_t k = 1; k < radii.size(); ++k) CHECK(rep.ball[k] > rep.ball[k - 1]);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    CHECK(std::abs(rep.annulus[k] - (rep.ball[k] - ball_volume(r, kBH, v2(0.1, 0.0), 0.15, {0, rep.step, true}))) <
          1e-6 * rep.ball.back());
  }
  CHECK(std::abs(annulus_volume(r, kBH, v2(0.1, 0.0), 0.15, 0.5) - rep.annulus.back()) < 1e-9);
}

TEST_CASE("serial and parallel direction sweeps agree exactly") {
  auto f = zoo::funk(2);
  VolumeOptions par, ser;
  par.directions = ser.directions = 32;
  ser.parallel = false;
  auto a = sphere_profile(f, kBH, v2(0.1, 0.2), 0.5, par);
  auto b = sphere_profile(f, kBH, v2(0.1, 0.2), 0.5, ser);
  CHECK(a.sphere == b.sphere);
  CHECK(a.cumulative == b.cumulative);
}

TEST_CASE("step halving and direction doubling change volumes by less than 0.2%") {
  auto r = fixtures::randers2();
  VolumeOptions coarse, fine;
  coarse.directions = 64;
  coarse.step = 0.01;
  fine.directions = 128;
  fine.step = 0.005;
  double a = ball_volume(r, kBH, v2(0.0, 0.1), 0.6, coarse);
  double b = ball_volume(r, kBH, v2(0.0, 0.1), 0.6, fine);
  CHECK(std::abs(a - b) < 2e-3 * b);
}

TEST_CASE("one-dimensional volumes") {
  auto a = fixtures::asym();
  auto mu = MeasureSpec::busemann_hausdorff();
  // The ball of radius r around p is [p - r_-, p + r_+] with F-lengths r.
  const double r = 0.05;
  const double vol = ball_volume(a, mu, Vec::Constant(1, 0.3), r);
  CHECK(vol > 0.0);
  auto e1 = zoo::euclidean(1);
  CHECK(std::abs(ball_volume(e1, mu, Vec::Constant(1, 0.0), 2.0) - 4.0) < 1e-12);
  CHECK(std::abs(sphere_volume(e1, MeasureSpec::gaussian(1.0), Vec::Constant(1, 0.0), 1.0) - 2.0 * std::exp(-0.5)) <
        1e-12);
}

TEST_CASE("trace csv export") {
  auto e = zoo::euclidean(2);
  auto tr = jacobi_determinant(e, kBH, Vec::Zero(2), v2(1.0, 0.0), 0.2);
  std::ostringstream os;
  write_trace_csv(os, tr);
  const std::string s = os.str();
  CHECK(s.rfind("t,x0,x1,eta,delta_rho\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == static_cast<long>(tr.t.size()) + 1);
}

TEST_CASE("s-curvature from distortion along geodesics") {
  // Oracle: centred differences of tau(gamma(t), gamma'(t)) along geodesics
  // integrated forwards and backwards.
  auto check = [](const MetricInstance& m, const Vec& x, const Vec& y) {
    const double h = 1e-3;
    auto fwd = integrate_geodesic(m, x, y, 2 * h, h / 8);
    auto bwd = integrate_geodesic(m, x, y, -2 * h, h / 8);
    auto tau = [&](const StateTrajectory& tr, int k) { return distortion(m, kBH, tr.x[k], tr.v[k]); };
    const int k1 = 8, k2 = 16;
    double d = (-tau(fwd, k2) + 8 * tau(fwd, k1) - 8 * tau(bwd, k1) + tau(bwd, k2)) / (12 * h);
    CHECK(std::abs(d - s_curvature(m, kBH, x, y)) < 1e-6);
    double dd = (tau(fwd, k1) - 2 * tau(fwd, 0) + tau(bwd, k1)) / (h * h);
    CHECK(std::abs(dd - s_dot(m, kBH, x, y)) < 1e-3);
  };
  std::mt19937_64 rng(17);
  for (const auto& m : {zoo::funk(2), fixtures::randers2()}) {
    for (int k = 0; k < 5; ++k) {
      Vec x = fixtures::random_point(m, rng, 0.6);
      Vec y = fixtures::random_vector(2, rng);
      check(m, x, y / m.F(x, y));
    }
  }
}
