#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "finsler/measure.hpp"
#include "fixtures.hpp"

using namespace finsler;

namespace {
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

/// Area of {y : F(x, y) < 1} by midpoint lattice counting over [-R, R]^2.
double indicatrix_area_lattice(const MetricInstance& m, const Vec& x, double R, int cells) {
  const double h = 2.0 * R / cells;
  long inside = 0;
  Vec y(2);
  for (int i = 0; i < cells; ++i) {
    y[0] = -R + (i + 0.5) * h;
    for (int j = 0; j < cells; ++j) {
      y[1] = -R + (j + 0.5) * h;
      if (m.F(x, y) < 1.0) ++inside;
    }
  }
  return inside * h * h;
}
}  // namespace

TEST_CASE("busemann-hausdorff density examples") {
  CHECK(bh_density(zoo::euclidean(2), v2(0.2, 5.0)) == doctest::Approx(1.0).epsilon(1e-14));
  Mat A = 4.0 * Mat::Identity(2, 2);
  CHECK(bh_density(zoo::riemannian_constant(A), v2(0, 0)) == doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("randers busemann-hausdorff density against closed form and lattice area") {
  Mat A = Mat::Identity(2, 2);
  auto r = zoo::randers(A, v2(0.5, 0.0), Mat::Zero(2, 2), v2(-1, -1), v2(1, 1));
  const double closed = std::pow(1.0 - 0.25, 1.5);
  const double sigma = bh_density(r, v2(0.1, 0.2));
  CHECK(sigma == doctest::Approx(closed).epsilon(1e-12));
  const double area = indicatrix_area_lattice(r, v2(0.1, 0.2), 2.1, 3000);
  CHECK(std::abs(M_PI / area - sigma) < 1e-4);
}

TEST_CASE("phi factor examples") {
  auto f = zoo::funk(2);
  CHECK(phi_factor(f, MeasureSpec::busemann_hausdorff(), v2(0.3, -0.4)) == doctest::Approx(1.0).epsilon(1e-14));
  auto e = zoo::euclidean(2);
  Vec x = v2(0.7, -1.1);
  CHECK(phi_factor(e, MeasureSpec::gaussian(1.0), x) ==
        doctest::Approx(std::exp(-0.5 * x.squaredNorm())).epsilon(1e-14));
  auto s = zoo::round_sphere(2);
  for (Vec p : {v2(0, 0), v2(0.5, 0.3), v2(-2.0, 1.0)})
    CHECK(std::abs(phi_factor(s, MeasureSpec::riemannian_volume(), p) - 1.0) < 1e-8);
}

TEST_CASE("distortion examples") {
  auto s = zoo::round_sphere(2);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    Vec x = fixtures::random_point(s, rng);
    Vec y = fixtures::random_vector(2, rng);
    CHECK(std::abs(distortion(s, MeasureSpec::riemannian_volume(), x, y)) < 1e-12);
  }
  auto e = zoo::euclidean(2);
  auto mu = MeasureSpec::custom_exponential(v2(1.0, 3.0), v2(0.5, -0.2));
  Vec x = v2(0.4, -0.6);
  const double psi = 0.5 * (0.16 + 3.0 * 0.36) + 0.5 * 0.4 + 0.2 * 0.6;
  CHECK(distortion(e, mu, x, v2(1, 0)) == doctest::Approx(psi).epsilon(1e-14));
  CHECK(distortion(e, mu, x, v2(-0.3, 2)) == doctest::Approx(psi).epsilon(1e-14));

  auto f = zoo::funk(2);
  auto bh = MeasureSpec::busemann_hausdorff();
  Vec p = v2(0.3, 0.2);
  double t1 = distortion(f, bh, p, v2(1, 0));
  double t2 = distortion(f, bh, p, v2(-1, 0));
  CHECK(std::isfinite(t1));
  CHECK(std::isfinite(t2));
  CHECK(std::abs(t1 - t2) > 1e-3);
  CHECK_THROWS_AS(distortion(f, bh, p, v2(0, 0)), DegenerateDirectionError);
}

TEST_CASE("riemannian busemann-hausdorff density equals sqrt det g") {
  std::mt19937_64 rng(8);
  Mat A3(3, 3);
  A3 << 2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.7;
  std::vector<MetricInstance> ms = {zoo::round_sphere(2), zoo::hyperbolic(2), zoo::round_sphere(3),
                                    zoo::hyperbolic(3), zoo::riemannian_constant(A3), zoo::round_sphere(1)};
  for (const auto& m : ms) {
    for (int k = 0; k < 10; ++k) {
      Vec x = fixtures::random_point(m, rng);
      const double sq = std::sqrt(fundamental_tensor(m, x, Vec::Unit(m.dim(), 0)).determinant());
      CHECK(std::abs(bh_density(m, x) - sq) < 1e-8 * sq);
      CHECK(std::abs(MeasureSpec::riemannian_volume().sigma(m, x) - sq) < 1e-12 * sq);
    }
  }
}

TEST_CASE("measure invariants") {
  std::mt19937_64 rng(12);
  auto mu = MeasureSpec::busemann_hausdorff();
  for (const auto& m : fixtures::zoo_all()) {
    for (int k = 0; k < 10; ++k) {
      Vec x = fixtures::random_point(m, rng);
      Vec y = fixtures::random_vector(m.dim(), rng);
      CHECK(phi_factor(m, MeasureSpec::gaussian(0.5), x) > 0.0);
      const double t = distortion(m, mu, x, y);
      CHECK(std::abs(distortion(m, mu, x, 2.5 * y) - t) < 1e-12 * std::max(1.0, std::abs(t)));
    }
    auto est = bh_density_checked(m, fixtures::random_point(m, rng));
    CHECK_FALSE(est.precision_warning);
  }
  CHECK_THROWS_AS(MeasureSpec::riemannian_volume().sigma(zoo::funk(2), v2(0, 0)), ParameterError);
}

TEST_CASE("unit ball constants") {
  CHECK(unit_sphere_area(1) == doctest::Approx(2.0));
  CHECK(unit_sphere_area(2) == doctest::Approx(2.0 * M_PI));
  CHECK(unit_sphere_area(3) == doctest::Approx(4.0 * M_PI));
  CHECK(unit_ball_volume(2) == doctest::Approx(M_PI));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0));
}
