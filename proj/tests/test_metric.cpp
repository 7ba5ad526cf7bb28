#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "finsler/metric.hpp"
#include "fixtures.hpp"

using namespace finsler;

namespace {
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
Vec v1(double a) { return Vec::Constant(1, a); }
}  // namespace

TEST_CASE("fundamental tensor examples") {
  auto e = zoo::euclidean(2);
  CHECK((fundamental_tensor(e, v2(0.3, 7.0), v2(1, 0)) - Mat::Identity(2, 2)).norm() < 1e-15);

  auto s = zoo::round_sphere(2);
  Vec x = v2(0.4, -0.2);
  Mat g1 = fundamental_tensor(s, x, v2(1.0, 0.3));
  Mat g2 = fundamental_tensor(s, x, v2(-0.2, 2.5));
  CHECK((g1 - g2).norm() < 1e-12);

  auto r = fixtures::randers2();
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    Vec px = fixtures::random_point(r, rng);
    Vec y = fixtures::random_vector(2, rng);
    double F = r.F(px, y);
    CHECK(std::abs(y.dot(fundamental_tensor(r, px, y) * y) - F * F) < 1e-12 * std::max(1.0, F * F));
  }
  CHECK_THROWS_AS(fundamental_tensor(e, v2(0, 0), v2(0, 0)), DegenerateDirectionError);
}

TEST_CASE("dual norm examples") {
  auto e = zoo::euclidean(2);
  CHECK(dual_norm(e, v2(1, 2), v2(3, 4)) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(dual_norm(e, v2(1, 2), v2(0, 0)) == 0.0);

  auto a = fixtures::asym();
  for (double x : {0.1, 0.37, 0.8}) {
    double ax = 1.0 + 0.3 * std::sin(2 * M_PI * x);
    double bx = 2.0 + 0.5 * std::cos(2 * M_PI * x);
    CHECK(dual_norm(a, v1(x), v1(1.7)) == doctest::Approx(1.7 / ax).epsilon(1e-12));
    CHECK(dual_norm_sampled(a, v1(x), v1(1.7)) == doctest::Approx(1.7 / ax).epsilon(1e-12));
    CHECK(dual_norm(a, v1(x), v1(-1.7)) == doctest::Approx(1.7 / bx).epsilon(1e-12));
  }
}

TEST_CASE("legendre examples, dual norm identity and round trip on the zoo") {
  auto e = zoo::euclidean(3);
  Vec y(3);
  y << 0.3, -1.0, 2.0;
  CHECK((legendre(e, Vec::Zero(3), y) - y).norm() < 1e-15);
  CHECK(legendre(e, Vec::Zero(3), Vec::Zero(3)).norm() == 0.0);
  CHECK((legendre_inverse(e, Vec::Zero(3), y) - y).norm() < 1e-14);
  CHECK(legendre_inverse(e, Vec::Zero(3), Vec::Zero(3)).norm() == 0.0);

  std::mt19937_64 rng(5);
  for (const auto& m : fixtures::zoo_all()) {
    for (int k = 0; k < 100; ++k) {
      Vec x = fixtures::random_point(m, rng);
      Vec yy = fixtures::random_vector(m.dim(), rng);
      Vec xi = legendre(m, x, yy);
      CHECK(std::abs(dual_norm(m, x, xi) - m.F(x, yy)) < 1e-9 * std::max(1.0, m.F(x, yy)));
      CHECK((legendre_inverse(m, x, xi) - yy).norm() < 1e-9 * std::max(1.0, yy.norm()));
    }
  }
}

TEST_CASE("legendre inverse on asym1d and funk") {
  auto a = fixtures::asym();
  double ax = 1.0 + 0.3 * std::sin(2 * M_PI * 0.2);
  CHECK(legendre_inverse(a, v1(0.2), v1(0.9))[0] == doctest::Approx(0.9 / (ax * ax)).epsilon(1e-12));

  auto f = zoo::funk(2);
  std::mt19937_64 rng(9);
  for (int k = 0; k < 100; ++k) {
    Vec x = fixtures::random_point(f, rng);
    Vec xi = fixtures::random_vector(2, rng);
    Vec y = legendre_inverse(f, x, xi);
    CHECK((legendre(f, x, y) - xi).norm() < 1e-9);
  }
}

TEST_CASE("gradient examples") {
  auto e = zoo::euclidean(2);
  CHECK(gradient(e, v2(1, 1), v2(0, 0)).norm() == 0.0);
  CHECK((gradient(e, v2(1, 1), v2(0.5, -2)) - v2(0.5, -2)).norm() < 1e-14);
  auto f = zoo::funk(2);
  std::mt19937_64 rng(13);
  for (int k = 0; k < 50; ++k) {
    Vec x = fixtures::random_point(f, rng);
    Vec du = fixtures::random_vector(2, rng);
    CHECK(std::abs(f.F(x, gradient(f, x, du)) - dual_norm(f, x, du)) < 1e-9);
  }
}

TEST_CASE("reversibility examples") {
  CHECK(reversibility(zoo::euclidean(2), 20, 64, 1).value == doctest::Approx(1.0).epsilon(1e-12));
  zoo::Asym1DParams p;
  p.a0 = 1.0;
  p.b0 = 2.0;
  CHECK(reversibility(zoo::asym1d(p), 20, 2, 1).value == doctest::Approx(2.0).epsilon(1e-12));

  Mat A = Mat::Identity(2, 2);
  auto r = zoo::randers(A, v2(0.5, 0.0), Mat::Zero(2, 2), v2(-1, -1), v2(1, 1));
  double lam1 = reversibility(r, 16, 512, 3).value;
  double lam2 = reversibility(r, 32, 1024, 3).value;
  CHECK(lam1 > 1.0);
  CHECK(lam1 <= 3.0);
  CHECK(std::abs(lam2 - lam1) < 0.01 * lam1);
  CHECK(lam2 == doctest::Approx(3.0).epsilon(1e-4));
}

TEST_CASE("metric invariants on the zoo") {
  std::mt19937_64 rng(21);
  for (const auto& m : fixtures::zoo_all()) {
    for (int k = 0; k < 50; ++k) {
      Vec x = fixtures::random_point(m, rng);
      Vec y = fixtures::random_vector(m.dim(), rng);
      const double F = m.F(x, y);
      CHECK(F > 0.0);
      for (double lam : {0.5, 2.0, 7.0}) CHECK(std::abs(m.F(x, lam * y) - lam * F) < 1e-12 * lam * F);
      Mat g = fundamental_tensor(m, x, y);
      Mat g2 = fundamental_tensor(m, x, 3.0 * y);
      CHECK((g - g2).norm() < 1e-12 * g.norm());
      CHECK(std::abs(y.dot(g * y) - F * F) < 1e-12 * F * F);
      Eigen::SelfAdjointEigenSolver<Mat> es(g);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("sampled dual norm agrees with the Legendre identity") {
  std::mt19937_64 rng(4);
  for (const auto& m : fixtures::zoo_all()) {
    if (m.dim() > 2) continue;
    for (int k = 0; k < 10; ++k) {
      Vec x = fixtures::random_point(m, rng);
      Vec xi = fixtures::random_vector(m.dim(), rng);
      const double exact = dual_norm(m, x, xi);
      CHECK(std::abs(dual_norm_sampled(m, x, xi, 4096) - exact) < 1e-6 * std::max(1.0, exact));
    }
  }
}

TEST_CASE("zoo constructors validate parameters") {
  CHECK_THROWS_AS(zoo::euclidean(4), ParameterError);
  CHECK_THROWS_AS(zoo::randers(Mat::Identity(2, 2), v2(0.9, 0.0), Mat::Identity(2, 2), v2(-1, -1), v2(1, 1)),
                  ParameterError);
  zoo::Asym1DParams p;
  p.a1 = 2.0;
  CHECK_THROWS_AS(zoo::asym1d(p), ParameterError);
  CHECK_THROWS_AS(zoo::riemannian_constant(-Mat::Identity(2, 2)), ParameterError);
}
