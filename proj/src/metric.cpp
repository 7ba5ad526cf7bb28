#include "finsler/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "finsler/calculus.hpp"

namespace finsler {

// ------------------------------------------------------------------- Chart

Chart Chart::unbounded(int n) {
  Chart c;
  c.lo = Vec::Constant(n, -std::numeric_limits<double>::infinity());
  c.hi = Vec::Constant(n, std::numeric_limits<double>::infinity());
  c.periodic.assign(n, false);
  return c;
}

Chart Chart::box(const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size()) throw ParameterError("chart box bounds differ in dimension");
  for (int i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw ParameterError("chart box is empty");
  Chart c;
  c.lo = lo;
  c.hi = hi;
  c.periodic.assign(lo.size(), false);
  return c;
}

Chart Chart::ball(int n, double radius) {
  Chart c = box(Vec::Constant(n, -radius), Vec::Constant(n, radius));
  c.ball_radius = radius;
  return c;
}

bool Chart::contains(const Vec& x) const {
  if (x.size() != lo.size()) return false;
  for (int i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) return false;
    if (periodic[i]) continue;
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  }
  return x.norm() < ball_radius;
}

Vec Chart::wrap(const Vec& x) const {
  Vec r = x;
  for (int i = 0; i < x.size(); ++i) {
    if (!periodic[i]) continue;
    const double L = hi[i] - lo[i];
    r[i] = lo[i] + std::fmod(std::fmod(x[i] - lo[i], L) + L, L);
  }
  return r;
}

void Chart::sampling_box(double limit, Vec& lo_out, Vec& hi_out) const {
  lo_out = lo.cwiseMax(-limit);
  hi_out = hi.cwiseMin(limit);
  if (std::isfinite(ball_radius)) {
    lo_out = lo_out.cwiseMax(-ball_radius);
    hi_out = hi_out.cwiseMin(ball_radius);
  }
}

// --------------------------------------------------------------- instances

MetricInstance::MetricInstance(std::string name, Chart chart, std::shared_ptr<const MetricModel> model)
    : name_(std::move(name)), chart_(std::move(chart)), model_(std::move(model)) {
  if (!model_) throw ParameterError("metric model is null");
  if (chart_.dim() != model_->dim()) throw ParameterError("chart and metric dimensions differ");
}

double MetricInstance::F(const Vec& x, const Vec& y) const {
  const int n = dim();
  if (x.size() != n || y.size() != n) throw ParameterError("F: wrong vector dimension");
  if (y.squaredNorm() == 0.0) return 0.0;
  return model_->eval(std::span<const double>(x.data(), n), std::span<const double>(y.data(), n));
}

namespace {

template <typename T>
T sum_squares(std::span<const T> v) {
  T s = v[0] * v[0];
  for (std::size_t i = 1; i < v.size(); ++i) s = s + v[i] * v[i];
  return s;
}

template <typename T>
T inner(std::span<const T> a, std::span<const T> b) {
  T s = a[0] * b[0];
  for (std::size_t i = 1; i < a.size(); ++i) s = s + a[i] * b[i];
  return s;
}

class EuclideanModel : public MetricModelT<EuclideanModel> {
 public:
  explicit EuclideanModel(int n) : n_(n) {}
  int dim() const override { return n_; }
  bool riemannian() const override { return true; }
  template <typename T>
  T F(std::span<const T>, std::span<const T> y) const {
    return sqrt(sum_squares(y));
  }

 private:
  int n_;
};

class ConstantRiemannianModel : public MetricModelT<ConstantRiemannianModel> {
 public:
  explicit ConstantRiemannianModel(Mat A) : A_(std::move(A)) {}
  int dim() const override { return static_cast<int>(A_.rows()); }
  bool riemannian() const override { return true; }
  template <typename T>
  T F(std::span<const T>, std::span<const T> y) const {
    return sqrt(quad(A_, y));
  }

  template <typename T>
  static T quad(const Mat& A, std::span<const T> y) {
    T s = y[0] * y[0] * A(0, 0);
    for (int i = 0; i < A.rows(); ++i)
      for (int j = 0; j < A.cols(); ++j)
        if (i + j > 0) s = s + y[i] * y[j] * A(i, j);
    return s;
  }

 private:
  Mat A_;
};

/// F = 2|y| / (1 + sign |x|^2 / R^2): sign = +1 sphere, -1 hyperbolic.
class ConformalModel : public MetricModelT<ConformalModel> {
 public:
  ConformalModel(int n, double radius, double sign) : n_(n), inv_r2_(sign / (radius * radius)) {}
  int dim() const override { return n_; }
  bool riemannian() const override { return true; }
  template <typename T>
  T F(std::span<const T> x, std::span<const T> y) const {
    T denom = sum_squares(x) * inv_r2_ + 1.0;
    return 2.0 * sqrt(sum_squares(y)) / denom;
  }

 private:
  int n_;
  double inv_r2_;
};

class RandersModel : public MetricModelT<RandersModel> {
 public:
  RandersModel(Mat A, Vec b0, Mat B) : A_(std::move(A)), b0_(std::move(b0)), B_(std::move(B)) {}
  int dim() const override { return static_cast<int>(A_.rows()); }
  template <typename T>
  T F(std::span<const T> x, std::span<const T> y) const {
    T alpha = sqrt(ConstantRiemannianModel::quad(A_, y));
    T beta = T(0.0);
    for (int i = 0; i < dim(); ++i) {
      T bi = T(b0_[i]);
      for (int j = 0; j < dim(); ++j) bi = bi + x[j] * B_(i, j);
      beta = beta + bi * y[i];
    }
    return alpha + beta;
  }

 private:
  Mat A_;
  Vec b0_;
  Mat B_;
};

class FunkModel : public MetricModelT<FunkModel> {
 public:
  explicit FunkModel(int n) : n_(n) {}
  int dim() const override { return n_; }
  template <typename T>
  T F(std::span<const T> x, std::span<const T> y) const {
    T xx = sum_squares(x);
    T yy = sum_squares(y);
    T xy = inner(x, y);
    T disc = yy - (xx * yy - xy * xy);
    return (sqrt(disc) + xy) / (1.0 - xx);
  }

 private:
  int n_;
};

class Asym1DModel : public MetricModelT<Asym1DModel> {
 public:
  explicit Asym1DModel(const zoo::Asym1DParams& p) : p_(p), k_(2.0 * std::numbers::pi / p.length) {}
  int dim() const override { return 1; }
  template <typename T>
  T F(std::span<const T> x, std::span<const T> y) const {
    using std::cos;
    using std::sin;
    T phase = (x[0] - p_.x0) * k_;
    if (primal(y[0]) > 0.0) return (sin(phase) * p_.a1 + p_.a0) * y[0];
    return (cos(phase) * p_.b1 + p_.b0) * (-y[0]);
  }

 private:
  zoo::Asym1DParams p_;
  double k_;
};

void require_spd(const Mat& A, const char* what) {
  if (A.rows() != A.cols() || A.rows() < 1 || A.rows() > 3)
    throw ParameterError(std::string(what) + ": matrix must be square of size 1..3");
  if ((A - A.transpose()).norm() > 1e-12 * (1.0 + A.norm()))
    throw ParameterError(std::string(what) + ": matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  if (!(es.eigenvalues().minCoeff() > 0.0))
    throw ParameterError(std::string(what) + ": matrix must be positive definite");
}

}  // namespace

namespace zoo {

MetricInstance euclidean(int n) {
  if (n < 1 || n > 3) throw ParameterError("euclidean: dimension must be 1, 2 or 3");
  return MetricInstance("euclidean", Chart::unbounded(n), std::make_shared<EuclideanModel>(n));
}

MetricInstance riemannian_constant(const Mat& A) {
  require_spd(A, "riemannian");
  return MetricInstance("riemannian", Chart::unbounded(static_cast<int>(A.rows())),
                        std::make_shared<ConstantRiemannianModel>(A));
}

MetricInstance round_sphere(int n, double radius, double chart_limit) {
  if (n < 1 || n > 3) throw ParameterError("sphere: dimension must be 1, 2 or 3");
  if (!(radius > 0.0) || !(chart_limit > 0.0)) throw ParameterError("sphere: radius must be positive");
  return MetricInstance("sphere", Chart::ball(n, chart_limit * radius),
                        std::make_shared<ConformalModel>(n, radius, 1.0));
}

MetricInstance hyperbolic(int n, double radius) {
  if (n < 1 || n > 3) throw ParameterError("hyperbolic: dimension must be 1, 2 or 3");
  if (!(radius > 0.0)) throw ParameterError("hyperbolic: radius must be positive");
  return MetricInstance("hyperbolic", Chart::ball(n, radius),
                        std::make_shared<ConformalModel>(n, radius, -1.0));
}

MetricInstance randers(const Mat& A, const Vec& b0, const Mat& B, const Vec& lo, const Vec& hi) {
  require_spd(A, "randers");
  const int n = static_cast<int>(A.rows());
  if (b0.size() != n || B.rows() != n || B.cols() != n || lo.size() != n || hi.size() != n)
    throw ParameterError("randers: inconsistent parameter dimensions");
  Chart chart = Chart::box(lo, hi);
  const Mat Ainv = A.inverse();
  for (int corner = 0; corner < (1 << n); ++corner) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = (corner >> i) & 1 ? hi[i] : lo[i];
    Vec b = b0 + B * x;
    if (!(std::sqrt(b.dot(Ainv * b)) < 1.0))
      throw ParameterError("randers: ||beta||_alpha must be < 1 on the chart box");
  }
  return MetricInstance("randers", chart, std::make_shared<RandersModel>(A, b0, B));
}

MetricInstance funk(int n) {
  if (n < 1 || n > 3) throw ParameterError("funk: dimension must be 1, 2 or 3");
  return MetricInstance("funk", Chart::ball(n, 1.0), std::make_shared<FunkModel>(n));
}

MetricInstance asym1d(const Asym1DParams& p) {
  if (!(p.length > 0.0)) throw ParameterError("asym1d: length must be positive");
  if (!(p.a0 > std::abs(p.a1)) || !(p.b0 > std::abs(p.b1)))
    throw ParameterError("asym1d: a(x) and b(x) must stay positive");
  Chart chart = Chart::box(Vec::Constant(1, p.x0), Vec::Constant(1, p.x0 + p.length));
  chart.periodic[0] = p.periodic;
  return MetricInstance("asym1d", chart, std::make_shared<Asym1DModel>(p));
}

}  // namespace zoo

// --------------------------------------------------------- pointwise calculus

namespace {

void require_nonzero(const Vec& y) {
  if (y.squaredNorm() == 0.0) throw DegenerateDirectionError();
}

std::string describe(const Vec& x, const Vec& y) {
  std::ostringstream os;
  os.precision(17);
  os << "x=(" << x.transpose() << "), y=(" << y.transpose() << ")";
  return os.str();
}

}  // namespace

Mat fundamental_tensor(const MetricInstance& m, const Vec& x, const Vec& y) {
  require_nonzero(y);
  return dispatch_dim(m.dim(), [&](auto nc) -> Mat {
    constexpr int n = decltype(nc)::value;
    auto g = calc::fundamental_tensor<n, double>(m, to_array<n>(x), to_array<n>(y));
    Mat G(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = g[i * n + j];
    Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0))
      throw ConvexityViolationError("fundamental tensor not positive definite at " + describe(x, y));
    return G;
  });
}

Vec legendre(const MetricInstance& m, const Vec& x, const Vec& y) {
  if (y.squaredNorm() == 0.0) return Vec::Zero(m.dim());
  return fundamental_tensor(m, x, y) * y;
}

Vec legendre_inverse(const MetricInstance& m, const Vec& x, const Vec& xi) {
  const int n = m.dim();
  if (xi.size() != n) throw ParameterError("legendre_inverse: wrong covector dimension");
  if (xi.squaredNorm() == 0.0) return Vec::Zero(n);
  constexpr double tol = 1e-12;
  constexpr int max_iter = 50;
  const double scale = xi.norm();
  Vec y = xi;
  Vec r = legendre(m, x, y) - xi;
  for (int it = 0; it < max_iter; ++it) {
    if (r.norm() <= tol * scale) return y;
    Mat g = fundamental_tensor(m, x, y);
    Vec step = g.ldlt().solve(-r);
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      Vec trial = y + lambda * step;
      if (trial.squaredNorm() > 0.0) {
        Vec rt = legendre(m, x, trial) - xi;
        if (rt.norm() < r.norm() || rt.norm() <= tol * scale) {
          y = trial;
          r = rt;
          accepted = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
  }
  if (r.norm() <= tol * scale) return y;
  throw InversionFailureError("legendre_inverse did not converge at x=(" + describe(x, xi) + ")",
                              r.norm());
}

Vec gradient(const MetricInstance& m, const Vec& x, const Vec& du) { return legendre_inverse(m, x, du); }

double dual_norm(const MetricInstance& m, const Vec& x, const Vec& xi) {
  if (xi.squaredNorm() == 0.0) return 0.0;
  return m.F(x, legendre_inverse(m, x, xi));
}

std::vector<Vec> sample_directions(int n, int count) {
  std::vector<Vec> dirs;
  if (n == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
    return dirs;
  }
  if (count < 1) throw ParameterError("sample_directions: count must be positive");
  dirs.reserve(count);
  if (n == 2) {
    for (int k = 0; k < count; ++k) {
      double th = 2.0 * std::numbers::pi * k / count;
      Vec u(2);
      u << std::cos(th), std::sin(th);
      dirs.push_back(u);
    }
    return dirs;
  }
  if (n != 3) throw ParameterError("sample_directions: dimension must be 1, 2 or 3");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    double z = 1.0 - (2.0 * k + 1.0) / count;
    double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    Vec u(3);
    u << rho * std::cos(golden * k), rho * std::sin(golden * k), z;
    dirs.push_back(u);
  }
  return dirs;
}

double dual_norm_sampled(const MetricInstance& m, const Vec& x, const Vec& xi, int directions) {
  double best = 0.0;
  for (const Vec& u : sample_directions(m.dim(), directions)) best = std::max(best, xi.dot(u) / m.F(x, u));
  return best;
}

ReversibilityEstimate reversibility(const MetricInstance& m, int points, int directions, std::uint64_t seed) {
  if (points < 1) throw ParameterError("reversibility: points must be positive");
  std::mt19937_64 rng(seed);
  Vec lo, hi;
  m.chart().sampling_box(2.0, lo, hi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto dirs = sample_directions(m.dim(), directions);
  ReversibilityEstimate est;
  est.points = points;
  est.directions = static_cast<int>(dirs.size());
  for (int p = 0; p < points; ++p) {
    Vec x(m.dim());
    do {
      for (int i = 0; i < m.dim(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * (0.05 + 0.9 * unit(rng));
    } while (!m.chart().contains(x) || x.norm() >= 0.95 * m.chart().ball_radius);
    for (const Vec& u : dirs) est.value = std::max(est.value, m.F(x, -u) / m.F(x, u));
  }
  return est;
}

}  // namespace finsler
