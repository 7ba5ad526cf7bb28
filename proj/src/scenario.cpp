#include "finsler/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "finsler/analysis.hpp"
#include "finsler/comparison.hpp"
#include "finsler/curvature.hpp"
#include "finsler/errors.hpp"
#include "finsler/geodesics.hpp"

namespace finsler {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Strict config access: every read marks the key as used, finish() rejects the
// rest. Error messages carry the dotted path of the field.

class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const std::string p = key.empty() ? (path_.empty() ? "<root>" : path_) : field(key);
    throw ConfigurationError(p + ": " + what);
  }

  const json& get(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) fail(key, "required field is missing");
    return j_.at(key);
  }

  double num(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  double num(const std::string& key, double def) { return has(key) ? num(key) : (used_.insert(key), def); }

  // A number or the string "inf".
  double num_or_inf(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& v = get(key);
    if (v.is_string() && v.get<std::string>() == "inf") return kInfiniteN;
    if (!v.is_number()) fail(key, "expected a number or \"inf\"");
    return v.get<double>();
  }

  long integer(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long>();
  }
  long integer(const std::string& key, long def) { return has(key) ? integer(key) : (used_.insert(key), def); }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = get(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string str(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& key, const std::string& def) {
    return has(key) ? str(key) : (used_.insert(key), def);
  }

  std::vector<double> vec(const std::string& key) {
    const json& v = get(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> r;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(key, "element " + std::to_string(i) + " is not a number");
      r.push_back(v[i].get<double>());
    }
    return r;
  }

  Vec eigen_vec(const std::string& key) {
    const std::vector<double> v = vec(key);
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  Mat mat(const std::string& key) {
    const json& v = get(key);
    if (!v.is_array() || v.empty()) fail(key, "expected a non-empty array of rows");
    const std::size_t rows = v.size();
    std::size_t cols = 0;
    Mat A;
    for (std::size_t i = 0; i < rows; ++i) {
      if (!v[i].is_array()) fail(key, "row " + std::to_string(i) + " is not an array");
      if (i == 0) {
        cols = v[0].size();
        A.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
      }
      if (v[i].size() != cols) fail(key, "rows have different lengths");
      for (std::size_t k = 0; k < cols; ++k) {
        if (!v[i][k].is_number()) fail(key, "entry (" + std::to_string(i) + "," + std::to_string(k) + ") is not a number");
        A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v[i][k].get<double>();
      }
    }
    return A;
  }

  /// A missing child reads as an empty object, so all its fields take defaults.
  Node child(const std::string& key) {
    static const json empty = json::object();
    if (!has(key)) {
      used_.insert(key);
      return Node(empty, field(key));
    }
    get(key);
    return Node(j_.at(key), field(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(it.key(), "unknown field");
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class T>
T positive(Node& n, const std::string& key, T v) {
  if (!(v > 0)) n.fail(key, "must be positive");
  return v;
}

// ---------------------------------------------------------------------------
// Builders.

MetricInstance build_metric(Node n) {
  const std::string name = n.str("name");
  MetricInstance m = [&]() -> MetricInstance {
    if (name == "euclidean") return zoo::euclidean(static_cast<int>(n.integer("n")));
    if (name == "riemannian_constant") return zoo::riemannian_constant(n.mat("A"));
    if (name == "round_sphere")
      return zoo::round_sphere(static_cast<int>(n.integer("n")), n.num("radius", 1.0), n.num("chart_limit", 30.0));
    if (name == "hyperbolic") return zoo::hyperbolic(static_cast<int>(n.integer("n")), n.num("radius", 1.0));
    if (name == "randers")
      return zoo::randers(n.mat("A"), n.eigen_vec("b0"), n.mat("B"), n.eigen_vec("lo"), n.eigen_vec("hi"));
    if (name == "funk") return zoo::funk(static_cast<int>(n.integer("n")));
    if (name == "asym1d") {
      zoo::Asym1DParams p;
      p.a0 = n.num("a0", 1.0);
      p.a1 = n.num("a1", 0.0);
      p.b0 = n.num("b0", 1.0);
      p.b1 = n.num("b1", 0.0);
      p.x0 = n.num("x0", 0.0);
      p.length = n.num("length");
      p.periodic = n.boolean("periodic", true);
      return zoo::asym1d(p);
    }
    n.fail("name", "unknown metric '" + name + "'");
  }();
  n.finish();
  return m;
}

MeasureSpec build_measure(Node n) {
  const std::string name = n.str("name");
  MeasureSpec mu = [&]() -> MeasureSpec {
    if (name == "busemann_hausdorff")
      return MeasureSpec::busemann_hausdorff(static_cast<int>(n.integer("quad_order", 0)));
    if (name == "riemannian_volume") return MeasureSpec::riemannian_volume();
    if (name == "gaussian") return MeasureSpec::gaussian(n.num("K"));
    if (name == "custom_exponential") return MeasureSpec::custom_exponential(n.eigen_vec("k"), n.eigen_vec("l"));
    n.fail("name", "unknown measure '" + name + "'");
  }();
  n.finish();
  return mu;
}

ChiFamily build_family(Node n, int dim) {
  const std::string kind = n.str("kind");
  ChiFamily f;
  if (kind == "sin_power") {
    f = ChiFamily::sin_power(n.num("c"), n.num("n", dim), n.num("delta", 0.0), n.boolean("weighted", false));
  } else if (kind == "distortion_power") {
    f = ChiFamily::distortion_power(n.num("c"), n.num("n", dim), n.num("k"));
  } else if (kind == "n_power") {
    f = ChiFamily::n_power(n.num("K"), n.num("N"));
  } else if (kind == "log_concave_exp") {
    // m_o is measured by the Laplacian comparison run.
    f = ChiFamily::log_concave_exp(0.0, n.num("K"), n.num("rho_o", 0.0));
  } else {
    n.fail("kind", "unknown comparison family '" + kind + "'");
  }
  n.finish();
  return f;
}

struct CertificateSpec {
  Vec center;
  double radius = 1.0;
  int per_axis = 7;
  int directions = 12;
  WeightedRicciParams params;
};

CertificateSpec parse_certificate(Node n, const Vec& p, double default_radius) {
  CertificateSpec c;
  c.center = n.has("center") ? n.eigen_vec("center") : p;
  if (c.center.size() != p.size()) n.fail("center", "dimension does not match the metric");
  c.radius = positive(n, "radius", n.num("radius", default_radius));
  c.per_axis = static_cast<int>(positive(n, "per_axis", n.integer("per_axis", 7)));
  c.directions = static_cast<int>(positive(n, "directions", n.integer("directions", 12)));
  c.params.N = n.num_or_inf("N", kInfiniteN);
  c.params.allow_n_equals_dim = n.boolean("allow_n_equals_dim", false);
  n.finish();
  return c;
}

RicciBound run_certificate(const MetricInstance& m, const MeasureSpec& mu, const CertificateSpec& c, bool parallel) {
  validate_weighted_params(c.params, m.dim());
  ScanGrid g;
  g.points = box_grid(m, c.center, c.radius, c.per_axis);
  g.directions = c.directions;
  if (g.points.empty()) throw ConfigurationError("certificate: no scan points inside the chart");
  return parallel ? ricci_bound_scan(m, mu, c.params, g) : ricci_bound_scan_serial(m, mu, c.params, g);
}

struct GridConfig {
  int M = 256;
  GridSpec spec;
};

GridConfig parse_grid(Node n) {
  GridConfig g;
  g.M = static_cast<int>(n.integer("M"));
  if (g.M < 3) n.fail("M", "needs at least 3 nodes");
  g.spec.lo = n.num("lo");
  g.spec.hi = n.num("hi");
  g.spec.periodic = n.boolean("periodic", true);
  const std::string fw = n.str("face_weights", "midpoint");
  if (fw == "midpoint")
    g.spec.face_weights = FaceWeights::Midpoint;
  else if (fw == "drift_matched")
    g.spec.face_weights = FaceWeights::DriftMatched;
  else
    n.fail("face_weights", "expected \"midpoint\" or \"drift_matched\"");
  n.finish();
  return g;
}

// Initial data for the 1D verifiers.
struct FunctionSpec {
  std::string kind = "random";
  int count = 1;
  int modes = 6;
  double amplitude = 1.0;
  double frequency = 1.0;
};

FunctionSpec parse_function(Node n) {
  FunctionSpec f;
  f.kind = n.str("kind");
  if (f.kind != "random" && f.kind != "sin" && f.kind != "cos" && f.kind != "linear" && f.kind != "constant")
    n.fail("kind", "expected one of random, sin, cos, linear, constant");
  f.count = static_cast<int>(positive(n, "count", n.integer("count", 1)));
  f.modes = static_cast<int>(positive(n, "modes", n.integer("modes", 6)));
  f.amplitude = n.num("amplitude", 1.0);
  f.frequency = n.num("frequency", 1.0);
  n.finish();
  return f;
}

std::vector<std::vector<double>> make_functions(const Grid1D& G, const FunctionSpec& f, std::mt19937_64& rng) {
  std::vector<std::vector<double>> out;
  for (int k = 0; k < f.count; ++k) {
    std::vector<double> u(G.M, f.amplitude);
    if (f.kind == "random") {
      u = random_smooth(G, rng(), f.modes);
      for (double& v : u) v *= f.amplitude;
    } else if (f.kind != "constant") {
      for (int j = 0; j < G.M; ++j) {
        const double x = G.x[j];
        if (f.kind == "sin") u[j] = f.amplitude * std::sin(f.frequency * x);
        if (f.kind == "cos") u[j] = f.amplitude * std::cos(f.frequency * x);
        if (f.kind == "linear") u[j] = f.amplitude * x;
      }
    }
    out.push_back(std::move(u));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report helpers.

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

// Infinite values are written as strings so the report stays valid JSON.
json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json to_json(const RicciBound& r) {
  return {{"N", num(r.N)},
          {"inf_ric", num(r.inf_ric)},
          {"inf_ric_inf", num(r.inf_ric_inf)},
          {"inf_ric_N", num(r.inf_ric_N)},
          {"s_min", num(r.s_min)},
          {"s_max", num(r.s_max)},
          {"tau_abs_max", num(r.tau_abs_max)},
          {"samples", r.samples},
          {"argmin_x", to_json(r.argmin_x)},
          {"argmin_y", to_json(r.argmin_y)}};
}

json to_json(const ChiFamily& f) {
  return {{"kind", to_string(f.kind)}, {"name", f.name()}, {"c", f.c},       {"n", f.n},
          {"delta", f.delta},          {"k", f.k},          {"K", f.K},       {"N", num(f.N)},
          {"m_o", f.m_o},              {"rho_o", f.rho_o},  {"weighted", f.weighted},
          {"rho_lo", num(f.rho_lo())}, {"t_hi", num(f.t_hi())}};
}

json to_json(const Verdict& v) {
  json j = {{"name", v.name},          {"passed", v.passed},       {"hypothesis", v.hypothesis},
            {"value", num(v.value)},   {"tolerance", num(v.tolerance)}, {"margin", num(v.margin)}};
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

// Verdict for value <= tol.
Verdict at_most(std::string name, double value, double tol, std::string note = {}) {
  Verdict v;
  v.name = std::move(name);
  v.value = value;
  v.tolerance = tol;
  v.margin = tol - value;
  v.passed = value <= tol;
  v.note = std::move(note);
  return v;
}

// Verdict for value >= bound.
Verdict at_least(std::string name, double value, double bound, std::string note = {}) {
  Verdict v;
  v.name = std::move(name);
  v.value = value;
  v.tolerance = bound;
  v.margin = value - bound;
  v.passed = value >= bound;
  v.note = std::move(note);
  return v;
}

Verdict hypothesis_verdict(const std::string& name, const HypothesisStatus& h, double tol) {
  Verdict v;
  v.name = name;
  v.hypothesis = true;
  v.passed = h.certified;
  v.value = h.margin;
  v.tolerance = tol;
  v.margin = h.margin + tol;
  v.note = h.requirement;
  return v;
}

Verdict bound_hypothesis(const std::string& name, double certified, double required, double tol) {
  Verdict v = at_least(name, certified, required - tol);
  v.hypothesis = true;
  std::ostringstream os;
  os << std::setprecision(17) << "certified " << certified << " >= required " << required;
  v.note = os.str();
  return v;
}

struct Context {
  MetricInstance metric;
  MeasureSpec measure;
  Vec point;
  std::uint64_t seed = 1;
  bool parallel = true;
  std::string name;
  json details = json::object();
  std::vector<Verdict> verdicts;
  std::vector<ScenarioFile> files;
};

std::string csv_name(const Context& c, const std::string& stem) { return c.name + "." + stem + ".csv"; }

// ---------------------------------------------------------------------------
// Verifiers.

Vec random_point_in(const MetricInstance& m, const Vec& c, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec x(c.size());
  for (int tries = 0; tries < 100000; ++tries) {
    for (Eigen::Index i = 0; i < c.size(); ++i) x[i] = c[i] + radius * U(rng);
    if ((x - c).norm() <= radius && m.chart().contains(x)) return x;
  }
  throw ConfigurationError("no random point of the sampling ball lies inside the chart");
}

Vec random_unit(const MetricInstance& m, const Vec& x, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec y(x.size());
  do {
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = N(rng);
  } while (y.norm() < 1e-3);
  return y / m.F(x, y);
}

void verify_curvature_scan(Context& c, Node v) {
  const CertificateSpec cs = parse_certificate(v.child("certificate"), c.point, 1.0);
  const int samples = static_cast<int>(v.integer("samples", 50));
  std::optional<double> e_ric, e_ric_inf, e_s_linear;
  double e_tol = 1e-6;
  if (v.has("expect")) {
    Node e = v.child("expect");
    if (e.has("ric")) e_ric = e.num("ric");
    if (e.has("ric_inf")) e_ric_inf = e.num("ric_inf");
    if (e.has("s_linear")) e_s_linear = e.num("s_linear");
    e_tol = e.num("tol", 1e-6);
    e.finish();
  }
  int s_states = 0;
  double s_tol = 1e-3, s_h = 1e-3;
  if (v.has("s_crosscheck")) {
    Node s = v.child("s_crosscheck");
    s_states = static_cast<int>(s.integer("states", 20));
    s_tol = s.num("tol", 1e-3);
    s_h = s.num("h", 1e-3);
    s.finish();
  }
  v.finish();

  const RicciBound rb = run_certificate(c.metric, c.measure, cs, c.parallel);
  c.details["certificate"] = to_json(rb);

  std::mt19937_64 rng(c.seed);
  double err_ric = 0.0, err_inf = 0.0, err_s = 0.0;
  WeightedRicciParams inf_params;
  for (int k = 0; k < samples; ++k) {
    const Vec x = random_point_in(c.metric, cs.center, cs.radius, rng);
    const Vec y = random_unit(c.metric, x, rng);
    const CurvatureSample s = curvature_sample(c.metric, c.measure, x, y, inf_params);
    if (e_ric) err_ric = std::max(err_ric, std::abs(s.ric - *e_ric));
    if (e_ric_inf) err_inf = std::max(err_inf, std::abs(s.ric + s.s_dot - *e_ric_inf));
    if (e_s_linear) err_s = std::max(err_s, std::abs(s.s - *e_s_linear * x.dot(y)));
  }
  c.details["samples"] = samples;
  if (e_ric) c.verdicts.push_back(at_most("ric_matches_oracle", err_ric, e_tol, "max |Ric - expected| at unit samples"));
  if (e_ric_inf)
    c.verdicts.push_back(at_most("ric_inf_matches_oracle", err_inf, e_tol, "max |Ric^inf - expected|"));
  if (e_s_linear)
    c.verdicts.push_back(at_most("s_matches_linear_oracle", err_s, e_tol, "max |S - K <x, y>|"));

  if (s_states > 0) {
    double worst = 0.0;
    json states = json::array();
    for (int k = 0; k < s_states; ++k) {
      const Vec x = random_point_in(c.metric, cs.center, cs.radius, rng);
      const Vec y = random_unit(c.metric, x, rng);
      const double jet = s_curvature(c.metric, c.measure, x, y);
      const DistortionRates fd = distortion_rates_fd(c.metric, c.measure, x, y, s_h);
      worst = std::max(worst, std::abs(jet - fd.s));
      states.push_back({{"x", to_json(x)}, {"y", to_json(y)}, {"s_jet", jet}, {"s_fd", fd.s}});
    }
    c.details["s_crosscheck"] = states;
    c.verdicts.push_back(at_most("s_jet_matches_distortion_fd", worst, s_tol));
  }
  if (!e_ric && !e_ric_inf && !e_s_linear && s_states == 0) {
    Verdict d;
    d.name = "scan_completed";
    d.passed = rb.samples > 0;
    d.value = rb.samples;
    c.verdicts.push_back(d);
  }
}

LaplacianComparisonOptions parse_laplace_options(Node& n, bool parallel) {
  LaplacianComparisonOptions o;
  o.directions = static_cast<int>(n.integer("directions", 0));
  o.horizon = n.num("horizon", 0.0);
  o.step = n.num("step", 0.0);
  o.min_rho = n.num("min_rho", 0.2);
  o.tol = n.num("tol", 1e-3);
  o.parallel = parallel;
  return o;
}

void verify_laplace_compare(Context& c, Node v) {
  ChiFamily fam = build_family(v.child("family"), c.metric.dim());
  const CertificateSpec cs = parse_certificate(v.child("certificate"), c.point, 1.0);
  LaplacianComparisonOptions o = parse_laplace_options(v, c.parallel);
  const bool has_eq = v.has("equality_tol");
  const double eq_tol = v.num("equality_tol", 0.0);
  v.finish();

  const RicciBound rb = run_certificate(c.metric, c.measure, cs, c.parallel);
  c.details["certificate"] = to_json(rb);
  const HypothesisStatus h = check_hypothesis(fam, rb);
  c.verdicts.push_back(hypothesis_verdict("curvature_hypothesis", h, 1e-8));
  if (!h.certified) return;
  const LaplacianComparisonReport r = laplacian_comparison_check(c.metric, c.measure, c.point, fam, &rb, o);
  c.details["family"] = to_json(r.family);
  c.details["laplacian"] = {{"geodesics", r.geodesics},
                            {"samples", r.samples},
                            {"past_cut_skipped", r.past_cut_skipped},
                            {"chart_exits", r.chart_exits},
                            {"conjugate_cuts", r.conjugate_cuts},
                            {"worst_margin", num(r.worst_margin)},
                            {"worst_t", r.worst_t},
                            {"worst_x", to_json(r.worst_x)},
                            {"worst_direction", to_json(r.worst_direction)},
                            {"max_abs_gap", r.max_abs_gap},
                            {"max_fd_error", r.max_fd_error},
                            {"min_rho", o.min_rho}};
  Verdict lv = at_least("laplacian_comparison", r.worst_margin, -r.tol, "min (ln chi)' - Delta rho, FD error allowance added");
  lv.margin = r.worst_slack;
  lv.passed = r.passed;
  c.verdicts.push_back(lv);
  if (has_eq) c.verdicts.push_back(at_most("equality_gap", r.max_abs_gap, eq_tol, "max |Delta rho - (ln chi)'|"));
}


void verify_bishop_gromov(Context& c, Node v) {
  const ChiFamily fam = build_family(v.child("family"), c.metric.dim());
  const CertificateSpec cs = parse_certificate(v.child("certificate"), c.point, 1.0);
  const double rho_o = v.num("rho_o", 0.0);
  const std::vector<double> radii = v.vec("radii");
  BishopGromovOptions bo;
  bo.tol = v.num("tol", 5e-3);
  bo.volume.directions = static_cast<int>(v.integer("directions", 0));
  bo.volume.step = v.num("step", 0.0);
  bo.volume.parallel = c.parallel;
  Node pre = v.child("precondition");
  LaplacianComparisonOptions lo = parse_laplace_options(pre, c.parallel);
  pre.finish();
  const bool has_eq = v.has("equality_tol");
  const double eq_tol = v.num("equality_tol", 0.0);
  v.finish();
  if (radii.empty()) throw ConfigurationError("verifier.radii: needs at least one radius");

  const RicciBound rb = run_certificate(c.metric, c.measure, cs, c.parallel);
  c.details["certificate"] = to_json(rb);
  const HypothesisStatus h = check_hypothesis(fam, rb);
  c.verdicts.push_back(hypothesis_verdict("curvature_hypothesis", h, 1e-8));
  if (!h.certified) return;

  if (lo.horizon == 0.0) lo.horizon = radii.back();
  const LaplacianComparisonReport lr = laplacian_comparison_check(c.metric, c.measure, c.point, fam, &rb, lo);
  Verdict pv = at_least("laplacian_precondition", lr.worst_margin, -lr.tol);
  pv.hypothesis = true;
  pv.margin = lr.worst_slack;
  pv.passed = lr.passed;
  pv.note = "Delta rho <= (ln chi)' on the sampled geodesics";
  c.verdicts.push_back(pv);
  c.details["precondition"] = {{"samples", lr.samples},
                               {"worst_margin", num(lr.worst_margin)},
                               {"max_abs_gap", lr.max_abs_gap},
                               {"tol", lr.tol}};
  if (!lr.passed) return;

  const BishopGromovReport r = bishop_gromov_check(c.metric, c.measure, c.point, lr.family, rho_o, radii, &lr, bo);
  c.details["family"] = to_json(r.family);
  c.details["table"] = {{"r", r.radii}, {"annulus", r.annulus}, {"chi_integral", r.chi_integral}, {"ratio", r.ratio}};
  c.details["quadrature"] = {{"directions", r.directions},
                             {"step", r.step},
                             {"chi_quadrature_error", r.quadrature_error},
                             {"conjugate_cuts", r.conjugate_cuts},
                             {"chart_exits", r.chart_exits}};
  c.details["phi_p"] = r.phi_p;
  c.verdicts.push_back(at_most("ratio_monotone", r.worst_increase, bo.tol, "max over r < R of ratio(R)/ratio(r) - 1"));
  if (r.absolute_applicable) {
    c.verdicts.push_back(at_most("absolute_bound", r.absolute_worst, bo.tol,
                                 "max over r < R of Vol(B(R) \\ B(r)) / (phi omega int_r^R chi) - 1"));
    if (has_eq) c.verdicts.push_back(at_most("equality", r.absolute_gap, eq_tol, "max |Vol / bound - 1|"));
  } else if (has_eq) {
    double spread = 0.0;
    for (double q : r.ratio) spread = std::max(spread, std::abs(q / r.ratio.front() - 1.0));
    c.verdicts.push_back(at_most("equality", spread, eq_tol, "max |ratio(r)/ratio(r_0) - 1|"));
  }
  std::ostringstream os;
  write_ratio_csv(os, r);
  c.files.push_back({csv_name(c, "ratio"), os.str()});
}

void verify_small_ball(Context& c, Node v) {
  std::vector<Vec> points;
  if (v.has("points")) {
    const json& P = v.get("points");
    if (!P.is_array() || P.empty()) v.fail("points", "expected a non-empty array of points");
    for (std::size_t i = 0; i < P.size(); ++i) {
      if (!P[i].is_array() || static_cast<int>(P[i].size()) != c.metric.dim())
        v.fail("points", "point " + std::to_string(i) + " does not match the metric dimension");
      Vec x(c.metric.dim());
      for (int k = 0; k < c.metric.dim(); ++k) {
        if (!P[i][k].is_number()) v.fail("points", "point " + std::to_string(i) + " has a non-numeric entry");
        x[k] = P[i][k].get<double>();
      }
      points.push_back(x);
    }
  } else {
    points.push_back(c.point);
  }
  const double r = positive(v, "r", v.num("r", 0.05));
  const double tol = v.num("tol", 0.01);
  VolumeOptions vo;
  vo.directions = static_cast<int>(v.integer("directions", 0));
  // RK4 error at r/200 is far below the O(r^2) deviation being measured.
  vo.step = v.num("step", r / 200.0);
  vo.parallel = c.parallel;
  v.finish();

  const int n = c.metric.dim();
  const double omega = unit_sphere_area(n);
  double worst = 0.0, worst_half = 0.0;
  json rows = json::array();
  for (const Vec& p : points) {
    const double phi = phi_factor(c.metric, c.measure, p);
    auto ratios = [&](double rr, double step) {
      VolumeOptions o = vo;
      o.step = step;
      const SphereProfile prof = sphere_profile(c.metric, c.measure, p, rr, o);
      return std::pair{prof.sphere.back() / (phi * omega * std::pow(rr, n - 1)),
                       n * prof.cumulative.back() / (phi * omega * std::pow(rr, n))};
    };
    const auto [v1, v2] = ratios(r, vo.step);
    const double dev = std::max(std::abs(v1 - 1.0), std::abs(v2 - 1.0));
    worst = std::max(worst, dev);
    // Same check at r/2: the observed order tells an O(r) correction
    // (non-reversible metrics) from an O(r^2) one.
    const auto [h1, h2] = ratios(0.5 * r, 0.5 * vo.step);
    const double dev_half = std::max(std::abs(h1 - 1.0), std::abs(h2 - 1.0));
    const double order = dev > 0.0 && dev_half > 0.0 ? std::log2(dev / dev_half) : 0.0;
    worst_half = std::max(worst_half, dev_half);
    rows.push_back({{"p", to_json(p)},
                    {"phi_p", phi},
                    {"sphere_ratio", v1},
                    {"ball_ratio", v2},
                    {"deviation_half_r", dev_half},
                    {"observed_order", order}});
  }
  c.details["r"] = r;
  c.details["worst_deviation_half_r"] = worst_half;
  c.details["points"] = rows;
  c.verdicts.push_back(at_most("small_ball_ratios", worst, tol, "max |ratio - 1| over points, sphere and ball"));
}

void verify_volume_bound(Context& c, Node v) {
  const int n = c.metric.dim();
  const double K = positive(v, "K", v.num("K"));
  Node cn = v.child("certificate");
  const CertificateSpec cs = parse_certificate(std::move(cn), c.point, n >= 2 ? volume_bound_radius(n, K) : 1.0);
  const bool has_delta = v.has("delta");
  const double delta_cfg = v.num("delta", 0.0);
  const double total_radius = positive(v, "total_radius", v.num("total_radius"));
  std::vector<double> scales = v.has("scales") ? v.vec("scales") : std::vector<double>{0.5, 2.0, 3.0};
  const double scale_tol = v.num("scale_tol", 1e-10);
  VolumeOptions vo;
  vo.directions = static_cast<int>(v.integer("directions", 0));
  vo.step = v.num("step", 0.0);
  vo.parallel = c.parallel;
  v.finish();

  const RicciBound rb = run_certificate(c.metric, c.measure, cs, c.parallel);
  c.details["certificate"] = to_json(rb);
  c.details["certificate_radius"] = cs.radius;
  c.verdicts.push_back(bound_hypothesis("ric_inf_lower_bound", rb.inf_ric_inf, K, 1e-8));
  const double delta_cert = std::max(0.0, -rb.s_min);
  if (has_delta) c.verdicts.push_back(bound_hypothesis("s_lower_bound", -rb.s_min, -delta_cfg, 1e-8));
  const double delta = has_delta ? delta_cfg : delta_cert;
  if (!c.verdicts.back().passed || !c.verdicts.front().passed) return;

  const double phi = phi_factor(c.metric, c.measure, c.point);
  const VolumeBound vb = total_volume_bound(n, K, delta, phi);
  double worst = 0.0;
  for (double s : scales) {
    // Ric^inf >= s^2 K and S >= -s delta under the metric scaling F -> F/s.
    const VolumeBound sb = total_volume_bound(n, s * s * K, s * delta, phi);
    worst = std::max(worst, std::abs(sb.value * std::pow(s, n) / vb.value - 1.0));
  }
  const double total = ball_volume(c.metric, c.measure, c.point, total_radius, vo);
  c.details["bound"] = {{"n", n},        {"K", K},           {"delta", delta},
                        {"phi_p", phi},  {"constant", vb.constant}, {"value", vb.value},
                        {"quadrature_error", vb.quadrature_error}};
  c.details["total_measure"] = {{"radius", total_radius}, {"value", total}};
  c.verdicts.push_back(at_most("scale_covariance", worst, scale_tol, "max |bound(s) s^n / bound(1) - 1|"));
  c.verdicts.push_back(at_least("bound_dominates_total_measure", vb.value, total, "bound >= measured total volume"));
}

void verify_bonnet_myers(Context& c, Node v) {
  const std::vector<double> ns = v.vec("n"), Ks = v.vec("K"), ds = v.vec("delta");
  const double tol = v.num("tol", 1e-9);
  const double vol_tol = v.num("volume_tol", 1e-8);
  bool diam = false;
  double diam_K = 1.0, diam_tol = 1e-4, diam_horizon = 3.5;
  int diam_dirs = 16;
  if (v.has("diameter")) {
    Node d = v.child("diameter");
    diam = true;
    diam_K = d.num("K", 1.0);
    diam_tol = d.num("tol", 1e-4);
    diam_horizon = d.num("horizon", 3.5);
    diam_dirs = static_cast<int>(d.integer("directions", 16));
    d.finish();
  }
  v.finish();

  double worst_arg = 0.0, worst_min = 0.0, worst_vol = 0.0;
  json grid = json::array();
  for (double nd : ns) {
    const int n = static_cast<int>(nd);
    if (n != nd) throw ConfigurationError("verifier.n: dimensions must be integers");
    for (double K : Ks) {
      for (double d : ds) {
        const BonnetMyersReport r = bonnet_myers(n, K, d);
        const double ea = std::abs(r.numeric_argmin - r.N_star) / std::max(1.0, r.N_star);
        const double em = std::abs(r.numeric_min - r.diameter_bound) / r.diameter_bound;
        worst_arg = std::max(worst_arg, ea);
        worst_min = std::max(worst_min, em);
        grid.push_back({{"n", n},
                        {"K", K},
                        {"delta", d},
                        {"gamma", r.gamma},
                        {"N_star", r.N_star},
                        {"diameter_bound", r.diameter_bound},
                        {"H", r.H},
                        {"numeric_argmin", r.numeric_argmin},
                        {"numeric_min", r.numeric_min},
                        {"volume_constant", r.volume_constant}});
        if (d == 0.0) {
          // C = omega_{n-1} (n-1)^{n/2} int_0^pi sin^{n-1}, with the Wallis closed form.
          const double wallis = std::sqrt(std::numbers::pi) * std::tgamma(0.5 * n) / std::tgamma(0.5 * (n + 1));
          const double want = unit_sphere_area(n) * std::pow(n - 1.0, 0.5 * n) * wallis;
          worst_vol = std::max(worst_vol, std::abs(r.volume_constant - want) / want);
        }
      }
    }
  }
  c.details["grid"] = grid;
  c.verdicts.push_back(at_most("argmin_matches_closed_form", worst_arg, tol, "max |argmin - N*| / max(1, N*)"));
  c.verdicts.push_back(at_most("minimum_matches_diameter_bound", worst_min, tol, "max |min f - pi gamma/sqrt K| / bound"));
  if (std::find(ds.begin(), ds.end(), 0.0) != ds.end())
    c.verdicts.push_back(at_most("delta0_volume_constant", worst_vol, vol_tol, "relative error vs Wallis closed form"));
  const BonnetMyersReport s2 = bonnet_myers(2, 1.0, 0.0);
  // The round sphere attains the bound, so dominance is an equality up to quadrature error.
  c.verdicts.push_back(at_least("dominates_unit_sphere_area", s2.volume_constant,
                                4.0 * std::numbers::pi * (1.0 - vol_tol),
                                "n = 2, K = 1, delta = 0 constant vs Vol(S^2(1)), relative slack volume_tol"));

  if (diam) {
    const int n = c.metric.dim();
    const double bound = bonnet_myers(n, diam_K, 0.0).diameter_bound;
    const DirectionSet ds2 = direction_set(n, diam_dirs);
    double best = 0.0;
    int conj = 0, exits = 0;
    for (const Vec& u : ds2.u) {
      const GeodesicTrace tr = jacobi_determinant(c.metric, c.measure, c.point, u, diam_horizon);
      if (tr.cut == CutReason::Conjugate) {
        ++conj;
        best = std::max(best, tr.i_y);
      } else if (tr.cut == CutReason::ChartExit) {
        ++exits;
      }
    }
    c.details["diameter"] = {{"bound", bound}, {"max_conjugate_time", best}, {"conjugate", conj}, {"chart_exits", exits}};
    c.verdicts.push_back(at_most("diameter_attained", std::abs(best - bound), diam_tol,
                                 "|max conjugate time - pi gamma / sqrt K|, delta = 0"));
  }
}

struct Grid1DSetup {
  Grid1D G;
  GridConfig cfg;
};

Grid1DSetup build_grid(Context& c, Node n) {
  Grid1DSetup s;
  s.cfg = parse_grid(std::move(n));
  s.G = make_grid(c.metric, c.measure, s.cfg.M, s.cfg.spec);
  c.details["grid"] = {{"M", s.G.M},
                       {"lo", s.G.lo},
                       {"hi", s.G.hi},
                       {"h", s.G.h},
                       {"periodic", s.G.periodic},
                       {"face_weights", s.cfg.spec.face_weights == FaceWeights::Midpoint ? "midpoint" : "drift_matched"}};
  return s;
}

// Optional certificate on the grid's continuum model, giving K.
struct KCertificate {
  bool present = false;
  double K = 0.0;
  bool certified = false;
};

KCertificate certify_K(Context& c, Node& v, const Grid1D& G) {
  KCertificate k;
  if (!v.has("certificate")) {
    if (v.has("K")) v.fail("K", "a required K needs a certificate");
    return k;
  }
  Vec center(1);
  center[0] = 0.5 * (G.lo + G.hi);
  CertificateSpec cs = parse_certificate(v.child("certificate"), center, 0.5 * (G.hi - G.lo));
  const bool has_K = v.has("K");
  const double want = v.num("K", 0.0);
  const RicciBound rb = run_certificate(c.metric, c.measure, cs, c.parallel);
  c.details["certificate"] = to_json(rb);
  k.present = true;
  k.K = has_K ? want : rb.inf_ric_inf;
  Verdict h = bound_hypothesis("ric_inf_lower_bound", rb.inf_ric_inf, has_K ? want : 0.0, 1e-8);
  if (!has_K) h.passed = rb.inf_ric_inf > 0.0;
  c.verdicts.push_back(h);
  k.certified = h.passed;
  return k;
}

double relative_error(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

struct IdentityErrors {
  double phi1 = 0.0;
  double phi2 = 0.0;
};

// Worst relative errors of the FD Phi derivatives over the samples where the
// analytic values are not negligible (t = 0 excluded: one-sided stencils).
IdentityErrors identity_errors(const HeatTrajectory& tr) {
  IdentityErrors e;
  const double s1 = std::abs(tr.dphi.front()), s2 = std::abs(tr.ddphi.front());
  for (std::size_t i = 1; i < tr.t.size(); ++i) {
    if (std::abs(tr.dphi[i]) > 1e-8 * s1) e.phi1 = std::max(e.phi1, relative_error(tr.dphi_fd[i], tr.dphi[i]));
    if (std::abs(tr.ddphi[i]) > 1e-8 * s2) e.phi2 = std::max(e.phi2, relative_error(tr.ddphi_fd[i], tr.ddphi[i]));
  }
  return e;
}

void verify_heat(Context& c, Node v) {
  Grid1DSetup gs = build_grid(c, v.child("grid"));
  const FunctionSpec fs = parse_function(v.child("f0"));
  HeatOptions ho;
  ho.T = positive(v, "T", v.num("T", 2.0));
  ho.dt = v.num("dt", 0.0);
  ho.parallel = c.parallel;
  const double tol1 = v.num("phi_prime_tol", 1e-3);
  const double tol2 = v.num("phi_second_tol", 1e-2);
  const double mass_tol = v.num("mass_tol", 1e-8);
  const double square_rule_tol = v.num("square_rule_tol", 1e-8);
  const bool refine = v.boolean("refine", true);
  const int test_functions = static_cast<int>(v.integer("test_functions", 20));
  v.finish();

  std::mt19937_64 rng(c.seed);
  const Grid1D& G = gs.G;
  const std::vector<double> f0 = make_functions(G, fs, rng).front();
  const HeatTrajectory tr = heat_flow(G, f0, ho);
  const IdentityErrors e = identity_errors(tr);
  c.details["heat"] = {{"T", ho.T},
                       {"dt", tr.dt},
                       {"dt_stable", tr.dt_stable},
                       {"steps", tr.steps},
                       {"snapshots", tr.t.size()},
                       {"phi_0", tr.phi.front()},
                       {"phi_T", tr.phi.back()},
                       {"energy_0", tr.energy.front()},
                       {"energy_T", tr.energy.back()},
                       {"phi_prime_rel_error", e.phi1},
                       {"phi_second_rel_error", e.phi2},
                       {"mass_drift_rate", tr.mass_drift_rate}};
  c.verdicts.push_back(at_most("phi_prime_identity", e.phi1, tol1, "max rel. error of FD Phi' vs -2E"));
  c.verdicts.push_back(at_most("phi_second_identity", e.phi2, tol2, "max rel. error of FD Phi'' vs 4 ||Delta u||^2"));
  c.verdicts.push_back(at_most("mass_conservation", tr.mass_drift_rate, mass_tol, "|mean drift| per unit time"));
  double worst_rise = 0.0;
  for (std::size_t i = 1; i < tr.phi.size(); ++i) worst_rise = std::max(worst_rise, tr.phi[i] - tr.phi[i - 1]);
  c.verdicts.push_back(at_most("phi_non_increasing", worst_rise, 1e-12 * tr.phi.front(),
                               "max sampled increase of Phi, roundoff allowance 1e-12 Phi(0)"));

  if (refine) {
    Grid1D coarse = make_grid(c.metric, c.measure, gs.cfg.M / 2, gs.cfg.spec);
    std::mt19937_64 rng2(c.seed);
    const std::vector<double> g0 = make_functions(coarse, fs, rng2).front();
    const IdentityErrors ec = identity_errors(heat_flow(coarse, g0, ho));
    c.details["refinement"] = {{"coarse_M", coarse.M},
                               {"coarse_phi_prime_rel_error", ec.phi1},
                               {"coarse_phi_second_rel_error", ec.phi2}};
    Verdict r = at_most("errors_improve_under_refinement", std::max(e.phi1 - ec.phi1, e.phi2 - ec.phi2), 0.0,
                        "fine minus coarse relative errors");
    c.verdicts.push_back(r);
  }

  // Product rule for the Laplacian of f^2 in weak form: pair the residual of
  // Delta^{grad u} f^2 - 2 f Delta^{grad u} f - 2 Gamma(f) against random test functions.
  double worst = 0.0;
  for (int k = 0; k < test_functions; ++k) {
    const std::vector<double> f = random_smooth(G, rng());
    const std::vector<double> phi = random_smooth(G, rng());
    std::vector<double> f2(G.M);
    for (int j = 0; j < G.M; ++j) f2[j] = f[j] * f[j];
    const std::vector<double> l2 = linearized_laplacian(G, f0, f2);
    const std::vector<double> l1 = linearized_laplacian(G, f0, f);
    const std::vector<double> gam = carre_du_champ(G, f0, f);
    double res = 0.0, scale = 0.0;
    for (int j = 0; j < G.M; ++j) {
      res += G.w[j] * phi[j] * (l2[j] - 2 * f[j] * l1[j] - 2 * gam[j]);
      scale += G.w[j] * std::abs(phi[j]) * (std::abs(l2[j]) + 2 * std::abs(f[j] * l1[j]) + 2 * gam[j]);
    }
    worst = std::max(worst, std::abs(res) / scale);
  }
  c.verdicts.push_back(at_most("square_rule_weak_residual", worst, square_rule_tol, "|<phi, residual>| / scale"));

  std::ostringstream os;
  write_heat_csv(os, tr);
  c.files.push_back({csv_name(c, "heat"), os.str()});
}

void verify_pl_check(Context& c, Node v) {
  Grid1DSetup gs = build_grid(c, v.child("grid"));
  const Grid1D& G = gs.G;
  KCertificate kc = certify_K(c, v, G);
  const FunctionSpec fs = parse_function(v.child("f0"));
  PLOptions po;
  po.T = v.num("T", 0.0);
  po.tol = v.num("tol", 0.02);
  po.parallel = c.parallel;
  bool sharp = false;
  double slack_tol = 0.02, g_tol = 1e-10;
  if (v.has("sharpness")) {
    Node s = v.child("sharpness");
    sharp = true;
    slack_tol = s.num("slack_tol", 0.02);
    g_tol = s.num("g_tol", 1e-10);
    s.finish();
  }
  const bool truncation = v.boolean("truncation_check", false);
  v.finish();
  if (!kc.present) throw ConfigurationError("verifier.certificate: pl-check needs a certified K");
  if (!kc.certified) return;

  std::mt19937_64 rng(c.seed);
  const auto fs0 = make_functions(G, fs, rng);
  bool all = true, dom = true;
  double worst_slack = std::numeric_limits<double>::infinity();
  double worst_excess = -std::numeric_limits<double>::infinity();
  double max_g = 0.0, max_tail = 0.0;
  int flagged = 0;
  json rows = json::array();
  for (const auto& f0 : fs0) {
    const PLReport r = pl_check(G, f0, kc.K, po);
    all = all && r.improved_holds;
    dom = dom && r.dominance;
    worst_slack = std::min(worst_slack, r.slack);
    worst_excess = std::max(worst_excess, (r.variance - r.rhs_improved) / std::max(r.rhs_plain, 1e-300));
    max_g = std::max(max_g, r.g_total);
    max_tail = std::max(max_tail, r.tail_share);
    flagged += r.sign_change_flag;
    rows.push_back({{"variance", r.variance},
                    {"energy", r.energy},
                    {"g_total", r.g_total},
                    {"rhs_plain", r.rhs_plain},
                    {"rhs_improved", r.rhs_improved},
                    {"slack", r.slack},
                    {"tail_share", r.tail_share},
                    {"sign_change_flag", r.sign_change_flag}});
  }
  c.details["K"] = kc.K;
  c.details["runs"] = rows;
  c.details["sign_change_flagged_runs"] = flagged;
  c.details["max_tail_share"] = max_tail;
  Verdict iv = at_most("improved_inequality", fs0.empty() ? 0.0 : worst_excess, po.tol,
                       "max (Var - RHS_improved) / RHS_plain over draws");
  iv.passed = all;
  c.verdicts.push_back(iv);
  Verdict dv;
  dv.name = "improved_dominates_plain";
  dv.passed = dom;
  dv.value = dom ? 1.0 : 0.0;
  dv.tolerance = 0.0;
  dv.margin = dom ? 0.0 : -1.0;
  dv.note = "RHS_improved <= RHS_plain, exact";
  c.verdicts.push_back(dv);
  if (sharp) {
    c.verdicts.push_back(at_most("sharpness_slack", std::abs(worst_slack), slack_tol, "|slack| for the sharp profile"));
    c.verdicts.push_back(at_most("g_vanishes", max_g, g_tol, "total g"));
  }
  if (truncation && !G.periodic) {
    GridSpec wide = gs.cfg.spec;
    const double mid = 0.5 * (wide.lo + wide.hi), half = 0.5 * (wide.hi - wide.lo);
    wide.lo = mid - 2 * half;
    wide.hi = mid + 2 * half;
    const Grid1D W = make_grid(c.metric, c.measure, 2 * gs.cfg.M, wide);
    std::mt19937_64 rng2(c.seed);
    const auto fw = make_functions(W, fs, rng2);
    const PLReport a = pl_check(G, fs0.front(), kc.K, po);
    const PLReport b = pl_check(W, fw.front(), kc.K, po);
    c.details["truncation"] = {{"doubled_lo", wide.lo},
                               {"doubled_hi", wide.hi},
                               {"slack", a.slack},
                               {"doubled_slack", b.slack},
                               {"change", std::abs(a.slack - b.slack)}};
  }
}

void verify_eigen(Context& c, Node v) {
  Grid1DSetup gs = build_grid(c, v.child("grid"));
  const Grid1D& G = gs.G;
  KCertificate kc = certify_K(c, v, G);
  Lambda1Options lo;
  lo.restarts = static_cast<int>(positive(v, "restarts", v.integer("restarts", 10)));
  lo.horizon_factor = v.num("horizon_factor", 12.0);
  lo.parallel = c.parallel;
  lo.seed = c.seed;
  bool has_expect = false;
  double expect = 0.0, expect_tol = 0.03;
  if (v.has("expected")) {
    Node e = v.child("expected");
    has_expect = true;
    expect = e.num("value");
    expect_tol = e.num("tol", 0.03);
    e.finish();
  }
  const int tested = static_cast<int>(v.integer("tested", 5));
  const double tol = v.num("tol", 0.03);
  v.finish();
  if (kc.present && !kc.certified) return;

  const Lambda1Report r = lambda1_estimate(G, lo);
  c.details["lambda1"] = {{"rayleigh", r.rayleigh},
                          {"restart_values", r.restart_values},
                          {"sector_iterations", r.sector_iterations},
                          {"decay_rate", r.decay_rate},
                          {"decay_T", r.decay_T},
                          {"relative_gap", r.relative_gap},
                          {"reversible", r.reversible}};
  if (r.reversible)
    c.verdicts.push_back(at_most("estimators_agree", r.relative_gap, tol, "|decay - Rayleigh| / Rayleigh"));
  else
    c.verdicts.push_back(at_least("decay_bounds_rayleigh", r.decay_rate, (1.0 - tol) * r.rayleigh,
                                  "non-reversible grid: decay rate >= (1 - tol) Rayleigh"));
  if (has_expect)
    c.verdicts.push_back(at_most("lambda1_matches_oracle", relative_error(r.rayleigh, expect), expect_tol,
                                 "|lambda1 - expected| / expected"));
  if (kc.present) {
    std::mt19937_64 rng(c.seed ^ 0x5bd1e995ULL);
    std::vector<std::vector<double>> fs;
    for (int k = 0; k < tested; ++k) fs.push_back(random_smooth(G, rng()));
    const EigenBoundReport e = eigenvalue_bound_check(G, r, kc.K, fs, tol, c.parallel);
    c.details["corollary"] = {{"K", e.K}, {"delta_est", e.delta_est}, {"delta_values", e.delta_values}, {"margin", e.margin}};
    Verdict cv = at_least("lambda1_ge_K_plus_delta", r.rayleigh, e.K + e.delta_est - tol * r.rayleigh,
                          "lambda1 >= K + delta_est - tol lambda1");
    c.verdicts.push_back(cv);
  }
}

void verify_bochner(Context& c, Node v) {
  Grid1DSetup gs = build_grid(c, v.child("grid"));
  const Grid1D& G = gs.G;
  KCertificate kc = certify_K(c, v, G);
  const FunctionSpec fs = parse_function(v.child("u"));
  const double tol = v.num("tol", 0.02);
  bool sat = false;
  double sat_tol = 0.02;
  if (v.has("saturation")) {
    Node s = v.child("saturation");
    sat = true;
    sat_tol = s.num("tol", 0.02);
    s.finish();
  }
  v.finish();
  if (!kc.present) throw ConfigurationError("verifier.certificate: bochner needs a certified K");
  if (!kc.certified) return;

  std::mt19937_64 rng(c.seed);
  bool all = true;
  double worst_ratio = 0.0;
  json rows = json::array();
  for (const auto& u : make_functions(G, fs, rng)) {
    const BochnerReport b = bochner_integrated_check(G, u, kc.K, tol);
    all = all && b.passed;
    worst_ratio = std::max(worst_ratio, b.ratio);
    rows.push_back({{"energy", b.energy}, {"laplacian_sq", b.laplacian_sq}, {"g_integral", b.g_integral}, {"ratio", num(b.ratio)}});
  }
  c.details["K"] = kc.K;
  c.details["runs"] = rows;
  Verdict bv = at_most("integrated_bochner", worst_ratio, 1.0 + tol, "max K E / (||Delta u||^2 - int g)");
  bv.passed = all;
  c.verdicts.push_back(bv);
  if (sat) {
    std::vector<double> x = G.x;
    const BochnerReport b = bochner_integrated_check(G, x, kc.K, tol);
    c.details["linear"] = {{"ratio", b.ratio}};
    c.verdicts.push_back(at_most("linear_saturation", std::abs(b.ratio - 1.0), sat_tol, "|ratio - 1| for u = x"));
  }
}

// s_c against its ODE, through a second-order jet (independent of the closed-form
// derivative), and ct_c against the jet quotient.
void verify_comparison_functions(Context& c, Node v) {
  const std::vector<double> cs = v.has("c") ? v.vec("c") : std::vector<double>{-1.0, 0.0, 1.0, 4.0};
  const int points = static_cast<int>(positive(v, "points", v.integer("points", 1000)));
  const double tol = v.num("tol", 1e-12);
  const double horizon = v.num("horizon", 5.0);
  v.finish();
  using J = Jet2<double, 1>;
  double worst_ode = 0.0, worst_ct = 0.0, worst_init = 0.0;
  for (double cc : cs) {
    const double T = cc > 0.0 ? std::numbers::pi / std::sqrt(cc) : horizon;
    for (int k = 1; k <= points; ++k) {
      const double t = T * k / (points + 1.0);
      const J f = s_c_generic(cc, J::variable(t, 0));
      worst_ode = std::max(worst_ode, std::abs(f.hess(0, 0) + cc * f.v));
      worst_ct = std::max(worst_ct, std::abs(ct_c(cc, t) - f.g[0] / f.v) / std::max(1.0, std::abs(ct_c(cc, t))));
    }
    const J f0 = s_c_generic(cc, J::variable(0.0, 0));
    worst_init = std::max({worst_init, std::abs(f0.v), std::abs(f0.g[0] - 1.0)});
  }
  c.details["c"] = cs;
  c.details["points_per_c"] = points;
  c.verdicts.push_back(at_most("ode_residual", worst_ode, tol, "max |s_c'' + c s_c|"));
  c.verdicts.push_back(at_most("initial_conditions", worst_init, tol, "max(|s_c(0)|, |s_c'(0) - 1|)"));
  c.verdicts.push_back(at_most("ct_c_quotient", worst_ct, tol, "max rel. |ct_c - s_c'/s_c|"));
}

using VerifierFn = void (*)(Context&, Node);

const std::vector<std::pair<std::string, VerifierFn>>& verifiers() {
  static const std::vector<std::pair<std::string, VerifierFn>> v = {
      {"curvature-scan", verify_curvature_scan}, {"comparison-functions", verify_comparison_functions},
      {"laplace-compare", verify_laplace_compare},
      {"bishop-gromov", verify_bishop_gromov},   {"small-ball", verify_small_ball},
      {"volume-bound", verify_volume_bound},     {"bonnet-myers", verify_bonnet_myers},
      {"heat", verify_heat},                     {"pl-check", verify_pl_check},
      {"eigen", verify_eigen},                   {"bochner", verify_bochner}};
  return v;
}

}  // namespace

const char* to_string(ScenarioStatus s) {
  switch (s) {
    case ScenarioStatus::Pass: return "pass";
    case ScenarioStatus::Error: return "error";
    case ScenarioStatus::Fail: return "fail";
    case ScenarioStatus::Uncertified: return "uncertified";
  }
  return "?";
}

const std::vector<std::string>& verifier_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> r;
    for (const auto& [n, f] : verifiers()) r.push_back(n);
    return r;
  }();
  return names;
}

nlohmann::json load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open scenario file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

ScenarioResult run_scenario(const nlohmann::json& config, const RunOptions& opts) {
  Node root(config, "");
  const std::string name = root.str("name");
  if (name.empty() || name.find_first_of("/\\") != std::string::npos) root.fail("name", "must be a plain file stem");
  const std::string description = root.str("description", "");
  if (root.has("$schema")) root.str("$schema");
  const long cfg_seed = root.integer("seed", 1);
  if (cfg_seed < 0) root.fail("seed", "must be non-negative");

  Context c{build_metric(root.child("metric")), build_measure(root.child("measure")), Vec(), 0, opts.parallel, name, json::object(), {}, {}};
  c.seed = opts.seed ? *opts.seed : static_cast<std::uint64_t>(cfg_seed);
  c.point = root.has("point") ? root.eigen_vec("point") : Vec::Zero(c.metric.dim());
  if (c.point.size() != c.metric.dim()) root.fail("point", "dimension does not match the metric");

  Node ver = root.child("verifier");
  const std::string vname = ver.str("name");
  VerifierFn fn = nullptr;
  for (const auto& [n, f] : verifiers())
    if (n == vname) fn = f;
  if (!fn) ver.fail("name", "unknown verifier '" + vname + "'");
  root.finish();
  fn(c, ver);

  ScenarioResult r;
  r.name = name;
  r.verifier = vname;
  r.seed = c.seed;
  r.verdicts = c.verdicts;
  r.files = c.files;
  bool uncertified = false, failed = false;
  for (const Verdict& v : r.verdicts) {
    if (v.passed) continue;
    (v.hypothesis ? uncertified : failed) = true;
  }
  if (r.verdicts.empty()) failed = true;
  r.status = uncertified ? ScenarioStatus::Uncertified : failed ? ScenarioStatus::Fail : ScenarioStatus::Pass;

  json verdicts = json::array();
  for (const Verdict& v : r.verdicts) verdicts.push_back(to_json(v));
  r.report = {{"scenario", name},
              {"description", description},
              {"verifier", vname},
              {"seed", c.seed},
              {"metric", c.metric.name()},
              {"measure", c.measure.name()},
              {"point", to_json(c.point)},
              {"config", config},
              {"verdicts", verdicts},
              {"details", c.details},
              {"status", to_string(r.status)},
              {"exit_code", static_cast<int>(r.status)}};
  return r;
}

void write_scenario_outputs(const ScenarioResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& file, const std::string& contents) {
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / file).string());
    out << contents;
  };
  write(r.name + ".report.json", r.report.dump(2) + "\n");
  for (const ScenarioFile& f : r.files) write(f.name, f.contents);
}

std::vector<std::filesystem::path> list_scenarios(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto& p = e.path();
    if (p.extension() == ".json" && p.filename() != "schema.json") out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace finsler
