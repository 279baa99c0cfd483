#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "metricspace/distance.hpp"
#include "metricspace/error.hpp"
#include "metricspace/optimizer.hpp"
#include "metricspace/parallel.hpp"
#include "metricspace/product.hpp"
#include "metricspace/random.hpp"

using namespace metricspace;

namespace {

OptimizerOptions options(int K) {
  OptimizerOptions o;
  o.K = K;
  return o;
}

GeodesicSetting point_setting(const SpdMatrix& g_ref, const SpdMatrix& a, const SpdMatrix& b) {
  return {PathMetric::reference_weighted(g_ref), {a.sym()}, {b.sym()}};
}

/// Linear path with a smooth bump so that the interior is far from stationary.
BlockPath bent_path(Rng& rng, const GeodesicSetting& s, int K, double amplitude) {
  BlockPath p = BlockPath::linear(s.start, s.end, K);
  std::vector<SymMatrix> bumps;
  for (const SymMatrix& a : s.start) bumps.push_back(random_symmetric(rng, a.dim(), amplitude));
  for (int k = 1; k < K; ++k)
    for (std::size_t b = 0; b < p.blocks(); ++b) {
      const SpdMatrix g(p.at(k, b));
      p.at(k, b) = spd_exp_from(g, std::sin(std::numbers::pi * k / K) * bumps[b]).sym();
    }
  return p;
}

double max_entry(const Gradient& g) {
  double m = 0.0;
  for (const SymMatrix& s : g.partials)
    for (double v : s.upper()) m = std::max(m, std::abs(v));
  return m;
}

double min_endpoint_eig(const GeodesicSetting& s, std::size_t b) {
  return std::min(min_eigenvalue(s.start[b]), min_eigenvalue(s.end[b]));
}

struct WorkerGuard {
  ~WorkerGuard() { set_worker_count(0); }
};

}  // namespace

TEST_CASE("discrete_energy examples") {
  const PathMetric m = PathMetric::l2(2, {1.0});
  const std::vector<SymMatrix> i2{SymMatrix::identity(2)}, two{SymMatrix::identity(2, 2.0)};
  CHECK(discrete_energy(m, BlockPath::constant(i2, 10)) == 0.0);
  const BlockPath p = BlockPath::linear(i2, two, 1000);
  CHECK(std::abs(discrete_energy(m, p) - 2.0 * std::log(2.0)) <= 1e-3);

  Rng rng = trial_rng(41, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 3;
    const SpdMatrix a = random_spd(rng, n, 3.0), b = random_spd(rng, n, 3.0);
    const GeodesicSetting s = point_setting(random_spd(rng, n, 2.0), a, b);
    const BlockPath q = bent_path(rng, s, 12, 0.5);
    const double L = discrete_length(s.metric, q);
    CHECK(discrete_energy(s.metric, q) >= L * L * (1 - 1e-14));
  }
}

TEST_CASE("options and settings are validated") {
  OptimizerOptions o;
  o.K = 1;
  CHECK_THROWS_AS(o.validate(), StructuralError);
  o = OptimizerOptions{};
  o.grad_tol = 0.0;
  CHECK_THROWS_AS(o.validate(), StructuralError);
  const GeodesicSetting bad{PathMetric::l2(2, {1.0}), {SymMatrix::identity(2)}, {SymMatrix::identity(3)}};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("minimize with equal endpoints returns the constant path") {
  const SpdMatrix g = SpdMatrix::diagonal({2.0, 0.5});
  const GeodesicSetting s = point_setting(SpdMatrix::identity(2), g, g);
  const MinimizeResult r = minimize(s, {}, options(16));
  CHECK(r.length == 0.0);
  CHECK(r.diagnostics.iterations == 0);
  CHECK(r.diagnostics.status == OptimizerStatus::converged);
  for (int k = 0; k <= 16; ++k) CHECK(r.path.at(k, 0) == g.sym());
}

TEST_CASE("pointwise conformal pair matches the closed form") {
  const SpdMatrix i2 = SpdMatrix::identity(2);
  const GeodesicSetting s = point_setting(i2, i2, SpdMatrix::identity(2, 2.0));
  const std::vector<NamedPath> init{{"linear", linear_point_path(i2, SpdMatrix::identity(2, 2.0), 32)}};
  const MinimizeResult r = minimize(s, init, options(32));
  const double want = conformal_theta_oracle(i2, i2, 1.0, 2.0);
  CHECK(want == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(std::abs(r.length - want) <= 0.01 * want);
}

TEST_CASE("fixed-volume minimization recovers the closed-form geodesic") {
  Rng rng = trial_rng(42, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 2;
    const ChartPtr c = random_chart(rng, 3, n);
    const MetricField g0 = random_metric_field(rng, c, 2.0);
    std::vector<SymMatrix> hv;
    for (std::size_t i = 0; i < 3; ++i) hv.push_back(traceless_part(g0.at(i), random_symmetric(rng, n, 0.6)));
    const TangentField h(c, hv);
    const MetricField g1 = mu_exp(g0, h, 1.0);
    const int K = 32;
    const FieldDistanceResult r = field_distance(g0, g1, options(K), Initializer::linear, Constraint::fixed_volume);
    const double want = l2_norm(g0, h);
    CHECK(std::abs(r.length - want) <= 0.01 * want);
    CHECK(r.length >= want - discretization_tolerance(K, want));
    REQUIRE(r.path.has_value());
    for (const MetricField& f : r.path->frames)
      for (std::size_t i = 0; i < 3; ++i)
        CHECK(std::abs(sqrt_det(f.at(i)) - sqrt_det(g0.at(i))) <= 1e-8 * sqrt_det(g0.at(i)));
  }
}

TEST_CASE("analytic gradient agrees with finite differences") {
  Rng rng = trial_rng(43, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 3;
    GeodesicSetting s = point_setting(random_spd(rng, n, 2.0), random_spd(rng, n, 3.0), random_spd(rng, n, 3.0));
    if (trial % 2 == 1) {
      const ChartPtr c = random_chart(rng, 3, n);
      s = field_setting(random_metric_field(rng, c, 3.0), random_metric_field(rng, c, 3.0));
    }
    const BlockPath p = bent_path(rng, s, 8, 0.4);
    const Gradient a = analytic_gradient(s, p), f = finite_difference_gradient(s, p);
    REQUIRE(a.partials.size() == f.partials.size());
    const double scale = max_entry(a);
    for (std::size_t i = 0; i < a.partials.size(); ++i)
      CHECK((a.partials[i] - f.partials[i]).frobenius_norm() <= 1e-5 * scale);
    CHECK(forward_difference_discrepancy(s, p) <= 1e-4);
  }
}

TEST_CASE("gradient vanishes at a fixed-volume geodesic") {
  Rng rng = trial_rng(44, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 2;
    const ChartPtr c = random_chart(rng, 3, n);
    const MetricField g0 = random_metric_field(rng, c, 2.0);
    std::vector<SymMatrix> hv;
    for (std::size_t i = 0; i < 3; ++i) hv.push_back(traceless_part(g0.at(i), random_symmetric(rng, n, 0.6)));
    const TangentField h(c, hv);
    const int K = 32;
    std::vector<MetricField> frames;
    for (int k = 0; k <= K; ++k) frames.push_back(mu_exp(g0, h, static_cast<double>(k) / K));
    const DiscretePath path(c, frames);
    const GeodesicSetting s = field_setting(g0, frames.back(), Constraint::fixed_volume);
    const BlockPath bp = path.to_block_path();
    const double norm = riemannian_gradient_norm(s, bp, analytic_gradient(s, bp));
    CHECK(norm <= discretization_tolerance(K, l2_norm(g0, h)));

    // Same curve at non-constant speed: stationary only up to reparametrization.
    std::vector<MetricField> warped;
    for (int k = 0; k <= K; ++k) warped.push_back(mu_exp(g0, h, std::pow(static_cast<double>(k) / K, 2)));
    const BlockPath wp = DiscretePath(c, warped).to_block_path();
    CHECK(riemannian_gradient_norm(s, wp, analytic_gradient(s, wp)) > 100 * discretization_tolerance(K, l2_norm(g0, h)));
  }
}

TEST_CASE("gradient is symmetric under path reversal") {
  Rng rng = trial_rng(45, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 3;
    const GeodesicSetting s = point_setting(random_spd(rng, n, 2.0), random_spd(rng, n, 3.0), random_spd(rng, n, 3.0));
    const GeodesicSetting rs{s.metric, s.end, s.start};
    const int K = 10;
    const BlockPath p = bent_path(rng, s, K, 0.4);
    const Gradient a = analytic_gradient(s, p), b = analytic_gradient(rs, p.reversed());
    const double scale = max_entry(a);
    for (int k = 1; k < K; ++k)
      CHECK((a.partials[k - 1] - b.partials[K - k - 1]).frobenius_norm() <= 1e-13 * scale);
  }
}

TEST_CASE("minimize keeps energy monotone, iterates admissible and never loses to a candidate") {
  Rng rng = trial_rng(46, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 3;
    const ChartPtr c = random_chart(rng, 2, n);
    const MetricField g0 = random_metric_field(rng, c, 3.0), g1 = random_metric_field(rng, c, 3.0);
    const GeodesicSetting s = field_setting(g0, g1);
    const int K = 16;
    const std::vector<NamedPath> candidates{{"bent", bent_path(rng, s, K, 0.5)},
                                            {"linear", BlockPath::linear(s.start, s.end, K)},
                                            {"fiber", fiber_field_path(g0, g1, K).to_block_path()}};
    OptimizerOptions o = options(K);
    o.eig_floor = 0.05;
    const MinimizeResult r = minimize(s, candidates, o);
    const auto& trace = r.diagnostics.trace;
    REQUIRE(!trace.empty());
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i].energy <= trace[i - 1].energy);
    for (const NamedPath& cand : candidates) CHECK(r.length <= discrete_length(s.metric, cand.path));
    for (int k = 0; k <= K; ++k)
      for (std::size_t b = 0; b < r.path.blocks(); ++b)
        CHECK(min_eigenvalue(r.path.at(k, b)) >= o.eig_floor * min_endpoint_eig(s, b));
    CHECK(r.path.frame(0)[0] == s.start[0]);
    CHECK(r.path.frame(K)[0] == s.end[0]);
  }
}

TEST_CASE("doubling K does not lengthen the converged path beyond the discretization tolerance") {
  Rng rng = trial_rng(47, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 3;
    const ChartPtr c = random_chart(rng, 2, n);
    const MetricField g0 = random_metric_field(rng, c, 3.0), g1 = random_metric_field(rng, c, 3.0);
    const double coarse = field_distance(g0, g1, options(16)).length;
    const double fine = field_distance(g0, g1, options(32)).length;
    CHECK(fine <= coarse + discretization_tolerance(16, coarse));
  }
}

TEST_CASE("minimize is deterministic and independent of the worker count") {
  WorkerGuard guard;
  Rng rng = trial_rng(48, 0);
  const ChartPtr c = random_chart(rng, 5, 3);
  const MetricField g0 = random_metric_field(rng, c, 3.0), g1 = random_metric_field(rng, c, 3.0);
  set_worker_count(1);
  const FieldDistanceResult a = field_distance(g0, g1, options(16));
  set_worker_count(4);
  const FieldDistanceResult b = field_distance(g0, g1, options(16));
  const FieldDistanceResult d = field_distance(g0, g1, options(16));
  CHECK(a.length == b.length);
  CHECK(a.energy == b.energy);
  CHECK(b.length == d.length);
  REQUIRE(a.path.has_value());
  REQUIRE(b.path.has_value());
  CHECK(a.path->to_block_path().data() == b.path->to_block_path().data());
  CHECK(a.diagnostics.iterations == b.diagnostics.iterations);
}

TEST_CASE("field_distance portfolio is no worse than any single initializer") {
  Rng rng = trial_rng(49, 0);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + trial % 3;
    const ChartPtr c = random_chart(rng, 3, n);
    const MetricField g0 = random_metric_field(rng, c, 3.0), g1 = random_metric_field(rng, c, 3.0);
    const double best = field_distance(g0, g1, options(16), Initializer::best).length;
    for (Initializer init : {Initializer::linear, Initializer::fiber, Initializer::product}) {
      const FieldDistanceResult r = field_distance(g0, g1, options(16), init);
      CHECK(best <= r.length + discretization_tolerance(16, r.length));
    }
    CHECK(parse_initializer("product") == Initializer::product);
    CHECK_THROWS_AS(parse_initializer("nope"), StructuralError);
  }
}
