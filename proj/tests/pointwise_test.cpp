#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "metricspace/error.hpp"
#include "metricspace/field.hpp"
#include "metricspace/pointwise.hpp"
#include "oracles.hpp"

using namespace metricspace;

namespace {

SpdMatrix spd(const oracle::Mat& m) { return SpdMatrix(oracle::to_sym(m)); }

PointPath conformal_path(int n, double f0, double f1, int K) {
  std::vector<SpdMatrix> s;
  for (int k = 0; k <= K; ++k) s.push_back(SpdMatrix::identity(n, f0 + (f1 - f0) * k / K));
  return PointPath(std::move(s));
}

OptimizerOptions options(int K) {
  OptimizerOptions o;
  o.K = K;
  return o;
}

}  // namespace

TEST_CASE("inner_point examples") {
  const SymMatrix i2 = SymMatrix::identity(2);
  CHECK(inner_point(SpdMatrix::identity(2), i2, i2) == doctest::Approx(2.0));
  CHECK(inner_point(SpdMatrix::identity(2, 2.0), i2, i2) == doctest::Approx(0.5));
  CHECK(inner_point(SpdMatrix::identity(2), SymMatrix::diagonal({1, 0}), SymMatrix::diagonal({0, 1})) == 0.0);
}

TEST_CASE("inner0_point examples") {
  const SymMatrix i2 = SymMatrix::identity(2);
  const SpdMatrix id = SpdMatrix::identity(2);
  CHECK(inner0_point(id, id, i2, i2) == doctest::Approx(2.0));
  CHECK(inner0_point(id, SpdMatrix::identity(2, 2.0), i2, i2) == doctest::Approx(2.0));
  CHECK(inner0_point(SpdMatrix::identity(2, 4.0), id, i2, i2) == doctest::Approx(0.125));
}

TEST_CASE("inner0_point matches the oracle") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4;
    const oracle::Mat r = oracle::random_spd(rng, n, 3.0);
    const oracle::Mat g = oracle::random_spd(rng, n, 3.0);
    const oracle::Mat h = oracle::random_symmetric(rng, n, 1.0);
    const oracle::Mat k = oracle::random_symmetric(rng, n, 1.0);
    CHECK(inner0_point(spd(r), spd(g), oracle::to_sym(h), oracle::to_sym(k)) ==
          doctest::Approx(oracle::inner0(r, g, h, k)).epsilon(1e-10));
  }
}

TEST_CASE("point_path_length examples") {
  const SpdMatrix id = SpdMatrix::identity(2);
  CHECK(point_path_length(id, PointPath(std::vector<SpdMatrix>(5, id))) == 0.0);
  const PointPath p = conformal_path(2, 1.0, 2.0, 1000);
  CHECK(std::abs(point_path_length(id, p) - std::sqrt(2.0)) < 1e-3);
  CHECK(std::abs(point_path_length(SpdMatrix::identity(2, 4.0), p) - std::sqrt(2.0) / 4) < 1e-3);
}

TEST_CASE("point_path_length converges to the quadrature length of a curved path") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 3;
    const oracle::Mat r = oracle::random_spd(rng, n, 2.0);
    const oracle::Mat g0 = oracle::random_spd(rng, n, 2.0);
    const oracle::Mat a = oracle::random_symmetric(rng, n, 0.5);
    const oracle::Mat b = oracle::random_symmetric(rng, n, 0.5);
    // g(t) = g0 + t a + t^2 b b^T keeps g SPD for small a, b.
    const oracle::Mat bb = b * b.transpose();
    auto g = [&](double t) -> oracle::Mat { return g0 + t * t * bb + t * 0.3 * a; };
    auto dg = [&](double t) -> oracle::Mat { return 2 * t * bb + 0.3 * a; };
    const double want = oracle::path_length(g, dg, [&](const oracle::Mat& m, const oracle::Mat& d) {
      return oracle::inner0(r, m, d, d);
    });
    constexpr int K = 400;
    std::vector<SpdMatrix> s;
    for (int k = 0; k <= K; ++k) s.push_back(spd(g(static_cast<double>(k) / K)));
    CHECK(oracle::rel_err(point_path_length(spd(r), PointPath(s)), want) < 1e-5);
  }
}

TEST_CASE("conformal_theta_oracle examples and quadrature cross-check") {
  const SpdMatrix id = SpdMatrix::identity(2);
  CHECK(conformal_theta_oracle(id, id, 3.0, 3.0) == 0.0);
  CHECK(conformal_theta_oracle(id, id, 1.0, 2.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(conformal_theta_oracle(SpdMatrix::identity(2, 4.0), id, 1.0, 2.0) == doctest::Approx(std::sqrt(2.0) / 4));
  CHECK_THROWS_AS(conformal_theta_oracle(id, id, 0.0, 2.0), DomainError);
  CHECK_THROWS_AS(conformal_theta_oracle(id, id, 1.0, -1.0), DomainError);

  std::mt19937_64 rng(6);
  for (int n = 1; n <= 4; ++n) {
    const oracle::Mat r = oracle::random_spd(rng, n, 3.0);
    const oracle::Mat g0 = oracle::random_spd(rng, n, 3.0);
    const double f0 = 0.5, f1 = 3.0;
    const double want = oracle::path_length([&](double t) -> oracle::Mat { return (f0 + (f1 - f0) * t) * g0; },
                                            [&](double) -> oracle::Mat { return (f1 - f0) * g0; },
                                            [&](const oracle::Mat& m, const oracle::Mat& d) {
                                              return oracle::inner0(r, m, d, d);
                                            });
    CHECK(conformal_theta_oracle(spd(r), spd(g0), f0, f1) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("theta_distance of equal endpoints is zero with a constant path") {
  const SpdMatrix a = SpdMatrix::diagonal({2.0, 3.0});
  const ThetaResult r = theta_distance(SpdMatrix::identity(2), a, a, options(16));
  CHECK(r.value == 0.0);
  CHECK(r.diagnostics.iterations == 0);
  for (const SpdMatrix& s : r.path.samples()) CHECK(s == a);
}

TEST_CASE("theta_distance along conformal endpoints") {
  for (double f : {0.25, 0.5, 2.0, 4.0}) {
    const ThetaResult r = theta_distance(SpdMatrix::identity(2), SpdMatrix::identity(2),
                                         SpdMatrix::identity(2, f), options(32));
    CHECK(oracle::rel_err(r.value, std::sqrt(2.0) * std::abs(f - 1)) < 0.01);
  }
  std::mt19937_64 rng(8);
  for (int n = 1; n <= 3; ++n) {
    const SpdMatrix ref = spd(oracle::random_spd(rng, n, 2.0));
    const SpdMatrix g0 = spd(oracle::random_spd(rng, n, 2.0));
    for (double f : {0.25, 0.5, 2.0, 4.0}) {
      const ThetaResult r =
          theta_distance(ref, g0, SpdMatrix(f * g0.sym()), options(32));
      CHECK(oracle::rel_err(r.value, conformal_theta_oracle(ref, g0, 1.0, f)) < 0.01);
    }
  }
}

TEST_CASE("theta_distance never exceeds the fiber path") {
  const SpdMatrix id = SpdMatrix::identity(2);
  const SpdMatrix b = SpdMatrix::diagonal({std::numbers::e, 1 / std::numbers::e});
  const ThetaResult r = theta_distance(id, id, b, options(32));
  const double fiber = point_path_length(id, PointPath::from_block_path(fiber_point_path(id, b, 32)));
  const double linear = point_path_length(id, PointPath::from_block_path(linear_point_path(id, b, 32)));
  CHECK(r.value <= fiber);
  CHECK(r.value <= linear);
}

TEST_CASE("theta_distance matches the cone-distance oracle") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3;
    const oracle::Mat r = oracle::random_spd(rng, n, 2.0);
    const oracle::Mat a = oracle::random_spd(rng, n, 2.0);
    const oracle::Mat b = oracle::random_spd(rng, n, 2.0);
    const double want = oracle::cone_theta(r, a, b);
    constexpr int K = 32;
    const ThetaResult got = theta_distance(spd(r), spd(a), spd(b), options(K));
    CHECK(got.diagnostics.status == OptimizerStatus::converged);
    CHECK(std::abs(got.value - want) <= discretization_tolerance(K, want));
  }
}

TEST_CASE("theta_distance is symmetric and satisfies the triangle inequality with certificates") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 3;
    const SpdMatrix ref = spd(oracle::random_spd(rng, n, 3.0));
    const SpdMatrix a = spd(oracle::random_spd(rng, n, 3.0));
    const SpdMatrix b = spd(oracle::random_spd(rng, n, 3.0));
    const SpdMatrix c = spd(oracle::random_spd(rng, n, 3.0));
    const OptimizerOptions o = options(16);
    const ThetaResult ab = theta_distance(ref, a, b, o);
    const ThetaResult ba = theta_distance(ref, b, a, o);
    CHECK(std::abs(ab.value - ba.value) <= kOptimizerBudget * std::max(1.0, ab.value));
    // Reversing a returned path certifies the other direction exactly.
    CHECK(point_path_length(ref, ab.path.reversed()) == doctest::Approx(ab.value).epsilon(1e-14));

    const ThetaResult bc = theta_distance(ref, b, c, o);
    const BlockPath via_b = ab.path.to_block_path().then(bc.path.to_block_path());
    const ThetaResult ac = theta_distance(ref, a, c, o, std::span<const BlockPath>(&via_b, 1));
    CHECK(ac.value <= ab.value + bc.value + 1e-12 * (ab.value + bc.value));
  }
}

TEST_CASE("pointwise reference independence") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 3;
    const SpdMatrix r1 = spd(oracle::random_spd(rng, n, 3.0));
    const SpdMatrix r2 = spd(oracle::random_spd(rng, n, 3.0));
    const SpdMatrix a = spd(oracle::random_spd(rng, n, 3.0));
    const SpdMatrix b = spd(oracle::random_spd(rng, n, 3.0));
    const double t1 = theta_distance(r1, a, b, options(16)).value * sqrt_det(r1);
    const double t2 = theta_distance(r2, a, b, options(16)).value * sqrt_det(r2);
    CHECK(oracle::rel_err(t1, t2) < 1e-3);
  }
}

TEST_CASE("theta_distance is positive and above the radial lower bound") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3;
    const SpdMatrix ref = spd(oracle::random_spd(rng, n, 3.0));
    const SpdMatrix a = spd(oracle::random_spd(rng, n, 3.0));
    const SpdMatrix b = spd(oracle::random_spd(rng, n, 3.0));
    constexpr int K = 16;
    const double theta = theta_distance(ref, a, b, options(K)).value;
    const double lb = theta_radial_lower_bound(ref, a, b);
    CHECK(theta > 0.0);
    CHECK(lb >= 0.0);
    CHECK(theta >= lb - discretization_tolerance(K, lb));
    CHECK(lb <= oracle::cone_theta(oracle::to_mat(ref), oracle::to_mat(a), oracle::to_mat(b)) * (1 + 1e-12));
  }
}

TEST_CASE("theta_distance reports boundary stalls as OptimizerError") {
  // The cone geodesic between these endpoints dips far below both of them.
  const SpdMatrix a = SpdMatrix::diagonal({1.0, 100.0});
  const SpdMatrix b = SpdMatrix::diagonal({100.0, 1.0});
  OptimizerOptions o = options(16);
  o.eig_floor = 0.9;
  try {
    theta_distance(SpdMatrix::identity(2), a, b, o);
    FAIL("expected a boundary stall");
  } catch (const OptimizerError& e) {
    const double linear = point_path_length(SpdMatrix::identity(2),
                                            PointPath::from_block_path(linear_point_path(a, b, 16)));
    CHECK(e.best_so_far() > 0.0);
    CHECK(e.best_so_far() <= linear);
  }
}
