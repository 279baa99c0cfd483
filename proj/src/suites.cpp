#include "metricspace/suites.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <functional>
#include <limits>

#include "metricspace/error.hpp"
#include "metricspace/field.hpp"
#include "metricspace/product.hpp"
#include "metricspace/random.hpp"

namespace metricspace {

namespace {

struct Trial {
  int n = 1;
  std::size_t points = 1;
  std::vector<CheckReport> checks;
};

using TrialFn = std::function<Trial(Rng&, int)>;

int dim_for(int trial) { return 1 + trial % 3; }

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

OptimizerOptions suite_options() {
  OptimizerOptions opts;
  opts.K = 16;
  return opts;
}

double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

Trial lemma_sqrtvol(Rng& rng, int trial) {
  Trial t{dim_for(trial), static_cast<std::size_t>(uniform_int(rng, 1, 6)), {}};
  const ChartPtr chart = random_chart(rng, static_cast<int>(t.points), t.n);
  const MetricField g0 = random_metric_field(rng, chart, 3.0);
  const DiscretePath path = random_path(rng, g0, 64, 0.5);
  std::vector<std::size_t> subset;
  std::bernoulli_distribution keep(0.6);
  for (std::size_t i = 0; i < t.points; ++i)
    if (keep(rng)) subset.push_back(i);
  if (subset.empty()) subset.push_back(static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(t.points) - 1)));
  t.checks.push_back(check_lipschitz_sqrtvol(path, Region::from_indices(*chart, subset)));
  return t;
}

Trial theta_bound(Rng& rng, int trial) {
  Trial t{dim_for(trial), static_cast<std::size_t>(uniform_int(rng, 1, 4)), {}};
  const ChartPtr chart = random_chart(rng, static_cast<int>(t.points), t.n);
  const MetricField g0 = random_metric_field(rng, chart, 2.0);
  const DiscretePath path = random_path(rng, g0, 16, 0.4);
  const MetricField g_ref = random_metric_field(rng, chart, 2.0);
  t.checks.push_back(check_theta_bound(path, g_ref, suite_options()));
  return t;
}

Trial theta_refindep(Rng& rng, int trial) {
  Trial t{dim_for(trial), 8, {}};
  const ChartPtr chart = random_chart(rng, 8, t.n);
  const MetricField g0 = random_metric_field(rng, chart, 3.0);
  const MetricField g1 = random_metric_field(rng, chart, 3.0);
  const MetricField ref_a = random_metric_field(rng, chart, 3.0);
  const MetricField ref_b = random_metric_field(rng, chart, 3.0);
  t.checks.push_back(
      check_theta_reference_independence(g0, g1, ref_a, ref_b, Region::all(*chart), suite_options()));
  return t;
}

/// Joins the per-point paths a -> b and b -> c into one field path a -> c.
DiscretePath concatenate(const ChartPtr& chart, const ThetaYResult& ab, const ThetaYResult& bc) {
  std::vector<BlockPath> joined;
  for (std::size_t i = 0; i < ab.points.size(); ++i) {
    joined.push_back(ab.points[i].path.to_block_path().then(bc.points[i].path.to_block_path()));
  }
  const int segments = joined.front().segments();
  std::vector<MetricField> frames;
  for (int k = 0; k <= segments; ++k) {
    std::vector<SpdMatrix> v;
    for (const BlockPath& p : joined) {
      if (p.segments() != segments) throw StructuralError("point paths differ in K");
      v.emplace_back(p.at(k, 0));
    }
    frames.emplace_back(chart, std::move(v));
  }
  return DiscretePath(chart, std::move(frames));
}

Trial pseudometric(Rng& rng, int trial) {
  Trial t{dim_for(trial), static_cast<std::size_t>(uniform_int(rng, 1, 3)), {}};
  const ChartPtr chart = random_chart(rng, static_cast<int>(t.points), t.n);
  const MetricField a = random_metric_field(rng, chart, 3.0);
  const MetricField b = random_metric_field(rng, chart, 3.0);
  const MetricField c = random_metric_field(rng, chart, 3.0);
  const MetricField ref = random_metric_field(rng, chart, 3.0);
  const Region all = Region::all(*chart);
  const OptimizerOptions opts = suite_options();

  const ThetaYResult ab = theta_Y(ref, a, b, all, opts);
  const ThetaYResult ba = theta_Y(ref, b, a, all, opts);
  const ThetaYResult bc = theta_Y(ref, b, c, all, opts);
  const DiscretePath via_b = concatenate(chart, ab, bc);
  const ThetaYResult ac = theta_Y(ref, a, c, all, opts, &via_b);
  const ThetaYResult aa = theta_Y(ref, a, a, all, opts);

  const double scale = std::max({1.0, ab.value, ac.value, bc.value});
  t.checks.push_back(
      CheckReport::upper_bound("symmetry", std::abs(ab.value - ba.value), 0.0, kOptimizerBudget * scale));
  t.checks.push_back(CheckReport::upper_bound("triangle", ac.value, ab.value + bc.value, 1e-12 * scale));
  t.checks.push_back(CheckReport::upper_bound("identity", aa.value, 0.0, 0.0));

  std::vector<double> lower(ab.points.size());
  for (std::size_t i = 0; i < lower.size(); ++i) {
    lower[i] = ab.points[i].measure * theta_radial_lower_bound(ref.at(i), a.at(i), b.at(i));
  }
  double lb = 0.0;
  for (double v : lower) lb += v;
  // The bound holds for exact lengths; midpoint-rule lengths may undershoot it.
  t.checks.push_back(
      CheckReport::upper_bound("lower-bound", lb, ab.value, discretization_tolerance(opts.K, scale)));
  t.checks.push_back(CheckReport::upper_bound("positivity", std::numeric_limits<double>::min(), ab.value, 0.0));
  return t;
}

Trial exp_invariants(Rng& rng, int trial) {
  Trial t{dim_for(trial), static_cast<std::size_t>(uniform_int(rng, 1, 8)), {}};
  constexpr int K = 256;
  const ChartPtr chart = random_chart(rng, static_cast<int>(t.points), t.n);

  const VolumeDensity nu0 = random_density(rng, chart, 3.0);
  std::uniform_real_distribution<double> ratio(-1.5, 1.5);
  std::vector<double> a(t.points);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = ratio(rng) * nu0.at(i);
  const DensityTangent alpha(chart, a);
  std::vector<VolumeDensity> vol_samples;
  for (int k = 0; k <= K; ++k) vol_samples.push_back(vol_exp(nu0, alpha, static_cast<double>(k) / K));
  const double vol_speed = std::sqrt(vol_inner(nu0, alpha, alpha));
  const double vol_len = density_path_length(vol_samples);
  t.checks.push_back(CheckReport::upper_bound("vol-length", rel_diff(vol_len, vol_speed), 0.0,
                                              discretization_tolerance(K)));
  const DensityTangent alpha_back = vol_log(nu0, vol_samples.back());
  double vol_round = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) vol_round = std::max(vol_round, std::abs(alpha_back.at(i) - a[i]) / nu0.at(i));
  t.checks.push_back(CheckReport::upper_bound("vol-roundtrip", vol_round, 0.0, 1e-10));

  // In dimension one the only traceless tangent is zero.
  if (t.n == 1) return t;
  const MetricField g0 = random_metric_field(rng, chart, 3.0);
  std::vector<SymMatrix> hs;
  for (std::size_t i = 0; i < t.points; ++i) hs.push_back(traceless_part(g0.at(i), random_symmetric(rng, t.n, 0.5)));
  const TangentField h(chart, hs);
  std::vector<MetricField> frames;
  for (int k = 0; k <= K; ++k) frames.push_back(mu_exp(g0, h, static_cast<double>(k) / K));
  const DiscretePath path(chart, frames);
  const double mu_speed = l2_norm(g0, h);
  t.checks.push_back(CheckReport::upper_bound("mu-length", rel_diff(path_length(path), mu_speed), 0.0,
                                              discretization_tolerance(K)));
  const VolumeDensity start = induced_density(g0);
  const VolumeDensity end = induced_density(frames.back());
  double drift = 0.0;
  for (std::size_t i = 0; i < t.points; ++i) drift = std::max(drift, rel_diff(start.at(i), end.at(i)));
  t.checks.push_back(CheckReport::upper_bound("mu-volume", drift, 0.0, 1e-10));
  const TangentField h_back = mu_log(g0, frames.back());
  double mu_round = 0.0;
  for (std::size_t i = 0; i < t.points; ++i) {
    const double size = std::sqrt(trace_pair(g0.at(i), h.at(i), h.at(i)));
    const SymMatrix d = h_back.at(i) - h.at(i);
    mu_round = std::max(mu_round, std::sqrt(std::max(0.0, trace_pair(g0.at(i), d, d))) / std::max(size, 1e-300));
  }
  t.checks.push_back(CheckReport::upper_bound("mu-roundtrip", mu_round, 0.0, 1e-8));
  return t;
}

const std::vector<std::pair<std::string, TrialFn>>& registry() {
  static const std::vector<std::pair<std::string, TrialFn>> suites = {
      {"lemma-sqrtvol", lemma_sqrtvol},
      {"theta-bound", theta_bound},
      {"theta-refindep", theta_refindep},
      {"pseudometric", pseudometric},
      {"exp-invariants", exp_invariants},
  };
  return suites;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

CheckReport run_suite(const std::string& name, std::uint64_t seed, int trials, int first_trial,
                      double tolerance_scale) {
  const auto& reg = registry();
  auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& e) { return e.first == name; });
  if (it == reg.end()) throw StructuralError("unknown suite '" + name + "'");
  if (trials < 0 || first_trial < 0) throw StructuralError("trial counts must be nonnegative");
  if (!(tolerance_scale >= 0.0) || !std::isfinite(tolerance_scale))
    throw StructuralError("tolerance scale must be finite and nonnegative");
  std::string replay_suffix;
  if (tolerance_scale != 1.0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " --tolerance-scale %.17g", tolerance_scale);
    replay_suffix = buf;
  }

  CheckReport agg;
  agg.check = name;
  agg.pass = true;
  nlohmann::json records = nlohmann::json::array();
  nlohmann::json failures = nlohmann::json::array();
  bool have_worst = false;
  double worst_margin = 0.0;

  for (int trial = first_trial; trial < first_trial + trials; ++trial) {
    Rng rng = trial_rng(seed, static_cast<std::uint64_t>(trial));
    Trial t = it->second(rng, trial);
    nlohmann::json checks = nlohmann::json::array();
    for (CheckReport& c : t.checks) {
      if (tolerance_scale != 1.0) {
        c.tolerance *= tolerance_scale;
        c.pass = c.slack >= -c.tolerance;
      }
      checks.push_back({{"check", c.check}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"slack", c.slack},
                        {"tolerance", c.tolerance}, {"pass", c.pass}});
      const double margin = c.slack + c.tolerance;
      if (!have_worst || margin < worst_margin) {
        have_worst = true;
        worst_margin = margin;
        agg.lhs = c.lhs;
        agg.rhs = c.rhs;
        agg.slack = c.slack;
        agg.tolerance = c.tolerance;
      }
      if (!c.pass) {
        agg.pass = false;
        failures.push_back({{"trial", trial}, {"seed", seed}, {"check", c.check}, {"n", t.n},
                            {"points", t.points},
                            {"replay", "metricspace check " + name + " --seeds " + std::to_string(seed) +
                                            " --trials 1 --first-trial " + std::to_string(trial) + replay_suffix}});
      }
    }
    records.push_back({{"trial", trial}, {"n", t.n}, {"points", t.points}, {"checks", std::move(checks)}});
  }
  agg.details = {{"seed", seed}, {"trials", std::move(records)}, {"failures", std::move(failures)}};
  return agg;
}

}  // namespace metricspace
