// metricspace command-line tool.
//
// Exit codes: 0 ok, 1 failed check, 2 bad input or usage, 3 domain error,
// 4 optimizer boundary stall.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "metricspace/distance.hpp"
#include "metricspace/error.hpp"
#include "metricspace/field.hpp"
#include "metricspace/io.hpp"
#include "metricspace/product.hpp"
#include "metricspace/random.hpp"
#include "metricspace/suites.hpp"

using namespace metricspace;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitDomain = 3;
constexpr int kExitOptimizer = 4;

void print_scalar(double v) { std::printf("%.15g\n", v); }

void emit(const Json& doc, const std::string& out) {
  if (out.empty()) {
    std::cout << dump_json(doc);
  } else {
    write_json_file(out, doc);
  }
}

Region parse_region(const QuadChart& chart, const std::string& list) {
  if (list.empty()) return Region::all(chart);
  std::vector<std::string> ids;
  std::stringstream ss(list);
  for (std::string id; std::getline(ss, id, ',');)
    if (!id.empty()) ids.push_back(id);
  return Region::from_ids(chart, ids);
}

struct OptFlags {
  OptimizerOptions opts;
  std::string init = "best";

  void attach(CLI::App* cmd, bool with_init) {
    cmd->add_option("--K", opts.K, "Path segments")->check(CLI::Range(2, 100000));
    cmd->add_option("--max-iters", opts.max_iters, "Descent iteration cap")->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", opts.seed, "Seed recorded with the run");
    cmd->add_option("--eig-floor", opts.eig_floor, "Admissibility floor relative to endpoint eigenvalues")
        ->check(CLI::Range(0.0, 1.0));
    if (with_init) {
      cmd->add_option("--init", init, "Initializer")->check(CLI::IsMember({"linear", "fiber", "product", "best"}));
    }
  }
};

int run_dist(const std::string& f0, const std::string& f1, const OptFlags& flags, const std::string& constraint,
             const std::string& out, const std::string& trace, bool json) {
  const MetricField g0 = read_metric_field(f0);
  const MetricField g1 = read_metric_field(f1);
  const FieldDistanceResult r =
      field_distance(g0, g1, flags.opts, parse_initializer(flags.init),
                     constraint == "fixed-volume" ? Constraint::fixed_volume : Constraint::none);
  if (!out.empty() && r.path) write_json_file(out, to_json(*r.path));
  if (!trace.empty()) {
    std::ofstream t(trace, std::ios::binary);
    if (!t) throw ParseError(trace + ": cannot open file for writing");
    for (const IterationRecord& rec : r.diagnostics.trace) t << to_json(rec).dump() << "\n";
  }
  if (json) {
    std::cout << dump_json({{"length", r.length}, {"energy", r.energy}, {"diagnostics", to_json(r.diagnostics)}});
  } else {
    print_scalar(r.length);
  }
  if (r.diagnostics.status == OptimizerStatus::boundary_stall) {
    std::cerr << "metricspace: optimizer stalled at the cone boundary; best length so far "
              << r.length << (out.empty() ? "" : " written to " + out) << "\n";
    return kExitOptimizer;
  }
  return 0;
}

int run_theta(const std::string& fr, const std::string& f0, const std::string& f1, const std::string& region_ids,
              const OptFlags& flags, const std::string& out) {
  const MetricField ref = read_metric_field(fr);
  const MetricField g0 = read_metric_field(f0);
  const MetricField g1 = read_metric_field(f1);
  const Region region = parse_region(*ref.chart, region_ids);
  const ThetaYResult r = theta_Y(ref, g0, g1, region, flags.opts);
  Json points = Json::array();
  for (const ThetaPoint& p : r.points) {
    points.push_back({{"id", p.id}, {"theta", p.theta}, {"measure", p.measure}, {"returned", p.returned},
                      {"status", to_string(p.status)}});
  }
  emit({{"check", "theta"}, {"value", r.value}, {"details", {{"K", flags.opts.K}, {"points", points}}}}, out);
  return 0;
}

int run_check(const std::string& suite, std::uint64_t seed, int trials, int first, double tolerance_scale,
              const std::string& out) {
  const CheckReport r = run_suite(suite, seed, trials, first, tolerance_scale);
  emit(to_json(r), out);
  if (!r.pass) {
    for (const auto& f : r.details["failures"]) {
      std::cerr << "metricspace: " << suite << " failed check '" << f["check"].get<std::string>() << "' at seed "
                << seed << " trial " << f["trial"].get<int>() << "; replay: " << f["replay"].get<std::string>()
                << "\n";
    }
    return kExitCheckFailed;
  }
  return 0;
}

struct GenFlags {
  std::string kind;
  int points = 4;
  int n = 2;
  std::uint64_t seed = 0;
  double spread = 2.0;
  int K = 16;
  double amplitude = 0.5;
  std::string out;
};

int run_gen(const GenFlags& g) {
  Rng rng = trial_rng(g.seed, 0);
  const ChartPtr chart = uniform_chart(g.points, g.n);
  Json doc;
  if (g.kind == "metric-field") {
    doc = to_json(random_metric_field(rng, chart, g.spread));
  } else if (g.kind == "density") {
    doc = to_json(random_density(rng, chart, g.spread));
  } else {
    doc = to_json(random_path(rng, random_metric_field(rng, chart, g.spread), g.K, g.amplitude));
  }
  emit(doc, g.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometry of the space of Riemannian metrics under the L2 metric"};
  app.require_subcommand(1);

  std::string f0, f1, f2, out, trace, region, constraint = "none";
  bool json = false;
  OptFlags flags;

  auto* inner = app.add_subcommand("inner", "L2 inner product <g, h, k>");
  inner->add_option("metric", f0)->required();
  inner->add_option("tangent1", f1)->required();
  inner->add_option("tangent2", f2)->required();

  auto* norm = app.add_subcommand("norm", "L2 norm of a tangent field");
  norm->add_option("metric", f0)->required();
  norm->add_option("tangent", f1)->required();

  auto* vol = app.add_subcommand("vol", "Volume of a region");
  vol->add_option("metric", f0)->required();
  vol->add_option("--region", region, "Comma-separated point ids (default: all)");

  auto* dist = app.add_subcommand("dist", "Upper bound on the L2 distance");
  dist->add_option("g0", f0)->required();
  dist->add_option("g1", f1)->required();
  flags.attach(dist, true);
  dist->add_option("--constraint", constraint, "Keep the volume form fixed")
      ->check(CLI::IsMember({"none", "fixed-volume"}));
  dist->add_option("--out", out, "Path file to write");
  dist->add_option("--trace", trace, "Iteration trace (JSON lines)");
  dist->add_flag("--json", json, "Print a JSON summary");

  auto* theta = app.add_subcommand("theta", "Integrated distance Theta over a region");
  theta->add_option("gref", f0)->required();
  theta->add_option("g0", f1)->required();
  theta->add_option("g1", f2)->required();
  theta->add_option("--region", region, "Comma-separated point ids (default: all)");
  flags.attach(theta, false);
  theta->add_option("--out", out, "Report file");

  std::string suite;
  std::uint64_t seeds = 0;
  int trials = 20, first_trial = 0;
  double tolerance_scale = 1.0;
  auto* check = app.add_subcommand("check", "Randomized property suite");
  check->add_option("suite", suite)->required()->check(CLI::IsMember(suite_names()));
  check->add_option("--seeds", seeds, "Base seed");
  check->add_option("--trials", trials, "Number of trials")->check(CLI::NonNegativeNumber);
  check->add_option("--first-trial", first_trial, "Index of the first trial")->check(CLI::NonNegativeNumber);
  check->add_option("--tolerance-scale", tolerance_scale, "Multiplier on every check tolerance")
      ->check(CLI::NonNegativeNumber);
  check->add_option("--out", out, "Report file");

  GenFlags gen_flags;
  auto* gen = app.add_subcommand("gen", "Random instance");
  gen->add_option("kind", gen_flags.kind)->required()->check(CLI::IsMember({"metric-field", "density", "path"}));
  gen->add_option("--points", gen_flags.points)->check(CLI::Range(1, 1000000));
  gen->add_option("--n", gen_flags.n)->check(CLI::Range(1, static_cast<int>(kMaxDim)));
  gen->add_option("--seed", gen_flags.seed);
  gen->add_option("--spread", gen_flags.spread, "Eigenvalue range [1/spread, spread]")
      ->check(CLI::Range(1.0, 1e12));
  gen->add_option("--K", gen_flags.K, "Segments (path)")->check(CLI::Range(1, 100000));
  gen->add_option("--amplitude", gen_flags.amplitude, "Tangent scale (path)")->check(CLI::Range(0.0, 10.0));
  gen->add_option("--out", gen_flags.out, "Output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*inner) {
      const MetricField g = read_metric_field(f0);
      const TangentField h = read_tangent_field(f1);
      const TangentField k = read_tangent_field(f2);
      print_scalar(l2_inner(g, h, k));
    } else if (*norm) {
      const MetricField g = read_metric_field(f0);
      print_scalar(l2_norm(g, read_tangent_field(f1)));
    } else if (*vol) {
      const MetricField g = read_metric_field(f0);
      print_scalar(volume(g, parse_region(*g.chart, region)));
    } else if (*dist) {
      return run_dist(f0, f1, flags, constraint, out, trace, json);
    } else if (*theta) {
      return run_theta(f0, f1, f2, region, flags, out);
    } else if (*check) {
      return run_check(suite, seeds, trials, first_trial, tolerance_scale, out);
    } else if (*gen) {
      return run_gen(gen_flags);
    }
  } catch (const ParseError& e) {
    std::cerr << "metricspace: " << e.what() << "\n";
    return kExitInput;
  } catch (const StructuralError& e) {
    std::cerr << "metricspace: " << e.what() << "\n";
    return kExitInput;
  } catch (const DomainError& e) {
    std::cerr << "metricspace: " << e.what() << "\n";
    return kExitDomain;
  } catch (const OptimizerError& e) {
    std::cerr << "metricspace: " << e.what() << "; best length so far " << e.best_so_far() << "\n";
    return kExitOptimizer;
  }
  return 0;
}
