#include "metricspace/distance.hpp"

#include "metricspace/error.hpp"

namespace metricspace {

Initializer parse_initializer(const std::string& name) {
  if (name == "linear") return Initializer::linear;
  if (name == "fiber") return Initializer::fiber;
  if (name == "product") return Initializer::product;
  if (name == "best") return Initializer::best;
  throw StructuralError("unknown initializer '" + name + "' (expected linear|fiber|product|best)");
}

std::string to_string(Initializer init) {
  switch (init) {
    case Initializer::linear:
      return "linear";
    case Initializer::fiber:
      return "fiber";
    case Initializer::product:
      return "product";
    case Initializer::best:
      return "best";
  }
  return "unknown";
}

GeodesicSetting field_setting(const MetricField& g0, const MetricField& g1, Constraint constraint) {
  require_same_chart(*g0.chart, *g1.chart);
  return {l2_path_metric(*g0.chart), g0.syms(), g1.syms(), constraint};
}

DiscretePath fiber_field_path(const MetricField& g0, const MetricField& g1, int segments) {
  require_same_chart(*g0.chart, *g1.chart);
  std::vector<SymMatrix> logs;
  for (std::size_t i = 0; i < g0.values.size(); ++i) logs.push_back(spd_log_from(g0.at(i), g1.at(i)));
  std::vector<MetricField> frames{g0};
  for (int k = 1; k < segments; ++k) {
    const double t = static_cast<double>(k) / segments;
    std::vector<SpdMatrix> v;
    for (std::size_t i = 0; i < logs.size(); ++i) v.push_back(spd_exp_from(g0.at(i), t * logs[i]));
    frames.emplace_back(g0.chart, std::move(v));
  }
  frames.push_back(g1);
  return DiscretePath(g0.chart, std::move(frames));
}

DiscretePath linear_field_path(const MetricField& g0, const MetricField& g1, int segments) {
  require_same_chart(*g0.chart, *g1.chart);
  const std::vector<SymMatrix> a = g0.syms();
  const std::vector<SymMatrix> b = g1.syms();
  return DiscretePath::from_block_path(g0.chart, BlockPath::linear(a, b, segments));
}

FieldDistanceResult field_distance(const MetricField& g0, const MetricField& g1, const OptimizerOptions& opts,
                                   Initializer init, Constraint constraint) {
  opts.validate();
  const GeodesicSetting setting = field_setting(g0, g1, constraint);
  std::vector<NamedPath> candidates;
  if (init == Initializer::linear || init == Initializer::best) {
    candidates.push_back({"linear", BlockPath::linear(setting.start, setting.end, opts.K)});
  }
  if (init == Initializer::fiber || init == Initializer::best) {
    candidates.push_back({"fiber", fiber_field_path(g0, g1, opts.K).to_block_path()});
  }
  if (init == Initializer::product || init == Initializer::best) {
    candidates.push_back({"product", product_path(g0, g1, induced_density(g0), opts.K).to_block_path()});
  }

  MinimizeResult m = minimize(setting, candidates, opts);
  FieldDistanceResult out;
  out.path = DiscretePath::from_block_path(g0.chart, m.path);
  out.length = m.length;
  out.energy = m.energy;
  out.diagnostics = std::move(m.diagnostics);
  return out;
}

}  // namespace metricspace
