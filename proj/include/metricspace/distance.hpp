#pragma once

// Upper bounds on the L2 distance between two metric fields by discrete
// path-energy minimization.

#include <optional>
#include <string>

#include "metricspace/field.hpp"
#include "metricspace/optimizer.hpp"
#include "metricspace/product.hpp"

namespace metricspace {

enum class Initializer { linear, fiber, product, best };

Initializer parse_initializer(const std::string& name);
std::string to_string(Initializer init);

/// Geodesic problem for the L2 metric between two fields on one chart.
/// With Constraint::fixed_volume the frames stay in the set of metrics
/// inducing the start field's volume form.
GeodesicSetting field_setting(const MetricField& g0, const MetricField& g1, Constraint constraint = Constraint::none);

/// Pointwise fiber-exponential path spd_exp_from(g0, t spd_log_from(g0, g1)).
DiscretePath fiber_field_path(const MetricField& g0, const MetricField& g1, int segments);
DiscretePath linear_field_path(const MetricField& g0, const MetricField& g1, int segments);

struct FieldDistanceResult {
  /// Empty only if no admissible path was found.
  std::optional<DiscretePath> path;
  double length = 0.0;
  double energy = 0.0;
  Diagnostics diagnostics;
};

/// Minimizes the L2 path energy from the chosen initializer (or the best of
/// the portfolio). The product initializer splits against the volume form
/// induced by g0. Boundary stalls are reported in diagnostics.status; the
/// returned path is then the best found before the stall.
FieldDistanceResult field_distance(const MetricField& g0, const MetricField& g1, const OptimizerOptions& opts,
                                   Initializer init = Initializer::best, Constraint constraint = Constraint::none);

}  // namespace metricspace
