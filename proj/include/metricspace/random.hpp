#pragma once

// Reproducible random instances. Every generator draws only from the engine
// it is handed, so (seed, trial) fully determines an instance.

#include <cstdint>
#include <random>

#include "metricspace/field.hpp"
#include "metricspace/product.hpp"

namespace metricspace {

using Rng = std::mt19937_64;

/// Engine for trial `trial` of a run seeded with `seed`.
Rng trial_rng(std::uint64_t seed, std::uint64_t trial);

/// Q diag(e) Q^T with Haar-random Q and log-uniform eigenvalues in
/// [1 / spread, spread]. spread == 1 gives the identity exactly.
SpdMatrix random_spd(Rng& rng, int n, double spread);
/// Symmetric matrix with independent N(0, scale^2) upper entries.
SymMatrix random_symmetric(Rng& rng, int n, double scale);

/// Points "p0", "p1", ... with weights uniform in [0.5, 1.5] / points.
ChartPtr random_chart(Rng& rng, int points, int n);
/// Points "p0", "p1", ... with weight 1 / points each. Fields generated
/// separately for the same (points, n) share this chart.
ChartPtr uniform_chart(int points, int n);
MetricField random_metric_field(Rng& rng, const ChartPtr& chart, double spread);
/// Log-uniform densities in [1 / spread, spread].
VolumeDensity random_density(Rng& rng, const ChartPtr& chart, double spread);
/// Per point: g0^1/2 exp(t A + sin(pi t) B) g0^1/2 with random symmetric A, B
/// of entry scale `amplitude`; smooth and SPD for every t.
DiscretePath random_path(Rng& rng, const MetricField& g0, int segments, double amplitude);

}  // namespace metricspace
