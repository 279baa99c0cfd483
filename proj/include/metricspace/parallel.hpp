#pragma once

// Deterministic reductions and a minimal parallel loop. Reductions always
// use the same fixed pairwise tree, so results do not depend on how many
// workers produced the summands.

#include <cstddef>
#include <functional>
#include <span>

namespace metricspace {

/// Pairwise (tree) summation with a fixed split rule: halves are split at
/// size/2 down to blocks of 8, which are summed left to right.
double pairwise_sum(std::span<const double> values) noexcept;

/// Sum that is bitwise invariant under reversing the input: mirrored pairs
/// v_i + v_(n-1-i) are added first, then reduced with pairwise_sum.
double mirrored_sum(std::span<const double> values);

/// Worker count: METRICSPACE_THREADS if set and positive, otherwise the
/// hardware concurrency. Overridable for tests.
std::size_t worker_count();
/// 0 restores the environment-derived default.
void set_worker_count(std::size_t workers);

/// Runs body(i) for i in [0, count). Each index is visited exactly once.
/// If any invocation throws, the exception of the lowest failing index is
/// rethrown after all workers have joined.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace metricspace
