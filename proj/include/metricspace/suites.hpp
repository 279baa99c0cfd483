#pragma once

// Randomized property suites behind `metricspace check`. Trial t of a run
// with seed s draws its instance from trial_rng(s, t) only, so any trial can
// be replayed on its own.

#include <cstdint>
#include <string>
#include <vector>

#include "metricspace/report.hpp"

namespace metricspace {

/// lemma-sqrtvol, theta-bound, theta-refindep, pseudometric, exp-invariants.
const std::vector<std::string>& suite_names();

/// Runs trials first_trial .. first_trial + trials - 1. The aggregate carries
/// the worst trial's numbers and, in details, every trial's checks and a
/// replay command for each failure. Zero trials pass vacuously.
/// Every check's tolerance is multiplied by tolerance_scale; 0 demands the
/// inequalities hold with no allowance for discretization or optimizer error.
/// Throws StructuralError for unknown suites, negative counts or scales.
CheckReport run_suite(const std::string& name, std::uint64_t seed, int trials, int first_trial = 0,
                      double tolerance_scale = 1.0);

}  // namespace metricspace
