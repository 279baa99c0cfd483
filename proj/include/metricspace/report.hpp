#pragma once

#include <string>

#include <json.hpp>

namespace metricspace {

/// Outcome of an inequality check. Invariant: pass == (slack >= -tolerance).
struct CheckReport {
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  nlohmann::json details = nlohmann::json::object();

  /// Fills slack = rhs - lhs and pass from it.
  static CheckReport upper_bound(std::string check, double lhs, double rhs, double tolerance);
};

nlohmann::json to_json(const CheckReport& report);

}  // namespace metricspace
