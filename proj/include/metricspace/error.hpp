#pragma once

#include <stdexcept>
#include <string>

namespace metricspace {

/// Shapes or charts that do not line up (dimension mismatch, foreign chart,
/// unknown point id). Maps to CLI exit code 2.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value left the domain of an operation: SPD floor violated, nonpositive
/// density, geodesic leaving the space of volume forms. Maps to exit code 3.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what, std::string point_id = {})
      : std::domain_error(point_id.empty() ? what : what + " (point '" + point_id + "')"),
        point_id_(std::move(point_id)) {}

  const std::string& point_id() const noexcept { return point_id_; }

 private:
  std::string point_id_;
};

/// A documented precondition (tracelessness, matching volume forms) failed.
class PreconditionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The path optimizer stalled against the boundary of the cone. Carries the
/// best length found before the stall (still a valid upper bound). Maps to
/// exit code 4.
class OptimizerError : public std::runtime_error {
 public:
  OptimizerError(const std::string& what, double best_so_far, std::string point_id = {})
      : std::runtime_error(point_id.empty() ? what : what + " (point '" + point_id + "')"),
        best_so_far_(best_so_far),
        point_id_(std::move(point_id)) {}

  double best_so_far() const noexcept { return best_so_far_; }
  const std::string& point_id() const noexcept { return point_id_; }

 private:
  double best_so_far_;
  std::string point_id_;
};

/// Malformed input file. Maps to exit code 2.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace metricspace
