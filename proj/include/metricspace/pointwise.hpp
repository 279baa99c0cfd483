#pragma once

// Geometry of the cone of positive definite tensors at a single base point,
// under the reference-weighted metric
//
//   <h, k>^0_g = tr_g(hk) det(g_ref^-1 g),
//
// and the distance theta it induces, computed as an optimizer upper bound.

#include <span>
#include <vector>

#include "metricspace/optimizer.hpp"
#include "metricspace/tensor.hpp"

namespace metricspace {

/// K + 1 SPD samples on t_k = k / K.
class PointPath {
 public:
  PointPath() = default;
  explicit PointPath(std::vector<SpdMatrix> samples);
  /// Throws DomainError if any sample is not SPD.
  static PointPath from_block_path(const BlockPath& path, std::size_t block = 0);

  int segments() const noexcept { return static_cast<int>(samples_.size()) - 1; }
  const std::vector<SpdMatrix>& samples() const noexcept { return samples_; }
  const SpdMatrix& front() const { return samples_.front(); }
  const SpdMatrix& back() const { return samples_.back(); }
  PointPath reversed() const;
  BlockPath to_block_path() const;

 private:
  std::vector<SpdMatrix> samples_;
};

/// tr_g(hk).
double inner_point(const SpdMatrix& g, const SymMatrix& h, const SymMatrix& k);
/// tr_g(hk) det(g_ref^-1 g).
double inner0_point(const SpdMatrix& g_ref, const SpdMatrix& g, const SymMatrix& h, const SymMatrix& k);

/// Midpoint-rule length under <.,.>^0.
double point_path_length(const SpdMatrix& g_ref, const PointPath& path);

/// Linear interpolation and the fiber-exponential path
/// t -> spd_exp_from(a, t spd_log_from(a, b)).
BlockPath linear_point_path(const SpdMatrix& a, const SpdMatrix& b, int segments);
BlockPath fiber_point_path(const SpdMatrix& a, const SpdMatrix& b, int segments);

struct ThetaResult {
  double value = 0.0;
  PointPath path;
  Diagnostics diagnostics;
};

/// Upper bound on theta^{g_ref}(a, b): energy-minimizing path started from
/// the better of the linear and fiber paths. `certificates` are additional
/// paths from a to b (any K) that the result must not exceed.
/// Throws OptimizerError on a boundary stall.
ThetaResult theta_distance(const SpdMatrix& g_ref, const SpdMatrix& a, const SpdMatrix& b,
                           const OptimizerOptions& opts, std::span<const BlockPath> certificates = {});

/// Closed-form <.,.>^0 length of t -> f(t) g0 for monotone f from f0 to f1:
/// (2 / sqrt(n)) sqrt(det(g_ref^-1 g0)) |f1^(n/2) - f0^(n/2)|.
double conformal_theta_oracle(const SpdMatrix& g_ref, const SpdMatrix& g0, double f0, double f1);

/// Certified lower bound on theta: the quantity r = (2 / sqrt(n)) sqrt(det(g_ref^-1 g))
/// is 1-Lipschitz along every path, so theta(a, b) >= |r(a) - r(b)|.
double theta_radial_lower_bound(const SpdMatrix& g_ref, const SpdMatrix& a, const SpdMatrix& b);

}  // namespace metricspace
