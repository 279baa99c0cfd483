#pragma once

// Discrete path energy minimization on products of SPD cones.
//
// A path is K+1 frames on the uniform grid t_k = k/K; each frame holds one
// symmetric matrix per block (one block for a single fiber, one per chart
// point for a metric field). Segment k is measured at the entrywise midpoint
// of frames k and k+1:
//
//   S_k = sum_i w_i c_i det(m_ik)^p tr(m_ik^-1 D_ik m_ik^-1 D_ik),
//
// with D_ik the frame difference. Length is sum_k sqrt(S_k) and energy is
// K sum_k S_k, so energy >= length^2 with equality at constant speed.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metricspace/tensor.hpp"

namespace metricspace {

/// Time-sampled frames for `blocks` independent fibers.
class BlockPath {
 public:
  BlockPath() = default;
  BlockPath(int segments, std::size_t blocks, std::vector<SymMatrix> frames);

  /// Frames (1 - t) a + t b.
  static BlockPath linear(std::span<const SymMatrix> start, std::span<const SymMatrix> end, int segments);
  static BlockPath constant(std::span<const SymMatrix> frame, int segments);

  int segments() const noexcept { return segments_; }
  std::size_t blocks() const noexcept { return blocks_; }
  const SymMatrix& at(int k, std::size_t block) const { return frames_[index(k, block)]; }
  SymMatrix& at(int k, std::size_t block) { return frames_[index(k, block)]; }
  std::span<const SymMatrix> frame(int k) const {
    return {frames_.data() + static_cast<std::size_t>(k) * blocks_, blocks_};
  }
  const std::vector<SymMatrix>& data() const noexcept { return frames_; }

  BlockPath reversed() const;
  /// `this` followed by `next`; the last frame of `this` must equal the first of `next`.
  BlockPath then(const BlockPath& next) const;
  /// Single-block path made of block `b` of every frame.
  BlockPath restrict_to(std::size_t block) const;

 private:
  std::size_t index(int k, std::size_t block) const { return static_cast<std::size_t>(k) * blocks_ + block; }

  int segments_ = 0;
  std::size_t blocks_ = 0;
  std::vector<SymMatrix> frames_;
};

/// The fiber metric <h,k>_g = w c det(g)^p tr(g^-1 h g^-1 k), one (w, c) per block.
class PathMetric {
 public:
  /// tr_g(hk) det(g_ref^-1 g) on a single fiber.
  static PathMetric reference_weighted(const SpdMatrix& g_ref);
  /// Pointwise integrand of the L2 metric on a quadrature chart: w_i tr_g(hk) sqrt(det g).
  static PathMetric l2(int n, std::vector<double> weights);

  int dim() const noexcept { return n_; }
  std::size_t blocks() const noexcept { return weights_.size(); }
  double weight(std::size_t b) const { return weights_[b]; }
  double scale(std::size_t b) const { return scales_[b]; }
  double det_power() const noexcept { return det_power_; }

  /// w c det(g)^p for block b.
  double density(std::size_t b, const Dense& g) const;
  /// Squared norm of `delta` at `g` for block b. Throws DomainError if g is not SPD.
  double sq_norm(std::size_t b, const Dense& g, const Dense& delta) const;
  /// S_k for the segment between two frames.
  double segment_sq_norm(std::span<const SymMatrix> a, std::span<const SymMatrix> b) const;

 private:
  PathMetric(int n, std::vector<double> weights, std::vector<double> scales, double p);

  int n_ = 0;
  std::vector<double> weights_;
  std::vector<double> scales_;
  double det_power_ = 1.0;
};

/// Per-segment squared norms S_k.
std::vector<double> segment_sq_norms(const PathMetric& metric, const BlockPath& path);
double discrete_length(const PathMetric& metric, const BlockPath& path);
double discrete_energy(const PathMetric& metric, const BlockPath& path);

enum class Constraint {
  none,
  /// Each block keeps det equal to its start frame (fixed induced volume).
  fixed_volume,
};

struct GeodesicSetting {
  PathMetric metric;
  std::vector<SymMatrix> start;
  std::vector<SymMatrix> end;
  Constraint constraint = Constraint::none;

  /// Validates shapes and endpoint admissibility; throws on violation.
  void validate() const;
};

enum class GradientMode { analytic, finite_difference };

struct OptimizerOptions {
  int K = 32;
  int max_iters = 400;
  /// Stop when the predicted decrease falls below grad_tol * energy.
  double grad_tol = 1e-11;
  double step0 = 1.0;
  /// Frames must keep min eigenvalue >= eig_floor * (smallest endpoint eigenvalue of the block).
  double eig_floor = 1e-6;
  std::uint64_t seed = 0;
  GradientMode gradient = GradientMode::analytic;

  /// Throws StructuralError on invalid values.
  void validate() const;
};

/// Partial derivatives of the energy with respect to the packed upper-triangle
/// entries of each interior frame, index (k - 1) * blocks + b.
struct Gradient {
  std::vector<SymMatrix> partials;
  /// Some central probe left the cone and a one-sided difference was used.
  bool one_sided_fallback = false;
};

Gradient analytic_gradient(const GeodesicSetting& setting, const BlockPath& path);
/// Central differences with step 1e-6 x (largest entry magnitude of the frame).
Gradient finite_difference_gradient(const GeodesicSetting& setting, const BlockPath& path);
/// Largest discrepancy between forward differences (step sqrt(eps) x frame
/// scale) and central differences, relative to
/// the largest central partial of the same frame.
double forward_difference_discrepancy(const GeodesicSetting& setting, const BlockPath& path);
/// Norm of the metric-dual gradient, projected to the constraint tangent space.
double riemannian_gradient_norm(const GeodesicSetting& setting, const BlockPath& path, const Gradient& gradient);

enum class OptimizerStatus { converged, max_iterations, boundary_stall };
std::string to_string(OptimizerStatus status);

struct IterationRecord {
  int iteration = 0;
  double energy = 0.0;
  double length = 0.0;
  double step = 0.0;
  int backtracks = 0;
};

struct Diagnostics {
  OptimizerStatus status = OptimizerStatus::converged;
  int iterations = 0;
  /// Name of the candidate the descent started from.
  std::string initializer;
  /// Name of the candidate finally returned ("optimized" unless a candidate was shorter).
  std::string returned;
  bool fd_fallback = false;
  /// Accepted iterates, starting with the initial one.
  std::vector<IterationRecord> trace;
};

struct NamedPath {
  std::string name;
  BlockPath path;
};

struct MinimizeResult {
  BlockPath path;
  double length = 0.0;
  double energy = 0.0;
  Diagnostics diagnostics;
};

/// Backtracking gradient descent on the interior frames, starting from the
/// lowest-energy admissible candidate with K segments. The returned path is
/// the shortest among the optimized path and all admissible candidates, so
/// the returned length never exceeds any candidate's. Boundary stalls are
/// reported through the status; the best-so-far path is still returned.
MinimizeResult minimize(const GeodesicSetting& setting, std::span<const NamedPath> candidates,
                        const OptimizerOptions& opts);

}  // namespace metricspace
