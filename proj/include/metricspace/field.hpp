#pragma once

// Metric fields over a quadrature chart: the L2 metric, volumes, path
// lengths, the integrated distance Theta_Y and the inequality checkers.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "metricspace/optimizer.hpp"
#include "metricspace/pointwise.hpp"
#include "metricspace/report.hpp"
#include "metricspace/tensor.hpp"

namespace metricspace {

/// Sample points of the base manifold with positive coordinate-measure weights.
class QuadChart {
 public:
  struct Point {
    std::string id;
    double weight = 0.0;
    std::vector<double> coords;
  };

  /// Throws StructuralError on duplicate ids, nonpositive weights or bad n.
  QuadChart(int n, std::vector<Point> points);

  int dim() const noexcept { return n_; }
  std::size_t size() const noexcept { return points_.size(); }
  const Point& point(std::size_t i) const { return points_[i]; }
  const std::vector<Point>& points() const noexcept { return points_; }
  double weight(std::size_t i) const { return points_[i].weight; }
  std::vector<double> weights() const;
  /// Throws StructuralError for unknown ids.
  std::size_t index_of(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.count(id) > 0; }

  /// FNV-1a hash of n, ids and the weight bit patterns.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }
  std::string fingerprint_hex() const;

 private:
  int n_;
  std::vector<Point> points_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t fingerprint_ = 0;
};

using ChartPtr = std::shared_ptr<const QuadChart>;

/// Same n, ids and weights (bitwise).
bool same_chart(const QuadChart& a, const QuadChart& b) noexcept;
/// Throws StructuralError naming both fingerprints.
void require_same_chart(const QuadChart& a, const QuadChart& b);

/// Subset of chart points, stored as sorted unique indices.
class Region {
 public:
  static Region all(const QuadChart& chart);
  static Region none() { return Region({}); }
  /// Throws StructuralError for ids not in the chart.
  static Region from_ids(const QuadChart& chart, std::span<const std::string> ids);
  static Region from_indices(const QuadChart& chart, std::vector<std::size_t> indices);

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  bool empty() const noexcept { return indices_.empty(); }

  friend Region operator|(const Region& a, const Region& b);
  friend Region operator&(const Region& a, const Region& b);

 private:
  explicit Region(std::vector<std::size_t> indices) : indices_(std::move(indices)) {}
  std::vector<std::size_t> indices_;
};

struct MetricField {
  ChartPtr chart;
  std::vector<SpdMatrix> values;

  /// Checks count and dimension against the chart.
  MetricField(ChartPtr chart, std::vector<SpdMatrix> values);
  const SpdMatrix& at(std::size_t i) const { return values[i]; }
  std::vector<SymMatrix> syms() const;
  friend bool operator==(const MetricField& a, const MetricField& b);
};

struct TangentField {
  ChartPtr chart;
  std::vector<SymMatrix> values;

  TangentField(ChartPtr chart, std::vector<SymMatrix> values);
  static TangentField zero(ChartPtr chart);
  const SymMatrix& at(std::size_t i) const { return values[i]; }
};

/// K + 1 metric fields on t_k = k / K, all on one chart.
struct DiscretePath {
  ChartPtr chart;
  std::vector<MetricField> frames;

  DiscretePath(ChartPtr chart, std::vector<MetricField> frames);
  /// Throws DomainError (with the point id) if a frame is not SPD.
  static DiscretePath from_block_path(ChartPtr chart, const BlockPath& path);

  int segments() const noexcept { return static_cast<int>(frames.size()) - 1; }
  const MetricField& front() const { return frames.front(); }
  const MetricField& back() const { return frames.back(); }
  DiscretePath reversed() const;
  BlockPath to_block_path() const;
};

/// Sum_i w_i tr_{g_i}(h_i k_i) sqrt(det g_i).
double l2_inner(const MetricField& g, const TangentField& h, const TangentField& k);
double l2_norm(const MetricField& g, const TangentField& h);
/// Sum over the region of w_i sqrt(det g_i).
double volume(const MetricField& g, const Region& region);

/// The L2 path metric of a chart (one block per point).
PathMetric l2_path_metric(const QuadChart& chart);
/// Sum_k ||frame_{k+1} - frame_k|| at the entrywise midpoint frame.
double path_length(const DiscretePath& path);
/// K sum_k ||frame_{k+1} - frame_k||^2 at the midpoint frame.
double path_energy(const DiscretePath& path);

/// Tolerance for midpoint-rule discretization effects at K segments, for
/// quantities of magnitude `scale`: kDiscretizationCoefficient * scale / K^2.
inline constexpr double kDiscretizationCoefficient = 0.5;
double discretization_tolerance(int segments, double scale = 1.0);

struct ThetaPoint {
  std::string id;
  double theta = 0.0;
  /// w_i sqrt(det g_ref_i): the measure the pointwise distance is integrated against.
  double measure = 0.0;
  std::string returned;
  OptimizerStatus status = OptimizerStatus::converged;
  PointPath path;
};

struct ThetaYResult {
  double value = 0.0;
  std::vector<ThetaPoint> points;
};

/// Sum over the region of w_i sqrt(det g_ref_i) theta^{g_ref_i}(g0_i, g1_i), each
/// theta an optimizer upper bound. When `hint` (a path from g0 to g1) is given,
/// its restriction to each point joins that point's candidate portfolio.
/// Points run in parallel; the sum is a fixed pairwise reduction.
/// Optimizer and domain failures are rethrown naming the point id.
ThetaYResult theta_Y(const MetricField& g_ref, const MetricField& g0, const MetricField& g1, const Region& region,
                     const OptimizerOptions& opts, const DiscretePath* hint = nullptr);

/// |sqrt Vol(Y, g_K) - sqrt Vol(Y, g_0)| <= (sqrt(n) / 4) L(path).
CheckReport check_lipschitz_sqrtvol(const DiscretePath& path, const Region& region);

/// Theta_M(g0, g1) <= L (sqrt Vol(M, g0) + (sqrt(n) / 4) L) for L = path_length(path).
CheckReport check_theta_bound(const DiscretePath& path, const MetricField& g_ref, const OptimizerOptions& opts);

/// Relative gap between Theta_Y computed against two references.
inline constexpr double kReferenceGapBound = 1e-3;
inline constexpr double kOptimizerBudget = 1e-6;
CheckReport check_theta_reference_independence(const MetricField& g0, const MetricField& g1,
                                               const MetricField& g_ref_a, const MetricField& g_ref_b,
                                               const Region& region, const OptimizerOptions& opts);

}  // namespace metricspace
