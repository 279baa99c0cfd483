#include "metricspace/pointwise.hpp"

#include <cmath>
#include <vector>

#include "metricspace/error.hpp"

namespace metricspace {

PointPath::PointPath(std::vector<SpdMatrix> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) throw StructuralError("a point path needs at least two samples");
  for (const SpdMatrix& s : samples_)
    if (s.dim() != samples_.front().dim()) throw StructuralError("point path samples differ in dimension");
}

PointPath PointPath::from_block_path(const BlockPath& path, std::size_t block) {
  std::vector<SpdMatrix> samples;
  samples.reserve(static_cast<std::size_t>(path.segments() + 1));
  for (int k = 0; k <= path.segments(); ++k) samples.emplace_back(path.at(k, block));
  return PointPath(std::move(samples));
}

PointPath PointPath::reversed() const { return PointPath({samples_.rbegin(), samples_.rend()}); }

BlockPath PointPath::to_block_path() const {
  std::vector<SymMatrix> frames;
  frames.reserve(samples_.size());
  for (const SpdMatrix& s : samples_) frames.push_back(s.sym());
  return BlockPath(segments(), 1, std::move(frames));
}

double inner_point(const SpdMatrix& g, const SymMatrix& h, const SymMatrix& k) { return trace_pair(g, h, k); }

double inner0_point(const SpdMatrix& g_ref, const SpdMatrix& g, const SymMatrix& h, const SymMatrix& k) {
  if (g_ref.dim() != g.dim()) throw StructuralError("reference and base point differ in dimension");
  return trace_pair(g, h, k) * det(g) / det(g_ref);
}

double point_path_length(const SpdMatrix& g_ref, const PointPath& path) {
  if (path.front().dim() != g_ref.dim()) throw StructuralError("path and reference differ in dimension");
  return discrete_length(PathMetric::reference_weighted(g_ref), path.to_block_path());
}

BlockPath linear_point_path(const SpdMatrix& a, const SpdMatrix& b, int segments) {
  const SymMatrix ends[2] = {a.sym(), b.sym()};
  return BlockPath::linear(std::span(ends, 1), std::span(ends + 1, 1), segments);
}

BlockPath fiber_point_path(const SpdMatrix& a, const SpdMatrix& b, int segments) {
  const SymMatrix direction = spd_log_from(a, b);
  std::vector<SymMatrix> frames;
  frames.reserve(static_cast<std::size_t>(segments + 1));
  frames.push_back(a.sym());
  for (int k = 1; k < segments; ++k) {
    frames.push_back(spd_exp_from(a, (static_cast<double>(k) / segments) * direction).sym());
  }
  frames.push_back(b.sym());
  return BlockPath(segments, 1, std::move(frames));
}

ThetaResult theta_distance(const SpdMatrix& g_ref, const SpdMatrix& a, const SpdMatrix& b,
                           const OptimizerOptions& opts, std::span<const BlockPath> certificates) {
  if (a.dim() != g_ref.dim() || b.dim() != g_ref.dim()) throw StructuralError("theta endpoints differ in dimension");
  opts.validate();

  GeodesicSetting setting{PathMetric::reference_weighted(g_ref), {a.sym()}, {b.sym()}, Constraint::none};
  std::vector<NamedPath> candidates;
  if (!(a == b)) {
    candidates.push_back({"linear", linear_point_path(a, b, opts.K)});
    candidates.push_back({"fiber", fiber_point_path(a, b, opts.K)});
    for (std::size_t i = 0; i < certificates.size(); ++i) {
      candidates.push_back({"certificate-" + std::to_string(i), certificates[i]});
    }
  }
  MinimizeResult m = minimize(setting, candidates, opts);
  if (m.diagnostics.status == OptimizerStatus::boundary_stall) {
    throw OptimizerError("theta optimizer stalled at the cone boundary", m.length);
  }
  return {m.length, PointPath::from_block_path(m.path), std::move(m.diagnostics)};
}

double conformal_theta_oracle(const SpdMatrix& g_ref, const SpdMatrix& g0, double f0, double f1) {
  if (!(f0 > 0.0) || !(f1 > 0.0)) throw DomainError("conformal factors must be positive");
  if (g_ref.dim() != g0.dim()) throw StructuralError("reference and base point differ in dimension");
  const double n = g0.dim();
  const double weight = std::sqrt(det(g0) / det(g_ref));
  return 2.0 / std::sqrt(n) * weight * std::abs(std::pow(f1, n / 2.0) - std::pow(f0, n / 2.0));
}

double theta_radial_lower_bound(const SpdMatrix& g_ref, const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != g_ref.dim() || b.dim() != g_ref.dim()) throw StructuralError("dimension mismatch");
  const double n = g_ref.dim();
  const double dr = sqrt_det(a) - sqrt_det(b);
  return 2.0 / std::sqrt(n) * std::abs(dr) / sqrt_det(g_ref);
}

}  // namespace metricspace
