#include "metricspace/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <iterator>

#include "metricspace/error.hpp"
#include "metricspace/parallel.hpp"

namespace metricspace {

// ---------------------------------------------------------------------------
// Chart and regions

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void require_chart(const ChartPtr& chart) {
  if (!chart) throw StructuralError("field has no chart");
}

}  // namespace

QuadChart::QuadChart(int n, std::vector<Point> points) : n_(n), points_(std::move(points)) {
  if (n < 1 || n > kMaxDim) throw StructuralError("fiber dimension " + std::to_string(n) + " outside [1, 8]");
  std::uint64_t h = kFnvOffset;
  fnv_bytes(h, &n_, sizeof n_);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Point& p = points_[i];
    if (!(p.weight > 0.0) || !std::isfinite(p.weight)) {
      throw StructuralError("point '" + p.id + "' has nonpositive weight");
    }
    if (!index_.emplace(p.id, i).second) throw StructuralError("duplicate point id '" + p.id + "'");
    fnv_bytes(h, p.id.data(), p.id.size());
    const auto bits = std::bit_cast<std::uint64_t>(p.weight);
    fnv_bytes(h, &bits, sizeof bits);
  }
  fingerprint_ = h;
}

std::vector<double> QuadChart::weights() const {
  std::vector<double> w;
  w.reserve(points_.size());
  for (const Point& p : points_) w.push_back(p.weight);
  return w;
}

std::size_t QuadChart::index_of(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw StructuralError("unknown point id '" + id + "'");
  return it->second;
}

std::string QuadChart::fingerprint_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fingerprint_));
  return buf;
}

bool same_chart(const QuadChart& a, const QuadChart& b) noexcept {
  if (&a == &b) return true;
  if (a.dim() != b.dim() || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.point(i).id != b.point(i).id) return false;
    if (std::bit_cast<std::uint64_t>(a.weight(i)) != std::bit_cast<std::uint64_t>(b.weight(i))) return false;
  }
  return true;
}

void require_same_chart(const QuadChart& a, const QuadChart& b) {
  if (!same_chart(a, b)) {
    throw StructuralError("chart mismatch: " + a.fingerprint_hex() + " vs " + b.fingerprint_hex());
  }
}

Region Region::all(const QuadChart& chart) {
  std::vector<std::size_t> idx(chart.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return Region(std::move(idx));
}

Region Region::from_ids(const QuadChart& chart, std::span<const std::string> ids) {
  std::vector<std::size_t> idx;
  idx.reserve(ids.size());
  for (const std::string& id : ids) idx.push_back(chart.index_of(id));
  return from_indices(chart, std::move(idx));
}

Region Region::from_indices(const QuadChart& chart, std::vector<std::size_t> indices) {
  for (std::size_t i : indices)
    if (i >= chart.size()) throw StructuralError("region index " + std::to_string(i) + " outside the chart");
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return Region(std::move(indices));
}

Region operator|(const Region& a, const Region& b) {
  std::vector<std::size_t> out;
  std::set_union(a.indices_.begin(), a.indices_.end(), b.indices_.begin(), b.indices_.end(), std::back_inserter(out));
  return Region(std::move(out));
}

Region operator&(const Region& a, const Region& b) {
  std::vector<std::size_t> out;
  std::set_intersection(a.indices_.begin(), a.indices_.end(), b.indices_.begin(), b.indices_.end(),
                        std::back_inserter(out));
  return Region(std::move(out));
}

// ---------------------------------------------------------------------------
// Fields

MetricField::MetricField(ChartPtr c, std::vector<SpdMatrix> v) : chart(std::move(c)), values(std::move(v)) {
  require_chart(chart);
  if (values.size() != chart->size()) throw StructuralError("metric field size does not match its chart");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].dim() != chart->dim()) {
      throw StructuralError("metric at point '" + chart->point(i).id + "' has the wrong dimension");
    }
  }
}

std::vector<SymMatrix> MetricField::syms() const {
  std::vector<SymMatrix> out;
  out.reserve(values.size());
  for (const SpdMatrix& v : values) out.push_back(v.sym());
  return out;
}

bool operator==(const MetricField& a, const MetricField& b) {
  return same_chart(*a.chart, *b.chart) && a.values == b.values;
}

TangentField::TangentField(ChartPtr c, std::vector<SymMatrix> v) : chart(std::move(c)), values(std::move(v)) {
  require_chart(chart);
  if (values.size() != chart->size()) throw StructuralError("tangent field size does not match its chart");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].dim() != chart->dim()) {
      throw StructuralError("tangent at point '" + chart->point(i).id + "' has the wrong dimension");
    }
  }
}

TangentField TangentField::zero(ChartPtr chart) {
  require_chart(chart);
  const int n = chart->dim();
  return TangentField(chart, std::vector<SymMatrix>(chart->size(), SymMatrix(n)));
}

DiscretePath::DiscretePath(ChartPtr c, std::vector<MetricField> f) : chart(std::move(c)), frames(std::move(f)) {
  require_chart(chart);
  if (frames.size() < 2) throw StructuralError("a discrete path needs at least two frames");
  for (const MetricField& m : frames) require_same_chart(*chart, *m.chart);
}

DiscretePath DiscretePath::from_block_path(ChartPtr chart, const BlockPath& path) {
  require_chart(chart);
  if (path.blocks() != chart->size()) throw StructuralError("path block count does not match the chart");
  std::vector<MetricField> frames;
  frames.reserve(static_cast<std::size_t>(path.segments() + 1));
  for (int k = 0; k <= path.segments(); ++k) {
    std::vector<SpdMatrix> values;
    values.reserve(path.blocks());
    for (std::size_t b = 0; b < path.blocks(); ++b) {
      try {
        values.emplace_back(path.at(k, b));
      } catch (const DomainError& e) {
        throw DomainError("frame " + std::to_string(k) + ": " + e.what(), chart->point(b).id);
      }
    }
    frames.emplace_back(chart, std::move(values));
  }
  return DiscretePath(chart, std::move(frames));
}

DiscretePath DiscretePath::reversed() const { return DiscretePath(chart, {frames.rbegin(), frames.rend()}); }

BlockPath DiscretePath::to_block_path() const {
  std::vector<SymMatrix> data;
  data.reserve(frames.size() * chart->size());
  for (const MetricField& f : frames)
    for (const SpdMatrix& v : f.values) data.push_back(v.sym());
  return BlockPath(segments(), chart->size(), std::move(data));
}

// ---------------------------------------------------------------------------
// Integrals

double l2_inner(const MetricField& g, const TangentField& h, const TangentField& k) {
  require_same_chart(*g.chart, *h.chart);
  require_same_chart(*g.chart, *k.chart);
  std::vector<double> terms(g.values.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    terms[i] = g.chart->weight(i) * trace_pair(g.at(i), h.at(i), k.at(i)) * sqrt_det(g.at(i));
  }
  return pairwise_sum(terms);
}

double l2_norm(const MetricField& g, const TangentField& h) { return std::sqrt(std::max(0.0, l2_inner(g, h, h))); }

double volume(const MetricField& g, const Region& region) {
  std::vector<double> terms;
  terms.reserve(region.indices().size());
  for (std::size_t i : region.indices()) {
    if (i >= g.values.size()) throw StructuralError("region does not belong to the field's chart");
    terms.push_back(g.chart->weight(i) * sqrt_det(g.at(i)));
  }
  return pairwise_sum(terms);
}

PathMetric l2_path_metric(const QuadChart& chart) { return PathMetric::l2(chart.dim(), chart.weights()); }

double path_length(const DiscretePath& path) {
  return discrete_length(l2_path_metric(*path.chart), path.to_block_path());
}

double path_energy(const DiscretePath& path) {
  return discrete_energy(l2_path_metric(*path.chart), path.to_block_path());
}

double discretization_tolerance(int segments, double scale) {
  const double k = segments;
  return kDiscretizationCoefficient * std::max(scale, 1e-300) / (k * k);
}

ThetaYResult theta_Y(const MetricField& g_ref, const MetricField& g0, const MetricField& g1, const Region& region,
                     const OptimizerOptions& opts, const DiscretePath* hint) {
  require_same_chart(*g_ref.chart, *g0.chart);
  require_same_chart(*g_ref.chart, *g1.chart);
  if (hint != nullptr) {
    require_same_chart(*g_ref.chart, *hint->chart);
    if (!(hint->front() == g0) || !(hint->back() == g1)) {
      throw StructuralError("hint path does not join the two fields");
    }
  }
  opts.validate();
  const QuadChart& chart = *g_ref.chart;
  const auto& idx = region.indices();
  for (std::size_t i : idx)
    if (i >= chart.size()) throw StructuralError("region does not belong to the chart");

  const BlockPath hint_blocks = hint != nullptr ? hint->to_block_path() : BlockPath{};
  ThetaYResult out;
  out.points.resize(idx.size());
  parallel_for(idx.size(), [&](std::size_t j) {
    const std::size_t i = idx[j];
    const std::string& id = chart.point(i).id;
    std::vector<BlockPath> certs;
    if (hint != nullptr) certs.push_back(hint_blocks.restrict_to(i));
    try {
      ThetaResult r = theta_distance(g_ref.at(i), g0.at(i), g1.at(i), opts, certs);
      out.points[j] = {id, r.value, chart.weight(i) * sqrt_det(g_ref.at(i)), r.diagnostics.returned,
                       r.diagnostics.status, std::move(r.path)};
    } catch (const OptimizerError& e) {
      throw OptimizerError(e.what(), e.best_so_far(), id);
    } catch (const PreconditionError& e) {
      throw PreconditionError(e.what(), id);
    } catch (const DomainError& e) {
      throw DomainError(e.what(), id);
    }
  });

  std::vector<double> terms(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) terms[j] = out.points[j].measure * out.points[j].theta;
  out.value = pairwise_sum(terms);
  return out;
}

// ---------------------------------------------------------------------------
// Checks

CheckReport CheckReport::upper_bound(std::string check, double lhs, double rhs, double tolerance) {
  CheckReport r;
  r.check = std::move(check);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.tolerance = tolerance;
  r.pass = r.slack >= -tolerance;
  return r;
}

nlohmann::json to_json(const CheckReport& r) {
  return {{"check", r.check}, {"lhs", r.lhs},   {"rhs", r.rhs},         {"slack", r.slack},
          {"pass", r.pass},   {"tolerance", r.tolerance}, {"details", r.details}};
}

CheckReport check_lipschitz_sqrtvol(const DiscretePath& path, const Region& region) {
  const double v0 = volume(path.front(), region);
  const double v1 = volume(path.back(), region);
  const double len = path_length(path);
  const double n = path.chart->dim();
  const double lhs = std::abs(std::sqrt(v1) - std::sqrt(v0));
  const double rhs = std::sqrt(n) / 4.0 * len;
  CheckReport r = CheckReport::upper_bound("lemma-sqrtvol", lhs, rhs,
                                           discretization_tolerance(path.segments(), std::max(rhs, 1.0)));
  r.details = {{"volume_start", v0}, {"volume_end", v1}, {"path_length", len}, {"K", path.segments()}};
  return r;
}

CheckReport check_theta_bound(const DiscretePath& path, const MetricField& g_ref, const OptimizerOptions& opts) {
  const Region all = Region::all(*path.chart);
  const ThetaYResult theta = theta_Y(g_ref, path.front(), path.back(), all, opts, &path);
  const double len = path_length(path);
  const double vol0 = volume(path.front(), all);
  const double n = path.chart->dim();
  const double rhs = len * (std::sqrt(vol0) + std::sqrt(n) / 4.0 * len);
  CheckReport r = CheckReport::upper_bound("theta-bound", theta.value, rhs,
                                           discretization_tolerance(path.segments(), std::max(rhs, 1.0)));
  nlohmann::json points = nlohmann::json::array();
  for (const ThetaPoint& p : theta.points) {
    points.push_back({{"id", p.id}, {"theta", p.theta}, {"measure", p.measure}, {"returned", p.returned}});
  }
  r.details = {{"path_length", len}, {"volume_start", vol0}, {"K", path.segments()}, {"points", points}};
  return r;
}

CheckReport check_theta_reference_independence(const MetricField& g0, const MetricField& g1,
                                               const MetricField& g_ref_a, const MetricField& g_ref_b,
                                               const Region& region, const OptimizerOptions& opts) {
  const ThetaYResult a = theta_Y(g_ref_a, g0, g1, region, opts);
  const ThetaYResult b = theta_Y(g_ref_b, g0, g1, region, opts);
  const double scale = std::max(a.value, b.value);
  const double gap = scale == 0.0 ? 0.0 : std::abs(a.value - b.value) / scale;
  CheckReport r = CheckReport::upper_bound("theta-refindep", gap, kReferenceGapBound, kOptimizerBudget);
  r.details = {{"theta_a", a.value}, {"theta_b", b.value}, {"relative_gap", gap}};
  return r;
}

}  // namespace metricspace
