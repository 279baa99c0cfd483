#include "metricspace/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "metricspace/error.hpp"
#include "metricspace/parallel.hpp"

namespace metricspace {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 30;
constexpr double kFdRelStep = 1e-6;
// Forward differences balance truncation against cancellation at sqrt(eps).
constexpr double kForwardRelStep = 1.4901161193847656e-8;
constexpr double kEndpointTol = 1e-9;

struct SegmentTerm {
  double value = 0.0;
  Dense grad_start;
  Dense grad_end;
};

Dense identity_like(const Dense& m) { return Dense::Identity(m.rows(), m.cols()); }

// Factorizes the midpoint; returns false if it is not positive definite.
bool factor(const Dense& m, Eigen::LLT<Dense>& llt) {
  llt.compute(m);
  if (llt.info() != Eigen::Success) return false;
  const auto d = llt.matrixLLT().diagonal();
  return d.allFinite() && d.minCoeff() > 0.0;
}

double det_power_of(const Eigen::LLT<Dense>& llt, double p) {
  const double root = llt.matrixLLT().diagonal().prod();  // sqrt(det)
  if (p == 0.5) return root;
  if (p == 1.0) return root * root;
  return std::pow(root * root, p);
}

// w c det(m)^p tr(m^-1 D m^-1 D) for one block of one segment, optionally
// with its gradient with respect to both frames (Frobenius dual).
SegmentTerm segment_term(const PathMetric& metric, std::size_t b, const Dense& a, const Dense& e, bool with_grad) {
  const Dense m = 0.5 * (a + e);
  const Dense delta = e - a;
  Eigen::LLT<Dense> llt;
  if (!factor(m, llt)) throw DomainError("segment midpoint is not positive definite");
  const Dense minv = llt.solve(identity_like(m));
  const Dense p_mat = minv * delta * minv;
  const double q = (p_mat * delta).trace();
  const double omega = metric.weight(b) * metric.scale(b) * det_power_of(llt, metric.det_power());

  SegmentTerm out;
  out.value = omega * q;
  if (with_grad) {
    Dense gq_m = -2.0 * p_mat * delta * minv;
    gq_m = 0.5 * (gq_m + gq_m.transpose()).eval();
    const Dense gm = omega * gq_m + (q * metric.det_power() * omega) * minv;
    out.grad_end = 2.0 * omega * p_mat + 0.5 * gm;
    out.grad_start = -2.0 * omega * p_mat + 0.5 * gm;
  }
  return out;
}

// Frobenius-dual gradient -> partials with respect to packed entries.
SymMatrix to_partials(const Dense& g) {
  SymMatrix out = SymMatrix::from_dense(g);
  for (int i = 0; i < g.rows(); ++i)
    for (int j = i + 1; j < g.cols(); ++j) out.set(i, j, 2.0 * g(i, j));
  return out;
}

Dense to_frobenius(const SymMatrix& partials) {
  Dense g = partials.dense();
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j)
      if (i != j) g(i, j) *= 0.5;
  return g;
}

double relative_gap(const SymMatrix& a, const SymMatrix& b) {
  const double scale = std::max(a.frobenius_norm(), b.frobenius_norm());
  return scale == 0.0 ? 0.0 : (a - b).frobenius_norm() / scale;
}

double frame_scale(const SymMatrix& m) {
  double s = 0.0;
  for (double v : m.upper()) s = std::max(s, std::abs(v));
  return s > 0.0 ? s : 1.0;
}

// Energy contribution of the two segments touching interior frame k, block b.
double local_energy(const GeodesicSetting& s, const BlockPath& path, int k, std::size_t b, const SymMatrix& value) {
  const double kk = path.segments();
  const Dense v = value.dense();
  return kk * (segment_term(s.metric, b, path.at(k - 1, b).dense(), v, false).value +
               segment_term(s.metric, b, v, path.at(k + 1, b).dense(), false).value);
}

struct EndpointFloors {
  std::vector<double> floors;
  std::vector<double> target_dets;
};

EndpointFloors endpoint_floors(const GeodesicSetting& s, double eig_floor) {
  EndpointFloors out;
  for (std::size_t b = 0; b < s.start.size(); ++b) {
    const double lo = std::min(min_eigenvalue(s.start[b]), min_eigenvalue(s.end[b]));
    out.floors.push_back(eig_floor * lo);
    out.target_dets.push_back(s.start[b].dense().determinant());
  }
  return out;
}

bool frame_admissible(const SymMatrix& m, double floor) {
  const DenseVector ev = eigenvalues(m);
  if (!ev.allFinite()) return false;
  return ev.minCoeff() >= floor && ev.minCoeff() > kSpdFloor * ev.maxCoeff();
}

bool interior_admissible(const BlockPath& path, const EndpointFloors& f) {
  for (int k = 1; k < path.segments(); ++k)
    for (std::size_t b = 0; b < path.blocks(); ++b)
      if (!frame_admissible(path.at(k, b), f.floors[b])) return false;
  return true;
}

// Rescales a frame to the target determinant. Returns false if impossible.
bool retract_volume(SymMatrix& m, double target_det) {
  const double d = m.dense().determinant();
  if (!(d > 0.0) || !std::isfinite(d)) return false;
  m *= std::pow(target_det / d, 1.0 / m.dim());
  return true;
}

bool retract_path(BlockPath& path, const EndpointFloors& f) {
  for (int k = 1; k < path.segments(); ++k)
    for (std::size_t b = 0; b < path.blocks(); ++b)
      if (!retract_volume(path.at(k, b), f.target_dets[b])) return false;
  return true;
}

bool endpoints_match(const GeodesicSetting& s, const BlockPath& p) {
  if (p.blocks() != s.start.size() || p.segments() < 1) return false;
  for (std::size_t b = 0; b < p.blocks(); ++b) {
    if (p.at(0, b).dim() != s.metric.dim()) return false;
    if (relative_gap(p.at(0, b), s.start[b]) > kEndpointTol) return false;
    if (relative_gap(p.at(p.segments(), b), s.end[b]) > kEndpointTol) return false;
  }
  return true;
}

// Per interior frame and block: g^1/2 / sqrt(density), the map from whitened
// coordinates to ambient tangent vectors (self-adjoint for the Frobenius pairing).
struct Whitening {
  std::vector<Dense> half;
  std::vector<double> inv_sqrt_density;
};

Whitening whitening(const GeodesicSetting& s, const BlockPath& path) {
  Whitening w;
  for (int k = 1; k < path.segments(); ++k) {
    for (std::size_t b = 0; b < path.blocks(); ++b) {
      const Dense g = path.at(k, b).dense();
      Eigen::SelfAdjointEigenSolver<Dense> es(g);
      const DenseVector r = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      w.half.push_back(es.eigenvectors() * r.asDiagonal() * es.eigenvectors().transpose());
      w.inv_sqrt_density.push_back(1.0 / std::sqrt(s.metric.density(b, g)));
    }
  }
  return w;
}

Dense apply_whitening(const Whitening& w, std::size_t idx, const Dense& x) {
  return w.inv_sqrt_density[idx] * (w.half[idx] * x * w.half[idx]);
}

void project_traceless(Dense& y) {
  const double t = y.trace() / y.rows();
  y.diagonal().array() -= t;
}

// Whitened (and constraint-projected) gradient per interior frame and block.
std::vector<Dense> whitened_gradient(const GeodesicSetting& s, const Whitening& w, const Gradient& g) {
  std::vector<Dense> y;
  y.reserve(g.partials.size());
  for (std::size_t idx = 0; idx < g.partials.size(); ++idx) {
    Dense v = apply_whitening(w, idx, to_frobenius(g.partials[idx]));
    if (s.constraint == Constraint::fixed_volume) project_traceless(v);
    y.push_back(std::move(v));
  }
  return y;
}

// Descent direction -W L^-1 W G, with L = 2K tridiag(-1, 2, -1) acting along time.
std::vector<Dense> descent_direction(const GeodesicSetting& s, const BlockPath& path, const Gradient& g) {
  const int interior = path.segments() - 1;
  const std::size_t blocks = path.blocks();
  const Whitening w = whitening(s, path);
  std::vector<Dense> y = whitened_gradient(s, w, g);

  const double scale = 2.0 * path.segments();
  for (std::size_t b = 0; b < blocks; ++b) {
    auto at = [&](int k) -> Dense& { return y[static_cast<std::size_t>(k) * blocks + b]; };
    // Thomas algorithm on diag 2, off-diagonals -1.
    std::vector<double> cprime(static_cast<std::size_t>(interior));
    double denom = 2.0;
    cprime[0] = -1.0 / denom;
    at(0) /= denom;
    for (int k = 1; k < interior; ++k) {
      denom = 2.0 + cprime[static_cast<std::size_t>(k - 1)];
      cprime[static_cast<std::size_t>(k)] = -1.0 / denom;
      at(k) = (at(k) + at(k - 1)) / denom;
    }
    for (int k = interior - 2; k >= 0; --k) at(k) -= cprime[static_cast<std::size_t>(k)] * at(k + 1);
  }
  for (std::size_t idx = 0; idx < y.size(); ++idx) {
    Dense d = apply_whitening(w, idx, y[idx]) / scale;
    d = -0.5 * (d + d.transpose()).eval();
    y[idx] = std::move(d);
  }
  return y;
}

double directional_derivative(const Gradient& g, const std::vector<Dense>& d) {
  std::vector<double> terms(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) terms[i] = to_frobenius(g.partials[i]).cwiseProduct(d[i]).sum();
  return pairwise_sum(terms);
}

BlockPath step_path(const BlockPath& x, const std::vector<Dense>& d, double alpha) {
  std::vector<SymMatrix> frames = x.data();
  const std::size_t blocks = x.blocks();
  for (std::size_t idx = 0; idx < d.size(); ++idx) {
    SymMatrix& f = frames[blocks + idx];
    f = SymMatrix::from_dense(f.dense() + alpha * d[idx]);
  }
  return BlockPath(x.segments(), blocks, std::move(frames));
}

double safe_energy(const PathMetric& metric, const BlockPath& path) {
  try {
    const double e = discrete_energy(metric, path);
    return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// BlockPath

BlockPath::BlockPath(int segments, std::size_t blocks, std::vector<SymMatrix> frames)
    : segments_(segments), blocks_(blocks), frames_(std::move(frames)) {
  if (segments < 1) throw StructuralError("a path needs at least one segment");
  if (blocks == 0) throw StructuralError("a path needs at least one block");
  if (frames_.size() != static_cast<std::size_t>(segments + 1) * blocks) {
    throw StructuralError("path frame count does not match (K + 1) x blocks");
  }
}

BlockPath BlockPath::linear(std::span<const SymMatrix> start, std::span<const SymMatrix> end, int segments) {
  if (start.size() != end.size()) throw StructuralError("endpoint block counts differ");
  std::vector<SymMatrix> frames;
  frames.reserve(static_cast<std::size_t>(segments + 1) * start.size());
  for (int k = 0; k <= segments; ++k) {
    const double t = static_cast<double>(k) / segments;
    for (std::size_t b = 0; b < start.size(); ++b) {
      if (k == 0) {
        frames.push_back(start[b]);
      } else if (k == segments) {
        frames.push_back(end[b]);
      } else {
        frames.push_back((1.0 - t) * start[b] + t * end[b]);
      }
    }
  }
  return BlockPath(segments, start.size(), std::move(frames));
}

BlockPath BlockPath::constant(std::span<const SymMatrix> frame, int segments) {
  std::vector<SymMatrix> frames;
  for (int k = 0; k <= segments; ++k) frames.insert(frames.end(), frame.begin(), frame.end());
  return BlockPath(segments, frame.size(), std::move(frames));
}

BlockPath BlockPath::reversed() const {
  std::vector<SymMatrix> frames;
  frames.reserve(frames_.size());
  for (int k = segments_; k >= 0; --k) {
    const auto f = frame(k);
    frames.insert(frames.end(), f.begin(), f.end());
  }
  return BlockPath(segments_, blocks_, std::move(frames));
}

BlockPath BlockPath::then(const BlockPath& next) const {
  if (next.blocks_ != blocks_) throw StructuralError("cannot join paths with different block counts");
  for (std::size_t b = 0; b < blocks_; ++b) {
    if (relative_gap(at(segments_, b), next.at(0, b)) > kEndpointTol) {
      throw StructuralError("joined paths do not share the junction frame");
    }
  }
  std::vector<SymMatrix> frames = frames_;
  frames.insert(frames.end(), next.frames_.begin() + static_cast<std::ptrdiff_t>(blocks_), next.frames_.end());
  return BlockPath(segments_ + next.segments_, blocks_, std::move(frames));
}

BlockPath BlockPath::restrict_to(std::size_t block) const {
  if (block >= blocks_) throw StructuralError("block index out of range");
  std::vector<SymMatrix> frames;
  for (int k = 0; k <= segments_; ++k) frames.push_back(at(k, block));
  return BlockPath(segments_, 1, std::move(frames));
}

// ---------------------------------------------------------------------------
// PathMetric

PathMetric::PathMetric(int n, std::vector<double> weights, std::vector<double> scales, double p)
    : n_(n), weights_(std::move(weights)), scales_(std::move(scales)), det_power_(p) {
  if (n < 1 || n > kMaxDim) throw StructuralError("fiber dimension out of range");
  for (double w : weights_)
    if (!(w > 0.0) || !std::isfinite(w)) throw StructuralError("quadrature weights must be positive");
}

PathMetric PathMetric::reference_weighted(const SpdMatrix& g_ref) {
  return PathMetric(g_ref.dim(), {1.0}, {1.0 / det(g_ref)}, 1.0);
}

PathMetric PathMetric::l2(int n, std::vector<double> weights) {
  std::vector<double> scales(weights.size(), 1.0);
  return PathMetric(n, std::move(weights), std::move(scales), 0.5);
}

double PathMetric::density(std::size_t b, const Dense& g) const {
  Eigen::LLT<Dense> llt;
  if (!factor(g, llt)) throw DomainError("frame is not positive definite");
  return weights_[b] * scales_[b] * det_power_of(llt, det_power_);
}

double PathMetric::sq_norm(std::size_t b, const Dense& g, const Dense& delta) const {
  Eigen::LLT<Dense> llt;
  if (!factor(g, llt)) throw DomainError("base point is not positive definite");
  const Dense x = llt.solve(delta);
  return weights_[b] * scales_[b] * det_power_of(llt, det_power_) * (x * x).trace();
}

double PathMetric::segment_sq_norm(std::span<const SymMatrix> a, std::span<const SymMatrix> b) const {
  if (a.size() != blocks() || b.size() != blocks()) throw StructuralError("frame block count does not match metric");
  std::vector<double> terms(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].dim() != n_ || b[i].dim() != n_) throw StructuralError("frame dimension does not match metric");
    terms[i] = segment_term(*this, i, a[i].dense(), b[i].dense(), false).value;
  }
  return pairwise_sum(terms);
}

std::vector<double> segment_sq_norms(const PathMetric& metric, const BlockPath& path) {
  std::vector<double> s(static_cast<std::size_t>(path.segments()));
  for (int k = 0; k < path.segments(); ++k) s[static_cast<std::size_t>(k)] = metric.segment_sq_norm(path.frame(k), path.frame(k + 1));
  return s;
}

double discrete_length(const PathMetric& metric, const BlockPath& path) {
  std::vector<double> s = segment_sq_norms(metric, path);
  for (double& v : s) v = std::sqrt(v);
  return mirrored_sum(s);
}

double discrete_energy(const PathMetric& metric, const BlockPath& path) {
  const std::vector<double> s = segment_sq_norms(metric, path);
  return path.segments() * mirrored_sum(s);
}

// ---------------------------------------------------------------------------
// Settings and options

void GeodesicSetting::validate() const {
  if (start.size() != metric.blocks() || end.size() != metric.blocks()) {
    throw StructuralError("endpoint block counts do not match the metric");
  }
  for (std::size_t b = 0; b < start.size(); ++b) {
    if (start[b].dim() != metric.dim() || end[b].dim() != metric.dim()) {
      throw StructuralError("endpoint dimension does not match the metric");
    }
    SpdMatrix{start[b]};
    SpdMatrix{end[b]};
    if (constraint == Constraint::fixed_volume) {
      const double d0 = start[b].dense().determinant();
      const double d1 = end[b].dense().determinant();
      if (std::abs(d0 - d1) > 1e-8 * std::max(d0, d1)) {
        throw PreconditionError("fixed-volume endpoints induce different volumes in block " + std::to_string(b));
      }
    }
  }
}

void OptimizerOptions::validate() const {
  if (K < 2) throw StructuralError("optimizer needs K >= 2");
  if (max_iters < 0) throw StructuralError("max_iters must be nonnegative");
  if (!(grad_tol > 0.0) || !(step0 > 0.0) || !(eig_floor > 0.0) || eig_floor >= 1.0) {
    throw StructuralError("optimizer tolerances must be positive (eig_floor < 1)");
  }
}

// ---------------------------------------------------------------------------
// Gradients

Gradient analytic_gradient(const GeodesicSetting& s, const BlockPath& path) {
  const int kk = path.segments();
  const std::size_t blocks = path.blocks();
  std::vector<Dense> acc(static_cast<std::size_t>(kk - 1) * blocks);
  for (auto& a : acc) a = Dense::Zero(s.metric.dim(), s.metric.dim());

  for (int k = 0; k < kk; ++k) {
    for (std::size_t b = 0; b < blocks; ++b) {
      SegmentTerm t = segment_term(s.metric, b, path.at(k, b).dense(), path.at(k + 1, b).dense(), true);
      if (k >= 1) acc[static_cast<std::size_t>(k - 1) * blocks + b] += kk * t.grad_start;
      if (k + 1 <= kk - 1) acc[static_cast<std::size_t>(k) * blocks + b] += kk * t.grad_end;
    }
  }
  Gradient g;
  g.partials.reserve(acc.size());
  for (const Dense& a : acc) g.partials.push_back(to_partials(a));
  return g;
}

namespace {

struct Probe {
  bool ok = false;
  double energy = 0.0;
};

Probe probe(const GeodesicSetting& s, const BlockPath& path, int k, std::size_t b, int entry, double delta) {
  SymMatrix v = path.at(k, b);
  v.upper()[static_cast<std::size_t>(entry)] += delta;
  try {
    const double e = local_energy(s, path, k, b, v);
    return {std::isfinite(e), e};
  } catch (const DomainError&) {
    return {};
  }
}

}  // namespace

Gradient finite_difference_gradient(const GeodesicSetting& s, const BlockPath& path) {
  Gradient g;
  const int entries = packed_size(s.metric.dim());
  for (int k = 1; k < path.segments(); ++k) {
    for (std::size_t b = 0; b < path.blocks(); ++b) {
      const double h = kFdRelStep * frame_scale(path.at(k, b));
      const double e0 = local_energy(s, path, k, b, path.at(k, b));
      SymMatrix partial(s.metric.dim());
      for (int e = 0; e < entries; ++e) {
        const Probe plus = probe(s, path, k, b, e, h);
        const Probe minus = probe(s, path, k, b, e, -h);
        double d = 0.0;
        if (plus.ok && minus.ok) {
          d = (plus.energy - minus.energy) / (2.0 * h);
        } else {
          g.one_sided_fallback = true;
          if (plus.ok) {
            d = (plus.energy - e0) / h;
          } else if (minus.ok) {
            d = (e0 - minus.energy) / h;
          } else {
            throw DomainError("finite-difference probes left the cone on both sides");
          }
        }
        partial.upper()[static_cast<std::size_t>(e)] = d;
      }
      g.partials.push_back(partial);
    }
  }
  return g;
}

double forward_difference_discrepancy(const GeodesicSetting& s, const BlockPath& path) {
  const int entries = packed_size(s.metric.dim());
  double worst = 0.0;
  std::vector<double> central(entries), forward(entries);
  for (int k = 1; k < path.segments(); ++k) {
    for (std::size_t b = 0; b < path.blocks(); ++b) {
      const double scale = frame_scale(path.at(k, b));
      const double h = kFdRelStep * scale;
      const double hf = kForwardRelStep * scale;
      const double e0 = local_energy(s, path, k, b, path.at(k, b));
      // Differences below this are dominated by cancellation in e0.
      double frame_max = 1e-7 * std::abs(e0) / h;
      bool ok = true;
      for (int e = 0; e < entries && ok; ++e) {
        const Probe plus = probe(s, path, k, b, e, h);
        const Probe minus = probe(s, path, k, b, e, -h);
        const Probe step = probe(s, path, k, b, e, hf);
        ok = plus.ok && minus.ok && step.ok;
        if (!ok) break;
        central[e] = (plus.energy - minus.energy) / (2.0 * h);
        forward[e] = (step.energy - e0) / hf;
        frame_max = std::max(frame_max, std::abs(central[e]));
      }
      if (!ok) continue;
      // Relative to the largest partial of the frame: a small entry carries
      // the same absolute truncation error as the large ones.
      for (int e = 0; e < entries; ++e) worst = std::max(worst, std::abs(forward[e] - central[e]) / frame_max);
    }
  }
  return worst;
}

double riemannian_gradient_norm(const GeodesicSetting& s, const BlockPath& path, const Gradient& g) {
  const Whitening w = whitening(s, path);
  const std::vector<Dense> y = whitened_gradient(s, w, g);
  std::vector<double> sq(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) sq[i] = y[i].squaredNorm();
  return std::sqrt(pairwise_sum(sq));
}

// ---------------------------------------------------------------------------
// Minimization

std::string to_string(OptimizerStatus status) {
  switch (status) {
    case OptimizerStatus::converged:
      return "converged";
    case OptimizerStatus::max_iterations:
      return "max_iterations";
    case OptimizerStatus::boundary_stall:
      return "boundary_stall";
  }
  return "unknown";
}

MinimizeResult minimize(const GeodesicSetting& s, std::span<const NamedPath> candidates, const OptimizerOptions& opts) {
  s.validate();
  opts.validate();
  const EndpointFloors floors = endpoint_floors(s, opts.eig_floor);

  MinimizeResult result;
  bool all_equal = true;
  for (std::size_t b = 0; b < s.start.size(); ++b) all_equal = all_equal && s.start[b] == s.end[b];
  if (all_equal) {
    result.path = BlockPath::constant(s.start, opts.K);
    result.diagnostics.initializer = result.diagnostics.returned = "constant";
    result.diagnostics.trace.push_back({0, 0.0, 0.0, 0.0, 0});
    return result;
  }

  // Admissible candidates, retracted onto the constraint when there is one.
  std::vector<NamedPath> usable;
  for (const NamedPath& c : candidates) {
    if (!endpoints_match(s, c.path)) throw StructuralError("candidate '" + c.name + "' does not join the endpoints");
    NamedPath p = c;
    if (s.constraint == Constraint::fixed_volume && !retract_path(p.path, floors)) continue;
    if (!interior_admissible(p.path, floors)) continue;
    if (!std::isfinite(safe_energy(s.metric, p.path))) continue;
    usable.push_back(std::move(p));
  }

  const NamedPath* start = nullptr;
  double best_energy = std::numeric_limits<double>::infinity();
  for (const NamedPath& c : usable) {
    if (c.path.segments() != opts.K) continue;
    const double e = safe_energy(s.metric, c.path);
    if (e < best_energy) {
      best_energy = e;
      start = &c;
    }
  }
  if (start == nullptr) throw DomainError("no admissible initial path with K = " + std::to_string(opts.K));

  BlockPath x = start->path;
  double energy = best_energy;
  Diagnostics& diag = result.diagnostics;
  diag.initializer = start->name;
  diag.status = OptimizerStatus::max_iterations;
  diag.trace.push_back({0, energy, discrete_length(s.metric, x), 0.0, 0});

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    Gradient g = opts.gradient == GradientMode::analytic ? analytic_gradient(s, x) : finite_difference_gradient(s, x);
    diag.fd_fallback = diag.fd_fallback || g.one_sided_fallback;
    const std::vector<Dense> d = descent_direction(s, x, g);
    const double slope = directional_derivative(g, d);
    if (!(slope < 0.0) || -slope <= opts.grad_tol * energy) {
      diag.status = OptimizerStatus::converged;
      break;
    }

    double alpha = opts.step0;
    int backtracks = 0;
    bool accepted = false;
    bool last_inadmissible = false;
    BlockPath trial;
    double trial_energy = 0.0;
    for (; backtracks <= kMaxHalvings; ++backtracks, alpha *= 0.5) {
      trial = step_path(x, d, alpha);
      if (s.constraint == Constraint::fixed_volume && !retract_path(trial, floors)) {
        last_inadmissible = true;
        continue;
      }
      if (!interior_admissible(trial, floors)) {
        last_inadmissible = true;
        continue;
      }
      last_inadmissible = false;
      trial_energy = safe_energy(s.metric, trial);
      if (trial_energy <= energy + kArmijo * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      diag.status = last_inadmissible ? OptimizerStatus::boundary_stall : OptimizerStatus::converged;
      break;
    }
    x = std::move(trial);
    energy = trial_energy;
    diag.iterations = iter;
    diag.trace.push_back({iter, energy, discrete_length(s.metric, x), alpha, backtracks});
  }

  result.path = x;
  result.energy = energy;
  result.length = discrete_length(s.metric, x);
  diag.returned = "optimized";
  for (const NamedPath& c : usable) {
    const double len = discrete_length(s.metric, c.path);
    if (len < result.length) {
      result.length = len;
      result.path = c.path;
      result.energy = discrete_energy(s.metric, c.path);
      diag.returned = c.name;
    }
  }
  return result;
}

}  // namespace metricspace
