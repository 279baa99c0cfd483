#include "metricspace/product.hpp"

#include <cmath>
#include <string>

#include "metricspace/error.hpp"
#include "metricspace/parallel.hpp"

namespace metricspace {

namespace {

constexpr double kTraceTol = 1e-10;
constexpr double kVolumeTol = 1e-8;

const std::string& id_of(const ChartPtr& chart, std::size_t i) { return chart->point(i).id; }

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

}  // namespace

VolumeDensity::VolumeDensity(ChartPtr c, std::vector<double> v) : chart(std::move(c)), values(std::move(v)) {
  if (!chart) throw StructuralError("density has no chart");
  if (values.size() != chart->size()) throw StructuralError("density size does not match its chart");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) throw DomainError("density must be positive", id_of(chart, i));
  }
}

DensityTangent::DensityTangent(ChartPtr c, std::vector<double> v) : chart(std::move(c)), values(std::move(v)) {
  if (!chart) throw StructuralError("density tangent has no chart");
  if (values.size() != chart->size()) throw StructuralError("density tangent size does not match its chart");
}

VolumeDensity induced_density(const MetricField& g) {
  std::vector<double> nu(g.values.size());
  for (std::size_t i = 0; i < nu.size(); ++i) nu[i] = sqrt_det(g.at(i));
  return VolumeDensity(g.chart, std::move(nu));
}

double vol_inner(const VolumeDensity& nu, const DensityTangent& alpha, const DensityTangent& beta) {
  require_same_chart(*nu.chart, *alpha.chart);
  require_same_chart(*nu.chart, *beta.chart);
  const double n = nu.chart->dim();
  std::vector<double> terms(nu.values.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    terms[i] = nu.chart->weight(i) * (alpha.at(i) / nu.at(i)) * (beta.at(i) / nu.at(i)) * nu.at(i);
  }
  return 4.0 / n * pairwise_sum(terms);
}

VolumeDensity vol_exp(const VolumeDensity& nu0, const DensityTangent& alpha, double t) {
  require_same_chart(*nu0.chart, *alpha.chart);
  std::vector<double> out(nu0.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double factor = 1.0 + 0.5 * t * alpha.at(i) / nu0.at(i);
    if (!(factor > 0.0)) {
      throw DomainError("volume geodesic leaves the space of volume forms at t = " + std::to_string(t),
                        id_of(nu0.chart, i));
    }
    out[i] = factor * factor * nu0.at(i);
  }
  return VolumeDensity(nu0.chart, std::move(out));
}

DensityTangent vol_log(const VolumeDensity& nu0, const VolumeDensity& nu1) {
  require_same_chart(*nu0.chart, *nu1.chart);
  std::vector<double> out(nu0.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 2.0 * (std::sqrt(nu1.at(i) / nu0.at(i)) - 1.0) * nu0.at(i);
  return DensityTangent(nu0.chart, std::move(out));
}

double density_path_length(std::span<const VolumeDensity> path) {
  if (path.size() < 2) throw StructuralError("a density path needs at least two samples");
  std::vector<double> seg(path.size() - 1);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const VolumeDensity& a = path[k];
    const VolumeDensity& b = path[k + 1];
    require_same_chart(*a.chart, *b.chart);
    std::vector<double> mid(a.values.size()), diff(a.values.size());
    for (std::size_t i = 0; i < mid.size(); ++i) {
      mid[i] = 0.5 * (a.at(i) + b.at(i));
      diff[i] = b.at(i) - a.at(i);
    }
    const DensityTangent d(a.chart, std::move(diff));
    seg[k] = std::sqrt(vol_inner(VolumeDensity(a.chart, std::move(mid)), d, d));
  }
  return mirrored_sum(seg);
}

MetricField mu_exp(const MetricField& g0, const TangentField& h, double t) {
  require_same_chart(*g0.chart, *h.chart);
  std::vector<SpdMatrix> out;
  out.reserve(g0.values.size());
  for (std::size_t i = 0; i < g0.values.size(); ++i) {
    const double tr = trace_with(g0.at(i), h.at(i));
    const double size = std::sqrt(std::max(0.0, trace_pair(g0.at(i), h.at(i), h.at(i))));
    if (std::abs(tr) > kTraceTol * std::max(1.0, size)) {
      throw PreconditionError("tangent is not traceless (tr_g h = " + std::to_string(tr) + ")", id_of(g0.chart, i));
    }
    out.push_back(spd_exp_from(g0.at(i), t * h.at(i)));
  }
  return MetricField(g0.chart, std::move(out));
}

TangentField mu_log(const MetricField& g0, const MetricField& g1) {
  require_same_chart(*g0.chart, *g1.chart);
  std::vector<SymMatrix> out;
  out.reserve(g0.values.size());
  for (std::size_t i = 0; i < g0.values.size(); ++i) {
    if (!close_rel(sqrt_det(g0.at(i)), sqrt_det(g1.at(i)), kVolumeTol)) {
      throw PreconditionError("metrics induce different volume forms", id_of(g0.chart, i));
    }
    SymMatrix h = spd_log_from(g0.at(i), g1.at(i));
    // Remove the round-off trace so the result satisfies mu_exp's precondition.
    out.push_back(traceless_part(g0.at(i), h));
  }
  return TangentField(g0.chart, std::move(out));
}

MetricField i_mu(const VolumeDensity& mu, const VolumeDensity& nu, const MetricField& gbar) {
  require_same_chart(*mu.chart, *nu.chart);
  require_same_chart(*mu.chart, *gbar.chart);
  const double n = mu.chart->dim();
  std::vector<SpdMatrix> out;
  out.reserve(gbar.values.size());
  for (std::size_t i = 0; i < gbar.values.size(); ++i) {
    if (!close_rel(sqrt_det(gbar.at(i)), mu.at(i), kVolumeTol)) {
      throw PreconditionError("metric does not induce the base volume form", id_of(mu.chart, i));
    }
    out.emplace_back(std::pow(nu.at(i) / mu.at(i), 2.0 / n) * gbar.at(i).sym());
  }
  return MetricField(gbar.chart, std::move(out));
}

Split split(const VolumeDensity& mu, const MetricField& g) {
  require_same_chart(*mu.chart, *g.chart);
  const double n = mu.chart->dim();
  VolumeDensity nu = induced_density(g);
  std::vector<SpdMatrix> bar;
  bar.reserve(g.values.size());
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    bar.emplace_back(std::pow(nu.at(i) / mu.at(i), -2.0 / n) * g.at(i).sym());
  }
  return {std::move(nu), MetricField(g.chart, std::move(bar))};
}

TangentField i_mu_pushforward(const VolumeDensity& mu, const VolumeDensity& nu, const MetricField& gbar,
                              const DensityTangent& beta) {
  require_same_chart(*mu.chart, *nu.chart);
  require_same_chart(*mu.chart, *gbar.chart);
  require_same_chart(*mu.chart, *beta.chart);
  const double n = mu.chart->dim();
  std::vector<SymMatrix> out;
  out.reserve(gbar.values.size());
  for (std::size_t i = 0; i < gbar.values.size(); ++i) {
    const double c = 2.0 / n * std::pow(nu.at(i) / mu.at(i), 2.0 / n) * beta.at(i) / nu.at(i);
    out.push_back(c * gbar.at(i).sym());
  }
  return TangentField(gbar.chart, std::move(out));
}

DiscretePath product_path(const MetricField& g0, const MetricField& g1, const VolumeDensity& mu, int segments) {
  require_same_chart(*g0.chart, *g1.chart);
  require_same_chart(*g0.chart, *mu.chart);
  if (segments < 1) throw StructuralError("product path needs K >= 1");
  const Split s0 = split(mu, g0);
  const Split s1 = split(mu, g1);
  const DensityTangent alpha = vol_log(s0.nu, s1.nu);
  const TangentField h = mu_log(s0.gbar, s1.gbar);

  std::vector<MetricField> frames;
  frames.reserve(static_cast<std::size_t>(segments + 1));
  frames.push_back(g0);
  for (int k = 1; k < segments; ++k) {
    const double t = static_cast<double>(k) / segments;
    frames.push_back(i_mu(mu, vol_exp(s0.nu, alpha, t), mu_exp(s0.gbar, h, t)));
  }
  frames.push_back(g1);
  return DiscretePath(g0.chart, std::move(frames));
}

}  // namespace metricspace
