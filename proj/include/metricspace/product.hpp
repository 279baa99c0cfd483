#pragma once

// The splitting of metric fields into a volume form and a metric inducing a
// fixed volume form, with the closed-form geodesics of both factors.
//
// Volume forms are positive coordinate densities on the chart: nu_i means the
// form nu_i dx at point i, and the form induced by a metric g is sqrt(det g).

#include <span>
#include <vector>

#include "metricspace/field.hpp"

namespace metricspace {

struct VolumeDensity {
  ChartPtr chart;
  std::vector<double> values;

  /// Throws DomainError (with the point id) on nonpositive entries.
  VolumeDensity(ChartPtr chart, std::vector<double> values);
  double at(std::size_t i) const { return values[i]; }
};

/// An n-form, i.e. a tangent vector to the space of volume forms. May be negative.
struct DensityTangent {
  ChartPtr chart;
  std::vector<double> values;

  DensityTangent(ChartPtr chart, std::vector<double> values);
  double at(std::size_t i) const { return values[i]; }
};

/// Density of the volume form induced by g: sqrt(det g_i).
VolumeDensity induced_density(const MetricField& g);

/// (4 / n) sum_i w_i (alpha_i / nu_i) (beta_i / nu_i) nu_i.
double vol_inner(const VolumeDensity& nu, const DensityTangent& alpha, const DensityTangent& beta);
/// (1 + (t / 2) alpha / nu0)^2 nu0. Throws DomainError naming the first point
/// where the factor is <= 0.
VolumeDensity vol_exp(const VolumeDensity& nu0, const DensityTangent& alpha, double t);
/// alpha_i = 2 (sqrt(nu1_i / nu0_i) - 1) nu0_i.
DensityTangent vol_log(const VolumeDensity& nu0, const VolumeDensity& nu1);
/// Midpoint-rule length of a sampled path of volume forms under vol_inner.
double density_path_length(std::span<const VolumeDensity> path);

/// Pointwise g0 exp(t g0^-1 h). Requires tr_{g0} h == 0 (to 1e-10) everywhere.
MetricField mu_exp(const MetricField& g0, const TangentField& h, double t);
/// Pointwise spd_log_from. Requires equal induced densities (to 1e-8).
TangentField mu_log(const MetricField& g0, const MetricField& g1);

/// (nu / mu)^(2 / n) gbar. Requires gbar to induce mu (to 1e-8).
MetricField i_mu(const VolumeDensity& mu, const VolumeDensity& nu, const MetricField& gbar);

struct Split {
  VolumeDensity nu;
  MetricField gbar;
};
/// Inverse of i_mu: nu = induced density of g, gbar = (nu / mu)^(-2 / n) g.
Split split(const VolumeDensity& mu, const MetricField& g);

/// Pushforward of a density tangent beta through nu -> i_mu(mu, nu, gbar):
/// (2 / n) (nu / mu)^(2 / n) (beta / nu) gbar.
TangentField i_mu_pushforward(const VolumeDensity& mu, const VolumeDensity& nu, const MetricField& gbar,
                              const DensityTangent& beta);

/// Frames i_mu(mu, nu_t, gbar_t), with nu_t the volume geodesic and gbar_t the
/// fixed-volume geodesic between the split endpoints, t = k / K.
DiscretePath product_path(const MetricField& g0, const MetricField& g1, const VolumeDensity& mu, int segments);

}  // namespace metricspace
