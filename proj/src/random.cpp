#include "metricspace/random.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "metricspace/error.hpp"

namespace metricspace {

Rng trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return Rng(seq);
}

SymMatrix random_symmetric(Rng& rng, int n, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  SymMatrix m(n);
  for (double& v : m.upper()) v = normal(rng);
  return m;
}

SpdMatrix random_spd(Rng& rng, int n, double spread) {
  if (!(spread >= 1.0)) throw DomainError("spread must be >= 1");
  if (spread == 1.0) return SpdMatrix::identity(n);
  std::normal_distribution<double> normal;
  Dense a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
  Eigen::HouseholderQR<Dense> qr(a);
  Dense q = qr.householderQ();
  // Sign fix so Q is Haar distributed.
  for (int j = 0; j < n; ++j)
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) *= -1.0;
  const double log_spread = std::log(spread);
  std::uniform_real_distribution<double> uniform(-log_spread, log_spread);
  DenseVector eig(n);
  for (int i = 0; i < n; ++i) eig(i) = std::exp(uniform(rng));
  const Dense g = q * eig.asDiagonal() * q.transpose();
  return SpdMatrix(SymMatrix::from_dense(0.5 * (g + g.transpose())));
}

ChartPtr random_chart(Rng& rng, int points, int n) {
  if (points < 1) throw StructuralError("a chart needs at least one point");
  std::uniform_real_distribution<double> uniform(0.5, 1.5);
  std::vector<QuadChart::Point> pts;
  pts.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) pts.push_back({"p" + std::to_string(i), uniform(rng) / points, {}});
  return std::make_shared<const QuadChart>(n, std::move(pts));
}

ChartPtr uniform_chart(int points, int n) {
  if (points < 1) throw StructuralError("a chart needs at least one point");
  std::vector<QuadChart::Point> pts;
  pts.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) pts.push_back({"p" + std::to_string(i), 1.0 / points, {}});
  return std::make_shared<const QuadChart>(n, std::move(pts));
}

MetricField random_metric_field(Rng& rng, const ChartPtr& chart, double spread) {
  std::vector<SpdMatrix> values;
  values.reserve(chart->size());
  for (std::size_t i = 0; i < chart->size(); ++i) values.push_back(random_spd(rng, chart->dim(), spread));
  return MetricField(chart, std::move(values));
}

VolumeDensity random_density(Rng& rng, const ChartPtr& chart, double spread) {
  if (!(spread >= 1.0)) throw DomainError("spread must be >= 1");
  const double log_spread = std::log(spread);
  std::uniform_real_distribution<double> uniform(-log_spread, log_spread);
  std::vector<double> nu(chart->size());
  for (double& v : nu) v = spread == 1.0 ? 1.0 : std::exp(uniform(rng));
  return VolumeDensity(chart, std::move(nu));
}

DiscretePath random_path(Rng& rng, const MetricField& g0, int segments, double amplitude) {
  if (segments < 1) throw StructuralError("a path needs K >= 1");
  const int n = g0.chart->dim();
  std::vector<SymMatrix> linear, bend;
  for (std::size_t i = 0; i < g0.values.size(); ++i) {
    linear.push_back(random_symmetric(rng, n, amplitude));
    bend.push_back(random_symmetric(rng, n, amplitude));
  }
  std::vector<MetricField> frames;
  frames.reserve(static_cast<std::size_t>(segments + 1));
  frames.push_back(g0);
  for (int k = 1; k <= segments; ++k) {
    const double t = static_cast<double>(k) / segments;
    const double s = k == segments ? 0.0 : std::sin(std::numbers::pi * t);
    std::vector<SpdMatrix> v;
    v.reserve(g0.values.size());
    for (std::size_t i = 0; i < g0.values.size(); ++i) v.push_back(spd_exp_from(g0.at(i), t * linear[i] + s * bend[i]));
    frames.emplace_back(g0.chart, std::move(v));
  }
  return DiscretePath(g0.chart, std::move(frames));
}

}  // namespace metricspace
