#include "metricspace/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "metricspace/error.hpp"

namespace metricspace {

namespace {

void check_dim(int n) {
  if (n < 1 || n > kMaxDim) {
    throw StructuralError("fiber dimension " + std::to_string(n) + " outside [1, " + std::to_string(kMaxDim) + "]");
  }
}

void require_same_dim(int a, int b) {
  if (a != b) {
    throw StructuralError("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

using Solver = Eigen::SelfAdjointEigenSolver<Dense>;

Solver decompose(const Dense& m) {
  Solver es(m);
  if (es.info() != Eigen::Success) throw DomainError("symmetric eigendecomposition failed");
  return es;
}

// V f(D) V^T for a symmetric matrix given by its eigendecomposition.
template <class F>
Dense spectral_apply(const Solver& es, F&& f) {
  DenseVector d = es.eigenvalues().unaryExpr(f);
  const Dense& v = es.eigenvectors();
  return v * d.asDiagonal() * v.transpose();
}

// LDL-free inverse for tiny SPD matrices.
Dense spd_inverse(const Dense& g) {
  Eigen::LLT<Dense> llt(g);
  if (llt.info() != Eigen::Success) throw DomainError("matrix is not positive definite");
  return llt.solve(Dense::Identity(g.rows(), g.cols()));
}

}  // namespace

SymMatrix::SymMatrix(int n) : n_(n) { check_dim(n); }

SymMatrix SymMatrix::identity(int n, double scale) {
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) m.set(i, i, scale);
  return m;
}

SymMatrix SymMatrix::diagonal(std::initializer_list<double> diag) {
  return diagonal(std::span<const double>(diag.begin(), diag.size()));
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
  SymMatrix m(static_cast<int>(diag.size()));
  for (int i = 0; i < m.dim(); ++i) m.set(i, i, diag[static_cast<std::size_t>(i)]);
  return m;
}

SymMatrix SymMatrix::from_upper(int n, std::span<const double> upper) {
  SymMatrix m(n);
  if (upper.size() != static_cast<std::size_t>(packed_size(n))) {
    throw StructuralError("upper triangle of a " + std::to_string(n) + "x" + std::to_string(n) + " matrix needs " +
                          std::to_string(packed_size(n)) + " entries, got " + std::to_string(upper.size()));
  }
  std::copy(upper.begin(), upper.end(), m.data_.begin());
  return m;
}

SymMatrix SymMatrix::from_dense(const Dense& d) {
  if (d.rows() != d.cols()) throw StructuralError("matrix is not square");
  SymMatrix m(static_cast<int>(d.rows()));
  for (int i = 0; i < m.n_; ++i)
    for (int j = i; j < m.n_; ++j) m.set(i, j, d(i, j));
  return m;
}

Dense SymMatrix::dense() const {
  Dense d(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = i; j < n_; ++j) d(i, j) = d(j, i) = (*this)(i, j);
  return d;
}

double SymMatrix::trace() const noexcept {
  double t = 0.0;
  for (int i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

double SymMatrix::frobenius_norm() const noexcept {
  double s = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) s += (*this)(i, j) * (*this)(i, j);
  return std::sqrt(s);
}

bool SymMatrix::is_zero() const noexcept {
  const auto u = upper();
  return std::all_of(u.begin(), u.end(), [](double v) { return v == 0.0; });
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  require_same_dim(n_, o.n_);
  for (int i = 0; i < packed_size(n_); ++i) data_[i] += o.data_[i];
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
  require_same_dim(n_, o.n_);
  for (int i = 0; i < packed_size(n_); ++i) data_[i] -= o.data_[i];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) noexcept {
  for (int i = 0; i < packed_size(n_); ++i) data_[i] *= s;
  return *this;
}

bool operator==(const SymMatrix& a, const SymMatrix& b) noexcept {
  if (a.n_ != b.n_) return false;
  return std::equal(a.upper().begin(), a.upper().end(), b.upper().begin());
}

DenseVector eigenvalues(const SymMatrix& m) {
  Solver es(m.dense(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw DomainError("symmetric eigendecomposition failed");
  return es.eigenvalues();
}

double min_eigenvalue(const SymMatrix& m) { return eigenvalues(m).minCoeff(); }

bool is_spd(const SymMatrix& m) {
  const DenseVector ev = eigenvalues(m);
  const double hi = ev.maxCoeff();
  const double lo = ev.minCoeff();
  return std::isfinite(lo) && std::isfinite(hi) && hi > 0.0 && lo > kSpdFloor * hi;
}

SpdMatrix::SpdMatrix(const SymMatrix& m) : base_(m) {
  if (m.dim() < 1) throw StructuralError("empty matrix");
  if (!is_spd(m)) {
    throw DomainError("matrix violates the SPD floor (min eigenvalue " + std::to_string(min_eigenvalue(m)) + ")");
  }
}

double trace_pair(const SpdMatrix& g, const SymMatrix& h, const SymMatrix& k) {
  require_same_dim(g.dim(), h.dim());
  require_same_dim(g.dim(), k.dim());
  const Dense gi = spd_inverse(g.dense());
  const Dense a = gi * h.dense();
  const Dense b = gi * k.dense();
  return (a * b).trace();
}

double trace_with(const SpdMatrix& g, const SymMatrix& h) {
  require_same_dim(g.dim(), h.dim());
  return spd_inverse(g.dense()).cwiseProduct(h.dense()).sum();
}

double det(const SpdMatrix& g) {
  Eigen::LLT<Dense> llt(g.dense());
  if (llt.info() != Eigen::Success) throw DomainError("matrix is not positive definite");
  const double d = llt.matrixLLT().diagonal().prod();
  return d * d;
}

double sqrt_det(const SpdMatrix& g) {
  Eigen::LLT<Dense> llt(g.dense());
  if (llt.info() != Eigen::Success) throw DomainError("matrix is not positive definite");
  return llt.matrixLLT().diagonal().prod();
}

SpdRoots spd_roots(const SpdMatrix& g) {
  const Solver es = decompose(g.dense());
  return {spectral_apply(es, [](double x) { return std::sqrt(x); }),
          spectral_apply(es, [](double x) { return 1.0 / std::sqrt(x); })};
}

SpdMatrix spd_exp_from(const SpdMatrix& g0, const SymMatrix& a) {
  require_same_dim(g0.dim(), a.dim());
  const SpdRoots r = spd_roots(g0);
  const Dense inner = r.inv_sqrt * a.dense() * r.inv_sqrt;
  const Dense e = spectral_apply(decompose(inner), [](double x) { return std::exp(x); });
  return SpdMatrix(SymMatrix::from_dense(r.sqrt * e * r.sqrt));
}

SymMatrix spd_log_from(const SpdMatrix& g0, const SpdMatrix& g1) {
  require_same_dim(g0.dim(), g1.dim());
  const SpdRoots r = spd_roots(g0);
  const Dense inner = r.inv_sqrt * g1.dense() * r.inv_sqrt;
  const Solver es = decompose(inner);
  if (es.eigenvalues().minCoeff() <= 0.0) throw DomainError("relative position is not positive definite");
  const Dense l = spectral_apply(es, [](double x) { return std::log(x); });
  return SymMatrix::from_dense(r.sqrt * l * r.sqrt);
}

SymMatrix traceless_part(const SpdMatrix& g, const SymMatrix& h) {
  const double t = trace_with(g, h);
  return h - (t / g.dim()) * g.sym();
}

}  // namespace metricspace
