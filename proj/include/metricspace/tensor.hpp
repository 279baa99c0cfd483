#pragma once

// Small dense symmetric and SPD matrix algebra. Everything pointwise in the
// library bottoms out here.

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>

#include <Eigen/Dense>

namespace metricspace {

inline constexpr int kMaxDim = 8;

/// Dense scratch type. Fixed capacity, so nothing here touches the heap.
using Dense = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using DenseVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

/// Relative SPD floor: the smallest eigenvalue must exceed this multiple of
/// the largest one.
inline constexpr double kSpdFloor = 1e-10;

/// Number of stored entries of an n x n symmetric matrix.
constexpr int packed_size(int n) { return n * (n + 1) / 2; }

/// Symmetric n x n matrix stored as its upper triangle, row-major.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int n);

  static SymMatrix zero(int n) { return SymMatrix(n); }
  static SymMatrix identity(int n, double scale = 1.0);
  static SymMatrix diagonal(std::initializer_list<double> diag);
  static SymMatrix diagonal(std::span<const double> diag);
  /// Packed upper triangle, row-major; size must be packed_size(n).
  static SymMatrix from_upper(int n, std::span<const double> upper);
  /// Reads the upper triangle of `m`; the lower triangle is ignored.
  static SymMatrix from_dense(const Dense& m);

  int dim() const noexcept { return n_; }
  double operator()(int i, int j) const noexcept { return data_[index(i, j)]; }
  void set(int i, int j, double v) noexcept { data_[index(i, j)] = v; }

  std::span<const double> upper() const noexcept {
    return {data_.data(), static_cast<std::size_t>(packed_size(n_))};
  }
  std::span<double> upper() noexcept { return {data_.data(), static_cast<std::size_t>(packed_size(n_))}; }

  Dense dense() const;
  double trace() const noexcept;
  double frobenius_norm() const noexcept;
  bool is_zero() const noexcept;

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double s) noexcept;

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
  friend bool operator==(const SymMatrix& a, const SymMatrix& b) noexcept;

 private:
  int index(int i, int j) const noexcept {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i - 1) / 2 + (j - i);
  }

  int n_ = 0;
  std::array<double, packed_size(kMaxDim)> data_{};
};

/// A symmetric matrix whose spectrum clears the relative SPD floor.
/// Construction validates; a live SpdMatrix is always positive definite.
class SpdMatrix {
 public:
  /// Throws DomainError when the floor is violated.
  explicit SpdMatrix(const SymMatrix& m);

  static SpdMatrix identity(int n, double scale = 1.0) { return SpdMatrix(SymMatrix::identity(n, scale)); }
  static SpdMatrix diagonal(std::initializer_list<double> diag) { return SpdMatrix(SymMatrix::diagonal(diag)); }

  int dim() const noexcept { return base_.dim(); }
  const SymMatrix& sym() const noexcept { return base_; }
  Dense dense() const { return base_.dense(); }
  double operator()(int i, int j) const noexcept { return base_(i, j); }

  friend bool operator==(const SpdMatrix& a, const SpdMatrix& b) noexcept { return a.base_ == b.base_; }

 private:
  SymMatrix base_;
};

/// True when `m` clears the relative SPD floor.
bool is_spd(const SymMatrix& m);
/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const SymMatrix& m);
DenseVector eigenvalues(const SymMatrix& m);

/// tr(g^-1 h g^-1 k).
double trace_pair(const SpdMatrix& g, const SymMatrix& h, const SymMatrix& k);
/// tr(g^-1 h).
double trace_with(const SpdMatrix& g, const SymMatrix& h);
double sqrt_det(const SpdMatrix& g);
double det(const SpdMatrix& g);

/// g0 exp(g0^-1 a), evaluated as g0^1/2 exp(g0^-1/2 a g0^-1/2) g0^1/2.
SpdMatrix spd_exp_from(const SpdMatrix& g0, const SymMatrix& a);
/// Inverse of spd_exp_from: the unique symmetric a with spd_exp_from(g0, a) == g1.
SymMatrix spd_log_from(const SpdMatrix& g0, const SpdMatrix& g1);
/// h - (tr_g h / n) g.
SymMatrix traceless_part(const SpdMatrix& g, const SymMatrix& h);

/// Symmetric square root and inverse square root of an SPD matrix.
struct SpdRoots {
  Dense sqrt;
  Dense inv_sqrt;
};
SpdRoots spd_roots(const SpdMatrix& g);

}  // namespace metricspace
