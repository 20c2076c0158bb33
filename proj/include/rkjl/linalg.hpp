#pragma once

// Dense real linear algebra used throughout the solvers: vectors are plain
// std::vector<double>, matrices are row-major with span row views.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rkjl/error.hpp"

namespace rkjl {

using RealVector = std::vector<double>;

inline void require_finite(std::span<const double> v, const char* what) {
  for (double e : v) {
    if (!std::isfinite(e)) throw ParameterError(std::string(what) + ": non-finite entry");
  }
}

class DenseMatrix {
public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("DenseMatrix: data length " + std::to_string(data_.size()) + " != " +
                           std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    require_finite(data_, "DenseMatrix");
  }

  /// Row-major nested initializer, mostly for tests: {{1, 0}, {0, 1}}.
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("DenseMatrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
    require_finite(data_, "DenseMatrix");
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionError("dot: lengths " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline double norm2(std::span<const double> u) { return std::sqrt(dot(u, u)); }

/// Squared Euclidean distance ‖u − v‖².
inline double distance_sq(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DimensionError("distance_sq: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double t = u[i] - v[i];
    s += t * t;
  }
  return s;
}

/// y += a·x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionError("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline RealVector matvec(const DenseMatrix& A, std::span<const double> x) {
  if (x.size() != A.cols()) throw DimensionError("matvec: vector length does not match cols");
  RealVector y(A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i) y[i] = dot(A.row(i), x);
  return y;
}

inline double frobenius_sq(const DenseMatrix& A) {
  double s = 0.0;
  for (double e : A.data()) s += e * e;
  if (!(s > 0.0)) throw DegenerateMatrixError("frobenius_sq: all-zero matrix");
  return s;
}

/// AᵀA, symmetric n×n.
inline DenseMatrix gram(const DenseMatrix& A) {
  const std::size_t n = A.cols();
  DenseMatrix G(n, n);
  for (std::size_t r = 0; r < A.rows(); ++r) {
    auto a = A.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      const double ai = a[i];
      if (ai == 0.0) continue;
      for (std::size_t j = i; j < n; ++j) G(i, j) += ai * a[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) G(i, j) = G(j, i);
  return G;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Sweeps stop once every off-diagonal entry is negligible against its
/// diagonal pair (relative tolerance `tol`) or after `max_sweeps`.
inline RealVector jacobi_eigenvalues(DenseMatrix S, double tol = 1e-15, int max_sweeps = 100) {
  const std::size_t n = S.rows();
  if (S.cols() != n) throw DimensionError("jacobi_eigenvalues: matrix not square");
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = S(p, q);
        if (apq == 0.0) continue;
        const double app = S(p, p);
        const double aqq = S(q, q);
        if (std::abs(apq) <= tol * std::sqrt(std::abs(app * aqq))) {
          S(p, q) = S(q, p) = 0.0;
          continue;
        }
        rotated = true;
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double skp = S(k, p);
          const double skq = S(k, q);
          S(k, p) = c * skp - s * skq;
          S(k, q) = s * skp + c * skq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double spk = S(p, k);
          const double sqk = S(q, k);
          S(p, k) = c * spk - s * sqk;
          S(q, k) = s * spk + c * sqk;
        }
        S(p, q) = S(q, p) = 0.0;
      }
    }
    if (!rotated) break;
  }
  RealVector ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = S(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Squared singular values of A (eigenvalues of AᵀA), ascending.
inline RealVector singular_values_sq(const DenseMatrix& A) { return jacobi_eigenvalues(gram(A)); }

/// Smallest singular value of a tall full-column-rank matrix.
///
/// Computed as √λ_min(AᵀA). Forming AᵀA squares the condition number, so a
/// matrix whose λ_min/λ_max falls below `rank_tol` is reported as rank
/// deficient even if it is merely very ill conditioned.
inline double sigma_min(const DenseMatrix& A, double rank_tol = 1e-10) {
  if (A.rows() < A.cols()) throw RankDeficiencyError("sigma_min: fewer rows than columns");
  if (A.cols() == 0) throw DimensionError("sigma_min: empty matrix");
  const RealVector ev = singular_values_sq(A);
  const double lmin = ev.front();
  const double lmax = ev.back();
  if (!(lmax > 0.0) || lmin <= rank_tol * lmax) {
    throw RankDeficiencyError("sigma_min: matrix is rank deficient (lambda_min/lambda_max <= " +
                              std::to_string(rank_tol) + ")");
  }
  return std::sqrt(lmin);
}

inline double sigma_max(const DenseMatrix& A) {
  const RealVector ev = singular_values_sq(A);
  return ev.empty() ? 0.0 : std::sqrt(std::max(ev.back(), 0.0));
}

}  // namespace rkjl
