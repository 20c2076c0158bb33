#pragma once

#include <cmath>
#include <cstddef>
#include <utility>

#include "rkjl/linalg.hpp"
#include "rkjl/sampling.hpp"

namespace rkjl {

/// A, b, and the per-row data every row-action solver needs: row norms and
/// the squared-norm sampling distribution.
class LinearSystem {
public:
  LinearSystem() = default;

  LinearSystem(DenseMatrix A, RealVector b) : A_(std::move(A)), b_(std::move(b)) {
    if (b_.size() != A_.rows()) {
      throw DimensionError("LinearSystem: b has length " + std::to_string(b_.size()) + ", A has " +
                           std::to_string(A_.rows()) + " rows");
    }
    require_finite(b_, "LinearSystem b");
    row_norms_.resize(A_.rows());
    for (std::size_t i = 0; i < A_.rows(); ++i) row_norms_[i] = norm2(A_.row(i));
    dist_ = build_row_distribution(A_);
  }

  const DenseMatrix& A() const noexcept { return A_; }
  const RealVector& b() const noexcept { return b_; }
  std::size_t rows() const noexcept { return A_.rows(); }
  std::size_t cols() const noexcept { return A_.cols(); }
  double row_norm(std::size_t i) const noexcept { return row_norms_[i]; }
  const RealVector& row_norms() const noexcept { return row_norms_; }
  const RowDistribution& distribution() const noexcept { return dist_; }

  /// |b[i] − ⟨a_i, x⟩| / ‖a_i‖, the step length if row i were projected onto.
  double exact_score(std::size_t i, std::span<const double> x) const {
    return std::abs(b_[i] - dot(A_.row(i), x)) / row_norms_[i];
  }

private:
  DenseMatrix A_;
  RealVector b_;
  RealVector row_norms_;
  RowDistribution dist_;
};

}  // namespace rkjl
