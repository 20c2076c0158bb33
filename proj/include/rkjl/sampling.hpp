#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rkjl/linalg.hpp"
#include "rkjl/random.hpp"

namespace rkjl {

/// Discrete distribution over row indices proportional to squared row norms.
///
/// Row i owns the half-open interval (cumulative[i-1], cumulative[i]] of
/// (0, total]. A draw landing exactly on a cut point therefore resolves to the
/// lower index. Zero rows own an empty interval and are never drawn.
class RowDistribution {
public:
  RowDistribution() = default;

  /// Arbitrary nonnegative weights; at least one must be positive.
  static RowDistribution from_weights(std::span<const double> weights) {
    RowDistribution d;
    d.cumulative_.resize(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
        throw ParameterError("RowDistribution: weights must be finite and nonnegative");
      }
      acc += weights[i];
      d.cumulative_[i] = acc;
      if (weights[i] > 0.0) ++d.support_;
    }
    if (!(acc > 0.0)) throw DegenerateMatrixError("RowDistribution: all weights are zero");
    d.weights_.assign(weights.begin(), weights.end());
    return d;
  }

  std::size_t size() const noexcept { return cumulative_.size(); }
  double total() const noexcept { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  /// Number of rows with positive weight.
  std::size_t support() const noexcept { return support_; }
  double weight(std::size_t i) const noexcept { return weights_[i]; }
  double probability(std::size_t i) const noexcept { return weights_[i] / total(); }
  std::span<const double> cumulative() const noexcept { return cumulative_; }

  /// Maps a point u in (0, total] to its row. Exposed for tie-rule tests.
  std::size_t index_at(double u) const noexcept {
    auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

  std::size_t sample(Rng& rng) const noexcept {
    // 1 - uniform() lies in (0, 1], keeping u off the empty intervals of
    // leading zero-weight rows.
    const double u = (1.0 - rng.uniform()) * total();
    return index_at(u);
  }

private:
  std::vector<double> cumulative_;
  std::vector<double> weights_;
  std::size_t support_ = 0;
};

inline RowDistribution build_row_distribution(const DenseMatrix& A) {
  std::vector<double> w(A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i) w[i] = dot(A.row(i), A.row(i));
  return RowDistribution::from_weights(w);
}

inline std::size_t sample_row(const RowDistribution& dist, Rng& rng) { return dist.sample(rng); }

/// Draws `count` distinct rows by successive weighted sampling, rejecting
/// repeats. With equal weights every size-`count` subset is equally likely.
/// `seen` is caller-provided scratch of length dist.size(), all false on
/// entry and restored to all false on exit.
inline void sample_rows_without_replacement(const RowDistribution& dist, Rng& rng, std::size_t count,
                                            std::vector<std::size_t>& out, std::vector<char>& seen) {
  if (count > dist.support()) {
    throw ParameterError("sample_rows_without_replacement: " + std::to_string(count) +
                         " distinct rows requested but only " + std::to_string(dist.support()) +
                         " have positive weight");
  }
  seen.resize(dist.size(), 0);
  out.clear();
  while (out.size() < count) {
    const std::size_t i = dist.sample(rng);
    if (seen[i]) continue;
    seen[i] = 1;
    out.push_back(i);
  }
  for (std::size_t i : out) seen[i] = 0;
}

}  // namespace rkjl
