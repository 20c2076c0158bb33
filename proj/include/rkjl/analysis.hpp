#pragma once

// Closed-form convergence quantities for randomized Kaczmarz and its
// best-of-n variant: the scaled condition number R, the expected error
// curves, the noise floor, and the candidate-rank probabilities p_j.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "rkjl/linalg.hpp"
#include "rkjl/sketch.hpp"

namespace rkjl {

struct BoundReport {
  double R = 0.0;
  double frobenius_sq = 0.0;
  double sigma_min = 0.0;
  /// (k, bound) pairs, filled by rk_bound_curve on request.
  std::vector<std::pair<std::size_t, double>> curve;
  std::size_t jl_dimension = 0;
};

/// R = ‖A⁻¹‖²‖A‖_F² = ‖A‖_F² / σ_min(A)².
inline BoundReport compute_R(const DenseMatrix& A) {
  BoundReport rep;
  rep.frobenius_sq = frobenius_sq(A);
  rep.sigma_min = sigma_min(A);
  rep.R = rep.frobenius_sq / (rep.sigma_min * rep.sigma_min);
  return rep;
}

/// (1 − 1/R)^k · e₀ for k = 0..k_max.
inline std::vector<std::pair<std::size_t, double>> rk_bound_curve(double R, double initial_error_sq,
                                                                  std::size_t k_max) {
  if (!(R > 1.0)) throw ParameterError("rk_bound_curve: R must exceed 1");
  if (!(initial_error_sq >= 0.0)) throw ParameterError("rk_bound_curve: initial error must be nonnegative");
  std::vector<std::pair<std::size_t, double>> curve;
  curve.reserve(k_max + 1);
  const double rate = 1.0 - 1.0 / R;
  for (std::size_t k = 0; k <= k_max; ++k) {
    curve.emplace_back(k, std::pow(rate, static_cast<double>(k)) * initial_error_sq);
  }
  return curve;
}

/// Expected-error bound under additive noise:
/// (1 − 1/R)^{k/2}·‖x₀ − x‖ + √R·γ.
inline double noisy_rk_bound(double R, double initial_norm, std::size_t k, double gamma) {
  if (!(R > 1.0)) throw ParameterError("noisy_rk_bound: R must exceed 1");
  if (!(gamma >= 0.0)) throw ParameterError("noisy_rk_bound: gamma must be nonnegative");
  if (!(initial_norm >= 0.0)) throw ParameterError("noisy_rk_bound: initial norm must be nonnegative");
  return std::pow(1.0 - 1.0 / R, 0.5 * static_cast<double>(k)) * initial_norm + std::sqrt(R) * gamma;
}

/// The noise floor √R·γ.
inline double noise_floor(double R, double gamma) { return std::sqrt(R) * gamma; }

/// γ = max_i |w[i]| / ‖a_i‖.
inline double gamma_of_noise(const DenseMatrix& A, std::span<const double> w) {
  if (w.size() != A.rows()) throw DimensionError("gamma_of_noise: noise length does not match rows(A)");
  double g = 0.0;
  for (std::size_t i = 0; i < A.rows(); ++i) {
    if (w[i] == 0.0) continue;
    const double nrm = norm2(A.row(i));
    if (nrm == 0.0) throw ParameterError("gamma_of_noise: zero row " + std::to_string(i) + " carries nonzero noise");
    g = std::max(g, std::abs(w[i]) / nrm);
  }
  return g;
}

/// p_j = C(m−j, n−1)/C(m, n): probability that row j is the best-ranked row
/// present in a uniformly random size-n subset of m ranked rows.
struct PVector {
  std::size_t m = 0;
  std::size_t n = 0;
  /// p[0] is p_1.
  RealVector p;
};

/// Ratio recurrence p_{j+1} = p_j·(m−j−n+1)/(m−j) from p_1 = n/m; no factorials.
inline PVector p_vector(std::size_t m, std::size_t n) {
  if (n < 1 || n > m) throw ParameterError("p_vector: need 1 <= n <= m");
  PVector pv{m, n, RealVector(m, 0.0)};
  const std::size_t last = m - n + 1;  // p_j = 0 beyond this (1-based)
  double pj = static_cast<double>(n) / static_cast<double>(m);
  for (std::size_t j = 1; j <= last; ++j) {
    pv.p[j - 1] = pj;
    if (j < m) {
      pj *= static_cast<double>(m - j - n + 1) / static_cast<double>(m - j);
    }
  }
  return pv;
}

inline void require_sorted_desc(std::span<const double> v, const char* who) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1]) throw ContractError(std::string(who) + ": gains must be sorted nonincreasing");
  }
}

/// β = Σ_j (p_j − 1/m)·g_j for gains g sorted nonincreasing. Nonnegative,
/// and zero exactly when all gains are equal.
inline double beta_improvement(std::span<const double> gains_sorted_desc, const PVector& p) {
  require_sorted_desc(gains_sorted_desc, "beta_improvement");
  if (gains_sorted_desc.size() != p.m) throw DimensionError("beta_improvement: gains length must equal m");
  const double inv_m = 1.0 / static_cast<double>(p.m);
  double beta = 0.0;
  for (std::size_t j = 0; j < p.m; ++j) beta += (p.p[j] - inv_m) * gains_sorted_desc[j];
  // Rounding can leave a tiny negative value for constant gains.
  return std::max(beta, 0.0);
}

/// Single-step bound for the best-of-n step against plain RK at a fixed x_k:
/// min[E‖x*_{k+1} − x‖² − β + 2δ, E‖x*_{k+1} − x‖²].
///
/// `gains_sorted_desc` holds, per row, the squared step length
/// ‖x_{k+1} − x_k‖² that projecting onto that row would produce (for unit rows
/// and b = 0 this is ⟨a_j, x_k⟩²). `rk_expected_error_sq` is E‖x*_{k+1} − x‖².
inline double theorem1_bound(std::span<const double> gains_sorted_desc, const PVector& p, double delta,
                             double rk_expected_error_sq) {
  if (!(delta >= 0.0)) throw ParameterError("theorem1_bound: delta must be nonnegative");
  const double beta = beta_improvement(gains_sorted_desc, p);
  return std::min(rk_expected_error_sq - beta + 2.0 * delta, rk_expected_error_sq);
}

/// δ = 0 form of theorem1_bound.
inline double exact_selection_bound(std::span<const double> gains_sorted_desc, const PVector& p,
                                   double rk_expected_error_sq) {
  return rk_expected_error_sq - beta_improvement(gains_sorted_desc, p);
}

}  // namespace rkjl
