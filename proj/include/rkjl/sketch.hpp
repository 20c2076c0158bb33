#pragma once

// Gaussian Johnson–Lindenstrauss sketching of the rows of A.
//
// Φ is d×n with i.i.d. N(0, 1/d) entries, so E‖Φx‖² = ‖x‖² and sketched inner
// products ⟨Φa, Φx⟩ estimate ⟨a, x⟩ without rescaling.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "rkjl/linalg.hpp"
#include "rkjl/random.hpp"
#include "rkjl/system.hpp"

namespace rkjl {

inline constexpr double kGaussianJlConstant = 8.0;

/// Smallest d with d ≥ C·ln|S|/δ².
inline std::size_t jl_dimension(double delta, std::size_t set_size, double constant_c = kGaussianJlConstant) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("jl_dimension: delta must lie in (0, 1)");
  if (set_size < 2) throw ParameterError("jl_dimension: set size must be >= 2");
  if (!(constant_c > 0.0)) throw ParameterError("jl_dimension: C must be positive");
  const double bound = constant_c * std::log(static_cast<double>(set_size)) / (delta * delta);
  // Guard against a bound that is integral in exact arithmetic but rounds up.
  const double rounded = std::round(bound);
  if (std::abs(bound - rounded) <= 1e-12 * bound) return static_cast<std::size_t>(rounded);
  return static_cast<std::size_t>(std::ceil(bound));
}

class GaussianSketch {
public:
  GaussianSketch() = default;
  explicit GaussianSketch(DenseMatrix phi) : phi_(std::move(phi)) {
    if (phi_.rows() == 0 || phi_.cols() == 0) throw ParameterError("GaussianSketch: empty matrix");
  }

  std::size_t target_dim() const noexcept { return phi_.rows(); }
  std::size_t source_dim() const noexcept { return phi_.cols(); }
  const DenseMatrix& matrix() const noexcept { return phi_; }

private:
  DenseMatrix phi_;
};

inline GaussianSketch build_sketch(Rng& rng, std::size_t n, std::size_t d) {
  if (n == 0 || d == 0) throw ParameterError("build_sketch: n and d must be >= 1");
  const double stddev = 1.0 / std::sqrt(static_cast<double>(d));
  DenseMatrix phi(d, n);
  for (double& e : phi.data()) e = stddev * rng.normal();
  return GaussianSketch(std::move(phi));
}

/// Φ = I (d = n): exact geometry, the δ = 0 limit. Test and oracle hook.
inline GaussianSketch identity_sketch(std::size_t n) { return GaussianSketch(DenseMatrix::identity(n)); }

inline void apply_sketch_into(const GaussianSketch& sketch, std::span<const double> x, std::span<double> out) {
  if (x.size() != sketch.source_dim() || out.size() != sketch.target_dim()) {
    throw DimensionError("apply_sketch: dimension mismatch");
  }
  const DenseMatrix& phi = sketch.matrix();
  for (std::size_t r = 0; r < phi.rows(); ++r) out[r] = dot(phi.row(r), x);
}

inline RealVector apply_sketch(const GaussianSketch& sketch, std::span<const double> x) {
  RealVector out(sketch.target_dim());
  apply_sketch_into(sketch, x, out);
  return out;
}

/// Φx_{k+1} = Φx_k + coeff·Φa_j, in place. O(d).
inline void update_sketched_iterate(std::span<double> state, std::span<const double> sketched_row, double coeff) {
  if (state.size() != sketched_row.size()) throw DimensionError("update_sketched_iterate: length mismatch");
  axpy(coeff, sketched_row, state);
}

/// The RKJL working set: the system plus αᵢ = Φaᵢ and ‖αᵢ‖ for every row.
class SketchedSystem {
public:
  SketchedSystem() = default;

  SketchedSystem(LinearSystem system, GaussianSketch sketch)
      : system_(std::move(system)), sketch_(std::move(sketch)) {
    if (sketch_.source_dim() != system_.cols()) {
      throw DimensionError("precompute_rows: sketch source dimension " + std::to_string(sketch_.source_dim()) +
                           " != cols(A) " + std::to_string(system_.cols()));
    }
    const std::size_t m = system_.rows();
    const std::size_t d = sketch_.target_dim();
    sketched_rows_ = DenseMatrix(m, d);
    sketched_norms_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      apply_sketch_into(sketch_, system_.A().row(i), sketched_rows_.row(i));
      sketched_norms_[i] = norm2(sketched_rows_.row(i));
    }
  }

  const LinearSystem& system() const noexcept { return system_; }
  const GaussianSketch& sketch() const noexcept { return sketch_; }
  const DenseMatrix& sketched_rows() const noexcept { return sketched_rows_; }
  double sketched_norm(std::size_t i) const noexcept { return sketched_norms_[i]; }
  const RealVector& sketched_norms() const noexcept { return sketched_norms_; }

  /// |b[i] − ⟨αᵢ, Φx⟩| / ‖αᵢ‖. A row whose sketch vanished scores 0.
  double sketched_score(std::size_t i, std::span<const double> sketched_x) const {
    const double nrm = sketched_norms_[i];
    if (nrm == 0.0) return 0.0;
    return std::abs(system_.b()[i] - dot(sketched_rows_.row(i), sketched_x)) / nrm;
  }

private:
  LinearSystem system_;
  GaussianSketch sketch_;
  DenseMatrix sketched_rows_;
  RealVector sketched_norms_;
};

inline SketchedSystem precompute_rows(const DenseMatrix& A, const RealVector& b, const GaussianSketch& sketch) {
  return SketchedSystem(LinearSystem(A, b), sketch);
}

inline SketchedSystem precompute_rows(LinearSystem system, GaussianSketch sketch) {
  return SketchedSystem(std::move(system), std::move(sketch));
}

struct DistortionReport {
  /// |⟨Φa, Φx⟩ − ⟨a, x⟩| per pair, in input order.
  std::vector<double> errors;
  /// Fraction of pairs whose error exceeds 2δ.
  double fraction_exceeding = 0.0;
};

struct VectorPair {
  RealVector a;
  RealVector x;
};

inline DistortionReport distortion_report(const GaussianSketch& sketch, std::span<const VectorPair> pairs,
                                          double delta) {
  DistortionReport rep;
  rep.errors.reserve(pairs.size());
  std::size_t exceeding = 0;
  for (const auto& p : pairs) {
    const RealVector pa = apply_sketch(sketch, p.a);
    const RealVector px = apply_sketch(sketch, p.x);
    const double err = std::abs(dot(pa, px) - dot(p.a, p.x));
    rep.errors.push_back(err);
    if (err > 2.0 * delta) ++exceeding;
  }
  rep.fraction_exceeding = pairs.empty() ? 0.0 : static_cast<double>(exceeding) / static_cast<double>(pairs.size());
  return rep;
}

}  // namespace rkjl
