#pragma once

// Row-action solvers for overdetermined consistent systems Ax = b:
//
//   cyclic  row (k mod m) at iteration k
//   rk      one row drawn with probability ‖a_i‖²/‖A‖_F²
//   rkjl    s rows drawn as in rk, the one with the largest sketched score
//           |b[i] − ⟨αᵢ, Φx_k⟩|/‖αᵢ‖ is kept, then checked exactly against
//           the first drawn row (Test step) before projecting
//   oracle  as rkjl but with exact scores; the δ → 0 limit
//
// All four share project_onto_row and the stopping/trace contract of solve().

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rkjl/linalg.hpp"
#include "rkjl/random.hpp"
#include "rkjl/sampling.hpp"
#include "rkjl/sketch.hpp"
#include "rkjl/system.hpp"

namespace rkjl {

enum class Method { cyclic, rk, rkjl, oracle };
enum class Replacement { with, without };
enum class SolveStatus { converged, budget_exhausted };

inline constexpr std::size_t kNoRow = std::numeric_limits<std::size_t>::max();

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::cyclic: return "cyclic";
    case Method::rk: return "rk";
    case Method::rkjl: return "rkjl";
    case Method::oracle: return "oracle";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "cyclic") return Method::cyclic;
  if (s == "rk") return Method::rk;
  if (s == "rkjl") return Method::rkjl;
  if (s == "oracle") return Method::oracle;
  throw ParameterError("unknown method '" + std::string(s) + "' (expected cyclic, rk, rkjl or oracle)");
}

inline std::string_view to_string(SolveStatus s) {
  return s == SolveStatus::converged ? "converged" : "budget_exhausted";
}

struct SolverConfig {
  Method method = Method::rk;
  std::size_t max_iterations = 1000;
  /// Stop once ‖x_k − x‖ (or ‖Ax_k − b‖ without a known solution) is at or below this.
  double error_tolerance = 0.0;
  /// Candidate rows per rkjl/oracle step; 0 means n.
  std::size_t candidates = 0;
  std::uint64_t seed = 0;
  Replacement replacement = Replacement::with;
  bool test_step = true;
  /// Φx_k is recomputed from scratch every this many iterations and updated
  /// incrementally in between; 0 means n, 1 recomputes every iteration.
  std::size_t refresh_period = 0;
  /// How often the full residual is evaluated when no true solution is given; 0 means n.
  std::size_t residual_check_period = 0;
  bool record_timing = false;
};

struct IterateState {
  RealVector x;
  /// Φx_k, rkjl only.
  RealVector sketched_x;
  std::size_t k = 0;
  std::size_t last_row = kNoRow;
  std::size_t since_refresh = 0;
};

struct StepInfo {
  std::size_t row = kNoRow;
  /// |b[j] − ⟨a_j, x_k⟩| before the projection.
  double residual = 0.0;
  bool skipped = false;
};

/// Cumulative nanoseconds per rkjl phase. The select phase is the sketch
/// refresh plus candidate scoring.
struct PhaseTimes {
  std::int64_t sample_ns = 0;
  std::int64_t sketch_ns = 0;
  std::int64_t score_ns = 0;
  std::int64_t test_ns = 0;
  std::int64_t project_ns = 0;

  std::int64_t select_ns() const noexcept { return sketch_ns + score_ns; }
};

/// Reusable per-solve scratch for candidate sampling.
struct StepWorkspace {
  std::vector<std::size_t> candidates;
  std::vector<char> seen;
  PhaseTimes* phases = nullptr;
};

/// Projects x in place onto {y : ⟨a, y⟩ = b_j}; returns the coefficient
/// (b_j − ⟨a, x⟩)/‖a‖² applied to a.
inline double project_in_place(std::span<double> x, std::span<const double> a, double b_j, double row_norm_sq) {
  if (!(row_norm_sq > 0.0)) throw ProjectionError("project_onto_row: zero row, projection undefined");
  if (x.size() != a.size()) throw DimensionError("project_onto_row: dimension mismatch");
  const double coeff = (b_j - dot(a, x)) / row_norm_sq;
  axpy(coeff, a, x);
  return coeff;
}

inline RealVector project_onto_row(const RealVector& x_k, std::span<const double> a_j, double b_j,
                                   double row_norm_sq) {
  RealVector next = x_k;
  project_in_place(next, a_j, b_j, row_norm_sq);
  return next;
}

/// ‖x_k − x_{k+1}‖² − (‖x − x_k‖² − ‖x − x_{k+1}‖²); zero for an orthogonal
/// projection on a consistent system.
inline double pythagorean_residual(std::span<const double> x_k, std::span<const double> x_k1,
                                   std::span<const double> true_x) {
  return distance_sq(x_k, x_k1) - (distance_sq(true_x, x_k) - distance_sq(true_x, x_k1));
}

namespace detail {

class ScopedTimer {
public:
  explicit ScopedTimer(std::int64_t* sink) : sink_(sink) {
    if (sink_) start_ = std::chrono::steady_clock::now();
  }
  ~ScopedTimer() {
    if (sink_) {
      *sink_ += std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start_)
                    .count();
    }
  }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

private:
  std::int64_t* sink_;
  std::chrono::steady_clock::time_point start_;
};

inline std::int64_t* phase(StepWorkspace& ws, std::int64_t PhaseTimes::*field) {
  return ws.phases ? &(ws.phases->*field) : nullptr;
}

inline std::size_t effective_candidates(const SolverConfig& cfg, std::size_t n) {
  return cfg.candidates == 0 ? n : cfg.candidates;
}

inline void draw_candidates(const LinearSystem& sys, const SolverConfig& cfg, Rng& rng, StepWorkspace& ws) {
  const std::size_t s = effective_candidates(cfg, sys.cols());
  if (cfg.replacement == Replacement::without) {
    sample_rows_without_replacement(sys.distribution(), rng, s, ws.candidates, ws.seen);
    return;
  }
  ws.candidates.resize(s);
  for (auto& c : ws.candidates) c = sys.distribution().sample(rng);
}

/// Projects state.x onto row j and fills the step record.
inline StepInfo project_row(IterateState& state, const LinearSystem& sys, std::size_t j) {
  StepInfo info;
  info.row = j;
  const double nrm = sys.row_norm(j);
  const double r = sys.b()[j] - dot(sys.A().row(j), state.x);
  info.residual = std::abs(r);
  if (nrm == 0.0) {
    info.skipped = true;
  } else {
    axpy(r / (nrm * nrm), sys.A().row(j), state.x);
  }
  state.last_row = j;
  ++state.k;
  return info;
}

}  // namespace detail

inline StepInfo step_cyclic(IterateState& state, const LinearSystem& sys) {
  // Zero rows are skipped and flagged in the trace.
  return detail::project_row(state, sys, state.k % sys.rows());
}

inline StepInfo step_rk(IterateState& state, const LinearSystem& sys, Rng& rng) {
  return detail::project_row(state, sys, sys.distribution().sample(rng));
}

/// Best-of-s greedy step with exact scores. Ties go to the earliest candidate.
inline StepInfo step_oracle(IterateState& state, const LinearSystem& sys, const SolverConfig& cfg, Rng& rng,
                            StepWorkspace& ws) {
  detail::draw_candidates(sys, cfg, rng, ws);
  std::size_t best = ws.candidates.front();
  double best_score = -1.0;
  for (std::size_t c : ws.candidates) {
    const double g = sys.exact_score(c, state.x);
    if (g > best_score) {
      best_score = g;
      best = c;
    }
  }
  return detail::project_row(state, sys, best);
}

/// Sets Φx_0 from scratch; call once before the first rkjl step.
inline void init_sketched_iterate(IterateState& state, const SketchedSystem& ss) {
  state.sketched_x = apply_sketch(ss.sketch(), state.x);
  state.since_refresh = 0;
}

inline StepInfo step_rkjl(IterateState& state, const SketchedSystem& ss, const SolverConfig& cfg, Rng& rng,
                          StepWorkspace& ws) {
  const LinearSystem& sys = ss.system();
  {
    detail::ScopedTimer t(detail::phase(ws, &PhaseTimes::sample_ns));
    detail::draw_candidates(sys, cfg, rng, ws);
  }
  {
    detail::ScopedTimer t(detail::phase(ws, &PhaseTimes::sketch_ns));
    const std::size_t period = cfg.refresh_period == 0 ? sys.cols() : cfg.refresh_period;
    if (state.sketched_x.size() != ss.sketch().target_dim() || state.since_refresh >= period) {
      init_sketched_iterate(state, ss);
    }
  }
  std::size_t j = ws.candidates.front();
  {
    detail::ScopedTimer t(detail::phase(ws, &PhaseTimes::score_ns));
    double best = -1.0;
    for (std::size_t c : ws.candidates) {
      const double g = ss.sketched_score(c, state.sketched_x);
      if (g > best) {
        best = g;
        j = c;
      }
    }
  }
  if (cfg.test_step) {
    detail::ScopedTimer t(detail::phase(ws, &PhaseTimes::test_ns));
    const std::size_t l = ws.candidates.front();
    if (sys.exact_score(l, state.x) > sys.exact_score(j, state.x)) j = l;
  }
  detail::ScopedTimer t(detail::phase(ws, &PhaseTimes::project_ns));
  StepInfo info;
  info.row = j;
  const double nrm = sys.row_norm(j);
  const double r = sys.b()[j] - dot(sys.A().row(j), state.x);
  info.residual = std::abs(r);
  const double coeff = r / (nrm * nrm);
  axpy(coeff, sys.A().row(j), state.x);
  update_sketched_iterate(state.sketched_x, ss.sketched_rows().row(j), coeff);
  ++state.since_refresh;
  state.last_row = j;
  ++state.k;
  return info;
}

struct TraceRecord {
  std::size_t k = 0;
  std::size_t row = kNoRow;
  /// ‖x_k − x‖, NaN when no true solution was supplied.
  double error = std::numeric_limits<double>::quiet_NaN();
  /// |b[j] − ⟨a_j, x_{k−1}⟩| for the row projected onto at this step; NaN at k = 0.
  double residual = std::numeric_limits<double>::quiet_NaN();
  std::int64_t elapsed_ns = 0;
  bool skipped = false;
};

struct SolveTrace {
  std::vector<TraceRecord> records;
  SolveStatus status = SolveStatus::budget_exhausted;
  RealVector final_x;
  PhaseTimes phases;

  std::size_t iterations() const noexcept { return records.empty() ? 0 : records.back().k; }
};

/// Called after every step with the iterate before and after it.
using StepObserver =
    std::function<void(std::size_t k, std::span<const double> before, std::span<const double> after,
                       const StepInfo& info)>;

inline void validate(const SolverConfig& cfg, const LinearSystem& sys) {
  if (cfg.max_iterations < 1) throw ParameterError("solver: max_iterations must be >= 1");
  if (!(cfg.error_tolerance >= 0.0)) throw ParameterError("solver: error_tolerance must be nonnegative");
  const std::size_t s = detail::effective_candidates(cfg, sys.cols());
  if (s < 1) throw ParameterError("solver: candidate set size must be >= 1");
  if (cfg.replacement == Replacement::without && s > sys.distribution().support()) {
    throw ParameterError("solver: " + std::to_string(s) + " candidates without replacement but only " +
                         std::to_string(sys.distribution().support()) + " nonzero rows");
  }
}

namespace detail {

inline double residual_norm(const LinearSystem& sys, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < sys.rows(); ++i) {
    const double r = sys.b()[i] - dot(sys.A().row(i), x);
    s += r * r;
  }
  return std::sqrt(s);
}

inline SolveTrace run(const LinearSystem& sys, const SketchedSystem* sketched, const SolverConfig& cfg,
                      const RealVector& x0, const std::optional<RealVector>& true_x, const StepObserver& observer) {
  validate(cfg, sys);
  if (x0.size() != sys.cols()) throw DimensionError("solve: x0 length does not match cols(A)");
  if (true_x && true_x->size() != sys.cols()) throw DimensionError("solve: true_x length does not match cols(A)");
  require_finite(x0, "solve x0");

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed = [&]() -> std::int64_t {
    if (!cfg.record_timing) return 0;
    return std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start).count();
  };

  SolveTrace trace;
  Rng rng(cfg.seed);
  StepWorkspace ws;
  if (cfg.record_timing) ws.phases = &trace.phases;
  IterateState state;
  state.x = x0;
  if (cfg.method == Method::rkjl) init_sketched_iterate(state, *sketched);

  const std::size_t check_period = cfg.residual_check_period == 0 ? sys.cols() : cfg.residual_check_period;
  auto converged = [&](TraceRecord& rec) {
    if (true_x) {
      rec.error = std::sqrt(distance_sq(state.x, *true_x));
      return rec.error <= cfg.error_tolerance;
    }
    if (std::isinf(cfg.error_tolerance)) return true;
    if (state.k % check_period != 0) return false;
    return residual_norm(sys, state.x) <= cfg.error_tolerance;
  };

  TraceRecord rec0;
  rec0.elapsed_ns = elapsed();
  const bool done0 = converged(rec0);
  trace.records.push_back(rec0);
  if (done0) {
    trace.status = SolveStatus::converged;
    trace.final_x = std::move(state.x);
    return trace;
  }

  RealVector before;
  while (state.k < cfg.max_iterations) {
    if (observer) before = state.x;
    StepInfo info;
    switch (cfg.method) {
      case Method::cyclic: info = step_cyclic(state, sys); break;
      case Method::rk: info = step_rk(state, sys, rng); break;
      case Method::oracle: info = step_oracle(state, sys, cfg, rng, ws); break;
      case Method::rkjl: info = step_rkjl(state, *sketched, cfg, rng, ws); break;
    }
    if (observer) observer(state.k, before, state.x, info);
    TraceRecord rec;
    rec.k = state.k;
    rec.row = info.row;
    rec.residual = info.residual;
    rec.skipped = info.skipped;
    const bool done = converged(rec);
    rec.elapsed_ns = elapsed();
    trace.records.push_back(rec);
    if (done) {
      trace.status = SolveStatus::converged;
      break;
    }
  }
  trace.final_x = std::move(state.x);
  return trace;
}

}  // namespace detail

/// Runs cyclic, rk or oracle. rkjl needs the SketchedSystem overload.
inline SolveTrace solve(const LinearSystem& sys, const SolverConfig& cfg, const RealVector& x0,
                        const std::optional<RealVector>& true_x = std::nullopt, const StepObserver& observer = {}) {
  if (cfg.method == Method::rkjl) throw ParameterError("solve: rkjl requires a sketched system");
  return detail::run(sys, nullptr, cfg, x0, true_x, observer);
}

inline SolveTrace solve(const SketchedSystem& ss, const SolverConfig& cfg, const RealVector& x0,
                        const std::optional<RealVector>& true_x = std::nullopt, const StepObserver& observer = {}) {
  return detail::run(ss.system(), &ss, cfg, x0, true_x, observer);
}

}  // namespace rkjl
