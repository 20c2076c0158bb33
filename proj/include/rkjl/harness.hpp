#pragma once

// Problem generation and paired-trial experiments.
//
// Trial t of an experiment draws its problem and x₀ from Rng(spec.seed, t)
// and its solver randomness from derive_seed(solver.seed, t); every method or
// sketch dimension in the experiment sees the same three for that trial.
// Trials may run on several threads; results are stored by trial index, so
// the outcome does not depend on scheduling.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "rkjl/analysis.hpp"
#include "rkjl/experiment.hpp"
#include "rkjl/random.hpp"
#include "rkjl/sketch.hpp"
#include "rkjl/solvers.hpp"

namespace rkjl {

struct Problem {
  DenseMatrix A;
  RealVector b;
  RealVector true_x;
  /// Additive noise w (zeros unless noisy).
  RealVector noise;
  double gamma = 0.0;
};

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  Rng r(base, index);
  return r.next_u64();
}

inline void validate(const ProblemSpec& spec) {
  if (spec.n < 1) throw ParameterError("problem: n must be >= 1");
  if (spec.m < spec.n) throw ParameterError("problem: need m >= n");
  if (!(spec.noise_scale >= 0.0) || !std::isfinite(spec.noise_scale)) {
    throw ParameterError("problem: noise scale must be finite and nonnegative");
  }
}

inline Problem generate_problem(const ProblemSpec& spec, Rng& rng) {
  validate(spec);
  Problem p;
  p.A = DenseMatrix(spec.m, spec.n);
  for (double& e : p.A.data()) {
    e = spec.model == EntryModel::bernoulli ? ((rng.next_u64() >> 63) ? 1.0 : -1.0) : rng.normal();
  }
  if (spec.normalize_rows) {
    for (std::size_t i = 0; i < spec.m; ++i) {
      auto row = p.A.row(i);
      const double nrm = norm2(row);
      if (nrm > 0.0)
        for (double& e : row) e /= nrm;
    }
  }
  p.noise.assign(spec.m, 0.0);
  if (spec.mode == Consistency::homogeneous) {
    p.true_x.assign(spec.n, 0.0);
    p.b.assign(spec.m, 0.0);
    return p;
  }
  p.true_x = gaussian_vector(rng, spec.n, 1.0);
  p.b = matvec(p.A, p.true_x);
  if (spec.mode == Consistency::noisy) {
    for (std::size_t i = 0; i < spec.m; ++i) {
      const double u = 2.0 * rng.uniform() - 1.0;
      p.noise[i] = spec.noise_scale * norm2(p.A.row(i)) * u;
      p.b[i] += p.noise[i];
    }
    p.gamma = gamma_of_noise(p.A, p.noise);
  }
  return p;
}

inline Problem generate_problem(const ProblemSpec& spec) {
  Rng rng(spec.seed);
  return generate_problem(spec, rng);
}

struct ExperimentConfig {
  /// method is overridden per group; seed is the base for per-trial seeds.
  SolverConfig solver;
  std::size_t trials = 1;
  std::size_t jobs = 1;
  /// Sketch dimension for rkjl in comparisons; 0 means default_sketch_dim(n).
  std::size_t sketch_dim = 0;
  /// Use Φ = I instead of a Gaussian sketch (requires d = n).
  bool identity_sketch = false;
  /// Error level for iterations_to_threshold.
  double threshold = 1e-3;
};

/// jl_dimension(0.3, 10·n², 8) capped at n.
inline std::size_t default_sketch_dim(std::size_t n) {
  const std::size_t set_size = std::max<std::size_t>(2, 10 * n * n);
  return std::min(n, jl_dimension(0.3, set_size, kGaussianJlConstant));
}

/// One entry of an experiment: which solver, and for rkjl which d.
struct RunPlan {
  std::string label;
  Method method = Method::rk;
  std::size_t sketch_dim = 0;
};

struct TrialInputs {
  Problem problem;
  RealVector x0;
  std::uint64_t solver_seed = 0;
};

inline TrialInputs make_trial(const ProblemSpec& spec, const ExperimentConfig& cfg, std::size_t trial) {
  Rng rng(spec.seed, trial);
  TrialInputs in;
  in.problem = generate_problem(spec, rng);
  in.x0 = sphere_uniform(rng, spec.n);
  in.solver_seed = derive_seed(cfg.solver.seed, trial);
  return in;
}

namespace detail {

inline constexpr std::uint64_t kSketchStream = 0x5C37C4;

template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

inline TrialRun run_one(const TrialInputs& in, const LinearSystem& sys, const RunPlan& plan,
                        const ExperimentConfig& cfg, std::size_t trial) {
  TrialRun run;
  run.trial = trial;
  SolverConfig sc = cfg.solver;
  sc.method = plan.method;
  sc.seed = in.solver_seed;
  try {
    if (plan.method == Method::rkjl) {
      const auto t0 = std::chrono::steady_clock::now();
      GaussianSketch sketch;
      if (cfg.identity_sketch) {
        if (plan.sketch_dim != sys.cols()) throw ParameterError("identity sketch requires d = n");
        sketch = identity_sketch(sys.cols());
      } else {
        Rng srng(derive_seed(cfg.solver.seed, trial), kSketchStream + plan.sketch_dim);
        sketch = build_sketch(srng, sys.cols(), plan.sketch_dim);
      }
      SketchedSystem ss(sys, std::move(sketch));
      if (sc.record_timing) {
        run.preprocess_ns =
            std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
      }
      run.trace = solve(ss, sc, in.x0, in.problem.true_x);
    } else {
      run.trace = solve(sys, sc, in.x0, in.problem.true_x);
    }
  } catch (const std::exception& e) {
    run.failure = e.what();
    run.trace = SolveTrace{};
  }
  return run;
}

inline void finish_groups(ExperimentResult& result, const ExperimentConfig& cfg) {
  for (auto& g : result.groups) {
    summarize(g);
    g.iterations_to_threshold = iterations_to_threshold(g, cfg.threshold, cfg.solver.max_iterations);
    for (const auto& t : g.trials) {
      g.preprocess_ns += t.preprocess_ns;
      g.phases.sample_ns += t.trace.phases.sample_ns;
      g.phases.sketch_ns += t.trace.phases.sketch_ns;
      g.phases.score_ns += t.trace.phases.score_ns;
      g.phases.test_ns += t.trace.phases.test_ns;
      g.phases.project_ns += t.trace.phases.project_ns;
    }
  }
}

/// Runs every plan on every trial. `per_trial` sees each trial's inputs and
/// system once, after its runs, and may record extra per-trial data.
inline ExperimentResult run_plans(const ProblemSpec& spec, const std::vector<RunPlan>& plans,
                                  const ExperimentConfig& cfg,
                                  const std::function<void(std::size_t, const TrialInputs&, const LinearSystem&)>&
                                      per_trial = {}) {
  validate(spec);
  if (plans.empty()) throw ParameterError("experiment: at least one method is required");
  if (cfg.trials < 1) throw ParameterError("experiment: at least one trial is required");
  ExperimentResult result;
  result.spec = spec;
  for (const auto& p : plans) {
    RunGroup g;
    g.label = p.label;
    g.method = p.method;
    g.sketch_dim = p.sketch_dim;
    g.trials.resize(cfg.trials);
    result.groups.push_back(std::move(g));
  }
  parallel_for(cfg.trials, cfg.jobs, [&](std::size_t t) {
    TrialInputs in;
    LinearSystem sys;
    try {
      in = make_trial(spec, cfg, t);
      sys = LinearSystem(in.problem.A, in.problem.b);
    } catch (const std::exception& e) {
      for (auto& g : result.groups) {
        g.trials[t].trial = t;
        g.trials[t].failure = e.what();
      }
      return;
    }
    for (std::size_t gi = 0; gi < plans.size(); ++gi) {
      result.groups[gi].trials[t] = run_one(in, sys, plans[gi], cfg, t);
    }
    if (!per_trial) return;
    try {
      per_trial(t, in, sys);
    } catch (const std::exception& e) {
      for (auto& g : result.groups) {
        g.trials[t].failure = e.what();
        g.trials[t].trace = SolveTrace{};
      }
    }
  });
  finish_groups(result, cfg);
  return result;
}

}  // namespace detail

inline ExperimentResult run_comparison(const ProblemSpec& spec, const std::vector<Method>& methods,
                                       const ExperimentConfig& cfg) {
  std::vector<RunPlan> plans;
  for (Method m : methods) {
    RunPlan p;
    p.method = m;
    p.label = std::string(to_string(m));
    if (m == Method::rkjl) p.sketch_dim = cfg.sketch_dim == 0 ? default_sketch_dim(spec.n) : cfg.sketch_dim;
    plans.push_back(p);
  }
  if (methods.empty()) throw ParameterError("run_comparison: at least one method is required");
  return detail::run_plans(spec, plans, cfg);
}

inline ExperimentResult run_d_sweep(const ProblemSpec& spec, const std::vector<std::size_t>& d_values,
                                    const ExperimentConfig& cfg) {
  if (d_values.empty()) throw ParameterError("run_d_sweep: at least one d is required");
  std::vector<RunPlan> plans;
  for (std::size_t d : d_values) {
    if (d < 1) throw ParameterError("run_d_sweep: every d must be >= 1");
    plans.push_back(RunPlan{"rkjl_d" + std::to_string(d), Method::rkjl, d});
  }
  return detail::run_plans(spec, plans, cfg);
}

/// RK on noisy systems, with the expected-error bound and noise floor
/// attached. Requires Consistency::noisy.
inline ExperimentResult run_noise_experiment(const ProblemSpec& spec, const ExperimentConfig& cfg) {
  if (spec.mode != Consistency::noisy) throw ParameterError("run_noise_experiment: problem must be noisy");
  NoiseSummary noise;
  noise.trials.resize(cfg.trials);
  std::vector<char> have(cfg.trials, 0);
  std::vector<RunPlan> plans{RunPlan{"rk", Method::rk, 0}};
  auto record = [&](std::size_t t, const TrialInputs& in, const LinearSystem& sys) {
    NoiseTrial nt;
    nt.R = compute_R(sys.A()).R;
    nt.gamma = in.problem.gamma;
    nt.initial_error = std::sqrt(distance_sq(in.x0, in.problem.true_x));
    nt.floor = noise_floor(nt.R, nt.gamma);
    noise.trials[t] = nt;
    have[t] = 1;
  };
  ExperimentResult result = detail::run_plans(spec, plans, cfg, record);
  std::size_t counted = 0;
  const std::size_t kmax = cfg.solver.max_iterations;
  noise.bound_curve.assign(kmax + 1, 0.0);
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    if (!have[t]) continue;
    ++counted;
    const auto& nt = noise.trials[t];
    noise.mean_floor += nt.floor;
    for (std::size_t k = 0; k <= kmax; ++k) {
      noise.bound_curve[k] += noisy_rk_bound(nt.R, nt.initial_error, k, nt.gamma);
    }
  }
  if (counted > 0) {
    noise.mean_floor /= static_cast<double>(counted);
    for (double& v : noise.bound_curve) v /= static_cast<double>(counted);
  }
  result.noise = std::move(noise);
  return result;
}

/// Mean select-phase (Φx_k recomputation plus candidate scoring) nanoseconds
/// per RKJL iteration for each d, on an m×n Gaussian system with Φx_k
/// recomputed every iteration. Each d is measured `repeats` times,
/// interleaved, and the fastest repeat is kept.
inline std::vector<double> measure_select_cost(std::size_t m, std::size_t n, const std::vector<std::size_t>& d_values,
                                               std::size_t iterations, std::size_t repeats, std::uint64_t seed) {
  ProblemSpec spec;
  spec.m = m;
  spec.n = n;
  spec.model = EntryModel::gaussian;
  spec.normalize_rows = true;
  spec.mode = Consistency::planted;
  spec.seed = seed;
  Rng rng(seed);
  Problem p = generate_problem(spec, rng);
  const RealVector x0 = sphere_uniform(rng, n);
  LinearSystem sys(p.A, p.b);
  std::vector<SketchedSystem> systems;
  for (std::size_t d : d_values) {
    Rng srng(seed, detail::kSketchStream + d);
    systems.emplace_back(sys, build_sketch(srng, n, d));
  }
  SolverConfig sc;
  sc.method = Method::rkjl;
  sc.max_iterations = iterations;
  sc.refresh_period = 1;
  sc.record_timing = true;
  sc.seed = seed;
  std::vector<double> best(d_values.size(), std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < repeats; ++r) {
    for (std::size_t i = 0; i < d_values.size(); ++i) {
      const SolveTrace tr = solve(systems[i], sc, x0);
      const double per = static_cast<double>(tr.phases.select_ns()) / static_cast<double>(tr.iterations());
      best[i] = std::min(best[i], per);
    }
  }
  return best;
}

}  // namespace rkjl
