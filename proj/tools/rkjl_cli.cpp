// rkjl: command-line front end for the randomized Kaczmarz solvers.
//
// Exit codes: 0 success, 1 runtime or data error, 2 usage error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rkjl/rkjl.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct ProblemFlags {
  std::size_t m = 6000;
  std::size_t n = 100;
  std::string model = "bernoulli";
  std::string mode = "homogeneous";
  bool normalize = false;
  double noise_scale = 0.0;
  std::uint64_t seed = 0;

  rkjl::ProblemSpec spec() const {
    rkjl::ProblemSpec s;
    s.m = m;
    s.n = n;
    s.model = model == "gaussian" ? rkjl::EntryModel::gaussian : rkjl::EntryModel::bernoulli;
    s.mode = mode == "planted" ? rkjl::Consistency::planted
             : mode == "noisy" ? rkjl::Consistency::noisy
                               : rkjl::Consistency::homogeneous;
    s.normalize_rows = normalize;
    s.noise_scale = noise_scale;
    s.seed = seed;
    return s;
  }
};

void add_problem_flags(CLI::App* cmd, ProblemFlags& f, bool required_dims, bool with_mode = true) {
  auto* m = cmd->add_option("--m", f.m, "Number of rows (equations)")->check(CLI::PositiveNumber);
  auto* n = cmd->add_option("--n", f.n, "Number of columns (unknowns)")->check(CLI::PositiveNumber);
  if (required_dims) {
    m->required();
    n->required();
  } else {
    m->capture_default_str();
    n->capture_default_str();
  }
  cmd->add_option("--model", f.model, "Entry model")
      ->check(CLI::IsMember({"bernoulli", "gaussian"}))
      ->capture_default_str();
  if (with_mode) {
    cmd->add_option("--mode", f.mode, "Right-hand side: homogeneous (b=0), planted (b=Ax) or noisy (b=Ax+w)")
        ->check(CLI::IsMember({"homogeneous", "planted", "noisy"}))
        ->capture_default_str();
  }
  cmd->add_flag("--normalize", f.normalize, "Scale every row of A to unit norm");
  cmd->add_option("--seed", f.seed, "Base random seed")->capture_default_str();
}

struct SolverFlags {
  std::size_t max_iters = 0;
  double tolerance = 0.0;
  std::size_t s = 0;
  std::size_t d = 0;
  double delta = 0.3;
  std::string replacement = "with";
  bool no_test_step = false;
  std::size_t refresh_period = 0;
  bool timing = false;

  rkjl::SolverConfig config(std::size_t n) const {
    rkjl::SolverConfig c;
    c.max_iterations = max_iters == 0 ? 10 * n : max_iters;
    c.error_tolerance = tolerance;
    c.candidates = s;
    c.replacement = replacement == "without" ? rkjl::Replacement::without : rkjl::Replacement::with;
    c.test_step = !no_test_step;
    c.refresh_period = refresh_period;
    c.record_timing = timing;
    return c;
  }

  std::size_t sketch_dim(std::size_t n) const {
    if (d != 0) return d;
    return std::min(n, rkjl::jl_dimension(delta, std::max<std::size_t>(2, 10 * n * n)));
  }
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f, bool with_d = true) {
  cmd->add_option("--max-iters", f.max_iters, "Iteration budget (default 10n)");
  cmd->add_option("--tolerance", f.tolerance, "Stop once the error (or residual norm) is at or below this")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--s", f.s, "Candidate rows per rkjl/oracle step (default n)");
  if (with_d) {
    cmd->add_option("--d", f.d, "Sketch dimension for rkjl (default: JL dimension for 10n^2 points, capped at n)");
  }
  cmd->add_option("--delta", f.delta, "JL distortion used for the default sketch dimension")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--replacement", f.replacement, "Candidate sampling with or without replacement")
      ->check(CLI::IsMember({"with", "without"}))
      ->capture_default_str();
  cmd->add_flag("--no-test-step", f.no_test_step, "Disable the exact recheck against the first drawn candidate");
  cmd->add_option("--refresh-period", f.refresh_period,
                  "Recompute the sketched iterate every this many iterations (default n; 1 = every iteration)");
  cmd->add_flag("--timing", f.timing, "Record wall-clock times in elapsed_ns (makes output nondeterministic)");
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string fmt(double v) { return rkjl::format_real(v); }

bool all_trials_failed(const rkjl::ExperimentResult& r) {
  for (const auto& g : r.groups)
    for (const auto& t : g.trials)
      if (t.ok()) return false;
  return true;
}

void report_failures(const rkjl::ExperimentResult& r) {
  for (const auto& g : r.groups)
    for (const auto& t : g.trials)
      if (!t.ok()) std::cerr << "trial " << t.trial << " (" << g.label << ") failed: " << t.failure << "\n";
}

void write_outputs(const rkjl::ExperimentResult& r, const std::string& out, const std::string& summary_out,
                   const std::string& svg, const std::string& title) {
  rkjl::export_traces_csv(r, out);
  if (!summary_out.empty()) rkjl::write_text_file(summary_out, rkjl::summary_csv(r));
  if (!svg.empty()) {
    rkjl::SvgOptions opt;
    opt.title = title;
    rkjl::write_convergence_svg(r, svg, opt);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized Kaczmarz solvers with Johnson-Lindenstrauss candidate selection"};
  app.require_subcommand(1);

  // gen
  ProblemFlags gen_p;
  std::string gen_out = "problem";
  auto* gen = app.add_subcommand("gen", "Generate a test system and write it as binary matrix files");
  add_problem_flags(gen, gen_p, true);
  gen->add_option("--noise-scale", gen_p.noise_scale, "Noisy mode: |w[i]| <= scale * ||a_i||")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--out", gen_out, "Output prefix; writes PREFIX.A.rkmx (and PREFIX.b.rkmx, PREFIX.x.rkmx)")
      ->capture_default_str();

  // solve
  std::string solve_A, solve_b, solve_x, solve_trace, solve_method = "rk";
  std::uint64_t solve_seed = 0;
  bool solve_identity = false;
  SolverFlags solve_f;
  auto* solve = app.add_subcommand("solve", "Solve a system read from binary matrix files");
  solve->add_option("--A", solve_A, "Matrix file")->required();
  solve->add_option("--b", solve_b, "Right-hand side file (default: zero vector)");
  solve->add_option("--x", solve_x, "True solution file, enables error tracking");
  solve->add_option("--method", solve_method, "Solver")
      ->check(CLI::IsMember({"cyclic", "rk", "rkjl", "oracle"}))
      ->capture_default_str();
  solve->add_option("--seed", solve_seed, "Random seed (x0 and row sampling)")->capture_default_str();
  solve->add_option("--trace-out", solve_trace, "Write the trace CSV here");
  solve->add_flag("--identity-sketch", solve_identity, "rkjl with Phi = I (d = n); exact scores");
  add_solver_flags(solve, solve_f);

  // bound
  std::string bound_A, bound_curve;
  double bound_delta = 0.3, bound_C = rkjl::kGaussianJlConstant, bound_e0 = 1.0;
  std::size_t bound_set = 0, bound_kmax = 0;
  auto* bound = app.add_subcommand("bound", "Report R, sigma_min, ||A||_F^2 and the JL sketch dimension");
  bound->add_option("--A", bound_A, "Matrix file (omit to compute only the JL dimension)");
  bound->add_option("--delta", bound_delta, "JL distortion in (0,1)")->capture_default_str();
  bound->add_option("--set-size", bound_set, "JL point-set size |S| (default 10n^2 when --A is given)");
  bound->add_option("--C", bound_C, "JL constant")->check(CLI::PositiveNumber)->capture_default_str();
  bound->add_option("--curve-out", bound_curve, "Write the expected-error bound curve CSV here");
  bound->add_option("--k-max", bound_kmax, "Last iteration of the bound curve (default 10n)");
  bound->add_option("--initial-error-sq", bound_e0, "||x0 - x||^2 for the bound curve")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  // experiments
  ProblemFlags exp_p;
  SolverFlags exp_f;
  std::size_t exp_trials = 20, exp_jobs = 1;
  std::string exp_out, exp_summary, exp_svg;
  double exp_threshold = 1e-3;
  std::uint64_t exp_solver_seed = 0;
  auto add_experiment_flags = [&](CLI::App* cmd, bool with_mode, bool with_d = true) {
    add_problem_flags(cmd, exp_p, false, with_mode);
    add_solver_flags(cmd, exp_f, with_d);
    cmd->add_option("--trials", exp_trials, "Paired trials")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--jobs", exp_jobs, "Worker threads for trials")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--solver-seed", exp_solver_seed, "Base seed for solver randomness")->capture_default_str();
    cmd->add_option("--out", exp_out, "Trace CSV output")->required();
    cmd->add_option("--summary-out", exp_summary, "Per-iteration summary CSV output");
    cmd->add_option("--svg", exp_svg, "Convergence plot output");
    cmd->add_option("--threshold", exp_threshold, "Error level for iterations-to-threshold")->capture_default_str();
  };

  std::string cmp_methods = "rk,oracle";
  bool cmp_identity = false;
  auto* compare = app.add_subcommand("compare", "Paired-seed comparison of solvers on generated problems");
  add_experiment_flags(compare, true);
  compare->add_option("--methods", cmp_methods, "Comma-separated solvers")->capture_default_str();
  compare->add_flag("--identity-sketch", cmp_identity, "rkjl with Phi = I (requires d = n)");

  std::string sweep_d;
  auto* sweep = app.add_subcommand("sweep", "RKJL across sketch dimensions on paired problems");
  add_experiment_flags(sweep, true, false);
  sweep->add_option("--d", sweep_d, "Comma-separated sketch dimensions, e.g. 5,20,100")->required();

  auto* noise = app.add_subcommand("noise", "RK on noisy systems against the expected-error bound and noise floor");
  add_experiment_flags(noise, false);
  noise->add_option("--gamma-scale", exp_p.noise_scale, "Noise scale: |w[i]| <= scale * ||a_i||")
      ->check(CLI::NonNegativeNumber)
      ->required();

  std::string plot_in, plot_out, plot_title = "l2 error vs iteration";
  auto* plot = app.add_subcommand("plot", "Render a trace CSV as an SVG convergence plot");
  plot->add_option("--in", plot_in, "Trace CSV")->required();
  plot->add_option("--out", plot_out, "SVG output")->required();
  plot->add_option("--title", plot_title, "Plot title")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  auto usage_error = [&](const std::string& msg) {
    std::cerr << "error: " << msg << "\nRun with --help for usage.\n";
    return kExitUsage;
  };

  try {
    if (*gen) {
      if (gen_p.m < gen_p.n) return usage_error("--m must be >= --n");
      const auto spec = gen_p.spec();
      if (spec.mode == rkjl::Consistency::noisy && gen_p.noise_scale == 0.0) {
        std::cerr << "note: noisy mode with --noise-scale 0 produces a consistent system\n";
      }
      const rkjl::Problem p = rkjl::generate_problem(spec);
      rkjl::write_matrix(gen_out + ".A.rkmx", p.A);
      std::cout << "wrote " << gen_out << ".A.rkmx (" << p.A.rows() << "x" << p.A.cols() << ")\n";
      if (spec.mode != rkjl::Consistency::homogeneous) {
        rkjl::write_vector(gen_out + ".b.rkmx", p.b);
        rkjl::write_vector(gen_out + ".x.rkmx", p.true_x);
        std::cout << "wrote " << gen_out << ".b.rkmx, " << gen_out << ".x.rkmx\n";
        if (spec.mode == rkjl::Consistency::noisy) std::cout << "gamma " << fmt(p.gamma) << "\n";
      }
      return 0;
    }

    if (*solve) {
      rkjl::DenseMatrix A = rkjl::read_matrix(solve_A);
      rkjl::RealVector b = solve_b.empty() ? rkjl::RealVector(A.rows(), 0.0) : rkjl::read_vector(solve_b);
      std::optional<rkjl::RealVector> x;
      if (!solve_x.empty()) x = rkjl::read_vector(solve_x);
      const std::size_t n = A.cols();
      rkjl::SolverConfig cfg = solve_f.config(n);
      cfg.method = rkjl::parse_method(solve_method);
      cfg.seed = solve_seed;
      rkjl::Rng x0rng(solve_seed, 1);
      const rkjl::RealVector x0 = rkjl::sphere_uniform(x0rng, n);
      rkjl::LinearSystem sys(std::move(A), std::move(b));

      rkjl::SolveTrace trace;
      if (cfg.method == rkjl::Method::rkjl) {
        const std::size_t d = solve_identity ? n : solve_f.sketch_dim(n);
        const auto t0 = std::chrono::steady_clock::now();
        rkjl::Rng srng(solve_seed, 2);
        rkjl::SketchedSystem ss(std::move(sys), solve_identity ? rkjl::identity_sketch(n) : rkjl::build_sketch(srng, n, d));
        const auto pre = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        std::cout << "sketch_dim " << d << "\n";
        std::cout << "preprocess_ms " << fmt(pre) << "\n";
        trace = rkjl::solve(ss, cfg, x0, x);
      } else {
        trace = rkjl::solve(sys, cfg, x0, x);
      }
      std::cout << "method " << solve_method << "\n";
      std::cout << "status " << rkjl::to_string(trace.status) << "\n";
      std::cout << "iterations " << trace.iterations() << "\n";
      if (x) std::cout << "final_error " << fmt(trace.records.back().error) << "\n";
      if (!solve_trace.empty()) {
        rkjl::ExperimentResult r;
        rkjl::RunGroup g;
        g.label = solve_method;
        g.method = cfg.method;
        rkjl::TrialRun t;
        t.trace = std::move(trace);
        g.trials.push_back(std::move(t));
        r.groups.push_back(std::move(g));
        rkjl::export_traces_csv(r, solve_trace);
      }
      return 0;
    }

    if (*bound) {
      std::optional<rkjl::DenseMatrix> A;
      if (!bound_A.empty()) A = rkjl::read_matrix(bound_A);
      std::size_t set_size = bound_set;
      if (set_size == 0) {
        if (!A) return usage_error("bound needs --set-size when --A is not given");
        set_size = std::max<std::size_t>(2, 10 * A->cols() * A->cols());
      }
      if (!(bound_delta > 0.0 && bound_delta < 1.0)) return usage_error("--delta must lie in (0, 1)");
      if (set_size < 2) return usage_error("--set-size must be >= 2");
      if (A) {
        const rkjl::BoundReport rep = rkjl::compute_R(*A);
        std::cout << "rows " << A->rows() << "\ncols " << A->cols() << "\n";
        std::cout << "frobenius_sq " << fmt(rep.frobenius_sq) << "\n";
        std::cout << "sigma_min " << fmt(rep.sigma_min) << "\n";
        std::cout << "R " << fmt(rep.R) << "\n";
        if (!bound_curve.empty()) {
          const std::size_t kmax = bound_kmax == 0 ? 10 * A->cols() : bound_kmax;
          if (rep.R > 1.0) {
            std::string csv = "iteration,bound\n";
            for (const auto& [k, v] : rkjl::rk_bound_curve(rep.R, bound_e0, kmax)) {
              csv += std::to_string(k) + "," + fmt(v) + "\n";
            }
            rkjl::write_text_file(bound_curve, csv);
          } else {
            std::cerr << "R <= 1: no bound curve\n";
          }
        }
      }
      std::cout << "jl_dimension " << rkjl::jl_dimension(bound_delta, set_size, bound_C) << "\n";
      return 0;
    }

    auto experiment_config = [&]() {
      if (exp_p.m < exp_p.n) throw CLI::ValidationError("--m must be >= --n");
      rkjl::ExperimentConfig cfg;
      cfg.solver = exp_f.config(exp_p.n);
      cfg.solver.seed = exp_solver_seed;
      cfg.trials = exp_trials;
      cfg.jobs = exp_jobs;
      cfg.threshold = exp_threshold;
      return cfg;
    };

    if (*compare) {
      std::vector<rkjl::Method> methods;
      for (const auto& s : split_csv(cmp_methods)) {
        try {
          methods.push_back(rkjl::parse_method(s));
        } catch (const rkjl::ParameterError& e) {
          return usage_error(e.what());
        }
      }
      rkjl::ExperimentConfig cfg;
      try {
        cfg = experiment_config();
      } catch (const CLI::ValidationError& e) {
        return usage_error(e.what());
      }
      cfg.identity_sketch = cmp_identity;
      cfg.sketch_dim = cmp_identity ? exp_p.n : exp_f.sketch_dim(exp_p.n);
      const auto r = rkjl::run_comparison(exp_p.spec(), methods, cfg);
      report_failures(r);
      write_outputs(r, exp_out, exp_summary, exp_svg, "l2 error vs iteration: " + cmp_methods);
      for (const auto& g : r.groups) {
        std::cout << g.label << " median_final_error " << fmt(g.median_error.empty() ? NAN : g.median_error.back())
                  << " median_iterations_to_threshold " << rkjl::median_count(g.iterations_to_threshold) << "\n";
      }
      return all_trials_failed(r) ? kExitRuntime : 0;
    }

    if (*sweep) {
      std::vector<std::size_t> ds;
      for (const auto& s : split_csv(sweep_d)) {
        try {
          std::size_t pos = 0;
          const long long v = std::stoll(s, &pos);
          if (pos != s.size() || v < 1) throw std::invalid_argument(s);
          ds.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
          return usage_error("--d entries must be positive integers, got '" + s + "'");
        }
      }
      rkjl::ExperimentConfig cfg;
      try {
        cfg = experiment_config();
      } catch (const CLI::ValidationError& e) {
        return usage_error(e.what());
      }
      const auto r = rkjl::run_d_sweep(exp_p.spec(), ds, cfg);
      report_failures(r);
      write_outputs(r, exp_out, exp_summary, exp_svg, "RKJL l2 error vs iteration by sketch dimension");
      for (const auto& g : r.groups) {
        std::cout << g.label << " median_iterations_to_threshold " << rkjl::median_count(g.iterations_to_threshold)
                  << "\n";
      }
      return all_trials_failed(r) ? kExitRuntime : 0;
    }

    if (*noise) {
      rkjl::ExperimentConfig cfg;
      try {
        cfg = experiment_config();
      } catch (const CLI::ValidationError& e) {
        return usage_error(e.what());
      }
      auto spec = exp_p.spec();
      spec.mode = rkjl::Consistency::noisy;
      const auto r = rkjl::run_noise_experiment(spec, cfg);
      report_failures(r);
      std::string summary = exp_summary.empty() ? exp_out + ".summary.csv" : exp_summary;
      write_outputs(r, exp_out, summary, exp_svg, "RK on noisy systems");
      std::cout << "floor " << fmt(r.noise->mean_floor) << "\n";
      std::cout << "summary " << summary << "\n";
      return all_trials_failed(r) ? kExitRuntime : 0;
    }

    if (*plot) {
      const auto r = rkjl::import_traces_csv(plot_in);
      rkjl::SvgOptions opt;
      opt.title = plot_title;
      rkjl::write_convergence_svg(r, plot_out, opt);
      return 0;
    }
  } catch (const rkjl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
