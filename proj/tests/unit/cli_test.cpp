#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rkjl/analysis.hpp"
#include "rkjl/experiment.hpp"
#include "rkjl/matrix_io.hpp"

namespace rkjl {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("rkjl_cli_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  RunResult run(const std::string& args) const {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = std::string(RKJL_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  // Value printed after "key " on stdout.
  static std::string field(const std::string& out, const std::string& key) {
    std::istringstream in(out);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind(key + " ", 0) == 0) return line.substr(key.size() + 1);
    }
    return {};
  }

  fs::path dir_;
};

TEST_F(Cli, HelpOnEverySubcommandExitsZero) {
  EXPECT_EQ(run("--help").code, 0);
  for (const char* sub : {"gen", "solve", "bound", "compare", "sweep", "noise", "plot"}) {
    const RunResult r = run(std::string(sub) + " --help");
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("--"), std::string::npos) << sub;
  }
  const RunResult solve = run("solve --help");
  for (const char* flag : {"--A", "--b", "--x", "--method", "--d", "--delta", "--s", "--seed", "--tolerance",
                           "--max-iters", "--trace-out"}) {
    EXPECT_NE(solve.out.find(flag), std::string::npos) << flag;
  }
}

TEST_F(Cli, NoSubcommandOrUnknownFlagIsUsageError) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("gen --bogus 1").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST_F(Cli, GenIsDeterministic) {
  const std::string args = "gen --m 100 --n 10 --model bernoulli --mode homogeneous --seed 7 --out ";
  ASSERT_EQ(run(args + path("a")).code, 0);
  ASSERT_EQ(run(args + path("b")).code, 0);
  EXPECT_EQ(slurp(path("a.A.rkmx")), slurp(path("b.A.rkmx")));
  EXPECT_FALSE(fs::exists(path("a.b.rkmx")));
  const DenseMatrix A = read_matrix(path("a.A.rkmx"));
  EXPECT_EQ(A.rows(), 100u);
  EXPECT_EQ(A.cols(), 10u);
}

TEST_F(Cli, GenFlagErrors) {
  const RunResult missing = run("gen --n 10 --out " + path("x"));
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("--m"), std::string::npos);
  EXPECT_EQ(run("gen --m 10 --n 0 --out " + path("x")).code, 2);
  EXPECT_EQ(run("gen --m 5 --n 10 --out " + path("x")).code, 2);
  EXPECT_EQ(run("gen --m 10 --n 5 --model cauchy --out " + path("x")).code, 2);
  EXPECT_EQ(run("gen --m 10 --n 5 --out /nonexistent/dir/p").code, 1);
}

TEST_F(Cli, SolveRkOnPlantedSystem) {
  ASSERT_EQ(run("gen --m 200 --n 20 --model gaussian --mode planted --seed 1 --out " + path("p")).code, 0);
  // x0 is a unit vector, so ‖x0 − x‖ ≤ ‖x‖ + 1; Markov on the expected squared
  // error after 10n steps gives a tolerance met with probability ≥ 0.9.
  const double R = compute_R(read_matrix(path("p.A.rkmx"))).R;
  const double e0 = std::pow(norm2(read_vector(path("p.x.rkmx"))) + 1.0, 2);
  const double tol = std::sqrt(10.0 * std::pow(1 - 1 / R, 200) * e0);
  const RunResult r = run("solve --A " + path("p.A.rkmx") + " --b " + path("p.b.rkmx") + " --x " + path("p.x.rkmx") +
                          " --method rk --tolerance " + format_real(tol) + " --trace-out " + path("t.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "status"), "converged");
  EXPECT_LE(std::stod(field(r.out, "final_error")), tol);
  EXPECT_LE(std::stoul(field(r.out, "iterations")), 200u);
  const ExperimentResult tr = import_traces_csv(path("t.csv"));
  ASSERT_EQ(tr.groups.size(), 1u);
  EXPECT_EQ(tr.groups[0].label, "rk");
}

TEST_F(Cli, SolveRkjlWithBoundDimension) {
  ASSERT_EQ(run("gen --m 300 --n 30 --model gaussian --mode planted --seed 2 --out " + path("p")).code, 0);
  const RunResult b = run("bound --A " + path("p.A.rkmx"));
  ASSERT_EQ(b.code, 0) << b.err;
  const std::string d = field(b.out, "jl_dimension");
  ASSERT_FALSE(d.empty());
  const std::string dd = std::to_string(std::min<std::size_t>(30, std::stoul(d)));
  const RunResult r = run("solve --A " + path("p.A.rkmx") + " --b " + path("p.b.rkmx") + " --x " + path("p.x.rkmx") +
                          " --method rkjl --d " + dd + " --max-iters 100");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "sketch_dim"), dd);
  EXPECT_FALSE(field(r.out, "preprocess_ms").empty());
  EXPECT_FALSE(field(r.out, "final_error").empty());
}

TEST_F(Cli, SolveMissingInputNamesPath) {
  const RunResult r = run("solve --A " + path("missing.rkmx"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(path("missing.rkmx")), std::string::npos);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST_F(Cli, SolveCorruptInputIsRuntimeError) {
  std::ofstream(path("bad.rkmx")) << "not a matrix";
  const RunResult r = run("solve --A " + path("bad.rkmx"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("RKMX"), std::string::npos);
  EXPECT_EQ(run("solve --A " + path("bad.rkmx") + " --method newton").code, 2);
}

TEST_F(Cli, BoundIdentityAndJlDimension) {
  write_matrix(path("I.rkmx"), DenseMatrix::identity(10));
  const RunResult r = run("bound --A " + path("I.rkmx"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(std::stod(field(r.out, "R")), 10.0, 1e-9);
  EXPECT_NEAR(std::stod(field(r.out, "sigma_min")), 1.0, 1e-12);
  EXPECT_NEAR(std::stod(field(r.out, "frobenius_sq")), 10.0, 1e-12);

  const RunResult jl = run("bound --delta 0.5 --set-size 2 --C 8");
  ASSERT_EQ(jl.code, 0) << jl.err;
  EXPECT_EQ(field(jl.out, "jl_dimension"), "23");
  EXPECT_EQ(run("bound --delta 1.5 --set-size 2").code, 2);
  EXPECT_EQ(run("bound").code, 2);
}

TEST_F(Cli, BoundCurveMatchesAnalysis) {
  write_matrix(path("D.rkmx"), DenseMatrix{{1, 0}, {0, 2}});
  const RunResult r = run("bound --A " + path("D.rkmx") + " --curve-out " + path("c.csv") + " --k-max 4");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path("c.csv"));
  std::string expected = "iteration,bound\n";
  for (const auto& [k, v] : rk_bound_curve(5.0, 1.0, 4)) expected += std::to_string(k) + "," + format_real(v) + "\n";
  EXPECT_EQ(csv, expected);
}

TEST_F(Cli, BoundRankDeficientFailsCleanly) {
  write_matrix(path("r.rkmx"), DenseMatrix{{1, 2}, {2, 4}, {3, 6}});
  const RunResult r = run("bound --A " + path("r.rkmx"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("rank"), std::string::npos);
}

TEST_F(Cli, CompareWritesPairedGroups) {
  const RunResult r = run("compare --methods rk,oracle --m 600 --n 50 --trials 5 --seed 1 --max-iters 100 --out " +
                          path("c.csv") + " --summary-out " + path("s.csv") + " --svg " + path("c.svg"));
  ASSERT_EQ(r.code, 0) << r.err;
  const ExperimentResult res = import_traces_csv(path("c.csv"));
  ASSERT_EQ(res.groups.size(), 2u);
  EXPECT_EQ(res.groups[0].label, "rk");
  EXPECT_EQ(res.groups[1].label, "oracle");
  for (const auto& g : res.groups) EXPECT_EQ(g.trials.size(), 5u);
  EXPECT_EQ(slurp(path("s.csv")).substr(0, 46), "iteration,rk_median,rk_mean,oracle_median,orac");
  EXPECT_NE(slurp(path("c.svg")).find("<svg"), std::string::npos);
  EXPECT_EQ(run("compare --methods rk,newton --m 60 --n 5 --out " + path("x.csv")).code, 2);
  EXPECT_EQ(run("compare --methods rk --m 4 --n 5 --out " + path("x.csv")).code, 2);
  EXPECT_EQ(run("compare --methods rk --m 60 --n 5").code, 2);
}

TEST_F(Cli, SweepWritesOneGroupPerDimension) {
  const RunResult r = run("sweep --d 5,20,100 --m 400 --n 100 --trials 2 --max-iters 50 --out " + path("s.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  const ExperimentResult res = import_traces_csv(path("s.csv"));
  ASSERT_EQ(res.groups.size(), 3u);
  EXPECT_EQ(res.groups[0].label, "rkjl_d5");
  EXPECT_EQ(res.groups[1].label, "rkjl_d20");
  EXPECT_EQ(res.groups[2].label, "rkjl_d100");
  EXPECT_EQ(run("sweep --d 5,x --m 40 --n 10 --out " + path("s.csv")).code, 2);
  EXPECT_EQ(run("sweep --d 0 --m 40 --n 10 --out " + path("s.csv")).code, 2);
}

TEST_F(Cli, NoiseReportsFloorColumn) {
  const RunResult r = run("noise --gamma-scale 0.01 --m 200 --n 10 --normalize --trials 3 --max-iters 100 --out " +
                          path("n.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string summary = slurp(path("n.csv") + ".summary.csv");
  const std::string header = summary.substr(0, summary.find('\n'));
  EXPECT_EQ(header, "iteration,rk_median,rk_mean,bound,floor");
  const double printed = std::stod(field(r.out, "floor"));
  EXPECT_GT(printed, 0.0);
  // floor column equals the mean of √R·γ over the generated trials.
  const std::string row1 = summary.substr(summary.find('\n') + 1);
  const std::string last = row1.substr(0, row1.find('\n'));
  EXPECT_DOUBLE_EQ(std::stod(last.substr(last.rfind(',') + 1)), printed);
  EXPECT_EQ(run("noise --m 200 --n 10 --out " + path("n.csv")).code, 2);
}

TEST_F(Cli, PlotRendersTraceCsv) {
  ASSERT_EQ(run("compare --methods rk,cyclic --m 100 --n 10 --trials 2 --max-iters 50 --out " + path("c.csv")).code, 0);
  const RunResult r = run("plot --in " + path("c.csv") + " --out " + path("p.svg"));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string svg = slurp(path("p.svg"));
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_EQ(run("plot --in " + path("none.csv") + " --out " + path("p.svg")).code, 1);
  EXPECT_EQ(run("plot --in " + path("c.csv")).code, 2);
}

TEST_F(Cli, ExperimentsAreByteDeterministic) {
  for (int i = 0; i < 2; ++i) {
    const std::string tag = std::to_string(i);
    ASSERT_EQ(run("compare --methods rk,rkjl,oracle --m 200 --n 20 --trials 3 --jobs 2 --max-iters 60 --out " +
                  path("c" + tag + ".csv") + " --svg " + path("c" + tag + ".svg"))
                  .code,
              0);
  }
  EXPECT_EQ(slurp(path("c0.csv")), slurp(path("c1.csv")));
  EXPECT_EQ(slurp(path("c0.svg")), slurp(path("c1.svg")));
}

}  // namespace
}  // namespace rkjl
