#pragma once

// Experiment results: grouped per-trial traces, their per-iteration summary,
// and the trace CSV that carries them between runs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rkjl/error.hpp"
#include "rkjl/solvers.hpp"

namespace rkjl {

enum class EntryModel { bernoulli, gaussian };
enum class Consistency { homogeneous, planted, noisy };

struct ProblemSpec {
  std::size_t m = 6000;
  std::size_t n = 100;
  EntryModel model = EntryModel::bernoulli;
  bool normalize_rows = false;
  Consistency mode = Consistency::homogeneous;
  /// Noisy mode: w[i] = noise_scale·‖a_i‖·u_i with u_i uniform on [−1, 1], so γ ≤ noise_scale.
  double noise_scale = 0.0;
  std::uint64_t seed = 0;
};

struct TrialRun {
  std::size_t trial = 0;
  SolveTrace trace;
  /// Nonempty when the trial failed; the trace is then empty.
  std::string failure;
  std::int64_t preprocess_ns = 0;

  bool ok() const noexcept { return failure.empty(); }
};

/// One method (or one sketch dimension) across all trials.
struct RunGroup {
  std::string label;
  Method method = Method::rk;
  std::size_t sketch_dim = 0;
  std::vector<TrialRun> trials;
  std::vector<double> median_error;
  std::vector<double> mean_error;
  /// First iteration with error ≤ the experiment threshold, per trial;
  /// budget + 1 when never reached.
  std::vector<std::size_t> iterations_to_threshold;
  PhaseTimes phases;
  std::int64_t preprocess_ns = 0;
};

struct NoiseTrial {
  double R = 0.0;
  double gamma = 0.0;
  double initial_error = 0.0;
  double floor = 0.0;
};

struct NoiseSummary {
  std::vector<NoiseTrial> trials;
  /// Mean over trials of the per-trial expected-error bound at each k.
  std::vector<double> bound_curve;
  /// Mean over trials of √R·γ.
  double mean_floor = 0.0;
};

struct ExperimentResult {
  ProblemSpec spec;
  std::vector<RunGroup> groups;
  std::optional<NoiseSummary> noise;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace detail

/// Fills median_error / mean_error over the common iteration grid
/// 0..max_k. A trial that stopped early contributes its last error to later
/// iterations; failed trials are excluded.
inline void summarize(RunGroup& g) {
  g.median_error.clear();
  g.mean_error.clear();
  std::size_t max_k = 0;
  bool any = false;
  for (const auto& t : g.trials) {
    if (!t.ok() || t.trace.records.empty()) continue;
    any = true;
    max_k = std::max(max_k, t.trace.records.back().k);
  }
  if (!any) return;
  std::vector<double> column;
  for (std::size_t k = 0; k <= max_k; ++k) {
    column.clear();
    for (const auto& t : g.trials) {
      if (!t.ok() || t.trace.records.empty()) continue;
      const auto& recs = t.trace.records;
      const std::size_t idx = std::min(k, recs.size() - 1);
      column.push_back(recs[idx].error);
    }
    double sum = 0.0;
    for (double e : column) sum += e;
    g.mean_error.push_back(sum / static_cast<double>(column.size()));
    g.median_error.push_back(detail::median_of(column));
  }
}

inline std::vector<std::size_t> iterations_to_threshold(const RunGroup& g, double threshold, std::size_t budget) {
  std::vector<std::size_t> out;
  for (const auto& t : g.trials) {
    std::size_t hit = budget + 1;
    for (const auto& r : t.trace.records) {
      if (r.error <= threshold) {
        hit = r.k;
        break;
      }
    }
    out.push_back(hit);
  }
  return out;
}

inline std::size_t median_count(std::vector<std::size_t> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  // Lower median keeps the result an iteration count.
  return v[(v.size() - 1) / 2];
}

// ---------------------------------------------------------------------------
// trace CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kTraceCsvHeader = "method,trial,iteration,error,residual,elapsed_ns";

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string traces_csv(const ExperimentResult& result) {
  std::string out = kTraceCsvHeader;
  out += '\n';
  for (const auto& g : result.groups) {
    for (const auto& t : g.trials) {
      for (const auto& r : t.trace.records) {
        out += g.label;
        out += ',';
        out += std::to_string(t.trial);
        out += ',';
        out += std::to_string(r.k);
        out += ',';
        out += format_real(r.error);
        out += ',';
        out += format_real(r.residual);
        out += ',';
        out += std::to_string(r.elapsed_ns);
        out += '\n';
      }
    }
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw IoError("write to '" + path + "' failed");
}

inline void export_traces_csv(const ExperimentResult& result, const std::string& path) {
  write_text_file(path, traces_csv(result));
}

namespace detail {

inline double parse_real(const std::string& s, std::size_t offset) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw FormatError("bad number '" + s + "'", offset);
  return v;
}

inline std::uint64_t parse_count(const std::string& s, std::size_t offset) {
  if (s.empty() || s.find_first_not_of("0123456789-") != std::string::npos) {
    throw FormatError("bad integer '" + s + "'", offset);
  }
  return static_cast<std::uint64_t>(std::stoll(s));
}

}  // namespace detail

/// Inverse of traces_csv: groups keep first-appearance order, trials their
/// order within the group. Summaries are recomputed.
inline ExperimentResult parse_traces_csv(const std::string& text) {
  ExperimentResult result;
  std::istringstream in(text);
  std::string line;
  std::size_t offset = 0;
  if (!std::getline(in, line) || line != kTraceCsvHeader) {
    throw FormatError("trace CSV must start with header '" + std::string(kTraceCsvHeader) + "'", 0);
  }
  offset += line.size() + 1;
  std::map<std::string, std::size_t> group_index;
  while (std::getline(in, line)) {
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 6) throw FormatError("expected 6 fields, got " + std::to_string(fields.size()), line_offset);
    auto [it, inserted] = group_index.try_emplace(fields[0], result.groups.size());
    if (inserted) {
      RunGroup g;
      g.label = fields[0];
      result.groups.push_back(std::move(g));
    }
    RunGroup& g = result.groups[it->second];
    const auto trial = static_cast<std::size_t>(detail::parse_count(fields[1], line_offset));
    if (g.trials.empty() || g.trials.back().trial != trial) {
      TrialRun t;
      t.trial = trial;
      g.trials.push_back(std::move(t));
    }
    TraceRecord r;
    r.k = static_cast<std::size_t>(detail::parse_count(fields[2], line_offset));
    r.error = detail::parse_real(fields[3], line_offset);
    r.residual = detail::parse_real(fields[4], line_offset);
    r.elapsed_ns = static_cast<std::int64_t>(std::stoll(fields[5]));
    g.trials.back().trace.records.push_back(r);
  }
  for (auto& g : result.groups) summarize(g);
  return result;
}

inline ExperimentResult import_traces_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_traces_csv(ss.str());
}

/// Per-iteration summary table: iteration, then median and mean error for
/// every group, and for noise experiments the bound and floor columns.
inline std::string summary_csv(const ExperimentResult& result) {
  std::string out = "iteration";
  for (const auto& g : result.groups) out += "," + g.label + "_median," + g.label + "_mean";
  if (result.noise) out += ",bound,floor";
  out += '\n';
  std::size_t rows = 0;
  for (const auto& g : result.groups) rows = std::max(rows, g.median_error.size());
  for (std::size_t k = 0; k < rows; ++k) {
    out += std::to_string(k);
    for (const auto& g : result.groups) {
      const bool have = k < g.median_error.size();
      out += ',' + (have ? format_real(g.median_error[k]) : std::string());
      out += ',' + (have ? format_real(g.mean_error[k]) : std::string());
    }
    if (result.noise) {
      const auto& nz = *result.noise;
      out += ',' + (k < nz.bound_curve.size() ? format_real(nz.bound_curve[k]) : std::string());
      out += ',' + format_real(nz.mean_floor);
    }
    out += '\n';
  }
  return out;
}

}  // namespace rkjl
