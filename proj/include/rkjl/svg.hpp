#pragma once

// Static SVG convergence plot: median error per group against iteration,
// log-scaled y axis, one polyline per group, legend in the upper right.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "rkjl/experiment.hpp"

namespace rkjl {

/// Errors at or below zero are drawn at this value on the log axis.
inline constexpr double kLogAxisFloor = 1e-16;

struct SvgOptions {
  int width = 720;
  int height = 480;
  std::string title = "l2 error vs iteration";
  /// Polylines are thinned to at most this many vertices.
  std::size_t max_points = 1000;
};

namespace detail {

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                           "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace detail

inline std::string render_convergence_svg(const ExperimentResult& result, const SvgOptions& opt = {}) {
  std::size_t traces = 0;
  for (const auto& g : result.groups) traces += g.median_error.empty() ? 0 : 1;
  if (traces == 0) throw ParameterError("render_convergence_svg: no traces to plot");

  const double left = 80, right = 20, top = 40, bottom = 50;
  const double pw = opt.width - left - right;
  const double ph = opt.height - top - bottom;

  bool clamped = false;
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = 0.0;
  std::size_t kmax = 1;
  for (const auto& g : result.groups) {
    if (g.median_error.empty()) continue;
    kmax = std::max(kmax, g.median_error.size() - 1);
    for (double e : g.median_error) {
      if (std::isnan(e)) continue;
      if (!(e > kLogAxisFloor)) {
        clamped = true;
        e = kLogAxisFloor;
      }
      ymin = std::min(ymin, e);
      ymax = std::max(ymax, e);
    }
  }
  if (!(ymax > 0.0)) {
    ymin = ymax = kLogAxisFloor;
  }
  double lo = std::floor(std::log10(ymin));
  double hi = std::ceil(std::log10(ymax));
  if (hi <= lo) hi = lo + 1;

  auto xpos = [&](double k) { return left + pw * k / static_cast<double>(kmax); };
  auto ypos = [&](double e) {
    const double le = std::log10(std::max(e, kLogAxisFloor));
    return top + ph * (hi - le) / (hi - lo);
  };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + std::to_string(opt.width) + " " +
       std::to_string(opt.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(opt.width) + "\" height=\"" + std::to_string(opt.height) +
       "\" fill=\"white\"/>\n";
  s += "<text x=\"" + detail::fmt_num(left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
       detail::xml_escape(opt.title) + "</text>\n";
  s += "<rect x=\"" + detail::fmt_num(left) + "\" y=\"" + detail::fmt_num(top) + "\" width=\"" + detail::fmt_num(pw) +
       "\" height=\"" + detail::fmt_num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  // y decades
  const int decades = static_cast<int>(hi - lo);
  const int ystep = std::max(1, decades / 10);
  for (int e = static_cast<int>(lo); e <= static_cast<int>(hi); e += ystep) {
    const double y = ypos(std::pow(10.0, e));
    s += "<line x1=\"" + detail::fmt_num(left) + "\" y1=\"" + detail::fmt_num(y) + "\" x2=\"" +
         detail::fmt_num(left + pw) + "\" y2=\"" + detail::fmt_num(y) + "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + detail::fmt_num(left - 6) + "\" y=\"" + detail::fmt_num(y + 4) +
         "\" text-anchor=\"end\">1e" + std::to_string(e) + "</text>\n";
  }
  // x ticks
  for (int i = 0; i <= 5; ++i) {
    const double k = static_cast<double>(kmax) * i / 5.0;
    const double x = xpos(k);
    s += "<text x=\"" + detail::fmt_num(x) + "\" y=\"" + detail::fmt_num(top + ph + 18) +
         "\" text-anchor=\"middle\">" + std::to_string(static_cast<long long>(std::llround(k))) + "</text>\n";
  }
  s += "<text x=\"" + detail::fmt_num(left + pw / 2) + "\" y=\"" + detail::fmt_num(opt.height - 10.0) +
       "\" text-anchor=\"middle\">iteration</text>\n";
  s += "<text x=\"16\" y=\"" + detail::fmt_num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       detail::fmt_num(top + ph / 2) + ")\">l2 error (median)</text>\n";

  std::size_t color = 0;
  double legend_y = top + 16;
  for (const auto& g : result.groups) {
    if (g.median_error.empty()) continue;
    const char* stroke = detail::kPalette[color++ % std::size(detail::kPalette)];
    const std::size_t npts = g.median_error.size();
    const std::size_t stride = std::max<std::size_t>(1, (npts + opt.max_points - 1) / opt.max_points);
    s += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t k = 0; k < npts; k += stride) {
      if (std::isnan(g.median_error[k])) continue;
      if (!first) s += ' ';
      first = false;
      s += detail::fmt_num(xpos(static_cast<double>(k))) + "," + detail::fmt_num(ypos(g.median_error[k]));
    }
    if ((npts - 1) % stride != 0 && !std::isnan(g.median_error.back())) {
      s += ' ' + detail::fmt_num(xpos(static_cast<double>(npts - 1))) + "," +
           detail::fmt_num(ypos(g.median_error.back()));
    }
    s += "\"/>\n";
    const double lx = left + pw - 150;
    s += "<line class=\"legend\" x1=\"" + detail::fmt_num(lx) + "\" y1=\"" + detail::fmt_num(legend_y - 4) +
         "\" x2=\"" + detail::fmt_num(lx + 24) + "\" y2=\"" + detail::fmt_num(legend_y - 4) + "\" stroke=\"" + stroke +
         "\" stroke-width=\"2\"/>\n";
    s += "<text class=\"legend\" x=\"" + detail::fmt_num(lx + 30) + "\" y=\"" + detail::fmt_num(legend_y) + "\">" +
         detail::xml_escape(g.label) + "</text>\n";
    legend_y += 16;
  }
  if (clamped) {
    s += "<text class=\"warning\" x=\"" + detail::fmt_num(left + 6) + "\" y=\"" + detail::fmt_num(top + ph - 6) +
         "\" fill=\"#aa0000\">warning: errors &lt;= 1e-16 clamped to 1e-16</text>\n";
  }
  s += "</svg>\n";
  return s;
}

inline void write_convergence_svg(const ExperimentResult& result, const std::string& path, const SvgOptions& opt = {}) {
  write_text_file(path, render_convergence_svg(result, opt));
}

}  // namespace rkjl
