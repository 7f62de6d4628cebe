#pragma once

// Minimal self-contained SVG line plots for sweep CSVs: one curve per
// algorithm, markers at data points, optional log-scale y axis.

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hiblock/bench.hpp"
#include "hiblock/model.hpp"

namespace hiblock {

enum class PlotMetric { err, nmse, false_alarm };

inline const char* axis_label(PlotMetric m) {
  switch (m) {
    case PlotMetric::err: return "ERR";
    case PlotMetric::nmse: return "NMSE";
    case PlotMetric::false_alarm: return "false alarm ratio";
  }
  return "";
}

inline double metric_of(const SweepRow& r, PlotMetric m) {
  switch (m) {
    case PlotMetric::err: return r.err;
    case PlotMetric::nmse: return r.nmse_mean;
    case PlotMetric::false_alarm: return r.false_alarm_mean;
  }
  return 0.0;
}

inline std::string render_svg(const std::vector<SweepRow>& rows, PlotMetric metric,
                              bool log_y, const std::string& x_label) {
  if (rows.empty()) throw DomainError("render_svg: no rows to plot");
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::map<std::string, std::vector<std::pair<double, double>>> curves;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& r : rows) {
    double y = metric_of(r, metric);
    if (log_y) y = std::max(y, 1e-12);
    curves[r.algorithm].push_back({r.point, y});
    xmin = std::min(xmin, r.point);
    xmax = std::max(xmax, r.point);
    const double yv = log_y ? std::log10(y) : y;
    ymin = std::min(ymin, yv);
    ymax = std::max(ymax, yv);
  }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;

  const double W = 720, H = 480, L = 70, R = 180, T = 30, B = 50;
  auto sx = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto sy = [&](double y) {
    const double v = log_y ? std::log10(y) : y;
    return H - B - (v - ymin) / (ymax - ymin) * (H - T - B);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R
      << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\""
      << H - B << "\" stroke=\"black\"/>\n";

  const int nticks = 5;
  for (int i = 0; i <= nticks; ++i) {
    const double fx = xmin + (xmax - xmin) * i / nticks;
    const double px = sx(fx);
    svg << "<line x1=\"" << px << "\" y1=\"" << H - B << "\" x2=\"" << px
        << "\" y2=\"" << H - B + 5 << "\" stroke=\"black\"/>"
        << "<text x=\"" << px << "\" y=\"" << H - B + 20
        << "\" font-size=\"11\" text-anchor=\"middle\">" << fx << "</text>\n";
    const double fy = ymin + (ymax - ymin) * i / nticks;
    const double py = H - B - (fy - ymin) / (ymax - ymin) * (H - T - B);
    std::ostringstream lab;
    if (log_y)
      lab << "1e" << fy;
    else
      lab << fy;
    svg << "<line x1=\"" << L - 5 << "\" y1=\"" << py << "\" x2=\"" << L
        << "\" y2=\"" << py << "\" stroke=\"black\"/>"
        << "<text x=\"" << L - 8 << "\" y=\"" << py + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << lab.str() << "</text>\n";
  }
  svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
      << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label << "</text>\n"
      << "<text x=\"18\" y=\"" << (T + H - B) / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (T + H - B) / 2 << ")\">" << axis_label(metric) << "</text>\n";

  int ci = 0;
  for (const auto& [name, pts] : curves) {
    const char* color = kColors[ci % 8];
    std::ostringstream path;
    for (std::size_t i = 0; i < pts.size(); ++i)
      path << (i ? " L" : "M") << sx(pts[i].first) << ' ' << sy(pts[i].second);
    if (pts.size() > 1)
      svg << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\"/>\n";
    for (const auto& [x, y] : pts)
      svg << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y)
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = T + 16 * ci + 10;
    svg << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\""
        << W - R + 30 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>"
        << "<text x=\"" << W - R + 35 << "\" y=\"" << ly + 4
        << "\" font-size=\"12\">" << name << "</text>\n";
    ++ci;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace hiblock
