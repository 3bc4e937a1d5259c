#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace stefan::harness {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

/// Minimal line plot: one polyline per series, axis box, min/max labels.
/// Non-finite points (and non-positive ones on a log axis) are skipped.
inline std::string line_plot_svg(const std::string& title, const std::vector<Series>& series, bool log_y = false) {
  const double W = 640, H = 400, L = 70, R = 160, T = 30, B = 40;
  auto tr = [&](double y) { return log_y ? std::log10(y) : y; };
  auto ok = [&](double y) { return std::isfinite(y) && (!log_y || y > 0.0); };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!ok(s.y[i]) || !std::isfinite(s.x[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, tr(s.y[i]));
      y1 = std::max(y1, tr(s.y[i]));
    }
  if (!(x1 >= x0)) x0 = 0, x1 = 1;
  if (!(y1 >= y0)) y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (tr(y) - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  char buf[256];
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" font-family=\"sans-serif\" "
                    "font-size=\"11\">\n<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"18\" font-size=\"13\">%s</text>\n", L, title.c_str());
  out += buf;
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                L, T, W - L - R, H - T - B);
  out += buf;
  auto label = [&](double v) { return log_y ? std::pow(10.0, v) : v; };
  std::snprintf(buf, sizeof buf, "<text x=\"4\" y=\"%g\">%.3g</text>\n<text x=\"4\" y=\"%g\">%.3g</text>\n", H - B,
                label(y0), T + 10, label(y1));
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\">%.3g</text>\n<text x=\"%g\" y=\"%g\">%.3g</text>\n", L,
                H - B + 15, x0, W - R - 30, H - B + 15, x1);
  out += buf;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colors[k % 7];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!ok(s.y[i]) || !std::isfinite(s.x[i])) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
      pts += buf;
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(c) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" fill=\"%s\">%s</text>\n", W - R + 10, T + 15 + 15.0 * k, c,
                  s.label.c_str());
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace stefan::harness
