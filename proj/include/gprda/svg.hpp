#pragma once

// Tiny deterministic SVG charts: multi-series line plots and scatter plots
// with a 1:1 reference line.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace gprda::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

namespace detail {

inline const char* color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};
  return palette[i % 7];
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double w = 640, h = 420, left = 70, right = 150, top = 40, bottom = 55;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (w - left - right); }
  double py(double y) const { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); }

  std::string open(const std::string& title, const std::string& xlabel, const std::string& ylabel) const {
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
                    "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(w / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
         "</text>\n";
    s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(w - left - right) + "\" height=\"" +
         num(h - top - bottom) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
      s += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(h - bottom + 16) + "\" text-anchor=\"middle\">" +
           tick(xv) + "</text>\n";
      s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(py(yv) + 4) + "\" text-anchor=\"end\">" + tick(yv) +
           "</text>\n";
    }
    s += "<text x=\"" + num((left + w - right) / 2) + "\" y=\"" + num(h - 12) + "\" text-anchor=\"middle\">" +
         escape(xlabel) + "</text>\n";
    s += "<text x=\"16\" y=\"" + num((top + h - bottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num((top + h - bottom) / 2) + ")\">" + escape(ylabel) + "</text>\n";
    return s;
  }

  std::string legend(std::size_t i, const std::string& label) const {
    const double y = top + 10 + 18.0 * static_cast<double>(i);
    const double x = w - right + 12;
    return "<rect x=\"" + num(x) + "\" y=\"" + num(y - 8) + "\" width=\"10\" height=\"10\" fill=\"" + color(i) +
           "\"/>\n<text x=\"" + num(x + 16) + "\" y=\"" + num(y + 1) + "\">" + escape(label) + "</text>\n";
  }
};

inline void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double pad = std::max(1e-12, std::abs(lo) * 0.05 + 0.5);
    lo -= pad;
    hi += pad;
  }
}

}  // namespace detail

inline std::string line_plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                             const std::string& ylabel) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) {
      if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  detail::widen(x0, x1);
  detail::widen(y0, y1);
  detail::Frame f{x0, x1, y0, y1};
  std::string s = f.open(title, xlabel, ylabel);
  for (std::size_t i = 0; i < series.size(); ++i) {
    s += "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" + std::string(detail::color(i)) + "\" points=\"";
    for (std::size_t k = 0; k < series[i].x.size(); ++k) {
      if (!std::isfinite(series[i].y[k])) continue;
      s += detail::num(f.px(series[i].x[k])) + "," + detail::num(f.py(series[i].y[k])) + " ";
    }
    s += "\"/>\n" + f.legend(i, series[i].label);
  }
  return s + "</svg>\n";
}

/// Scatter of measured (x) against predicted (y) with the 1:1 line.
inline std::string scatter_plot(const std::vector<Series>& series, const std::string& title,
                                const std::string& xlabel, const std::string& ylabel) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series) {
    for (double v : s.x) lo = std::min(lo, v), hi = std::max(hi, v);
    for (double v : s.y) {
      if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  detail::widen(lo, hi);
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  detail::Frame f{lo, hi, lo, hi};
  std::string s = f.open(title, xlabel, ylabel);
  s += "<line x1=\"" + detail::num(f.px(lo)) + "\" y1=\"" + detail::num(f.py(lo)) + "\" x2=\"" +
       detail::num(f.px(hi)) + "\" y2=\"" + detail::num(f.py(hi)) +
       "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t k = 0; k < series[i].x.size(); ++k) {
      if (!std::isfinite(series[i].y[k])) continue;
      s += "<circle r=\"4\" fill=\"" + std::string(detail::color(i)) + "\" fill-opacity=\"0.8\" cx=\"" +
           detail::num(f.px(series[i].x[k])) + "\" cy=\"" + detail::num(f.py(series[i].y[k])) + "\"/>\n";
    }
    s += f.legend(i, series[i].label);
  }
  return s + "</svg>\n";
}

}  // namespace gprda::svg
