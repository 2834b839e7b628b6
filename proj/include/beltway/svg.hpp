#pragma once

// Minimal SVG charts for the experiment harness.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace beltway::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Axes {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  bool log_y = false;
};

namespace detail {

inline constexpr double kW = 640, kH = 420, kL = 70, kR = 150, kT = 40, kB = 50;

inline const char* color(std::size_t k) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  return palette[k % 6];
}

inline std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

inline std::string num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

struct Scale {
  double lo, hi;
  bool log;
  double pix0, pix1;
  double operator()(double v) const {
    const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo)) : (v - lo) / (hi - lo);
    return pix0 + t * (pix1 - pix0);
  }
};

inline Scale make_scale(std::vector<double> values, bool log, double pix0, double pix1) {
  if (log) std::erase_if(values, [](double v) { return !(v > 0.0); });
  double lo = values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
  double hi = values.empty() ? 1.0 : *std::max_element(values.begin(), values.end());
  if (log) {
    if (values.empty()) lo = 1.0, hi = 10.0;
    lo = std::pow(10.0, std::floor(std::log10(lo)));
    hi = std::pow(10.0, std::ceil(std::log10(hi)));
    if (hi <= lo) hi = lo * 10.0;
  } else if (hi <= lo) {
    hi = lo + 1.0;
  }
  return {lo, hi, log, pix0, pix1};
}

inline void frame(std::ostringstream& o, const Axes& ax, const Scale& sx, const Scale& sy) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << esc(ax.title) << "</text>\n";
  o << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n";
  auto ticks = [](const Scale& s) {
    std::vector<double> t;
    if (s.log) {
      for (double v = s.lo; v <= s.hi * 1.0001; v *= 10.0) t.push_back(v);
    } else {
      for (int k = 0; k <= 5; ++k) t.push_back(s.lo + (s.hi - s.lo) * k / 5.0);
    }
    return t;
  };
  for (double v : ticks(sx))
    o << "<text x=\"" << sx(v) << "\" y=\"" << kH - kB + 15 << "\" text-anchor=\"middle\">" << num(v) << "</text>\n";
  for (double v : ticks(sy))
    o << "<text x=\"" << kL - 5 << "\" y=\"" << sy(v) + 4 << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
  o << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">" << esc(ax.xlabel) << "</text>\n";
  o << "<text x=\"15\" y=\"" << (kT + kH - kB) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " << (kT + kH - kB) / 2
    << ")\">" << esc(ax.ylabel) << "</text>\n";
}

}  // namespace detail

inline std::string line_chart(const Axes& ax, const std::vector<Series>& series) {
  using namespace detail;
  std::vector<double> xs, ys;
  for (const auto& s : series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  const Scale sx = make_scale(xs, ax.log_x, kL, kW - kR);
  const Scale sy = make_scale(ys, ax.log_y, kH - kB, kT);
  std::ostringstream o;
  frame(o, ax, sx, sy);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    o << "<polyline fill=\"none\" stroke=\"" << color(k) << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((ax.log_x && !(s.x[i] > 0)) || (ax.log_y && !(s.y[i] > 0))) continue;
      o << sx(s.x[i]) << "," << sy(s.y[i]) << " ";
    }
    o << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((ax.log_x && !(s.x[i] > 0)) || (ax.log_y && !(s.y[i] > 0))) continue;
      o << "<circle cx=\"" << sx(s.x[i]) << "\" cy=\"" << sy(s.y[i]) << "\" r=\"2.5\" fill=\"" << color(k) << "\"/>\n";
    }
    o << "<text x=\"" << kW - kR + 10 << "\" y=\"" << kT + 15 * k + 10 << "\" fill=\"" << color(k) << "\">" << esc(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

/// Bars over [edges[i], edges[i+1]) with heights counts[i].
inline std::string histogram(const Axes& ax, const std::vector<double>& edges, const std::vector<double>& counts) {
  using namespace detail;
  std::vector<double> ys = counts;
  ys.push_back(0.0);
  const Scale sx = make_scale(edges, false, kL, kW - kR);
  const Scale sy = make_scale(ys, false, kH - kB, kT);
  std::ostringstream o;
  frame(o, ax, sx, sy);
  for (std::size_t i = 0; i + 1 < edges.size() && i < counts.size(); ++i) {
    const double x0 = sx(edges[i]), x1 = sx(edges[i + 1]);
    const double y0 = sy(counts[i]), y1 = sy(0.0);
    o << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << std::max(0.0, x1 - x0 - 0.5) << "\" height=\"" << y1 - y0
      << "\" fill=\"" << color(0) << "\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace beltway::svg
