#include "sppa/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace sppa {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v, bool log) {
  char buf[32];
  if (log) {
    std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(v)));
  } else {
    std::snprintf(buf, sizeof buf, "%.3g", v);
  }
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
  double map(double v) const { return log ? std::log10(v) : v; }
};

void widen(Axis& a) {
  if (!(a.hi > a.lo)) {
    const double pad = a.lo == 0.0 ? 1.0 : std::abs(a.lo) * 0.1;
    a.lo -= pad;
    a.hi += pad;
  }
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> t;
  if (a.log) {
    const double span = a.hi - a.lo;
    const int step = std::max(1, static_cast<int>(std::ceil(span / 8.0)));
    for (int e = static_cast<int>(std::ceil(a.lo)); e <= static_cast<int>(std::floor(a.hi)); e += step) {
      t.push_back(e);
    }
    return t;
  }
  const double raw = (a.hi - a.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-9 * step; v += step) {
    t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return t;
}

}  // namespace

std::string palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  return colors[i % (sizeof colors / sizeof colors[0])];
}

std::string svg_line_plot(const std::vector<PlotSeries>& series, const PlotOptions& opts) {
  Axis ax{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), opts.log_x};
  Axis ay{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), opts.log_y};
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      ax.lo = std::min(ax.lo, ax.map(s.x[i]));
      ax.hi = std::max(ax.hi, ax.map(s.x[i]));
      ay.lo = std::min(ay.lo, ay.map(s.y[i]));
      ay.hi = std::max(ay.hi, ay.map(s.y[i]));
    }
  }
  if (!std::isfinite(ax.lo)) ax.lo = 0.0, ax.hi = 1.0;
  if (!std::isfinite(ay.lo)) ay.lo = 0.0, ay.hi = 1.0;
  widen(ax);
  widen(ay);

  double pw = kWidth - kLeft - kRight;
  double ph = kHeight - kTop - kBottom;
  if (opts.equal_aspect) {
    const double sx = pw / (ax.hi - ax.lo);
    const double sy = ph / (ay.hi - ay.lo);
    const double sc = std::min(sx, sy);
    pw = sc * (ax.hi - ax.lo);
    ph = sc * (ay.hi - ay.lo);
  }
  auto px = [&](double v) { return kLeft + (v - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double v) { return kTop + ph - (v - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"#ffffff\"/>\n";
  os << "<text x=\"" << f2(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(opts.title) << "</text>\n";
  os << "<rect x=\"" << f2(kLeft) << "\" y=\"" << f2(kTop) << "\" width=\"" << f2(pw) << "\" height=\"" << f2(ph)
     << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  for (double t : ticks(ax)) {
    const double x = px(t);
    os << "<line x1=\"" << f2(x) << "\" y1=\"" << f2(kTop) << "\" x2=\"" << f2(x) << "\" y2=\"" << f2(kTop + ph)
       << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << f2(x) << "\" y=\"" << f2(kTop + ph + 16) << "\" text-anchor=\"middle\">"
       << tick_label(t, ax.log) << "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double y = py(t);
    os << "<line x1=\"" << f2(kLeft) << "\" y1=\"" << f2(y) << "\" x2=\"" << f2(kLeft + pw) << "\" y2=\"" << f2(y)
       << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << f2(kLeft - 6) << "\" y=\"" << f2(y + 4) << "\" text-anchor=\"end\">"
       << tick_label(t, ay.log) << "</text>\n";
  }
  os << "<text x=\"" << f2(kLeft + pw / 2) << "\" y=\"" << f2(kTop + ph + 40) << "\" text-anchor=\"middle\">"
     << escape(opts.x_label) << "</text>\n";
  os << "<text transform=\"translate(20," << f2(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(opts.y_label) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const std::string color = s.color.empty() ? palette(si) : s.color;
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (s.dashed) os << " stroke-dasharray=\"6 4\"";
    os << " points=\"";
    bool first = true;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      os << (first ? "" : " ") << f2(px(ax.map(s.x[i]))) << "," << f2(py(ay.map(s.y[i])));
      first = false;
    }
    os << "\"/>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(si);
    const double lx = kLeft + pw + 14;
    os << "<line x1=\"" << f2(lx) << "\" y1=\"" << f2(ly) << "\" x2=\"" << f2(lx + 24) << "\" y2=\"" << f2(ly)
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "")
       << "/>\n";
    os << "<text x=\"" << f2(lx + 30) << "\" y=\"" << f2(ly + 4) << "\">" << escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace sppa
