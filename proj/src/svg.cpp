#include "spw/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "spw/error.hpp"

namespace spw::svg {
namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
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

struct Scale {
  double lo, hi;
  bool log;
  double pixel_lo, pixel_hi;

  double operator()(double v) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double t = ((log ? std::log10(v) : v) - a) / (b - a);
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }
};

Scale make_scale(double lo, double hi, bool log, double p0, double p1) {
  if (log) {
    if (!(lo > 0.0)) throw DomainError("svg: log axis needs positive data");
    if (hi <= lo) hi = lo * 10.0;
  } else if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {lo, hi, log, p0, p1};
}

void header(std::ostringstream& os, const Axes& axes) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << escape(axes.title) << "</text>\n";
}

void frame(std::ostringstream& os, const Axes& axes, const Scale& sx, const Scale& sy) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  os << "<path d=\"M" << num(x0) << ' ' << num(y1) << " L" << num(x0) << ' ' << num(y0) << " L" << num(x1) << ' '
     << num(y0) << "\" stroke=\"black\" fill=\"none\"/>\n";
  auto ticks = [](const Scale& s) {
    std::vector<double> t;
    if (s.log) {
      for (double e = std::floor(std::log10(s.lo)); e <= std::ceil(std::log10(s.hi)); e += 1.0) {
        const double v = std::pow(10.0, e);
        if (v >= s.lo * (1 - 1e-12) && v <= s.hi * (1 + 1e-12)) t.push_back(v);
      }
      if (t.empty()) t = {s.lo, s.hi};
    } else {
      for (int i = 0; i <= 4; ++i) t.push_back(s.lo + (s.hi - s.lo) * i / 4.0);
    }
    return t;
  };
  for (double v : ticks(sx)) {
    os << "<text x=\"" << num(sx(v)) << "\" y=\"" << num(y0 + 18) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
       << label(v) << "</text>\n";
  }
  for (double v : ticks(sy)) {
    os << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(sy(v) + 4) << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << label(v) << "</text>\n";
  }
  os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kHeight - 10) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
     << escape(axes.x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << num((y0 + y1) / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
     << num((y0 + y1) / 2) << ")\">" << escape(axes.y_label) << "</text>\n";
}

void legend(std::ostringstream& os, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kTop + 8 + 16.0 * static_cast<double>(i);
    os << "<rect x=\"" << num(kWidth - kRight - 150) << "\" y=\"" << num(y - 9) << "\" width=\"10\" height=\"10\" fill=\""
       << kPalette[i % 6] << "\"/>\n"
       << "<text x=\"" << num(kWidth - kRight - 135) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << escape(names[i]) << "</text>\n";
  }
}

}  // namespace

std::string histogram_plot(const Axes& axes, const std::vector<std::pair<std::string, Histogram>>& layers) {
  if (layers.empty()) throw DomainError("histogram_plot: nothing to draw");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, top = 0.0;
  for (const auto& [name, h] : layers) {
    lo = std::min(lo, h.edges.front());
    hi = std::max(hi, h.edges.back());
    for (auto c : h.counts) top = std::max(top, static_cast<double>(c));
  }
  const Scale sx = make_scale(lo, hi, false, kLeft, kWidth - kRight);
  const Scale sy = make_scale(0.0, std::max(top, 1.0), false, kHeight - kBottom, kTop);
  std::ostringstream os;
  header(os, axes);
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const auto& h = layers[li].second;
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      const double x0 = sx(h.edges[b]), x1 = sx(h.edges[b + 1]);
      const double y = sy(static_cast<double>(h.counts[b]));
      os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y) << "\" width=\"" << num(std::max(x1 - x0, 0.5))
         << "\" height=\"" << num(kHeight - kBottom - y) << "\" fill=\"" << kPalette[li % 6]
         << "\" fill-opacity=\"0.45\" stroke=\"none\"/>\n";
    }
  }
  frame(os, axes, sx, sy);
  std::vector<std::string> names;
  for (const auto& layer : layers) names.push_back(layer.first);
  legend(os, names);
  os << "</svg>\n";
  return os.str();
}

std::string line_plot(const Axes& axes, const std::vector<Series>& series) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw DomainError("line_plot: x and y differ in length");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  if (!std::isfinite(xlo)) throw DomainError("line_plot: nothing to draw");
  if (!axes.log_y) ylo = std::min(ylo, 0.0);
  const Scale sx = make_scale(xlo, xhi, axes.log_x, kLeft, kWidth - kRight);
  const Scale sy = make_scale(ylo, yhi, axes.log_y, kHeight - kBottom, kTop);
  std::ostringstream os;
  header(os, axes);
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    if (s.x.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << kPalette[si % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) os << (i ? " " : "") << num(sx(s.x[i])) << ',' << num(sy(s.y[i]));
    os << "\"/>\n";
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        os << "<circle cx=\"" << num(sx(s.x[i])) << "\" cy=\"" << num(sy(s.y[i])) << "\" r=\"2.5\" fill=\""
           << kPalette[si % 6] << "\"/>\n";
      }
    }
  }
  frame(os, axes, sx, sy);
  std::vector<std::string> names;
  for (const auto& s : series) names.push_back(s.name);
  legend(os, names);
  os << "</svg>\n";
  return os.str();
}

}  // namespace spw::svg
