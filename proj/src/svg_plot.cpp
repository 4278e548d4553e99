#include "netres/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace netres {

namespace {

constexpr int kWidth = 960;
constexpr int kHeight = 540;
constexpr int kMarginL = 76;
constexpr int kMarginR = 24;
constexpr int kMarginT = 46;
constexpr int kMarginB = 56;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series, const std::vector<double>& vlines) {
  std::size_t max_len = 0;
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();
  for (const PlotSeries& s : series) {
    max_len = std::max(max_len, s.y.size());
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (max_len == 0 || !std::isfinite(y_min)) throw std::invalid_argument("svg: nothing to plot");
  if (y_min == y_max) {
    y_min -= 1;
    y_max += 1;
  }
  const double pad = (y_max - y_min) * 0.05;
  y_min -= pad;
  y_max += pad;

  // x spans exactly [1, T]
  const double x_min = 1;
  const double x_max = static_cast<double>(std::max<std::size_t>(max_len, 2));
  const double plot_w = kWidth - kMarginL - kMarginR;
  const double plot_h = kHeight - kMarginT - kMarginB;
  auto sx = [&](double x) { return kMarginL + (x - x_min) / (x_max - x_min) * plot_w; };
  auto sy = [&](double y) { return kMarginT + (y_max - y) / (y_max - y_min) * plot_h; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write svg: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << xml_escape(title) << "</text>\n";

  // axes
  out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";
  const int n_ticks = 6;
  for (int i = 0; i < n_ticks; ++i) {
    const double fx = x_min + (x_max - x_min) * i / (n_ticks - 1);
    const double fy = y_min + (y_max - y_min) * i / (n_ticks - 1);
    out << "<line x1=\"" << fmt(sx(fx)) << "\" y1=\"" << kMarginT + plot_h << "\" x2=\""
        << fmt(sx(fx)) << "\" y2=\"" << fmt(kMarginT + plot_h + 5) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << fmt(sx(fx)) << "\" y=\"" << fmt(kMarginT + plot_h + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(fx)
        << "</text>\n";
    out << "<line x1=\"" << kMarginL - 5 << "\" y1=\"" << fmt(sy(fy)) << "\" x2=\"" << kMarginL
        << "\" y2=\"" << fmt(sy(fy)) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << kMarginL - 9 << "\" y=\"" << fmt(sy(fy) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(fy)
        << "</text>\n";
  }
  out << "<text x=\"" << kMarginL + plot_w / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << xml_escape(x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << kMarginT + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
      << kMarginT + plot_h / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

  for (double vx : vlines) {
    if (vx < x_min || vx > x_max) continue;
    out << "<line x1=\"" << fmt(sx(vx)) << "\" y1=\"" << kMarginT << "\" x2=\"" << fmt(sx(vx))
        << "\" y2=\"" << fmt(kMarginT + plot_h)
        << "\" stroke=\"#999\" stroke-dasharray=\"4,3\"/>\n";
  }

  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const std::string color =
        s.color.empty() ? kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))] : s.color;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      out << fmt(sx(static_cast<double>(i + 1))) << ',' << fmt(sy(s.y[i])) << ' ';
    }
    out << "\"/>\n";
    // legend swatch + label
    const double ly = kMarginT + 14 + 16 * static_cast<double>(si);
    out << "<line x1=\"" << kMarginL + plot_w - 150 << "\" y1=\"" << fmt(ly) << "\" x2=\""
        << kMarginL + plot_w - 126 << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kMarginL + plot_w - 120 << "\" y=\"" << fmt(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(s.label)
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("short write on svg: " + path);
}

}  // namespace netres
