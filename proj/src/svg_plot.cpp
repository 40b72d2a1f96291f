#include "kflow/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace kflow {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

double transform(double v, bool log_scale) { return log_scale ? std::log10(v) : v; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void write_svg_plot(std::ostream& out, const std::vector<SvgSeries>& series,
                    const SvgPlotOptions& opt) {
  const double ml = 70, mr = 20, mt = opt.title.empty() ? 16 : 36, mb = 48;
  const double pw = opt.width - ml - mr;
  const double ph = opt.height - mt - mb;

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (opt.log_x && x <= 0.0) continue;
      if (opt.log_y && y <= 0.0) continue;
      x_lo = std::min(x_lo, transform(x, opt.log_x));
      x_hi = std::max(x_hi, transform(x, opt.log_x));
      y_lo = std::min(y_lo, transform(y, opt.log_y));
      y_hi = std::max(y_hi, transform(y, opt.log_y));
    }
  if (!(x_lo < x_hi)) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (!(y_lo < y_hi)) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  const double y_pad = 0.05 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;

  auto px = [&](double x) { return ml + pw * (transform(x, opt.log_x) - x_lo) / (x_hi - x_lo); };
  auto py = [&](double y) { return mt + ph * (1.0 - (transform(y, opt.log_y) - y_lo) / (y_hi - y_lo)); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
      << opt.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    out << "<text x=\"" << opt.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
        << opt.title << "</text>\n";

  // frame
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  // ticks: decades on log axes, 6 uniform ticks otherwise
  auto emit_x_tick = [&](double v, const std::string& label) {
    const double x = ml + pw * (v - x_lo) / (x_hi - x_lo);
    out << "<line x1=\"" << x << "\" y1=\"" << mt + ph << "\" x2=\"" << x << "\" y2=\""
        << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << mt + ph + 18 << "\" text-anchor=\"middle\">" << label
        << "</text>\n";
  };
  auto emit_y_tick = [&](double v, const std::string& label) {
    const double y = mt + ph * (1.0 - (v - y_lo) / (y_hi - y_lo));
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << y << "\" x2=\"" << ml << "\" y2=\"" << y
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << label
        << "</text>\n";
  };
  if (opt.log_x) {
    for (int d = static_cast<int>(std::ceil(x_lo)); d <= static_cast<int>(std::floor(x_hi)); ++d)
      emit_x_tick(d, "1e" + std::to_string(d));
  } else {
    for (int i = 0; i <= 5; ++i) {
      const double v = x_lo + (x_hi - x_lo) * i / 5;
      emit_x_tick(v, fmt(v));
    }
  }
  if (opt.log_y) {
    for (int d = static_cast<int>(std::ceil(y_lo)); d <= static_cast<int>(std::floor(y_hi)); ++d)
      emit_y_tick(d, "1e" + std::to_string(d));
  } else {
    for (int i = 0; i <= 5; ++i) {
      const double v = y_lo + (y_hi - y_lo) * i / 5;
      emit_y_tick(v, fmt(v));
    }
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << opt.height - 10
      << "\" text-anchor=\"middle\">" << opt.x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << mt + ph / 2 << ")\">" << opt.y_label << "</text>\n";

  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof *kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[s].points) {
      if (opt.log_x && x <= 0.0) continue;
      if (opt.log_y && y <= 0.0) continue;
      out << fmt(px(x)) << "," << fmt(py(y)) << " ";
    }
    out << "\"/>\n";
    if (!series[s].label.empty()) {
      const double lx = ml + pw - 140, ly = mt + 16 + 16 * s;
      out << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 24 << "\" y2=\""
          << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
      out << "<text x=\"" << lx + 30 << "\" y=\"" << ly << "\">" << series[s].label << "</text>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace kflow
