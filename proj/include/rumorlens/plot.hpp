#pragma once

// Claim timeline scatter: binned means as markers sized by tweet count and
// coloured by mean FCR, written as SVG with a companion CSV.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rumorlens/corpus.hpp"
#include "rumorlens/csv.hpp"
#include "rumorlens/error.hpp"
#include "rumorlens/features.hpp"

namespace rumorlens {

struct Rgb {
  int r, g, b;
};

inline constexpr Rgb kFcrLow{0x2c, 0x7b, 0xb6};   // FCR 0
inline constexpr Rgb kFcrHigh{0xd7, 0x19, 0x1c};  // FCR 1
inline constexpr double kUnitMarkerArea = 60.0;   // px^2 per tweet

/// Linear per-channel interpolation, rounded to the nearest integer; FCR is
/// clamped to [0, 1].
inline std::string fcr_color(double fcr) {
  const double f = std::clamp(fcr, 0.0, 1.0);
  auto mix = [f](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * f)); };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(kFcrLow.r, kFcrHigh.r), mix(kFcrLow.g, kFcrHigh.g),
                mix(kFcrLow.b, kFcrHigh.b));
  return buf;
}

struct PlotPoint {
  std::int64_t bin = 0;
  std::size_t count = 0;
  double mean_value = 0.0;
  double mean_fcr = 0.0;
  double area = 0.0;
  std::string color;
  bool resolving = false;  // bin 0, drawn as a triangle
};

/// `values` and `fcr` are aligned with claim.tweets.
inline std::vector<PlotPoint> timeline_points(const Claim& claim, std::span<const double> values,
                                              std::span<const double> fcr,
                                              std::int64_t bin_seconds = kDefaultBinWidth,
                                              double unit_area = kUnitMarkerArea) {
  const auto value_bins = bin_timeline(claim, values, bin_seconds);
  const auto fcr_bins = bin_timeline(claim, fcr, bin_seconds);
  std::vector<PlotPoint> points;
  for (std::size_t k = 0; k < value_bins.size(); ++k) {
    PlotPoint p;
    p.bin = value_bins[k].bin;
    p.count = value_bins[k].count;
    p.mean_value = value_bins[k].mean;
    p.mean_fcr = fcr_bins[k].mean;
    p.area = unit_area * static_cast<double>(p.count);
    p.color = fcr_color(p.mean_fcr);
    p.resolving = p.bin == 0;
    points.push_back(std::move(p));
  }
  return points;
}

inline void write_plot_csv(std::ostream& out, const std::vector<PlotPoint>& points) {
  write_csv_row(out, {"bin", "count", "mean_value", "mean_fcr", "area", "color", "marker"});
  for (const auto& p : points) {
    write_csv_row(out, {std::to_string(p.bin), std::to_string(p.count), format_double(p.mean_value),
                        format_double(p.mean_fcr), format_double(p.area), p.color,
                        p.resolving ? "triangle" : "circle"});
  }
}

namespace plot_detail {

inline std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace plot_detail

inline std::string render_timeline_svg(const std::vector<PlotPoint>& points, const std::string& claim_id,
                                       const std::string& variable) {
  using plot_detail::fixed;
  constexpr double width = 720, height = 420, left = 60, right = 30, top = 40, bottom = 50;
  std::int64_t min_bin = 0, max_bin = 0;
  double lo = 0.0, hi = 1.0;
  for (const auto& p : points) {
    min_bin = std::min(min_bin, p.bin);
    max_bin = std::max(max_bin, p.bin);
    lo = std::min(lo, p.mean_value);
    hi = std::max(hi, p.mean_value);
  }
  const double span_bins = static_cast<double>(std::max<std::int64_t>(max_bin - min_bin, 1));
  auto px = [&](std::int64_t bin) {
    return left + (static_cast<double>(bin - min_bin) + 0.5) / (span_bins + 1.0) * (width - left - right);
  };
  auto py = [&](double v) { return height - bottom - (v - lo) / (hi - lo) * (height - top - bottom); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<!-- x: bin index (bin 0 holds the resolving tweet); y: mean " << variable << " per bin -->\n"
      << "<!-- marker area = " << format_double(kUnitMarkerArea)
      << " px^2 x tweet count; circle r = sqrt(area/pi); triangle: equilateral with the same area -->\n"
      << "<!-- fill = round(low + (high - low) x clamp(mean FCR, 0, 1)) per channel, low = "
      << fcr_color(0.0) << " (FCR 0), high = " << fcr_color(1.0) << " (FCR 1) -->\n"
      << "<title>" << claim_id << ": " << variable << "</title>\n"
      << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
      << height - bottom << "\" stroke=\"#333\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
      << "\" stroke=\"#333\"/>\n"
      << "<line x1=\"" << fixed(px(0)) << "\" y1=\"" << top << "\" x2=\"" << fixed(px(0)) << "\" y2=\""
      << height - bottom << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">bin ("
      << "relative to resolution)</text>\n"
      << "<text x=\"16\" y=\"" << height / 2 << "\" transform=\"rotate(-90 16 " << height / 2
      << ")\" text-anchor=\"middle\">" << variable << "</text>\n";
  for (double tick : {lo, (lo + hi) / 2.0, hi}) {
    svg << "<text x=\"" << left - 6 << "\" y=\"" << fixed(py(tick) + 4) << "\" text-anchor=\"end\">"
        << fixed(tick) << "</text>\n";
  }
  for (const auto& p : points) {
    const double cx = px(p.bin), cy = py(p.mean_value);
    svg << "<g class=\"marker\" data-bin=\"" << p.bin << "\" data-count=\"" << p.count << "\" data-mean=\""
        << format_double(p.mean_value) << "\" data-fcr=\"" << format_double(p.mean_fcr) << "\" data-area=\""
        << format_double(p.area) << "\">";
    if (p.resolving) {
      // centroid at (cx, cy); height = side * sqrt(3)/2
      const double side = std::sqrt(4.0 * p.area / std::sqrt(3.0));
      const double h = side * std::sqrt(3.0) / 2.0;
      svg << "<polygon points=\"" << fixed(cx) << ',' << fixed(cy - 2.0 * h / 3.0) << ' '
          << fixed(cx - side / 2.0) << ',' << fixed(cy + h / 3.0) << ' ' << fixed(cx + side / 2.0) << ','
          << fixed(cy + h / 3.0) << "\" fill=\"" << p.color << "\" stroke=\"#000\"/>";
    } else {
      svg << "<circle cx=\"" << fixed(cx) << "\" cy=\"" << fixed(cy) << "\" r=\""
          << fixed(std::sqrt(p.area / std::numbers::pi)) << "\" fill=\"" << p.color
          << "\" fill-opacity=\"0.85\" stroke=\"#000\"/>";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace rumorlens
