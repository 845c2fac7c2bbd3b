#pragma once

// Coarse sparsity images. The matrix is binned into a grid of cells; each
// nonempty cell is drawn as a rectangle colored by the log of the largest
// magnitude it holds, from blue (smallest) to red (largest).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "fiedler/reorder.hpp"
#include "fiedler/sparse_core.hpp"

namespace fiedler {

struct SpyOptions {
  std::size_t grid = 128;     // cells per side, clamped to n
  double pixels = 512.0;      // image side length
  std::string title;
};

inline void write_spy_svg(std::ostream& out, const SparseMatrix& A, const SpyOptions& opts = {}) {
  const std::size_t n = A.rows();
  const std::size_t g = std::max<std::size_t>(1, std::min(opts.grid, n));
  std::vector<double> cell(g * g, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cols = A.row_cols(i);
    const auto vals = A.row_values(i);
    const std::size_t ci = i * g / n;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const std::size_t cj = static_cast<std::size_t>(cols[k]) * g / n;
      cell[ci * g + cj] = std::max(cell[ci * g + cj], std::abs(vals[k]));
    }
  }
  double lo = INFINITY, hi = 0.0;
  for (double v : cell)
    if (v > 0) {
      lo = std::min(lo, std::log10(v));
      hi = std::max(hi, std::log10(v));
    }

  const double side = opts.pixels / static_cast<double>(g);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.pixels << "\" height=\"" << opts.pixels
      << "\" viewBox=\"0 0 " << opts.pixels << " " << opts.pixels << "\">\n";
  if (!opts.title.empty()) out << "<title>" << opts.title << "</title>\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"black\"/>\n";
  char buf[160];
  for (std::size_t ci = 0; ci < g; ++ci)
    for (std::size_t cj = 0; cj < g; ++cj) {
      const double v = cell[ci * g + cj];
      if (v == 0.0) continue;
      const double t = hi > lo ? (std::log10(v) - lo) / (hi - lo) : 1.0;
      const int red = static_cast<int>(std::lround(255 * t));
      const int blue = 255 - red;
      std::snprintf(buf, sizeof buf, "<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" fill=\"rgb(%d,0,%d)\"/>\n",
                    static_cast<double>(cj) * side, static_cast<double>(ci) * side, side, side, red, blue);
      out << buf;
    }
  out << "</svg>\n";
}

// Bandweight profile plotted against log k.
inline void write_profile_svg(std::ostream& out, const std::vector<std::pair<std::string, BandweightProfile>>& series,
                              double width = 640, double height = 400) {
  const double margin = 50;
  std::size_t kmax = 1;
  for (const auto& [name, p] : series)
    if (!p.half_widths.empty()) kmax = std::max(kmax, p.half_widths.back());
  const double lmax = std::max(std::log10(static_cast<double>(kmax)), 1e-9);
  auto px = [&](std::size_t k) { return margin + (width - 2 * margin) * std::log10(static_cast<double>(k)) / lmax; };
  auto py = [&](double w) { return height - margin - (height - 2 * margin) * w; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << py(0) << "\" x2=\"" << width - margin << "\" y2=\"" << py(0)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << py(0) << "\" x2=\"" << margin << "\" y2=\"" << py(1)
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">half-width k (log)</text>\n";
  out << "<text x=\"12\" y=\"" << height / 2 << "\" transform=\"rotate(-90 12 " << height / 2
      << ")\" text-anchor=\"middle\">w_k</text>\n";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::size_t s = 0;
  char buf[96];
  for (const auto& [name, p] : series) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[s % 4] << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < p.half_widths.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(p.half_widths[i]), py(p.weights[i]));
      out << buf;
    }
    out << "\"/>\n";
    out << "<text x=\"" << margin + 10 << "\" y=\"" << margin + 18 * static_cast<double>(s) << "\" fill=\""
        << colors[s % 4] << "\">" << name << "</text>\n";
    ++s;
  }
  out << "</svg>\n";
}

}  // namespace fiedler
