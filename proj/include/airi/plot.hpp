// Copyright 2026 The AIRI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Histograms and the calibration ratio curve as SVG, each with a CSV sidecar
// holding the exact bins.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "airi/metrics.hpp"
#include "airi/uncertainty.hpp"

namespace airi::plot {

struct Histogram {
  std::vector<double> edges;  // counts.size() + 1
  std::vector<std::size_t> counts;
};

// Equal-width bins over [lo, hi]; the last bin is closed. Values outside the
// range go to the nearest end bin.
inline Histogram histogram(const std::vector<double>& values, double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw Error("histogram: need bins >= 1 and hi > lo");
  Histogram h;
  for (int k = 0; k <= bins; ++k) h.edges.push_back(k == bins ? hi : lo + (hi - lo) * k / bins);
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto k = static_cast<long>(std::floor((v - lo) / (hi - lo) * bins));
    k = std::clamp(k, 0L, static_cast<long>(bins) - 1);
    ++h.counts[k];
  }
  return h;
}

// Range [min, max] split into round(sqrt(n)) bins (5 to 100); a single
// distinct value gets one unit-wide bin around it.
inline Histogram auto_histogram(const std::vector<double>& values) {
  if (values.empty()) throw Error("histogram of an empty set");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  if (*mn == *mx) return histogram(values, *mn - 0.5, *mx + 0.5, 1);
  const int bins = std::clamp(static_cast<int>(std::lround(std::sqrt(values.size()))), 5, 100);
  return histogram(values, *mn, *mx, bins);
}

struct Figure {
  std::string svg;
  std::string csv;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Plot frame with linear axes; data coordinates map into the inner box.
class Canvas {
 public:
  static constexpr double kW = 720, kH = 440, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

  Canvas(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    if (!(x1_ > x0_)) x1_ = x0_ + 1.0;
    if (!(y1_ > y0_)) y1_ = y0_ + 1.0;
  }

  double x(double v) const { return kLeft + (v - x0_) / (x1_ - x0_) * (kW - kLeft - kRight); }
  double y(double v) const { return kH - kBottom - (v - y0_) / (y1_ - y0_) * (kH - kTop - kBottom); }

  void rect(double xa, double xb, double ya, double yb, const std::string& style) {
    const double left = x(xa), right = x(xb), top = y(yb), bottom = y(ya);
    os_ << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left)
        << "\" height=\"" << num(bottom - top) << "\" " << style << "/>\n";
  }

  void line(double xa, double ya, double xb, double yb, const std::string& style) {
    os_ << "<line x1=\"" << num(x(xa)) << "\" y1=\"" << num(y(ya)) << "\" x2=\"" << num(x(xb)) << "\" y2=\""
        << num(y(yb)) << "\" " << style << "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& style) {
    os_ << "<polyline points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      os_ << (i ? " " : "") << num(x(pts[i].first)) << ',' << num(y(pts[i].second));
    }
    os_ << "\" " << style << "/>\n";
  }

  void text(double px, double py, const std::string& s, const std::string& anchor = "middle", int size = 12) {
    os_ << "<text x=\"" << num(px) << "\" y=\"" << num(py) << "\" font-size=\"" << size << "\" text-anchor=\""
        << anchor << "\">" << s << "</text>\n";
  }

  std::string finish(const std::string& title, const std::string& xlabel, const std::string& ylabel) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" font-family=\"sans-serif\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << os_.str();
    const double bx0 = kLeft, bx1 = kW - kRight, by0 = kTop, by1 = kH - kBottom;
    out << "<rect x=\"" << num(bx0) << "\" y=\"" << num(by0) << "\" width=\"" << num(bx1 - bx0) << "\" height=\""
        << num(by1 - by0) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
      const double xv = x0_ + (x1_ - x0_) * k / 5, yv = y0_ + (y1_ - y0_) * k / 5;
      out << "<text x=\"" << num(x(xv)) << "\" y=\"" << num(by1 + 18) << "\" font-size=\"11\" text-anchor=\"middle\">"
          << label(xv) << "</text>\n";
      out << "<text x=\"" << num(bx0 - 6) << "\" y=\"" << num(y(yv) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
          << label(yv) << "</text>\n";
    }
    out << "<text x=\"" << num((bx0 + bx1) / 2) << "\" y=\"" << num(kH - 15)
        << "\" font-size=\"13\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    out << "<text x=\"15\" y=\"" << num((by0 + by1) / 2) << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
        << num((by0 + by1) / 2) << ")\">" << ylabel << "</text>\n";
    out << "<text x=\"" << num(kW / 2) << "\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">" << title
        << "</text>\n";
    out << "</svg>\n";
    return out.str();
  }

 private:
  double x0_, x1_, y0_, y1_;
  std::ostringstream os_;
};

inline std::size_t max_count(const Histogram& h) {
  return h.counts.empty() ? 0 : *std::max_element(h.counts.begin(), h.counts.end());
}

}  // namespace detail

// Signed errors ri_pred - ri_obs with markers at the 50/90/95/99th
// percentiles of the absolute error.
inline Figure error_hist(const std::vector<PredictionRow>& rows) {
  std::vector<double> err, pred, obs;
  for (const auto& r : rows) {
    if (!r.ri_obs) continue;
    err.push_back(r.ri_pred - *r.ri_obs);
    pred.push_back(r.ri_pred);
    obs.push_back(*r.ri_obs);
  }
  if (err.empty()) throw DataError("error-hist needs rows with ri_obs");
  const Histogram h = auto_histogram(err);
  const auto pct = abs_error_percentiles(pred, obs, {kAbsErrorLevels.begin(), kAbsErrorLevels.end()});

  detail::Canvas c(h.edges.front(), h.edges.back(), 0.0, static_cast<double>(detail::max_count(h)) * 1.1);
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    if (h.counts[k]) {
      c.rect(h.edges[k], h.edges[k + 1], 0.0, static_cast<double>(h.counts[k]),
             "fill=\"steelblue\" stroke=\"white\" stroke-width=\"0.5\"");
    }
  }
  const double top = static_cast<double>(detail::max_count(h)) * 1.1;
  for (std::size_t i = 0; i < pct.size(); ++i) {
    for (double sgn : {-1.0, 1.0}) {
      const double v = sgn * pct[i];
      if (v < h.edges.front() || v > h.edges.back()) continue;
      c.line(v, 0.0, v, top, "stroke=\"red\" stroke-dasharray=\"4 3\"");
      if (sgn > 0) c.text(c.x(v) + 3, c.y(top) + 14 + 13 * static_cast<double>(i),
                          detail::label(kAbsErrorLevels[i]) + "%: " + detail::label(pct[i]), "start", 11);
    }
  }
  std::ostringstream csv;
  csv << "bin_lo,bin_hi,count\n";
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    csv << format_exact(h.edges[k]) << ',' << format_exact(h.edges[k + 1]) << ',' << h.counts[k] << '\n';
  }
  return {c.finish("Prediction errors (n=" + std::to_string(err.size()) + ")", "predicted - observed RI", "count"),
          csv.str()};
}

// Z scores with the raw std (outline) and the corrected std (filled), on
// shared bins of width 0.25.
inline Figure z_hist(const std::vector<PredictionRow>& rows) {
  std::vector<double> raw, corrected;
  for (const auto& r : rows) {
    if (!r.z) continue;
    corrected.push_back(*r.z);
    if (r.ri_obs && r.sigma_pred > 0.0) raw.push_back((*r.ri_obs - r.ri_pred) / r.sigma_pred);
  }
  if (corrected.empty()) throw DataError("z-hist needs rows with a z value");
  constexpr double kWidth = 0.25;
  double lo = corrected.front(), hi = corrected.front();
  for (const auto* v : {&raw, &corrected}) {
    for (double z : *v) {
      lo = std::min(lo, z);
      hi = std::max(hi, z);
    }
  }
  lo = std::floor(lo / kWidth) * kWidth;
  hi = std::max(lo + kWidth, std::ceil(hi / kWidth) * kWidth);
  int bins = static_cast<int>(std::lround((hi - lo) / kWidth));
  if (bins > 400) bins = 400;
  const Histogram hr = raw.empty() ? histogram({}, lo, hi, bins) : histogram(raw, lo, hi, bins);
  const Histogram hc = histogram(corrected, lo, hi, bins);

  const double top = static_cast<double>(std::max(detail::max_count(hr), detail::max_count(hc))) * 1.1;
  detail::Canvas c(lo, hi, 0.0, top);
  for (std::size_t k = 0; k < hc.counts.size(); ++k) {
    if (hc.counts[k]) {
      c.rect(hc.edges[k], hc.edges[k + 1], 0.0, static_cast<double>(hc.counts[k]),
             "fill=\"darkorange\" fill-opacity=\"0.6\" stroke=\"none\"");
    }
  }
  std::vector<std::pair<double, double>> outline;
  for (std::size_t k = 0; k < hr.counts.size(); ++k) {
    outline.emplace_back(hr.edges[k], static_cast<double>(hr.counts[k]));
    outline.emplace_back(hr.edges[k + 1], static_cast<double>(hr.counts[k]));
  }
  if (!raw.empty()) c.polyline(outline, "fill=\"none\" stroke=\"black\" stroke-width=\"1.2\"");
  c.text(detail::Canvas::kW - 30, 60, "outline: uncorrected", "end", 11);
  c.text(detail::Canvas::kW - 30, 74, "filled: corrected", "end", 11);

  std::ostringstream csv;
  csv << "bin_lo,bin_hi,count_uncorrected,count_corrected\n";
  for (std::size_t k = 0; k < hc.counts.size(); ++k) {
    csv << format_exact(hc.edges[k]) << ',' << format_exact(hc.edges[k + 1]) << ',' << hr.counts[k] << ','
        << hc.counts[k] << '\n';
  }
  return {c.finish("Z scores (n=" + std::to_string(corrected.size()) + ")", "Z", "count"), csv.str()};
}

// Per-bin ratio against predicted std; counts are dump rows by sigma_pred bin.
inline Figure ratio_curve(const CalibrationTable& table, const std::vector<PredictionRow>& rows) {
  if (table.ratios.empty()) throw Error("calibration table has no bins");
  std::vector<std::size_t> counts(table.ratios.size(), 0);
  for (const auto& r : rows) ++counts[table.bin_of(r.sigma_pred)];
  const double rmax = *std::max_element(table.ratios.begin(), table.ratios.end());
  detail::Canvas c(0.0, table.bin_edges.back(), 0.0, std::max(1.0, rmax) * 1.15);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < table.ratios.size(); ++k) {
    pts.emplace_back(table.bin_edges[k], table.ratios[k]);
    pts.emplace_back(table.bin_edges[k + 1], table.ratios[k]);
  }
  c.line(0.0, 1.0, table.bin_edges.back(), 1.0, "stroke=\"gray\" stroke-dasharray=\"4 3\"");
  c.polyline(pts, "fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\"");
  std::ostringstream csv;
  csv << "bin_lo,bin_hi,ratio,count\n";
  for (std::size_t k = 0; k < table.ratios.size(); ++k) {
    csv << format_exact(table.bin_edges[k]) << ',' << format_exact(table.bin_edges[k + 1]) << ','
        << format_exact(table.ratios[k]) << ',' << counts[k] << '\n';
  }
  return {c.finish("Calibration ratio, p=" + std::to_string(table.p) + ", b=" + detail::label(table.b),
                   "predicted std (RI)", "ratio"),
          csv.str()};
}

}  // namespace airi::plot
