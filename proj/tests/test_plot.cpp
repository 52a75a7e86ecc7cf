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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "airi/plot.hpp"

namespace {

using namespace airi;

// Parses a sidecar into rows of numbers.
std::vector<std::vector<double>> sidecar(const std::string& csv_text) {
  std::istringstream is(csv_text);
  const auto rows = csv::read(is);
  std::vector<std::vector<double>> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::vector<double> r;
    for (const auto& f : rows[i]) r.push_back(*parse_double(f));
    out.push_back(r);
  }
  return out;
}

std::vector<PredictionRow> dump(std::mt19937_64& rng, int n, double sym_noise) {
  std::normal_distribution<double> nd(0, sym_noise);
  std::uniform_real_distribution<double> us(2, 30);
  std::vector<PredictionRow> rows;
  for (int i = 0; i < n; ++i) {
    PredictionRow r;
    r.id = "r" + std::to_string(i);
    r.ri_pred = 1000 + i;
    r.ri_obs = r.ri_pred + nd(rng);
    r.sigma_pred = us(rng);
    r.sigma_corrected = 1.5 * r.sigma_pred;
    set_z(r);
    rows.push_back(r);
  }
  return rows;
}

TEST(Histogram, CountsSumToN) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd(0, 3);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(1 + t * 7);
    for (auto& x : v) x = nd(rng);
    const auto h = plot::auto_histogram(v);
    std::size_t total = 0;
    for (auto c : h.counts) total += c;
    EXPECT_EQ(total, v.size());
    EXPECT_EQ(h.edges.size(), h.counts.size() + 1);
    for (std::size_t k = 1; k < h.edges.size(); ++k) EXPECT_LT(h.edges[k - 1], h.edges[k]);
  }
}

TEST(ErrorHist, SymmetricErrorsAndConservation) {
  std::mt19937_64 rng(32);
  auto rows = dump(rng, 4000, 20.0);
  const auto fig = plot::error_hist(rows);
  const auto bins = sidecar(fig.csv);
  double total = 0, below = 0, above = 0;
  for (const auto& b : bins) {
    total += b[2];
    const double mid = (b[0] + b[1]) / 2;
    (mid < 0 ? below : above) += b[2];
  }
  EXPECT_EQ(total, 4000);
  EXPECT_NEAR(below / total, 0.5, 0.05);
  EXPECT_NE(fig.svg.find("<svg"), std::string::npos);
  EXPECT_NE(fig.svg.find("stroke=\"red\""), std::string::npos);  // percentile markers
  EXPECT_NE(fig.svg.find("95%"), std::string::npos);
}

TEST(ZHist, AllZeroGivesSingleOccupiedBin) {
  std::vector<PredictionRow> rows;
  for (int i = 0; i < 25; ++i) {
    PredictionRow r;
    r.id = "r" + std::to_string(i);
    r.ri_pred = 500;
    r.ri_obs = 500;
    r.sigma_pred = 2;
    set_z(r);
    rows.push_back(r);
  }
  const auto bins = sidecar(plot::z_hist(rows).csv);
  int occupied = 0;
  for (const auto& b : bins) {
    if (b[3] > 0) {
      ++occupied;
      EXPECT_EQ(b[3], 25);
      EXPECT_EQ(b[2], 25);
    }
  }
  EXPECT_EQ(occupied, 1);
}

TEST(ZHist, BothSeriesSumToN) {
  std::mt19937_64 rng(33);
  const auto rows = dump(rng, 500, 10.0);
  const auto fig = plot::z_hist(rows);
  double raw = 0, corrected = 0;
  for (const auto& b : sidecar(fig.csv)) {
    raw += b[2];
    corrected += b[3];
  }
  EXPECT_EQ(raw, 500);
  EXPECT_EQ(corrected, 500);
  EXPECT_NE(fig.svg.find("<polyline"), std::string::npos);  // outline series
  EXPECT_NE(fig.svg.find("fill=\"darkorange\""), std::string::npos);
}

TEST(ZHist, NeedsZ) {
  PredictionRow r;
  r.id = "a";
  r.ri_pred = 1;
  EXPECT_THROW(plot::z_hist({r}), DataError);
  EXPECT_THROW(plot::error_hist({r}), DataError);
}

TEST(RatioCurve, IdentityTableIsFlat) {
  std::mt19937_64 rng(34);
  const auto rows = dump(rng, 300, 10.0);
  CalibrationTable t;
  t.b = 5;
  for (int k = 0; k <= 6; ++k) t.bin_edges.push_back(5.0 * k);
  t.ratios.assign(6, 1.0);
  const auto bins = sidecar(plot::ratio_curve(t, rows).csv);
  ASSERT_EQ(bins.size(), 6u);
  double total = 0;
  for (const auto& b : bins) {
    EXPECT_EQ(b[2], 1.0);
    total += b[3];
  }
  EXPECT_EQ(total, 300);
}

TEST(Figures, Deterministic) {
  std::mt19937_64 a(35), b(35);
  const auto ra = dump(a, 200, 15.0), rb = dump(b, 200, 15.0);
  EXPECT_EQ(plot::error_hist(ra).svg, plot::error_hist(rb).svg);
  EXPECT_EQ(plot::z_hist(ra).svg, plot::z_hist(rb).svg);
  EXPECT_EQ(plot::z_hist(ra).csv, plot::z_hist(rb).csv);
}

}  // namespace
