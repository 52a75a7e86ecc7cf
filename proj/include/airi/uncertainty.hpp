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

// Ensemble predictions, Z scores and binned percentile-ratio calibration of
// the predicted standard deviation.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "airi/error.hpp"
#include "airi/pagtn.hpp"
#include "json.hpp"

namespace airi {

struct EnsemblePrediction {
  double mean = 0.0;  // RI
  double std = 0.0;   // sample std of member outputs, RI
  std::vector<double> members;
  std::optional<double> corrected_std;
};

// Mean and sample (n - 1) standard deviation of member outputs.
inline EnsemblePrediction ensemble_stats(std::vector<double> members) {
  if (members.size() < 2) throw Error("an ensemble needs at least 2 members");
  EnsemblePrediction p;
  // Sorted summation makes the result independent of member order.
  std::vector<double> s = members;
  std::sort(s.begin(), s.end());
  double sum = 0.0;
  for (double v : s) sum += v;
  p.mean = sum / static_cast<double>(s.size());
  double ss = 0.0;
  for (double v : s) ss += (v - p.mean) * (v - p.mean);
  p.std = std::sqrt(ss / static_cast<double>(s.size() - 1));
  p.members = std::move(members);
  return p;
}

inline void check_ensemble(const std::vector<Model>& models) {
  if (models.size() < 2) throw Error("an ensemble needs at least 2 models, got " + std::to_string(models.size()));
  for (std::size_t k = 1; k < models.size(); ++k) {
    if (!(models[k].config == models[0].config)) {
      throw Error("ensemble member " + std::to_string(k) + " has a different config than member 0");
    }
  }
}

inline std::vector<EnsemblePrediction> ensemble_predict(const std::vector<Model>& models,
                                                        const std::vector<const FeaturizedGraph*>& graphs,
                                                        int batch_size = 50) {
  check_ensemble(models);
  std::vector<std::vector<double>> per_model;
  for (const auto& m : models) per_model.push_back(predict_ri(m, graphs, batch_size));
  std::vector<EnsemblePrediction> out;
  out.reserve(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    std::vector<double> members;
    for (const auto& p : per_model) members.push_back(p[i]);
    out.push_back(ensemble_stats(std::move(members)));
  }
  return out;
}

inline std::vector<EnsemblePrediction> ensemble_predict(const std::vector<Model>& models,
                                                        const std::vector<FeaturizedGraph>& graphs,
                                                        int batch_size = 50) {
  std::vector<const FeaturizedGraph*> ptrs;
  for (const auto& g : graphs) ptrs.push_back(&g);
  return ensemble_predict(models, ptrs, batch_size);
}

inline EnsemblePrediction ensemble_predict(const std::vector<Model>& models, const FeaturizedGraph& graph) {
  return ensemble_predict(models, std::vector<const FeaturizedGraph*>{&graph}).front();
}

inline double z_score(double observed, double mean, double sigma) {
  if (!(sigma > 0.0)) throw UndefinedZError("Z score undefined for standard deviation " + std::to_string(sigma));
  return (observed - mean) / sigma;
}

// ---------------------------------------------------------------------------
// Percentiles: linear interpolation at position q/100 (n - 1) of the sorted
// values.

inline double percentile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error("percentile of an empty set");
  if (!(q >= 0.0 && q <= 100.0)) throw Error("percentile level must lie in [0, 100]");
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return percentile_sorted(values, q);
}

// ---------------------------------------------------------------------------
// Calibration

// Signed error (observed - predicted) and predicted std of one structure.
struct Residual {
  double error = 0.0;
  double sigma = 0.0;
};

inline std::vector<Residual> residuals(const std::vector<EnsemblePrediction>& preds,
                                       const std::vector<double>& observed) {
  if (preds.size() != observed.size()) throw ShapeError("residuals: size mismatch");
  std::vector<Residual> out;
  out.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) out.push_back({observed[i] - preds[i].mean, preds[i].std});
  return out;
}

inline constexpr int kCalibrationVersion = 1;
inline constexpr int kDefaultMinBinCount = 10;

struct CalibrationTable {
  int p = 50;
  double b = 1.0;
  std::vector<double> bin_edges;  // bins.size() + 1 edges, edges[k] = k b
  std::vector<double> ratios;
  double fallback_ratio = 1.0;
  int min_bin_count = kDefaultMinBinCount;
  std::size_t fit_set_size = 0;

  std::size_t bin_of(double sigma) const {
    const double k = std::floor(sigma / b);
    if (!(k >= 0.0)) return 0;
    return std::min(static_cast<std::size_t>(std::min(k, 1e15)), ratios.size() - 1);
  }
  bool operator==(const CalibrationTable&) const = default;
};

inline CalibrationTable identity_calibration(double b = 1.0) {
  CalibrationTable t;
  t.b = b;
  t.bin_edges = {0.0, b};
  t.ratios = {1.0};
  return t;
}

// Multiplies sigma by the ratio of its bin; sigma beyond the last edge uses
// the last bin.
inline double apply_calibration(const CalibrationTable& table, double sigma) {
  if (!(sigma >= 0.0)) throw Error("predicted std must be non-negative");
  if (table.ratios.empty()) throw Error("calibration table has no bins");
  return sigma * table.ratios[table.bin_of(sigma)];
}

namespace detail {

// Residuals grouped into bins of width b, each bin's |error| and sigma sorted.
struct BinnedFit {
  double b = 0.0;
  std::vector<std::vector<double>> abs_error, sigma;
};

inline BinnedFit bin_fit_set(const std::vector<Residual>& fit, double b) {
  double max_sigma = 0.0;
  for (const auto& r : fit) {
    if (!(r.sigma >= 0.0) || !std::isfinite(r.sigma) || !std::isfinite(r.error)) {
      throw Error("calibration data must be finite with non-negative std");
    }
    max_sigma = std::max(max_sigma, r.sigma);
  }
  const auto bins = static_cast<std::size_t>(std::floor(max_sigma / b)) + 1;
  BinnedFit f;
  f.b = b;
  f.abs_error.resize(bins);
  f.sigma.resize(bins);
  for (const auto& r : fit) {
    const auto k = std::min(static_cast<std::size_t>(std::floor(r.sigma / b)), bins - 1);
    f.abs_error[k].push_back(std::abs(r.error));
    f.sigma[k].push_back(r.sigma);
  }
  for (auto& v : f.abs_error) std::sort(v.begin(), v.end());
  for (auto& v : f.sigma) std::sort(v.begin(), v.end());
  return f;
}

// Ratio of matching percentiles, or nullopt where it is not a usable
// positive number.
inline std::optional<double> percentile_ratio(const std::vector<double>& abs_error, const std::vector<double>& sigma,
                                              int p) {
  const double s = percentile_sorted(sigma, p);
  if (!(s > 0.0)) return std::nullopt;
  const double r = percentile_sorted(abs_error, p) / s;
  if (!(r > 0.0) || !std::isfinite(r)) return std::nullopt;
  return r;
}

inline CalibrationTable table_from_bins(const BinnedFit& f, double global_ratio, int p, int min_bin_count,
                                        std::size_t n) {
  CalibrationTable t;
  t.p = p;
  t.b = f.b;
  t.fallback_ratio = global_ratio;
  t.min_bin_count = min_bin_count;
  t.fit_set_size = n;
  for (std::size_t k = 0; k <= f.sigma.size(); ++k) t.bin_edges.push_back(static_cast<double>(k) * f.b);
  for (std::size_t k = 0; k < f.sigma.size(); ++k) {
    std::optional<double> r;
    if (static_cast<int>(f.sigma[k].size()) >= min_bin_count && !f.sigma[k].empty()) {
      r = percentile_ratio(f.abs_error[k], f.sigma[k], p);
    }
    t.ratios.push_back(r.value_or(global_ratio));
  }
  return t;
}

inline double global_ratio(const std::vector<Residual>& fit, int p) {
  std::vector<double> e, s;
  for (const auto& r : fit) {
    e.push_back(std::abs(r.error));
    s.push_back(r.sigma);
  }
  std::sort(e.begin(), e.end());
  std::sort(s.begin(), s.end());
  return percentile_ratio(e, s, p).value_or(1.0);
}

inline void check_calibration_args(int p, double b, int min_bin_count) {
  if (p < 50 || p > 99) throw Error("calibration percentile p must lie in [50, 99]");
  if (!(b > 0.0) || !std::isfinite(b)) throw Error("calibration bin width b must be positive");
  if (min_bin_count < 1) throw Error("min_bin_count must be positive");
}

}  // namespace detail

// Bins [0, b), [b, 2b), ... up to the largest sigma in the fit set. Each bin
// with at least min_bin_count points gets the ratio of the p-th percentile of
// |error| to the p-th percentile of sigma; other bins, and bins whose ratio
// is zero or undefined, get the ratio over the whole fit set (1 if that is
// undefined too).
inline CalibrationTable build_calibration(const std::vector<Residual>& fit, int p, double b,
                                          int min_bin_count = kDefaultMinBinCount) {
  if (fit.empty()) throw Error("calibration fit set is empty");
  detail::check_calibration_args(p, b, min_bin_count);
  return detail::table_from_bins(detail::bin_fit_set(fit, b), detail::global_ratio(fit, p), p, min_bin_count,
                                 fit.size());
}

struct ZSummary {
  double z_std = 0.0;          // population std
  double z_abs_p95 = 0.0;
  double z_abs_p95_ri = 0.0;   // z_abs_p95 times the mean std used
  std::size_t n = 0;
  std::size_t n_sigma_zero = 0;
};

// Z statistics of residuals scaled by `sigma`; zero sigmas are skipped and
// counted.
inline ZSummary summarize_z(const std::vector<double>& error, const std::vector<double>& sigma) {
  if (error.size() != sigma.size()) throw ShapeError("summarize_z: size mismatch");
  ZSummary s;
  std::vector<double> z, abs_z;
  double sigma_sum = 0.0;
  for (std::size_t i = 0; i < error.size(); ++i) {
    if (!(sigma[i] > 0.0)) {
      ++s.n_sigma_zero;
      continue;
    }
    z.push_back(error[i] / sigma[i]);
    abs_z.push_back(std::abs(z.back()));
    sigma_sum += sigma[i];
  }
  s.n = z.size();
  if (z.empty()) return s;
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(z.size());
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  s.z_std = std::sqrt(ss / static_cast<double>(z.size()));
  s.z_abs_p95 = percentile(abs_z, 95.0);
  s.z_abs_p95_ri = s.z_abs_p95 * sigma_sum / static_cast<double>(z.size());
  return s;
}

struct CalibrationCandidate {
  int p = 0;
  double b = 0.0;
  ZSummary val;
};

struct CalibrationSearch {
  CalibrationTable table;
  ZSummary val;  // corrected Z on the validation set for the chosen table
  std::vector<CalibrationCandidate> candidates;
};

struct CalibrationGrid {
  int p_min = 50, p_max = 99;
  double b_min = 2.0, b_max = 24.0, b_step = 1.0;
  int min_bin_count = kDefaultMinBinCount;
};

// Fits a table on `train` for every (p, b) and scores it on `val`. The chosen
// pair minimizes |std(Z) - 1|; ties go to the smaller z_abs_p95_ri, then to
// the earlier candidate (p, then b, ascending).
inline CalibrationSearch search_calibration(const std::vector<Residual>& train, const std::vector<Residual>& val,
                                            const CalibrationGrid& grid = {}) {
  if (train.empty() || val.empty()) throw Error("calibration search needs non-empty train and validation sets");
  if (grid.p_min > grid.p_max || grid.b_min > grid.b_max || !(grid.b_step > 0.0)) {
    throw Error("empty calibration search range");
  }
  std::vector<double> bs;
  for (int k = 0;; ++k) {
    const double b = grid.b_min + k * grid.b_step;
    if (b > grid.b_max + 1e-9 * grid.b_step) break;
    bs.push_back(b);
  }
  std::vector<detail::BinnedFit> binned;
  for (int p = grid.p_min; p <= grid.p_max; ++p) detail::check_calibration_args(p, bs.front(), grid.min_bin_count);
  for (double b : bs) binned.push_back(detail::bin_fit_set(train, b));

  std::vector<double> val_error, corrected(val.size());
  for (const auto& r : val) val_error.push_back(r.error);

  CalibrationSearch best;
  bool have = false;
  double best_key1 = 0.0, best_key2 = 0.0;
  for (int p = grid.p_min; p <= grid.p_max; ++p) {
    const double g = detail::global_ratio(train, p);
    for (const auto& f : binned) {
      CalibrationTable t = detail::table_from_bins(f, g, p, grid.min_bin_count, train.size());
      for (std::size_t i = 0; i < val.size(); ++i) corrected[i] = apply_calibration(t, val[i].sigma);
      const ZSummary z = summarize_z(val_error, corrected);
      best.candidates.push_back({p, f.b, z});
      if (z.n == 0) continue;
      const double k1 = std::abs(z.z_std - 1.0), k2 = z.z_abs_p95_ri;
      if (!have || k1 < best_key1 || (k1 == best_key1 && k2 < best_key2)) {
        have = true;
        best_key1 = k1;
        best_key2 = k2;
        best.table = std::move(t);
        best.val = z;
      }
    }
  }
  if (!have) throw Error("no validation record has a positive predicted std");
  return best;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json calibration_to_json(const CalibrationTable& t) {
  return nlohmann::json{{"version", kCalibrationVersion},
                        {"p", t.p},
                        {"b", t.b},
                        {"bin_edges", t.bin_edges},
                        {"ratios", t.ratios},
                        {"fallback_ratio", t.fallback_ratio},
                        {"min_bin_count", t.min_bin_count},
                        {"fit_set_size", t.fit_set_size}};
}

inline CalibrationTable calibration_from_json(const nlohmann::json& j) {
  CalibrationTable t;
  try {
    const int version = j.at("version").get<int>();
    if (version != kCalibrationVersion) {
      throw VersionError("unsupported calibration version " + std::to_string(version));
    }
    j.at("p").get_to(t.p);
    j.at("b").get_to(t.b);
    j.at("bin_edges").get_to(t.bin_edges);
    j.at("ratios").get_to(t.ratios);
    j.at("fallback_ratio").get_to(t.fallback_ratio);
    j.at("min_bin_count").get_to(t.min_bin_count);
    j.at("fit_set_size").get_to(t.fit_set_size);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad calibration file: ") + e.what());
  }
  if (t.ratios.empty() || t.bin_edges.size() != t.ratios.size() + 1) {
    throw FormatError("calibration file: need one more bin edge than ratios");
  }
  if (!(t.b > 0.0)) throw FormatError("calibration file: b must be positive");
  for (std::size_t k = 0; k + 1 < t.bin_edges.size(); ++k) {
    if (!(t.bin_edges[k] < t.bin_edges[k + 1])) throw FormatError("calibration file: bin edges must increase");
  }
  for (double r : t.ratios) {
    if (!(r > 0.0) || !std::isfinite(r)) throw FormatError("calibration file: ratios must be finite and positive");
  }
  return t;
}

inline void save_calibration(const CalibrationTable& t, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  os << calibration_to_json(t).dump(2) << '\n';
  if (!os) throw Error("write failed: " + path);
}

inline CalibrationTable load_calibration(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return calibration_from_json(j);
}

}  // namespace airi
