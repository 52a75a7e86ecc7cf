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

// Prediction dumps and evaluation statistics.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "airi/dataset.hpp"
#include "airi/uncertainty.hpp"
#include "json.hpp"

namespace airi {

// ---------------------------------------------------------------------------
// Prediction dump CSV

struct PredictionRow {
  std::string id;
  std::string smiles;
  double ri_pred = 0.0;
  double sigma_pred = 0.0;
  std::optional<double> sigma_corrected;
  std::optional<double> ri_obs;
  std::optional<double> z;
  std::vector<std::string> tags;

  // Std used for Z: the corrected one when present.
  double sigma() const { return sigma_corrected.value_or(sigma_pred); }
  bool has_tag(const std::string& t) const { return std::find(tags.begin(), tags.end(), t) != tags.end(); }
  bool operator==(const PredictionRow&) const = default;
};

inline const std::vector<std::string>& dump_header() {
  static const std::vector<std::string> h = {"id",     "smiles", "ri_pred", "sigma_pred", "sigma_corrected",
                                             "ri_obs", "z",      "tags"};
  return h;
}

// Fills z from the observation and the (corrected) std; left empty when
// there is no observation or the std is zero.
inline void set_z(PredictionRow& r) {
  r.z.reset();
  if (r.ri_obs && r.sigma() > 0.0) r.z = z_score(*r.ri_obs, r.ri_pred, r.sigma());
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_g6(*v) : ""; }

inline void write_dump(std::ostream& os, const std::vector<PredictionRow>& rows) {
  csv::write_row(os, dump_header());
  for (const auto& r : rows) {
    csv::write_row(os, {r.id, r.smiles, format_g6(r.ri_pred), format_g6(r.sigma_pred),
                        format_optional(r.sigma_corrected), format_optional(r.ri_obs), format_optional(r.z),
                        join_tags(r.tags)});
  }
}

inline std::vector<PredictionRow> read_dump(std::istream& is) {
  const auto rows = csv::read(is);
  if (rows.empty() || rows[0] != dump_header()) {
    throw DataError("prediction dump header must be 'id,smiles,ri_pred,sigma_pred,sigma_corrected,ri_obs,z,tags'");
  }
  std::vector<PredictionRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() == 1 && f[0].empty()) continue;
    const std::string where = "dump row " + std::to_string(i + 1);
    if (f.size() != 8) throw DataError(where + ": expected 8 fields, got " + std::to_string(f.size()));
    PredictionRow r;
    try {
      r.id = f[0];
      r.smiles = f[1];
      const auto pred = parse_double(f[2]), sigma = parse_double(f[3]);
      if (!pred || !sigma) throw DataError("ri_pred and sigma_pred are required");
      r.ri_pred = *pred;
      r.sigma_pred = *sigma;
      r.sigma_corrected = parse_double(f[4]);
      r.ri_obs = parse_double(f[5]);
      r.z = parse_double(f[6]);
      r.tags = split_tags(f[7]);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline void save_dump(const std::string& path, const std::vector<PredictionRow>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  write_dump(os, rows);
  if (!os) throw Error("write failed: " + path);
}

inline std::vector<PredictionRow> load_dump(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return read_dump(is);
}

// ---------------------------------------------------------------------------
// Statistics

// Reference values for an 8-member ensemble trained on the full commercial
// library. They cannot be reached with synthetic data and are not asserted.
namespace reference {
inline constexpr double kMae = 15.1;
inline constexpr double kAbsErrorP95 = 46.5;
inline constexpr double kPearsonR = 0.9987;
inline constexpr double kZStdUncorrected = 2.39;
inline constexpr double kZStdCorrected = 1.51;
inline constexpr double kZAbsP95Corrected = 2.046;
inline constexpr double kZAbsP95Ri = 42.6;
inline constexpr int kCalibrationP = 78;
inline constexpr double kCalibrationB = 2.0;
}  // namespace reference

inline constexpr std::array<double, 4> kAbsErrorLevels = {50.0, 90.0, 95.0, 99.0};

inline void check_pair(const std::vector<double>& a, const std::vector<double>& b, const char* what) {
  if (a.size() != b.size()) throw ShapeError(std::string(what) + ": size mismatch");
  if (a.empty()) throw Error(std::string(what) + ": empty input");
}

inline double mae(const std::vector<double>& pred, const std::vector<double>& obs) {
  check_pair(pred, obs, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - obs[i]);
  return s / static_cast<double>(pred.size());
}

inline double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  check_pair(x, y, "pearson_r");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error("pearson_r undefined for constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline std::vector<double> abs_error_percentiles(const std::vector<double>& pred, const std::vector<double>& obs,
                                                 const std::vector<double>& levels) {
  check_pair(pred, obs, "abs_error_percentiles");
  std::vector<double> e;
  for (std::size_t i = 0; i < pred.size(); ++i) e.push_back(std::abs(pred[i] - obs[i]));
  std::sort(e.begin(), e.end());
  std::vector<double> out;
  for (double q : levels) out.push_back(percentile_sorted(e, q));
  return out;
}

// Summary of precomputed Z values with the std each was divided by. Entries
// with a zero std are counted and skipped.
inline ZSummary z_summary(const std::vector<double>& z, const std::vector<double>& sigma) {
  if (z.size() != sigma.size()) throw ShapeError("z_summary: size mismatch");
  ZSummary s;
  std::vector<double> kept, abs_z;
  double sigma_sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(sigma[i] > 0.0)) {
      ++s.n_sigma_zero;
      continue;
    }
    kept.push_back(z[i]);
    abs_z.push_back(std::abs(z[i]));
    sigma_sum += sigma[i];
  }
  s.n = kept.size();
  if (kept.empty()) return s;
  double mean = 0.0;
  for (double v : kept) mean += v;
  mean /= static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : kept) ss += (v - mean) * (v - mean);
  s.z_std = std::sqrt(ss / static_cast<double>(s.n));
  s.z_abs_p95 = percentile(abs_z, 95.0);
  s.z_abs_p95_ri = s.z_abs_p95 * sigma_sum / static_cast<double>(s.n);
  return s;
}

struct GroupStats {
  std::string name;
  std::size_t n = 0;
  double mae = 0.0;
  std::optional<double> pearson_r;  // unset for constant predictions or observations
  std::array<double, 4> abs_error_pct{};  // at kAbsErrorLevels
  std::optional<ZSummary> z;              // with the corrected std where available
  std::optional<ZSummary> z_uncorrected;  // only when corrected stds exist
  std::size_t n_sigma_zero = 0;
};

struct EvalReport {
  std::vector<GroupStats> groups;
  std::vector<std::string> notes;
};

inline GroupStats group_stats(const std::string& name, const std::vector<const PredictionRow*>& rows) {
  GroupStats g;
  g.name = name;
  g.n = rows.size();
  std::vector<double> pred, obs, err, sigma, sigma_raw;
  bool corrected = false;
  for (const auto* r : rows) {
    pred.push_back(r->ri_pred);
    obs.push_back(*r->ri_obs);
    err.push_back(*r->ri_obs - r->ri_pred);
    sigma.push_back(r->sigma());
    sigma_raw.push_back(r->sigma_pred);
    corrected = corrected || r->sigma_corrected.has_value();
  }
  g.mae = mae(pred, obs);
  try {
    g.pearson_r = pearson_r(pred, obs);
  } catch (const Error&) {
  }
  const auto pct = abs_error_percentiles(pred, obs, {kAbsErrorLevels.begin(), kAbsErrorLevels.end()});
  std::copy(pct.begin(), pct.end(), g.abs_error_pct.begin());
  g.z = summarize_z(err, sigma);
  g.n_sigma_zero = g.z->n_sigma_zero;
  if (corrected) g.z_uncorrected = summarize_z(err, sigma_raw);
  return g;
}

// Groups All, <tag> and no <tag>. Rows without an observation are skipped.
inline EvalReport group_report(const std::vector<PredictionRow>& rows, const std::string& tag = kTmsTag) {
  EvalReport rep;
  std::vector<const PredictionRow*> all, with, without;
  std::size_t unobserved = 0;
  for (const auto& r : rows) {
    if (!r.ri_obs) {
      ++unobserved;
      continue;
    }
    all.push_back(&r);
    (r.has_tag(tag) ? with : without).push_back(&r);
  }
  if (unobserved) rep.notes.push_back(std::to_string(unobserved) + " rows without ri_obs skipped");
  const std::array<std::pair<std::string, const std::vector<const PredictionRow*>*>, 3> groups = {
      {{"All", &all}, {tag, &with}, {"no " + tag, &without}}};
  for (const auto& [name, members] : groups) {
    if (members->empty()) {
      rep.notes.push_back("group '" + name + "' is empty and omitted");
      continue;
    }
    rep.groups.push_back(group_stats(name, *members));
  }
  return rep;
}

inline nlohmann::json to_json(const ZSummary& z) {
  return nlohmann::json{{"z_std", z.z_std},
                        {"z_abs_p95", z.z_abs_p95},
                        {"z_abs_p95_ri", z.z_abs_p95_ri},
                        {"n", z.n},
                        {"n_sigma_zero", z.n_sigma_zero}};
}

inline nlohmann::json report_to_json(const EvalReport& rep) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : rep.groups) {
    nlohmann::json j{{"name", g.name},
                     {"n", g.n},
                     {"mae", g.mae},
                     {"pearson_r", g.pearson_r ? nlohmann::json(*g.pearson_r) : nlohmann::json()},
                     {"abs_error_p50", g.abs_error_pct[0]},
                     {"abs_error_p90", g.abs_error_pct[1]},
                     {"abs_error_p95", g.abs_error_pct[2]},
                     {"abs_error_p99", g.abs_error_pct[3]},
                     {"n_sigma_zero", g.n_sigma_zero}};
    if (g.z) {
      j["z_std"] = g.z->z_std;
      j["z_abs_p95"] = g.z->z_abs_p95;
      j["z_abs_p95_ri"] = g.z->z_abs_p95_ri;
    }
    if (g.z_uncorrected) j["uncorrected"] = to_json(*g.z_uncorrected);
    groups.push_back(std::move(j));
  }
  return nlohmann::json{{"groups", groups}, {"notes", rep.notes}};
}

// Aligned text table: one row per group.
inline std::string report_to_text(const EvalReport& rep) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %7s %9s %9s %9s %9s %9s %11s %8s %9s\n", "group", "n", "MAE", "50%", "90%",
                "95%", "99%", "correlation", "z_std", "z95_ri");
  os << line;
  for (const auto& g : rep.groups) {
    char r[32] = "n/a", zs[32] = "n/a", zr[32] = "n/a";
    if (g.pearson_r) std::snprintf(r, sizeof r, "%.4f", *g.pearson_r);
    if (g.z && g.z->n) {
      std::snprintf(zs, sizeof zs, "%.3f", g.z->z_std);
      std::snprintf(zr, sizeof zr, "%.1f", g.z->z_abs_p95_ri);
    }
    std::snprintf(line, sizeof line, "%-12s %7zu %9.1f %9.1f %9.1f %9.1f %9.1f %11s %8s %9s\n", g.name.c_str(), g.n,
                  g.mae, g.abs_error_pct[0], g.abs_error_pct[1], g.abs_error_pct[2], g.abs_error_pct[3], r, zs, zr);
    os << line;
  }
  for (const auto& n : rep.notes) os << "note: " << n << '\n';
  return os.str();
}

}  // namespace airi
