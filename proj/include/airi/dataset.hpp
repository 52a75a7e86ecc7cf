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

// Dataset records, CSV I/O and train/validation/test splitting.

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "airi/chem.hpp"
#include "airi/error.hpp"
#include "airi/featurize.hpp"
#include "airi/rng.hpp"

namespace airi {

inline constexpr double kDefaultRiCutoff = 6280.0;
inline constexpr const char* kTmsTag = "TMS";

// ---------------------------------------------------------------------------
// CSV (RFC 4180 quoting, LF or CRLF line ends)

namespace csv {

inline std::vector<std::vector<std::string>> read(std::istream& is) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false, any = false;
  char c;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  std::size_t line = 1;
  while (is.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) throw DataError("stray quote on CSV line " + std::to_string(line));
        quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (is.peek() != '\n') field.push_back(c);
        break;
      case '\n':
        end_row();
        any = false;
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (quoted) throw DataError("unterminated quote in CSV");
  if (any) end_row();
  return rows;
}

inline std::string quote(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << quote(fields[i]);
  }
  os << '\n';
}

}  // namespace csv

// Shortest text that parses back to the same double.
inline std::string format_exact(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// printf %.6g.
inline std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw DataError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string> split_tags(std::string_view s) {
  std::vector<std::string> tags;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = std::min(s.find(';', start), s.size());
    std::string_view t = s.substr(start, end - start);
    while (!t.empty() && t.front() == ' ') t.remove_prefix(1);
    while (!t.empty() && t.back() == ' ') t.remove_suffix(1);
    if (!t.empty()) tags.emplace_back(t);
    start = end + 1;
  }
  return tags;
}

inline std::string join_tags(const std::vector<std::string>& tags) {
  std::string out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (i) out.push_back(';');
    out += tags[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Records

struct DatasetRecord {
  std::string id;
  std::string smiles;
  std::optional<double> ri;  // absent in prediction inputs
  std::vector<std::string> tags;

  bool has_tag(const std::string& t) const { return std::find(tags.begin(), tags.end(), t) != tags.end(); }
  bool operator==(const DatasetRecord&) const = default;
};

inline const std::vector<std::string>& dataset_header() {
  static const std::vector<std::string> h = {"id", "smiles", "ri", "tags"};
  return h;
}

// Reads `id,smiles,ri,tags`. With require_ri every record needs a finite,
// non-negative RI; otherwise an empty ri field is allowed.
inline std::vector<DatasetRecord> read_dataset(std::istream& is, bool require_ri = true) {
  const auto rows = csv::read(is);
  if (rows.empty()) throw DataError("dataset is empty (no header)");
  if (rows[0] != dataset_header()) {
    std::string got;
    for (std::size_t i = 0; i < rows[0].size(); ++i) got += (i ? "," : "") + rows[0][i];
    throw DataError("dataset header must be 'id,smiles,ri,tags', got '" + got + "'");
  }
  std::vector<DatasetRecord> out;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;
    const std::string where = "dataset row " + std::to_string(r + 1);
    if (row.size() != 4) {
      throw DataError(where + ": expected 4 fields, got " + std::to_string(row.size()));
    }
    DatasetRecord rec;
    rec.id = row[0];
    rec.smiles = row[1];
    if (rec.id.empty()) throw DataError(where + ": empty id");
    if (!seen.insert(rec.id).second) throw DataError(where + ": duplicate id '" + rec.id + "'");
    try {
      rec.ri = parse_double(row[2]);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    if (rec.ri && !(std::isfinite(*rec.ri) && *rec.ri >= 0.0)) {
      throw DataError(where + ": RI must be finite and non-negative");
    }
    if (require_ri && !rec.ri) throw DataError(where + ": missing RI");
    rec.tags = split_tags(row[3]);
    out.push_back(std::move(rec));
  }
  return out;
}

inline void write_dataset(std::ostream& os, const std::vector<DatasetRecord>& records) {
  csv::write_row(os, dataset_header());
  for (const auto& r : records) {
    csv::write_row(os, {r.id, r.smiles, r.ri ? format_exact(*r.ri) : "", join_tags(r.tags)});
  }
}

inline std::vector<DatasetRecord> load_dataset(const std::string& path, bool require_ri = true) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return read_dataset(is, require_ri);
}

inline void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  write_dataset(os, records);
  if (!os) throw Error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Splitting

struct Splits {
  std::vector<DatasetRecord> train;
  std::vector<DatasetRecord> validation;
  std::vector<DatasetRecord> test;
  std::size_t excluded = 0;  // records above the RI cutoff
};

// Drops records with RI > cutoff, shuffles the rest with `seed` and cuts
// them into round(f0 n), round(f1 n) and the remainder.
inline Splits split_dataset(const std::vector<DatasetRecord>& records, const std::array<double, 3>& fractions,
                            std::uint64_t seed, double ri_cutoff = kDefaultRiCutoff) {
  if (records.empty()) throw DataError("cannot split an empty dataset");
  for (double f : fractions) {
    if (!(f >= 0.0)) throw Error("split fractions must be non-negative");
  }
  const double total = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(total - 1.0) > 1e-9) throw Error("split fractions must sum to 1, got " + format_exact(total));

  Splits s;
  std::vector<const DatasetRecord*> kept;
  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.id).second) throw DataError("duplicate id '" + r.id + "'");
    if (!r.ri) throw DataError("record '" + r.id + "' has no RI");
    if (*r.ri > ri_cutoff) {
      ++s.excluded;
      continue;
    }
    kept.push_back(&r);
  }
  Rng rng(seed);
  rng.shuffle(kept.begin(), kept.end());
  const std::size_t n = kept.size();
  const std::size_t n_train = std::min(n, static_cast<std::size_t>(std::llround(fractions[0] * n)));
  const std::size_t n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(fractions[1] * n)));
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = i < n_train ? s.train : (i < n_train + n_val ? s.validation : s.test);
    dst.push_back(*kept[i]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Featurization of records

inline chem::Molecule record_molecule(const DatasetRecord& r, const chem::StandardizeConfig& std_cfg = {}) {
  try {
    chem::Molecule m = chem::standardize(chem::parse_smiles(r.smiles), std_cfg);
    m.source_id = r.id;
    return m;
  } catch (const ChemError& e) {
    throw DataError("record '" + r.id + "': " + e.what());
  }
}

inline FeaturizedGraph featurize_record(const DatasetRecord& r, const FeaturizeConfig& cfg,
                                        const chem::StandardizeConfig& std_cfg = {}) {
  FeaturizedGraph g;
  try {
    g = featurize_graph(record_molecule(r, std_cfg), cfg);
  } catch (const DataError& e) {
    const std::string msg = e.what();
    if (msg.rfind("record '", 0) == 0) throw;
    throw DataError("record '" + r.id + "': " + msg);
  }
  g.id = r.id;
  g.target_ri = r.ri;
  g.tags = r.tags;
  return g;
}

inline std::vector<FeaturizedGraph> featurize_records(const std::vector<DatasetRecord>& records,
                                                      const FeaturizeConfig& cfg,
                                                      const chem::StandardizeConfig& std_cfg = {}) {
  std::vector<FeaturizedGraph> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(featurize_record(r, cfg, std_cfg));
  return out;
}

inline std::vector<FeaturizedGraph> featurize_records(const std::vector<DatasetRecord>& records,
                                                      int max_path_len) {
  FeaturizeConfig cfg;
  cfg.max_path_len = max_path_len;
  return featurize_records(records, cfg);
}

}  // namespace airi
