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

#pragma once

#include <charconv>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "airi/chem/molecule.hpp"

namespace airi::chem {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<int> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::string_view field(std::string_view line, std::size_t start, std::size_t len) {
  if (start >= line.size()) return {};
  return line.substr(start, std::min(len, line.size() - start));
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
    if (i < line.size() && line[i] == '\r') ++i;
  }
  return out;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

}  // namespace detail

// Parses one MOLfile V2000 connection table. The title line becomes
// source_id. Charges come from the atom block unless M  CHG lines are present,
// which take precedence. Explicit hydrogens stay as atoms; standardize()
// folds them into hydrogen counts. Errors carry the 1-based line number.
inline Molecule parse_molfile(std::string_view text) {
  using detail::field;
  using detail::parse_int;
  const auto lines = detail::split_lines(text);
  if (lines.size() < 4) throw ChemError("MOLfile shorter than its header and counts line");

  Molecule mol;
  const auto title = detail::trim(lines[0]);
  if (!title.empty()) mol.source_id = std::string(title);

  const std::string_view counts = lines[3];
  if (counts.find("V3000") != std::string_view::npos) {
    throw ChemError("V3000 MOLfiles are not supported", 4);
  }
  auto natoms = parse_int(field(counts, 0, 3));
  auto nbonds = parse_int(field(counts, 3, 3));
  if (!natoms || !nbonds) {
    const auto parts = detail::split_ws(counts);
    if (parts.size() >= 2) {
      natoms = parse_int(parts[0]);
      nbonds = parse_int(parts[1]);
    }
  }
  if (!natoms || !nbonds || *natoms < 0 || *nbonds < 0) {
    throw ChemError("malformed counts line", 4);
  }
  if (lines.size() < 4 + static_cast<std::size_t>(*natoms + *nbonds)) {
    throw ChemError("MOLfile truncated before the end of the atom/bond blocks");
  }

  for (int i = 0; i < *natoms; ++i) {
    const std::size_t line_no = 4 + i;
    const std::string_view line = lines[line_no];
    std::string_view symbol = detail::trim(field(line, 31, 3));
    std::optional<int> charge_code = parse_int(field(line, 36, 3));
    if (symbol.empty() || line.size() < 34) {
      const auto parts = detail::split_ws(line);
      if (parts.size() < 4) throw ChemError("malformed atom line", line_no + 1);
      symbol = parts[3];
      charge_code = parts.size() >= 6 ? parse_int(parts[5]) : std::optional<int>(0);
    }
    const auto z = element_from_symbol(symbol);
    if (!z) throw ChemError("unknown element symbol '" + std::string(symbol) + "'", line_no + 1);
    Atom atom;
    atom.element = *z;
    switch (charge_code.value_or(0)) {
      case 1: atom.formal_charge = 3; break;
      case 2: atom.formal_charge = 2; break;
      case 3: atom.formal_charge = 1; break;
      case 5: atom.formal_charge = -1; break;
      case 6: atom.formal_charge = -2; break;
      case 7: atom.formal_charge = -3; break;
      default: atom.formal_charge = 0; break;
    }
    mol.atoms.push_back(atom);
  }

  for (int i = 0; i < *nbonds; ++i) {
    const std::size_t line_no = 4 + *natoms + i;
    const std::string_view line = lines[line_no];
    auto a = parse_int(field(line, 0, 3));
    auto b = parse_int(field(line, 3, 3));
    auto type = parse_int(field(line, 6, 3));
    if (!a || !b || !type) {
      const auto parts = detail::split_ws(line);
      if (parts.size() < 3) throw ChemError("malformed bond line", line_no + 1);
      a = parse_int(parts[0]);
      b = parse_int(parts[1]);
      type = parse_int(parts[2]);
      if (!a || !b || !type) throw ChemError("malformed bond line", line_no + 1);
    }
    if (*a < 1 || *b < 1 || *a > *natoms || *b > *natoms) {
      throw ChemError("bond atom index out of range", line_no + 1);
    }
    BondOrder order;
    switch (*type) {
      case 1: order = BondOrder::kSingle; break;
      case 2: order = BondOrder::kDouble; break;
      case 3: order = BondOrder::kTriple; break;
      case 4: order = BondOrder::kAromatic; break;
      default: throw ChemError("unsupported bond type " + std::to_string(*type), line_no + 1);
    }
    try {
      mol.add_bond(*a - 1, *b - 1, order);
    } catch (const ChemError& e) {
      throw ChemError(e.what(), line_no + 1);
    }
  }

  bool charges_reset = false;
  for (std::size_t ln = 4 + *natoms + *nbonds; ln < lines.size(); ++ln) {
    const std::string_view line = lines[ln];
    if (line.starts_with("M  END")) break;
    if (!line.starts_with("M  CHG")) continue;
    if (!charges_reset) {
      for (Atom& atom : mol.atoms) atom.formal_charge = 0;
      charges_reset = true;
    }
    const auto parts = detail::split_ws(line);
    if (parts.size() < 3) throw ChemError("malformed M  CHG line", ln + 1);
    const auto count = parse_int(parts[2]);
    if (!count || parts.size() < 3 + 2 * static_cast<std::size_t>(*count)) {
      throw ChemError("malformed M  CHG line", ln + 1);
    }
    for (int k = 0; k < *count; ++k) {
      const auto idx = parse_int(parts[3 + 2 * k]);
      const auto chg = parse_int(parts[4 + 2 * k]);
      if (!idx || !chg) throw ChemError("malformed M  CHG entry", ln + 1);
      if (*idx < 1 || *idx > *natoms) throw ChemError("M  CHG atom index out of range", ln + 1);
      mol.atoms[*idx - 1].formal_charge = *chg;
    }
  }

  // aromatic atoms are implied by aromatic bonds
  for (const Bond& b : mol.bonds) {
    if (b.order == BondOrder::kAromatic) {
      mol.atoms[b.a].is_aromatic = true;
      mol.atoms[b.b].is_aromatic = true;
    }
  }
  return mol;
}

// Splits an SDF stream on "$$$$" lines into MOLfile blocks.
inline std::vector<std::string> split_sdf(std::string_view text) {
  std::vector<std::string> blocks;
  std::string current;
  for (std::string_view line : detail::split_lines(text)) {
    if (detail::trim(line) == "$$$$") {
      if (!detail::trim(current).empty()) blocks.push_back(current);
      current.clear();
      continue;
    }
    current.append(line);
    current.push_back('\n');
  }
  if (!detail::trim(current).empty() && current.find("M  END") != std::string::npos) {
    blocks.push_back(current);
  }
  return blocks;
}

}  // namespace airi::chem
