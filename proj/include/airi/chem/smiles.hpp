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

// SMILES reader and writer for the organic subset plus bracket atoms.
//
// Supported: organic-subset atoms (B C N O P S F Cl Br I and the aromatic
// b c n o p s), bracket atoms with isotope, hydrogen count, charge and atom
// class, bonds - = # : / \, ring closures (digits and %nn), branches and
// dot-separated fragments. Stereo markers and isotopes are read and dropped.

#pragma once

#include <cctype>
#include <map>
#include <set>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "airi/chem/molecule.hpp"
#include "airi/chem/valence.hpp"

namespace airi::chem {

namespace detail {

class SmilesParser {
 public:
  explicit SmilesParser(std::string_view text) : text_(text) {}

  Molecule parse() {
    if (text_.empty()) throw ChemError("empty SMILES", 0);
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      switch (c) {
        case '(':
          if (prev_ < 0) fail("branch without a preceding atom");
          if (pending_) fail("bond symbol before '('");
          branches_.push_back(prev_);
          ++pos_;
          break;
        case ')':
          if (branches_.empty()) fail("unmatched ')'");
          if (pending_) fail("bond symbol before ')'");
          prev_ = branches_.back();
          branches_.pop_back();
          ++pos_;
          break;
        case '.':
          if (pending_) fail("bond symbol before '.'");
          if (!branches_.empty()) fail("'.' inside a branch");
          prev_ = -1;
          ++pos_;
          break;
        case '-': set_bond(BondOrder::kSingle); break;
        case '/': set_bond(BondOrder::kSingle); break;
        case '\\': set_bond(BondOrder::kSingle); break;
        case '=': set_bond(BondOrder::kDouble); break;
        case '#': set_bond(BondOrder::kTriple); break;
        case ':': set_bond(BondOrder::kAromatic); break;
        case '$': fail("quadruple bonds are not supported");
        case '%': ring_closure(); break;
        case '[': bracket_atom(); break;
        case '*': fail("wildcard atoms are not supported");
        default:
          if (std::isdigit(static_cast<unsigned char>(c))) {
            ring_closure();
          } else if (std::isalpha(static_cast<unsigned char>(c))) {
            organic_atom();
          } else {
            fail(std::string("unexpected character '") + c + "'");
          }
      }
    }
    if (pending_) fail("dangling bond symbol");
    if (!branches_.empty()) fail("unclosed branch");
    if (!open_rings_.empty()) {
      const auto& [digit, ring] = *open_rings_.begin();
      throw ChemError("unmatched ring closure " + std::to_string(digit), ring.offset);
    }
    if (mol_.atoms.empty()) throw ChemError("SMILES contains no atoms", 0);
    check_bracket_valences();
    return std::move(mol_);
  }

 private:
  struct OpenRing {
    int atom;
    std::optional<BondOrder> order;
    std::size_t offset;
  };

  [[noreturn]] void fail(const std::string& what) const { throw ChemError(what, pos_); }

  void set_bond(BondOrder order) {
    if (pending_) fail("two consecutive bond symbols");
    if (prev_ < 0) fail("bond symbol without a preceding atom");
    pending_ = order;
    ++pos_;
  }

  BondOrder implied_order(int a, int b) const {
    return mol_.atoms[a].is_aromatic && mol_.atoms[b].is_aromatic ? BondOrder::kAromatic
                                                                  : BondOrder::kSingle;
  }

  void add_atom(Atom atom) {
    mol_.atoms.push_back(atom);
    bracket_offsets_.push_back(atom.h_count_fixed ? std::optional<std::size_t>(atom_start_)
                                                  : std::nullopt);
    const int idx = static_cast<int>(mol_.atoms.size()) - 1;
    if (prev_ >= 0) {
      const BondOrder order = pending_.value_or(implied_order(prev_, idx));
      mol_.add_bond(prev_, idx, order);
    } else if (pending_) {
      fail("bond symbol without a preceding atom");
    }
    pending_.reset();
    prev_ = idx;
  }

  void organic_atom() {
    atom_start_ = pos_;
    const char c = text_[pos_];
    Atom atom;
    auto next_is = [&](char n) { return pos_ + 1 < text_.size() && text_[pos_ + 1] == n; };
    switch (c) {
      case 'B':
        if (next_is('r')) {
          atom.element = element::Br;
          ++pos_;
        } else {
          atom.element = element::B;
        }
        break;
      case 'C':
        if (next_is('l')) {
          atom.element = element::Cl;
          ++pos_;
        } else {
          atom.element = element::C;
        }
        break;
      case 'N': atom.element = element::N; break;
      case 'O': atom.element = element::O; break;
      case 'P': atom.element = element::P; break;
      case 'S': atom.element = element::S; break;
      case 'F': atom.element = element::F; break;
      case 'I': atom.element = element::I; break;
      case 'b': atom.element = element::B; atom.is_aromatic = true; break;
      case 'c': atom.element = element::C; atom.is_aromatic = true; break;
      case 'n': atom.element = element::N; atom.is_aromatic = true; break;
      case 'o': atom.element = element::O; atom.is_aromatic = true; break;
      case 'p': atom.element = element::P; atom.is_aromatic = true; break;
      case 's': atom.element = element::S; atom.is_aromatic = true; break;
      default: fail(std::string("unsupported element '") + c + "' outside brackets");
    }
    ++pos_;
    add_atom(atom);
  }

  int read_int() {
    int value = 0;
    bool any = false;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + (text_[pos_] - '0');
      if (value > 100000) fail("number too large");
      ++pos_;
      any = true;
    }
    return any ? value : -1;
  }

  void bracket_atom() {
    atom_start_ = pos_;
    ++pos_;  // '['
    read_int();  // isotope, discarded
    if (pos_ >= text_.size()) fail("unterminated bracket atom");

    Atom atom;
    atom.h_count_fixed = true;
    const char c = text_[pos_];
    if (std::islower(static_cast<unsigned char>(c))) {
      // aromatic symbols allowed in brackets
      static constexpr std::pair<std::string_view, int> kAromatic[] = {
          {"se", element::Se}, {"as", 33}, {"te", 52}, {"b", element::B},
          {"c", element::C},   {"n", element::N}, {"o", element::O},
          {"p", element::P},   {"s", element::S}};
      bool found = false;
      for (auto [sym, z] : kAromatic) {
        if (text_.substr(pos_, sym.size()) == sym) {
          atom.element = z;
          atom.is_aromatic = true;
          pos_ += sym.size();
          found = true;
          break;
        }
      }
      if (!found) fail("unknown aromatic symbol in bracket atom");
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      std::optional<int> z;
      if (pos_ + 1 < text_.size() && std::islower(static_cast<unsigned char>(text_[pos_ + 1]))) {
        z = element_from_symbol(text_.substr(pos_, 2));
        if (z) pos_ += 2;
      }
      if (!z) {
        z = element_from_symbol(text_.substr(pos_, 1));
        if (!z) fail("unsupported element in bracket atom");
        ++pos_;
      }
      atom.element = *z;
    } else if (c == '*') {
      fail("wildcard atoms are not supported");
    } else {
      fail("expected element symbol in bracket atom");
    }

    // chirality: @, @@, @TH1, @AL2, @SP3, @TB12, @OH25
    if (pos_ < text_.size() && text_[pos_] == '@') {
      ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '@') {
        ++pos_;
      } else if (pos_ + 1 < text_.size()) {
        const auto tag = text_.substr(pos_, 2);
        if (tag == "TH" || tag == "AL" || tag == "SP" || tag == "TB" || tag == "OH") {
          pos_ += 2;
          if (read_int() < 0) fail("chirality class without a number");
        }
      }
    }

    int h = 0;
    if (pos_ < text_.size() && text_[pos_] == 'H') {
      ++pos_;
      const int count = read_int();
      h = count < 0 ? 1 : count;
    }

    if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
      const char sign = text_[pos_];
      ++pos_;
      int magnitude = read_int();
      if (magnitude < 0) {
        magnitude = 1;
        while (pos_ < text_.size() && text_[pos_] == sign) {
          ++magnitude;
          ++pos_;
        }
      }
      if (magnitude > 15) fail("formal charge out of range");
      atom.formal_charge = sign == '+' ? magnitude : -magnitude;
    }

    if (pos_ < text_.size() && text_[pos_] == ':') {
      ++pos_;
      if (read_int() < 0) fail("atom class without a number");
    }

    if (pos_ >= text_.size() || text_[pos_] != ']') fail("expected ']'");
    ++pos_;
    atom.implicit_h = h;
    add_atom(atom);
  }

  void ring_closure() {
    const std::size_t start = pos_;
    if (prev_ < 0) fail("ring closure without a preceding atom");
    int digit = 0;
    if (text_[pos_] == '%') {
      if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))) {
        fail("'%' must be followed by two digits");
      }
      digit = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
    } else {
      digit = text_[pos_] - '0';
      ++pos_;
    }

    auto it = open_rings_.find(digit);
    if (it == open_rings_.end()) {
      open_rings_.emplace(digit, OpenRing{prev_, pending_, start});
      pending_.reset();
      return;
    }
    const OpenRing ring = it->second;
    open_rings_.erase(it);
    if (ring.order && pending_ && *ring.order != *pending_) {
      throw ChemError("conflicting bond orders on ring closure " + std::to_string(digit), start);
    }
    const BondOrder order = pending_ ? *pending_ : ring.order.value_or(implied_order(ring.atom, prev_));
    pending_.reset();
    if (ring.atom == prev_) throw ChemError("ring closure bonds an atom to itself", start);
    if (mol_.find_bond(ring.atom, prev_)) {
      throw ChemError("ring closure duplicates an existing bond", start);
    }
    mol_.add_bond(ring.atom, prev_, order);
  }

  void check_bracket_valences() const {
    for (std::size_t i = 0; i < mol_.atoms.size(); ++i) {
      if (!bracket_offsets_[i]) continue;
      const Atom& a = mol_.atoms[i];
      const auto limit = max_valence(a.element, a.formal_charge);
      if (!limit) continue;
      const int used = valence_in_use(mol_, static_cast<int>(i)) + a.implicit_h;
      if (used > *limit) {
        throw ChemError("hydrogen count impossible for " +
                            std::string(element_symbol(a.element)) + " with valence " +
                            std::to_string(used),
                        *bracket_offsets_[i]);
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t atom_start_ = 0;
  Molecule mol_;
  int prev_ = -1;
  std::optional<BondOrder> pending_;
  std::vector<int> branches_;
  std::map<int, OpenRing> open_rings_;
  std::vector<std::optional<std::size_t>> bracket_offsets_;
};

inline std::string atom_token(const Molecule& mol, int idx) {
  const Atom& a = mol.atoms[idx];
  std::string symbol(element_symbol(a.element));
  if (a.is_aromatic) {
    for (char& ch : symbol) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  const bool aromatic_bare =
      a.is_aromatic && (a.element == element::B || a.element == element::C ||
                        a.element == element::N || a.element == element::O ||
                        a.element == element::P || a.element == element::S);
  const bool bare_ok = is_organic_subset(a.element) && a.formal_charge == 0 &&
                       (!a.is_aromatic || aromatic_bare);
  if (bare_ok) {
    const HydrogenCount h = default_hydrogens(mol, idx);
    if (!h.over_valent && h.count == a.implicit_h) return symbol;
  }
  std::string out = "[" + symbol;
  if (a.implicit_h == 1) out += "H";
  if (a.implicit_h > 1) out += "H" + std::to_string(a.implicit_h);
  if (a.formal_charge != 0) {
    out += a.formal_charge > 0 ? "+" : "-";
    const int mag = a.formal_charge > 0 ? a.formal_charge : -a.formal_charge;
    if (mag > 1) out += std::to_string(mag);
  }
  out += "]";
  return out;
}

inline std::string bond_token(const Molecule& mol, const Bond& b) {
  const bool both_aromatic = mol.atoms[b.a].is_aromatic && mol.atoms[b.b].is_aromatic;
  switch (b.order) {
    case BondOrder::kDouble: return "=";
    case BondOrder::kTriple: return "#";
    case BondOrder::kAromatic: return both_aromatic ? "" : ":";
    default: return both_aromatic ? "-" : "";
  }
}

class SmilesWriter {
 public:
  explicit SmilesWriter(const Molecule& mol) : mol_(mol), adj_(adjacency(mol)) {}

  std::string write() {
    const std::size_t n = mol_.atoms.size();
    visited_.assign(n, false);
    parent_bond_.assign(n, -1);
    children_.assign(n, {});
    ring_bonds_.assign(n, {});
    rank_.assign(n, -1);
    ring_marked_.assign(mol_.bonds.size(), false);
    std::string out;
    for (std::size_t start = 0; start < n; ++start) {
      if (visited_[start]) continue;
      discover(static_cast<int>(start));
      if (!out.empty()) out += ".";
      emit(static_cast<int>(start), out);
    }
    return out;
  }

 private:
  void discover(int u) {
    visited_[u] = true;
    rank_[u] = next_rank_++;
    for (auto [v, bond] : adj_[u]) {
      if (bond == parent_bond_[u]) continue;
      if (!visited_[v]) {
        parent_bond_[v] = bond;
        children_[u].push_back(v);
        discover(v);
      } else if (!ring_marked_[bond]) {
        ring_marked_[bond] = true;
        ring_bonds_[v].push_back(bond);
        ring_bonds_[u].push_back(bond);
      }
    }
  }

  int allocate_digit() {
    for (int d = 1;; ++d) {
      if (!digits_in_use_.contains(d)) {
        digits_in_use_.insert(d);
        return d;
      }
    }
  }

  static std::string digit_text(int d) {
    if (d < 10) return std::to_string(d);
    return "%" + std::to_string(d);
  }

  void emit(int u, std::string& out) {
    out += atom_token(mol_, u);
    for (int bond : ring_bonds_[u]) {
      const Bond& b = mol_.bonds[bond];
      const int other = b.other(u);
      if (rank_[other] > rank_[u]) {
        const int d = allocate_digit();
        bond_digit_[bond] = d;
        out += bond_token(mol_, b) + digit_text(d);
      } else {
        const int d = bond_digit_.at(bond);
        digits_in_use_.erase(d);
        out += digit_text(d);
      }
    }
    const auto& kids = children_[u];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const int v = kids[i];
      const std::string bt = bond_token(mol_, mol_.bonds[parent_bond_[v]]);
      if (i + 1 < kids.size()) {
        out += "(" + bt;
        emit(v, out);
        out += ")";
      } else {
        out += bt;
        emit(v, out);
      }
    }
  }

  const Molecule& mol_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
  std::vector<bool> visited_;
  std::vector<int> parent_bond_;
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<int>> ring_bonds_;
  std::vector<int> rank_;
  std::vector<bool> ring_marked_;
  std::set<int> digits_in_use_;
  std::map<int, int> bond_digit_;
  int next_rank_ = 0;
};

}  // namespace detail

// Parses a SMILES string into an unstandardized molecule. Bracket atoms carry
// their hydrogen count in implicit_h with h_count_fixed set; every other atom
// has implicit_h = 0 until standardize() runs.
inline Molecule parse_smiles(std::string_view text) {
  return detail::SmilesParser(text).parse();
}

// Writes a SMILES string. Atoms whose hydrogen count differs from the default
// valence rule are bracketed so that parse + standardize reproduces them.
inline std::string write_smiles(const Molecule& mol) {
  if (mol.atoms.empty()) return {};
  return detail::SmilesWriter(mol).write();
}

}  // namespace airi::chem
