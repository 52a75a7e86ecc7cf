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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "airi/chem/elements.hpp"
#include "airi/error.hpp"

namespace airi::chem {

enum class BondOrder : std::uint8_t { kSingle = 0, kDouble = 1, kTriple = 2, kAromatic = 3 };

inline int bond_valence(BondOrder order) {
  switch (order) {
    case BondOrder::kDouble: return 2;
    case BondOrder::kTriple: return 3;
    default: return 1;  // aromatic bonds count 1; the pi electron is added per atom
  }
}

struct Atom {
  int element = element::C;
  int formal_charge = 0;
  int implicit_h = 0;
  int explicit_degree = 0;
  bool is_aromatic = false;
  // Hydrogen count is fixed (bracket atom, or already standardized) and must
  // not be recomputed from the default valence table.
  bool h_count_fixed = false;

  bool operator==(const Atom&) const = default;
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::kSingle;
  bool is_conjugated = false;
  bool is_in_ring = false;
  std::optional<int> smallest_ring_size;
  bool in_aromatic_ring = false;

  int other(int atom) const { return atom == a ? b : a; }
  bool operator==(const Bond&) const = default;
};

struct RingInfo {
  // Each ring is a simple cycle listed in traversal order.
  std::vector<std::vector<int>> rings;
  std::vector<bool> aromatic;

  std::size_t size() const { return rings.size(); }
  bool operator==(const RingInfo&) const = default;
};

struct Molecule {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  RingInfo rings;
  std::optional<std::string> source_id;
  std::vector<std::string> warnings;

  std::size_t num_atoms() const { return atoms.size(); }
  std::size_t num_bonds() const { return bonds.size(); }

  // Index of the bond joining a and b, if any.
  std::optional<int> find_bond(int a, int b) const {
    for (std::size_t i = 0; i < bonds.size(); ++i) {
      const Bond& bd = bonds[i];
      if ((bd.a == a && bd.b == b) || (bd.a == b && bd.b == a)) {
        return static_cast<int>(i);
      }
    }
    return std::nullopt;
  }

  // Appends a bond after checking the graph invariants (valid endpoints, no
  // self bond, no duplicate pair).
  int add_bond(int a, int b, BondOrder order) {
    const int n = static_cast<int>(atoms.size());
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw ChemError("bond endpoint out of range");
    }
    if (a == b) throw ChemError("self bond on atom " + std::to_string(a));
    if (find_bond(a, b)) {
      throw ChemError("duplicate bond between atoms " + std::to_string(a) +
                      " and " + std::to_string(b));
    }
    Bond bond;
    bond.a = a;
    bond.b = b;
    bond.order = order;
    bonds.push_back(bond);
    ++atoms[a].explicit_degree;
    ++atoms[b].explicit_degree;
    return static_cast<int>(bonds.size()) - 1;
  }

  bool operator==(const Molecule&) const = default;
};

// Neighbour lists as (atom, bond index), sorted by neighbour atom index.
inline std::vector<std::vector<std::pair<int, int>>> adjacency(const Molecule& mol) {
  std::vector<std::vector<std::pair<int, int>>> adj(mol.atoms.size());
  for (std::size_t i = 0; i < mol.bonds.size(); ++i) {
    const Bond& b = mol.bonds[i];
    adj[b.a].emplace_back(b.b, static_cast<int>(i));
    adj[b.b].emplace_back(b.a, static_cast<int>(i));
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

// Connected components as a label per atom; returns the component count.
inline int connected_components(const Molecule& mol, std::vector<int>& label) {
  const auto adj = adjacency(mol);
  label.assign(mol.atoms.size(), -1);
  int count = 0;
  std::vector<int> stack;
  for (std::size_t start = 0; start < mol.atoms.size(); ++start) {
    if (label[start] >= 0) continue;
    label[start] = count;
    stack.assign(1, static_cast<int>(start));
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (auto [v, bond] : adj[u]) {
        if (label[v] < 0) {
          label[v] = count;
          stack.push_back(v);
        }
      }
    }
    ++count;
  }
  return count;
}

// Sum of bond valences at an atom (aromatic bonds count as 1).
inline int bond_order_sum(const Molecule& mol, int atom) {
  int sum = 0;
  for (const Bond& b : mol.bonds) {
    if (b.a == atom || b.b == atom) sum += bond_valence(b.order);
  }
  return sum;
}

// Moves input atom k to position perm[k]. Bonds keep their order.
inline Molecule relabel_atoms(const Molecule& mol, const std::vector<int>& perm) {
  if (perm.size() != mol.atoms.size()) {
    throw ChemError("permutation size does not match atom count");
  }
  Molecule out = mol;
  for (std::size_t k = 0; k < mol.atoms.size(); ++k) out.atoms[perm[k]] = mol.atoms[k];
  for (Bond& b : out.bonds) {
    b.a = perm[b.a];
    b.b = perm[b.b];
  }
  for (auto& ring : out.rings.rings) {
    for (int& a : ring) a = perm[a];
  }
  return out;
}

}  // namespace airi::chem
