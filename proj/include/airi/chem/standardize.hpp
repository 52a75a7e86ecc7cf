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

// Structure standardization: explicit hydrogens folded into atom counts,
// nitro and azide rewritten to their charge-separated forms, implicit
// hydrogens from the default valence table, ring perception, aromaticity
// (lowercase input is trusted, Kekule rings go through a Hueckel test over
// the SSSR) and bond conjugation.

#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "airi/chem/molecule.hpp"
#include "airi/chem/rings.hpp"
#include "airi/chem/valence.hpp"

namespace airi::chem {

enum class FragmentPolicy { kReject, kLargest };

struct StandardizeConfig {
  FragmentPolicy fragments = FragmentPolicy::kReject;
};

namespace detail {

// Removes the atoms not flagged in `keep` and renumbers bonds.
inline Molecule keep_atoms(const Molecule& mol, const std::vector<bool>& keep) {
  Molecule out;
  out.source_id = mol.source_id;
  out.warnings = mol.warnings;
  std::vector<int> remap(mol.atoms.size(), -1);
  for (std::size_t i = 0; i < mol.atoms.size(); ++i) {
    if (!keep[i]) continue;
    remap[i] = static_cast<int>(out.atoms.size());
    Atom a = mol.atoms[i];
    a.explicit_degree = 0;
    out.atoms.push_back(a);
  }
  for (const Bond& b : mol.bonds) {
    if (remap[b.a] < 0 || remap[b.b] < 0) continue;
    const int idx = out.add_bond(remap[b.a], remap[b.b], b.order);
    Bond& nb = out.bonds[idx];
    nb.is_conjugated = b.is_conjugated;
  }
  return out;
}

inline Molecule apply_fragment_policy(const Molecule& mol, FragmentPolicy policy) {
  std::vector<int> label;
  const int count = connected_components(mol, label);
  if (count <= 1) return mol;
  if (policy == FragmentPolicy::kReject) {
    throw ChemError("structure has " + std::to_string(count) + " disconnected fragments");
  }
  std::vector<int> heavy(count, 0);
  std::vector<int> total(count, 0);
  for (std::size_t i = 0; i < mol.atoms.size(); ++i) {
    ++total[label[i]];
    if (mol.atoms[i].element != element::H) ++heavy[label[i]];
  }
  int best = 0;
  for (int c = 1; c < count; ++c) {
    if (heavy[c] > heavy[best] || (heavy[c] == heavy[best] && total[c] > total[best])) best = c;
  }
  std::vector<bool> keep(mol.atoms.size());
  for (std::size_t i = 0; i < mol.atoms.size(); ++i) keep[i] = label[i] == best;
  Molecule out = keep_atoms(mol, keep);
  out.warnings.push_back("kept the largest of " + std::to_string(count) + " fragments");
  return out;
}

// Explicit hydrogens bonded once, by a single bond, to a heavy atom become a
// count on that atom. Returns the per-atom folded count (indexed by new atom).
inline Molecule fold_hydrogens(const Molecule& mol, std::vector<int>& folded) {
  std::vector<bool> keep(mol.atoms.size(), true);
  std::vector<int> count(mol.atoms.size(), 0);
  const auto adj = adjacency(mol);
  for (std::size_t i = 0; i < mol.atoms.size(); ++i) {
    const Atom& a = mol.atoms[i];
    if (a.element != element::H || a.formal_charge != 0 || adj[i].size() != 1) continue;
    if (a.h_count_fixed && a.implicit_h != 0) continue;
    const auto [nb, bond] = adj[i][0];
    if (mol.atoms[nb].element == element::H) continue;
    if (mol.bonds[bond].order != BondOrder::kSingle) continue;
    keep[i] = false;
    ++count[nb];
  }
  Molecule out = keep_atoms(mol, keep);
  folded.clear();
  for (std::size_t i = 0; i < mol.atoms.size(); ++i) {
    if (keep[i]) folded.push_back(count[i]);
  }
  return out;
}

// N(=O)=O -> [N+](=O)[O-] and N=N#N -> N=[N+]=[N-].
inline void normalize_groups(Molecule& mol) {
  const auto adj = adjacency(mol);
  for (std::size_t i = 0; i < mol.atoms.size(); ++i) {
    Atom& n = mol.atoms[i];
    if (n.element != element::N || n.formal_charge != 0 || n.is_aromatic) continue;

    std::vector<int> double_o;
    int triple_n = -1;
    int double_n = -1;
    for (auto [nb, bond] : adj[i]) {
      const Atom& other = mol.atoms[nb];
      const BondOrder order = mol.bonds[bond].order;
      if (other.element == element::O && other.formal_charge == 0 && adj[nb].size() == 1 &&
          order == BondOrder::kDouble) {
        double_o.push_back(bond);
      }
      if (other.element == element::N && other.formal_charge == 0 && order == BondOrder::kTriple &&
          adj[nb].size() == 1) {
        triple_n = bond;
      }
      if (other.element == element::N && order == BondOrder::kDouble) double_n = bond;
    }
    if (double_o.size() == 2) {
      Bond& b = mol.bonds[double_o[1]];
      b.order = BondOrder::kSingle;
      n.formal_charge = 1;
      mol.atoms[b.other(static_cast<int>(i))].formal_charge = -1;
    } else if (triple_n >= 0 && double_n >= 0) {
      Bond& b = mol.bonds[triple_n];
      b.order = BondOrder::kDouble;
      n.formal_charge = 1;
      mol.atoms[b.other(static_cast<int>(i))].formal_charge = -1;
    }
  }
}

// Pi electrons an atom donates to a ring, or nullopt when it cannot take part
// in an aromatic system.
inline std::optional<int> pi_electrons(const Molecule& mol, int atom,
                                       const std::vector<bool>& in_ring,
                                       const std::vector<bool>& aromatic_bond) {
  const Atom& a = mol.atoms[atom];
  bool ring_double = false;
  bool exo_double = false;
  for (std::size_t bi = 0; bi < mol.bonds.size(); ++bi) {
    const Bond& b = mol.bonds[bi];
    if (b.a != atom && b.b != atom) continue;
    if (b.order == BondOrder::kTriple) return std::nullopt;
    if (b.order == BondOrder::kAromatic || aromatic_bond[bi]) {
      ring_double = true;
    } else if (b.order == BondOrder::kDouble) {
      if (in_ring[b.other(atom)]) {
        ring_double = true;
      } else {
        exo_double = true;
      }
    }
  }
  if (ring_double) return 1;
  if (exo_double) {
    // C=O / C=S style exocyclic double bonds leave an empty p orbital
    if (a.element == element::C) return 0;
    return std::nullopt;
  }
  const int degree = a.explicit_degree + a.implicit_h;
  switch (a.element) {
    case element::C:
      if (a.formal_charge == -1) return 2;
      if (a.formal_charge == 1) return 0;
      return std::nullopt;
    case element::B:
      return a.formal_charge == 0 && degree == 3 ? std::optional<int>(0) : std::nullopt;
    case element::N:
    case element::P:
      if (a.formal_charge == 0 && degree == 3) return 2;
      if (a.formal_charge == -1 && degree == 2) return 2;
      return std::nullopt;
    case element::O:
    case element::S:
    case element::Se:
      if (a.formal_charge == 0 && degree == 2) return 2;
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

// Hueckel perception over SSSR rings. Rings written with aromatic bonds are
// trusted. Kekule rings are tested repeatedly so that a ring fused to an
// already-aromatic ring can count the shared double bond.
inline void perceive_aromaticity(Molecule& mol) {
  auto& info = mol.rings;
  std::vector<std::vector<int>> bonds_of;
  for (const auto& ring : info.rings) bonds_of.push_back(ring_bonds(mol, ring));
  std::vector<bool> aromatic_bond(mol.bonds.size(), false);
  for (std::size_t r = 0; r < info.rings.size(); ++r) {
    info.aromatic[r] = std::all_of(bonds_of[r].begin(), bonds_of[r].end(), [&](int b) {
      return mol.bonds[b].order == BondOrder::kAromatic;
    });
    if (info.aromatic[r]) {
      for (int b : bonds_of[r]) aromatic_bond[b] = true;
    }
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t r = 0; r < info.rings.size(); ++r) {
      if (info.aromatic[r]) continue;
      const auto& ring = info.rings[r];
      std::vector<bool> in_ring(mol.atoms.size(), false);
      for (int a : ring) in_ring[a] = true;
      int electrons = 0;
      bool ok = true;
      for (int a : ring) {
        const auto e = pi_electrons(mol, a, in_ring, aromatic_bond);
        if (!e) {
          ok = false;
          break;
        }
        electrons += *e;
      }
      if (!ok || electrons % 4 != 2) continue;
      info.aromatic[r] = true;
      for (int b : bonds_of[r]) aromatic_bond[b] = true;
      changed = true;
    }
  }

  for (std::size_t r = 0; r < info.rings.size(); ++r) {
    if (!info.aromatic[r]) continue;
    for (int b : bonds_of[r]) {
      mol.bonds[b].order = BondOrder::kAromatic;
      mol.bonds[b].in_aromatic_ring = true;
      mol.atoms[mol.bonds[b].a].is_aromatic = true;
      mol.atoms[mol.bonds[b].b].is_aromatic = true;
    }
  }

  // aromatic bonds outside any ring (e.g. the biaryl bond in c1ccccc1c1ccccc1)
  for (Bond& b : mol.bonds) {
    if (b.order == BondOrder::kAromatic && !b.is_in_ring) b.order = BondOrder::kSingle;
    // an aromatic ring bond whose SSSR rings are not all aromatic still counts
    if (b.order == BondOrder::kAromatic) b.in_aromatic_ring = true;
  }
  std::vector<bool> has_aromatic(mol.atoms.size(), false);
  for (const Bond& b : mol.bonds) {
    if (b.order == BondOrder::kAromatic) has_aromatic[b.a] = has_aromatic[b.b] = true;
  }
  for (std::size_t i = 0; i < mol.atoms.size(); ++i) {
    if (!has_aromatic[i]) mol.atoms[i].is_aromatic = false;
  }
}

// A bond is conjugated when it is aromatic; when it is single and both ends
// carry a multiple (or aromatic) bond; or when it is a multiple bond sharing
// an atom with another multiple bond or with a conjugated single bond.
inline void assign_conjugation(Molecule& mol) {
  std::vector<bool> has_multiple(mol.atoms.size(), false);
  for (const Bond& b : mol.bonds) {
    if (b.order != BondOrder::kSingle) has_multiple[b.a] = has_multiple[b.b] = true;
  }
  for (Bond& b : mol.bonds) {
    b.is_conjugated = b.order == BondOrder::kAromatic ||
                      (b.order == BondOrder::kSingle && has_multiple[b.a] && has_multiple[b.b]);
  }
  for (std::size_t i = 0; i < mol.bonds.size(); ++i) {
    Bond& b = mol.bonds[i];
    if (b.order != BondOrder::kDouble && b.order != BondOrder::kTriple) continue;
    for (std::size_t j = 0; j < mol.bonds.size() && !b.is_conjugated; ++j) {
      if (i == j) continue;
      const Bond& o = mol.bonds[j];
      const bool shares = o.a == b.a || o.a == b.b || o.b == b.a || o.b == b.b;
      if (!shares) continue;
      if (o.order != BondOrder::kSingle) b.is_conjugated = true;
      if (o.order == BondOrder::kSingle && has_multiple[o.a] && has_multiple[o.b]) {
        b.is_conjugated = true;
      }
    }
  }
}

}  // namespace detail

// Returns the standardized molecule. Idempotent: standardizing the result
// again gives the same value field for field.
inline Molecule standardize(const Molecule& input, const StandardizeConfig& cfg = {}) {
  for (const Bond& b : input.bonds) {
    const int n = static_cast<int>(input.atoms.size());
    if (b.a < 0 || b.b < 0 || b.a >= n || b.b >= n || b.a == b.b) {
      throw ChemError("invalid bond endpoints");
    }
  }
  if (input.atoms.empty()) throw ChemError("molecule has no atoms");

  Molecule mol = detail::apply_fragment_policy(input, cfg.fragments);

  std::vector<int> folded;
  mol = detail::fold_hydrogens(mol, folded);
  detail::normalize_groups(mol);

  // hydrogen counts come from the bond orders as drawn, before aromaticity
  // perception rewrites Kekule rings
  for (std::size_t i = 0; i < mol.atoms.size(); ++i) {
    Atom& a = mol.atoms[i];
    if (a.h_count_fixed) {
      a.implicit_h += folded[i];
      continue;
    }
    const HydrogenCount h = default_hydrogens(mol, static_cast<int>(i), folded[i]);
    if (h.over_valent) {
      mol.warnings.push_back("atom " + std::to_string(i) + " (" +
                             std::string(element_symbol(a.element)) +
                             ") exceeds its default valence; implicit H set to 0");
    }
    a.implicit_h = h.count + folded[i];
    a.h_count_fixed = true;
  }
  for (Atom& a : mol.atoms) a.h_count_fixed = true;

  perceive_rings(mol);
  detail::perceive_aromaticity(mol);
  detail::assign_conjugation(mol);

  for (Atom& a : mol.atoms) a.explicit_degree = 0;
  for (const Bond& b : mol.bonds) {
    ++mol.atoms[b.a].explicit_degree;
    ++mol.atoms[b.b].explicit_degree;
  }
  return mol;
}

}  // namespace airi::chem
