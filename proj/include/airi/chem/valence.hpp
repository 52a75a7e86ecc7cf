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

#include <optional>

#include "airi/chem/molecule.hpp"

namespace airi::chem {

// Valence used by an atom's bonds when deciding its hydrogen count. Aromatic
// carbon (and two-connected aromatic N/P/As) carry one extra pi bond that the
// aromatic bond orders do not show.
inline int valence_in_use(const Molecule& mol, int atom) {
  const Atom& a = mol.atoms[atom];
  int sum = 0;
  int connections = 0;
  bool has_multiple = false;
  for (const Bond& b : mol.bonds) {
    if (b.a != atom && b.b != atom) continue;
    sum += bond_valence(b.order);
    ++connections;
    if (b.order == BondOrder::kDouble || b.order == BondOrder::kTriple) has_multiple = true;
  }
  if (a.is_aromatic && !has_multiple) {
    if (a.element == element::C) {
      sum += 1;
    } else if ((a.element == element::N || a.element == element::P ||
                a.element == 33) && connections == 2) {
      sum += 1;
    }
  }
  return sum;
}

struct HydrogenCount {
  int count = 0;
  bool over_valent = false;
};

// Default implicit hydrogens: the smallest allowed valence not below the
// valence in use, minus that valence. `extra_bonds` counts bonds that are not
// in the graph (already-folded explicit hydrogens).
inline HydrogenCount default_hydrogens(const Molecule& mol, int atom, int extra_bonds = 0) {
  const Atom& a = mol.atoms[atom];
  const auto valences = allowed_valences(a.element, a.formal_charge);
  if (valences.empty()) return {};
  const int used = valence_in_use(mol, atom) + extra_bonds;
  for (int v : valences) {
    if (v >= used) return {v - used, false};
  }
  return {0, true};
}

// Largest valence the element/charge pair may reach, if tabulated.
inline std::optional<int> max_valence(int element, int charge) {
  const auto valences = allowed_valences(element, charge);
  if (valences.empty()) return std::nullopt;
  return valences.back();
}

}  // namespace airi::chem
