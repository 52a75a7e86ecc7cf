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

// Synthetic retention-index data.
//
// Molecules are chains of fragments written directly as SMILES. The
// ground-truth RI is linear in group counts of the standardized molecule
// (coefficients below) and observations carry Gaussian noise whose standard
// deviation grows with the number of heteroatoms, TMS groups and rings.

#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "airi/chem.hpp"
#include "airi/dataset.hpp"
#include "airi/rng.hpp"

namespace airi::synth {

// Group-additivity coefficients, RI units.
struct Coefficients {
  double base = 100.0;
  double carbon = 100.0;           // aliphatic C
  double aromatic_carbon = 88.0;
  double branch = -22.0;           // per carbon with three or more heavy neighbours
  double oxygen = 95.0;
  double nitrogen = 110.0;
  double sulfur = 210.0;
  double fluorine = 15.0;
  double chlorine = 175.0;
  double bromine = 260.0;
  double silicon = 30.0;
  double polar_h = 130.0;          // per H on O or N
  double double_bond = 12.0;
  double triple_bond = 40.0;
  double ring = 45.0;              // per ring
  double aromatic_ring = 25.0;     // extra per aromatic ring
};

struct NoiseModel {
  double sigma0 = 4.0;
  double per_heteroatom = 3.0;
  double per_tms = 6.0;
  double per_ring = 2.0;
};

struct SynthSpec {
  int n = 1000;
  std::uint64_t seed = 0;
  double tms_fraction = 0.5;  // of molecules carrying a derivatizable OH
  int max_units = 5;
  Coefficients coef;
  NoiseModel noise;
};

struct Groups {
  int carbon = 0, aromatic_carbon = 0, branch = 0, oxygen = 0, nitrogen = 0, sulfur = 0, fluorine = 0,
      chlorine = 0, bromine = 0, silicon = 0, polar_h = 0, double_bond = 0, triple_bond = 0, rings = 0,
      aromatic_rings = 0;
  int heteroatoms() const { return oxygen + nitrogen + sulfur + fluorine + chlorine + bromine; }
};

inline Groups count_groups(const chem::Molecule& mol) {
  namespace el = chem::element;
  Groups g;
  std::vector<int> heavy_degree(mol.atoms.size(), 0);
  for (const auto& b : mol.bonds) {
    ++heavy_degree[b.a];
    ++heavy_degree[b.b];
    if (b.order == chem::BondOrder::kDouble) ++g.double_bond;
    if (b.order == chem::BondOrder::kTriple) ++g.triple_bond;
  }
  for (std::size_t i = 0; i < mol.atoms.size(); ++i) {
    const auto& a = mol.atoms[i];
    switch (a.element) {
      case el::C:
        (a.is_aromatic ? g.aromatic_carbon : g.carbon)++;
        if (!a.is_aromatic && heavy_degree[i] >= 3) ++g.branch;
        break;
      case el::O: ++g.oxygen; g.polar_h += a.implicit_h; break;
      case el::N: ++g.nitrogen; g.polar_h += a.implicit_h; break;
      case el::S: ++g.sulfur; break;
      case el::F: ++g.fluorine; break;
      case el::Cl: ++g.chlorine; break;
      case el::Br: ++g.bromine; break;
      case el::Si: ++g.silicon; break;
      default: break;
    }
  }
  g.rings = static_cast<int>(mol.rings.size());
  for (bool ar : mol.rings.aromatic) g.aromatic_rings += ar ? 1 : 0;
  return g;
}

inline double true_ri(const Groups& g, const Coefficients& c) {
  return c.base + c.carbon * g.carbon + c.aromatic_carbon * g.aromatic_carbon + c.branch * g.branch +
         c.oxygen * g.oxygen + c.nitrogen * g.nitrogen + c.sulfur * g.sulfur + c.fluorine * g.fluorine +
         c.chlorine * g.chlorine + c.bromine * g.bromine + c.silicon * g.silicon + c.polar_h * g.polar_h +
         c.double_bond * g.double_bond + c.triple_bond * g.triple_bond + c.ring * g.rings +
         c.aromatic_ring * g.aromatic_rings;
}

inline double noise_sigma(const Groups& g, bool tms, const NoiseModel& m) {
  return m.sigma0 + m.per_heteroatom * g.heteroatoms() + (tms ? m.per_tms : 0.0) + m.per_ring * g.rings;
}

namespace detail {

// Fragments with one attachment on each side. Ring digits are closed inside
// the fragment, so reusing "1" is safe.
inline const std::vector<std::string>& inner_units() {
  static const std::vector<std::string> u = {
      "C",        "C",          "C",        "CC",       "C(C)",     "C(C)(C)",   "C(O)",      "C(=O)",
      "O",        "N",          "C(F)",     "C(Cl)",    "C(Br)",    "C=C",       "C#C",       "S",
      "c1ccc(cc1)", "c1cccc(c1)", "C1CCC(CC1)", "c1ccc(o1)", "c1ccc(s1)", "c1ccc(nc1)", "C(N)",   "C(=O)O",
      "C(=O)N",   "C1CC(C1)",   "C(C#N)",   "c1cc2ccccc2cc1"};
  return u;
}

inline const std::vector<std::string>& end_units() {
  static const std::vector<std::string> u = {"C",  "C",  "CC", "C(C)C", "O",  "O",  "O",  "N",  "Cl", "Br",
                                             "F",  "C#N", "c1ccccc1", "OC", "C(=O)O", "C=O", "C1CCCCC1",
                                             "SC", "c1ccncc1", "C(F)(F)F"};
  return u;
}

inline bool starts_hetero(const std::string& s) {
  return !s.empty() && (s[0] == 'O' || s[0] == 'N' || s[0] == 'S' || s[0] == 'F' || s.rfind("Cl", 0) == 0 ||
                        s.rfind("Br", 0) == 0);
}

inline bool ends_hetero(const std::string& s) {
  return !s.empty() && (s.back() == 'O' || s.back() == 'N' || s.back() == 'S');
}

// Tail groups ending in OH that can be silylated.
inline bool derivatizable(const std::string& tail) { return tail == "O" || tail == "C(=O)O"; }

}  // namespace detail

struct SynthRecord {
  DatasetRecord record;
  double true_ri = 0.0;
  double noise_sigma = 0.0;
};

inline std::string random_smiles(Rng& rng, const SynthSpec& spec, bool& tms) {
  const auto& inner = detail::inner_units();
  const auto& ends = detail::end_units();
  const int units = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(spec.max_units)));
  std::string head = ends[rng.uniform_int(ends.size())];
  // A head group is written reversed only where it matters for valence.
  if (head == "C(=O)O") head = "OC(=O)";
  if (head == "C=O") head = "O=C";
  if (head == "C#N") head = "N#C";
  if (head == "OC") head = "CO";
  if (head == "SC") head = "CS";
  if (head == "C(F)(F)F") head = "FC(F)(F)";
  std::string smiles = head;
  std::string prev = head;
  for (int k = 0; k < units; ++k) {
    std::string u;
    for (int tries = 0; tries < 8; ++tries) {
      u = inner[rng.uniform_int(inner.size())];
      if (!(detail::ends_hetero(prev) && detail::starts_hetero(u))) break;
    }
    if (detail::ends_hetero(prev) && detail::starts_hetero(u)) u = "C";
    smiles += u;
    prev = u;
  }
  std::string tail;
  for (int tries = 0; tries < 8; ++tries) {
    tail = ends[rng.uniform_int(ends.size())];
    if (!(detail::ends_hetero(prev) && detail::starts_hetero(tail))) break;
  }
  if (detail::ends_hetero(prev) && detail::starts_hetero(tail)) tail = "C";
  tms = detail::derivatizable(tail) && rng.uniform() < spec.tms_fraction;
  smiles += tail;
  if (tms) smiles += "[Si](C)(C)C";
  return smiles;
}

inline std::vector<SynthRecord> generate(const SynthSpec& spec) {
  if (spec.n < 0) throw Error("synth: n must be non-negative");
  if (spec.max_units < 1) throw Error("synth: max_units must be positive");
  Rng rng(spec.seed);
  std::vector<SynthRecord> out;
  out.reserve(static_cast<std::size_t>(spec.n));
  char id[32];
  for (int i = 0; i < spec.n; ++i) {
    bool tms = false;
    const std::string smiles = random_smiles(rng, spec, tms);
    const chem::Molecule mol = chem::standardize(chem::parse_smiles(smiles));
    const Groups g = count_groups(mol);
    SynthRecord r;
    r.true_ri = true_ri(g, spec.coef);
    r.noise_sigma = noise_sigma(g, tms, spec.noise);
    const double observed = std::max(0.0, r.true_ri + rng.normal(0.0, r.noise_sigma));
    std::snprintf(id, sizeof id, "syn%06d", i + 1);
    r.record.id = id;
    r.record.smiles = smiles;
    r.record.ri = std::round(observed * 100.0) / 100.0;
    if (tms) r.record.tags.push_back(kTmsTag);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<DatasetRecord> generate_records(const SynthSpec& spec) {
  std::vector<DatasetRecord> out;
  for (auto& r : generate(spec)) out.push_back(std::move(r.record));
  return out;
}

}  // namespace airi::synth
