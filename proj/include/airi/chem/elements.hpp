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

#include <array>
#include <optional>
#include <span>
#include <string_view>

namespace airi::chem {

inline constexpr int kMaxElement = 118;

inline constexpr std::array<std::string_view, kMaxElement + 1> kElementSymbols =
    {"*",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
     "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",
     "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br",
     "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag",
     "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
     "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
     "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
     "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am",
     "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh",
     "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

namespace element {
inline constexpr int H = 1;
inline constexpr int B = 5;
inline constexpr int C = 6;
inline constexpr int N = 7;
inline constexpr int O = 8;
inline constexpr int F = 9;
inline constexpr int Si = 14;
inline constexpr int P = 15;
inline constexpr int S = 16;
inline constexpr int Cl = 17;
inline constexpr int Se = 34;
inline constexpr int Br = 35;
inline constexpr int I = 53;
}  // namespace element

inline std::optional<int> element_from_symbol(std::string_view symbol) {
  for (int z = 1; z <= kMaxElement; ++z) {
    if (kElementSymbols[z] == symbol) return z;
  }
  return std::nullopt;
}

inline std::string_view element_symbol(int z) {
  if (z < 1 || z > kMaxElement) return "*";
  return kElementSymbols[z];
}

// Elements that may be written without brackets in SMILES.
inline bool is_organic_subset(int z) {
  using namespace element;
  return z == B || z == C || z == N || z == O || z == P || z == S || z == F ||
         z == Cl || z == Br || z == I;
}

// Allowed valences, lowest first. Only main-group elements that can carry
// implicit hydrogens are listed; everything else returns an empty span.
inline std::span<const int> allowed_valences(int z) {
  static constexpr int kH[] = {1};
  static constexpr int kB[] = {3};
  static constexpr int kC[] = {4};
  static constexpr int kN[] = {3, 5};
  static constexpr int kO[] = {2};
  static constexpr int kHalogen[] = {1};
  static constexpr int kIodine[] = {1, 3, 5};
  static constexpr int kSi[] = {4};
  static constexpr int kP[] = {3, 5};
  static constexpr int kS[] = {2, 4, 6};
  switch (z) {
    case 1: return kH;
    case 5: return kB;
    case 6: return kC;
    case 7: return kN;
    case 8: return kO;
    case 9: return kHalogen;
    case 14: return kSi;
    case 15: return kP;
    case 16: return kS;
    case 17: return kHalogen;
    case 32: return kSi;  // Ge
    case 33: return kP;   // As
    case 34: return kS;   // Se
    case 35: return kHalogen;
    case 52: return kS;   // Te
    case 53: return kIodine;
    default: return {};
  }
}

// Valences for a charged atom, using the isoelectronic neighbour: N+ behaves
// like C, O- like F, C- like N, and so on. Restricted to the p block where
// the shift is meaningful.
inline std::span<const int> allowed_valences(int z, int charge) {
  if (charge == 0) return allowed_valences(z);
  const int shifted = z - charge;
  const bool p_block = (z >= 5 && z <= 9) || (z >= 13 && z <= 17) ||
                       (z >= 31 && z <= 35) || (z >= 49 && z <= 53);
  if (!p_block || shifted < 1) return {};
  // Shifting across a noble gas or out of the block gives nonsense.
  const bool shifted_ok = (shifted >= 5 && shifted <= 9) ||
                          (shifted >= 13 && shifted <= 17) ||
                          (shifted >= 31 && shifted <= 35) ||
                          (shifted >= 49 && shifted <= 53);
  if (!shifted_ok) return {};
  return allowed_valences(shifted);
}

}  // namespace airi::chem
