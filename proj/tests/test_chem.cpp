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

#include <gtest/gtest.h>

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "airi/chem.hpp"
#include "oracles.hpp"

namespace {

using airi::ChemError;
using namespace airi::chem;

Molecule std_smiles(const std::string& s, StandardizeConfig cfg = {}) {
  return standardize(parse_smiles(s), cfg);
}

std::vector<int> hydrogens(const Molecule& m) {
  std::vector<int> out;
  for (const auto& a : m.atoms) out.push_back(a.implicit_h);
  return out;
}

struct MolAtom {
  std::string symbol;
};

// Minimal V2000 writer for building test inputs.
std::string molblock(const std::vector<std::string>& symbols,
                     const std::vector<std::tuple<int, int, int>>& bonds,
                     const std::string& extra = "") {
  std::string out = "test\n  airi\n\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "%3zu%3zu  0  0  0  0  0  0  0  0999 V2000\n", symbols.size(),
                bonds.size());
  out += buf;
  for (const auto& s : symbols) {
    std::snprintf(buf, sizeof buf, "%10.4f%10.4f%10.4f %-3s 0  0  0  0  0  0  0  0  0  0  0  0\n",
                  0.0, 0.0, 0.0, s.c_str());
    out += buf;
  }
  for (auto [a, b, t] : bonds) {
    std::snprintf(buf, sizeof buf, "%3d%3d%3d  0  0  0  0\n", a, b, t);
    out += buf;
  }
  out += extra;
  out += "M  END\n";
  return out;
}

// Pi electrons of a ring computed straight from the drawn Kekule structure.
int kekule_pi_count(const Molecule& kekule, const std::vector<int>& ring) {
  int count = 0;
  for (int a : ring) {
    bool has_double = false;
    for (const auto& b : kekule.bonds) {
      if ((b.a == a || b.b == a) && b.order == BondOrder::kDouble) has_double = true;
    }
    const auto& atom = kekule.atoms[a];
    if (has_double) {
      count += 1;
    } else if (atom.element == element::N || atom.element == element::O ||
               atom.element == element::S) {
      count += 2;
    }
  }
  return count;
}

const std::vector<std::string>& corpus() {
  static const std::vector<std::string> kCorpus = {
      "CCO", "CCCC", "CC(C)C", "CC(C)(C)C", "C=C", "C#C", "CC=O", "CC(=O)O", "CC(=O)OC",
      "CCN", "CN(C)C", "CC#N", "c1ccccc1", "Cc1ccccc1", "Oc1ccccc1", "c1ccncc1", "c1cc[nH]c1",
      "c1ccoc1", "c1ccsc1", "c1ccc2ccccc2c1", "c1ccc(cc1)-c1ccccc1", "C1CCCCC1", "C1CC1",
      "C1CCC1", "C1CCCC1", "C1=CCCCC1", "O=C1CCCCC1", "CC(C)O", "OCCO", "ClCCl", "BrCCBr",
      "FC(F)(F)F", "CS(C)=O", "CS(=O)(=O)C", "CSC", "CS", "C[N+](=O)[O-]", "CN=[N+]=[N-]",
      "[NH4+]", "C[O-]", "CC(=O)[O-]", "OC(=O)c1ccccc1", "Nc1ccccc1", "O=Cc1ccccc1",
      "CC(C)CC(C)(C)C", "C[Si](C)(C)OC", "C[Si](C)(C)Oc1ccccc1", "c1ccc2[nH]ccc2c1",
      "c1ccc2ncccc2c1", "O=c1cccc[nH]1", "C1CCOC1", "C1COCCO1", "CCOC(=O)C=C", "N#CC#N",
      "CC(=O)N", "CP(C)C", "OP(=O)(O)O", "CCl", "ICC", "O=C=O", "OB(O)c1ccccc1",
      "C1CC2CCC1C2", "CC1=CC(=O)C=CC1=O"};
  return kCorpus;
}

// ---------------------------------------------------------------------------
// parse_smiles

TEST(ParseSmiles, Ethanol) {
  const Molecule m = parse_smiles("CCO");
  ASSERT_EQ(m.atoms.size(), 3u);
  ASSERT_EQ(m.bonds.size(), 2u);
  for (const auto& b : m.bonds) EXPECT_EQ(b.order, BondOrder::kSingle);
  EXPECT_EQ(m.atoms[2].element, element::O);
  for (const auto& a : m.atoms) EXPECT_EQ(a.implicit_h, 0);
}

TEST(ParseSmiles, Benzene) {
  Molecule m = parse_smiles("c1ccccc1");
  ASSERT_EQ(m.atoms.size(), 6u);
  ASSERT_EQ(m.bonds.size(), 6u);
  for (const auto& a : m.atoms) EXPECT_TRUE(a.is_aromatic);
  for (const auto& b : m.bonds) EXPECT_EQ(b.order, BondOrder::kAromatic);
  const RingInfo rings = perceive_rings(m);
  ASSERT_EQ(rings.size(), 1u);
  EXPECT_EQ(rings.rings[0].size(), 6u);
}

TEST(ParseSmiles, CyclopropaneCarboxylate) {
  Molecule m = parse_smiles("C1CC1C(=O)[O-]");
  ASSERT_EQ(m.atoms.size(), 6u);
  const RingInfo rings = perceive_rings(m);
  ASSERT_EQ(rings.size(), 1u);
  EXPECT_EQ(rings.rings[0].size(), 3u);
  int charged = 0;
  for (const auto& a : m.atoms) {
    if (a.formal_charge == -1) ++charged;
    else EXPECT_EQ(a.formal_charge, 0);
  }
  EXPECT_EQ(charged, 1);
}

TEST(ParseSmiles, StereoAndIsotopesAreDiscarded) {
  const Molecule a = std_smiles("C/C=C/C");
  const Molecule b = std_smiles("CC=CC");
  EXPECT_EQ(a, b);
  const Molecule c = std_smiles("N[C@@H](C)C(=O)O");
  const Molecule d = std_smiles("NC(C)C(=O)O");
  EXPECT_EQ(c, d);
  const Molecule e = std_smiles("[13CH4]");
  EXPECT_EQ(e.atoms[0].implicit_h, 4);
}

TEST(ParseSmiles, BracketAtoms) {
  const Molecule m = parse_smiles("[NH4+]");
  EXPECT_EQ(m.atoms[0].formal_charge, 1);
  EXPECT_EQ(m.atoms[0].implicit_h, 4);
  EXPECT_TRUE(m.atoms[0].h_count_fixed);
  EXPECT_EQ(parse_smiles("[Fe+++]").atoms[0].formal_charge, 3);
  EXPECT_EQ(parse_smiles("[O-2]").atoms[0].formal_charge, -2);
  EXPECT_EQ(parse_smiles("[CH3:7]").atoms[0].implicit_h, 3);
  EXPECT_EQ(parse_smiles("[Si](C)(C)(C)C").atoms[0].element, element::Si);
}

TEST(ParseSmiles, RingClosureVariants) {
  EXPECT_EQ(std_smiles("C%10CCCCC%10"), std_smiles("C1CCCCC1"));
  EXPECT_EQ(std_smiles("C=1CCCCC1"), std_smiles("C1CCCCC=1"));
  // digits may be reused after closing
  const Molecule m = parse_smiles("C1CC1C1CC1");
  EXPECT_EQ(m.bonds.size(), 7u);
}

TEST(ParseSmiles, SyntaxErrorCarriesOffset) {
  try {
    parse_smiles("CC(C");
    FAIL() << "expected ChemError";
  } catch (const ChemError& e) {
    ASSERT_TRUE(e.offset().has_value());
  }
  try {
    parse_smiles("CC?C");
    FAIL() << "expected ChemError";
  } catch (const ChemError& e) {
    EXPECT_EQ(e.offset(), 2u);
  }
  EXPECT_THROW(parse_smiles(""), ChemError);
  EXPECT_THROW(parse_smiles("C)"), ChemError);
  EXPECT_THROW(parse_smiles("C=="), ChemError);
  EXPECT_THROW(parse_smiles("C=(C)"), ChemError);
}

TEST(ParseSmiles, UnmatchedRingClosure) {
  try {
    parse_smiles("C1CCC");
    FAIL() << "expected ChemError";
  } catch (const ChemError& e) {
    EXPECT_EQ(e.offset(), 1u);
  }
  EXPECT_THROW(parse_smiles("C11"), ChemError);
  EXPECT_THROW(parse_smiles("C12CC12"), ChemError);
  EXPECT_THROW(parse_smiles("C=1CC#1"), ChemError);
}

TEST(ParseSmiles, UnsupportedElements) {
  EXPECT_THROW(parse_smiles("CX"), ChemError);
  EXPECT_THROW(parse_smiles("*C"), ChemError);
  EXPECT_THROW(parse_smiles("[Xx]"), ChemError);
  EXPECT_THROW(parse_smiles("Si"), ChemError);
}

TEST(ParseSmiles, ImpossibleBracketHydrogenCount) {
  EXPECT_THROW(parse_smiles("[CH5]"), ChemError);
  EXPECT_THROW(parse_smiles("C[CH4]"), ChemError);
  EXPECT_THROW(parse_smiles("[OH3]"), ChemError);
  EXPECT_NO_THROW(parse_smiles("[OH3+]"));
}

// ---------------------------------------------------------------------------
// parse_molfile

TEST(ParseMolfile, Ethane) {
  const Molecule m = parse_molfile(molblock({"C", "C"}, {{1, 2, 1}}));
  ASSERT_EQ(m.atoms.size(), 2u);
  ASSERT_EQ(m.bonds.size(), 1u);
  EXPECT_EQ(m.bonds[0].order, BondOrder::kSingle);
  EXPECT_EQ(m.source_id, "test");
  const Molecule s = standardize(m);
  EXPECT_EQ(hydrogens(s), (std::vector<int>{3, 3}));
}

TEST(ParseMolfile, ChargeLines) {
  const Molecule m =
      parse_molfile(molblock({"O", "C"}, {{1, 2, 1}}, "M  CHG  1   1  -1\n"));
  EXPECT_EQ(m.atoms[0].formal_charge, -1);
  EXPECT_EQ(m.atoms[1].formal_charge, 0);
  EXPECT_EQ(standardize(m).atoms[0].implicit_h, 0);
}

TEST(ParseMolfile, AromaticBondCode) {
  const Molecule m = parse_molfile(molblock(
      {"C", "C", "C", "C", "C", "C"},
      {{1, 2, 4}, {2, 3, 4}, {3, 4, 4}, {4, 5, 4}, {5, 6, 4}, {6, 1, 4}}));
  ASSERT_EQ(m.bonds.size(), 6u);
  for (const auto& b : m.bonds) EXPECT_EQ(b.order, BondOrder::kAromatic);
  EXPECT_TRUE(airi::oracle::isomorphic(standardize(m), std_smiles("c1ccccc1")));
}

TEST(ParseMolfile, ExplicitHydrogensAreFolded) {
  const Molecule m = parse_molfile(
      molblock({"C", "O", "H", "H", "H", "H"}, {{1, 2, 1}, {1, 3, 1}, {1, 4, 1}, {1, 5, 1}, {2, 6, 1}}));
  EXPECT_EQ(m.atoms.size(), 6u);
  const Molecule s = standardize(m);
  ASSERT_EQ(s.atoms.size(), 2u);
  EXPECT_EQ(hydrogens(s), (std::vector<int>{3, 1}));
  EXPECT_TRUE(airi::oracle::isomorphic(s, std_smiles("CO")));
}

TEST(ParseMolfile, Errors) {
  EXPECT_THROW(parse_molfile("x\n\n\nabc\n"), ChemError);
  EXPECT_THROW(parse_molfile(molblock({"C", "C"}, {{1, 3, 1}})), ChemError);
  EXPECT_THROW(parse_molfile(molblock({"C", "Qq"}, {{1, 2, 1}})), ChemError);
  EXPECT_THROW(parse_molfile(molblock({"C", "C"}, {{1, 2, 8}})), ChemError);
  EXPECT_THROW(parse_molfile("short\n"), ChemError);
}

TEST(ParseMolfile, SdfSplitting) {
  const std::string sdf = molblock({"C"}, {}) + "> <RI>\n100\n\n$$$$\n" +
                          molblock({"C", "O"}, {{1, 2, 1}}) + "$$$$\n";
  const auto blocks = split_sdf(sdf);
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(parse_molfile(blocks[1]).atoms.size(), 2u);
}

// ---------------------------------------------------------------------------
// standardize

TEST(Standardize, EthanolHydrogens) {
  EXPECT_EQ(hydrogens(std_smiles("CCO")), (std::vector<int>{3, 2, 1}));
}

TEST(Standardize, Benzene) {
  const Molecule m = std_smiles("c1ccccc1");
  for (const auto& a : m.atoms) EXPECT_EQ(a.implicit_h, 1);
  for (const auto& b : m.bonds) {
    EXPECT_TRUE(b.in_aromatic_ring);
    EXPECT_EQ(b.smallest_ring_size, 6);
    EXPECT_TRUE(b.is_conjugated);
  }
}

TEST(Standardize, PyridineHueckelCount) {
  const Molecule kekule = parse_smiles("C1=CC=NC=C1");
  Molecule rings_only = kekule;
  const RingInfo info = perceive_rings(rings_only);
  ASSERT_EQ(info.size(), 1u);
  EXPECT_EQ(kekule_pi_count(kekule, info.rings[0]), 6);

  const Molecule aromatic = std_smiles("c1ccncc1");
  EXPECT_EQ(aromatic.atoms[3].implicit_h, 0);
  ASSERT_EQ(aromatic.rings.size(), 1u);
  EXPECT_TRUE(aromatic.rings.aromatic[0]);
  EXPECT_EQ(standardize(kekule), aromatic);
}

TEST(Standardize, KekuleRingsArePerceived) {
  EXPECT_EQ(std_smiles("C1=CC=CC=C1"), std_smiles("c1ccccc1"));
  EXPECT_TRUE(airi::oracle::isomorphic(std_smiles("C1=CNC=C1"), std_smiles("c1cc[nH]c1")));
  EXPECT_TRUE(airi::oracle::isomorphic(std_smiles("C1=COC=C1"), std_smiles("c1ccoc1")));
  EXPECT_EQ(std_smiles("C1=CC=C2C=CC=CC2=C1"), std_smiles("c1ccc2ccccc2c1"));
  const Molecule cyclohexene = std_smiles("C1=CCCCC1");
  for (const auto& b : cyclohexene.bonds) EXPECT_FALSE(b.in_aromatic_ring);
  EXPECT_FALSE(cyclohexene.rings.aromatic[0]);
  const Molecule cot = std_smiles("C1=CC=CC=CC=C1");
  EXPECT_FALSE(cot.rings.aromatic[0]);
}

TEST(Standardize, PyrroleKeepsItsHydrogen) {
  const Molecule m = std_smiles("C1=CNC=C1");
  int nh = -1;
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    if (m.atoms[i].element == element::N) nh = m.atoms[i].implicit_h;
  }
  EXPECT_EQ(nh, 1);
  EXPECT_NE(write_smiles(m).find("[nH]"), std::string::npos);
}

TEST(Standardize, BiarylBondIsNotAromatic) {
  const Molecule m = std_smiles("c1ccccc1c1ccccc1");
  int single = 0;
  for (const auto& b : m.bonds) {
    if (b.order == BondOrder::kSingle) {
      ++single;
      EXPECT_FALSE(b.is_in_ring);
      EXPECT_TRUE(b.is_conjugated);
    }
  }
  EXPECT_EQ(single, 1);
}

TEST(Standardize, NitroAndAzideNormalization) {
  EXPECT_EQ(std_smiles("CN(=O)=O"), std_smiles("C[N+](=O)[O-]"));
  EXPECT_EQ(std_smiles("CN=N#N"), std_smiles("CN=[N+]=[N-]"));
}

TEST(Standardize, ExplicitHydrogenAtomsAreFolded) {
  EXPECT_EQ(std_smiles("[H]C([H])([H])[H]"), std_smiles("C"));
  EXPECT_EQ(std_smiles("[H]OC"), std_smiles("OC"));
  EXPECT_EQ(std_smiles("[H][H]").atoms.size(), 2u);
}

TEST(Standardize, FragmentPolicy) {
  EXPECT_THROW(std_smiles("CC(=O)[O-].[Na+]"), ChemError);
  const Molecule m = std_smiles("[Na+].CC(=O)[O-]", {.fragments = FragmentPolicy::kLargest});
  EXPECT_EQ(m.atoms.size(), 4u);
  EXPECT_FALSE(m.warnings.empty());
}

TEST(Standardize, OverValentAtomWarns) {
  const Molecule m = std_smiles("C(C)(C)(C)(C)C");
  EXPECT_EQ(m.atoms[0].implicit_h, 0);
  EXPECT_FALSE(m.warnings.empty());
}

TEST(Standardize, HypervalentOnlyWhenDrawn) {
  EXPECT_EQ(hydrogens(std_smiles("CS(=O)(=O)C")), (std::vector<int>{3, 0, 0, 0, 3}));
  EXPECT_EQ(hydrogens(std_smiles("CSC")), (std::vector<int>{3, 0, 3}));
  EXPECT_EQ(hydrogens(std_smiles("C[N+](C)(C)C"))[1], 0);
}

TEST(Standardize, Conjugation) {
  const Molecule diene = std_smiles("C=CC=C");
  for (const auto& b : diene.bonds) EXPECT_TRUE(b.is_conjugated);
  const Molecule isolated = std_smiles("C=CCC=C");
  for (const auto& b : isolated.bonds) EXPECT_FALSE(b.is_conjugated);
  const Molecule allene = std_smiles("C=C=C");
  for (const auto& b : allene.bonds) EXPECT_TRUE(b.is_conjugated);
  const Molecule toluene = std_smiles("Cc1ccccc1");
  EXPECT_FALSE(toluene.bonds[0].is_conjugated);
}

TEST(Standardize, InvariantsOverCorpus) {
  for (const auto& s : corpus()) {
    SCOPED_TRACE(s);
    const Molecule m = std_smiles(s);
    int degree_sum = 0;
    for (const auto& a : m.atoms) degree_sum += a.explicit_degree;
    EXPECT_EQ(degree_sum, 2 * static_cast<int>(m.bonds.size()));
    EXPECT_EQ(static_cast<int>(m.rings.size()),
              static_cast<int>(m.bonds.size()) - static_cast<int>(m.atoms.size()) + 1);
    for (const auto& b : m.bonds) {
      EXPECT_EQ(b.is_in_ring, b.smallest_ring_size.has_value());
      if (b.in_aromatic_ring || b.order == BondOrder::kAromatic) {
        EXPECT_TRUE(b.is_in_ring);
      }
    }
    for (const auto& ring : m.rings.rings) EXPECT_GE(ring.size(), 3u);
  }
}

TEST(Standardize, Idempotent) {
  for (const auto& s : corpus()) {
    SCOPED_TRACE(s);
    const Molecule once = std_smiles(s);
    EXPECT_EQ(standardize(once), once);
  }
}

TEST(WriteSmiles, RoundTripCorpus) {
  ASSERT_GE(corpus().size(), 50u);
  for (const auto& s : corpus()) {
    SCOPED_TRACE(s);
    const Molecule intent = std_smiles(s);
    const std::string written = write_smiles(intent);
    const Molecule back = std_smiles(written);
    EXPECT_TRUE(airi::oracle::isomorphic(intent, back)) << written;
  }
}

// ---------------------------------------------------------------------------
// perceive_rings

TEST(PerceiveRings, Propane) {
  Molecule m = parse_smiles("CCC");
  EXPECT_EQ(perceive_rings(m).size(), 0u);
  for (const auto& b : m.bonds) EXPECT_FALSE(b.is_in_ring);
}

TEST(PerceiveRings, Naphthalene) {
  Molecule m = parse_smiles("c1ccc2ccccc2c1");
  const RingInfo info = perceive_rings(m);
  ASSERT_EQ(info.size(), 2u);
  EXPECT_EQ(info.rings[0].size(), 6u);
  EXPECT_EQ(info.rings[1].size(), 6u);
  // fusion bond joins the two atoms shared by both rings
  const auto fusion = m.find_bond(3, 8);
  ASSERT_TRUE(fusion.has_value());
  EXPECT_EQ(m.bonds[*fusion].smallest_ring_size, 6);
}

TEST(PerceiveRings, BicyclicUsesSmallestRing) {
  // norbornane: two 5-rings, the 6-ring envelope is not in the SSSR
  Molecule m = parse_smiles("C1CC2CCC1C2");
  const RingInfo info = perceive_rings(m);
  ASSERT_EQ(info.size(), 2u);
  EXPECT_EQ(info.rings[0].size(), 5u);
  EXPECT_EQ(info.rings[1].size(), 5u);
}

TEST(PerceiveRings, RandomGraphsMatchCycleEnumeration) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 8);
    const int extra = static_cast<int>(rng() % 5);
    const auto g = airi::oracle::random_connected_graph(rng, n, extra);
    Molecule m = airi::oracle::graph_to_molecule(g);
    const RingInfo info = perceive_rings(m);

    const auto cycles = airi::oracle::enumerate_simple_cycles(g.n, g.edges);
    const auto space = airi::oracle::cycle_space(static_cast<int>(g.edges.size()), cycles);
    const int expected = static_cast<int>(g.edges.size()) - g.n + 1;
    ASSERT_EQ(space.rank, expected);
    ASSERT_EQ(static_cast<int>(info.size()), expected) << "trial " << trial;
    int total = 0;
    for (const auto& r : info.rings) total += static_cast<int>(r.size());
    EXPECT_EQ(total, space.min_basis_length) << "trial " << trial;
    for (const auto& r : info.rings) {
      EXPECT_NO_THROW(ring_bonds(m, r));
      std::set<int> distinct(r.begin(), r.end());
      EXPECT_EQ(distinct.size(), r.size());
    }
  }
}

}  // namespace
