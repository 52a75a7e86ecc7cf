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

#include <set>
#include <sstream>

#include "airi/synth.hpp"

namespace {

using namespace airi;

synth::Groups groups_of(const std::string& smiles) {
  return synth::count_groups(chem::standardize(chem::parse_smiles(smiles)));
}

TEST(Synth, GroupCounts) {
  const auto ethanol = groups_of("CCO");
  EXPECT_EQ(ethanol.carbon, 2);
  EXPECT_EQ(ethanol.oxygen, 1);
  EXPECT_EQ(ethanol.polar_h, 1);
  EXPECT_EQ(ethanol.rings, 0);

  const auto toluene = groups_of("Cc1ccccc1");
  EXPECT_EQ(toluene.carbon, 1);
  EXPECT_EQ(toluene.aromatic_carbon, 6);
  EXPECT_EQ(toluene.rings, 1);
  EXPECT_EQ(toluene.aromatic_rings, 1);
  EXPECT_EQ(toluene.double_bond, 0);

  const auto g = groups_of("CC(C)(C)C#N");
  EXPECT_EQ(g.branch, 1);
  EXPECT_EQ(g.triple_bond, 1);
  EXPECT_EQ(g.nitrogen, 1);
  EXPECT_EQ(g.polar_h, 0);

  const auto tms = groups_of("CCO[Si](C)(C)C");
  EXPECT_EQ(tms.silicon, 1);
  EXPECT_EQ(tms.polar_h, 0);
  EXPECT_EQ(tms.branch, 0);  // silicon is not counted as a branched carbon
}

TEST(Synth, TrueRiIsLinearInGroups) {
  const synth::Coefficients c;
  const auto g = groups_of("CCO");
  EXPECT_DOUBLE_EQ(synth::true_ri(g, c), c.base + 2 * c.carbon + c.oxygen + c.polar_h);
  const synth::Coefficients zero{0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  EXPECT_EQ(synth::true_ri(g, zero), 0.0);
}

TEST(Synth, NoiseGrowsWithHeteroatomsTmsAndRings) {
  const synth::NoiseModel m;
  EXPECT_DOUBLE_EQ(synth::noise_sigma(groups_of("CCCC"), false, m), m.sigma0);
  EXPECT_DOUBLE_EQ(synth::noise_sigma(groups_of("OCCCl"), false, m), m.sigma0 + 2 * m.per_heteroatom);
  EXPECT_DOUBLE_EQ(synth::noise_sigma(groups_of("C1CCCCC1"), true, m), m.sigma0 + m.per_tms + m.per_ring);
}

TEST(Synth, DeterministicPerSeed) {
  synth::SynthSpec s;
  s.n = 300;
  s.seed = 7;
  std::stringstream a, b, c;
  write_dataset(a, synth::generate_records(s));
  write_dataset(b, synth::generate_records(s));
  s.seed = 8;
  write_dataset(c, synth::generate_records(s));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
}

TEST(Synth, RecordsAreValid) {
  synth::SynthSpec s;
  s.n = 1000;
  s.seed = 3;
  const auto recs = synth::generate(s);
  ASSERT_EQ(recs.size(), 1000u);
  EXPECT_EQ(recs[0].record.id, "syn000001");
  std::set<std::string> ids;
  int tms = 0;
  for (const auto& r : recs) {
    ids.insert(r.record.id);
    ASSERT_NO_THROW(featurize_record(r.record, FeaturizeConfig{}));
    ASSERT_TRUE(r.record.ri.has_value());
    EXPECT_GE(*r.record.ri, 0.0);
    EXPECT_GT(r.noise_sigma, 0.0);
    const bool has_si = r.record.smiles.find("[Si]") != std::string::npos;
    EXPECT_EQ(has_si, r.record.has_tag("TMS"));
    tms += has_si;
    // The stored truth follows from the structure.
    const auto g = synth::count_groups(record_molecule(r.record));
    EXPECT_EQ(r.true_ri, synth::true_ri(g, s.coef));
  }
  EXPECT_EQ(ids.size(), 1000u);
  EXPECT_GT(tms, 20);
  EXPECT_LT(tms, 300);
}

TEST(Synth, ObservationsScatterWithDeclaredNoise) {
  synth::SynthSpec s;
  s.n = 4000;
  s.seed = 11;
  const auto recs = synth::generate(s);
  double z2 = 0;
  for (const auto& r : recs) {
    const double z = (*r.record.ri - r.true_ri) / r.noise_sigma;
    z2 += z * z;
  }
  // chi-square / n has sd sqrt(2 / n) ~ 0.022
  EXPECT_NEAR(z2 / recs.size(), 1.0, 0.1);
}

TEST(Synth, Errors) {
  synth::SynthSpec s;
  s.n = -1;
  EXPECT_THROW(synth::generate(s), Error);
  s.n = 1;
  s.max_units = 0;
  EXPECT_THROW(synth::generate(s), Error);
}

}  // namespace
