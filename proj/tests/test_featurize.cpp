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

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "airi/chem.hpp"
#include "airi/featurize.hpp"
#include "oracles.hpp"

namespace {

using namespace airi;
using chem::Molecule;

Molecule mol(const std::string& smiles) { return chem::standardize(chem::parse_smiles(smiles)); }

int populated_hops(const PathFeatures& p) {
  return static_cast<int>(std::count_if(p.hops.begin(), p.hops.end(),
                                        [](const HopFeatures& h) { return h.present; }));
}

const std::vector<std::string> kMolecules = {
    "CCO", "c1ccccc1", "CCCCCCCC", "Cc1ccc(O)cc1", "c1ccc2ccccc2c1", "C1CC2CCC1C2",
    "CC(C)(C)C(=O)OC", "O=C1CCC(=O)N1", "c1ccc2[nH]ccc2c1", "C[Si](C)(C)Oc1ccccc1C(=O)O",
    "C1CCC2(CC1)CCCC2", "OC1CCCC1Cl", "CC1=CC(=O)C=CC1=O", "C"};

auto hop_key(const HopFeatures& h) {
  return std::tuple(h.bond_type, h.conjugated, h.in_ring, h.ring_size_idx, h.aromatic_ring);
}

TEST(ShortestPaths, Propane) {
  const auto sp = all_pairs_shortest_paths(mol("CCC"));
  EXPECT_EQ(sp.distance(0, 2), 2);
  EXPECT_EQ(sp.path_bonds(0, 2), (std::vector<std::pair<int, int>>{{0, 1}, {1, 2}}));
}

TEST(ShortestPaths, BenzeneParaDistance) {
  const auto sp = all_pairs_shortest_paths(mol("c1ccccc1"));
  EXPECT_EQ(sp.distance(0, 3), 3);
  EXPECT_EQ(sp.distance(1, 4), 3);
  // lowest-index parent: 0 -> 1 -> 2 -> 3 rather than 0 -> 5 -> 4 -> 3
  EXPECT_EQ(sp.path(0, 3), (std::vector<int>{0, 1, 2, 3}));
}

TEST(ShortestPaths, RandomGraphsMatchFloydWarshall) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const auto g = oracle::random_connected_graph(rng, n, static_cast<int>(rng() % 6));
    const auto sp = all_pairs_shortest_paths(oracle::graph_to_molecule(g));
    const auto fw = oracle::floyd_warshall(g.n, g.edges);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        ASSERT_EQ(sp.distance(i, j), fw[i * n + j]);
        ASSERT_EQ(static_cast<int>(sp.path(i, j).size()), fw[i * n + j] + 1);
      }
    }
  }
}

TEST(ShortestPaths, DisconnectedIsInternalError) {
  Molecule m;
  m.atoms.resize(2);
  EXPECT_THROW(all_pairs_shortest_paths(m), InternalError);
}

TEST(Featurize, EthanolOxygenDegree) {
  const auto g = featurize_graph(mol("CCO"), 5);
  EXPECT_EQ(g.atoms[2].degree_idx, 2);
  EXPECT_EQ(g.atoms[2].atomic_number_idx, 8);
  EXPECT_EQ(g.atoms[2].formal_charge_idx, 4);
  EXPECT_EQ(g.atoms[0].degree_idx, 4);
}

TEST(Featurize, AtomVocabularyClamps) {
  const auto g = featurize_graph(mol("[O-]C[N+](C)(C)C"), 5);
  EXPECT_EQ(g.atoms[0].formal_charge_idx, 3);
  EXPECT_EQ(g.atoms[2].formal_charge_idx, 5);
  Molecule m = mol("C");
  m.atoms[0].element = 110;
  m.atoms[0].formal_charge = 7;
  m.atoms[0].implicit_h = 12;
  const auto big = featurize_graph(m, 5);
  EXPECT_EQ(big.atoms[0].atomic_number_idx, 0);
  EXPECT_EQ(big.atoms[0].formal_charge_idx, 8);
  EXPECT_EQ(big.atoms[0].degree_idx, 8);
}

TEST(Featurize, BenzeneDistanceTwo) {
  const auto g = featurize_graph(mol("c1ccccc1"), 5);
  const PathFeatures& p = g.path(0, 2);
  EXPECT_EQ(p.distance_idx, 2);
  EXPECT_EQ(populated_hops(p), 2);
  for (int k = 0; k < 2; ++k) {
    EXPECT_EQ(p.hops[k].bond_type, static_cast<int>(chem::BondOrder::kAromatic));
    EXPECT_TRUE(p.hops[k].in_ring);
    EXPECT_EQ(p.hops[k].ring_size_idx, 4);  // {none,3,4,5,6,...}
    EXPECT_TRUE(p.hops[k].aromatic_ring);
    EXPECT_TRUE(p.hops[k].conjugated);
  }
}

TEST(Featurize, OctaneTruncation) {
  const auto g = featurize_graph(mol("CCCCCCCC"), 5);
  EXPECT_EQ(g.path(0, 7).distance_idx, 6);
  EXPECT_EQ(populated_hops(g.path(0, 7)), 0);
  EXPECT_EQ(g.path(0, 5).distance_idx, 5);
  EXPECT_EQ(populated_hops(g.path(0, 5)), 5);
  EXPECT_EQ(g.path(3, 3).distance_idx, 0);
  EXPECT_EQ(populated_hops(g.path(3, 3)), 0);
}

TEST(Featurize, TooManyAtoms) {
  FeaturizeConfig cfg;
  cfg.max_atoms = 4;
  EXPECT_THROW(featurize_graph(mol("CCCCC"), cfg), DataError);
  EXPECT_NO_THROW(featurize_graph(mol("CCCC"), cfg));
}

TEST(Featurize, TruncationAndSymmetryInvariants) {
  for (const auto& s : kMolecules) {
    SCOPED_TRACE(s);
    const Molecule m = mol(s);
    const auto sp = all_pairs_shortest_paths(m);
    for (int L : {1, 3, 5}) {
      const auto g = featurize_graph(m, L);
      for (int i = 0; i < g.n_atoms; ++i) {
        for (int j = 0; j < g.n_atoms; ++j) {
          const int d = sp.distance(i, j);
          EXPECT_EQ(d, sp.distance(j, i));
          const auto& p = g.path(i, j);
          const int expected_hops = d <= L ? d : 0;
          EXPECT_EQ(populated_hops(p), expected_hops);
          EXPECT_EQ(p.distance_idx, d <= L ? d : L + 1);
          // both directions carry the same hops
          auto a = p.hops, b = g.path(j, i).hops;
          auto by_key = [](const HopFeatures& x, const HopFeatures& y) { return hop_key(x) < hop_key(y); };
          std::sort(a.begin(), a.end(), by_key);
          std::sort(b.begin(), b.end(), by_key);
          EXPECT_EQ(a, b);
        }
      }
    }
  }
}

// Every shortest path between i and j by exhaustive DFS, as hop sequences.
std::vector<std::vector<HopFeatures>> all_shortest_hop_sequences(const Molecule& m, int i, int j) {
  const int n = static_cast<int>(m.atoms.size());
  std::vector<std::vector<int>> nbr(n);
  for (const auto& b : m.bonds) {
    nbr[b.a].push_back(b.b);
    nbr[b.b].push_back(b.a);
  }
  std::vector<std::pair<int, int>> edges;
  for (const auto& b : m.bonds) edges.emplace_back(b.a, b.b);
  const auto fw = oracle::floyd_warshall(n, edges);
  std::vector<std::vector<HopFeatures>> out;
  std::vector<HopFeatures> cur;
  std::function<void(int)> walk = [&](int u) {
    if (u == j) {
      out.push_back(cur);
      return;
    }
    for (int v : nbr[u]) {
      if (fw[v * n + j] != fw[u * n + j] - 1) continue;
      cur.push_back(hop_features(m.bonds[*m.find_bond(u, v)]));
      walk(v);
      cur.pop_back();
    }
  };
  walk(i);
  return out;
}

bool hop_less(const std::vector<HopFeatures>& a, const std::vector<HopFeatures>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](const auto& x, const auto& y) { return hop_key(x) < hop_key(y); });
}

TEST(Featurize, CanonicalPathIsSmallestShortestPath) {
  for (const auto& s : kMolecules) {
    SCOPED_TRACE(s);
    const Molecule m = mol(s);
    const int L = 6;
    const auto g = featurize_graph(m, L);
    for (int i = 0; i < g.n_atoms; ++i) {
      for (int j = 0; j < g.n_atoms; ++j) {
        const auto& p = g.path(i, j);
        if (i == j || p.distance_idx > L) continue;
        // minimal readings from each end; the strictly smaller one wins and
        // is read backwards from the other end, a tie keeps both
        auto fwd = all_shortest_hop_sequences(m, i, j);
        auto bwd = all_shortest_hop_sequences(m, j, i);
        auto best_f = *std::min_element(fwd.begin(), fwd.end(), hop_less);
        auto best_b = *std::min_element(bwd.begin(), bwd.end(), hop_less);
        std::vector<HopFeatures> expected = best_f;
        if (hop_less(best_b, best_f)) expected.assign(best_b.rbegin(), best_b.rend());
        const std::vector<HopFeatures> got(p.hops.begin(), p.hops.begin() + p.distance_idx);
        ASSERT_EQ(got, expected) << i << "," << j;
      }
    }
  }
}

TEST(Featurize, PermutationEquivariance) {
  std::mt19937_64 rng(5);
  for (const auto& s : kMolecules) {
    SCOPED_TRACE(s);
    const Molecule m = mol(s);
    const auto g = featurize_graph(m, 5);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<int> perm(m.atoms.size());
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      const auto h = featurize_graph(chem::relabel_atoms(m, perm), 5);
      for (int i = 0; i < g.n_atoms; ++i) {
        EXPECT_EQ(h.atoms[perm[i]], g.atoms[i]);
        for (int j = 0; j < g.n_atoms; ++j) ASSERT_EQ(h.path(perm[i], perm[j]), g.path(i, j));
      }
    }
  }
}

TEST(Featurize, LowestIndexModeFollowsBfsTree) {
  FeaturizeConfig cfg;
  cfg.path_choice = PathChoice::kLowestIndex;
  const Molecule m = mol("c1ccccc1C");
  const auto g = featurize_graph(m, cfg);
  const auto sp = all_pairs_shortest_paths(m);
  const auto bonds = sp.path_bonds(0, 3);
  for (std::size_t k = 0; k < bonds.size(); ++k) {
    EXPECT_EQ(g.path(0, 3).hops[k],
              hop_features(m.bonds[*m.find_bond(bonds[k].first, bonds[k].second)]));
  }
}

TEST(Featurize, FlattenedWidthAndOneHots) {
  const int L = 3;
  const auto g = featurize_graph(mol("CC=O"), L);
  const int F = path_feature_width(L);
  EXPECT_EQ(F, 3 * 15 + 5);
  std::vector<float> v(F);
  flatten_path(g.path(0, 2), L, v.data());
  // two hops (single, then double) + distance 2
  EXPECT_EQ(v[0], 1.0f);
  EXPECT_EQ(v[kHopWidth + 1], 1.0f);
  EXPECT_EQ(v[2 * kHopWidth + kHopWidth - 1], 0.0f);
  EXPECT_EQ(v[L * kHopWidth + 2], 1.0f);
  flatten_path(g.path(1, 1), L, v.data());
  EXPECT_EQ(std::accumulate(v.begin(), v.end(), 0.0f), 1.0f);
  EXPECT_EQ(v[L * kHopWidth], 1.0f);
}

TEST(Batch, PaddingAndMasks) {
  std::vector<FeaturizedGraph> gs = {featurize_graph(mol("CCC"), 5), featurize_graph(mol("CCCCC"), 5)};
  gs[0].target_ri = 1500.0;
  const Batch b = batch_graphs(gs);
  EXPECT_EQ(b.size, 2);
  EXPECT_EQ(b.max_atoms, 5);
  EXPECT_EQ(b.atom_mask, (std::vector<std::uint8_t>{1, 1, 1, 0, 0, 1, 1, 1, 1, 1}));
  EXPECT_FLOAT_EQ(b.targets[0], 0.15f);
  EXPECT_TRUE(std::isnan(b.targets[1]));
  const int N = b.max_atoms;
  for (int gi = 0; gi < 2; ++gi) {
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        const bool real = b.atom_mask[gi * N + i] && b.atom_mask[gi * N + j];
        EXPECT_EQ(b.attend_mask[(gi * N + i) * N + j], real && i != j);
      }
    }
  }
  // padded pairs carry no features
  for (int k = 0; k < b.path_width; ++k) EXPECT_EQ(b.path_features[((0 * N + 4) * N + 0) * b.path_width + k], 0.0f);
}

TEST(Batch, SingleGraphDiagonalMasked) {
  const Batch b = batch_graphs(std::vector<FeaturizedGraph>{featurize_graph(mol("CCO"), 5)});
  for (int i = 0; i < 3; ++i) EXPECT_EQ(b.attend_mask[i * 3 + i], 0);
}

TEST(Batch, EmptyListRejected) {
  EXPECT_THROW(batch_graphs(std::vector<FeaturizedGraph>{}), Error);
}

TEST(DebugDump, PathCsv) {
  const auto g = featurize_graph(mol("CCO"), 2);
  std::ostringstream os;
  write_path_csv(g, os);
  const std::string text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 3 * 3 * 2);
  EXPECT_EQ(text.rfind("i,j,distance_idx", 0), 0u);
}

}  // namespace
