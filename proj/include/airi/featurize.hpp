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

// Atom and path features for the graph transformer, plus padded batches.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "airi/chem/molecule.hpp"
#include "airi/error.hpp"

namespace airi {

// Vocabulary sizes.
inline constexpr int kAtomicNumberVocab = 101;  // 0 = unknown, 1..100
inline constexpr int kChargeVocab = 9;          // -4..+4
inline constexpr int kDegreeVocab = 9;          // 0..8
inline constexpr int kBondTypeVocab = 4;
inline constexpr int kRingSizeVocab = 7;  // none, 3, 4, 5, 6, 7, 8+
// bond type, conjugated, in ring, ring size, aromatic ring, present
inline constexpr int kHopWidth = kBondTypeVocab + 1 + 1 + kRingSizeVocab + 1 + 1;
inline constexpr double kTargetScale = 10000.0;

// Flattened width of one pair's path feature vector: L hop slots followed by
// the distance one-hot over {self, 1..L, far}.
inline int path_feature_width(int max_path_len) {
  return max_path_len * kHopWidth + max_path_len + 2;
}

struct AtomFeatures {
  int atomic_number_idx = 0;
  int formal_charge_idx = 0;
  int degree_idx = 0;
  bool operator==(const AtomFeatures&) const = default;
};

struct HopFeatures {
  int bond_type = 0;
  bool conjugated = false;
  bool in_ring = false;
  int ring_size_idx = 0;
  bool aromatic_ring = false;
  bool present = false;
  bool operator==(const HopFeatures&) const = default;
};

// distance_idx: 0 = self, k = topological distance k (1..L), L+1 = far.
struct PathFeatures {
  int distance_idx = 0;
  std::vector<HopFeatures> hops;  // L slots, ordered from i to j
  bool operator==(const PathFeatures&) const = default;
};

struct FeaturizedGraph {
  std::string id;
  int n_atoms = 0;
  int max_path_len = 0;
  std::vector<AtomFeatures> atoms;
  std::vector<PathFeatures> paths;  // row-major n x n
  std::optional<double> target_ri;
  std::vector<std::string> tags;

  const PathFeatures& path(int i, int j) const { return paths[static_cast<std::size_t>(i) * n_atoms + j]; }
  bool has_tag(const std::string& t) const { return std::find(tags.begin(), tags.end(), t) != tags.end(); }
};

// Which of several equal-length shortest paths supplies the hop features.
enum class PathChoice {
  // Lexicographically smallest hop-feature sequence, chosen per unordered
  // pair. Depends only on the labelled graph, so relabelling atoms permutes
  // the features exactly.
  kCanonical,
  // The BFS tree path with lowest-index parents. Depends on atom numbering.
  kLowestIndex,
};

struct FeaturizeConfig {
  int max_path_len = 5;
  int max_atoms = 256;
  PathChoice path_choice = PathChoice::kCanonical;
};

// ---------------------------------------------------------------------------
// Shortest paths

struct ShortestPaths {
  int n = 0;
  std::vector<int> dist;    // n x n, -1 when unreachable
  std::vector<int> parent;  // parent[s*n + v]: predecessor of v in the BFS tree from s

  int distance(int i, int j) const { return dist[static_cast<std::size_t>(i) * n + j]; }

  // Atom sequence i, ..., j.
  std::vector<int> path(int i, int j) const {
    std::vector<int> out;
    if (distance(i, j) < 0) return out;
    for (int v = j; v != i; v = parent[static_cast<std::size_t>(i) * n + v]) out.push_back(v);
    out.push_back(i);
    std::reverse(out.begin(), out.end());
    return out;
  }

  // Bonds along path(i, j) as (atom, atom) pairs in walking order.
  std::vector<std::pair<int, int>> path_bonds(int i, int j) const {
    const auto atoms = path(i, j);
    std::vector<std::pair<int, int>> out;
    for (std::size_t k = 1; k < atoms.size(); ++k) out.emplace_back(atoms[k - 1], atoms[k]);
    return out;
  }
};

// BFS from every atom. Neighbors are visited in increasing index order, so
// each vertex's parent is its lowest-index neighbor on the previous level.
inline ShortestPaths all_pairs_shortest_paths(const chem::Molecule& mol) {
  const int n = static_cast<int>(mol.atoms.size());
  const auto adj = chem::adjacency(mol);
  ShortestPaths sp;
  sp.n = n;
  sp.dist.assign(static_cast<std::size_t>(n) * n, -1);
  sp.parent.assign(static_cast<std::size_t>(n) * n, -1);
  std::vector<int> queue(n);
  for (int s = 0; s < n; ++s) {
    int* dist = &sp.dist[static_cast<std::size_t>(s) * n];
    int* parent = &sp.parent[static_cast<std::size_t>(s) * n];
    int head = 0, tail = 0;
    queue[tail++] = s;
    dist[s] = 0;
    while (head < tail) {
      const int u = queue[head++];
      for (auto [v, bond] : adj[u]) {
        if (dist[v] >= 0) continue;
        dist[v] = dist[u] + 1;
        parent[v] = u;
        queue[tail++] = v;
      }
    }
    if (tail != n) throw InternalError("all_pairs_shortest_paths: molecule graph is disconnected");
  }
  return sp;
}

// ---------------------------------------------------------------------------
// Features

inline AtomFeatures atom_features(const chem::Molecule& mol, int atom) {
  const chem::Atom& a = mol.atoms[atom];
  AtomFeatures f;
  f.atomic_number_idx = (a.element >= 1 && a.element < kAtomicNumberVocab) ? a.element : 0;
  f.formal_charge_idx = std::clamp(a.formal_charge, -4, 4) + 4;
  f.degree_idx = std::min(a.explicit_degree + a.implicit_h, kDegreeVocab - 1);
  return f;
}

inline int ring_size_index(const std::optional<int>& size) {
  if (!size) return 0;
  return std::min(*size, 8) - 2;
}

inline HopFeatures hop_features(const chem::Bond& b) {
  HopFeatures h;
  h.bond_type = static_cast<int>(b.order);
  h.conjugated = b.is_conjugated;
  h.in_ring = b.is_in_ring;
  h.ring_size_idx = ring_size_index(b.smallest_ring_size);
  h.aromatic_ring = b.in_aromatic_ring;
  h.present = true;
  return h;
}

namespace detail {

inline int hop_code(const chem::Bond& b) {
  const HopFeatures h = hop_features(b);
  return ((h.bond_type * 2 + h.conjugated) * 2 + h.in_ring) * kRingSizeVocab * 2 +
         h.ring_size_idx * 2 + h.aromatic_ring;
}

// Smallest hop-code sequence over all shortest paths from src to dst, walking
// a frontier of every vertex reachable by the best prefix so far.
inline std::vector<int> min_code_sequence(const std::vector<std::vector<std::pair<int, int>>>& adj,
                                          const std::vector<int>& codes, const int* dist_to_dst,
                                          int src) {
  std::vector<int> seq;
  std::vector<int> frontier{src};
  std::vector<int> next;
  while (dist_to_dst[frontier.front()] > 0) {
    int best = std::numeric_limits<int>::max();
    next.clear();
    for (int u : frontier) {
      for (auto [v, bond] : adj[u]) {
        if (dist_to_dst[v] != dist_to_dst[u] - 1) continue;
        const int c = codes[bond];
        if (c < best) {
          best = c;
          next.clear();
        }
        if (c == best) next.push_back(v);
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    seq.push_back(best);
    frontier.swap(next);
  }
  return seq;
}

}  // namespace detail

// Featurizes a standardized molecule. Pairs further apart than L get the far
// distance code and no hop slots.
inline FeaturizedGraph featurize_graph(const chem::Molecule& mol, const FeaturizeConfig& cfg) {
  const int n = static_cast<int>(mol.atoms.size());
  const int L = cfg.max_path_len;
  if (L < 1) throw Error("featurize_graph: max path length must be at least 1");
  if (n == 0) throw DataError("featurize_graph: molecule has no atoms");
  if (n > cfg.max_atoms) {
    throw DataError("featurize_graph: " + std::to_string(n) + " atoms exceeds the maximum of " +
                    std::to_string(cfg.max_atoms));
  }

  FeaturizedGraph g;
  g.id = mol.source_id.value_or("");
  g.n_atoms = n;
  g.max_path_len = L;
  for (int i = 0; i < n; ++i) g.atoms.push_back(atom_features(mol, i));

  const ShortestPaths sp = all_pairs_shortest_paths(mol);
  const auto adj = chem::adjacency(mol);
  std::vector<int> codes(mol.bonds.size());
  for (std::size_t b = 0; b < mol.bonds.size(); ++b) codes[b] = detail::hop_code(mol.bonds[b]);

  g.paths.assign(static_cast<std::size_t>(n) * n, PathFeatures{});
  for (auto& p : g.paths) p.hops.assign(L, HopFeatures{});

  auto bond_hop = [&](int u, int v) { return hop_features(mol.bonds[*mol.find_bond(u, v)]); };
  auto code_hop = [&](int code) {
    const auto it = std::find(codes.begin(), codes.end(), code);
    return hop_features(mol.bonds[it - codes.begin()]);
  };

  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      PathFeatures& fwd = g.paths[static_cast<std::size_t>(i) * n + j];
      PathFeatures& rev = g.paths[static_cast<std::size_t>(j) * n + i];
      const int d = sp.distance(i, j);
      if (i == j) {
        fwd.distance_idx = 0;
        continue;
      }
      if (d > L) {
        fwd.distance_idx = rev.distance_idx = L + 1;
        continue;
      }
      fwd.distance_idx = rev.distance_idx = d;

      if (cfg.path_choice == PathChoice::kLowestIndex) {
        const auto bonds = sp.path_bonds(i, j);
        for (int k = 0; k < d; ++k) {
          fwd.hops[k] = bond_hop(bonds[k].first, bonds[k].second);
          rev.hops[d - 1 - k] = fwd.hops[k];
        }
        continue;
      }
      // The unordered pair takes the smaller of the two minimal readings and
      // the other direction reads it backwards. When both readings are equal
      // they may belong to different paths; each direction then keeps its own
      // reading so the result does not depend on which index is smaller.
      const int* dist_to_j = &sp.dist[static_cast<std::size_t>(j) * n];
      const int* dist_to_i = &sp.dist[static_cast<std::size_t>(i) * n];
      std::vector<int> from_i = detail::min_code_sequence(adj, codes, dist_to_j, i);
      std::vector<int> from_j = detail::min_code_sequence(adj, codes, dist_to_i, j);
      if (from_i < from_j) {
        from_j.assign(from_i.rbegin(), from_i.rend());
      } else if (from_j < from_i) {
        from_i.assign(from_j.rbegin(), from_j.rend());
      }
      for (int k = 0; k < d; ++k) {
        fwd.hops[k] = code_hop(from_i[k]);
        rev.hops[k] = code_hop(from_j[k]);
      }
    }
  }
  return g;
}

inline FeaturizedGraph featurize_graph(const chem::Molecule& mol, int max_path_len) {
  FeaturizeConfig cfg;
  cfg.max_path_len = max_path_len;
  return featurize_graph(mol, cfg);
}

// Writes the flattened feature vector of one pair into out[0..width).
inline void flatten_path(const PathFeatures& p, int max_path_len, float* out) {
  const int width = path_feature_width(max_path_len);
  std::fill(out, out + width, 0.0f);
  for (int k = 0; k < max_path_len; ++k) {
    const HopFeatures& h = p.hops[k];
    if (!h.present) continue;
    float* slot = out + k * kHopWidth;
    slot[h.bond_type] = 1.0f;
    slot[kBondTypeVocab] = h.conjugated ? 1.0f : 0.0f;
    slot[kBondTypeVocab + 1] = h.in_ring ? 1.0f : 0.0f;
    slot[kBondTypeVocab + 2 + h.ring_size_idx] = 1.0f;
    slot[kBondTypeVocab + 2 + kRingSizeVocab] = h.aromatic_ring ? 1.0f : 0.0f;
    slot[kBondTypeVocab + 3 + kRingSizeVocab] = 1.0f;
  }
  out[max_path_len * kHopWidth + p.distance_idx] = 1.0f;
}

// Per-pair features as CSV, one row per (i, j, hop slot).
inline void write_path_csv(const FeaturizedGraph& g, std::ostream& os) {
  os << "i,j,distance_idx,hop,present,bond_type,conjugated,in_ring,ring_size_idx,aromatic_ring\n";
  for (int i = 0; i < g.n_atoms; ++i) {
    for (int j = 0; j < g.n_atoms; ++j) {
      const PathFeatures& p = g.path(i, j);
      for (int k = 0; k < g.max_path_len; ++k) {
        const HopFeatures& h = p.hops[k];
        os << i << ',' << j << ',' << p.distance_idx << ',' << k + 1 << ',' << h.present << ','
           << h.bond_type << ',' << h.conjugated << ',' << h.in_ring << ',' << h.ring_size_idx
           << ',' << h.aromatic_ring << '\n';
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Batches

// Graphs padded to a common atom count N. Index arrays are [B, N], path
// features [B, N, N, F], attend_mask [B, N, N] with 1 where atom i may attend
// to atom j (never itself, never padding).
struct Batch {
  int size = 0;
  int max_atoms = 0;
  int max_path_len = 0;
  int path_width = 0;
  std::vector<int> atomic_number;
  std::vector<int> formal_charge;
  std::vector<int> degree;
  std::vector<float> path_features;
  std::vector<std::uint8_t> atom_mask;
  std::vector<std::uint8_t> attend_mask;
  std::vector<float> targets;  // RI / 10000, NaN when unknown
  std::vector<std::string> ids;
};

inline Batch batch_graphs(const std::vector<const FeaturizedGraph*>& graphs) {
  if (graphs.empty()) throw Error("batch_graphs: empty graph list");
  Batch b;
  b.size = static_cast<int>(graphs.size());
  b.max_path_len = graphs.front()->max_path_len;
  for (const auto* g : graphs) {
    if (g->max_path_len != b.max_path_len) throw ShapeError("batch_graphs: mixed max path lengths");
    b.max_atoms = std::max(b.max_atoms, g->n_atoms);
  }
  const int B = b.size, N = b.max_atoms;
  const int F = b.path_width = path_feature_width(b.max_path_len);
  b.atomic_number.assign(static_cast<std::size_t>(B) * N, 0);
  b.formal_charge.assign(static_cast<std::size_t>(B) * N, 4);
  b.degree.assign(static_cast<std::size_t>(B) * N, 0);
  b.atom_mask.assign(static_cast<std::size_t>(B) * N, 0);
  b.attend_mask.assign(static_cast<std::size_t>(B) * N * N, 0);
  b.path_features.assign(static_cast<std::size_t>(B) * N * N * F, 0.0f);
  b.targets.assign(B, std::numeric_limits<float>::quiet_NaN());
  for (int gi = 0; gi < B; ++gi) {
    const FeaturizedGraph& g = *graphs[gi];
    b.ids.push_back(g.id);
    if (g.target_ri) b.targets[gi] = static_cast<float>(*g.target_ri / kTargetScale);
    for (int i = 0; i < g.n_atoms; ++i) {
      const std::size_t a = static_cast<std::size_t>(gi) * N + i;
      b.atomic_number[a] = g.atoms[i].atomic_number_idx;
      b.formal_charge[a] = g.atoms[i].formal_charge_idx;
      b.degree[a] = g.atoms[i].degree_idx;
      b.atom_mask[a] = 1;
      for (int j = 0; j < g.n_atoms; ++j) {
        const std::size_t pair = a * N + j;
        b.attend_mask[pair] = i != j;
        flatten_path(g.path(i, j), g.max_path_len, &b.path_features[pair * F]);
      }
    }
  }
  return b;
}

inline Batch batch_graphs(const std::vector<FeaturizedGraph>& graphs) {
  std::vector<const FeaturizedGraph*> ptrs;
  for (const auto& g : graphs) ptrs.push_back(&g);
  return batch_graphs(ptrs);
}

}  // namespace airi
