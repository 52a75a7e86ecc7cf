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
#include <cstdint>
#include <deque>
#include <limits>
#include <set>
#include <vector>

#include "airi/chem/molecule.hpp"

namespace airi::chem {

namespace detail {

using EdgeSet = std::vector<std::uint64_t>;

inline bool edge_set_empty(const EdgeSet& s) {
  return std::all_of(s.begin(), s.end(), [](std::uint64_t w) { return w == 0; });
}

inline int lowest_edge(const EdgeSet& s) {
  for (std::size_t w = 0; w < s.size(); ++w) {
    if (s[w] != 0) return static_cast<int>(w * 64 + __builtin_ctzll(s[w]));
  }
  return -1;
}

struct CandidateCycle {
  std::vector<int> atoms;
  EdgeSet edges;
};

// Horton candidates: for every root x and non-tree edge (u, v) of the BFS
// tree at x, the cycle x..u-v..x when both tree paths meet only at x.
inline std::vector<CandidateCycle> horton_candidates(const Molecule& mol) {
  const int n = static_cast<int>(mol.atoms.size());
  const int m = static_cast<int>(mol.bonds.size());
  const std::size_t words = (static_cast<std::size_t>(m) + 63) / 64;
  const auto adj = adjacency(mol);
  constexpr int kInf = std::numeric_limits<int>::max();

  std::vector<CandidateCycle> out;
  std::set<EdgeSet> seen;
  std::vector<int> dist(n);
  std::vector<int> parent(n);
  std::vector<int> parent_bond(n);
  std::vector<int> mark(n, -1);

  for (int x = 0; x < n; ++x) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(parent_bond.begin(), parent_bond.end(), -1);
    dist[x] = 0;
    std::deque<int> queue{x};
    std::vector<int> order;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      order.push_back(u);
      for (auto [v, bond] : adj[u]) {
        if (dist[v] == kInf) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
    for (int v : order) {
      if (v == x) continue;
      for (auto [w, bond] : adj[v]) {  // sorted: first hit is the lowest index
        if (dist[w] == dist[v] - 1) {
          parent[v] = w;
          parent_bond[v] = bond;
          break;
        }
      }
    }

    for (int e = 0; e < m; ++e) {
      const int u = mol.bonds[e].a;
      const int v = mol.bonds[e].b;
      if (dist[u] == kInf || dist[v] == kInf) continue;
      if (parent_bond[u] == e || parent_bond[v] == e) continue;

      std::vector<int> pu;
      for (int a = u; a != -1; a = parent[a]) pu.push_back(a);
      std::vector<int> pv;
      for (int a = v; a != -1; a = parent[a]) pv.push_back(a);
      // paths end at x; they may share only x
      for (int a : pu) mark[a] = e;
      bool simple = true;
      for (std::size_t i = 0; i + 1 < pv.size(); ++i) {
        if (mark[pv[i]] == e) {
          simple = false;
          break;
        }
      }
      for (int a : pu) mark[a] = -1;
      if (!simple) continue;

      CandidateCycle c;
      c.edges.assign(words, 0);
      auto set_edge = [&](int b) { c.edges[b / 64] |= (std::uint64_t{1} << (b % 64)); };
      set_edge(e);
      for (std::size_t i = 0; i + 1 < pu.size(); ++i) set_edge(parent_bond[pu[i]]);
      for (std::size_t i = 0; i + 1 < pv.size(); ++i) set_edge(parent_bond[pv[i]]);
      if (!seen.insert(c.edges).second) continue;
      // x .. u, then v .. (child of x)
      c.atoms.assign(pu.rbegin(), pu.rend());
      for (std::size_t i = 0; i + 1 < pv.size(); ++i) c.atoms.push_back(pv[i]);
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace detail

// Smallest set of smallest rings (a minimum cycle basis, via Horton's
// candidate set and GF(2) elimination). Stores the rings in mol.rings and sets
// is_in_ring / smallest_ring_size on every bond. Ring aromatic flags are left
// false; aromaticity perception fills them.
inline RingInfo perceive_rings(Molecule& mol) {
  const int n = static_cast<int>(mol.atoms.size());
  const int m = static_cast<int>(mol.bonds.size());
  std::vector<int> label;
  const int components = connected_components(mol, label);
  const int rank = m - n + components;

  RingInfo info;
  if (rank > 0) {
    auto candidates = detail::horton_candidates(mol);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const detail::CandidateCycle& a, const detail::CandidateCycle& b) {
                       if (a.atoms.size() != b.atoms.size()) return a.atoms.size() < b.atoms.size();
                       return a.edges < b.edges;
                     });
    // basis rows keyed by pivot edge
    std::vector<detail::EdgeSet> basis;
    std::vector<int> pivots;
    for (const auto& cand : candidates) {
      detail::EdgeSet row = cand.edges;
      for (std::size_t i = 0; i < basis.size(); ++i) {
        const int p = pivots[i];
        if (row[p / 64] & (std::uint64_t{1} << (p % 64))) {
          for (std::size_t w = 0; w < row.size(); ++w) row[w] ^= basis[i][w];
        }
      }
      if (detail::edge_set_empty(row)) continue;
      const int pivot = detail::lowest_edge(row);
      // keep rows reduced against the new pivot
      for (auto& other : basis) {
        if (other[pivot / 64] & (std::uint64_t{1} << (pivot % 64))) {
          for (std::size_t w = 0; w < row.size(); ++w) other[w] ^= row[w];
        }
      }
      basis.push_back(row);
      pivots.push_back(pivot);
      info.rings.push_back(cand.atoms);
      if (static_cast<int>(info.rings.size()) == rank) break;
    }
    if (static_cast<int>(info.rings.size()) != rank) {
      throw InternalError("ring perception found fewer rings than the cycle rank");
    }
  }
  info.aromatic.assign(info.rings.size(), false);

  for (Bond& b : mol.bonds) {
    b.is_in_ring = false;
    b.smallest_ring_size.reset();
    b.in_aromatic_ring = false;
  }
  for (const auto& ring : info.rings) {
    const int size = static_cast<int>(ring.size());
    for (int i = 0; i < size; ++i) {
      const auto bond = mol.find_bond(ring[i], ring[(i + 1) % size]);
      if (!bond) throw InternalError("ring contains a non-bonded atom pair");
      Bond& b = mol.bonds[*bond];
      b.is_in_ring = true;
      if (!b.smallest_ring_size || *b.smallest_ring_size > size) b.smallest_ring_size = size;
    }
  }
  mol.rings = info;
  return info;
}

// Bond indices around a ring, in ring order.
inline std::vector<int> ring_bonds(const Molecule& mol, const std::vector<int>& ring) {
  std::vector<int> out;
  const std::size_t size = ring.size();
  for (std::size_t i = 0; i < size; ++i) {
    const auto bond = mol.find_bond(ring[i], ring[(i + 1) % size]);
    if (!bond) throw InternalError("ring contains a non-bonded atom pair");
    out.push_back(*bond);
  }
  return out;
}

}  // namespace airi::chem
