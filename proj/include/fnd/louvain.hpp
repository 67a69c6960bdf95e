#pragma once

#include <fstream>
#include <map>
#include <vector>

#include "fnd/common.hpp"
#include "fnd/diffusion.hpp"
#include "fnd/ingestion.hpp"

namespace fnd {

struct WeightedEdge {
  std::uint32_t u;
  std::uint32_t v;
  double weight;
};

/// Undirected weighted graph; each unordered pair appears once.
struct UndirectedGraph {
  std::size_t num_nodes = 0;
  std::vector<WeightedEdge> edges;
};

/// One unit-weight undirected edge per connected unordered pair, so a
/// reciprocal follow contributes weight 1, not 2.
inline UndirectedGraph symmetrize(const SocialGraph& g) {
  UndirectedGraph ug;
  ug.num_nodes = g.num_nodes();
  for (const auto& [u, v] : g.edges()) {
    if (u < v || !g.has_edge(v, u)) ug.edges.push_back({std::min(u, v), std::max(u, v), 1.0});
  }
  return ug;
}

inline UndirectedGraph symmetrize(const DiffusionNetwork& net) {
  UndirectedGraph ug;
  ug.num_nodes = net.size();
  for (const auto& [u, v] : net.edges()) {
    if (u < v || !net.has_edge(v, u)) ug.edges.push_back({std::min(u, v), std::max(u, v), 1.0});
  }
  return ug;
}

enum class CommunityScope : std::uint8_t { global, local };

struct CommunityAssignment {
  std::vector<std::uint32_t> community;  // node -> community id, ids dense from 0
  std::size_t num_communities = 0;
  double modularity = 0.0;
  CommunityScope scope = CommunityScope::global;
  std::vector<double> level_modularity;  // modularity after each aggregation level
};

/// Newman modularity of a partition of `g`. 0 for an edgeless graph.
inline double modularity(const UndirectedGraph& g, std::span<const std::uint32_t> community) {
  double m = 0.0;
  for (const auto& e : g.edges) m += e.weight;
  if (m == 0.0) return 0.0;
  std::uint32_t k = 0;
  for (auto c : community) k = std::max(k, c + 1);
  std::vector<double> internal(k, 0.0), total(k, 0.0);
  for (const auto& e : g.edges) {
    total[community[e.u]] += e.weight;
    total[community[e.v]] += e.weight;
    if (community[e.u] == community[e.v]) internal[community[e.u]] += e.weight;
  }
  double q = 0.0;
  for (std::uint32_t c = 0; c < k; ++c) q += internal[c] / m - (total[c] / (2.0 * m)) * (total[c] / (2.0 * m));
  return q;
}

namespace detail {

// Aggregated graph for one Louvain level. `self` holds the total weight of
// edges internal to each super-node.
struct LouvainLevel {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;
  std::vector<double> self;
};

inline double level_modularity(const LouvainLevel& g, std::span<const std::uint32_t> comm, double m) {
  const std::size_t n = g.adj.size();
  std::vector<double> in(n, 0.0), tot(n, 0.0);
  for (std::uint32_t i = 0; i < n; ++i) {
    double k = 2.0 * g.self[i];
    in[comm[i]] += g.self[i];
    for (const auto& [j, w] : g.adj[i]) {
      k += w;
      if (comm[j] == comm[i] && i < j) in[comm[i]] += w;
    }
    tot[comm[i]] += k;
  }
  double q = 0.0;
  for (std::size_t c = 0; c < n; ++c) q += in[c] / m - (tot[c] / (2.0 * m)) * (tot[c] / (2.0 * m));
  return q;
}

}  // namespace detail

/// Multi-level Louvain: repeated local-moving sweeps in a seeded node order,
/// then aggregation, until a level gains no more than 1e-7 modularity.
inline CommunityAssignment louvain(const UndirectedGraph& g, std::uint64_t seed,
                                   CommunityScope scope = CommunityScope::global) {
  constexpr double kMinGain = 1e-7;
  CommunityAssignment result;
  result.scope = scope;
  const std::size_t n0 = g.num_nodes;
  result.community.resize(n0);
  std::iota(result.community.begin(), result.community.end(), 0u);
  result.num_communities = n0;

  double m = 0.0;
  for (const auto& e : g.edges) m += e.weight;
  if (n0 == 0 || m == 0.0) return result;

  detail::LouvainLevel level;
  level.adj.resize(n0);
  level.self.assign(n0, 0.0);
  for (const auto& e : g.edges) {
    if (e.u == e.v) {
      level.self[e.u] += e.weight;
    } else {
      level.adj[e.u].emplace_back(e.v, e.weight);
      level.adj[e.v].emplace_back(e.u, e.weight);
    }
  }

  Rng rng(seed);
  double current_q = modularity(g, result.community);
  result.level_modularity.push_back(current_q);

  for (;;) {
    const std::size_t n = level.adj.size();
    std::vector<double> degree(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      degree[i] = 2.0 * level.self[i];
      for (const auto& [j, w] : level.adj[i]) degree[i] += w;
    }
    std::vector<std::uint32_t> comm(n);
    std::iota(comm.begin(), comm.end(), 0u);
    std::vector<double> tot = degree;

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    shuffle(order, rng);

    std::vector<double> link(n, 0.0);
    std::vector<std::uint32_t> touched;
    double level_q = detail::level_modularity(level, comm, m);
    for (;;) {
      bool moved = false;
      for (std::uint32_t i : order) {
        const std::uint32_t own = comm[i];
        touched.clear();
        for (const auto& [j, w] : level.adj[i]) {
          if (link[comm[j]] == 0.0) touched.push_back(comm[j]);
          link[comm[j]] += w;
        }
        tot[own] -= degree[i];
        // Gain of placing i in community c, up to a positive constant factor.
        auto gain = [&](std::uint32_t c) { return link[c] - tot[c] * degree[i] / (2.0 * m); };
        std::uint32_t best = own;
        double best_gain = gain(own);
        for (std::uint32_t c : touched) {
          const double gc = gain(c);
          if (gc > best_gain) {
            best_gain = gc;
            best = c;
          }
        }
        tot[best] += degree[i];
        comm[i] = best;
        if (best != own) moved = true;
        for (std::uint32_t c : touched) link[c] = 0.0;
        link[own] = 0.0;
      }
      const double q = detail::level_modularity(level, comm, m);
      const bool improved = q - level_q > kMinGain;
      level_q = q;
      if (!moved || !improved) break;
    }

    // Renumber communities densely in node order.
    std::vector<std::int64_t> renum(n, -1);
    std::uint32_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (renum[comm[i]] < 0) renum[comm[i]] = k++;
      comm[i] = static_cast<std::uint32_t>(renum[comm[i]]);
    }

    std::vector<std::uint32_t> proposal(n0);
    for (std::size_t v = 0; v < n0; ++v) proposal[v] = comm[result.community[v]];
    const double q = modularity(g, proposal);
    if (k == n || q - current_q <= kMinGain) break;

    result.community = std::move(proposal);
    result.num_communities = k;
    current_q = q;
    result.level_modularity.push_back(q);

    detail::LouvainLevel next;
    next.adj.resize(k);
    next.self.assign(k, 0.0);
    std::vector<std::map<std::uint32_t, double>> acc(k);
    for (std::uint32_t i = 0; i < n; ++i) {
      next.self[comm[i]] += level.self[i];
      for (const auto& [j, w] : level.adj[i]) {
        if (i >= j) continue;
        if (comm[i] == comm[j]) next.self[comm[i]] += w;
        else {
          acc[comm[i]][comm[j]] += w;
          acc[comm[j]][comm[i]] += w;
        }
      }
    }
    for (std::uint32_t c = 0; c < k; ++c) {
      for (const auto& [d, w] : acc[c]) next.adj[c].emplace_back(d, w);
    }
    level = std::move(next);
  }

  result.modularity = current_q;
  return result;
}

/// CSV `user_id,community`.
inline void write_community_csv(const CommunityAssignment& a, const SocialGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file", path);
  out << "user_id,community\n";
  for (NodeId v = 0; v < g.num_nodes(); ++v) out << csv::escape(g.id(v)) << ',' << a.community[v] << '\n';
}

}  // namespace fnd
