#pragma once

#include <array>
#include <cmath>
#include <deque>
#include <fstream>
#include <string_view>
#include <vector>

#include "fnd/common.hpp"
#include "fnd/ingestion.hpp"

namespace fnd {

enum class Centrality : std::uint8_t {
  in_degree,
  out_degree,
  in_closeness,
  out_closeness,
  betweenness,
  pagerank,
  hub,
  authority,
};

inline constexpr std::size_t kNumCentralities = 8;

inline constexpr std::array<std::string_view, kNumCentralities> kCentralityNames = {
    "in_degree", "out_degree", "in_closeness", "out_closeness", "betweenness", "pagerank", "hub", "authority"};

struct CentralityScores {
  std::array<std::vector<double>, kNumCentralities> values;

  const std::vector<double>& operator[](Centrality c) const { return values[static_cast<std::size_t>(c)]; }
  std::vector<double>& operator[](Centrality c) { return values[static_cast<std::size_t>(c)]; }
};

struct PowerIterationOptions {
  double damping = 0.85;
  double tolerance = 1e-10;  // L1 residual
  int max_iterations = 200;
};

/// PageRank with uniform teleport; dangling mass is spread uniformly.
/// Rank flows from follower to followee.
inline std::vector<double> pagerank(const SocialGraph& g, const PowerIterationOptions& opt = {}) {
  const std::size_t n = g.num_nodes();
  if (n == 0) return {};
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> rank(n, inv_n), next(n);
  for (int it = 0; it < opt.max_iterations; ++it) {
    double dangling = 0.0;
    for (NodeId u = 0; u < n; ++u) {
      if (g.out_neighbors(u).empty()) dangling += rank[u];
    }
    const double base = (1.0 - opt.damping) * inv_n + opt.damping * dangling * inv_n;
    for (NodeId v = 0; v < n; ++v) {
      double s = 0.0;
      for (NodeId u : g.in_neighbors(v)) s += rank[u] / static_cast<double>(g.out_neighbors(u).size());
      next[v] = base + opt.damping * s;
    }
    double total = 0.0;
    for (double x : next) total += x;
    double residual = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      next[v] /= total;
      residual += std::abs(next[v] - rank[v]);
    }
    rank.swap(next);
    if (residual < opt.tolerance) break;
  }
  return rank;
}

struct HitsScores {
  std::vector<double> hub;
  std::vector<double> authority;
};

namespace detail {

/// Scales to unit L2 norm; a zero vector becomes the uniform unit vector.
inline void normalize_l2(std::vector<double>& x) {
  double ss = 0.0;
  for (double v : x) ss += v * v;
  if (ss == 0.0) {
    const double u = 1.0 / std::sqrt(static_cast<double>(x.size()));
    std::fill(x.begin(), x.end(), u);
    return;
  }
  const double inv = 1.0 / std::sqrt(ss);
  for (double& v : x) v *= inv;
}

}  // namespace detail

/// Hubs point at good authorities; authorities are pointed at by good hubs.
inline HitsScores hits(const SocialGraph& g, const PowerIterationOptions& opt = {}) {
  const std::size_t n = g.num_nodes();
  HitsScores s;
  if (n == 0) return s;
  s.hub.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));
  s.authority.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> hub(n), auth(n);
  for (int it = 0; it < opt.max_iterations; ++it) {
    for (NodeId v = 0; v < n; ++v) {
      double a = 0.0;
      for (NodeId u : g.in_neighbors(v)) a += s.hub[u];
      auth[v] = a;
    }
    detail::normalize_l2(auth);
    for (NodeId u = 0; u < n; ++u) {
      double h = 0.0;
      for (NodeId v : g.out_neighbors(u)) h += auth[v];
      hub[u] = h;
    }
    detail::normalize_l2(hub);
    double residual = 0.0;
    for (NodeId v = 0; v < n; ++v) residual += std::abs(auth[v] - s.authority[v]) + std::abs(hub[v] - s.hub[v]);
    s.authority.swap(auth);
    s.hub.swap(hub);
    if (residual < opt.tolerance) break;
  }
  return s;
}

namespace detail {

// Number of fixed source chunks used for betweenness accumulation. Fixed so the
// floating-point summation order never depends on the thread count.
inline constexpr std::size_t kSourceChunks = 64;

inline void bfs_distance_sum(const SocialGraph& g, NodeId source, bool reverse, std::vector<int>& dist,
                             std::vector<NodeId>& queue, std::size_t& reached, double& sum) {
  std::fill(dist.begin(), dist.end(), -1);
  queue.clear();
  dist[source] = 0;
  queue.push_back(source);
  sum = 0.0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId u = queue[head];
    const auto nbrs = reverse ? g.in_neighbors(u) : g.out_neighbors(u);
    for (NodeId v : nbrs) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        sum += dist[v];
        queue.push_back(v);
      }
    }
  }
  reached = queue.size();
}

}  // namespace detail

/// Classical closeness restricted to the reachable set: (r - 1) / sum of
/// distances, r counting the node itself; 0 when nothing is reachable.
/// `incoming` measures distances from other nodes to v.
inline std::vector<double> closeness(const SocialGraph& g, bool incoming, unsigned jobs = 1) {
  const std::size_t n = g.num_nodes();
  std::vector<double> out(n, 0.0);
  const std::size_t chunks = std::min(n, detail::kSourceChunks);
  parallel_for(chunks, jobs, [&](std::size_t c) {
    std::vector<int> dist(n);
    std::vector<NodeId> queue;
    queue.reserve(n);
    for (std::size_t s = c; s < n; s += chunks) {
      std::size_t reached = 0;
      double sum = 0.0;
      detail::bfs_distance_sum(g, static_cast<NodeId>(s), incoming, dist, queue, reached, sum);
      out[s] = sum > 0.0 ? static_cast<double>(reached - 1) / sum : 0.0;
    }
  });
  return out;
}

/// Brandes betweenness on the unweighted directed graph, unnormalized.
inline std::vector<double> betweenness(const SocialGraph& g, unsigned jobs = 1) {
  const std::size_t n = g.num_nodes();
  if (n == 0) return {};
  const std::size_t chunks = std::min(n, detail::kSourceChunks);
  std::vector<std::vector<double>> partial(chunks);
  parallel_for(chunks, jobs, [&](std::size_t c) {
    auto& acc = partial[c];
    acc.assign(n, 0.0);
    std::vector<int> dist(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<NodeId> order;
    order.reserve(n);
    for (std::size_t s = c; s < n; s += chunks) {
      std::fill(dist.begin(), dist.end(), -1);
      std::fill(sigma.begin(), sigma.end(), 0.0);
      order.clear();
      dist[s] = 0;
      sigma[s] = 1.0;
      order.push_back(static_cast<NodeId>(s));
      for (std::size_t head = 0; head < order.size(); ++head) {
        const NodeId u = order[head];
        for (NodeId v : g.out_neighbors(u)) {
          if (dist[v] < 0) {
            dist[v] = dist[u] + 1;
            order.push_back(v);
          }
          if (dist[v] == dist[u] + 1) sigma[v] += sigma[u];
        }
      }
      for (NodeId v : order) delta[v] = 0.0;
      for (std::size_t k = order.size(); k-- > 0;) {
        const NodeId w = order[k];
        for (NodeId v : g.in_neighbors(w)) {
          if (dist[v] >= 0 && dist[v] + 1 == dist[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
        }
        if (w != s) acc[w] += delta[w];
      }
    }
  });
  std::vector<double> out(n, 0.0);
  for (const auto& acc : partial) {
    for (std::size_t v = 0; v < n; ++v) out[v] += acc[v];
  }
  return out;
}

/// All eight influence measures on the full follow graph.
inline CentralityScores centralities(const SocialGraph& g, unsigned jobs = 1) {
  const std::size_t n = g.num_nodes();
  CentralityScores s;
  s[Centrality::in_degree].resize(n);
  s[Centrality::out_degree].resize(n);
  for (NodeId v = 0; v < n; ++v) {
    s[Centrality::in_degree][v] = static_cast<double>(g.in_neighbors(v).size());
    s[Centrality::out_degree][v] = static_cast<double>(g.out_neighbors(v).size());
  }
  s[Centrality::in_closeness] = closeness(g, true, jobs);
  s[Centrality::out_closeness] = closeness(g, false, jobs);
  s[Centrality::betweenness] = betweenness(g, jobs);
  s[Centrality::pagerank] = pagerank(g);
  auto h = hits(g);
  s[Centrality::hub] = std::move(h.hub);
  s[Centrality::authority] = std::move(h.authority);
  return s;
}

/// CSV `user_id,<measure>...`.
inline void write_centrality_csv(const CentralityScores& s, const SocialGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file", path);
  out << "user_id";
  for (auto name : kCentralityNames) out << ',' << name;
  out << '\n';
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    out << csv::escape(g.id(v));
    for (const auto& col : s.values) out << ',' << csv::format_double(col[v]);
    out << '\n';
  }
}

}  // namespace fnd
