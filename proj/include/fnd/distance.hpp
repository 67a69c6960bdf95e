#pragma once

#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fnd/common.hpp"
#include "fnd/diffusion.hpp"
#include "fnd/ingestion.hpp"

namespace fnd {

enum class FlowDefinition : std::uint8_t {
  shared_news,       // number of networks containing the edge
  shared_frequency,  // sum over those networks of min(T(u), T(v))
};

/// Information flow along social edges, aggregated over a set of networks.
/// Zero-flow edges are not stored.
class FlowMatrix {
 public:
  FlowMatrix() = default;
  FlowMatrix(FlowDefinition def, std::size_t num_users) : definition_(def), inflow_(num_users, 0.0) {}

  FlowDefinition definition() const noexcept { return definition_; }

  double flow(NodeId i, NodeId j) const {
    const auto it = flows_.find(key(i, j));
    return it == flows_.end() ? 0.0 : it->second;
  }

  /// Sum over l of F(l, j).
  double inflow(NodeId j) const { return j < inflow_.size() ? inflow_[j] : 0.0; }

  std::size_t support_size() const noexcept { return flows_.size(); }

  /// Entries as ((i, j), F) sorted by (i, j).
  std::vector<std::pair<std::pair<NodeId, NodeId>, double>> entries() const {
    std::vector<std::pair<std::pair<NodeId, NodeId>, double>> out;
    out.reserve(flows_.size());
    for (const auto& [k, f] : flows_) out.push_back({{static_cast<NodeId>(k >> 32), static_cast<NodeId>(k & 0xffffffffu)}, f});
    std::sort(out.begin(), out.end());
    return out;
  }

  void add(NodeId i, NodeId j, double f) {
    if (f <= 0.0) return;
    flows_[key(i, j)] += f;
    inflow_[j] += f;
  }

 private:
  static std::uint64_t key(NodeId i, NodeId j) { return (static_cast<std::uint64_t>(i) << 32) | j; }

  FlowDefinition definition_ = FlowDefinition::shared_news;
  std::unordered_map<std::uint64_t, double> flows_;
  std::vector<double> inflow_;
};

inline FlowMatrix flow_matrix(const SocialGraph& graph, std::span<const DiffusionNetwork> networks, FlowDefinition def) {
  FlowMatrix fm(def, graph.num_nodes());
  for (const auto& net : networks) {
    for (const auto& [a, b] : net.edges()) {
      const double f = def == FlowDefinition::shared_news ? 1.0 : static_cast<double>(std::min(net.count(a), net.count(b)));
      fm.add(net.node(a), net.node(b), f);
    }
  }
  return fm;
}

/// 1 - ln(F_ij / sum_l F_lj). Infinite when the edge carries no flow.
inline double effective_distance(const FlowMatrix& flow, NodeId i, NodeId j) {
  const double f = flow.flow(i, j);
  if (f <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 - std::log(f / flow.inflow(j));
}

enum class DistanceMetric : std::uint8_t { geodesic, effective_shared_news, effective_shared_frequency };

struct DistanceStats {
  double maximum = 0.0;
  double mean = 0.0;
  double median = 0.0;
  DistanceMetric metric = DistanceMetric::geodesic;
};

/// Statistics over all finite ordered-pair shortest-path lengths (i != j)
/// inside the network; unreachable pairs are left out.
inline DistanceStats distance_stats(const DiffusionNetwork& net, DistanceMetric metric, const FlowMatrix* flow = nullptr) {
  DistanceStats st;
  st.metric = metric;
  const std::size_t n = net.size();
  if (n < 2) return st;
  std::vector<double> all;

  if (metric == DistanceMetric::geodesic) {
    std::vector<int> dist(n);
    std::vector<std::uint32_t> queue;
    for (std::uint32_t s = 0; s < n; ++s) {
      std::fill(dist.begin(), dist.end(), -1);
      queue.assign(1, s);
      dist[s] = 0;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto u = queue[head];
        for (auto v : net.out(u)) {
          if (dist[v] < 0) {
            dist[v] = dist[u] + 1;
            all.push_back(dist[v]);
            queue.push_back(v);
          }
        }
      }
    }
  } else {
    const FlowDefinition want =
        metric == DistanceMetric::effective_shared_news ? FlowDefinition::shared_news : FlowDefinition::shared_frequency;
    if (flow == nullptr || flow->definition() != want) throw std::invalid_argument("effective distance needs a matching flow matrix");
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adj(n);
    for (const auto& [u, v] : net.edges()) {
      const double w = effective_distance(*flow, net.node(u), net.node(v));
      if (std::isfinite(w)) adj[u].emplace_back(v, w);
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n);
    using Item = std::pair<double, std::uint32_t>;
    for (std::uint32_t s = 0; s < n; ++s) {
      std::fill(dist.begin(), dist.end(), inf);
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      dist[s] = 0.0;
      pq.emplace(0.0, s);
      while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (const auto& [v, w] : adj[u]) {
          if (d + w < dist[v]) {
            dist[v] = d + w;
            pq.emplace(dist[v], v);
          }
        }
      }
      for (std::uint32_t v = 0; v < n; ++v) {
        if (v != s && std::isfinite(dist[v])) all.push_back(dist[v]);
      }
    }
  }

  if (all.empty()) return st;
  st.maximum = *std::max_element(all.begin(), all.end());
  st.mean = mean_of(all);
  st.median = median_of(std::move(all));
  return st;
}

}  // namespace fnd
