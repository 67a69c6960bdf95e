#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fnd/common.hpp"
#include "fnd/ingestion.hpp"

namespace fnd {

/// The subgraph of the follow network induced by one story's spreaders.
/// Nodes are stored by ascending global id; edges use local indices.
class DiffusionNetwork {
 public:
  using LocalEdge = std::pair<std::uint32_t, std::uint32_t>;

  DiffusionNetwork() = default;

  DiffusionNetwork(std::string news_id, NewsLabel label, std::vector<NodeId> nodes, std::vector<std::uint32_t> counts,
                   std::vector<LocalEdge> edges)
      : news_id_(std::move(news_id)),
        label_(label),
        nodes_(std::move(nodes)),
        counts_(std::move(counts)),
        edges_(std::move(edges)) {
    if (nodes_.size() != counts_.size()) throw std::invalid_argument("node/count size mismatch");
    std::sort(edges_.begin(), edges_.end());
    out_.assign(nodes_.size(), {});
    in_.assign(nodes_.size(), {});
    for (const auto& [u, v] : edges_) {
      out_[u].push_back(v);
      in_[v].push_back(u);
    }
    for (auto& adj : in_) std::sort(adj.begin(), adj.end());
  }

  const std::string& news_id() const noexcept { return news_id_; }
  NewsLabel label() const noexcept { return label_; }

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  /// Global id of local node i.
  NodeId node(std::uint32_t i) const { return nodes_[i]; }
  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  /// Spreading count T(v, X) of local node i.
  std::uint32_t count(std::uint32_t i) const { return counts_[i]; }
  const std::vector<std::uint32_t>& counts() const noexcept { return counts_; }
  const std::vector<LocalEdge>& edges() const noexcept { return edges_; }

  std::span<const std::uint32_t> out(std::uint32_t i) const { return out_[i]; }
  std::span<const std::uint32_t> in(std::uint32_t i) const { return in_[i]; }

  bool has_edge(std::uint32_t u, std::uint32_t v) const {
    return std::binary_search(out_[u].begin(), out_[u].end(), v);
  }

  std::optional<std::uint32_t> local_index(NodeId v) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), v);
    if (it == nodes_.end() || *it != v) return std::nullopt;
    return static_cast<std::uint32_t>(it - nodes_.begin());
  }

  std::uint64_t total_engagements() const {
    std::uint64_t s = 0;
    for (auto c : counts_) s += c;
    return s;
  }

  friend bool operator==(const DiffusionNetwork& a, const DiffusionNetwork& b) {
    return a.news_id_ == b.news_id_ && a.label_ == b.label_ && a.nodes_ == b.nodes_ && a.counts_ == b.counts_ &&
           a.edges_ == b.edges_;
  }

 private:
  std::string news_id_;
  NewsLabel label_ = NewsLabel::real;
  std::vector<NodeId> nodes_;
  std::vector<std::uint32_t> counts_;
  std::vector<LocalEdge> edges_;
  std::vector<std::vector<std::uint32_t>> out_;
  std::vector<std::vector<std::uint32_t>> in_;
};

/// Induced diffusion network of news `news_index` in `table`.
inline DiffusionNetwork build_network(const SocialGraph& graph, const EngagementTable& table, std::size_t news_index) {
  const NewsRecord& rec = table.news(news_index);
  std::vector<NodeId> nodes;
  std::vector<std::uint32_t> counts;
  nodes.reserve(rec.spreaders.size());
  counts.reserve(rec.spreaders.size());
  for (const auto& [u, c] : rec.spreaders) {
    nodes.push_back(u);
    counts.push_back(c);
  }
  std::vector<DiffusionNetwork::LocalEdge> edges;
  for (std::uint32_t i = 0; i < nodes.size(); ++i) {
    // Both lists are sorted, so a merge walk finds followees among spreaders.
    const auto followees = graph.out_neighbors(nodes[i]);
    auto a = followees.begin();
    auto b = nodes.begin();
    while (a != followees.end() && b != nodes.end()) {
      if (*a < *b) ++a;
      else if (*b < *a) ++b;
      else {
        edges.emplace_back(i, static_cast<std::uint32_t>(b - nodes.begin()));
        ++a;
        ++b;
      }
    }
  }
  return DiffusionNetwork(rec.id, rec.label, std::move(nodes), std::move(counts), std::move(edges));
}

inline DiffusionNetwork build_network(const SocialGraph& graph, const EngagementTable& table, const std::string& news_id) {
  const auto idx = table.find(news_id);
  if (!idx) throw std::out_of_range("unknown news id " + news_id);
  return build_network(graph, table, *idx);
}

inline std::vector<DiffusionNetwork> build_all_networks(const SocialGraph& graph, const EngagementTable& table,
                                                       unsigned jobs = 1) {
  std::vector<DiffusionNetwork> out(table.num_news());
  parallel_for(out.size(), jobs, [&](std::size_t i) { out[i] = build_network(graph, table, i); });
  return out;
}

enum class SubsampleMode { nodes, edges };

/// Random partial view of a network for early-detection experiments.
/// Node mode keeps ceil(p|V|) spreaders and their induced edges; edge mode
/// keeps every spreader and ceil(p|E|) edges.
inline DiffusionNetwork subsample(const DiffusionNetwork& network, SubsampleMode mode, double proportion,
                                  std::uint64_t seed) {
  if (!(proportion >= 0.0 && proportion <= 1.0)) throw std::invalid_argument("proportion must lie in [0, 1]");
  Rng rng(seed);
  if (mode == SubsampleMode::edges) {
    const auto keep = sample_without_replacement(network.num_edges(), proportion_count(proportion, network.num_edges()), rng);
    std::vector<DiffusionNetwork::LocalEdge> edges;
    edges.reserve(keep.size());
    for (std::size_t k : keep) edges.push_back(network.edges()[k]);
    return DiffusionNetwork(network.news_id(), network.label(), network.nodes(), network.counts(), std::move(edges));
  }

  const auto keep = sample_without_replacement(network.size(), proportion_count(proportion, network.size()), rng);
  std::vector<std::int64_t> remap(network.size(), -1);
  std::vector<NodeId> nodes;
  std::vector<std::uint32_t> counts;
  for (std::size_t k : keep) {
    remap[k] = static_cast<std::int64_t>(nodes.size());
    nodes.push_back(network.node(static_cast<std::uint32_t>(k)));
    counts.push_back(network.count(static_cast<std::uint32_t>(k)));
  }
  std::vector<DiffusionNetwork::LocalEdge> edges;
  for (const auto& [u, v] : network.edges()) {
    if (remap[u] >= 0 && remap[v] >= 0) {
      edges.emplace_back(static_cast<std::uint32_t>(remap[u]), static_cast<std::uint32_t>(remap[v]));
    }
  }
  return DiffusionNetwork(network.news_id(), network.label(), std::move(nodes), std::move(counts), std::move(edges));
}

/// Engagement table described by a set of (possibly subsampled) networks.
inline EngagementTable table_from_networks(std::span<const DiffusionNetwork> networks, std::size_t num_users) {
  std::vector<NewsRecord> news;
  news.reserve(networks.size());
  for (const auto& net : networks) {
    NewsRecord rec{net.news_id(), net.label(), {}};
    rec.spreaders.reserve(net.size());
    for (std::uint32_t i = 0; i < net.size(); ++i) rec.spreaders.emplace_back(net.node(i), net.count(i));
    news.push_back(std::move(rec));
  }
  return EngagementTable(num_users, std::move(news));
}

/// Writes `<prefix>_nodes.csv` (user_id,count) and `<prefix>_edges.csv`.
inline void dump_network(const DiffusionNetwork& network, const SocialGraph& graph, const std::filesystem::path& prefix) {
  std::ofstream nodes(prefix.string() + "_nodes.csv");
  std::ofstream edges(prefix.string() + "_edges.csv");
  if (!nodes || !edges) throw InputError("cannot write network dump", prefix.string());
  nodes << "user_id,count\n";
  for (std::uint32_t i = 0; i < network.size(); ++i) {
    nodes << csv::escape(graph.id(network.node(i))) << ',' << network.count(i) << '\n';
  }
  edges << "follower,followee\n";
  for (const auto& [u, v] : network.edges()) {
    edges << csv::escape(graph.id(network.node(u))) << ',' << csv::escape(graph.id(network.node(v))) << '\n';
  }
}

}  // namespace fnd
