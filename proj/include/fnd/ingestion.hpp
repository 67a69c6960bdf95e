#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fnd/common.hpp"
#include "fnd/csv.hpp"

namespace fnd {

/// Directed follow network. An edge (u, v) means u follows v.
/// Simple graph: no self-loops, no parallel edges. Immutable once built.
class SocialGraph {
 public:
  class Builder;

  std::size_t num_nodes() const noexcept { return ids_.size(); }
  std::size_t num_edges() const noexcept { return num_edges_; }

  const std::string& id(NodeId v) const { return ids_.at(v); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  std::optional<NodeId> find(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Users that v follows, ascending.
  std::span<const NodeId> out_neighbors(NodeId v) const { return out_[v]; }
  /// Users that follow v, ascending.
  std::span<const NodeId> in_neighbors(NodeId v) const { return in_[v]; }

  bool has_edge(NodeId u, NodeId v) const {
    const auto& adj = out_[u];
    return std::binary_search(adj.begin(), adj.end(), v);
  }

  /// All edges ordered by (follower, followee).
  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(num_edges_);
    for (NodeId u = 0; u < out_.size(); ++u) {
      for (NodeId v : out_[u]) out.emplace_back(u, v);
    }
    return out;
  }

  friend bool operator==(const SocialGraph& a, const SocialGraph& b) {
    return a.ids_ == b.ids_ && a.out_ == b.out_;
  }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::vector<NodeId>> out_;
  std::vector<std::vector<NodeId>> in_;
  std::size_t num_edges_ = 0;
};

class SocialGraph::Builder {
 public:
  /// Returns the index of `id`, declaring it if new.
  NodeId add_node(const std::string& id) {
    const auto [it, inserted] = g_.index_.try_emplace(id, static_cast<NodeId>(g_.ids_.size()));
    if (inserted) {
      g_.ids_.push_back(id);
      g_.out_.emplace_back();
      g_.in_.emplace_back();
    }
    return it->second;
  }

  std::optional<NodeId> find(const std::string& id) const { return g_.find(id); }
  std::size_t num_nodes() const noexcept { return g_.ids_.size(); }

  /// Queues an edge; self-loops are the caller's responsibility to reject.
  void add_edge(NodeId u, NodeId v) { pending_.emplace_back(u, v); }

  /// Sorts adjacency and drops repeated edges. Reports how many were dropped.
  SocialGraph build(std::size_t* duplicates_dropped = nullptr) && {
    std::sort(pending_.begin(), pending_.end());
    const auto last = std::unique(pending_.begin(), pending_.end());
    if (duplicates_dropped) *duplicates_dropped = static_cast<std::size_t>(pending_.end() - last);
    pending_.erase(last, pending_.end());
    for (const auto& [u, v] : pending_) {
      g_.out_[u].push_back(v);
      g_.in_[v].push_back(u);
    }
    for (auto& adj : g_.in_) std::sort(adj.begin(), adj.end());
    g_.num_edges_ = pending_.size();
    pending_.clear();
    return std::move(g_);
  }

 private:
  SocialGraph g_;
  std::vector<std::pair<NodeId, NodeId>> pending_;
};

/// Spreaders of one news story with their spreading counts T(v, X).
struct NewsRecord {
  std::string id;
  NewsLabel label = NewsLabel::real;
  std::vector<std::pair<NodeId, std::uint32_t>> spreaders;  // ascending by user

  friend bool operator==(const NewsRecord&, const NewsRecord&) = default;
};

/// Labeled news stories and their (news, user) engagement counts. News are
/// kept sorted by id so downstream results do not depend on file row order.
class EngagementTable {
 public:
  EngagementTable() = default;

  EngagementTable(std::size_t num_users, std::vector<NewsRecord> news) : num_users_(num_users), news_(std::move(news)) {
    std::sort(news_.begin(), news_.end(), [](const NewsRecord& a, const NewsRecord& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < news_.size(); ++i) {
      auto& sp = news_[i].spreaders;
      std::sort(sp.begin(), sp.end());
      if (!index_.emplace(news_[i].id, i).second) throw InputError("duplicate news id " + news_[i].id);
      for (const auto& [u, c] : sp) {
        if (u >= num_users_) throw InputError("engagement references unknown user index");
        if (c == 0) throw InputError("engagement count must be positive for news " + news_[i].id);
      }
      for (std::size_t k = 1; k < sp.size(); ++k) {
        if (sp[k].first == sp[k - 1].first) throw InputError("repeated spreader in news " + news_[i].id);
      }
    }
  }

  std::size_t num_users() const noexcept { return num_users_; }
  std::size_t num_news() const noexcept { return news_.size(); }
  const NewsRecord& news(std::size_t i) const { return news_.at(i); }
  const std::vector<NewsRecord>& all_news() const noexcept { return news_; }

  std::optional<std::size_t> find(const std::string& news_id) const {
    const auto it = index_.find(news_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t num_records() const {
    std::size_t n = 0;
    for (const auto& r : news_) n += r.spreaders.size();
    return n;
  }

  std::vector<NewsLabel> labels() const {
    std::vector<NewsLabel> out;
    out.reserve(news_.size());
    for (const auto& r : news_) out.push_back(r.label);
    return out;
  }

  /// Same engagements with replaced labels (index-aligned).
  EngagementTable relabeled(std::span<const NewsLabel> labels) const {
    if (labels.size() != news_.size()) throw std::invalid_argument("label count mismatch");
    auto copy = news_;
    for (std::size_t i = 0; i < copy.size(); ++i) copy[i].label = labels[i];
    return EngagementTable(num_users_, std::move(copy));
  }

  /// Table restricted to the given news indices.
  EngagementTable subset(std::span<const std::size_t> indices) const {
    std::vector<NewsRecord> picked;
    picked.reserve(indices.size());
    for (std::size_t i : indices) picked.push_back(news_.at(i));
    return EngagementTable(num_users_, std::move(picked));
  }

  friend bool operator==(const EngagementTable& a, const EngagementTable& b) {
    return a.num_users_ == b.num_users_ && a.news_ == b.news_;
  }

 private:
  std::size_t num_users_ = 0;
  std::vector<NewsRecord> news_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Non-fatal events noticed while loading.
struct LoadReport {
  std::size_t duplicate_edges_dropped = 0;
  std::size_t engagement_rows_merged = 0;
  std::size_t labels_without_engagements = 0;
  std::vector<std::string> warnings;
};

struct Corpus {
  SocialGraph graph;
  EngagementTable table;
  LoadReport report;
};

struct CorpusPaths {
  std::string edges;
  std::string engagements;
  std::string labels;
  /// Optional `user_id` list. Without it the user set is the union of edge
  /// endpoints and engagement users, and isolated users cannot be declared.
  std::string users;

  /// Standard file names inside a directory; users.csv is used if present.
  static CorpusPaths in_directory(const std::filesystem::path& dir) {
    CorpusPaths p;
    p.edges = (dir / "edges.csv").string();
    p.engagements = (dir / "engagements.csv").string();
    p.labels = (dir / "labels.csv").string();
    if (std::filesystem::exists(dir / "users.csv")) p.users = (dir / "users.csv").string();
    return p;
  }
};

struct CorpusStats {
  std::size_t users = 0;
  std::size_t edges = 0;
  std::size_t records = 0;
  std::size_t news = 0;
  std::size_t fake = 0;
  std::size_t real = 0;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

namespace detail {

inline std::uint32_t parse_count(const csv::Reader& reader, const std::string& text) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (text.empty() || res.ec != std::errc() || res.ptr != end) reader.fail("count is not a positive integer: '" + text + "'");
  if (value == 0) reader.fail("count must be >= 1");
  if (value > std::numeric_limits<std::uint32_t>::max()) reader.fail("count out of range");
  return static_cast<std::uint32_t>(value);
}

inline NewsLabel parse_label(const csv::Reader& reader, const std::string& text) {
  if (text == "fake") return NewsLabel::fake;
  if (text == "true") return NewsLabel::real;
  reader.fail("label must be 'fake' or 'true', got '" + text + "'");
}

}  // namespace detail

/// Loads and validates the three (or four) corpus CSVs. Throws InputError on
/// the first problem; never returns a partially built corpus.
inline Corpus load_corpus(const CorpusPaths& paths) {
  Corpus corpus;
  SocialGraph::Builder builder;
  std::vector<std::string> row;
  const bool declared_users = !paths.users.empty();

  if (declared_users) {
    csv::Reader users(paths.users, {"user_id"});
    while (users.next(row)) {
      if (row[0].empty()) users.fail("empty user id");
      if (builder.find(row[0])) users.fail("duplicate user id " + row[0]);
      builder.add_node(row[0]);
    }
  }

  auto resolve = [&](const csv::Reader& reader, const std::string& id) -> NodeId {
    if (id.empty()) reader.fail("empty user id");
    if (declared_users) {
      const auto v = builder.find(id);
      if (!v) reader.fail("dangling user reference " + id);
      return *v;
    }
    return builder.add_node(id);
  };

  {
    csv::Reader edges(paths.edges, {"follower", "followee"});
    std::size_t self_loops = 0;
    std::size_t first_self_loop_line = 0;
    while (edges.next(row)) {
      const NodeId u = resolve(edges, row[0]);
      const NodeId v = resolve(edges, row[1]);
      if (u == v) {
        if (self_loops++ == 0) first_self_loop_line = edges.line();
        continue;
      }
      builder.add_edge(u, v);
    }
    if (self_loops > 0) {
      throw InputError(std::to_string(self_loops) + " self-loop edge(s) rejected", paths.edges, first_self_loop_line);
    }
  }

  std::map<std::string, NewsLabel> labels;
  {
    csv::Reader reader(paths.labels, {"news_id", "label"});
    while (reader.next(row)) {
      if (row[0].empty()) reader.fail("empty news id");
      const NewsLabel label = detail::parse_label(reader, row[1]);
      const auto [it, inserted] = labels.emplace(row[0], label);
      if (!inserted && it->second != label) reader.fail("conflicting labels for news " + row[0]);
    }
  }

  std::map<std::string, std::map<NodeId, std::uint64_t>> engagements;
  {
    csv::Reader reader(paths.engagements, {"news_id", "user_id", "count"});
    while (reader.next(row)) {
      if (row[0].empty()) reader.fail("empty news id");
      if (!labels.contains(row[0])) reader.fail("news " + row[0] + " has no label");
      const NodeId u = resolve(reader, row[1]);
      const std::uint32_t count = detail::parse_count(reader, row[2]);
      auto& slot = engagements[row[0]][u];
      if (slot != 0) ++corpus.report.engagement_rows_merged;
      slot += count;
      if (slot > std::numeric_limits<std::uint32_t>::max()) reader.fail("merged count out of range");
    }
  }

  corpus.graph = std::move(builder).build(&corpus.report.duplicate_edges_dropped);
  if (corpus.report.duplicate_edges_dropped > 0) {
    corpus.report.warnings.push_back(std::to_string(corpus.report.duplicate_edges_dropped) +
                                     " duplicate edge row(s) dropped");
  }

  std::vector<NewsRecord> news;
  for (const auto& [id, label] : labels) {
    const auto it = engagements.find(id);
    if (it == engagements.end()) {
      ++corpus.report.labels_without_engagements;
      continue;
    }
    NewsRecord rec{id, label, {}};
    for (const auto& [u, c] : it->second) rec.spreaders.emplace_back(u, static_cast<std::uint32_t>(c));
    news.push_back(std::move(rec));
  }
  if (corpus.report.labels_without_engagements > 0) {
    corpus.report.warnings.push_back(std::to_string(corpus.report.labels_without_engagements) +
                                     " labeled news without engagements ignored");
  }
  corpus.table = EngagementTable(corpus.graph.num_nodes(), std::move(news));
  return corpus;
}

inline Corpus load_corpus(const std::string& edges, const std::string& engagements, const std::string& labels,
                          const std::string& users = {}) {
  return load_corpus(CorpusPaths{edges, engagements, labels, users});
}

/// Writes users.csv, edges.csv, engagements.csv and labels.csv into `dir`.
inline void write_corpus(const SocialGraph& graph, const EngagementTable& table, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw InputError("cannot write file", (dir / name).string());
    return out;
  };
  {
    auto out = open("users.csv");
    out << "user_id\n";
    for (const auto& id : graph.ids()) out << csv::escape(id) << '\n';
  }
  {
    auto out = open("edges.csv");
    out << "follower,followee\n";
    for (const auto& [u, v] : graph.edges()) out << csv::escape(graph.id(u)) << ',' << csv::escape(graph.id(v)) << '\n';
  }
  {
    auto out = open("engagements.csv");
    out << "news_id,user_id,count\n";
    for (const auto& rec : table.all_news()) {
      for (const auto& [u, c] : rec.spreaders) {
        out << csv::escape(rec.id) << ',' << csv::escape(graph.id(u)) << ',' << c << '\n';
      }
    }
  }
  {
    auto out = open("labels.csv");
    out << "news_id,label\n";
    for (const auto& rec : table.all_news()) out << csv::escape(rec.id) << ',' << to_string(rec.label) << '\n';
  }
}

inline CorpusStats corpus_stats(const SocialGraph& graph, const EngagementTable& table) {
  CorpusStats s;
  s.users = graph.num_nodes();
  s.edges = graph.num_edges();
  s.records = table.num_records();
  s.news = table.num_news();
  for (const auto& rec : table.all_news()) {
    if (rec.label == NewsLabel::fake) ++s.fake;
    else ++s.real;
  }
  return s;
}

}  // namespace fnd
