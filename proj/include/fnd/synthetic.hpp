#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fnd/common.hpp"
#include "fnd/ingestion.hpp"
#include "json.hpp"

namespace fnd {

/// Planted-pattern corpus generator. All ratios compare fake news to true
/// news; a ratio of 1 plants nothing, and with every ratio at 1 the two
/// classes come from the same process.
struct SyntheticSpec {
  std::size_t users = 200;
  double edge_probability = 0.03;
  std::size_t news_per_class = 50;
  double base_spreaders = 10.0;       // mean spreaders of a true story
  double base_extra_engagements = 0.5;  // mean repeats per spreader of a true story
  double susceptible_fraction = 0.2;  // size of the cohort fake news favors
  double spreader_ratio = 1.0;
  double density_ratio = 1.0;        // edge probability multiplier inside the cohort
  double engagement_ratio = 1.0;
  double susceptible_concentration = 1.0;  // cohort draw probability multiplier for fake news
  std::uint64_t seed = 1;

  static SyntheticSpec strong(std::uint64_t seed = 1) {
    SyntheticSpec s;
    s.spreader_ratio = 2.0;
    s.density_ratio = 4.0;
    s.engagement_ratio = 3.0;
    s.susceptible_concentration = 4.0;
    s.seed = seed;
    return s;
  }
};

inline void to_json(nlohmann::json& j, const SyntheticSpec& s) {
  j = {{"users", s.users},
       {"edge_probability", s.edge_probability},
       {"news_per_class", s.news_per_class},
       {"base_spreaders", s.base_spreaders},
       {"base_extra_engagements", s.base_extra_engagements},
       {"susceptible_fraction", s.susceptible_fraction},
       {"spreader_ratio", s.spreader_ratio},
       {"density_ratio", s.density_ratio},
       {"engagement_ratio", s.engagement_ratio},
       {"susceptible_concentration", s.susceptible_concentration},
       {"seed", s.seed}};
}

/// Reads the keys present in `j` over the defaults; unknown keys are errors.
inline SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j, SyntheticSpec s = {}) {
  if (!j.is_object()) throw ConfigError("synthetic spec must be an object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "users") s.users = value.get<std::size_t>();
      else if (key == "edge_probability") s.edge_probability = value.get<double>();
      else if (key == "news_per_class") s.news_per_class = value.get<std::size_t>();
      else if (key == "base_spreaders") s.base_spreaders = value.get<double>();
      else if (key == "base_extra_engagements") s.base_extra_engagements = value.get<double>();
      else if (key == "susceptible_fraction") s.susceptible_fraction = value.get<double>();
      else if (key == "spreader_ratio") s.spreader_ratio = value.get<double>();
      else if (key == "density_ratio") s.density_ratio = value.get<double>();
      else if (key == "engagement_ratio") s.engagement_ratio = value.get<double>();
      else if (key == "susceptible_concentration") s.susceptible_concentration = value.get<double>();
      else if (key == "seed") s.seed = value.get<std::uint64_t>();
      else throw ConfigError("unknown synthetic key '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("synthetic key '" + key + "' has the wrong type");
    }
  }
  return s;
}

struct SyntheticNewsTruth {
  std::string id;
  NewsLabel label = NewsLabel::real;
  std::size_t spreaders = 0;
  std::size_t cohort_spreaders = 0;
  std::size_t engagements = 0;
  std::size_t edges = 0;  // induced follow edges among the spreaders
};

struct SyntheticCorpus {
  SocialGraph graph;
  EngagementTable table;
  std::vector<char> in_cohort;  // per user
  std::size_t cohort_size = 0;
  std::vector<SyntheticNewsTruth> news;  // sorted by id, aligned with table
  SyntheticSpec spec;
};

inline void validate(const SyntheticSpec& s) {
  auto fail = [](const std::string& what) { throw ConfigError("infeasible synthetic spec: " + what); };
  if (s.users < 2) fail("need at least two users");
  if (s.news_per_class < 1) fail("need at least one news story per class");
  if (!(s.edge_probability >= 0.0 && s.edge_probability <= 1.0)) fail("edge_probability outside [0, 1]");
  if (!(s.susceptible_fraction >= 0.0 && s.susceptible_fraction <= 1.0)) fail("susceptible_fraction outside [0, 1]");
  if (!(s.base_spreaders >= 2.0)) fail("base_spreaders below 2");
  if (!(s.base_extra_engagements >= 0.0)) fail("negative base_extra_engagements");
  for (double r : {s.spreader_ratio, s.density_ratio, s.engagement_ratio, s.susceptible_concentration}) {
    if (!(r > 0.0) || !std::isfinite(r)) fail("effect sizes must be positive");
  }
  const double largest = 1.5 * s.base_spreaders * std::max(1.0, s.spreader_ratio);
  if (largest > static_cast<double>(s.users)) fail("spreaders per story can exceed the user count");
}

inline SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  SyntheticCorpus out;
  out.spec = spec;
  const std::size_t n = spec.users;
  auto bernoulli = [](Rng& rng, double p) { return uniform_real(rng) < p; };

  Rng graph_rng(derive_seed(spec.seed, "synthetic/graph"));
  const auto k = static_cast<std::size_t>(std::llround(spec.susceptible_fraction * static_cast<double>(n)));
  out.in_cohort.assign(n, 0);
  for (auto v : sample_without_replacement(n, k, graph_rng)) out.in_cohort[v] = 1;
  out.cohort_size = k;

  SocialGraph::Builder builder;
  char buf[32];
  for (std::size_t v = 0; v < n; ++v) {
    std::snprintf(buf, sizeof(buf), "u%04zu", v);
    builder.add_node(buf);
  }
  const double inner = std::min(1.0, spec.edge_probability * spec.density_ratio);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = 0; v < n; ++v) {
      if (u == v) continue;
      if (bernoulli(graph_rng, out.in_cohort[u] && out.in_cohort[v] ? inner : spec.edge_probability)) {
        builder.add_edge(u, v);
      }
    }
  }
  out.graph = std::move(builder).build();

  std::vector<NodeId> cohort, rest;
  for (NodeId v = 0; v < n; ++v) (out.in_cohort[v] ? cohort : rest).push_back(v);

  Rng news_rng(derive_seed(spec.seed, "synthetic/news"));
  std::vector<NewsLabel> labels(2 * spec.news_per_class, NewsLabel::real);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(spec.news_per_class), NewsLabel::fake);
  shuffle(labels, news_rng);

  std::vector<NewsRecord> records;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool fake = labels[i] == NewsLabel::fake;
    const double mean = spec.base_spreaders * (fake ? spec.spreader_ratio : 1.0);
    const auto size = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(mean * (0.5 + uniform_real(news_rng)))), 2, n);
    const double to_cohort =
        std::min(1.0, spec.susceptible_fraction * (fake ? spec.susceptible_concentration : 1.0));
    const double extra = spec.base_extra_engagements * (fake ? spec.engagement_ratio : 1.0);
    const double repeat = extra / (1.0 + extra);

    std::vector<NodeId> pool_c = cohort, pool_r = rest;
    NewsRecord rec;
    std::snprintf(buf, sizeof(buf), "n%04zu", i);
    rec.id = buf;
    rec.label = labels[i];
    while (rec.spreaders.size() < size) {
      const bool pick_c = pool_r.empty() || (!pool_c.empty() && bernoulli(news_rng, to_cohort));
      auto& pool = pick_c ? pool_c : pool_r;
      const std::size_t at = uniform_index(news_rng, pool.size());
      const NodeId v = pool[at];
      pool[at] = pool.back();
      pool.pop_back();
      std::uint32_t count = 1;
      while (count < 1000 && bernoulli(news_rng, repeat)) ++count;
      rec.spreaders.emplace_back(v, count);
    }
    records.push_back(std::move(rec));
  }
  out.table = EngagementTable(n, std::move(records));

  for (const auto& rec : out.table.all_news()) {
    SyntheticNewsTruth t{rec.id, rec.label, rec.spreaders.size(), 0, 0, 0};
    for (const auto& [u, c] : rec.spreaders) {
      t.cohort_spreaders += out.in_cohort[u];
      t.engagements += c;
      for (const auto& [w, c2] : rec.spreaders) {
        if (u != w && out.graph.has_edge(u, w)) ++t.edges;
      }
    }
    out.news.push_back(std::move(t));
  }
  return out;
}

inline nlohmann::json truth_json(const SyntheticCorpus& c) {
  nlohmann::json news = nlohmann::json::array();
  double spreaders[2] = {0, 0}, engagements[2] = {0, 0}, edges[2] = {0, 0}, count[2] = {0, 0};
  for (const auto& t : c.news) {
    const int k = t.label == NewsLabel::fake;
    spreaders[k] += static_cast<double>(t.spreaders);
    engagements[k] += static_cast<double>(t.engagements);
    edges[k] += static_cast<double>(t.edges);
    count[k] += 1.0;
    news.push_back({{"id", t.id},
                    {"label", std::string(to_string(t.label))},
                    {"spreaders", t.spreaders},
                    {"cohort_spreaders", t.cohort_spreaders},
                    {"engagements", t.engagements},
                    {"edges", t.edges}});
  }
  nlohmann::json classes;
  for (int k = 0; k < 2; ++k) {
    classes[k ? "fake" : "true"] = {{"news", static_cast<std::size_t>(count[k])},
                                    {"mean_spreaders", safe_ratio(spreaders[k], count[k])},
                                    {"mean_engagements", safe_ratio(engagements[k], count[k])},
                                    {"mean_edges", safe_ratio(edges[k], count[k])}};
  }
  return {{"spec", c.spec},
          {"users", c.graph.num_nodes()},
          {"edges", c.graph.num_edges()},
          {"records", c.table.num_records()},
          {"cohort_size", c.cohort_size},
          {"classes", classes},
          {"news", news}};
}

/// Corpus CSVs plus truth.json with the generator's bookkeeping.
inline void write_synthetic(const SyntheticCorpus& c, const std::filesystem::path& dir) {
  write_corpus(c.graph, c.table, dir);
  std::ofstream out(dir / "truth.json");
  if (!out) throw InputError("cannot write file", (dir / "truth.json").string());
  out << truth_json(c).dump(2) << '\n';
}

}  // namespace fnd
