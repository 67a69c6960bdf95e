#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "fnd/centrality.hpp"
#include "fnd/common.hpp"
#include "fnd/diffusion.hpp"
#include "fnd/distance.hpp"
#include "fnd/louvain.hpp"
#include "fnd/susceptibility.hpp"
#include "fnd/triads.hpp"
#include "fnd/wl_kernel.hpp"

namespace fnd {

inline constexpr std::size_t kNumPatternFeatures = 138;
inline constexpr std::size_t kNumFeatures = 142;

enum class Pattern : std::uint8_t {
  more_spreaders,
  farther_distance,
  stronger_engagement,
  denser_networks,
  similarity,
};

inline std::string_view to_string(Pattern p) {
  switch (p) {
    case Pattern::more_spreaders: return "more_spreaders";
    case Pattern::farther_distance: return "farther_distance";
    case Pattern::stronger_engagement: return "stronger_engagement";
    case Pattern::denser_networks: return "denser_networks";
    default: return "similarity";
  }
}

inline Pattern parse_pattern(std::string_view s) {
  for (auto p : {Pattern::more_spreaders, Pattern::farther_distance, Pattern::stronger_engagement,
                 Pattern::denser_networks, Pattern::similarity}) {
    if (s == to_string(p)) return p;
  }
  throw ConfigError("unknown pattern '" + std::string(s) + "'");
}

/// Which susceptibility method a feature depends on, if any.
enum class MethodDependence : std::uint8_t { none, by_news, by_frequency };

struct FeatureInfo {
  std::size_t index = 0;  // 1-based
  std::string name;
  Pattern pattern = Pattern::more_spreaders;
  std::string group;  // index range of the feature family, e.g. "2-9"
  MethodDependence method = MethodDependence::none;
  bool fold_dependent = false;  // needs training labels (susceptibility or references)
};

namespace detail {

inline std::vector<FeatureInfo> build_registry() {
  std::vector<FeatureInfo> r;
  auto add = [&](std::string name, Pattern p, std::string row, MethodDependence m = MethodDependence::none,
                 bool fold = false) {
    r.push_back({r.size() + 1, std::move(name), p, std::move(row), m, fold || m != MethodDependence::none});
  };
  // Method-minor helper: emits <stem>_news, <stem>_frequency.
  auto both = [&](const std::string& stem, Pattern p, const std::string& row) {
    add(stem + "_news", p, row, MethodDependence::by_news);
    add(stem + "_frequency", p, row, MethodDependence::by_frequency);
  };

  const auto ms = Pattern::more_spreaders;
  add("spreaders", ms, "1");
  for (const char* stem : {"normal_spreaders", "susceptible_spreaders", "pct_normal_spreaders", "pct_susceptible_spreaders"}) {
    both(stem, ms, "2-9");
  }
  both("mean_susceptibility", ms, "10-13");
  both("median_susceptibility", ms, "10-13");
  for (auto c : kCentralityNames) add("mean_" + std::string(c), ms, "14-29");
  for (auto c : kCentralityNames) add("median_" + std::string(c), ms, "14-29");

  const auto fd = Pattern::farther_distance;
  add("max_geodesic", fd, "30-32");
  add("mean_geodesic", fd, "30-32");
  add("median_geodesic", fd, "30-32");
  for (const char* stat : {"max", "mean", "median"}) {
    add(std::string(stat) + "_effective_news_flow", fd, "33-38");
    add(std::string(stat) + "_effective_frequency_flow", fd, "33-38");
  }

  const auto se = Pattern::stronger_engagement;
  add("engagements", se, "39");
  for (const char* stem : {"normal_engagements", "susceptible_engagements", "pct_normal_engagements",
                           "pct_susceptible_engagements"}) {
    both(stem, se, "40-47");
  }
  add("mean_engagements", se, "48");
  both("mean_normal_engagements", se, "49-52");
  both("mean_susceptible_engagements", se, "49-52");

  const auto dn = Pattern::denser_networks;
  add("edges", dn, "53");
  add("edges_per_spreader", dn, "54");
  add("ego_density", dn, "55");
  for (const char* cls : {"NN", "NS", "SN", "SS"}) {
    both(std::string("ego_") + cls, dn, "56-71");
    both(std::string("pct_ego_") + cls, dn, "56-71");
  }
  for (const char* cls : {"delta_pos", "delta_zero", "delta_neg"}) {
    both(cls, dn, "72-83");
    both(std::string("pct_") + cls, dn, "72-83");
  }
  add("triads", dn, "84");
  add("triads_per_spreader", dn, "85");
  add("triad_density", dn, "86");
  for (std::size_t k = 0; k < kTriadClasses; ++k) both("triad_" + triad_class_name(k), dn, "87-110");
  for (std::size_t k = 0; k < kTriadClasses; ++k) both("pct_triad_" + triad_class_name(k), dn, "111-134");
  add("global_communities", dn, "135-136");
  add("local_communities", dn, "135-136");
  add("global_community_density", dn, "137-138");
  add("local_community_density", dn, "137-138");

  const auto sim = Pattern::similarity;
  add("sim_fake_id", sim, "similarity", MethodDependence::none, true);
  add("sim_true_id", sim, "similarity", MethodDependence::none, true);
  add("sim_fake_class", sim, "similarity", MethodDependence::none, true);
  add("sim_true_class", sim, "similarity", MethodDependence::none, true);
  return r;
}

}  // namespace detail

/// The frozen index -> feature contract (1-based; element i describes index i+1).
inline const std::vector<FeatureInfo>& feature_registry() {
  static const std::vector<FeatureInfo> registry = detail::build_registry();
  return registry;
}

inline const FeatureInfo& feature_info(std::size_t index) { return feature_registry().at(index - 1); }

/// 1-based feature index by name.
inline std::size_t feature_index(std::string_view name) {
  for (const auto& f : feature_registry()) {
    if (f.name == name) return f.index;
  }
  throw std::out_of_range("unknown feature " + std::string(name));
}

/// Indices (1-based, ascending) covered by a set of patterns.
inline std::vector<std::size_t> pattern_mask(const std::set<Pattern>& patterns) {
  if (patterns.empty()) throw std::invalid_argument("empty pattern subset");
  std::vector<std::size_t> out;
  for (const auto& f : feature_registry()) {
    if (patterns.contains(f.pattern)) out.push_back(f.index);
  }
  return out;
}

/// Drops features that depend on a susceptibility method not in `methods`.
inline std::vector<std::size_t> restrict_to_methods(std::span<const std::size_t> mask,
                                                    const std::set<SusceptibilityMethod>& methods) {
  std::vector<std::size_t> out;
  for (std::size_t i : mask) {
    const auto m = feature_info(i).method;
    if (m == MethodDependence::by_news && !methods.contains(SusceptibilityMethod::by_news)) continue;
    if (m == MethodDependence::by_frequency && !methods.contains(SusceptibilityMethod::by_frequency)) continue;
    out.push_back(i);
  }
  return out;
}

using FeatureValues = std::array<double, kNumFeatures>;

struct FeatureVector {
  std::string news_id;
  NewsLabel label = NewsLabel::real;
  FeatureValues values{};

  double at(std::size_t index) const { return values.at(index - 1); }
};

/// Graph-wide inputs computed once per social graph.
struct GraphSummary {
  CentralityScores centrality;
  CommunityAssignment global_communities;
};

inline std::shared_ptr<const GraphSummary> summarize_graph(const SocialGraph& graph, std::uint64_t louvain_seed,
                                                           unsigned jobs = 1) {
  auto s = std::make_shared<GraphSummary>();
  s->centrality = centralities(graph, jobs);
  s->global_communities = louvain(symmetrize(graph), derive_seed(louvain_seed, "global"), CommunityScope::global);
  return s;
}

/// Everything label-free that feature extraction reads besides the network.
struct FeatureContext {
  std::shared_ptr<const GraphSummary> summary;
  FlowMatrix news_flow;
  FlowMatrix frequency_flow;
  std::uint64_t louvain_seed = 0;
};

inline FeatureContext make_feature_context(const SocialGraph& graph, std::shared_ptr<const GraphSummary> summary,
                                           std::span<const DiffusionNetwork> networks, std::uint64_t louvain_seed) {
  FeatureContext ctx;
  ctx.summary = std::move(summary);
  ctx.news_flow = flow_matrix(graph, networks, FlowDefinition::shared_news);
  ctx.frequency_flow = flow_matrix(graph, networks, FlowDefinition::shared_frequency);
  ctx.louvain_seed = louvain_seed;
  return ctx;
}

namespace detail {
inline void put(FeatureValues& v, std::size_t index, double x) { v[index - 1] = x; }
}  // namespace detail

/// Features that do not depend on training labels. Other slots are left 0.
inline FeatureValues structural_features(const DiffusionNetwork& net, const FeatureContext& ctx) {
  using detail::put;
  FeatureValues v{};
  const std::size_t n = net.size();
  const double nv = static_cast<double>(n);
  put(v, 1, nv);

  const auto& cs = ctx.summary->centrality;
  for (std::size_t c = 0; c < kNumCentralities; ++c) {
    std::vector<double> xs(n);
    for (std::uint32_t i = 0; i < n; ++i) xs[i] = cs.values[c][net.node(i)];
    put(v, 14 + c, mean_of(xs));
    put(v, 22 + c, median_of(std::move(xs)));
  }

  const auto geo = distance_stats(net, DistanceMetric::geodesic);
  put(v, 30, geo.maximum);
  put(v, 31, geo.mean);
  put(v, 32, geo.median);
  const auto eff_news = distance_stats(net, DistanceMetric::effective_shared_news, &ctx.news_flow);
  const auto eff_freq = distance_stats(net, DistanceMetric::effective_shared_frequency, &ctx.frequency_flow);
  put(v, 33, eff_news.maximum);
  put(v, 34, eff_freq.maximum);
  put(v, 35, eff_news.mean);
  put(v, 36, eff_freq.mean);
  put(v, 37, eff_news.median);
  put(v, 38, eff_freq.median);

  const double total = static_cast<double>(net.total_engagements());
  put(v, 39, total);
  put(v, 48, safe_ratio(total, nv));

  const double ne = static_cast<double>(net.num_edges());
  put(v, 53, ne);
  put(v, 54, safe_ratio(ne, nv));
  put(v, 55, safe_ratio(ne, binomial2(n)));

  const std::vector<UserClass> any(n, UserClass::normal);
  const auto tf = triad_features(census(net, any), n);
  put(v, 84, tf.total);
  put(v, 85, tf.per_spreader);
  put(v, 86, tf.density);

  std::set<std::uint32_t> global;
  for (std::uint32_t i = 0; i < n; ++i) global.insert(ctx.summary->global_communities.community[net.node(i)]);
  const auto local = louvain(symmetrize(net), derive_seed(ctx.louvain_seed, "local/" + net.news_id()), CommunityScope::local);
  put(v, 135, static_cast<double>(global.size()));
  put(v, 136, static_cast<double>(local.num_communities));
  put(v, 137, safe_ratio(static_cast<double>(global.size()), nv));
  put(v, 138, safe_ratio(static_cast<double>(local.num_communities), nv));
  return v;
}

/// Fills the susceptibility-dependent and similarity slots on top of a
/// precomputed structural block.
inline FeatureVector extract(const DiffusionNetwork& net, const SusceptibilityModel& by_news,
                             const SusceptibilityModel& by_frequency, const FeatureValues& structural,
                             const SimilarityFeatures& similarity) {
  using detail::put;
  FeatureVector fv{net.news_id(), net.label(), structural};
  auto& v = fv.values;
  const std::size_t n = net.size();
  const double nv = static_cast<double>(n);
  const double ne = static_cast<double>(net.num_edges());
  const double total = static_cast<double>(net.total_engagements());

  const SusceptibilityModel* models[2] = {&by_news, &by_frequency};
  for (std::size_t m = 0; m < 2; ++m) {
    const auto& model = *models[m];
    const auto cls = local_classes(net, model);
    double normal = 0, susceptible = 0, eng_normal = 0, eng_susceptible = 0;
    std::vector<double> scores(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      scores[i] = model.score(net.node(i));
      if (cls[i] == UserClass::normal) {
        ++normal;
        eng_normal += net.count(i);
      } else if (cls[i] == UserClass::susceptible) {
        ++susceptible;
        eng_susceptible += net.count(i);
      }
    }
    put(v, 2 + m, normal);
    put(v, 4 + m, susceptible);
    put(v, 6 + m, safe_ratio(normal, nv));
    put(v, 8 + m, safe_ratio(susceptible, nv));
    put(v, 10 + m, mean_of(scores));
    put(v, 12 + m, median_of(scores));

    put(v, 40 + m, eng_normal);
    put(v, 42 + m, eng_susceptible);
    put(v, 44 + m, safe_ratio(eng_normal, total));
    put(v, 46 + m, safe_ratio(eng_susceptible, total));
    put(v, 49 + m, safe_ratio(eng_normal, normal));
    put(v, 51 + m, safe_ratio(eng_susceptible, susceptible));

    std::array<double, 4> ego{};  // NN, NS, SN, SS
    std::array<double, 3> delta{};  // >0, =0, <0
    for (const auto& [a, b] : net.edges()) {
      if (cls[a] != UserClass::unknown && cls[b] != UserClass::unknown) {
        ++ego[2 * (cls[a] == UserClass::susceptible) + (cls[b] == UserClass::susceptible)];
      }
      const double d = scores[a] - scores[b];
      ++delta[d > 0 ? 0 : (d == 0 ? 1 : 2)];
    }
    for (std::size_t k = 0; k < 4; ++k) {
      put(v, 56 + 4 * k + m, ego[k]);
      put(v, 58 + 4 * k + m, safe_ratio(ego[k], ne));
    }
    for (std::size_t k = 0; k < 3; ++k) {
      put(v, 72 + 4 * k + m, delta[k]);
      put(v, 74 + 4 * k + m, safe_ratio(delta[k], ne));
    }

    const auto tf = triad_features(census(net, cls), n);
    for (std::size_t k = 0; k < kTriadClasses; ++k) {
      put(v, 87 + 2 * k + m, tf.counts[k]);
      put(v, 111 + 2 * k + m, tf.proportions[k]);
    }
  }
  for (std::size_t k = 0; k < 4; ++k) put(v, 139 + k, similarity[k]);
  return fv;
}

inline FeatureVector extract(const DiffusionNetwork& net, const SusceptibilityModel& by_news,
                             const SusceptibilityModel& by_frequency, const FeatureContext& ctx,
                             const SimilarityFeatures& similarity) {
  return extract(net, by_news, by_frequency, structural_features(net, ctx), similarity);
}

/// Full extraction with similarity computed against explicit reference sets
/// (class labels for the kernel come from the by-news model).
inline FeatureVector extract(const DiffusionNetwork& net, const SusceptibilityModel& by_news,
                             const SusceptibilityModel& by_frequency, const FeatureContext& ctx,
                             std::span<const DiffusionNetwork> fake_refs, std::span<const DiffusionNetwork> true_refs,
                             int wl_iterations = 3) {
  return extract(net, by_news, by_frequency, ctx, similarity_features(net, fake_refs, true_refs, by_news, wl_iterations));
}

// ---------------------------------------------------------------------------
// Output formats.

inline std::string feature_column(std::size_t index) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "f%03zu", index);
  return buf;
}

/// CSV `news_id,label,f001..f142`.
inline void write_feature_matrix(std::span<const FeatureVector> rows, std::ostream& out) {
  out << "news_id,label";
  for (std::size_t i = 1; i <= kNumFeatures; ++i) out << ',' << feature_column(i);
  out << '\n';
  for (const auto& r : rows) {
    out << csv::escape(r.news_id) << ',' << to_string(r.label);
    for (double x : r.values) out << ',' << csv::format_double(x);
    out << '\n';
  }
}

inline nlohmann::json feature_registry_json() {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& f : feature_registry()) {
    const char* method = f.method == MethodDependence::by_news        ? "news"
                         : f.method == MethodDependence::by_frequency ? "frequency"
                                                                      : nullptr;
    j.push_back({{"index", f.index},
                 {"column", feature_column(f.index)},
                 {"name", f.name},
                 {"pattern", std::string(to_string(f.pattern))},
                 {"group", f.group},
                 {"method", method ? nlohmann::json(method) : nlohmann::json(nullptr)}});
  }
  return j;
}

}  // namespace fnd
