#pragma once

#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fnd/classifiers.hpp"
#include "fnd/diffusion.hpp"
#include "fnd/evaluation.hpp"
#include "fnd/features.hpp"
#include "fnd/ingestion.hpp"
#include "fnd/susceptibility.hpp"
#include "fnd/wl_kernel.hpp"

namespace fnd {

/// Label-free state for one set of diffusion networks: everything that can
/// be computed once and reused by every fold and threshold.
struct PreparedCorpus {
  const SocialGraph* graph = nullptr;
  std::vector<DiffusionNetwork> networks;
  EngagementTable table;
  FeatureContext context;
  std::vector<FeatureValues> structural;
  std::vector<WLSignature> identity_signatures;
  std::vector<std::vector<double>> identity_gram;  // normalized
  int wl_iterations = 3;

  std::size_t size() const noexcept { return networks.size(); }

  std::vector<NewsLabel> labels() const {
    std::vector<NewsLabel> out;
    out.reserve(networks.size());
    for (const auto& n : networks) out.push_back(n.label());
    return out;
  }
};

namespace detail {

inline std::vector<std::vector<double>> normalized_gram(std::span<const WLSignature> sigs, unsigned jobs) {
  const std::size_t n = sigs.size();
  std::vector<double> self(n);
  for (std::size_t i = 0; i < n; ++i) self[i] = wl_kernel(sigs[i], sigs[i]);
  std::vector<std::vector<double>> k(n, std::vector<double>(n, 0.0));
  parallel_for(n, jobs, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (self[i] == 0.0 || self[j] == 0.0) continue;
      k[i][j] = std::clamp(wl_kernel(sigs[i], sigs[j]) / std::sqrt(self[i] * self[j]), 0.0, 1.0);
    }
  });
  return k;
}

}  // namespace detail

/// Builds the label-free state from already-built networks (possibly
/// subsampled). Flows are recomputed from these networks.
inline PreparedCorpus prepare(const SocialGraph& graph, std::vector<DiffusionNetwork> networks,
                              std::shared_ptr<const GraphSummary> summary, std::uint64_t seed, int wl_iterations = 3,
                              unsigned jobs = 1) {
  PreparedCorpus pc;
  pc.graph = &graph;
  pc.networks = std::move(networks);
  pc.table = table_from_networks(pc.networks, graph.num_nodes());
  pc.context = make_feature_context(graph, std::move(summary), pc.networks, derive_seed(seed, "louvain"));
  pc.wl_iterations = wl_iterations;
  pc.structural.resize(pc.networks.size());
  parallel_for(pc.networks.size(), jobs,
               [&](std::size_t i) { pc.structural[i] = structural_features(pc.networks[i], pc.context); });
  WLDictionary dict;
  for (const auto& net : pc.networks) {
    pc.identity_signatures.push_back(wl_signature(labeled_graph(net, LabelScheme::identity), wl_iterations, dict));
  }
  pc.identity_gram = detail::normalized_gram(pc.identity_signatures, jobs);
  return pc;
}

inline PreparedCorpus prepare(const SocialGraph& graph, const EngagementTable& table,
                              std::shared_ptr<const GraphSummary> summary, std::uint64_t seed, int wl_iterations = 3,
                              unsigned jobs = 1) {
  return prepare(graph, build_all_networks(graph, table, jobs), std::move(summary), seed, wl_iterations, jobs);
}

/// The graph summary seed used by every study, so all of them share one
/// global community assignment.
inline std::shared_ptr<const GraphSummary> summarize(const SocialGraph& graph, std::uint64_t seed, unsigned jobs = 1) {
  return summarize_graph(graph, derive_seed(seed, "louvain"), jobs);
}

struct FoldModels {
  SusceptibilityModel by_news;
  SusceptibilityModel by_frequency;
};

/// Feature vectors for every news item, as seen by a model whose training
/// set is `train`. Only the labels of `labels[train]` are read; pass the
/// corpus labels or any relabeling that agrees on the training set.
inline std::vector<FeatureVector> fold_features(const PreparedCorpus& pc, std::span<const NewsLabel> labels,
                                                std::span<const std::size_t> train, double theta, unsigned jobs = 1,
                                                FoldModels* models_out = nullptr) {
  if (labels.size() != pc.size()) throw std::invalid_argument("one label per network expected");
  const EngagementTable table = pc.table.relabeled(labels);
  FoldModels models{fit_susceptibility(table, train, SusceptibilityMethod::by_news, theta),
                    fit_susceptibility(table, train, SusceptibilityMethod::by_frequency, theta)};

  // Class-labeled signatures depend on the fold's model; the dictionary is
  // filled serially in network order.
  WLDictionary dict;
  std::vector<WLSignature> class_sigs;
  class_sigs.reserve(pc.size());
  for (const auto& net : pc.networks) {
    class_sigs.push_back(
        wl_signature(labeled_graph(net, LabelScheme::susceptibility_class, &models.by_news), pc.wl_iterations, dict));
  }
  const auto class_gram = detail::normalized_gram(class_sigs, jobs);

  std::vector<std::size_t> fake_refs, true_refs;
  for (auto i : train) (labels[i] == NewsLabel::fake ? fake_refs : true_refs).push_back(i);

  // Mean over a reference set, leaving the target itself out.
  auto mean_ref = [&](const std::vector<std::vector<double>>& gram, std::size_t i, const std::vector<std::size_t>& refs) {
    double s = 0.0;
    std::size_t count = 0;
    for (auto j : refs) {
      if (j == i) continue;
      s += gram[i][j];
      ++count;
    }
    return safe_ratio(s, static_cast<double>(count));
  };

  std::vector<FeatureVector> out(pc.size());
  parallel_for(pc.size(), jobs, [&](std::size_t i) {
    const SimilarityFeatures sim{mean_ref(pc.identity_gram, i, fake_refs), mean_ref(pc.identity_gram, i, true_refs),
                                 mean_ref(class_gram, i, fake_refs), mean_ref(class_gram, i, true_refs)};
    out[i] = extract(pc.networks[i], models.by_news, models.by_frequency, pc.structural[i], sim);
    out[i].label = labels[i];
  });
  if (models_out) *models_out = std::move(models);
  return out;
}

inline Matrix to_matrix(std::span<const FeatureVector> rows) {
  Matrix m(rows.size(), kNumFeatures);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < kNumFeatures; ++c) m(r, c) = rows[r].values[c];
  }
  return m;
}

/// One full 142-column matrix per fold.
inline std::vector<Matrix> fold_matrices(const PreparedCorpus& pc, const DatasetSplit& split, double theta,
                                         unsigned jobs = 1) {
  const auto labels = pc.labels();
  std::vector<Matrix> out;
  for (std::size_t f = 0; f < split.folds; ++f) {
    out.push_back(to_matrix(fold_features(pc, labels, split.train_indices(f), theta, jobs)));
  }
  return out;
}

/// Every row taken from the fold in which it is held out.
inline std::vector<FeatureVector> out_of_fold_features(const PreparedCorpus& pc, const DatasetSplit& split,
                                                       double theta, unsigned jobs = 1) {
  const auto labels = pc.labels();
  std::vector<FeatureVector> out(pc.size());
  for (std::size_t f = 0; f < split.folds; ++f) {
    const auto rows = fold_features(pc, labels, split.train_indices(f), theta, jobs);
    for (auto i : split.test_indices(f)) out[i] = rows[i];
  }
  return out;
}

/// 1-based feature mask -> 0-based matrix columns, restricted to `methods`.
inline std::vector<std::size_t> mask_columns(std::span<const std::size_t> mask,
                                             const std::set<SusceptibilityMethod>& methods) {
  std::vector<std::size_t> cols;
  for (auto i : restrict_to_methods(mask, methods)) cols.push_back(i - 1);
  if (cols.empty()) throw ConfigError("feature mask is empty after restricting susceptibility methods");
  return cols;
}

struct CrossValidationOptions {
  ClassifierParams classifier;
  double theta = 0.5;
  std::set<SusceptibilityMethod> methods{SusceptibilityMethod::by_news, SusceptibilityMethod::by_frequency};
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

inline DatasetSplit cv_split(const PreparedCorpus& pc, const CrossValidationOptions& opt) {
  return stratified_split(pc.labels(), opt.folds, derive_seed(opt.seed, "cv"));
}

inline EvalReport cross_validate(const PreparedCorpus& pc, std::span<const std::size_t> mask,
                                 const CrossValidationOptions& opt) {
  const auto split = cv_split(pc, opt);
  const auto matrices = fold_matrices(pc, split, opt.theta, opt.jobs);
  return evaluate_folds(matrices, pc.labels(), split, opt.classifier, mask_columns(mask, opt.methods), opt.seed,
                        opt.jobs);
}

}  // namespace fnd
