#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fnd/common.hpp"
#include "fnd/diffusion.hpp"
#include "fnd/susceptibility.hpp"

namespace fnd {

enum class LabelScheme : std::uint8_t { identity, susceptibility_class };

/// Undirected graph with one integer label per node.
struct LabeledGraph {
  std::vector<std::vector<std::uint32_t>> adj;  // sorted, no duplicates
  std::vector<std::uint64_t> labels;
  LabelScheme scheme = LabelScheme::identity;

  std::size_t size() const noexcept { return labels.size(); }
};

/// Symmetrized diffusion network. Identity labels are global user ids; class
/// labels are 0 (normal), 1 (susceptible), 2 (unknown).
inline LabeledGraph labeled_graph(const DiffusionNetwork& net, LabelScheme scheme,
                                  const SusceptibilityModel* model = nullptr) {
  LabeledGraph g;
  g.scheme = scheme;
  const std::size_t n = net.size();
  g.adj.resize(n);
  for (const auto& [u, v] : net.edges()) {
    g.adj[u].push_back(v);
    g.adj[v].push_back(u);
  }
  for (auto& a : g.adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  g.labels.resize(n);
  if (scheme == LabelScheme::susceptibility_class && model == nullptr) {
    throw std::invalid_argument("class labels need a susceptibility model");
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    g.labels[i] = scheme == LabelScheme::identity ? net.node(i) : static_cast<std::uint64_t>(model->classify(net.node(i)));
  }
  return g;
}

/// Sparse label histogram: (label, count) pairs sorted by label.
using LabelHistogram = std::vector<std::pair<std::uint64_t, std::uint32_t>>;

struct WLSignature {
  std::vector<LabelHistogram> iterations;  // 0..h
  std::uint64_t dictionary_id = 0;
  int h = 0;
};

/// Compression table shared by every graph in a batch, so equal rooted
/// subtree patterns get equal ids across graphs.
class WLDictionary {
 public:
  WLDictionary() : id_(next_id()) {}

  std::uint64_t id() const noexcept { return id_; }
  std::size_t size() const noexcept { return table_.size(); }

  std::uint64_t compress(int iteration, std::uint64_t own, std::vector<std::uint64_t> neighbor_labels) {
    std::sort(neighbor_labels.begin(), neighbor_labels.end());
    Key key{iteration, own, std::move(neighbor_labels)};
    const auto [it, inserted] = table_.try_emplace(std::move(key), static_cast<std::uint64_t>(table_.size()));
    return it->second;
  }

 private:
  struct Key {
    int iteration;
    std::uint64_t own;
    std::vector<std::uint64_t> neighbors;
    auto operator<=>(const Key&) const = default;
  };

  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
  }

  std::uint64_t id_;
  std::map<Key, std::uint64_t> table_;
};

namespace detail {
inline LabelHistogram histogram(std::vector<std::uint64_t> labels) {
  std::sort(labels.begin(), labels.end());
  LabelHistogram h;
  for (std::size_t i = 0; i < labels.size();) {
    std::size_t j = i;
    while (j < labels.size() && labels[j] == labels[i]) ++j;
    h.emplace_back(labels[i], static_cast<std::uint32_t>(j - i));
    i = j;
  }
  return h;
}
}  // namespace detail

/// Weisfeiler-Lehman subtree relabeling for h rounds.
inline WLSignature wl_signature(const LabeledGraph& g, int h, WLDictionary& dict) {
  if (h < 0) throw std::invalid_argument("WL iterations must be >= 0");
  WLSignature sig;
  sig.h = h;
  sig.dictionary_id = dict.id();
  std::vector<std::uint64_t> labels = g.labels;
  sig.iterations.push_back(detail::histogram(labels));
  std::vector<std::uint64_t> next(labels.size());
  std::vector<std::uint64_t> nbr;
  for (int it = 1; it <= h; ++it) {
    for (std::size_t v = 0; v < labels.size(); ++v) {
      nbr.clear();
      for (auto u : g.adj[v]) nbr.push_back(labels[u]);
      next[v] = dict.compress(it, labels[v], nbr);
    }
    labels.swap(next);
    sig.iterations.push_back(detail::histogram(labels));
  }
  return sig;
}

/// Sum over iterations of histogram inner products.
inline double wl_kernel(const WLSignature& a, const WLSignature& b) {
  if (a.h != b.h) throw std::invalid_argument("WL signatures with different iteration counts");
  if (a.dictionary_id != b.dictionary_id) throw std::invalid_argument("WL signatures from different dictionaries");
  double k = 0.0;
  for (std::size_t it = 0; it < a.iterations.size(); ++it) {
    const auto& x = a.iterations[it];
    const auto& y = b.iterations[it];
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
      if (x[i].first < y[j].first) ++i;
      else if (y[j].first < x[i].first) ++j;
      else {
        k += static_cast<double>(x[i].second) * static_cast<double>(y[j].second);
        ++i;
        ++j;
      }
    }
  }
  return k;
}

/// k(a,b) / sqrt(k(a,a) k(b,b)); 0 if either graph is empty.
inline double wl_kernel_normalized(const WLSignature& a, const WLSignature& b) {
  const double kab = wl_kernel(a, b);
  const double kaa = wl_kernel(a, a);
  const double kbb = wl_kernel(b, b);
  if (kaa == 0.0 || kbb == 0.0) return 0.0;
  return std::clamp(kab / std::sqrt(kaa * kbb), 0.0, 1.0);
}

inline std::vector<std::vector<double>> gram_matrix(std::span<const WLSignature> sigs, bool normalized) {
  const std::size_t n = sigs.size();
  std::vector<std::vector<double>> k(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      k[i][j] = k[j][i] = normalized ? wl_kernel_normalized(sigs[i], sigs[j]) : wl_kernel(sigs[i], sigs[j]);
    }
  }
  return k;
}

/// Mean normalized kernel from a target to a reference set. Empty set gives 0.
inline double mean_similarity(const WLSignature& target, std::span<const WLSignature* const> refs) {
  if (refs.empty()) return 0.0;
  double s = 0.0;
  for (const auto* r : refs) s += wl_kernel_normalized(target, *r);
  return s / static_cast<double>(refs.size());
}

/// sim_fake_id, sim_true_id, sim_fake_class, sim_true_class.
using SimilarityFeatures = std::array<double, 4>;

/// Mean similarity of `target` to the fake and true reference networks under
/// identity labels and susceptibility-class labels.
inline SimilarityFeatures similarity_features(const DiffusionNetwork& target, std::span<const DiffusionNetwork> fake_refs,
                                              std::span<const DiffusionNetwork> true_refs,
                                              const SusceptibilityModel& model, int h) {
  SimilarityFeatures out{};
  const LabelScheme schemes[] = {LabelScheme::identity, LabelScheme::susceptibility_class};
  for (int s = 0; s < 2; ++s) {
    WLDictionary dict;
    const auto sig = [&](const DiffusionNetwork& n) { return wl_signature(labeled_graph(n, schemes[s], &model), h, dict); };
    const WLSignature t = sig(target);
    for (int cls = 0; cls < 2; ++cls) {
      const auto refs = cls == 0 ? fake_refs : true_refs;
      std::vector<WLSignature> sigs;
      sigs.reserve(refs.size());
      for (const auto& r : refs) sigs.push_back(sig(r));
      std::vector<const WLSignature*> ptrs;
      for (const auto& x : sigs) ptrs.push_back(&x);
      out[2 * s + cls] = mean_similarity(t, ptrs);
    }
  }
  return out;
}

}  // namespace fnd
