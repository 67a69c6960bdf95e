#include <gtest/gtest.h>

#include "fnd/wl_kernel.hpp"
#include "oracles.hpp"

using namespace fnd;

namespace {

LabeledGraph make(std::vector<std::uint64_t> labels, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  LabeledGraph g;
  g.labels = std::move(labels);
  g.adj.resize(g.labels.size());
  for (auto [u, v] : edges) {
    g.adj[u].push_back(v);
    g.adj[v].push_back(u);
  }
  for (auto& a : g.adj) std::sort(a.begin(), a.end());
  return g;
}

LabeledGraph random_graph(Rng& rng, std::size_t max_nodes = 12) {
  const std::size_t n = 1 + uniform_index(rng, max_nodes);
  std::vector<std::uint64_t> labels(n);
  for (auto& l : labels) l = uniform_index(rng, 3);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  const double p = uniform_real(rng);
  for (std::uint32_t u = 0; u < n; ++u) {
    for (std::uint32_t v = u + 1; v < n; ++v) {
      if (uniform_real(rng) < p) edges.emplace_back(u, v);
    }
  }
  return make(std::move(labels), edges);
}

LabeledGraph permuted(const LabeledGraph& g, Rng& rng) {
  const std::size_t n = g.size();
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::uint64_t> labels(n);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t v = 0; v < n; ++v) {
    labels[perm[v]] = g.labels[v];
    for (auto u : g.adj[v]) {
      if (v < u) edges.emplace_back(perm[v], perm[u]);
    }
  }
  return make(std::move(labels), edges);
}

}  // namespace

TEST(WLKernel, ZeroIterationsIsLabelHistogram) {
  WLDictionary dict;
  const auto g = make({5, 2, 5, 5}, {{0, 1}});
  const auto sig = wl_signature(g, 0, dict);
  ASSERT_EQ(sig.iterations.size(), 1u);
  EXPECT_EQ(sig.iterations[0], (LabelHistogram{{2, 1}, {5, 3}}));
  EXPECT_EQ(wl_kernel(sig, sig), 1.0 + 9.0);
}

TEST(WLKernel, PathVersusTriangle) {
  WLDictionary dict;
  const auto path = wl_signature(make({0, 0, 0}, {{0, 1}, {1, 2}}), 1, dict);
  const auto tri = wl_signature(make({0, 0, 0}, {{0, 1}, {1, 2}, {0, 2}}), 1, dict);
  // Iteration 0: 3*3. Iteration 1: the path has two ends and a middle, the
  // triangle three degree-2 nodes matching the middle.
  EXPECT_EQ(wl_kernel(path, tri), 9.0 + 3.0);
  EXPECT_EQ(wl_kernel(path, path), 9.0 + 4.0 + 1.0);
  EXPECT_EQ(wl_kernel(tri, tri), 9.0 + 9.0);
  EXPECT_NEAR(wl_kernel_normalized(path, tri), 12.0 / std::sqrt(14.0 * 18.0), 1e-15);
}

TEST(WLKernel, DisjointLabelsGiveZero) {
  WLDictionary dict;
  const auto a = wl_signature(make({1, 1}, {{0, 1}}), 2, dict);
  const auto b = wl_signature(make({7, 8}, {{0, 1}}), 2, dict);
  EXPECT_EQ(wl_kernel(a, b), 0.0);
  EXPECT_EQ(wl_kernel_normalized(a, b), 0.0);
}

TEST(WLKernel, MismatchedSignaturesThrow) {
  WLDictionary d1, d2;
  const auto g = make({0}, {});
  EXPECT_THROW(wl_kernel(wl_signature(g, 1, d1), wl_signature(g, 1, d2)), std::invalid_argument);
  EXPECT_THROW(wl_kernel(wl_signature(g, 1, d1), wl_signature(g, 2, d1)), std::invalid_argument);
  EXPECT_THROW(wl_signature(g, -1, d1), std::invalid_argument);
}

TEST(WLKernel, IsomorphicGraphsHaveIdenticalSignatures) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    WLDictionary dict;
    const auto g = random_graph(rng);
    const auto a = wl_signature(g, 3, dict);
    const auto b = wl_signature(permuted(g, rng), 3, dict);
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_NEAR(wl_kernel_normalized(a, b), 1.0, 1e-12);
  }
}

TEST(WLKernel, GramMatrixIsPositiveSemidefinite) {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    WLDictionary dict;
    std::vector<WLSignature> sigs;
    for (int i = 0; i < 20; ++i) sigs.push_back(wl_signature(random_graph(rng), 3, dict));
    for (bool normalized : {false, true}) {
      const auto k = gram_matrix(sigs, normalized);
      const auto ev = oracle::symmetric_eigenvalues(k);
      EXPECT_GE(ev.front(), -1e-8 * std::max(1.0, ev.back()));
      if (normalized) {
        for (std::size_t i = 0; i < k.size(); ++i) EXPECT_NEAR(k[i][i], 1.0, 1e-12);
      }
    }
  }
}

TEST(WLKernel, LabeledGraphFromNetwork) {
  const auto net = oracle::network_of(3, {{0, 1}, {1, 0}, {1, 2}});
  const auto id = labeled_graph(net, LabelScheme::identity);
  EXPECT_EQ(id.labels, (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(id.adj[1], (std::vector<std::uint32_t>{0, 2}));
  EXPECT_EQ(id.adj[0], (std::vector<std::uint32_t>{1}));
  EXPECT_THROW(labeled_graph(net, LabelScheme::susceptibility_class), std::invalid_argument);
}

TEST(WLKernel, SimilarityToSelfAndEmptyReferences) {
  const auto net = oracle::network_of(3, {{0, 1}, {1, 2}});
  const EngagementTable t(3, {{"r", NewsLabel::real, {{0, 1}}}});
  const std::vector<std::size_t> train{0};
  const auto model = fit_susceptibility(t, train, SusceptibilityMethod::by_news, 0.5);
  const std::vector<DiffusionNetwork> refs{net};
  const auto s = similarity_features(net, refs, {}, model, 3);
  EXPECT_NEAR(s[0], 1.0, 1e-12);
  EXPECT_EQ(s[1], 0.0);
  EXPECT_NEAR(s[2], 1.0, 1e-12);
  EXPECT_EQ(s[3], 0.0);
}
