#include <gtest/gtest.h>

#include "fnd/classifiers.hpp"
#include "fnd/evaluation.hpp"

using namespace fnd;

namespace {

constexpr auto F = NewsLabel::fake;
constexpr auto T = NewsLabel::real;

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m;
  for (const auto& r : rows) m.push_row(r);
  return m;
}

/// Two Gaussian blobs in `d` dimensions, `n` per class, centers `gap` apart
/// along the first `informative` axes.
std::pair<Matrix, std::vector<NewsLabel>> blobs(std::size_t n, std::size_t d, std::size_t informative, double gap,
                                                std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix x;
  std::vector<NewsLabel> y;
  for (std::size_t i = 0; i < 2 * n; ++i) {
    const bool fake = i % 2 == 0;
    std::vector<double> row(d);
    for (std::size_t c = 0; c < d; ++c) row[c] = noise(rng) + (fake && c < informative ? gap : 0.0);
    x.push_row(row);
    y.push_back(fake ? F : T);
  }
  return {x, y};
}

}  // namespace

TEST(Metrics, AllFakePredictions) {
  Confusion c;
  for (auto truth : {F, F, T, T}) c.add(truth, F);
  EXPECT_EQ(c.tp, 2u);
  EXPECT_EQ(c.fp, 2u);
  EXPECT_EQ(c.accuracy(), 0.5);
  EXPECT_EQ(c.precision(), 0.5);
  EXPECT_EQ(c.recall(), 1.0);
  EXPECT_NEAR(c.f1(), 2.0 / 3.0, 1e-15);
}

TEST(Metrics, NoPositivePredictionsGiveZeroF1) {
  Confusion c;
  for (auto truth : {F, T}) c.add(truth, T);
  EXPECT_EQ(c.precision(), 0.0);
  EXPECT_EQ(c.f1(), 0.0);
  EXPECT_EQ(c.accuracy(), 0.5);
  EXPECT_EQ(Confusion{}.accuracy(), 0.0);
}

TEST(Split, StratifiedAndBalanced) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    const std::size_t folds = 2 + uniform_index(rng, 5);
    const std::size_t nf = folds + uniform_index(rng, 30), nt = folds + uniform_index(rng, 30);
    std::vector<NewsLabel> labels;
    for (std::size_t i = 0; i < nf + nt; ++i) labels.push_back(i < nf ? F : T);
    shuffle(labels, rng);
    const auto s = stratified_split(labels, folds, seed);
    EXPECT_EQ(s, stratified_split(labels, folds, seed));
    std::vector<std::size_t> fake(folds), all(folds);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      ASSERT_LT(s.fold_of[i], folds);
      ++all[s.fold_of[i]];
      fake[s.fold_of[i]] += labels[i] == F;
    }
    const auto [fmin, fmax] = std::minmax_element(fake.begin(), fake.end());
    const auto [amin, amax] = std::minmax_element(all.begin(), all.end());
    EXPECT_LE(*fmax - *fmin, 1u);
    EXPECT_LE(*amax - *amin, 1u);
    for (std::size_t f = 0; f < folds; ++f) {
      EXPECT_EQ(s.train_indices(f).size() + s.test_indices(f).size(), labels.size());
    }
  }
}

TEST(Split, TooFewPerClassIsInputError) {
  const std::vector<NewsLabel> labels{F, F, T, T, T, T, T};
  EXPECT_THROW(stratified_split(labels, 3, 1), InputError);
  EXPECT_THROW(stratified_split(labels, 1, 1), std::invalid_argument);
  EXPECT_NO_THROW(stratified_split(labels, 2, 1));
}

TEST(Tree, DepthOneIsASingleSplit) {
  const auto x = from_rows({{1, 0}, {2, 0}, {3, 1}, {4, 1}});
  const std::vector<NewsLabel> y{F, F, T, T};
  ClassifierParams p;
  p.kind = ClassifierKind::decision_tree;
  p.max_depth = 1;
  const auto m = fit_classifier(p, x, y, {}, 1);
  ASSERT_NE(m.tree(), nullptr);
  EXPECT_EQ(m.tree()->num_nodes(), 3u);
  for (std::size_t r = 0; r < 4; ++r) EXPECT_EQ(m.predict(x.row(r)), y[r]);
}

TEST(Tree, MidpointThresholdGoesLeftOnEquality) {
  const auto x = from_rows({{0}, {2}});
  const std::vector<NewsLabel> y{F, T};
  ClassifierParams p;
  p.kind = ClassifierKind::decision_tree;
  const auto m = fit_classifier(p, x, y, {}, 1);
  EXPECT_EQ(m.predict(std::vector<double>{1.0}), F);
  EXPECT_EQ(m.predict(std::vector<double>{1.0000001}), T);
}

TEST(Forest, ConstantFeaturesDoNotUseUpCandidates) {
  // One informative column hidden among constants; every tree must split on it at the root.
  Matrix x;
  std::vector<NewsLabel> y;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> row(10, 7.0);
    row[6] = i;
    x.push_row(row);
    y.push_back(i < 10 ? F : T);
  }
  ClassifierParams p;
  p.trees = 25;
  p.max_features = 1;
  p.bootstrap = false;
  const auto m = fit_random_forest(x, y, 3, p);
  ASSERT_NE(m.forest(), nullptr);
  for (const auto& t : m.forest()->trees()) EXPECT_EQ(t.root_feature(), 6);
  std::vector<double> probe(10, 7.0);
  probe[6] = 2;
  EXPECT_EQ(m.predict(probe), F);
  probe[6] = 17;
  EXPECT_EQ(m.predict(probe), T);
}

TEST(Forest, SeparableBlobs) {
  const auto [x, y] = blobs(60, 8, 2, 4.0, 11);
  const auto split = stratified_split(y, 5, 2);
  const std::vector<Matrix> ms(5, x);
  const auto r = evaluate_folds(ms, y, split, ClassifierParams{}, {}, 9);
  EXPECT_GE(r.mean_accuracy, 0.9);
  EXPECT_GE(r.mean_f1, 0.9);
  EXPECT_EQ(r.total.total(), y.size());
}

TEST(Forest, MemorizesTrainingSet) {
  const auto [x, y] = blobs(50, 5, 1, 1.0, 21);
  ClassifierParams p;
  p.bootstrap = false;
  const auto m = fit_random_forest(x, y, 8, p);
  std::size_t right = 0;
  for (std::size_t r = 0; r < x.rows(); ++r) right += m.predict(x.row(r)) == y[r];
  EXPECT_GE(static_cast<double>(right) / static_cast<double>(x.rows()), 0.99);
}

TEST(Forest, DeterministicAcrossThreadCounts) {
  const auto [x, y] = blobs(40, 6, 1, 1.0, 12);
  const auto split = stratified_split(y, 4, 2);
  const std::vector<Matrix> ms(4, x);
  const auto a = evaluate_folds(ms, y, split, ClassifierParams{}, {}, 5, 1);
  const auto b = evaluate_folds(ms, y, split, ClassifierParams{}, {}, 5, 4);
  EXPECT_EQ(a, b);
  const auto c = evaluate_folds(ms, y, split, ClassifierParams{}, {}, 6, 1);
  EXPECT_EQ(c.predictions.size(), a.predictions.size());
}

TEST(Forest, ColumnSubsetReadsOnlySelectedColumns) {
  const auto [x, y] = blobs(30, 4, 4, 3.0, 13);
  const auto m = fit_classifier(ClassifierParams{}, x, y, {1, 3}, 4);
  EXPECT_EQ(m.columns(), (std::vector<std::size_t>{1, 3}));
  auto row = std::vector<double>(x.row(0).begin(), x.row(0).end());
  const auto before = m.predict(row);
  row[0] = row[2] = 1e9;
  EXPECT_EQ(m.predict(row), before);
}

TEST(Classifier, RejectsDegenerateTraining) {
  const auto x = from_rows({{1}, {2}});
  EXPECT_THROW(fit_classifier(ClassifierParams{}, x, std::vector<NewsLabel>{F, F}, {}, 1), std::invalid_argument);
  EXPECT_THROW(fit_classifier(ClassifierParams{}, x, std::vector<NewsLabel>{F}, {}, 1), std::invalid_argument);
  EXPECT_THROW(parse_classifier("svm"), ConfigError);
  EXPECT_EQ(parse_classifier("knn"), ClassifierKind::knn);
  EXPECT_THROW(fit_baseline(ClassifierKind::random_forest, x, std::vector<NewsLabel>{F, T}), std::invalid_argument);
}

TEST(KNN, OneNeighborReproducesTraining) {
  const auto [x, y] = blobs(15, 3, 1, 0.5, 14);
  ClassifierParams p;
  p.knn_k = 1;
  const auto m = fit_baseline(ClassifierKind::knn, x, y, p);
  for (std::size_t r = 0; r < x.rows(); ++r) EXPECT_EQ(m.predict(x.row(r)), y[r]);
}

TEST(KNN, EquidistantTieGoesToFake) {
  const auto x = from_rows({{0}, {2}});
  ClassifierParams p;
  p.knn_k = 1;
  const auto m = fit_baseline(ClassifierKind::knn, x, std::vector<NewsLabel>{T, F}, p);
  EXPECT_EQ(m.predict(std::vector<double>{1.0}), F);
  EXPECT_EQ(m.predict(std::vector<double>{0.2}), T);
}

TEST(GaussianNB, SeparatesClusters) {
  const auto [x, y] = blobs(50, 3, 3, 12.0, 15);
  const auto m = fit_baseline(ClassifierKind::gaussian_nb, x, y);
  for (std::size_t r = 0; r < x.rows(); ++r) EXPECT_EQ(m.predict(x.row(r)), y[r]);
}

TEST(GaussianNB, ConstantColumnsStayFinite) {
  const auto x = from_rows({{1, 5}, {1, 6}, {1, 1}, {1, 2}});
  const auto m = fit_baseline(ClassifierKind::gaussian_nb, x, std::vector<NewsLabel>{F, F, T, T});
  EXPECT_EQ(m.predict(std::vector<double>{1, 5.5}), F);
  EXPECT_EQ(m.predict(std::vector<double>{1, 1.5}), T);
}

TEST(Relief, InformativeBeatsNoise) {
  const auto x = from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  const std::vector<NewsLabel> y{F, F, T, T};
  const auto w = relief_rank(x, y, 1);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].column, 0u);
  EXPECT_EQ(w[0].weight, 1.0);
  EXPECT_EQ(w[1].column, 1u);
  EXPECT_EQ(w[1].weight, -1.0);
}

TEST(Relief, ScaleInvariantAndBounded) {
  const auto [x, y] = blobs(30, 5, 2, 2.0, 16);
  Matrix scaled = x;
  for (std::size_t r = 0; r < x.rows(); ++r) scaled(r, 3) = 1000.0 * x(r, 3) - 7.0;
  const auto a = relief_rank(x, y, 1);
  const auto b = relief_rank(scaled, y, 1);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].column, b[i].column);
    EXPECT_NEAR(a[i].weight, b[i].weight, 1e-12);
    EXPECT_GE(a[i].weight, -1.0);
    EXPECT_LE(a[i].weight, 1.0);
  }
  EXPECT_LT(a[0].column, 2u);
  EXPECT_LT(a[1].column, 2u);
}

TEST(Relief, DuplicatedColumnsGetEqualWeight) {
  auto [x, y] = blobs(20, 3, 1, 2.0, 17);
  Matrix dup;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = std::vector<double>(x.row(r).begin(), x.row(r).end());
    row.push_back(row[0]);
    dup.push_row(row);
  }
  const auto w = relief_rank(dup, y, 1);
  std::vector<double> by_col(4);
  for (const auto& e : w) by_col[e.column] = e.weight;
  EXPECT_EQ(by_col[0], by_col[3]);
}

TEST(Relief, SeparatingFeatureRanksFirstAmongNoise) {
  Rng rng(3);
  Matrix x;
  std::vector<NewsLabel> y;
  for (int i = 0; i < 20; ++i) {
    const bool fake = i < 10;
    x.push_row(std::vector<double>{uniform_real(rng), fake ? 1.0 + uniform_real(rng) : uniform_real(rng) - 1.0,
                                   uniform_real(rng)});
    y.push_back(fake ? F : T);
  }
  EXPECT_EQ(relief_rank(x, y, 1)[0].column, 1u);
}

TEST(Relief, NeedsTwoPerClass) {
  const auto x = from_rows({{0}, {1}, {2}});
  EXPECT_THROW(relief_rank(x, std::vector<NewsLabel>{F, T, T}, 1), std::invalid_argument);
}
