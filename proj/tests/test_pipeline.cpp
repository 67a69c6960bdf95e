#include <gtest/gtest.h>

#include <cstdlib>

#include "fnd/experiments.hpp"
#include "fnd/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace fnd;
using nlohmann::json;

namespace {

SyntheticCorpus small_synthetic(std::uint64_t seed, bool strong = true) {
  SyntheticSpec s = strong ? SyntheticSpec::strong(seed) : SyntheticSpec{};
  s.seed = seed;
  s.users = 80;
  s.news_per_class = 12;
  s.base_spreaders = 6;
  s.edge_probability = 0.06;
  return generate_synthetic(s);
}

ExperimentConfig quick_config(std::uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  c.classifier.trees = 15;
  c.folds = 3;
  return c;
}

}  // namespace

TEST(Pipeline, TestLabelsAreNeverRead) {
  const auto s = small_synthetic(4);
  const auto pc = prepare(s.graph, s.table, summarize(s.graph, 4), 4);
  const auto labels = pc.labels();
  const auto split = stratified_split(labels, 3, 1);
  for (std::size_t f = 0; f < 3; ++f) {
    const auto train = split.train_indices(f);
    auto permuted = labels;
    for (auto i : split.test_indices(f)) permuted[i] = i % 2 ? NewsLabel::fake : NewsLabel::real;
    const auto a = fold_features(pc, labels, train, 0.5);
    const auto b = fold_features(pc, permuted, train, 0.5);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].values, b[i].values) << i;
  }
}

TEST(Pipeline, FoldFeaturesMatchDirectExtraction) {
  const auto s = small_synthetic(5);
  const auto pc = prepare(s.graph, s.table, summarize(s.graph, 5), 5);
  const auto labels = pc.labels();
  const auto split = stratified_split(labels, 3, 2);
  const auto train = split.train_indices(0);
  FoldModels models;
  const auto rows = fold_features(pc, labels, train, 0.5, 1, &models);

  auto target = [&](std::size_t i) {
    std::vector<DiffusionNetwork> fake, real;
    for (auto j : train) {
      if (j == i) continue;
      (labels[j] == NewsLabel::fake ? fake : real).push_back(pc.networks[j]);
    }
    return extract(pc.networks[i], models.by_news, models.by_frequency, pc.context, fake, real, pc.wl_iterations);
  };
  for (std::size_t i : {split.test_indices(0)[0], split.test_indices(0)[1], train[0], train[3]}) {
    const auto direct = target(i);
    for (std::size_t k = 0; k < kNumFeatures; ++k) EXPECT_NEAR(rows[i].values[k], direct.values[k], 1e-12) << i << ' ' << k;
  }
}

TEST(Pipeline, CrossValidationIndependentOfThreads) {
  const auto s = small_synthetic(6);
  const auto pc = prepare(s.graph, s.table, summarize(s.graph, 6), 6);
  auto cfg = quick_config(6);
  const auto a = run_evaluation(pc, cfg);
  cfg.jobs = 4;
  const auto pc4 = prepare(s.graph, s.table, summarize(s.graph, 6, 4), 6, 3, 4);
  const auto b = run_evaluation(pc4, cfg);
  EXPECT_EQ(a, b);
}

TEST(Pipeline, MaskColumnsHonorsMethods) {
  const auto all = pattern_mask({Pattern::more_spreaders});
  const auto both = mask_columns(all, {SusceptibilityMethod::by_news, SusceptibilityMethod::by_frequency});
  EXPECT_EQ(both.size(), all.size());
  EXPECT_EQ(both.front(), 0u);
  EXPECT_LT(mask_columns(all, {SusceptibilityMethod::by_news}).size(), both.size());
  const std::vector<std::size_t> only_freq{feature_index("normal_spreaders_frequency")};
  EXPECT_THROW(mask_columns(only_freq, {SusceptibilityMethod::by_news}), ConfigError);
}

TEST(Experiments, SeventeenAblationSubsets) {
  const auto subsets = ablation_subsets();
  EXPECT_EQ(subsets.size(), 17u);
  std::set<std::string> names;
  for (const auto& s : subsets) names.insert(s.name);
  EXPECT_EQ(names.size(), 17u);
  EXPECT_TRUE(names.contains("similarity"));
  EXPECT_TRUE(names.contains("more_spreaders"));
}

TEST(Experiments, ThresholdOnlyMovesSusceptibilityFeatures) {
  const auto s = small_synthetic(7);
  const auto pc = prepare(s.graph, s.table, summarize(s.graph, 7), 7);
  auto cfg = quick_config(7);
  cfg.thetas = {0.0, 0.3, 1.0};
  cfg.subsets = {make_subset({Pattern::farther_distance})};
  const auto rows = run_threshold_sweep(pc, cfg);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].accuracy, rows[1].accuracy);
  EXPECT_EQ(rows[0].accuracy, rows[2].accuracy);
  EXPECT_EQ(rows[0].f1, rows[2].f1);
}

TEST(Experiments, FullProportionEarlyDetectionEqualsFullRun) {
  const auto s = small_synthetic(8);
  const auto summary = summarize(s.graph, 8);
  const auto pc = prepare(s.graph, s.table, summary, 8);
  auto cfg = quick_config(8);
  cfg.early.proportions = {0.5, 1.0};
  cfg.early.repetitions = 2;
  const auto full = run_evaluation(pc, cfg);
  const auto rows = run_early_detection(s.graph, pc, cfg);
  std::size_t seen = 0;
  for (const auto& r : rows) {
    if (r.proportion != 1.0) continue;
    ++seen;
    EXPECT_EQ(r.repetitions, 1u);
    EXPECT_EQ(r.accuracy, full.mean_accuracy);
    EXPECT_EQ(r.f1, full.mean_f1);
  }
  EXPECT_EQ(seen, 2u);
}

TEST(Experiments, SamplingStudyRowsAndSkips) {
  const auto s = small_synthetic(9);
  auto cfg = quick_config(9);
  cfg.sampling.proportions = {0.1, 0.5, 1.0};
  cfg.sampling.repetitions = 2;
  const auto rows = run_sampling_study(s.graph, s.table, summarize(s.graph, 9), cfg);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    const bool too_small = r.fake < cfg.folds || r.real < cfg.folds;
    EXPECT_EQ(r.skipped.empty(), !too_small) << r.mode << ' ' << r.proportion;
  }
  // news_count at 0.5 keeps half of each class.
  EXPECT_EQ(rows[1].fake, 6u);
  EXPECT_EQ(rows[1].real, 6u);
}

TEST(Experiments, RankingCoversConfiguredColumns) {
  const auto s = small_synthetic(10);
  const auto pc = prepare(s.graph, s.table, summarize(s.graph, 10), 10);
  auto cfg = quick_config(10);
  cfg.patterns = {Pattern::farther_distance, Pattern::similarity};
  const auto rows = out_of_fold_features(pc, cv_split(pc, cv_options(cfg)), cfg.theta);
  const auto ranked = rank_features(rows, cfg);
  ASSERT_EQ(ranked.size(), 13u);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    EXPECT_EQ(ranked[i].rank, i + 1);
    if (i > 0) {
      EXPECT_GE(ranked[i - 1].weight, ranked[i].weight);
    }
    const auto p = feature_info(ranked[i].feature).pattern;
    EXPECT_TRUE(p == Pattern::farther_distance || p == Pattern::similarity);
  }
}

TEST(Config, ParsesEveryKey) {
  const auto j = json::parse(R"({
    "corpus": {"dir": "d", "labels": "l.csv"}, "seed": 3, "jobs": 2, "out": "o",
    "classifier": {"kind": "knn", "knn_k": 3, "trees": 10},
    "theta": 0.4, "thetas": [0.1, 0.2], "methods": ["news"], "wl_iterations": 2, "folds": 4,
    "patterns": ["similarity"], "subsets": [["more_spreaders", "denser_networks"]],
    "sampling": {"modes": ["class_balance"], "proportions": [0.5], "repetitions": 3},
    "early_detection": {"modes": ["edges"], "repetitions": 2},
    "synthetic": {"preset": "strong", "users": 50}
  })");
  const auto c = parse_config(j);
  EXPECT_EQ(c.master_seed(), 3u);
  EXPECT_EQ(c.jobs, 2u);
  EXPECT_EQ(c.classifier.kind, ClassifierKind::knn);
  EXPECT_EQ(c.classifier.knn_k, 3u);
  EXPECT_EQ(c.theta, 0.4);
  EXPECT_EQ(c.methods.size(), 1u);
  EXPECT_EQ(c.folds, 4u);
  EXPECT_EQ(c.subsets.size(), 1u);
  EXPECT_EQ(c.subsets[0].name, "more_spreaders+denser_networks");
  EXPECT_EQ(c.sampling_modes, std::vector<SamplingMode>{SamplingMode::class_balance});
  EXPECT_EQ(c.sampling.repetitions, 3u);
  EXPECT_EQ(c.early_modes, std::vector<SubsampleMode>{SubsampleMode::edges});
  EXPECT_EQ(c.synthetic.users, 50u);
  EXPECT_EQ(c.synthetic.density_ratio, SyntheticSpec::strong().density_ratio);
  EXPECT_EQ(c.corpus_paths().labels, "l.csv");
  EXPECT_EQ(c.corpus_paths().edges, std::filesystem::path("d") / "edges.csv");
}

TEST(Config, RejectsBadDocuments) {
  for (const char* doc : {R"({"sede": 1})", R"({"seed": "x"})", R"({"theta": 1.5})", R"({"folds": 1})",
                          R"({"methods": []})", R"({"patterns": ["bigger"]})", R"({"classifier": {"kind": "svm"}})",
                          R"({"classifier": {"depth": 3}})", R"({"sampling": {"modes": ["x"]}})",
                          R"({"early_detection": {"proportions": [2]}})", R"({"synthetic": {"preset": "weak"}})",
                          R"({"synthetic": {"user": 3}})", R"([1])", R"({"wl_iterations": -1})"}) {
    EXPECT_THROW(parse_config(json::parse(doc)), ConfigError) << doc;
  }
  EXPECT_THROW(ExperimentConfig{}.master_seed(), ConfigError);
  EXPECT_THROW(ExperimentConfig{}.corpus_paths(), ConfigError);
}

TEST(Config, FileErrors) {
  testutil::TempDir dir("config");
  EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
  testutil::write_file(dir / "bad.json", "{not json");
  EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
}

// ---------------------------------------------------------------------------
// Command-line driver.

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FND_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodesAndReproducibility) {
  testutil::TempDir dir("cli");
  const auto corpus = (dir / "corpus").string();
  ASSERT_EQ(run_cli("synth --seed 12 --users 80 --news-per-class 12 --out " + corpus), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "corpus" / "truth.json"));

  const std::string common = " --corpus " + corpus + " --trees 10 --folds 3";
  ASSERT_EQ(run_cli("evaluate --seed 1" + common + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli("evaluate --seed 1 --jobs 3" + common + " --out " + (dir / "b").string()), 0);
  const auto a = testutil::read_file(dir / "a" / "evaluation.json");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, testutil::read_file(dir / "b" / "evaluation.json"));

  testutil::write_file(dir / "cfg.json", R"({"seed": 1, "folds": 3, "classifier": {"trees": 10}, "corpus": ")" +
                                              corpus + R"("})");
  ASSERT_EQ(run_cli("evaluate --config " + (dir / "cfg.json").string() + " --out " + (dir / "c").string()), 0);
  EXPECT_EQ(a, testutil::read_file(dir / "c" / "evaluation.json"));

  EXPECT_EQ(run_cli("evaluate" + common), 2);                                   // no seed
  EXPECT_EQ(run_cli("evaluate --seed 1 --corpus " + (dir / "nowhere").string()), 1);
  EXPECT_EQ(run_cli("evaluate --seed 1 --bogus" + common), 2);
  EXPECT_EQ(run_cli("evaluate --seed 1 --theta 3" + common), 2);
  EXPECT_EQ(run_cli("evaluate --config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run_cli("stats --corpus " + corpus + " --out " + (dir / "s").string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "s" / "stats.json"));
}

TEST(Experiments, SpreaderOnlySignalFavorsMoreSpreaders) {
  SyntheticSpec s;
  s.seed = 21;
  // A sparse graph keeps the networks nearly edgeless, so distances carry
  // little of the size signal.
  s.users = 200;
  s.news_per_class = 40;
  s.edge_probability = 0.005;
  s.base_spreaders = 8;
  s.spreader_ratio = 3.0;
  const auto c = generate_synthetic(s);
  const auto pc = prepare(c.graph, c.table, summarize(c.graph, 21), 21);
  auto cfg = quick_config(21);
  cfg.folds = 5;
  cfg.classifier.trees = 50;
  cfg.subsets = {make_subset({Pattern::more_spreaders}), make_subset({Pattern::farther_distance})};
  const auto rows = run_ablation(pc, cfg);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_GT(rows[0].accuracy, rows[1].accuracy);
}
