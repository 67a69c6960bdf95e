// fnd: command-line driver for the detection pipeline and its studies.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fnd/experiments.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInputError = 1, kConfigError = 2 };

// Flags are collected into a JSON overlay that is applied on top of the
// config file, so each flag is exactly its config key.
struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> jobs;
  std::optional<std::string> corpus;
  std::optional<double> theta;
  std::vector<double> thetas;
  std::vector<std::string> methods;
  std::vector<std::string> patterns;
  std::optional<std::string> classifier;
  std::optional<int> trees;
  std::optional<int> wl_iterations;
  std::optional<std::size_t> folds;
  std::vector<std::string> modes;
  std::vector<double> proportions;
  std::optional<std::size_t> repetitions;
  std::optional<std::string> preset;
  std::optional<std::size_t> users;
  std::optional<std::size_t> news_per_class;
  std::optional<double> edge_probability;
  std::optional<double> spreader_ratio;
  std::optional<double> density_ratio;
  std::optional<double> engagement_ratio;
  std::optional<double> concentration;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON config document");
  cmd->add_option("--seed", f.seed, "master seed (config: seed)");
  cmd->add_option("--out", f.out, "output directory (config: out)");
  cmd->add_option("--jobs", f.jobs, "worker threads (config: jobs)");
}

void add_corpus(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--corpus", f.corpus, "corpus directory (config: corpus)");
}

void add_model(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--theta", f.theta, "susceptibility threshold (config: theta)");
  cmd->add_option("--methods", f.methods, "susceptibility methods: news, frequency (config: methods)");
  cmd->add_option("--patterns", f.patterns, "feature patterns (config: patterns)");
  cmd->add_option("--classifier", f.classifier, "random_forest, decision_tree, knn, gaussian_nb (config: classifier.kind)");
  cmd->add_option("--trees", f.trees, "forest size (config: classifier.trees)");
  cmd->add_option("--wl-iterations", f.wl_iterations, "WL kernel iterations (config: wl_iterations)");
  cmd->add_option("--folds", f.folds, "cross-validation folds (config: folds)");
}

void add_grid(CLI::App* cmd, CommonFlags& f, const std::string& section) {
  cmd->add_option("--modes", f.modes, "grid modes (config: " + section + ".modes)");
  cmd->add_option("--proportions", f.proportions, "proportion grid (config: " + section + ".proportions)");
  cmd->add_option("--repetitions", f.repetitions, "repetitions per grid point (config: " + section + ".repetitions)");
}

json overlay(const CommonFlags& f, const std::string& grid_section) {
  json j = json::object();
  if (f.seed) j["seed"] = *f.seed;
  if (f.out) j["out"] = *f.out;
  if (f.jobs) j["jobs"] = *f.jobs;
  if (f.corpus) j["corpus"] = *f.corpus;
  if (f.theta) j["theta"] = *f.theta;
  if (!f.thetas.empty()) j["thetas"] = f.thetas;
  if (!f.methods.empty()) j["methods"] = f.methods;
  if (!f.patterns.empty()) j["patterns"] = f.patterns;
  if (f.classifier) j["classifier"]["kind"] = *f.classifier;
  if (f.trees) j["classifier"]["trees"] = *f.trees;
  if (f.wl_iterations) j["wl_iterations"] = *f.wl_iterations;
  if (f.folds) j["folds"] = *f.folds;
  if (!grid_section.empty()) {
    json g = json::object();
    if (!f.modes.empty()) g["modes"] = f.modes;
    if (!f.proportions.empty()) g["proportions"] = f.proportions;
    if (f.repetitions) g["repetitions"] = *f.repetitions;
    if (!g.empty()) j[grid_section] = g;
  }
  json s = json::object();
  if (f.preset) s["preset"] = *f.preset;
  if (f.users) s["users"] = *f.users;
  if (f.news_per_class) s["news_per_class"] = *f.news_per_class;
  if (f.edge_probability) s["edge_probability"] = *f.edge_probability;
  if (f.spreader_ratio) s["spreader_ratio"] = *f.spreader_ratio;
  if (f.density_ratio) s["density_ratio"] = *f.density_ratio;
  if (f.engagement_ratio) s["engagement_ratio"] = *f.engagement_ratio;
  if (f.concentration) s["susceptible_concentration"] = *f.concentration;
  if (!s.empty()) j["synthetic"] = s;
  return j;
}

fnd::ExperimentConfig resolve(const CommonFlags& f, const std::string& grid_section) {
  fnd::ExperimentConfig cfg;
  if (!f.config.empty()) cfg = fnd::load_config(f.config);
  return fnd::parse_config(overlay(f, grid_section), std::move(cfg));
}

std::ofstream open_out(const fnd::ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out);
  const fs::path p = fs::path(cfg.out) / name;
  std::ofstream out(p);
  if (!out) throw fnd::InputError("cannot write file", p.string());
  std::cerr << "wrote " << p.string() << '\n';
  return out;
}

struct Loaded {
  fnd::Corpus corpus;
  std::shared_ptr<const fnd::GraphSummary> summary;
};

fnd::Corpus load(const fnd::ExperimentConfig& cfg) { return fnd::load_corpus(cfg.corpus_paths()); }

Loaded load_prepared(const fnd::ExperimentConfig& cfg) {
  Loaded l{load(cfg), nullptr};
  l.summary = fnd::summarize(l.corpus.graph, cfg.master_seed(), std::max(1u, cfg.jobs));
  return l;
}

json stats_json(const fnd::SocialGraph& g, const fnd::EngagementTable& t) {
  const auto s = fnd::corpus_stats(g, t);
  return {{"users", s.users}, {"edges", s.edges}, {"records", s.records},
          {"news", s.news},   {"fake", s.fake},   {"true", s.real}};
}

// Per-class mean network size, for the ingest report.
json network_means(const fnd::SocialGraph& g, const fnd::EngagementTable& t) {
  double spreaders[2] = {0, 0}, edges[2] = {0, 0}, count[2] = {0, 0};
  for (const auto& n : fnd::build_all_networks(g, t)) {
    const int k = n.label() == fnd::NewsLabel::fake;
    spreaders[k] += static_cast<double>(n.size());
    edges[k] += static_cast<double>(n.num_edges());
    count[k] += 1;
  }
  return {{"mean_spreaders_fake", fnd::safe_ratio(spreaders[1], count[1])},
          {"mean_spreaders_true", fnd::safe_ratio(spreaders[0], count[0])},
          {"mean_edges_fake", fnd::safe_ratio(edges[1], count[1])},
          {"mean_edges_true", fnd::safe_ratio(edges[0], count[0])}};
}

std::vector<fnd::FeatureVector> oof_features(const Loaded& l, const fnd::ExperimentConfig& cfg) {
  const auto pc = fnd::prepare(l.corpus.graph, l.corpus.table, l.summary, cfg);
  const auto opt = fnd::cv_options(cfg);
  return fnd::out_of_fold_features(pc, fnd::cv_split(pc, opt), cfg.theta, opt.jobs);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network-based fake news detection pipeline"};
  app.require_subcommand(1);
  CommonFlags f;
  std::string grid_section;

  auto* ingest = app.add_subcommand("ingest", "validate a corpus and write the load report");
  auto* stats = app.add_subcommand("stats", "corpus statistics");
  auto* extract = app.add_subcommand("extract", "out-of-fold 142-feature matrix");
  auto* evaluate = app.add_subcommand("evaluate", "cross-validated accuracy and F1");
  auto* ablate = app.add_subcommand("ablate", "pattern subset ablation");
  auto* sweep = app.add_subcommand("sweep-threshold", "every subset across a theta grid");
  auto* sample = app.add_subcommand("sample-study", "news count and class balance sampling");
  auto* early = app.add_subcommand("early-detect", "node or edge subsampled networks");
  auto* rank = app.add_subcommand("rank-features", "Relief feature ranking");
  auto* fstats = app.add_subcommand("feature-stats", "per-feature statistics by label");
  auto* synth = app.add_subcommand("synth", "generate a planted-pattern corpus");

  for (auto* cmd : {ingest, stats, extract, evaluate, ablate, sweep, sample, early, rank, fstats, synth}) {
    add_common(cmd, f);
  }
  for (auto* cmd : {ingest, stats, extract, evaluate, ablate, sweep, sample, early, rank, fstats}) {
    add_corpus(cmd, f);
  }
  for (auto* cmd : {extract, evaluate, ablate, sweep, sample, early, rank, fstats}) add_model(cmd, f);
  sweep->add_option("--thetas", f.thetas, "theta grid (config: thetas)");
  add_grid(sample, f, "sampling");
  add_grid(early, f, "early_detection");
  synth->add_option("--preset", f.preset, "strong or null (config: synthetic.preset)");
  synth->add_option("--users", f.users, "config: synthetic.users");
  synth->add_option("--news-per-class", f.news_per_class, "config: synthetic.news_per_class");
  synth->add_option("--edge-probability", f.edge_probability, "config: synthetic.edge_probability");
  synth->add_option("--spreader-ratio", f.spreader_ratio, "config: synthetic.spreader_ratio");
  synth->add_option("--density-ratio", f.density_ratio, "config: synthetic.density_ratio");
  synth->add_option("--engagement-ratio", f.engagement_ratio, "config: synthetic.engagement_ratio");
  synth->add_option("--concentration", f.concentration, "config: synthetic.susceptible_concentration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  if (sample->parsed()) grid_section = "sampling";
  if (early->parsed()) grid_section = "early_detection";

  try {
    const auto cfg = resolve(f, grid_section);

    if (ingest->parsed()) {
      const auto c = load(cfg);
      json j = stats_json(c.graph, c.table);
      j["networks"] = network_means(c.graph, c.table);
      j["duplicate_edges_dropped"] = c.report.duplicate_edges_dropped;
      j["engagement_rows_merged"] = c.report.engagement_rows_merged;
      j["labels_without_engagements"] = c.report.labels_without_engagements;
      j["warnings"] = c.report.warnings;
      open_out(cfg, "ingest.json") << j.dump(2) << '\n';
      for (const auto& w : c.report.warnings) std::cerr << "warning: " << w << '\n';
    } else if (stats->parsed()) {
      const auto c = load(cfg);
      const json j = stats_json(c.graph, c.table);
      open_out(cfg, "stats.json") << j.dump(2) << '\n';
      std::cout << j.dump(2) << '\n';
    } else if (extract->parsed()) {
      const auto l = load_prepared(cfg);
      const auto rows = oof_features(l, cfg);
      auto out = open_out(cfg, "features.csv");
      fnd::write_feature_matrix(rows, out);
      open_out(cfg, "features.json") << fnd::feature_registry_json().dump(2) << '\n';
    } else if (evaluate->parsed()) {
      const auto l = load_prepared(cfg);
      const auto pc = fnd::prepare(l.corpus.graph, l.corpus.table, l.summary, cfg);
      const auto r = fnd::run_evaluation(pc, cfg);
      json j = fnd::to_json(r);
      j["classifier"] = std::string(fnd::to_string(cfg.classifier.kind));
      j["theta"] = cfg.theta;
      open_out(cfg, "evaluation.json") << j.dump(2) << '\n';
      std::cout << "accuracy " << r.mean_accuracy << "  f1 " << r.mean_f1 << '\n';
    } else if (ablate->parsed()) {
      const auto l = load_prepared(cfg);
      const auto pc = fnd::prepare(l.corpus.graph, l.corpus.table, l.summary, cfg);
      auto out = open_out(cfg, "ablation.csv");
      fnd::write_ablation_csv(fnd::run_ablation(pc, cfg), out, false);
    } else if (sweep->parsed()) {
      const auto l = load_prepared(cfg);
      const auto pc = fnd::prepare(l.corpus.graph, l.corpus.table, l.summary, cfg);
      auto out = open_out(cfg, "threshold_sweep.csv");
      fnd::write_ablation_csv(fnd::run_threshold_sweep(pc, cfg), out, true);
    } else if (sample->parsed()) {
      const auto l = load_prepared(cfg);
      auto out = open_out(cfg, "sampling_study.csv");
      fnd::write_grid_csv(fnd::run_sampling_study(l.corpus.graph, l.corpus.table, l.summary, cfg), out);
    } else if (early->parsed()) {
      const auto l = load_prepared(cfg);
      const auto pc = fnd::prepare(l.corpus.graph, l.corpus.table, l.summary, cfg);
      auto out = open_out(cfg, "early_detection.csv");
      fnd::write_grid_csv(fnd::run_early_detection(l.corpus.graph, pc, cfg), out);
    } else if (rank->parsed()) {
      const auto l = load_prepared(cfg);
      auto out = open_out(cfg, "relief_ranking.csv");
      fnd::write_ranking_csv(fnd::rank_features(oof_features(l, cfg), cfg), out);
    } else if (fstats->parsed()) {
      const auto l = load_prepared(cfg);
      auto out = open_out(cfg, "feature_stats.csv");
      fnd::write_class_stats_csv(fnd::feature_class_stats(oof_features(l, cfg)), out);
    } else if (synth->parsed()) {
      auto spec = cfg.synthetic;
      if (cfg.seed) spec.seed = *cfg.seed;
      const auto c = fnd::generate_synthetic(spec);
      fnd::write_synthetic(c, cfg.out);
      std::cerr << "wrote corpus to " << cfg.out << '\n';
    }
  } catch (const fnd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fnd::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}
