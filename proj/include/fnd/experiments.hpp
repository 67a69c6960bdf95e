#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "fnd/classifiers.hpp"
#include "fnd/evaluation.hpp"
#include "fnd/features.hpp"
#include "fnd/ingestion.hpp"
#include "fnd/pipeline.hpp"
#include "fnd/synthetic.hpp"
#include "json.hpp"

namespace fnd {

// ---------------------------------------------------------------------------
// Pattern subsets.

struct PatternSubset {
  std::string name;
  std::set<Pattern> patterns;

  friend bool operator==(const PatternSubset&, const PatternSubset&) = default;
};

inline PatternSubset make_subset(std::set<Pattern> patterns) {
  if (patterns.empty()) throw ConfigError("empty pattern subset");
  std::string name;
  for (auto p : patterns) {
    if (!name.empty()) name += '+';
    name += to_string(p);
  }
  return {std::move(name), std::move(patterns)};
}

inline constexpr std::array<Pattern, 4> kStructuralPatterns = {Pattern::more_spreaders, Pattern::farther_distance,
                                                               Pattern::stronger_engagement, Pattern::denser_networks};

/// Singles, pairs, leave-one-out triples, all four, similarity alone, and
/// all four with similarity: 17 rows.
inline std::vector<PatternSubset> ablation_subsets() {
  std::vector<PatternSubset> out;
  const auto& p = kStructuralPatterns;
  for (auto a : p) out.push_back(make_subset({a}));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) out.push_back(make_subset({p[i], p[j]}));
  }
  for (std::size_t skip = 0; skip < 4; ++skip) {
    std::set<Pattern> s;
    for (std::size_t i = 0; i < 4; ++i) {
      if (i != skip) s.insert(p[i]);
    }
    out.push_back(make_subset(s));
  }
  out.push_back(make_subset({p.begin(), p.end()}));
  out.push_back(make_subset({Pattern::similarity}));
  std::set<Pattern> all(p.begin(), p.end());
  all.insert(Pattern::similarity);
  out.push_back(make_subset(all));
  return out;
}

// ---------------------------------------------------------------------------
// Configuration.

enum class SamplingMode : std::uint8_t { news_count, class_balance };

inline std::string_view to_string(SamplingMode m) { return m == SamplingMode::news_count ? "news_count" : "class_balance"; }
inline std::string_view to_string(SubsampleMode m) { return m == SubsampleMode::nodes ? "nodes" : "edges"; }

inline std::vector<double> default_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

inline std::vector<double> default_thetas() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

struct GridConfig {
  std::vector<double> proportions = default_grid();
  std::size_t repetitions = 5;
};

struct ExperimentConfig {
  std::string corpus;  // directory with the standard file names
  CorpusPaths corpus_files;  // explicit files; override the directory's
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string out = "results";
  ClassifierParams classifier;
  double theta = 0.5;
  std::vector<double> thetas = default_thetas();
  std::set<SusceptibilityMethod> methods{SusceptibilityMethod::by_news, SusceptibilityMethod::by_frequency};
  int wl_iterations = 3;
  std::size_t folds = 5;
  std::set<Pattern> patterns{Pattern::more_spreaders, Pattern::farther_distance, Pattern::stronger_engagement,
                             Pattern::denser_networks, Pattern::similarity};
  std::vector<PatternSubset> subsets = ablation_subsets();
  std::vector<SamplingMode> sampling_modes{SamplingMode::news_count, SamplingMode::class_balance};
  GridConfig sampling;
  std::vector<SubsampleMode> early_modes{SubsampleMode::nodes, SubsampleMode::edges};
  GridConfig early;
  SyntheticSpec synthetic;

  std::uint64_t master_seed() const {
    if (!seed) throw ConfigError("no seed given (config key \"seed\" or --seed)");
    return *seed;
  }

  CorpusPaths corpus_paths() const {
    CorpusPaths p;
    if (!corpus.empty()) p = CorpusPaths::in_directory(corpus);
    if (!corpus_files.edges.empty()) p.edges = corpus_files.edges;
    if (!corpus_files.engagements.empty()) p.engagements = corpus_files.engagements;
    if (!corpus_files.labels.empty()) p.labels = corpus_files.labels;
    if (!corpus_files.users.empty()) p.users = corpus_files.users;
    if (p.edges.empty() || p.engagements.empty() || p.labels.empty()) {
      throw ConfigError("no corpus given (config key \"corpus\" or --corpus)");
    }
    return p;
  }
};

namespace detail {

template <class T>
T get_as(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

inline void check_unit(double p, const std::string& key) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("config key '" + key + "' must lie in [0, 1]");
}

inline std::vector<double> unit_list(const nlohmann::json& j, const std::string& key) {
  auto v = get_as<std::vector<double>>(j, key);
  if (v.empty()) throw ConfigError("config key '" + key + "' must be a nonempty list");
  for (double p : v) check_unit(p, key);
  return v;
}

inline SusceptibilityMethod parse_method(const std::string& s) {
  if (s == "news") return SusceptibilityMethod::by_news;
  if (s == "frequency") return SusceptibilityMethod::by_frequency;
  throw ConfigError("unknown susceptibility method '" + s + "' (news, frequency)");
}

inline std::set<Pattern> parse_patterns(const nlohmann::json& j, const std::string& key) {
  std::set<Pattern> out;
  for (const auto& s : get_as<std::vector<std::string>>(j, key)) out.insert(parse_pattern(s));
  if (out.empty()) throw ConfigError("config key '" + key + "' must be a nonempty list");
  return out;
}

inline void parse_classifier(const nlohmann::json& j, ClassifierParams& c) {
  if (!j.is_object()) throw ConfigError("config key 'classifier' must be an object");
  for (const auto& [key, v] : j.items()) {
    const std::string k = "classifier." + key;
    if (key == "kind") c.kind = fnd::parse_classifier(get_as<std::string>(v, k));
    else if (key == "trees") c.trees = get_as<int>(v, k);
    else if (key == "max_features") c.max_features = get_as<std::size_t>(v, k);
    else if (key == "max_depth") c.max_depth = get_as<int>(v, k);
    else if (key == "min_leaf") c.min_leaf = get_as<std::size_t>(v, k);
    else if (key == "bootstrap") c.bootstrap = get_as<bool>(v, k);
    else if (key == "knn_k") c.knn_k = get_as<std::size_t>(v, k);
    else if (key == "nb_variance_floor") c.nb_variance_floor = get_as<double>(v, k);
    else throw ConfigError("unknown config key '" + k + "'");
  }
  if (c.trees < 1) throw ConfigError("classifier.trees must be >= 1");
  if (c.knn_k < 1) throw ConfigError("classifier.knn_k must be >= 1");
  if (c.max_depth < 0) throw ConfigError("classifier.max_depth must be >= 0");
}

inline void parse_grid(const nlohmann::json& j, const std::string& section, GridConfig& g,
                       const std::function<void(const std::string&)>& modes) {
  if (!j.is_object()) throw ConfigError("config key '" + section + "' must be an object");
  for (const auto& [key, v] : j.items()) {
    const std::string k = section + "." + key;
    if (key == "proportions") g.proportions = unit_list(v, k);
    else if (key == "repetitions") g.repetitions = get_as<std::size_t>(v, k);
    else if (key == "modes") {
      for (const auto& m : get_as<std::vector<std::string>>(v, k)) modes(m);
    } else throw ConfigError("unknown config key '" + k + "'");
  }
  if (g.repetitions < 1) throw ConfigError(section + ".repetitions must be >= 1");
}

}  // namespace detail

/// Overlays keys of one JSON document onto `base`. Unknown keys are errors.
inline ExperimentConfig parse_config(const nlohmann::json& j, ExperimentConfig c = {}) {
  using detail::get_as;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "corpus") {
      if (v.is_string()) {
        c.corpus = v.get<std::string>();
      } else if (v.is_object()) {
        for (const auto& [f, path] : v.items()) {
          const auto s = get_as<std::string>(path, "corpus." + f);
          if (f == "dir") c.corpus = s;
          else if (f == "edges") c.corpus_files.edges = s;
          else if (f == "engagements") c.corpus_files.engagements = s;
          else if (f == "labels") c.corpus_files.labels = s;
          else if (f == "users") c.corpus_files.users = s;
          else throw ConfigError("unknown config key 'corpus." + f + "'");
        }
      } else {
        throw ConfigError("config key 'corpus' must be a directory or an object of file paths");
      }
    } else if (key == "seed") {
      c.seed = get_as<std::uint64_t>(v, key);
    } else if (key == "jobs") {
      c.jobs = get_as<unsigned>(v, key);
    } else if (key == "out") {
      c.out = get_as<std::string>(v, key);
    } else if (key == "classifier") {
      detail::parse_classifier(v, c.classifier);
    } else if (key == "theta") {
      c.theta = get_as<double>(v, key);
      detail::check_unit(c.theta, key);
    } else if (key == "thetas") {
      c.thetas = detail::unit_list(v, key);
    } else if (key == "methods") {
      c.methods.clear();
      for (const auto& m : get_as<std::vector<std::string>>(v, key)) c.methods.insert(detail::parse_method(m));
      if (c.methods.empty()) throw ConfigError("config key 'methods' must be a nonempty list");
    } else if (key == "wl_iterations") {
      c.wl_iterations = get_as<int>(v, key);
      if (c.wl_iterations < 0) throw ConfigError("wl_iterations must be >= 0");
    } else if (key == "folds") {
      c.folds = get_as<std::size_t>(v, key);
      if (c.folds < 2) throw ConfigError("folds must be >= 2");
    } else if (key == "patterns") {
      c.patterns = detail::parse_patterns(v, key);
    } else if (key == "subsets") {
      c.subsets.clear();
      for (const auto& s : get_as<std::vector<nlohmann::json>>(v, key)) {
        c.subsets.push_back(make_subset(detail::parse_patterns(s, key)));
      }
      if (c.subsets.empty()) throw ConfigError("config key 'subsets' must be a nonempty list");
    } else if (key == "sampling") {
      bool reset = false;
      detail::parse_grid(v, key, c.sampling, [&](const std::string& m) {
        if (!reset) c.sampling_modes.clear(), reset = true;
        if (m == "news_count") c.sampling_modes.push_back(SamplingMode::news_count);
        else if (m == "class_balance") c.sampling_modes.push_back(SamplingMode::class_balance);
        else throw ConfigError("unknown sampling mode '" + m + "'");
      });
    } else if (key == "early_detection") {
      bool reset = false;
      detail::parse_grid(v, key, c.early, [&](const std::string& m) {
        if (!reset) c.early_modes.clear(), reset = true;
        if (m == "nodes") c.early_modes.push_back(SubsampleMode::nodes);
        else if (m == "edges") c.early_modes.push_back(SubsampleMode::edges);
        else throw ConfigError("unknown early-detection mode '" + m + "'");
      });
    } else if (key == "synthetic") {
      nlohmann::json spec = v;
      if (spec.is_object() && spec.contains("preset")) {
        const auto preset = get_as<std::string>(spec["preset"], "synthetic.preset");
        if (preset == "strong") c.synthetic = SyntheticSpec::strong(c.synthetic.seed);
        else if (preset == "null") c.synthetic = SyntheticSpec{};
        else throw ConfigError("unknown synthetic preset '" + preset + "' (strong, null)");
        spec.erase("preset");
      }
      c.synthetic = synthetic_spec_from_json(spec, c.synthetic);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j, std::move(base));
}

inline CrossValidationOptions cv_options(const ExperimentConfig& cfg) {
  CrossValidationOptions o;
  o.classifier = cfg.classifier;
  o.theta = cfg.theta;
  o.methods = cfg.methods;
  o.folds = cfg.folds;
  o.seed = cfg.master_seed();
  o.jobs = std::max(1u, cfg.jobs);
  return o;
}

// ---------------------------------------------------------------------------
// Studies. Every runner consumes the same master seed, so the classifier and
// fold streams do not depend on the grid point being evaluated.

inline PreparedCorpus prepare(const SocialGraph& graph, const EngagementTable& table,
                              std::shared_ptr<const GraphSummary> summary, const ExperimentConfig& cfg) {
  return prepare(graph, table, std::move(summary), cfg.master_seed(), cfg.wl_iterations, std::max(1u, cfg.jobs));
}

inline EvalReport run_evaluation(const PreparedCorpus& pc, const ExperimentConfig& cfg) {
  return cross_validate(pc, pattern_mask(cfg.patterns), cv_options(cfg));
}

struct AblationRow {
  double theta = 0.5;
  std::string subset;
  std::size_t features = 0;
  double accuracy = 0.0;
  double f1 = 0.0;

  friend bool operator==(const AblationRow&, const AblationRow&) = default;
};

namespace detail {

inline std::vector<AblationRow> score_subsets(const PreparedCorpus& pc, const ExperimentConfig& cfg, double theta) {
  auto opt = cv_options(cfg);
  opt.theta = theta;
  const auto split = cv_split(pc, opt);
  const auto matrices = fold_matrices(pc, split, theta, opt.jobs);
  const auto labels = pc.labels();
  std::vector<AblationRow> rows;
  for (const auto& s : cfg.subsets) {
    const auto cols = mask_columns(pattern_mask(s.patterns), opt.methods);
    const auto r = evaluate_folds(matrices, labels, split, opt.classifier, cols, opt.seed, opt.jobs);
    rows.push_back({theta, s.name, cols.size(), r.mean_accuracy, r.mean_f1});
  }
  return rows;
}

}  // namespace detail

inline std::vector<AblationRow> run_ablation(const PreparedCorpus& pc, const ExperimentConfig& cfg) {
  return detail::score_subsets(pc, cfg, cfg.theta);
}

/// Every subset at every theta, theta-major.
inline std::vector<AblationRow> run_threshold_sweep(const PreparedCorpus& pc, const ExperimentConfig& cfg) {
  std::vector<AblationRow> rows;
  for (double theta : cfg.thetas) {
    auto part = detail::score_subsets(pc, cfg, theta);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

struct GridRow {
  std::string mode;
  double proportion = 0.0;
  std::size_t repetitions = 0;
  std::size_t fake = 0;  // news per repetition
  std::size_t real = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::string reported;  // "accuracy" or "f1"
  std::string skipped;   // reason, empty when the row ran

  friend bool operator==(const GridRow&, const GridRow&) = default;
};

/// News subsets of the corpus. news_count keeps the class ratio and scales
/// the size; class_balance fixes the size at min(#fake, #true) and sets the
/// fake share to the proportion. A proportion of 1 runs once.
inline std::vector<GridRow> run_sampling_study(const SocialGraph& graph, const EngagementTable& table,
                                               std::shared_ptr<const GraphSummary> summary,
                                               const ExperimentConfig& cfg) {
  const std::uint64_t seed = cfg.master_seed();
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < table.num_news(); ++i) by_class[table.news(i).label == NewsLabel::fake].push_back(i);
  const std::size_t nf = by_class[1].size(), nt = by_class[0].size();

  std::vector<GridRow> rows;
  for (auto mode : cfg.sampling_modes) {
    for (double p : cfg.sampling.proportions) {
      GridRow row;
      row.mode = to_string(mode);
      row.proportion = p;
      if (mode == SamplingMode::news_count) {
        row.fake = proportion_count(p, nf);
        row.real = proportion_count(p, nt);
      } else {
        const std::size_t size = std::min(nf, nt);
        row.fake = proportion_count(p, size);
        row.real = size - row.fake;
      }
      row.reported = row.fake == row.real ? "accuracy" : "f1";
      if (row.fake < cfg.folds || row.real < cfg.folds) {
        row.skipped = "fewer news than folds in one class";
        rows.push_back(row);
        continue;
      }
      const bool whole = row.fake == nf && row.real == nt;
      row.repetitions = whole ? 1 : cfg.sampling.repetitions;
      for (std::size_t rep = 0; rep < row.repetitions; ++rep) {
        std::vector<std::size_t> picked;
        const std::string tag =
            "sample/" + row.mode + "/" + csv::format_double(p) + "/" + std::to_string(rep) + "/";
        for (int cls = 0; cls < 2; ++cls) {
          const std::size_t want = cls ? row.fake : row.real;
          Rng rng(derive_seed(seed, tag + (cls ? "fake" : "true")));
          for (auto k : sample_without_replacement(by_class[cls].size(), want, rng)) {
            picked.push_back(by_class[cls][k]);
          }
        }
        std::sort(picked.begin(), picked.end());
        const auto pc = prepare(graph, table.subset(picked), summary, cfg);
        const auto r = run_evaluation(pc, cfg);
        row.accuracy += r.mean_accuracy;
        row.f1 += r.mean_f1;
      }
      row.accuracy /= static_cast<double>(row.repetitions);
      row.f1 /= static_cast<double>(row.repetitions);
      rows.push_back(row);
    }
  }
  return rows;
}

/// Every network subsampled to a proportion of its nodes or edges; flows,
/// structural features and susceptibility are recomputed from the partial
/// networks. A proportion of 1 runs once.
inline std::vector<GridRow> run_early_detection(const SocialGraph& graph, const PreparedCorpus& full,
                                                const ExperimentConfig& cfg) {
  const std::uint64_t seed = cfg.master_seed();
  std::size_t nf = 0;
  for (const auto& n : full.networks) nf += n.label() == NewsLabel::fake;
  std::vector<GridRow> rows;
  for (auto mode : cfg.early_modes) {
    for (double p : cfg.early.proportions) {
      GridRow row;
      row.mode = to_string(mode);
      row.proportion = p;
      row.fake = nf;
      row.real = full.size() - nf;
      row.reported = row.fake == row.real ? "accuracy" : "f1";
      row.repetitions = p == 1.0 ? 1 : cfg.early.repetitions;
      for (std::size_t rep = 0; rep < row.repetitions; ++rep) {
        const std::string tag =
            "early/" + row.mode + "/" + csv::format_double(p) + "/" + std::to_string(rep) + "/";
        std::vector<DiffusionNetwork> nets(full.size());
        parallel_for(nets.size(), std::max(1u, cfg.jobs), [&](std::size_t i) {
          nets[i] = subsample(full.networks[i], mode, p, derive_seed(seed, tag + full.networks[i].news_id()));
        });
        const auto pc = prepare(graph, std::move(nets), full.context.summary, seed, cfg.wl_iterations,
                                std::max(1u, cfg.jobs));
        const auto r = run_evaluation(pc, cfg);
        row.accuracy += r.mean_accuracy;
        row.f1 += r.mean_f1;
      }
      row.accuracy /= static_cast<double>(row.repetitions);
      row.f1 /= static_cast<double>(row.repetitions);
      rows.push_back(row);
    }
  }
  return rows;
}

struct ClassStats {
  std::size_t feature = 0;  // 1-based
  NewsLabel label = NewsLabel::real;
  std::size_t count = 0;
  double mean = 0.0, median = 0.0, q1 = 0.0, q3 = 0.0, min = 0.0, max = 0.0;
};

/// Per feature and label: mean, median, quartiles and range.
inline std::vector<ClassStats> feature_class_stats(std::span<const FeatureVector> rows) {
  if (rows.empty()) throw std::invalid_argument("empty feature matrix");
  std::vector<ClassStats> out;
  for (std::size_t f = 1; f <= kNumFeatures; ++f) {
    for (NewsLabel cls : {NewsLabel::fake, NewsLabel::real}) {
      std::vector<double> xs;
      for (const auto& r : rows) {
        if (r.label == cls) xs.push_back(r.at(f));
      }
      ClassStats s;
      s.feature = f;
      s.label = cls;
      s.count = xs.size();
      if (!xs.empty()) {
        std::sort(xs.begin(), xs.end());
        s.mean = mean_of(xs);
        s.median = quantile_sorted(xs, 0.5);
        s.q1 = quantile_sorted(xs, 0.25);
        s.q3 = quantile_sorted(xs, 0.75);
        s.min = xs.front();
        s.max = xs.back();
      }
      out.push_back(s);
    }
  }
  return out;
}

struct RankedFeature {
  std::size_t rank = 0;
  std::size_t feature = 0;  // 1-based
  double weight = 0.0;
};

/// Relief over the out-of-fold feature matrix, restricted to the configured
/// patterns and methods.
inline std::vector<RankedFeature> rank_features(std::span<const FeatureVector> rows, const ExperimentConfig& cfg) {
  const auto cols = mask_columns(pattern_mask(cfg.patterns), cfg.methods);
  const Matrix x = to_matrix(rows).select_columns(cols);
  std::vector<NewsLabel> y;
  for (const auto& r : rows) y.push_back(r.label);
  std::vector<RankedFeature> out;
  for (const auto& w : relief_rank(x, y, cfg.master_seed())) {
    out.push_back({out.size() + 1, cols[w.column] + 1, w.weight});
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV output.

inline void write_ablation_csv(std::span<const AblationRow> rows, std::ostream& out, bool with_theta) {
  out << (with_theta ? "theta," : "") << "subset,features,accuracy,f1\n";
  for (const auto& r : rows) {
    if (with_theta) out << csv::format_double(r.theta) << ',';
    out << r.subset << ',' << r.features << ',' << csv::format_double(r.accuracy) << ',' << csv::format_double(r.f1)
        << '\n';
  }
}

inline void write_grid_csv(std::span<const GridRow> rows, std::ostream& out) {
  out << "mode,proportion,repetitions,fake,true,accuracy,f1,reported,skipped\n";
  for (const auto& r : rows) {
    out << r.mode << ',' << csv::format_double(r.proportion) << ',' << r.repetitions << ',' << r.fake << ','
        << r.real << ',';
    if (r.skipped.empty()) {
      out << csv::format_double(r.accuracy) << ',' << csv::format_double(r.f1);
    } else {
      out << ',';
    }
    out << ',' << r.reported << ',' << csv::escape(r.skipped) << '\n';
  }
}

inline void write_class_stats_csv(std::span<const ClassStats> rows, std::ostream& out) {
  out << "feature_index,feature_name,label,count,mean,median,q1,q3,min,max\n";
  for (const auto& s : rows) {
    out << s.feature << ',' << feature_info(s.feature).name << ',' << to_string(s.label) << ',' << s.count;
    for (double x : {s.mean, s.median, s.q1, s.q3, s.min, s.max}) out << ',' << csv::format_double(x);
    out << '\n';
  }
}

inline void write_ranking_csv(std::span<const RankedFeature> rows, std::ostream& out) {
  out << "rank,feature_index,feature_name,weight\n";
  for (const auto& r : rows) {
    out << r.rank << ',' << r.feature << ',' << feature_info(r.feature).name << ',' << csv::format_double(r.weight)
        << '\n';
  }
}

}  // namespace fnd
