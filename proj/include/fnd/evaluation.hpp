#pragma once

#include <span>
#include <string>
#include <vector>

#include "fnd/classifiers.hpp"
#include "fnd/common.hpp"
#include "json.hpp"

namespace fnd {

/// Fold index per sample, stratified by label.
struct DatasetSplit {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::vector<std::size_t> fold_of;

  std::vector<std::size_t> train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] != fold) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] == fold) out.push_back(i);
    }
    return out;
  }

  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

/// Shuffles each class with the seed and deals its members round-robin; the
/// dealer position carries over from fake to true so fold sizes stay level.
inline DatasetSplit stratified_split(std::span<const NewsLabel> labels, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("need at least two folds");
  DatasetSplit split;
  split.folds = folds;
  split.seed = seed;
  split.fold_of.assign(labels.size(), 0);
  std::size_t dealer = 0;
  for (NewsLabel cls : {NewsLabel::fake, NewsLabel::real}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    if (members.size() < folds) {
      throw InputError("corpus too small to stratify: " + std::to_string(members.size()) + " " +
                       std::string(to_string(cls)) + " news for " + std::to_string(folds) + " folds");
    }
    Rng rng(derive_seed(seed, std::string("split/") + std::string(to_string(cls))));
    shuffle(members, rng);
    for (auto i : members) split.fold_of[i] = dealer++ % folds;
  }
  return split;
}

/// Confusion counts with fake as the positive class.
struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  void add(NewsLabel truth, NewsLabel predicted) {
    const bool t = truth == NewsLabel::fake, p = predicted == NewsLabel::fake;
    if (t && p) ++tp;
    else if (!t && p) ++fp;
    else if (!t) ++tn;
    else ++fn;
  }

  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  double accuracy() const { return safe_ratio(static_cast<double>(tp + tn), static_cast<double>(total())); }
  double precision() const { return safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fp)); }
  double recall() const { return safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fn)); }
  double f1() const {
    const double p = precision(), r = recall();
    return safe_ratio(2.0 * p * r, p + r);
  }

  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct FoldResult {
  std::size_t fold = 0;
  Confusion confusion;
  double accuracy = 0.0;
  double f1 = 0.0;

  friend bool operator==(const FoldResult&, const FoldResult&) = default;
};

struct EvalReport {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double mean_f1 = 0.0;
  Confusion total;
  std::vector<NewsLabel> predictions;  // out-of-fold, per sample

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

inline void finalize(EvalReport& r) {
  r.total = {};
  r.mean_accuracy = r.mean_f1 = 0.0;
  for (auto& f : r.folds) {
    f.accuracy = f.confusion.accuracy();
    f.f1 = f.confusion.f1();
    r.total += f.confusion;
    r.mean_accuracy += f.accuracy;
    r.mean_f1 += f.f1;
  }
  if (!r.folds.empty()) {
    r.mean_accuracy /= static_cast<double>(r.folds.size());
    r.mean_f1 /= static_cast<double>(r.folds.size());
  }
}

inline nlohmann::json to_json(const Confusion& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"fold", f.fold}, {"accuracy", f.accuracy}, {"f1", f.f1}, {"confusion", to_json(f.confusion)}});
  }
  return {{"folds", folds}, {"mean_accuracy", r.mean_accuracy}, {"mean_f1", r.mean_f1}, {"confusion", to_json(r.total)}};
}

/// Fits on the training rows of each fold and scores the held-out rows.
/// `matrices[f]` holds the features of every sample as seen from fold f.
inline EvalReport evaluate_folds(std::span<const Matrix> matrices, std::span<const NewsLabel> labels,
                                 const DatasetSplit& split, const ClassifierParams& params,
                                 const std::vector<std::size_t>& columns, std::uint64_t seed, unsigned jobs = 1) {
  if (matrices.size() != split.folds) throw std::invalid_argument("one matrix per fold expected");
  EvalReport report;
  report.predictions.assign(labels.size(), NewsLabel::real);
  for (std::size_t f = 0; f < split.folds; ++f) {
    const auto train = split.train_indices(f);
    const auto test = split.test_indices(f);
    Matrix xtr;
    std::vector<NewsLabel> ytr;
    for (auto i : train) {
      xtr.push_row(matrices[f].row(i));
      ytr.push_back(labels[i]);
    }
    const auto model =
        fit_classifier(params, xtr, ytr, columns, derive_seed(seed, "classifier/" + std::to_string(f)), jobs);
    FoldResult fr;
    fr.fold = f;
    for (auto i : test) {
      const NewsLabel p = model.predict(matrices[f].row(i));
      report.predictions[i] = p;
      fr.confusion.add(labels[i], p);
    }
    report.folds.push_back(fr);
  }
  finalize(report);
  return report;
}

// ---------------------------------------------------------------------------
// Relief feature ranking.

struct ReliefWeight {
  std::size_t column = 0;
  double weight = 0.0;
};

/// Classic binary Relief with one nearest hit and miss on min-max scaled
/// features. `iterations` = 0 uses every sample once, in order; otherwise
/// that many samples are drawn with the seed. Returns columns by descending
/// weight, ties by column.
inline std::vector<ReliefWeight> relief_rank(const Matrix& x, std::span<const NewsLabel> labels, std::uint64_t seed,
                                             std::size_t iterations = 0) {
  if (x.rows() != labels.size()) throw std::invalid_argument("row/label count mismatch");
  std::size_t fake = 0;
  for (auto l : labels) fake += l == NewsLabel::fake;
  if (fake < 2 || labels.size() - fake < 2) throw std::invalid_argument("Relief needs at least two samples per class");

  MinMaxScaler scaler;
  scaler.fit(x);
  const Matrix xs = scaler.transform(x);
  const std::size_t n = xs.rows(), d = xs.cols();

  std::vector<std::size_t> samples;
  if (iterations == 0) {
    samples.resize(n);
    std::iota(samples.begin(), samples.end(), std::size_t{0});
  } else {
    Rng rng(derive_seed(seed, "relief"));
    for (std::size_t i = 0; i < iterations; ++i) samples.push_back(uniform_index(rng, n));
  }

  std::vector<double> w(d, 0.0);
  for (auto i : samples) {
    const auto xi = xs.row(i);
    double best_hit = std::numeric_limits<double>::infinity(), best_miss = best_hit;
    std::size_t hit = 0, miss = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto xj = xs.row(j);
      double dist = 0.0;
      for (std::size_t c = 0; c < d; ++c) dist += (xi[c] - xj[c]) * (xi[c] - xj[c]);
      if (labels[j] == labels[i]) {
        if (dist < best_hit) best_hit = dist, hit = j;
      } else if (dist < best_miss) {
        best_miss = dist, miss = j;
      }
    }
    for (std::size_t c = 0; c < d; ++c) w[c] += std::abs(xi[c] - xs(miss, c)) - std::abs(xi[c] - xs(hit, c));
  }

  std::vector<ReliefWeight> out(d);
  for (std::size_t c = 0; c < d; ++c) out[c] = {c, w[c] / static_cast<double>(samples.size())};
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.weight > b.weight; });
  return out;
}

}  // namespace fnd
