#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "fnd/common.hpp"

namespace fnd {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  void push_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw std::invalid_argument("row width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  /// Copy restricted to the given columns, in the given order.
  Matrix select_columns(std::span<const std::size_t> columns) const {
    Matrix out(rows_, columns.size());
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < columns.size(); ++c) out(r, c) = (*this)(r, columns[c]);
    }
    return out;
  }

  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class ClassifierKind : std::uint8_t { random_forest, decision_tree, knn, gaussian_nb };

inline std::string_view to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::random_forest: return "random_forest";
    case ClassifierKind::decision_tree: return "decision_tree";
    case ClassifierKind::knn: return "knn";
    default: return "gaussian_nb";
  }
}

inline ClassifierKind parse_classifier(std::string_view s) {
  for (auto k : {ClassifierKind::random_forest, ClassifierKind::decision_tree, ClassifierKind::knn,
                 ClassifierKind::gaussian_nb}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown classifier '" + std::string(s) + "'");
}

struct ClassifierParams {
  ClassifierKind kind = ClassifierKind::random_forest;
  int trees = 100;
  std::size_t max_features = 0;  // 0: ceil(sqrt(d)) for forests, d for single trees
  int max_depth = 0;             // 0: unbounded
  std::size_t min_leaf = 1;
  bool bootstrap = true;
  std::size_t knn_k = 5;
  double nb_variance_floor = 1e-9;
};

// Labels inside the classifiers are 0 (true) and 1 (fake); ties go to 1.

/// Per-column min-max scaling fitted on training rows. Constant columns map to 0.
class MinMaxScaler {
 public:
  void fit(const Matrix& x) {
    lo_.assign(x.cols(), std::numeric_limits<double>::infinity());
    hi_.assign(x.cols(), -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) {
        lo_[c] = std::min(lo_[c], x(r, c));
        hi_[c] = std::max(hi_[c], x(r, c));
      }
    }
  }

  void transform(std::span<const double> in, std::span<double> out) const {
    for (std::size_t c = 0; c < in.size(); ++c) {
      const double range = hi_[c] - lo_[c];
      out[c] = range > 0.0 ? (in[c] - lo_[c]) / range : 0.0;
    }
  }

  Matrix transform(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) transform(x.row(r), out.row(r));
    return out;
  }

 private:
  std::vector<double> lo_, hi_;
};

/// CART tree with Gini impurity and axis-aligned thresholds (x <= t goes left).
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::uint8_t label = 0;
  };

  /// Fits on the rows listed in `sample` (repeats allowed, as in bootstrap).
  void fit(const Matrix& x, std::span<const std::uint8_t> y, std::vector<std::size_t> sample, std::size_t max_features,
           int max_depth, std::size_t min_leaf, Rng& rng) {
    nodes_.clear();
    x_ = &x;
    y_ = y;
    max_features_ = max_features == 0 ? x.cols() : std::min(max_features, x.cols());
    max_depth_ = max_depth;
    min_leaf_ = std::max<std::size_t>(1, min_leaf);
    rng_ = &rng;
    grow(sample, 0);
    x_ = nullptr;
    rng_ = nullptr;
  }

  std::uint8_t predict(std::span<const double> row) const {
    int at = 0;
    while (nodes_[at].feature >= 0) {
      at = row[nodes_[at].feature] <= nodes_[at].threshold ? nodes_[at].left : nodes_[at].right;
    }
    return nodes_[at].label;
  }

  int root_feature() const { return nodes_.empty() ? -1 : nodes_[0].feature; }
  std::size_t num_nodes() const noexcept { return nodes_.size(); }

 private:
  static double gini(double pos, double total) {
    if (total == 0.0) return 0.0;
    const double p = pos / total;
    return 2.0 * p * (1.0 - p);
  }

  int grow(std::vector<std::size_t>& idx, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::size_t pos = 0;
    for (auto i : idx) pos += y_[i];
    nodes_[id].label = 2 * pos >= idx.size() ? 1 : 0;
    const bool pure = pos == 0 || pos == idx.size();
    if (pure || (max_depth_ > 0 && depth >= max_depth_) || idx.size() < 2 * min_leaf_) return id;

    std::vector<std::size_t> features(x_->cols());
    std::iota(features.begin(), features.end(), std::size_t{0});
    shuffle(features, *rng_);

    const double n = static_cast<double>(idx.size());
    double best_score = std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0.0;
    std::size_t informative = 0;
    std::vector<std::pair<double, std::uint8_t>> column(idx.size());
    for (std::size_t f : features) {
      if (informative >= max_features_) break;
      for (std::size_t k = 0; k < idx.size(); ++k) column[k] = {(*x_)(idx[k], f), y_[idx[k]]};
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;  // constant here; does not count
      ++informative;
      double left_pos = 0.0;
      for (std::size_t k = 0; k + 1 < column.size(); ++k) {
        left_pos += column[k].second;
        if (column[k].first == column[k + 1].first) continue;
        const double nl = static_cast<double>(k + 1);
        const double nr = n - nl;
        if (nl < static_cast<double>(min_leaf_) || nr < static_cast<double>(min_leaf_)) continue;
        const double score = nl * gini(left_pos, nl) + nr * gini(static_cast<double>(pos) - left_pos, nr);
        if (score < best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          const double a = column[k].first, b = column[k + 1].first;
          double t = a + (b - a) / 2.0;
          if (!(t < b)) t = a;
          best_threshold = t;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) ((*x_)(i, best_feature) <= best_threshold ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    nodes_[id].feature = best_feature;
    nodes_[id].threshold = best_threshold;
    const int l = grow(left, depth + 1);
    nodes_[id].left = l;
    const int r = grow(right, depth + 1);
    nodes_[id].right = r;
    return id;
  }

  std::vector<Node> nodes_;
  const Matrix* x_ = nullptr;
  std::span<const std::uint8_t> y_;
  std::size_t max_features_ = 0;
  int max_depth_ = 0;
  std::size_t min_leaf_ = 1;
  Rng* rng_ = nullptr;
};

class RandomForest {
 public:
  void fit(const Matrix& x, std::span<const std::uint8_t> y, const ClassifierParams& p, std::uint64_t seed,
           unsigned jobs = 1) {
    const std::size_t mtry =
        p.max_features != 0 ? p.max_features
                            : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
    trees_.assign(static_cast<std::size_t>(std::max(1, p.trees)), {});
    parallel_for(trees_.size(), jobs, [&](std::size_t t) {
      Rng rng(derive_seed(seed, "tree/" + std::to_string(t)));
      std::vector<std::size_t> sample(x.rows());
      if (p.bootstrap) {
        for (auto& s : sample) s = uniform_index(rng, x.rows());
      } else {
        std::iota(sample.begin(), sample.end(), std::size_t{0});
      }
      trees_[t].fit(x, y, std::move(sample), mtry, p.max_depth, p.min_leaf, rng);
    });
  }

  std::uint8_t predict(std::span<const double> row) const {
    std::size_t fake = 0;
    for (const auto& t : trees_) fake += t.predict(row);
    return 2 * fake >= trees_.size() ? 1 : 0;
  }

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

 private:
  std::vector<DecisionTree> trees_;
};

class KNearest {
 public:
  void fit(const Matrix& x, std::span<const std::uint8_t> y, std::size_t k) {
    scaler_.fit(x);
    x_ = scaler_.transform(x);
    y_.assign(y.begin(), y.end());
    k_ = std::max<std::size_t>(1, k);
  }

  std::uint8_t predict(std::span<const double> row) const {
    std::vector<double> q(row.size());
    scaler_.transform(row, q);
    struct Cand {
      double d;
      std::uint8_t label;
      std::size_t index;
    };
    std::vector<Cand> cands(x_.rows());
    for (std::size_t r = 0; r < x_.rows(); ++r) {
      double d = 0.0;
      const auto xr = x_.row(r);
      for (std::size_t c = 0; c < q.size(); ++c) d += (xr[c] - q[c]) * (xr[c] - q[c]);
      cands[r] = {d, y_[r], r};
    }
    const std::size_t k = std::min(k_, cands.size());
    // Equidistant neighbors: fake first, then lower row index.
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(k), cands.end(),
                      [](const Cand& a, const Cand& b) {
                        if (a.d != b.d) return a.d < b.d;
                        if (a.label != b.label) return a.label > b.label;
                        return a.index < b.index;
                      });
    std::size_t fake = 0;
    for (std::size_t i = 0; i < k; ++i) fake += cands[i].label;
    return 2 * fake >= k ? 1 : 0;
  }

 private:
  MinMaxScaler scaler_;
  Matrix x_;
  std::vector<std::uint8_t> y_;
  std::size_t k_ = 5;
};

class GaussianNB {
 public:
  void fit(const Matrix& x, std::span<const std::uint8_t> y, double variance_floor) {
    scaler_.fit(x);
    const Matrix xs = scaler_.transform(x);
    const std::size_t d = x.cols();
    for (int c = 0; c < 2; ++c) {
      mean_[c].assign(d, 0.0);
      var_[c].assign(d, 0.0);
    }
    double count[2] = {0, 0};
    for (std::size_t r = 0; r < xs.rows(); ++r) {
      count[y[r]] += 1.0;
      for (std::size_t j = 0; j < d; ++j) mean_[y[r]][j] += xs(r, j);
    }
    for (int c = 0; c < 2; ++c) {
      for (auto& m : mean_[c]) m = safe_ratio(m, count[c]);
    }
    for (std::size_t r = 0; r < xs.rows(); ++r) {
      for (std::size_t j = 0; j < d; ++j) {
        const double dev = xs(r, j) - mean_[y[r]][j];
        var_[y[r]][j] += dev * dev;
      }
    }
    for (int c = 0; c < 2; ++c) {
      for (auto& v : var_[c]) v = std::max(safe_ratio(v, count[c]), variance_floor);
      log_prior_[c] = std::log(count[c] / static_cast<double>(xs.rows()));
    }
  }

  std::uint8_t predict(std::span<const double> row) const {
    std::vector<double> q(row.size());
    scaler_.transform(row, q);
    double ll[2];
    for (int c = 0; c < 2; ++c) {
      ll[c] = log_prior_[c];
      for (std::size_t j = 0; j < q.size(); ++j) {
        const double dev = q[j] - mean_[c][j];
        ll[c] -= 0.5 * std::log(2.0 * M_PI * var_[c][j]) + dev * dev / (2.0 * var_[c][j]);
      }
    }
    return ll[1] >= ll[0] ? 1 : 0;
  }

 private:
  MinMaxScaler scaler_;
  std::vector<double> mean_[2], var_[2];
  double log_prior_[2] = {0, 0};
};

/// A fitted classifier plus the columns of the full feature row it reads.
class ClassifierModel {
 public:
  ClassifierKind kind() const noexcept { return kind_; }
  const std::vector<std::size_t>& columns() const noexcept { return columns_; }

  std::uint8_t predict_raw(std::span<const double> full_row) const {
    std::vector<double> sel(columns_.size());
    for (std::size_t c = 0; c < columns_.size(); ++c) sel[c] = full_row[columns_[c]];
    return std::visit([&](const auto& m) -> std::uint8_t { return m.predict(sel); }, model_);
  }

  NewsLabel predict(std::span<const double> full_row) const {
    return predict_raw(full_row) ? NewsLabel::fake : NewsLabel::real;
  }

  const RandomForest* forest() const { return std::get_if<RandomForest>(&model_); }
  const DecisionTree* tree() const { return std::get_if<DecisionTree>(&model_); }

  friend ClassifierModel fit_classifier(const ClassifierParams&, const Matrix&, std::span<const NewsLabel>,
                                        std::vector<std::size_t>, std::uint64_t, unsigned);

 private:
  ClassifierKind kind_ = ClassifierKind::random_forest;
  std::vector<std::size_t> columns_;
  std::variant<RandomForest, DecisionTree, KNearest, GaussianNB> model_;
};

/// Fits on `columns` (0-based; empty means all) of `x`.
inline ClassifierModel fit_classifier(const ClassifierParams& p, const Matrix& x, std::span<const NewsLabel> labels,
                                      std::vector<std::size_t> columns, std::uint64_t seed, unsigned jobs = 1) {
  if (x.rows() != labels.size()) throw std::invalid_argument("row/label count mismatch");
  if (x.rows() < 2) throw std::invalid_argument("need at least two training samples");
  std::vector<std::uint8_t> y(labels.size());
  std::size_t fake = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[i] = labels[i] == NewsLabel::fake ? 1 : 0;
    fake += y[i];
  }
  if (fake == 0 || fake == y.size()) throw std::invalid_argument("single-class training set");
  if (columns.empty()) {
    columns.resize(x.cols());
    std::iota(columns.begin(), columns.end(), std::size_t{0});
  }
  const Matrix xs = x.select_columns(columns);

  ClassifierModel model;
  model.kind_ = p.kind;
  model.columns_ = std::move(columns);
  switch (p.kind) {
    case ClassifierKind::random_forest: {
      RandomForest rf;
      rf.fit(xs, y, p, seed, jobs);
      model.model_ = std::move(rf);
      break;
    }
    case ClassifierKind::decision_tree: {
      DecisionTree dt;
      std::vector<std::size_t> all(xs.rows());
      std::iota(all.begin(), all.end(), std::size_t{0});
      Rng rng(seed);
      dt.fit(xs, y, std::move(all), p.max_features, p.max_depth, p.min_leaf, rng);
      model.model_ = std::move(dt);
      break;
    }
    case ClassifierKind::knn: {
      KNearest knn;
      knn.fit(xs, y, p.knn_k);
      model.model_ = std::move(knn);
      break;
    }
    case ClassifierKind::gaussian_nb: {
      GaussianNB nb;
      nb.fit(xs, y, p.nb_variance_floor);
      model.model_ = std::move(nb);
      break;
    }
  }
  return model;
}

inline ClassifierModel fit_random_forest(const Matrix& x, std::span<const NewsLabel> labels, std::uint64_t seed,
                                         ClassifierParams p = {}, unsigned jobs = 1) {
  p.kind = ClassifierKind::random_forest;
  return fit_classifier(p, x, labels, {}, seed, jobs);
}

inline ClassifierModel fit_baseline(ClassifierKind kind, const Matrix& x, std::span<const NewsLabel> labels,
                                    ClassifierParams p = {}, std::uint64_t seed = 0) {
  if (kind == ClassifierKind::random_forest) throw std::invalid_argument("random forest is not a baseline");
  p.kind = kind;
  return fit_classifier(p, x, labels, {}, seed);
}

}  // namespace fnd
