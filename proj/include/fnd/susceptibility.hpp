#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "fnd/common.hpp"
#include "fnd/ingestion.hpp"

namespace fnd {

enum class SusceptibilityMethod : std::uint8_t {
  by_news = 0,       // share of fake stories among the stories a user spread
  by_frequency = 1,  // share of fake spreading events among all spreading events
};

inline std::string_view to_string(SusceptibilityMethod m) {
  return m == SusceptibilityMethod::by_news ? "news" : "frequency";
}

enum class UserClass : std::uint8_t { normal = 0, susceptible = 1, unknown = 2 };

inline char class_letter(UserClass c) {
  switch (c) {
    case UserClass::normal: return 'N';
    case UserClass::susceptible: return 'S';
    default: return 'U';
  }
}

/// Per-user susceptibility scores fitted on a training subset of news.
/// Users without training history score exactly theta ("unknown").
class SusceptibilityModel {
 public:
  SusceptibilityModel() = default;

  SusceptibilityMethod method() const noexcept { return method_; }
  double theta() const noexcept { return theta_; }
  double score(NodeId v) const { return scores_.at(v); }
  const std::vector<double>& scores() const noexcept { return scores_; }
  bool has_history(NodeId v) const { return history_.at(v) != 0; }
  const std::vector<std::size_t>& training_news() const noexcept { return training_; }

  /// Strict inequalities on both sides; S == theta is "unknown".
  UserClass classify(NodeId v) const {
    const double s = scores_.at(v);
    if (s < theta_) return UserClass::normal;
    if (s > theta_) return UserClass::susceptible;
    return UserClass::unknown;
  }

  friend SusceptibilityModel fit_susceptibility(const EngagementTable&, std::span<const std::size_t>,
                                                SusceptibilityMethod, double);

 private:
  SusceptibilityMethod method_ = SusceptibilityMethod::by_news;
  double theta_ = 0.5;
  std::vector<double> scores_;
  std::vector<char> history_;
  std::vector<std::size_t> training_;
};

/// Scores every user from the engagements of the training news only; labels
/// of all other news are never read.
inline SusceptibilityModel fit_susceptibility(const EngagementTable& table, std::span<const std::size_t> training_news,
                                              SusceptibilityMethod method, double theta) {
  if (training_news.empty()) throw std::invalid_argument("empty training news set");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0, 1]");

  SusceptibilityModel model;
  model.method_ = method;
  model.theta_ = theta;
  model.training_.assign(training_news.begin(), training_news.end());
  std::sort(model.training_.begin(), model.training_.end());
  model.training_.erase(std::unique(model.training_.begin(), model.training_.end()), model.training_.end());

  const std::size_t n = table.num_users();
  std::vector<double> fake(n, 0.0), total(n, 0.0);
  for (std::size_t idx : model.training_) {
    const NewsRecord& rec = table.news(idx);
    const bool is_fake = rec.label == NewsLabel::fake;
    for (const auto& [u, c] : rec.spreaders) {
      const double w = method == SusceptibilityMethod::by_news ? 1.0 : static_cast<double>(c);
      total[u] += w;
      if (is_fake) fake[u] += w;
    }
  }
  model.scores_.assign(n, theta);
  model.history_.assign(n, 0);
  for (std::size_t u = 0; u < n; ++u) {
    if (total[u] > 0.0) {
      model.scores_[u] = fake[u] / total[u];
      model.history_[u] = 1;
    }
  }
  return model;
}

inline UserClass classify(const SusceptibilityModel& model, NodeId v) { return model.classify(v); }

inline UserClass classify(const SusceptibilityModel& model, const SocialGraph& graph, const std::string& user_id) {
  const auto v = graph.find(user_id);
  if (!v) return UserClass::unknown;
  return model.classify(*v);
}

/// CSV `user_id,score,class`.
inline void write_susceptibility_csv(const SusceptibilityModel& model, const SocialGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file", path);
  out << "user_id,score,class\n";
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    const char* cls = "unknown";
    switch (model.classify(v)) {
      case UserClass::normal: cls = "normal"; break;
      case UserClass::susceptible: cls = "susceptible"; break;
      default: break;
    }
    out << csv::escape(graph.id(v)) << ',' << csv::format_double(model.score(v)) << ',' << cls << '\n';
  }
}

}  // namespace fnd
