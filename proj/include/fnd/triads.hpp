#pragma once

#include <array>
#include <string>
#include <vector>

#include "fnd/common.hpp"
#include "fnd/diffusion.hpp"
#include "fnd/susceptibility.hpp"

namespace fnd {

// Labeled triangle taxonomy. A triangle whose three pairs each carry exactly
// one direction is either transitive (source -> middle -> sink, source -> sink)
// or cyclic. Transitive classes are keyed by the labels of the three roles
// (8 classes), cyclic ones by their number of susceptible members (4 classes).
//
//   index 0..7   transitive, index = 4*S(source) + 2*S(middle) + S(sink)
//   index 8..11  cyclic with 0..3 susceptible members (NNN, NNS, NSS, SSS)

inline constexpr std::size_t kTriadClasses = 12;

inline std::size_t transitive_class(bool source_s, bool middle_s, bool sink_s) {
  return 4u * source_s + 2u * middle_s + 1u * sink_s;
}

inline std::size_t cyclic_class(int susceptible_members) { return 8u + static_cast<std::size_t>(susceptible_members); }

inline std::string triad_class_name(std::size_t k) {
  auto letter = [](bool s) { return s ? 'S' : 'N'; };
  if (k < 8) {
    return std::string("trans_") + letter(k & 4) + letter(k & 2) + letter(k & 1);
  }
  static const char* cyclic[] = {"cyc_NNN", "cyc_NNS", "cyc_NSS", "cyc_SSS"};
  return cyclic[k - 8];
}

/// Class index after swapping every N and S label.
inline std::size_t flipped_triad_class(std::size_t k) { return k < 8 ? 7 - k : 8 + (11 - k); }

struct TriadCensus {
  std::uint64_t total = 0;  // closed triangles in the undirected closure
  std::array<std::uint64_t, kTriadClasses> classes{};
  std::uint64_t reciprocal = 0;  // contain at least one mutual pair
  std::uint64_t unknown = 0;     // single-direction but touch an unknown-class user

  friend bool operator==(const TriadCensus&, const TriadCensus&) = default;
};

/// Triangle census with per-node labels indexed by local node.
inline TriadCensus census(const DiffusionNetwork& net, std::span<const UserClass> labels) {
  TriadCensus tc;
  const std::size_t n = net.size();
  if (labels.size() != n) throw std::invalid_argument("label count must match network size");

  // Undirected neighbor sets, oriented from lower to higher (degree, id) rank
  // so every triangle is listed once.
  std::vector<std::vector<std::uint32_t>> und(n);
  for (const auto& [u, v] : net.edges()) {
    und[u].push_back(v);
    und[v].push_back(u);
  }
  for (auto& a : und) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  auto before = [&](std::uint32_t a, std::uint32_t b) {
    return und[a].size() < und[b].size() || (und[a].size() == und[b].size() && a < b);
  };
  std::vector<std::vector<std::uint32_t>> fwd(n);
  for (std::uint32_t u = 0; u < n; ++u) {
    for (auto v : und[u]) {
      if (before(u, v)) fwd[u].push_back(v);
    }
  }

  auto classify = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    ++tc.total;
    const std::array<std::uint32_t, 3> t{a, b, c};
    std::array<int, 3> outdeg{};
    for (int x = 0; x < 3; ++x) {
      for (int y = x + 1; y < 3; ++y) {
        const bool xy = net.has_edge(t[x], t[y]);
        const bool yx = net.has_edge(t[y], t[x]);
        if (xy && yx) {
          ++tc.reciprocal;
          return;
        }
        ++outdeg[xy ? x : y];
      }
    }
    int susceptible = 0;
    for (auto v : t) {
      if (labels[v] == UserClass::unknown) {
        ++tc.unknown;
        return;
      }
      susceptible += labels[v] == UserClass::susceptible;
    }
    if (outdeg[0] == 1 && outdeg[1] == 1 && outdeg[2] == 1) {
      ++tc.classes[cyclic_class(susceptible)];
      return;
    }
    std::uint32_t src = 0, mid = 0, sink = 0;
    for (int x = 0; x < 3; ++x) {
      if (outdeg[x] == 2) src = t[x];
      else if (outdeg[x] == 1) mid = t[x];
      else sink = t[x];
    }
    auto is_s = [&](std::uint32_t v) { return labels[v] == UserClass::susceptible; };
    ++tc.classes[transitive_class(is_s(src), is_s(mid), is_s(sink))];
  };

  std::vector<char> mark(n, 0);
  for (std::uint32_t u = 0; u < n; ++u) {
    for (auto w : fwd[u]) mark[w] = 1;
    for (auto v : fwd[u]) {
      for (auto w : fwd[v]) {
        if (mark[w]) classify(u, v, w);
      }
    }
    for (auto w : fwd[u]) mark[w] = 0;
  }
  return tc;
}

inline std::vector<UserClass> local_classes(const DiffusionNetwork& net, const SusceptibilityModel& model) {
  std::vector<UserClass> out(net.size());
  for (std::uint32_t i = 0; i < net.size(); ++i) out[i] = model.classify(net.node(i));
  return out;
}

inline TriadCensus census(const DiffusionNetwork& net, const SusceptibilityModel& model) {
  return census(net, local_classes(net, model));
}

struct TriadFeatures {
  double total = 0.0;
  double per_spreader = 0.0;
  double density = 0.0;
  std::array<double, kTriadClasses> counts{};
  std::array<double, kTriadClasses> proportions{};  // share among classified triangles
};

inline TriadFeatures triad_features(const TriadCensus& tc, std::size_t num_spreaders) {
  TriadFeatures f;
  f.total = static_cast<double>(tc.total);
  f.per_spreader = safe_ratio(f.total, static_cast<double>(num_spreaders));
  f.density = safe_ratio(f.total, binomial3(num_spreaders));
  double classified = 0.0;
  for (auto c : tc.classes) classified += static_cast<double>(c);
  for (std::size_t k = 0; k < kTriadClasses; ++k) {
    f.counts[k] = static_cast<double>(tc.classes[k]);
    f.proportions[k] = safe_ratio(f.counts[k], classified);
  }
  return f;
}

}  // namespace fnd
