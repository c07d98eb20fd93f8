/// @file
/// @brief Brute-force reference implementations shared by unit and acceptance tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mididedup/detectors.h"
#include "mididedup/eval.h"

namespace mididedup::testing {

/// Walks every monotone path from (0,0) to (n-1,m-1), summing frame costs in
/// path order, and keeps the lowest accumulated cost (shortest on ties).
inline double dtw_exhaustive(const Chromagram& a, const Chromagram& b) {
  const std::size_t n = a.length(), m = b.length();
  double best_cost = std::numeric_limits<double>::infinity();
  std::size_t best_len = 0;
  struct Frame {
    std::size_t i, j, len;
    double cost;
  };
  std::vector<Frame> stack{{0, 0, 1, frame_cost(a.frames[0], b.frames[0])}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (f.i == n - 1 && f.j == m - 1) {
      if (f.cost < best_cost || (f.cost == best_cost && f.len < best_len)) {
        best_cost = f.cost;
        best_len = f.len;
      }
      continue;
    }
    if (f.i + 1 < n) stack.push_back({f.i + 1, f.j, f.len + 1, f.cost + frame_cost(a.frames[f.i + 1], b.frames[f.j])});
    if (f.j + 1 < m) stack.push_back({f.i, f.j + 1, f.len + 1, f.cost + frame_cost(a.frames[f.i], b.frames[f.j + 1])});
    if (f.i + 1 < n && f.j + 1 < m) {
      stack.push_back({f.i + 1, f.j + 1, f.len + 1, f.cost + frame_cost(a.frames[f.i + 1], b.frames[f.j + 1])});
    }
  }
  return best_cost / static_cast<double>(best_len);
}

struct PairCounts {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t fn_count = 0;
  std::size_t tp = 0;
};

/// Enumerates every unordered pair of `files` and compares membership in
/// `predicted` with equal labels.
inline PairCounts classify_bruteforce(const std::vector<std::string>& files, const std::vector<int>& label,
                                      const std::set<std::pair<std::string, std::string>>& predicted) {
  PairCounts out;
  std::size_t pred = 0, truth = 0;
  std::set<std::string> touched;
  for (std::size_t i = 0; i < files.size(); ++i) {
    for (std::size_t j = i + 1; j < files.size(); ++j) {
      const auto key = std::minmax(files[i], files[j]);
      const bool p = predicted.contains({key.first, key.second});
      const bool t = label[i] == label[j];
      pred += p;
      truth += t;
      if (p && t) {
        ++out.tp;
        touched.insert(files[i]);
        touched.insert(files[j]);
      }
    }
  }
  out.precision = pred ? static_cast<double>(out.tp) / pred : 0.0;
  out.recall = truth ? static_cast<double>(out.tp) / truth : 0.0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const bool dup = std::count(label.begin(), label.end(), label[i]) > 1;
    if (dup && !touched.contains(files[i])) ++out.fn_count;
  }
  return out;
}

/// For every grid threshold, recounts precision over the raw edge list.
inline std::pair<double, bool> sweep_bruteforce(const std::vector<SimilarityEdge>& edges, const GroundTruth& truth,
                                                double floor, double emit_floor) {
  for (int step = static_cast<int>(std::ceil(emit_floor * 1000 - 1e-9)); step <= 1000; ++step) {
    const double t = step / 1000.0;
    std::set<std::pair<std::string, std::string>> predicted;
    for (const auto& e : edges) {
      if (std::llround(e.score * 1e6) >= std::llround(t * 1e6)) predicted.insert({e.id_a, e.id_b});
    }
    std::size_t tp = 0;
    for (const auto& [a, b] : predicted) tp += truth.same_group(a, b);
    const double precision = predicted.empty() ? 0.0 : static_cast<double>(tp) / predicted.size();
    if (precision >= floor) return {t, true};
  }
  return {1.0, false};
}

/// Partition by repeated relaxation of a reachability matrix.
inline std::set<std::set<int>> closure_partition(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) reach[i][i] = true;
  for (const auto& [a, b] : edges) reach[a][b] = reach[b][a] = true;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  std::set<std::set<int>> parts;
  for (int i = 0; i < n; ++i) {
    std::set<int> p;
    for (int j = 0; j < n; ++j)
      if (reach[i][j]) p.insert(j);
    parts.insert(p);
  }
  return parts;
}

}  // namespace mididedup::testing
