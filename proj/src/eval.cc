#include "mididedup/eval.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mididedup/parallel.h"

namespace mididedup {
namespace {

std::string fold_case(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::int64_t micro(double v) { return std::llround(v * 1e6); }

}  // namespace

bool GroundTruth::same_group(const FileId& a, const FileId& b) const {
  const auto ia = group_of.find(a);
  const auto ib = group_of.find(b);
  return ia != group_of.end() && ib != group_of.end() && ia->second == ib->second;
}

std::set<FileId> GroundTruth::duplicate_files() const {
  std::set<FileId> out;
  for (const auto& [key, ids] : groups) {
    if (ids.size() >= 2) out.insert(ids.begin(), ids.end());
  }
  return out;
}

std::size_t GroundTruth::truth_pair_count() const {
  std::size_t n = 0;
  for (const auto& [key, ids] : groups) n += ids.size() * (ids.size() - 1) / 2;
  return n;
}

std::string title_key(std::string_view id) {
  const auto slash = id.rfind('/');
  if (slash == std::string_view::npos || slash == 0) {
    throw std::invalid_argument("id '" + std::string(id) + "' has no artist directory");
  }
  std::string_view dir = id.substr(0, slash);
  const auto parent = dir.rfind('/');
  const std::string_view artist = parent == std::string_view::npos ? dir : dir.substr(parent + 1);

  std::string_view title = id.substr(slash + 1);
  if (const auto dot = title.rfind('.'); dot != std::string_view::npos) title = title.substr(0, dot);
  if (const auto dot = title.rfind('.'); dot != std::string_view::npos && dot + 1 < title.size()) {
    const auto suffix = title.substr(dot + 1);
    if (std::all_of(suffix.begin(), suffix.end(),
                    [](unsigned char c) { return std::isdigit(c) != 0; })) {
      title = title.substr(0, dot);
    }
  }
  return fold_case(artist) + "/" + fold_case(trim(title));
}

GroundTruth ground_truth_from_groups(std::map<std::string, std::vector<FileId>> groups) {
  GroundTruth gt;
  for (auto& [key, ids] : groups) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (const auto& id : ids) {
      if (!gt.group_of.emplace(id, key).second) {
        throw std::invalid_argument("id '" + id + "' belongs to more than one group");
      }
    }
  }
  gt.groups = std::move(groups);
  return gt;
}

GroundTruth ground_truth_from_paths(std::span<const FileId> ids) {
  std::map<std::string, std::vector<FileId>> groups;
  for (const auto& id : ids) groups[title_key(id)].push_back(id);
  return ground_truth_from_groups(std::move(groups));
}

GroundTruth restrict_ground_truth(const GroundTruth& truth, std::span<const FileId> present) {
  const std::set<FileId> keep(present.begin(), present.end());
  std::map<std::string, std::vector<FileId>> groups;
  for (const auto& [key, ids] : truth.groups) {
    for (const auto& id : ids) {
      if (keep.contains(id)) groups[key].push_back(id);
    }
  }
  return ground_truth_from_groups(std::move(groups));
}

std::string ground_truth_to_json(const GroundTruth& truth) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  for (const auto& [key, ids] : truth.groups) obj[key] = ids;
  return obj.dump(1) + "\n";
}

GroundTruth ground_truth_from_json(std::string_view text) {
  const auto obj = nlohmann::json::parse(text);
  std::map<std::string, std::vector<FileId>> groups;
  for (const auto& [key, ids] : obj.items()) groups[key] = ids.get<std::vector<FileId>>();
  return ground_truth_from_groups(std::move(groups));
}

double ndcg_from_ranks(std::span<const std::size_t> ranks) {
  if (ranks.empty()) return 0.0;
  std::vector<std::size_t> sorted(ranks.begin(), ranks.end());
  std::sort(sorted.begin(), sorted.end());
  double dcg = 0.0;
  double ideal = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    dcg += 1.0 / std::log2(static_cast<double>(sorted[k]) + 1.0);
    ideal += 1.0 / std::log2(static_cast<double>(k) + 2.0);
  }
  return dcg / ideal;
}

double ndcg_all(std::span<const FileId> ranking, const std::set<FileId>& relevant) {
  std::vector<std::size_t> ranks;
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    if (relevant.contains(ranking[r])) ranks.push_back(r + 1);
  }
  return ndcg_from_ranks(ranks);
}

double reciprocal_rank(std::span<const FileId> ranking, const std::set<FileId>& relevant) {
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    if (relevant.contains(ranking[r])) return 1.0 / static_cast<double>(r + 1);
  }
  return 0.0;
}

double mrr(std::span<const std::size_t> first_relevant_ranks) {
  if (first_relevant_ranks.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t r : first_relevant_ranks) sum += 1.0 / static_cast<double>(r);
  return sum / static_cast<double>(first_relevant_ranks.size());
}

std::vector<FileId> rank_candidates(std::span<const FileId> ids, std::span<const double> scores,
                                    std::size_t query) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i != query) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  std::vector<FileId> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back(ids[i]);
  return out;
}

RetrievalResult evaluate_retrieval(std::span<const FileId> ids, const GroundTruth& truth,
                                   const PairScorer& score, int threads) {
  const std::size_t n = ids.size();
  std::vector<double> ndcg(n, -1.0), rr(n, -1.0);
  parallel_for(n, threads, [&](std::size_t q) {
    std::vector<std::size_t> relevant;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != q && truth.same_group(ids[q], ids[j])) relevant.push_back(j);
    }
    if (relevant.empty()) return;
    std::vector<double> s(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != q) s[j] = score(q, j);
    }
    std::vector<std::size_t> ranks;
    for (std::size_t r : relevant) {
      std::size_t rank = 1;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == q || j == r) continue;
        if (s[j] > s[r] || (s[j] == s[r] && ids[j] < ids[r])) ++rank;
      }
      ranks.push_back(rank);
    }
    ndcg[q] = ndcg_from_ranks(ranks);
    rr[q] = 1.0 / static_cast<double>(*std::min_element(ranks.begin(), ranks.end()));
  });
  RetrievalResult result;
  double ndcg_sum = 0.0, rr_sum = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    if (ndcg[q] < 0.0) continue;
    ndcg_sum += ndcg[q];
    rr_sum += rr[q];
    ++result.queries;
  }
  if (result.queries) {
    result.ndcg_mean = ndcg_sum / static_cast<double>(result.queries);
    result.mrr_mean = rr_sum / static_cast<double>(result.queries);
  }
  return result;
}

bool meets_threshold(double score, double threshold) { return micro(score) >= micro(threshold); }

PredictedPairs classify_pairs(std::span<const SimilarityEdge> edges,
                              const std::map<std::string, double>& thresholds) {
  PredictedPairs out;
  for (const auto& e : edges) {
    const auto it = thresholds.find(e.method);
    if (it != thresholds.end() && meets_threshold(e.score, it->second)) {
      out.emplace(std::min(e.id_a, e.id_b), std::max(e.id_a, e.id_b));
    }
  }
  return out;
}

ClassificationMetrics classification_metrics(const PredictedPairs& predicted,
                                             const GroundTruth& truth) {
  ClassificationMetrics m;
  m.predicted = predicted.size();
  m.truth_pairs = truth.truth_pair_count();
  std::set<FileId> detected;
  for (const auto& [a, b] : predicted) {
    if (truth.same_group(a, b)) {
      ++m.true_positives;
      detected.insert(a);
      detected.insert(b);
    }
  }
  if (m.predicted) m.precision = static_cast<double>(m.true_positives) / static_cast<double>(m.predicted);
  if (m.truth_pairs) m.recall = static_cast<double>(m.true_positives) / static_cast<double>(m.truth_pairs);
  if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  for (const auto& id : truth.duplicate_files()) {
    if (!detected.contains(id)) ++m.fn_count;
  }
  return m;
}

SweepResult sweep_threshold(std::span<const SimilarityEdge> edges, const GroundTruth& truth,
                            double precision_floor, double emit_floor) {
  // Best score per pair, as (micro score, is duplicate), ascending.
  std::map<FilePair, std::int64_t> best;
  for (const auto& e : edges) {
    FilePair key{std::min(e.id_a, e.id_b), std::max(e.id_a, e.id_b)};
    auto [it, fresh] = best.emplace(std::move(key), micro(e.score));
    if (!fresh) it->second = std::max(it->second, micro(e.score));
  }
  std::vector<std::pair<std::int64_t, bool>> scored;
  scored.reserve(best.size());
  for (const auto& [pair, s] : best) scored.emplace_back(s, truth.same_group(pair.first, pair.second));
  std::sort(scored.begin(), scored.end());
  // tp_above[i] = true positives among scored[i..]
  std::vector<std::size_t> tp_above(scored.size() + 1, 0);
  for (std::size_t i = scored.size(); i-- > 0;) tp_above[i] = tp_above[i + 1] + scored[i].second;

  const std::size_t truth_pairs = truth.truth_pair_count();
  const auto first = static_cast<int>(std::ceil(emit_floor * 1000.0 - 1e-9));
  SweepResult result;
  for (int step = std::max(first, 0); step <= 1000; ++step) {
    const std::int64_t cut = static_cast<std::int64_t>(step) * 1000;
    const auto idx = static_cast<std::size_t>(
        std::lower_bound(scored.begin(), scored.end(), std::pair<std::int64_t, bool>{cut, false}) -
        scored.begin());
    const std::size_t predicted = scored.size() - idx;
    const std::size_t tp = tp_above[idx];
    const double precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    const double recall = truth_pairs ? static_cast<double>(tp) / static_cast<double>(truth_pairs) : 0.0;
    const double threshold = step / 1000.0;
    result.curve.push_back({threshold, precision, recall});
    if (!result.reachable && precision >= precision_floor) {
      result.reachable = true;
      result.threshold = threshold;
    }
  }
  if (!result.reachable) result.threshold = 1.0;
  return result;
}

}  // namespace mididedup
