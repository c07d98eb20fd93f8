/// @file
/// @brief Ground truth, retrieval metrics, pair classification and threshold selection.

#pragma once

#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mididedup/edges.h"

namespace mididedup {

struct GroundTruth {
  std::map<std::string, std::vector<FileId>> groups;  // key -> sorted ids
  std::unordered_map<FileId, std::string> group_of;

  bool same_group(const FileId& a, const FileId& b) const;
  std::set<FileId> duplicate_files() const;  // members of groups of size >= 2
  std::size_t truth_pair_count() const;
};

/// Title normalization: drop the extension and one trailing ".N" (decimal),
/// fold ASCII case, trim whitespace. The artist is the case-folded parent
/// directory name. Group key is "artist/title".
std::string title_key(std::string_view id);

/// Throws std::invalid_argument for an id without a directory component.
GroundTruth ground_truth_from_paths(std::span<const FileId> ids);
GroundTruth ground_truth_from_groups(std::map<std::string, std::vector<FileId>> groups);

/// Keeps only ids in `present`; groups left empty are removed.
GroundTruth restrict_ground_truth(const GroundTruth& truth, std::span<const FileId> present);

std::string ground_truth_to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(std::string_view text);

// --- retrieval --------------------------------------------------------------

/// nDCG over a full ranking with binary relevance. `ranks` are the 1-based
/// positions of every relevant item.
double ndcg_from_ranks(std::span<const std::size_t> ranks);
double ndcg_all(std::span<const FileId> ranking, const std::set<FileId>& relevant);

/// 1 / rank of the first relevant item, 0 when none is relevant.
double reciprocal_rank(std::span<const FileId> ranking, const std::set<FileId>& relevant);
double mrr(std::span<const std::size_t> first_relevant_ranks);

/// Ranks all candidates except `query` by descending score, ties by id.
std::vector<FileId> rank_candidates(std::span<const FileId> ids, std::span<const double> scores,
                                    std::size_t query);

using PairScorer = std::function<double(std::size_t query, std::size_t candidate)>;

struct RetrievalResult {
  double ndcg_mean = 0.0;
  double mrr_mean = 0.0;
  std::size_t queries = 0;
};

/// Every id with at least one duplicate in `ids` is a query against the
/// rest of `ids` (sorted, unique).
RetrievalResult evaluate_retrieval(std::span<const FileId> ids, const GroundTruth& truth,
                                   const PairScorer& score, int threads = 1);

// --- classification ---------------------------------------------------------

using FilePair = std::pair<FileId, FileId>;  // first < second
using PredictedPairs = std::set<FilePair>;

/// Scores and thresholds compared exactly at micro-unit resolution.
bool meets_threshold(double score, double threshold);

/// A pair is predicted when any edge whose method has a threshold reaches it.
PredictedPairs classify_pairs(std::span<const SimilarityEdge> edges,
                              const std::map<std::string, double>& thresholds);

struct ClassificationMetrics {
  double precision = 0.0;  // 0 when nothing is predicted
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t fn_count = 0;  // duplicate files not touched by any true positive
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t truth_pairs = 0;
};

ClassificationMetrics classification_metrics(const PredictedPairs& predicted,
                                             const GroundTruth& truth);

inline constexpr double kDefaultPrecisionFloor = 0.9;
inline constexpr double kThresholdStep = 0.001;

struct CurvePoint {
  double threshold;
  double precision;
  double recall;
};

struct SweepResult {
  double threshold = 1.0;
  bool reachable = false;
  std::vector<CurvePoint> curve;
};

/// Scans thresholds emit_floor, emit_floor + 0.001, ..., 1.0 and returns the
/// smallest whose pair precision reaches `precision_floor`. Edges should all
/// belong to one method. When no grid point qualifies the threshold is 1.0
/// and `reachable` is false.
SweepResult sweep_threshold(std::span<const SimilarityEdge> edges, const GroundTruth& truth,
                            double precision_floor, double emit_floor);

}  // namespace mididedup
