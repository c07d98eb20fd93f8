/// @file
/// @brief Stage commands behind the `mididedup` CLI.
///
/// Every stage reads and writes fixed file names inside the output
/// directory: index.json, features.json, edges.csv, report.json,
/// filter_list.txt and clusters.json. `run_dedup` chains the stages through
/// those same files, so its outputs match running them one by one.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mididedup/cluster.h"
#include "mididedup/eval.h"
#include "mididedup/features.h"
#include "mididedup/midi.h"

namespace mididedup {

/// Bad flags or configuration (exit code 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unusable input data (exit code 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EmbeddingSource {
  std::string label;  // edges are tagged "embedding" or "embedding:<label>"
  std::filesystem::path manifest;
};

inline constexpr double kDefaultEmitFloor = 0.5;
inline constexpr double kConservativeThreshold = 0.99;

struct PipelineConfig {
  std::vector<std::string> methods{"hash", "entropy", "chroma_dtw"};
  std::map<std::string, double> thresholds;  // fallback when not swept
  double emit_floor = kDefaultEmitFloor;
  std::size_t prefilter_k = 250;
  double precision_floor = kDefaultPrecisionFloor;
  bool conservative = false;

  std::filesystem::path corpus_root;
  std::filesystem::path out_dir = "out";
  std::filesystem::path ground_truth;  // ground_truth.json; empty = none
  bool ground_truth_from_paths = false;
  std::filesystem::path bench;  // bench.json, enables per-profile recall
  std::vector<EmbeddingSource> embeddings;

  std::uint64_t seed = 0;
  int threads = 1;
  double max_parse_failure_rate = 0.05;

  /// Method names including one entry per embedding source.
  std::vector<std::string> method_set() const;
  double threshold_for(const std::string& method) const;
  bool has_ground_truth() const { return !ground_truth.empty() || ground_truth_from_paths; }

  /// Throws UsageError.
  void validate() const;
};

/// Fields absent from the JSON keep their defaults.
PipelineConfig config_from_json(std::string_view text, PipelineConfig base = {});

struct PipelinePaths {
  std::filesystem::path dir;
  std::filesystem::path index() const { return dir / "index.json"; }
  std::filesystem::path features() const { return dir / "features.json"; }
  std::filesystem::path edges() const { return dir / "edges.csv"; }
  std::filesystem::path report() const { return dir / "report.json"; }
  std::filesystem::path filter_list() const { return dir / "filter_list.txt"; }
  std::filesystem::path clusters() const { return dir / "clusters.json"; }
};

CorpusIndex run_scan(const PipelineConfig& config);
std::vector<FileFeatures> run_features(const PipelineConfig& config);
std::vector<SimilarityEdge> run_detect(const PipelineConfig& config);

struct MethodReport {
  RetrievalResult retrieval;
  SweepResult sweep;
  ClassificationMetrics at_threshold;
};

struct EvalReport {
  std::map<std::string, MethodReport> methods;
  std::map<std::string, double> thresholds_used;  // union members only
  ClassificationMetrics union_metrics;
};

EvalReport run_eval(const PipelineConfig& config);
FilterCounts run_cluster(const PipelineConfig& config);

struct DedupSummary {
  std::size_t files = 0;
  std::size_t failed = 0;
  std::size_t edges = 0;
  FilterCounts counts;
  std::optional<EvalReport> report;
};

DedupSummary run_dedup(const PipelineConfig& config);

/// Reads thresholds_used from a report.json.
std::map<std::string, double> thresholds_from_report(const std::filesystem::path& report);

// --- synthetic benchmark ----------------------------------------------------

/// Random diatonic piece over 8-32 bars with 1-6 tracks.
Piece generate_base_piece(std::uint64_t seed, const FileId& id);

enum class VariantProfile {
  kExact,          // track order and metadata only; same encoding hash
  kRulePreserving, // position-preserving edits; same beat-position entropy
  kFull,           // whole variation grammar
};
std::string_view profile_name(VariantProfile p);

/// Variant i of a base uses profile i mod 3.
VariantProfile profile_for_variant(int index);

struct BenchSummary {
  std::size_t files = 0;
  std::size_t groups = 0;
};

/// Writes <out>/corpus/gNNNN/{base,vK}.mid, <out>/bench.json and
/// <out>/ground_truth.json.
BenchSummary run_synth_bench(int n_bases, int variants_per_base, std::uint64_t seed,
                             const std::filesystem::path& out_dir, int threads = 1);

std::string read_text_file(const std::filesystem::path& p);
void write_text_file(const std::filesystem::path& p, std::string_view text);

}  // namespace mididedup
