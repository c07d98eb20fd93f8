/// @file
/// @brief Per-file feature cache (`features.json`) and detector orchestration.

#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mididedup/detectors.h"
#include "mididedup/edges.h"

namespace mididedup {

struct FileFeatures {
  FileId id;
  Md5Digest md5{};
  EntropyValue entropy;
  std::size_t note_count = 0;
  std::array<std::int64_t, 128> pitch_counts{};
  Chromagram chroma;

  friend bool operator==(const FileFeatures&, const FileFeatures&) = default;
};

FileFeatures extract_features(const Piece& piece);

/// JSON array of {id, md5_hex, entropy_bits, empty, note_count,
/// pitch_hist_sparse: [[pitch, count], ...], chroma}. `chroma` packs each
/// frame as three lowercase hex digits (bit c = pitch class c).
std::string features_to_json(std::span<const FileFeatures> features);
std::vector<FileFeatures> features_from_json(std::string_view text);

struct DetectorParams {
  double emit_floor = 0.5;
  std::size_t prefilter_k = kDefaultPrefilterK;
  int threads = 1;
};

/// Edge stream for one rule-based method over features sorted by id.
/// hash and entropy emit score-1 edges for exact matches only; chroma_dtw
/// scores the KL-prefiltered candidate pairs and keeps scores >= emit_floor.
/// Embedding edges come from pairwise_embedding_edges().
std::vector<SimilarityEdge> run_detector(Method method, std::span<const FileFeatures> features,
                                         const DetectorParams& params);

}  // namespace mididedup
