/// @file
/// @brief Per-file duplicate-detection features and their pairwise similarities.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mididedup/midi.h"
#include "mididedup/octuple.h"

namespace mididedup {

// --- encoding hash ----------------------------------------------------------

using Md5Digest = std::array<std::uint8_t, 16>;

Md5Digest md5(std::string_view bytes);
std::string to_hex(const Md5Digest& digest);

struct HashSignature {
  Md5Digest digest{};
  FileId id;
};

HashSignature hash_signature(const TokenSequence& seq);

inline double hash_similarity(const HashSignature& a, const HashSignature& b) {
  return a.digest == b.digest ? 1.0 : 0.0;
}

// --- beat position entropy --------------------------------------------------

struct PositionHistogram {
  std::array<std::int64_t, kPositionsPerBar> counts{};
  std::int64_t total = 0;
};

/// Every note, drums included, adds one to its folded sixteenth slot.
PositionHistogram beat_position_histogram(const Piece& piece);

struct EntropyValue {
  double bits = 0.0;
  bool empty = false;  // no notes; never matched by the entropy detector
};

EntropyValue beat_position_entropy(const PositionHistogram& h);

inline constexpr double kEntropyMatchTolerance = 1e-9;

/// max(0, 1 - |e1 - e2|)
double entropy_similarity(double e1, double e2);
inline bool entropies_match(double e1, double e2) {
  return (e1 > e2 ? e1 - e2 : e2 - e1) <= kEntropyMatchTolerance;
}

// --- pitch histograms and the KL prefilter ----------------------------------

inline constexpr double kPitchSmoothing = 1e-6;
inline constexpr int kDefaultPrefilterK = 250;

struct PitchHistogram {
  std::array<std::int64_t, 128> raw_counts{};
  std::array<double, 128> probs{};
};

/// Counts non-drum notes per pitch, normalizes, adds kPitchSmoothing to
/// every bin and renormalizes. An empty piece yields the uniform histogram.
PitchHistogram pitch_histogram(const Piece& piece);
PitchHistogram pitch_histogram_from_counts(const std::array<std::int64_t, 128>& counts);

/// KL(p || q) in nats.
double kl_divergence(const PitchHistogram& p, const PitchHistogram& q);

/// Indices of the `k` entries of `corpus` closest to corpus[query] by
/// KL(query || candidate), excluding the query itself. `corpus` must be in
/// id order; equal divergences keep id order.
std::vector<std::size_t> prefilter_topk(std::size_t query, std::span<const PitchHistogram> corpus,
                                        std::size_t k = kDefaultPrefilterK);

// --- chroma DTW -------------------------------------------------------------

/// Binary pitch-class presence, one frame per sixteenth note. Bit c of a
/// frame is set when a non-drum note of pitch class c sounds at the frame's
/// start. Trailing silent frames are trimmed.
struct Chromagram {
  std::vector<std::uint16_t> frames;

  std::size_t length() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  bool at(std::size_t t, int pc) const { return (frames[t] >> pc) & 1u; }
  friend bool operator==(const Chromagram&, const Chromagram&) = default;
};

Chromagram chromagram(const Piece& piece);

/// Pitch class with the highest total occupancy; lowest class on ties.
int modal_pitch_class(const Chromagram& c);

/// Rotates every frame's pitch classes up by `semitones` (mod 12).
Chromagram rotate_pitch_classes(const Chromagram& c, int semitones);

/// Rotates `other` so its modal pitch class lands on the modal class of `ref`.
Chromagram align_transpose(const Chromagram& ref, const Chromagram& other);

/// 1 - cosine between two binary frames, with cosine(x, 0) = 0 and
/// cosine(0, 0) = 1. Values are snapped to multiples of 2^-24 so that path
/// sums are exact and independent of summation order.
double frame_cost(std::uint16_t a, std::uint16_t b);

struct DtwResult {
  double distance = 1.0;
  std::size_t path_length = 0;
  bool degenerate = false;
};

/// Steps (1,0), (0,1), (1,1). Minimises the accumulated frame cost; among
/// optimal paths the shortest is taken. Returns cost / path length in [0,1].
/// An empty input gives distance 1 with `degenerate` set.
DtwResult dtw_distance(const Chromagram& a, const Chromagram& b);

/// 1 - dtw(ref, align_transpose(ref, other))
double chroma_similarity(const Chromagram& ref, const Chromagram& other);
double chroma_similarity(const Piece& ref, const Piece& other);

// --- embeddings -------------------------------------------------------------

/// Plain cosine. Throws std::invalid_argument on dimension mismatch or a
/// zero vector.
double embedding_cosine(std::span<const float> u, std::span<const float> v);
inline double cosine_to_score(double cosine) { return (cosine + 1.0) / 2.0; }

}  // namespace mididedup
