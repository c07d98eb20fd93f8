/// @file
/// @brief MIDI variation grammar for synthesizing labelled hard duplicates.
///
/// Kinds are applied in the order of AugmentKind. Kind k draws from its own
/// stream CounterRng(derive_seed(spec.rng_seed, k)):
///
///   1. when fire_probability < 1, one bernoulli(fire_probability) draw
///      decides whether the kind fires;
///   2. then the kind's own draws, in this order:
///      - inst_drop:       d = uniform_int(1, (G-1)/2) over the G track groups,
///                         then a partial Fisher-Yates pick of d groups
///                         (for i < d: swap(i, uniform_int(i, G-1)))
///      - bar_drop:        bernoulli(0.15) per (group, bar), groups in order,
///                         bars 0..last bar of the piece
///      - note_drop:       bernoulli(0.15) per note in canonical note order
///      - onset_shift:     uniform_int(-max, max) per note
///      - duration_shift:  uniform_int(-max, max) per note
///      - velocity_shift:  uniform_int(-max, max) per note
///      - octave_shift:    uniform_int(0, 4) per non-drum group, indexing
///                         {-24, -12, 0, 12, 24}
///      - pitch_transpose: uniform_int(-6, 6) unless fixed
///      - inst_mapping:    uniform_int(0, 126) per non-drum group, skipping the
///                         group's current program
///      - inst_order:      Fisher-Yates over the distinct track indices
///                         (i from n-1 down to 1: swap(i, uniform_int(0, i)))
///      - bar_shift:       uniform_int(1, 4) unless fixed
///
/// A track group is a distinct (track_index, program, is_drum) triple, in
/// ascending order. Notes are re-sorted canonically after every kind.

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mididedup/midi.h"

namespace mididedup {

enum class AugmentKind {
  kInstDrop,
  kBarDrop,
  kNoteDrop,
  kOnsetShift,
  kDurationShift,
  kVelocityShift,
  kOctaveShift,
  kPitchTranspose,
  kInstMapping,
  kInstOrder,
  kBarShift,
};

inline constexpr int kAugmentKindCount = 11;

std::string_view augment_kind_name(AugmentKind kind);
AugmentKind parse_augment_kind(std::string_view name);
std::set<AugmentKind> all_augment_kinds();

inline constexpr double kBarDropRate = 0.15;
inline constexpr double kNoteDropRate = 0.15;

struct AugmentationSpec {
  std::uint64_t rng_seed = 0;
  std::set<AugmentKind> enabled;
  double fire_probability = 1.0;

  int onset_shift_max = 2;     // sixteenths
  int duration_shift_max = 4;  // sixteenths
  int velocity_shift_max = 3;
  std::optional<int> pitch_transpose;  // fixed semitones, else drawn
  std::optional<int> bar_shift;        // fixed bars, else drawn

  /// Throws std::invalid_argument when a parameter leaves its allowed range.
  void validate() const;
};

struct AppliedAugmentation {
  AugmentKind kind;
  std::vector<std::pair<std::string, std::int64_t>> params;
};

struct AugmentResult {
  Piece piece;
  std::vector<AppliedAugmentation> applied;
};

class DegenerateVariant : public std::runtime_error {
 public:
  DegenerateVariant() : std::runtime_error("degenerate variant") {}
};

/// Throws std::invalid_argument for an empty input piece and
/// DegenerateVariant when the result has no notes.
AugmentResult apply_augmentation(const Piece& piece, const AugmentationSpec& spec);

struct Variant {
  Piece piece;
  std::uint64_t seed = 0;
  std::vector<AppliedAugmentation> applied;
};

/// `n` variants of `piece`, variant i seeded from derive_seed(seed, i) and
/// reseeded with derive_seed(that, attempt) whenever it degenerates. The
/// template's enabled set and probabilities apply; its seed is ignored.
/// Variant ids are "<piece id>#v<i>".
std::vector<Variant> make_variant_set(const Piece& piece, int n, std::uint64_t seed,
                                      const AugmentationSpec& templ);

/// Every kind enabled, each firing with probability 0.5.
AugmentationSpec full_grammar();

inline constexpr std::size_t kSegmentTokens = 1024;

/// Two distinct 1024-token chunks of the piece's Octuple sequence, each
/// mapped back to the notes it came from. Throws std::invalid_argument
/// ("insufficient length") below two full chunks.
std::pair<Piece, Piece> neighbor_segments(const Piece& piece, std::uint64_t seed);

}  // namespace mididedup
