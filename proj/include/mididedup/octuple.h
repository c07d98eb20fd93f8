/// @file
/// @brief Canonical Octuple-style tokens and their hash preimage.
///
/// Serialization format (one token per line, LF separated, no trailing LF):
///
///     bar,position,program,pitch,duration,velocity,tempo,ts_numerator,ts_denominator
///
/// position is the onset in sixteenths within the bar folded into 0..15,
/// duration is in sixteenths clamped to 1..64, program 128 marks drums and
/// tempo is the active bpm rounded to the nearest integer. Tokens are sorted
/// by (bar, position, program, pitch, duration, velocity, tempo, meter) with
/// exact duplicates removed. These bytes are what the hash detector digests.

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "mididedup/midi.h"

namespace mididedup {

inline constexpr int kDrumProgram = 128;
inline constexpr int kPositionsPerBar = 16;
inline constexpr int kMaxDurationSixteenths = 64;

struct OctupleToken {
  std::int64_t bar = 0;
  int position = 0;
  int program = 0;
  int pitch = 0;
  int duration = 1;
  int velocity = 1;
  int tempo_bpm = 120;
  int ts_numerator = 4;
  int ts_denominator = 4;

  friend auto operator<=>(const OctupleToken&, const OctupleToken&) = default;
};

struct TokenSequence {
  FileId source_id;
  std::vector<OctupleToken> tokens;
};

/// Bar index and folded sixteenth slot of a tick on the piece's meter grid.
/// Each time-signature change starts a new bar. The onset is rounded to the
/// nearest sixteenth within its bar (halves round up); a result landing on
/// the bar line belongs to slot 0 of the next bar.
struct GridPosition {
  std::int64_t bar = 0;
  int position = 0;
};
GridPosition grid_position(const Piece& piece, Tick tick);

/// round(ticks in sixteenths), halves up.
std::int64_t ticks_to_sixteenths(Tick ticks, std::int32_t ticks_per_quarter);

/// Length of one bar of `meter`, in sixteenths, as an exact fraction.
struct BarLength {
  std::int64_t sixteenths_num;
  std::int64_t sixteenths_den;
};
BarLength bar_length(const TimeSignature& meter);

OctupleToken tokenize_note(const Piece& piece, const NoteEvent& note);
TokenSequence encode_octuple(const Piece& piece);

/// Like encode_octuple, additionally returning for each token the indices
/// of the notes (into piece.notes) that collapsed onto it.
TokenSequence encode_octuple(const Piece& piece, std::vector<std::vector<std::size_t>>& sources);

std::string serialize_tokens(const TokenSequence& seq);

}  // namespace mididedup
