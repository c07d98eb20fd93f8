/// @file
/// @brief Standard MIDI File parsing into a beat-domain note model.
///
/// All positions are kept as integer ticks relative to the piece's
/// ticks-per-quarter resolution, so a beat position is the exact rational
/// `ticks / ticks_per_quarter`. Nothing downstream rounds until it quantizes.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mididedup {

using FileId = std::string;
using Tick = std::int64_t;

/// Beat position as an exact fraction of a quarter note.
struct Beat {
  Tick ticks = 0;
  std::int32_t ticks_per_quarter = 1;

  double value() const { return static_cast<double>(ticks) / ticks_per_quarter; }
  friend bool operator==(const Beat&, const Beat&) = default;
};

struct NoteEvent {
  Tick onset = 0;     // ticks from piece start
  Tick duration = 1;  // ticks, > 0
  int pitch = 60;
  int velocity = 100;
  int program = 0;
  bool is_drum = false;
  int track_index = 0;

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
  friend auto operator<=>(const NoteEvent&, const NoteEvent&) = default;
};

struct TempoChange {
  Tick tick = 0;
  double bpm = 120.0;
  friend bool operator==(const TempoChange&, const TempoChange&) = default;
};

struct TimeSignature {
  Tick tick = 0;
  int numerator = 4;
  int denominator = 4;
  friend bool operator==(const TimeSignature&, const TimeSignature&) = default;
};

struct Piece {
  FileId id;
  std::vector<NoteEvent> notes;
  std::vector<TempoChange> tempo_map;
  std::vector<TimeSignature> time_signatures;
  std::int32_t ticks_per_quarter = 480;

  Beat onset_beat(const NoteEvent& n) const { return {n.onset, ticks_per_quarter}; }
  Beat duration_beats(const NoteEvent& n) const { return {n.duration, ticks_per_quarter}; }

  friend bool operator==(const Piece&, const Piece&) = default;
};

/// Thrown for malformed or unsupported input; `offset()` is the byte
/// position at which parsing stopped.
class MidiParseError : public std::runtime_error {
 public:
  MidiParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

Piece parse_midi(std::span<const std::uint8_t> bytes, const FileId& id);
Piece parse_midi_file(const std::filesystem::path& path, const FileId& id);

/// Sorts notes into the canonical order and inserts the default tempo
/// (120 bpm) and meter (4/4) at tick 0 when missing.
void normalize(Piece& piece);

inline std::size_t total_note_count(const Piece& piece) { return piece.notes.size(); }

/// Line-oriented text form of a Piece. Reading a dump reproduces the piece
/// field for field.
std::string dump_piece(const Piece& piece);
Piece read_piece_dump(std::string_view text);

struct MidiTrackMeta {
  std::string name;
};

/// Writes a format-1 file: a conductor track with tempo and meter, then one
/// track per distinct (track_index, program, is_drum) group in track_index
/// order. Drums go to channel 10. `meta`, when given, adds a name event per
/// written note track (used to fabricate metadata-only differences).
std::vector<std::uint8_t> write_midi(const Piece& piece, std::span<const MidiTrackMeta> meta = {});

enum class ParseStatus { kOk, kFailed };

struct CorpusEntry {
  FileId id;
  std::uintmax_t byte_size = 0;
  std::size_t note_count = 0;
  ParseStatus status = ParseStatus::kFailed;
  std::string error;
};

struct CorpusIndex {
  std::filesystem::path root;
  std::vector<CorpusEntry> entries;  // sorted by id

  std::size_t failed_count() const;
};

/// Recursively finds `.mid`/`.midi` files (any case) and parses each one.
/// Parse failures are recorded in the index rather than thrown.
/// Throws std::runtime_error when `root` cannot be read.
CorpusIndex scan_corpus(const std::filesystem::path& root, int threads = 1);

/// Relative ids of all MIDI files under root, sorted.
std::vector<FileId> list_midi_files(const std::filesystem::path& root);

std::string index_to_json(const CorpusIndex& index);
CorpusIndex index_from_json(std::string_view text, const std::filesystem::path& root);

}  // namespace mididedup
