#include "mididedup/octuple.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mididedup/grid.h"

namespace mididedup {

std::int64_t ticks_to_sixteenths(Tick ticks, std::int32_t ticks_per_quarter) {
  // round(4 * ticks / tpq), halves up
  return (8 * ticks + ticks_per_quarter) / (2 * static_cast<std::int64_t>(ticks_per_quarter));
}

BarLength bar_length(const TimeSignature& meter) {
  return {16 * static_cast<std::int64_t>(meter.numerator), meter.denominator};
}

MeterGrid::MeterGrid(const Piece& piece) : tpq_(piece.ticks_per_quarter) {
  std::int64_t bar_base = 0;
  const auto& meters = piece.time_signatures;
  for (std::size_t i = 0; i < meters.size(); ++i) {
    Segment seg{meters[i].tick, meters[i], bar_base};
    segments_.push_back(seg);
    if (i + 1 < meters.size()) {
      const std::int64_t span = (meters[i + 1].tick - meters[i].tick) * seg.meter.denominator;
      const std::int64_t bar = bar_units(seg);
      bar_base += (span + bar - 1) / bar;
    }
  }
  if (segments_.empty()) segments_.push_back(Segment{0, TimeSignature{}, 0});
}

const MeterGrid::Segment& MeterGrid::segment_at(Tick tick) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), tick,
                             [](Tick t, const Segment& s) { return t < s.start; });
  return it == segments_.begin() ? segments_.front() : *(it - 1);
}

GridPosition MeterGrid::locate(Tick tick) const {
  const Segment& seg = segment_at(tick);
  const std::int64_t den = seg.meter.denominator;
  // Work in units of tick/denominator so odd meters stay exact.
  const std::int64_t offset = (tick - seg.start) * den;
  const std::int64_t bar = bar_units(seg);
  std::int64_t bar_index = offset / bar;
  const std::int64_t within = offset % bar;
  const std::int64_t sixteenth_units = static_cast<std::int64_t>(tpq_) * den;
  std::int64_t pos = (8 * within + sixteenth_units) / (2 * sixteenth_units);
  if (pos * den >= 16 * static_cast<std::int64_t>(seg.meter.numerator)) {
    ++bar_index;
    pos = 0;
  }
  return {seg.bar_base + bar_index, static_cast<int>(pos % kPositionsPerBar)};
}

Tick MeterGrid::bar_start(std::int64_t bar) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), bar,
                             [](std::int64_t b, const Segment& s) { return b < s.bar_base; });
  const Segment& seg = it == segments_.begin() ? segments_.front() : *(it - 1);
  return seg.start + (bar - seg.bar_base) * bar_units(seg) / seg.meter.denominator;
}

int TempoLookup::bpm_at(Tick tick) const {
  auto it = std::upper_bound(tempos_.begin(), tempos_.end(), tick,
                             [](Tick t, const TempoChange& c) { return t < c.tick; });
  const double bpm = it == tempos_.begin() ? 120.0 : (it - 1)->bpm;
  return static_cast<int>(std::lround(bpm));
}

GridPosition grid_position(const Piece& piece, Tick tick) { return MeterGrid(piece).locate(tick); }

namespace {

OctupleToken make_token(const Piece& piece, const MeterGrid& grid, const TempoLookup& tempo,
                        const NoteEvent& note) {
  OctupleToken tok;
  const GridPosition gp = grid.locate(note.onset);
  tok.bar = gp.bar;
  tok.position = gp.position;
  tok.program = note.is_drum ? kDrumProgram : note.program;
  tok.pitch = note.pitch;
  tok.duration = static_cast<int>(std::clamp<std::int64_t>(
      ticks_to_sixteenths(note.duration, piece.ticks_per_quarter), 1, kMaxDurationSixteenths));
  tok.velocity = note.velocity;
  tok.tempo_bpm = tempo.bpm_at(note.onset);
  const TimeSignature& meter = grid.meter_at(note.onset);
  tok.ts_numerator = meter.numerator;
  tok.ts_denominator = meter.denominator;
  return tok;
}

}  // namespace

OctupleToken tokenize_note(const Piece& piece, const NoteEvent& note) {
  return make_token(piece, MeterGrid(piece), TempoLookup(piece), note);
}

TokenSequence encode_octuple(const Piece& piece, std::vector<std::vector<std::size_t>>& sources) {
  const MeterGrid grid(piece);
  const TempoLookup tempo(piece);
  std::vector<OctupleToken> raw;
  raw.reserve(piece.notes.size());
  for (const auto& n : piece.notes) raw.push_back(make_token(piece, grid, tempo, n));

  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });

  TokenSequence seq;
  seq.source_id = piece.id;
  sources.clear();
  for (std::size_t i : order) {
    if (!seq.tokens.empty() && seq.tokens.back() == raw[i]) {
      sources.back().push_back(i);
      continue;
    }
    seq.tokens.push_back(raw[i]);
    sources.push_back({i});
  }
  return seq;
}

TokenSequence encode_octuple(const Piece& piece) {
  std::vector<std::vector<std::size_t>> unused;
  return encode_octuple(piece, unused);
}

std::string serialize_tokens(const TokenSequence& seq) {
  std::string out;
  out.reserve(seq.tokens.size() * 32);
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    const auto& t = seq.tokens[i];
    if (i) out += '\n';
    out += std::to_string(t.bar);
    for (int v : {t.position, t.program, t.pitch, t.duration, t.velocity, t.tempo_bpm,
                  t.ts_numerator, t.ts_denominator}) {
      out += ',';
      out += std::to_string(v);
    }
  }
  return out;
}

}  // namespace mididedup
