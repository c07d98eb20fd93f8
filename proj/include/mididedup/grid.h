#pragma once

#include <vector>

#include "mididedup/midi.h"
#include "mididedup/octuple.h"

namespace mididedup {

/// Bar grid derived from a piece's time-signature map.
class MeterGrid {
 public:
  explicit MeterGrid(const Piece& piece);

  GridPosition locate(Tick tick) const;
  const TimeSignature& meter_at(Tick tick) const { return segment_at(tick).meter; }

  /// First tick of global bar `bar` (rounded down when the bar line falls
  /// between ticks).
  Tick bar_start(std::int64_t bar) const;

 private:
  struct Segment {
    Tick start;
    TimeSignature meter;
    std::int64_t bar_base;
  };
  // One bar of `s` in units of tick/denominator.
  std::int64_t bar_units(const Segment& s) const {
    return 4 * static_cast<std::int64_t>(tpq_) * s.meter.numerator;
  }
  const Segment& segment_at(Tick tick) const;

  std::int32_t tpq_;
  std::vector<Segment> segments_;
};

class TempoLookup {
 public:
  explicit TempoLookup(const Piece& piece) : tempos_(piece.tempo_map) {}
  int bpm_at(Tick tick) const;

 private:
  std::vector<TempoChange> tempos_;
};

}  // namespace mididedup
