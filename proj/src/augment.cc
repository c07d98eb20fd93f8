#include "mididedup/augment.h"

#include <algorithm>
#include <array>
#include <map>
#include <tuple>

#include "mididedup/grid.h"
#include "mididedup/octuple.h"
#include "mididedup/rng.h"

namespace mididedup {
namespace {

constexpr std::array<std::string_view, kAugmentKindCount> kKindNames = {
    "inst_drop",      "bar_drop",     "note_drop",    "onset_shift",
    "duration_shift", "velocity_shift", "octave_shift", "pitch_transpose",
    "inst_mapping",   "inst_order",   "bar_shift",
};

constexpr std::array<int, 5> kOctaveChoices = {-24, -12, 0, 12, 24};

using GroupKey = std::tuple<int, int, bool>;  // track_index, program, is_drum

GroupKey group_of(const NoteEvent& n) { return {n.track_index, n.program, n.is_drum}; }

std::vector<GroupKey> groups_of(const Piece& piece) {
  std::set<GroupKey> keys;
  for (const auto& n : piece.notes) keys.insert(group_of(n));
  return {keys.begin(), keys.end()};
}

void rescale(Piece& piece, std::int32_t factor) {
  if (factor == 1) return;
  piece.ticks_per_quarter *= factor;
  for (auto& n : piece.notes) {
    n.onset *= factor;
    n.duration *= factor;
  }
  for (auto& t : piece.tempo_map) t.tick *= factor;
  for (auto& m : piece.time_signatures) m.tick *= factor;
}

void ensure_sixteenth_grid(Piece& piece) {
  if (piece.ticks_per_quarter % 4 != 0) rescale(piece, 4);
}

using Params = std::vector<std::pair<std::string, std::int64_t>>;

Params inst_drop(Piece& piece, CounterRng& rng) {
  auto groups = groups_of(piece);
  const int g = static_cast<int>(groups.size());
  const int max_drop = (g - 1) / 2;
  if (max_drop < 1) return {{"dropped_groups", 0}};
  const int d = rng.uniform_int(1, max_drop);
  for (int i = 0; i < d; ++i) std::swap(groups[i], groups[rng.uniform_int(i, g - 1)]);
  const std::set<GroupKey> dropped(groups.begin(), groups.begin() + d);
  std::erase_if(piece.notes, [&](const NoteEvent& n) { return dropped.contains(group_of(n)); });
  return {{"dropped_groups", d}, {"groups", g}};
}

Params bar_drop(Piece& piece, CounterRng& rng) {
  const MeterGrid grid(piece);
  std::vector<std::int64_t> bars(piece.notes.size());
  std::int64_t last_bar = -1;
  for (std::size_t i = 0; i < piece.notes.size(); ++i) {
    bars[i] = grid.locate(piece.notes[i].onset).bar;
    last_bar = std::max(last_bar, bars[i]);
  }
  std::set<std::pair<GroupKey, std::int64_t>> dropped;
  for (const auto& g : groups_of(piece)) {
    for (std::int64_t b = 0; b <= last_bar; ++b) {
      if (rng.bernoulli(kBarDropRate)) dropped.insert({g, b});
    }
  }
  std::vector<NoteEvent> kept;
  for (std::size_t i = 0; i < piece.notes.size(); ++i) {
    if (!dropped.contains({group_of(piece.notes[i]), bars[i]})) kept.push_back(piece.notes[i]);
  }
  const auto removed = static_cast<std::int64_t>(piece.notes.size() - kept.size());
  piece.notes = std::move(kept);
  return {{"dropped_bars", static_cast<std::int64_t>(dropped.size())}, {"dropped_notes", removed}};
}

Params note_drop(Piece& piece, CounterRng& rng) {
  std::vector<NoteEvent> kept;
  for (const auto& n : piece.notes) {
    if (!rng.bernoulli(kNoteDropRate)) kept.push_back(n);
  }
  const auto removed = static_cast<std::int64_t>(piece.notes.size() - kept.size());
  piece.notes = std::move(kept);
  return {{"dropped_notes", removed}};
}

Params onset_shift(Piece& piece, CounterRng& rng, int max_shift) {
  ensure_sixteenth_grid(piece);
  const Tick step = piece.ticks_per_quarter / 4;
  std::int64_t moved = 0;
  for (auto& n : piece.notes) {
    const int s = rng.uniform_int(-max_shift, max_shift);
    const std::int64_t q = std::max<std::int64_t>(0, ticks_to_sixteenths(n.onset, piece.ticks_per_quarter) + s);
    const Tick onset = q * step;
    moved += onset != n.onset;
    n.onset = onset;
  }
  return {{"max", max_shift}, {"moved_notes", moved}};
}

Params duration_shift(Piece& piece, CounterRng& rng, int max_shift) {
  ensure_sixteenth_grid(piece);
  const Tick step = piece.ticks_per_quarter / 4;
  std::int64_t changed = 0;
  for (auto& n : piece.notes) {
    const int s = rng.uniform_int(-max_shift, max_shift);
    const std::int64_t q =
        std::max<std::int64_t>(1, ticks_to_sixteenths(n.duration, piece.ticks_per_quarter) + s);
    changed += q * step != n.duration;
    n.duration = q * step;
  }
  return {{"max", max_shift}, {"changed_notes", changed}};
}

Params velocity_shift(Piece& piece, CounterRng& rng, int max_shift) {
  std::int64_t changed = 0;
  for (auto& n : piece.notes) {
    const int v = std::clamp(n.velocity + rng.uniform_int(-max_shift, max_shift), 1, 127);
    changed += v != n.velocity;
    n.velocity = v;
  }
  return {{"max", max_shift}, {"changed_notes", changed}};
}

Params octave_shift(Piece& piece, CounterRng& rng) {
  std::map<GroupKey, int> shift;
  Params params;
  for (const auto& g : groups_of(piece)) {
    if (std::get<2>(g)) continue;
    const int s = kOctaveChoices[rng.uniform_int(0, 4)];
    shift[g] = s;
    params.emplace_back("track" + std::to_string(std::get<0>(g)) + "_program" +
                            std::to_string(std::get<1>(g)),
                        s);
  }
  for (auto& n : piece.notes) {
    if (!n.is_drum) n.pitch = std::clamp(n.pitch + shift[group_of(n)], 0, 127);
  }
  return params;
}

Params pitch_transpose(Piece& piece, CounterRng& rng, std::optional<int> fixed) {
  const int k = fixed ? *fixed : rng.uniform_int(-6, 6);
  for (auto& n : piece.notes) {
    if (!n.is_drum) n.pitch = std::clamp(n.pitch + k, 0, 127);
  }
  return {{"semitones", k}};
}

Params inst_mapping(Piece& piece, CounterRng& rng) {
  std::map<GroupKey, int> remap;
  Params params;
  for (const auto& g : groups_of(piece)) {
    if (std::get<2>(g)) continue;  // drums keep their kit
    int program = rng.uniform_int(0, 126);
    if (program >= std::get<1>(g)) ++program;
    remap[g] = program;
    params.emplace_back("track" + std::to_string(std::get<0>(g)) + "_program" +
                            std::to_string(std::get<1>(g)),
                        program);
  }
  for (auto& n : piece.notes) {
    if (!n.is_drum) n.program = remap[group_of(n)];
  }
  return params;
}

Params inst_order(Piece& piece, CounterRng& rng) {
  std::set<int> distinct;
  for (const auto& n : piece.notes) distinct.insert(n.track_index);
  std::vector<int> tracks(distinct.begin(), distinct.end());
  std::vector<int> perm = tracks;
  for (int i = static_cast<int>(perm.size()) - 1; i >= 1; --i) {
    std::swap(perm[i], perm[rng.uniform_int(0, i)]);
  }
  std::map<int, int> to;
  Params params;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    to[tracks[i]] = perm[i];
    params.emplace_back("track" + std::to_string(tracks[i]), perm[i]);
  }
  for (auto& n : piece.notes) n.track_index = to[n.track_index];
  return params;
}

Params bar_shift(Piece& piece, CounterRng& rng, std::optional<int> fixed) {
  const int bars = fixed ? *fixed : rng.uniform_int(1, 4);
  const TimeSignature& meter = piece.time_signatures.front();
  if ((4 * static_cast<std::int64_t>(piece.ticks_per_quarter) * meter.numerator) % meter.denominator) {
    rescale(piece, meter.denominator);
  }
  const Tick shift = bars * 4 * static_cast<Tick>(piece.ticks_per_quarter) * meter.numerator /
                     meter.denominator;
  for (auto& n : piece.notes) n.onset += shift;
  for (auto& t : piece.tempo_map) {
    if (t.tick > 0) t.tick += shift;
  }
  for (auto& m : piece.time_signatures) {
    if (m.tick > 0) m.tick += shift;
  }
  return {{"bars", bars}};
}

}  // namespace

std::string_view augment_kind_name(AugmentKind kind) { return kKindNames[static_cast<int>(kind)]; }

AugmentKind parse_augment_kind(std::string_view name) {
  for (int i = 0; i < kAugmentKindCount; ++i) {
    if (kKindNames[i] == name) return static_cast<AugmentKind>(i);
  }
  throw std::invalid_argument("unknown augmentation '" + std::string(name) + "'");
}

std::set<AugmentKind> all_augment_kinds() {
  std::set<AugmentKind> all;
  for (int i = 0; i < kAugmentKindCount; ++i) all.insert(static_cast<AugmentKind>(i));
  return all;
}

void AugmentationSpec::validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("augmentation parameter out of range: ") + what);
  };
  check(onset_shift_max >= 0 && onset_shift_max <= 2, "onset_shift");
  check(duration_shift_max >= 0 && duration_shift_max <= 4, "duration_shift");
  check(velocity_shift_max >= 0 && velocity_shift_max <= 3, "velocity_shift");
  check(!pitch_transpose || (*pitch_transpose >= -6 && *pitch_transpose <= 6), "pitch_transpose");
  check(!bar_shift || (*bar_shift >= 1 && *bar_shift <= 4), "bar_shift");
  check(fire_probability >= 0.0 && fire_probability <= 1.0, "fire_probability");
}

AugmentResult apply_augmentation(const Piece& piece, const AugmentationSpec& spec) {
  spec.validate();
  if (piece.notes.empty()) throw std::invalid_argument("cannot augment an empty piece");
  AugmentResult result{piece, {}};
  Piece& out = result.piece;
  for (int k = 0; k < kAugmentKindCount; ++k) {
    const auto kind = static_cast<AugmentKind>(k);
    if (!spec.enabled.contains(kind)) continue;
    CounterRng rng(derive_seed(spec.rng_seed, static_cast<std::uint64_t>(k)));
    if (spec.fire_probability < 1.0 && !rng.bernoulli(spec.fire_probability)) continue;
    Params params;
    switch (kind) {
      case AugmentKind::kInstDrop:
        params = inst_drop(out, rng);
        break;
      case AugmentKind::kBarDrop:
        params = bar_drop(out, rng);
        break;
      case AugmentKind::kNoteDrop:
        params = note_drop(out, rng);
        break;
      case AugmentKind::kOnsetShift:
        params = onset_shift(out, rng, spec.onset_shift_max);
        break;
      case AugmentKind::kDurationShift:
        params = duration_shift(out, rng, spec.duration_shift_max);
        break;
      case AugmentKind::kVelocityShift:
        params = velocity_shift(out, rng, spec.velocity_shift_max);
        break;
      case AugmentKind::kOctaveShift:
        params = octave_shift(out, rng);
        break;
      case AugmentKind::kPitchTranspose:
        params = pitch_transpose(out, rng, spec.pitch_transpose);
        break;
      case AugmentKind::kInstMapping:
        params = inst_mapping(out, rng);
        break;
      case AugmentKind::kInstOrder:
        params = inst_order(out, rng);
        break;
      case AugmentKind::kBarShift:
        params = bar_shift(out, rng, spec.bar_shift);
        break;
    }
    normalize(out);
    result.applied.push_back({kind, std::move(params)});
  }
  if (out.notes.empty()) throw DegenerateVariant();
  return result;
}

AugmentationSpec full_grammar() {
  AugmentationSpec spec;
  spec.enabled = all_augment_kinds();
  spec.fire_probability = 0.5;
  return spec;
}

std::vector<Variant> make_variant_set(const Piece& piece, int n, std::uint64_t seed,
                                      const AugmentationSpec& templ) {
  constexpr int kMaxAttempts = 64;
  std::vector<Variant> variants;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t variant_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    AugmentationSpec spec = templ;
    for (int attempt = 0;; ++attempt) {
      spec.rng_seed = attempt == 0 ? variant_seed
                                   : derive_seed(variant_seed, static_cast<std::uint64_t>(attempt));
      try {
        auto r = apply_augmentation(piece, spec);
        r.piece.id = piece.id + "#v" + std::to_string(i);
        variants.push_back({std::move(r.piece), spec.rng_seed, std::move(r.applied)});
        break;
      } catch (const DegenerateVariant&) {
        if (attempt + 1 >= kMaxAttempts) throw;
      }
    }
  }
  return variants;
}

std::pair<Piece, Piece> neighbor_segments(const Piece& piece, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> sources;
  const TokenSequence seq = encode_octuple(piece, sources);
  const std::size_t chunks = seq.tokens.size() / kSegmentTokens;
  if (chunks < 2) throw std::invalid_argument("insufficient length");
  CounterRng rng(seed);
  const int first = rng.uniform_int(0, static_cast<int>(chunks) - 1);
  int second = rng.uniform_int(0, static_cast<int>(chunks) - 2);
  if (second >= first) ++second;

  auto extract = [&](int chunk) {
    Piece sub = piece;
    sub.id = piece.id + "#seg" + std::to_string(chunk);
    sub.notes.clear();
    const std::size_t begin = static_cast<std::size_t>(chunk) * kSegmentTokens;
    for (std::size_t t = begin; t < begin + kSegmentTokens; ++t) {
      for (std::size_t note : sources[t]) sub.notes.push_back(piece.notes[note]);
    }
    normalize(sub);
    return sub;
  };
  return {extract(first), extract(second)};
}

}  // namespace mididedup
