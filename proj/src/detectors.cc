#include "mididedup/detectors.h"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mididedup/grid.h"

namespace mididedup {

Md5Digest md5(std::string_view bytes) {
  Md5Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_md5(), nullptr) != 1 ||
      len != out.size()) {
    throw std::runtime_error("MD5 digest failed");
  }
  return out;
}

std::string to_hex(const Md5Digest& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  s.reserve(32);
  for (std::uint8_t b : digest) {
    s += kHex[b >> 4];
    s += kHex[b & 0xF];
  }
  return s;
}

HashSignature hash_signature(const TokenSequence& seq) {
  return {md5(serialize_tokens(seq)), seq.source_id};
}

PositionHistogram beat_position_histogram(const Piece& piece) {
  const MeterGrid grid(piece);
  PositionHistogram h;
  for (const auto& n : piece.notes) {
    ++h.counts[grid.locate(n.onset).position];
    ++h.total;
  }
  return h;
}

EntropyValue beat_position_entropy(const PositionHistogram& h) {
  if (h.total == 0) return {0.0, true};
  double bits = 0.0;
  for (std::int64_t c : h.counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(h.total);
    bits -= p * std::log2(p);
  }
  // A single occupied slot gives -1*log2(1) = -0.0.
  return {bits == 0.0 ? 0.0 : bits, false};
}

double entropy_similarity(double e1, double e2) {
  return std::max(0.0, 1.0 - std::fabs(e1 - e2));
}

PitchHistogram pitch_histogram_from_counts(const std::array<std::int64_t, 128>& counts) {
  PitchHistogram h;
  h.raw_counts = counts;
  const std::int64_t total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  const double norm = 1.0 + 128 * kPitchSmoothing;
  for (int i = 0; i < 128; ++i) {
    const double p = total > 0 ? static_cast<double>(counts[i]) / static_cast<double>(total)
                               : 1.0 / 128.0;
    h.probs[i] = (p + kPitchSmoothing) / norm;
  }
  return h;
}

PitchHistogram pitch_histogram(const Piece& piece) {
  std::array<std::int64_t, 128> counts{};
  for (const auto& n : piece.notes) {
    if (!n.is_drum) ++counts[n.pitch];
  }
  return pitch_histogram_from_counts(counts);
}

double kl_divergence(const PitchHistogram& p, const PitchHistogram& q) {
  double sum = 0.0;
  for (int i = 0; i < 128; ++i) sum += p.probs[i] * std::log(p.probs[i] / q.probs[i]);
  return std::max(sum, 0.0);
}

std::vector<std::size_t> prefilter_topk(std::size_t query, std::span<const PitchHistogram> corpus,
                                        std::size_t k) {
  if (k == 0) throw std::invalid_argument("prefilter k must be >= 1");
  struct Scored {
    double kl;
    std::size_t index;
  };
  std::vector<Scored> scored;
  scored.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (i != query) scored.push_back({kl_divergence(corpus[query], corpus[i]), i});
  }
  const auto less = [](const Scored& a, const Scored& b) {
    return a.kl < b.kl || (a.kl == b.kl && a.index < b.index);
  };
  const std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), less);
  std::vector<std::size_t> out(keep);
  for (std::size_t i = 0; i < keep; ++i) out[i] = scored[i].index;
  return out;
}

Chromagram chromagram(const Piece& piece) {
  const std::int64_t tpq = piece.ticks_per_quarter;
  std::int64_t n_frames = 0;
  for (const auto& n : piece.notes) {
    if (n.is_drum) continue;
    n_frames = std::max(n_frames, (4 * (n.onset + n.duration) + tpq - 1) / tpq);
  }
  Chromagram c;
  c.frames.assign(static_cast<std::size_t>(n_frames), 0);
  for (const auto& n : piece.notes) {
    if (n.is_drum) continue;
    const std::int64_t first = (4 * n.onset + tpq - 1) / tpq;
    const std::int64_t last = (4 * (n.onset + n.duration) + tpq - 1) / tpq;
    const auto bit = static_cast<std::uint16_t>(1u << (n.pitch % 12));
    for (std::int64_t f = first; f < last; ++f) c.frames[static_cast<std::size_t>(f)] |= bit;
  }
  while (!c.frames.empty() && c.frames.back() == 0) c.frames.pop_back();
  return c;
}

int modal_pitch_class(const Chromagram& c) {
  std::array<std::size_t, 12> occupancy{};
  for (std::uint16_t f : c.frames) {
    for (int pc = 0; pc < 12; ++pc) occupancy[pc] += (f >> pc) & 1u;
  }
  return static_cast<int>(std::max_element(occupancy.begin(), occupancy.end()) - occupancy.begin());
}

Chromagram rotate_pitch_classes(const Chromagram& c, int semitones) {
  const int k = ((semitones % 12) + 12) % 12;
  Chromagram out;
  out.frames.reserve(c.frames.size());
  for (std::uint16_t f : c.frames) {
    const std::uint32_t wide = static_cast<std::uint32_t>(f) << k;
    out.frames.push_back(static_cast<std::uint16_t>((wide | (wide >> 12)) & 0x0FFF));
  }
  return out;
}

Chromagram align_transpose(const Chromagram& ref, const Chromagram& other) {
  return rotate_pitch_classes(other, modal_pitch_class(ref) - modal_pitch_class(other));
}

namespace {

constexpr int kCostScaleBits = 24;

double raw_frame_cost(int shared, int na, int nb) {
  if (na == 0 && nb == 0) return 0.0;
  if (na == 0 || nb == 0) return 1.0;
  const double cosine = shared / std::sqrt(static_cast<double>(na * nb));
  const double scaled = std::round(std::ldexp(1.0 - cosine, kCostScaleBits));
  return std::ldexp(scaled, -kCostScaleBits);
}

struct CostTable {
  // [shared][na][nb]
  std::array<double, 13 * 13 * 13> values{};
  CostTable() {
    for (int s = 0; s <= 12; ++s)
      for (int a = 0; a <= 12; ++a)
        for (int b = 0; b <= 12; ++b) values[(s * 13 + a) * 13 + b] = raw_frame_cost(s, a, b);
  }
  double operator()(std::uint16_t x, std::uint16_t y) const {
    return values[(std::popcount(static_cast<unsigned>(x & y)) * 13 +
                   std::popcount(static_cast<unsigned>(x))) * 13 +
                  std::popcount(static_cast<unsigned>(y))];
  }
};

const CostTable& cost_table() {
  static const CostTable table;
  return table;
}

struct Cell {
  double cost;
  std::uint32_t length;
};

inline bool better(const Cell& a, const Cell& b) {
  return a.cost < b.cost || (a.cost == b.cost && a.length < b.length);
}

}  // namespace

double frame_cost(std::uint16_t a, std::uint16_t b) { return cost_table()(a, b); }

namespace {

DtwResult dtw_wide(const Chromagram& a, const Chromagram& b) {
  const CostTable& cost = cost_table();
  const std::size_t n = a.length();
  const std::size_t m = b.length();
  std::vector<Cell> prev(m), cur(m);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint16_t fa = a.frames[i];
    for (std::size_t j = 0; j < m; ++j) {
      const double c = cost(fa, b.frames[j]);
      if (i == 0 && j == 0) {
        cur[j] = {c, 1};
        continue;
      }
      Cell best{0.0, 0};
      bool have = false;
      auto consider = [&](const Cell& cand) {
        if (!have || better(cand, best)) {
          best = cand;
          have = true;
        }
      };
      if (i > 0 && j > 0) consider(prev[j - 1]);
      if (i > 0) consider(prev[j]);
      if (j > 0) consider(cur[j - 1]);
      cur[j] = {best.cost + c, best.length + 1};
    }
    std::swap(prev, cur);
  }
  const Cell& end = prev[m - 1];
  return {end.cost / end.length, end.length, false};
}

// (cost in units of 2^-24) << kLengthBits | length, so that integer order is
// the (cost, length) lexicographic order.
constexpr int kLengthBits = 20;

constexpr std::size_t kMaxStepTable = std::size_t{1} << 16;

std::vector<std::uint16_t> compact_masks(const Chromagram& c, std::vector<std::uint16_t>& masks) {
  std::array<int, 4096> slot;
  slot.fill(-1);
  std::vector<std::uint16_t> out;
  out.reserve(c.frames.size());
  masks.clear();
  for (std::uint16_t f : c.frames) {
    if (f >= slot.size()) throw std::invalid_argument("chroma frame has bits above pitch class 11");
    if (slot[f] < 0) {
      slot[f] = static_cast<int>(masks.size());
      masks.push_back(f);
    }
    out.push_back(static_cast<std::uint16_t>(slot[f]));
  }
  return out;
}

}  // namespace

DtwResult dtw_distance(const Chromagram& a, const Chromagram& b) {
  if (a.empty() || b.empty()) return {1.0, 0, true};
  const std::size_t n = a.length();
  const std::size_t m = b.length();
  if (n + m >= (std::size_t{1} << kLengthBits)) return dtw_wide(a, b);

  std::vector<std::uint16_t> masks_a, masks_b;
  const auto ia = compact_masks(a, masks_a);
  const auto ib = compact_masks(b, masks_b);
  const CostTable& cost = cost_table();
  const auto packed = [&](std::uint16_t x, std::uint16_t y) {
    return (static_cast<std::uint64_t>(std::ldexp(cost(x, y), kCostScaleBits)) << kLengthBits) | 1;
  };
  // Costs per (unique mask of a, unique mask of b); per row when that table
  // would be too large.
  const bool tabled = masks_a.size() * masks_b.size() <= kMaxStepTable;
  std::vector<std::uint64_t> table, row(m);
  if (tabled) {
    table.resize(masks_a.size() * masks_b.size());
    for (std::size_t x = 0; x < masks_a.size(); ++x) {
      for (std::size_t y = 0; y < masks_b.size(); ++y) {
        table[x * masks_b.size() + y] = packed(masks_a[x], masks_b[y]);
      }
    }
  }

  std::vector<std::uint64_t> prev(m), cur(m);
  for (std::size_t i = 0; i < n; ++i) {
    if (tabled) {
      const std::uint64_t* t = &table[ia[i] * masks_b.size()];
      for (std::size_t j = 0; j < m; ++j) row[j] = t[ib[j]];
    } else {
      for (std::size_t j = 0; j < m; ++j) row[j] = packed(a.frames[i], b.frames[j]);
    }
    if (i == 0) {
      cur[0] = row[0];
      for (std::size_t j = 1; j < m; ++j) cur[j] = cur[j - 1] + row[j];
    } else {
      cur[0] = prev[0] + row[0];
      for (std::size_t j = 1; j < m; ++j) cur[j] = std::min({prev[j - 1], prev[j], cur[j - 1]}) + row[j];
    }
    std::swap(prev, cur);
  }
  const std::uint64_t end = prev[m - 1];
  const auto length = static_cast<std::uint32_t>(end & ((std::uint64_t{1} << kLengthBits) - 1));
  const double total = std::ldexp(static_cast<double>(end >> kLengthBits), -kCostScaleBits);
  return {total / length, length, false};
}

double chroma_similarity(const Chromagram& ref, const Chromagram& other) {
  return 1.0 - dtw_distance(ref, align_transpose(ref, other)).distance;
}

double chroma_similarity(const Piece& ref, const Piece& other) {
  return chroma_similarity(chromagram(ref), chromagram(other));
}

double embedding_cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw std::invalid_argument("embedding dimensions differ");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * v[i];
    nu += static_cast<double>(u[i]) * u[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("zero embedding vector");
  return std::clamp(dot / std::sqrt(nu * nv), -1.0, 1.0);
}

}  // namespace mididedup
