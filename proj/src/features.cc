#include "mididedup/features.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mididedup/parallel.h"

namespace mididedup {
namespace {

std::string pack_chroma(const Chromagram& c) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  s.reserve(c.frames.size() * 3);
  for (std::uint16_t f : c.frames) {
    s += kHex[(f >> 8) & 0xF];
    s += kHex[(f >> 4) & 0xF];
    s += kHex[f & 0xF];
  }
  return s;
}

int hex_value(char ch) {
  if (ch >= '0' && ch <= '9') return ch - '0';
  if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
  if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
  throw std::runtime_error("features.json: bad hex digit");
}

Chromagram unpack_chroma(std::string_view s) {
  if (s.size() % 3) throw std::runtime_error("features.json: chroma length not a multiple of 3");
  Chromagram c;
  c.frames.reserve(s.size() / 3);
  for (std::size_t i = 0; i < s.size(); i += 3) {
    c.frames.push_back(static_cast<std::uint16_t>((hex_value(s[i]) << 8) |
                                                  (hex_value(s[i + 1]) << 4) | hex_value(s[i + 2])));
  }
  return c;
}

Md5Digest parse_hex_digest(std::string_view s) {
  if (s.size() != 32) throw std::runtime_error("features.json: md5_hex must have 32 digits");
  Md5Digest d{};
  for (std::size_t i = 0; i < 16; ++i) {
    d[i] = static_cast<std::uint8_t>((hex_value(s[2 * i]) << 4) | hex_value(s[2 * i + 1]));
  }
  return d;
}

void require_sorted(std::span<const FileFeatures> features) {
  for (std::size_t i = 1; i < features.size(); ++i) {
    if (!(features[i - 1].id < features[i].id)) {
      throw std::invalid_argument("features must be sorted by unique id");
    }
  }
}

std::vector<SimilarityEdge> hash_edges(std::span<const FileFeatures> features) {
  std::map<Md5Digest, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < features.size(); ++i) buckets[features[i].md5].push_back(i);
  std::vector<SimilarityEdge> edges;
  for (const auto& [digest, members] : buckets) {
    for (std::size_t x = 0; x < members.size(); ++x)
      for (std::size_t y = x + 1; y < members.size(); ++y)
        edges.push_back(make_edge(features[members[x]].id, features[members[y]].id,
                                  std::string(method_name(Method::kHash)), 1.0));
  }
  return edges;
}

std::vector<SimilarityEdge> entropy_edges(std::span<const FileFeatures> features) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!features[i].entropy.empty) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return features[a].entropy.bits < features[b].entropy.bits;
  });
  std::vector<SimilarityEdge> edges;
  for (std::size_t x = 0; x < order.size(); ++x) {
    const double e = features[order[x]].entropy.bits;
    for (std::size_t y = x + 1; y < order.size(); ++y) {
      if (!entropies_match(e, features[order[y]].entropy.bits)) break;
      edges.push_back(make_edge(features[order[x]].id, features[order[y]].id,
                                std::string(method_name(Method::kEntropy)), 1.0));
    }
  }
  return edges;
}

std::vector<SimilarityEdge> chroma_edges(std::span<const FileFeatures> features,
                                         const DetectorParams& params) {
  const std::size_t n = features.size();
  std::vector<PitchHistogram> hists(n);
  parallel_for(n, params.threads,
               [&](std::size_t i) { hists[i] = pitch_histogram_from_counts(features[i].pitch_counts); });

  std::vector<std::vector<std::size_t>> candidates(n);
  parallel_for(n, params.threads, [&](std::size_t q) {
    if (!features[q].chroma.empty()) candidates[q] = prefilter_topk(q, hists, params.prefilter_k);
  });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t c : candidates[q]) {
      if (features[c].chroma.empty()) continue;
      pairs.emplace_back(std::min(q, c), std::max(q, c));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<double> scores(pairs.size());
  parallel_for(pairs.size(), params.threads, [&](std::size_t i) {
    // The lexicographically smaller id is always the reference.
    const auto [a, b] = pairs[i];
    scores[i] = chroma_similarity(features[a].chroma, features[b].chroma);
  });

  std::vector<SimilarityEdge> edges;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double s = round_score(std::clamp(scores[i], 0.0, 1.0));
    if (s < params.emit_floor) continue;
    edges.push_back(make_edge(features[pairs[i].first].id, features[pairs[i].second].id,
                              std::string(method_name(Method::kChromaDtw)), s));
  }
  return edges;
}

}  // namespace

FileFeatures extract_features(const Piece& piece) {
  FileFeatures f;
  f.id = piece.id;
  f.md5 = hash_signature(encode_octuple(piece)).digest;
  f.entropy = beat_position_entropy(beat_position_histogram(piece));
  f.note_count = total_note_count(piece);
  f.pitch_counts = pitch_histogram(piece).raw_counts;
  f.chroma = chromagram(piece);
  return f;
}

std::string features_to_json(std::span<const FileFeatures> features) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& f : features) {
    nlohmann::ordered_json rec;
    rec["id"] = f.id;
    rec["md5_hex"] = to_hex(f.md5);
    rec["entropy_bits"] = f.entropy.bits;
    rec["empty"] = f.entropy.empty;
    rec["note_count"] = f.note_count;
    nlohmann::ordered_json sparse = nlohmann::ordered_json::array();
    for (int p = 0; p < 128; ++p) {
      if (f.pitch_counts[p]) sparse.push_back({p, f.pitch_counts[p]});
    }
    rec["pitch_hist_sparse"] = std::move(sparse);
    rec["chroma"] = pack_chroma(f.chroma);
    arr.push_back(std::move(rec));
  }
  return arr.dump(1) + "\n";
}

std::vector<FileFeatures> features_from_json(std::string_view text) {
  const auto arr = nlohmann::json::parse(text);
  std::vector<FileFeatures> out;
  out.reserve(arr.size());
  for (const auto& rec : arr) {
    FileFeatures f;
    f.id = rec.at("id").get<std::string>();
    f.md5 = parse_hex_digest(rec.at("md5_hex").get<std::string>());
    f.entropy.bits = rec.at("entropy_bits").get<double>();
    f.entropy.empty = rec.value("empty", false);
    f.note_count = rec.at("note_count").get<std::size_t>();
    for (const auto& pair : rec.at("pitch_hist_sparse")) {
      const int p = pair.at(0).get<int>();
      if (p < 0 || p > 127) throw std::runtime_error("features.json: pitch out of range");
      f.pitch_counts[p] = pair.at(1).get<std::int64_t>();
    }
    f.chroma = unpack_chroma(rec.value("chroma", std::string{}));
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<SimilarityEdge> run_detector(Method method, std::span<const FileFeatures> features,
                                         const DetectorParams& params) {
  require_sorted(features);
  if (params.prefilter_k < 1) throw std::invalid_argument("prefilter_k must be >= 1");
  std::vector<SimilarityEdge> edges;
  switch (method) {
    case Method::kHash:
      edges = hash_edges(features);
      break;
    case Method::kEntropy:
      edges = entropy_edges(features);
      break;
    case Method::kChromaDtw:
      edges = chroma_edges(features, params);
      break;
    case Method::kEmbedding:
      throw std::invalid_argument("embedding edges come from an EmbeddingStore");
  }
  sort_and_dedupe(edges);
  return edges;
}

}  // namespace mididedup
