#include "mididedup/embeddings.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include <nlohmann/json.hpp>

#include "mididedup/detectors.h"
#include "mididedup/parallel.h"

namespace mididedup {
namespace {

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return (v >> 24) | ((v >> 8) & 0xFF00) | ((v << 8) & 0xFF0000) | (v << 24);
  }
  return v;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw EmbeddingLoadError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& manifest) {
  auto p = manifest;
  p.replace_extension(".bin");
  return p;
}

void validate_store(const EmbeddingStore& store) {
  if (store.dim == 0) throw EmbeddingLoadError("embedding dim must be > 0");
  if (store.matrix.size() != store.ids.size() * store.dim) {
    throw EmbeddingLoadError("matrix size does not match count * dim");
  }
  std::set<std::string_view> seen;
  for (std::size_t r = 0; r < store.ids.size(); ++r) {
    if (!seen.insert(store.ids[r]).second) {
      throw EmbeddingLoadError("duplicate id '" + store.ids[r] + "' at row " + std::to_string(r));
    }
    bool nonzero = false;
    for (float v : store.row(r)) {
      if (!std::isfinite(v)) {
        throw EmbeddingLoadError("non-finite value in row " + std::to_string(r) + " ('" +
                                 store.ids[r] + "')");
      }
      nonzero |= v != 0.0f;
    }
    if (!nonzero) {
      throw EmbeddingLoadError("zero vector in row " + std::to_string(r) + " ('" + store.ids[r] +
                               "')");
    }
  }
}

EmbeddingStore load_embeddings(const std::filesystem::path& manifest) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(manifest));
  } catch (const nlohmann::json::exception& e) {
    throw EmbeddingLoadError(manifest.string() + ": " + e.what());
  }
  if (meta.value("version", 0) != 1) throw EmbeddingLoadError("unsupported store version");
  if (meta.value("dtype", std::string{}) != "f32le") throw EmbeddingLoadError("dtype must be f32le");

  EmbeddingStore store;
  store.dim = meta.at("dim").get<std::size_t>();
  const auto count = meta.at("count").get<std::size_t>();
  store.model_tag = meta.value("model_tag", std::string{});
  store.ids = meta.at("ids").get<std::vector<std::string>>();
  if (store.ids.size() != count) {
    throw EmbeddingLoadError("manifest count " + std::to_string(count) + " but " +
                             std::to_string(store.ids.size()) + " ids");
  }

  const std::string bin = read_file(sidecar_path(manifest));
  const std::size_t expected = count * store.dim * sizeof(float);
  if (bin.size() != expected) {
    throw EmbeddingLoadError("length mismatch: " + sidecar_path(manifest).string() + " has " +
                             std::to_string(bin.size()) + " bytes, expected " +
                             std::to_string(expected));
  }
  store.matrix.resize(count * store.dim);
  for (std::size_t i = 0; i < store.matrix.size(); ++i) {
    std::uint32_t word;
    std::memcpy(&word, bin.data() + 4 * i, 4);
    store.matrix[i] = std::bit_cast<float>(to_little(word));
  }
  validate_store(store);
  return store;
}

void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& manifest) {
  validate_store(store);
  nlohmann::ordered_json meta;
  meta["version"] = 1;
  meta["dim"] = store.dim;
  meta["count"] = store.ids.size();
  meta["dtype"] = "f32le";
  meta["model_tag"] = store.model_tag;
  meta["ids"] = store.ids;
  std::ofstream(manifest, std::ios::binary) << meta.dump(1) << "\n";

  std::string bin(store.matrix.size() * 4, '\0');
  for (std::size_t i = 0; i < store.matrix.size(); ++i) {
    const std::uint32_t word = to_little(std::bit_cast<std::uint32_t>(store.matrix[i]));
    std::memcpy(bin.data() + 4 * i, &word, 4);
  }
  std::ofstream out(sidecar_path(manifest), std::ios::binary);
  out.write(bin.data(), static_cast<std::streamsize>(bin.size()));
  if (!out) throw EmbeddingLoadError("cannot write " + sidecar_path(manifest).string());
}

std::vector<FileId> unknown_ids(const EmbeddingStore& store, std::span<const FileId> known_ids) {
  const std::set<std::string_view> known(known_ids.begin(), known_ids.end());
  std::vector<FileId> extra;
  for (const auto& id : store.ids) {
    if (!known.contains(id)) extra.push_back(id);
  }
  std::sort(extra.begin(), extra.end());
  return extra;
}

std::vector<SimilarityEdge> pairwise_embedding_edges(const EmbeddingStore& store, double emit_floor,
                                                     const std::string& label, int threads) {
  const std::string method = label.empty() ? "embedding" : "embedding:" + label;
  const std::size_t n = store.count();
  std::vector<std::vector<SimilarityEdge>> per_row(n);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double cosine = embedding_cosine(store.row(i), store.row(j));
      const double score = round_score(cosine_to_score(cosine));
      if (score >= emit_floor) {
        per_row[i].push_back(make_edge(store.ids[i], store.ids[j], method, score, cosine));
      }
    }
  });
  std::vector<SimilarityEdge> edges;
  for (auto& row : per_row) {
    edges.insert(edges.end(), std::make_move_iterator(row.begin()),
                 std::make_move_iterator(row.end()));
  }
  sort_and_dedupe(edges);
  return edges;
}

}  // namespace mididedup
