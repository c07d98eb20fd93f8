/// @file
/// @brief Externally produced embedding matrices.
///
/// A store is a JSON manifest plus a binary sidecar with the same stem:
///
///     store.json  {"version":1, "dim":D, "count":N, "dtype":"f32le",
///                  "model_tag":"...", "ids":[...]}
///     store.bin   N*D little-endian IEEE-754 floats, row-major, rows in ids order

#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mididedup/edges.h"

namespace mididedup {

class EmbeddingLoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EmbeddingStore {
  std::vector<FileId> ids;
  std::size_t dim = 0;
  std::vector<float> matrix;  // ids.size() * dim
  std::string model_tag;

  std::span<const float> row(std::size_t i) const { return {matrix.data() + i * dim, dim}; }
  std::size_t count() const { return ids.size(); }
};

std::filesystem::path sidecar_path(const std::filesystem::path& manifest);

/// Checks shape, unique ids, finite values and non-zero rows. Throws
/// EmbeddingLoadError naming the offending row.
void validate_store(const EmbeddingStore& store);

EmbeddingStore load_embeddings(const std::filesystem::path& manifest);
void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& manifest);

/// Store ids with no match in `known_ids` (sorted). Callers warn on these.
std::vector<FileId> unknown_ids(const EmbeddingStore& store, std::span<const FileId> known_ids);

/// Every unordered pair whose mapped score (cosine + 1) / 2 reaches
/// `emit_floor`, labelled "embedding" or "embedding:<label>".
std::vector<SimilarityEdge> pairwise_embedding_edges(const EmbeddingStore& store, double emit_floor,
                                                     const std::string& label = "",
                                                     int threads = 1);

}  // namespace mididedup
