/// @file
/// @brief Pairwise similarity evidence and the `edges.csv` format.
///
/// edges.csv has the header `id_a,id_b,method,score,raw`. Scores carry six
/// decimals; `raw` holds the unmapped cosine for embedding edges and is empty
/// otherwise. Fields containing commas, quotes or line breaks are quoted as
/// in RFC 4180. Rows are sorted by (id_a, id_b, method).

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mididedup/midi.h"

namespace mididedup {

enum class Method { kHash, kEntropy, kChromaDtw, kEmbedding };

std::string_view method_name(Method m);
/// Accepts "hash", "entropy", "chroma_dtw" (or "chroma"), "embedding" and
/// "embedding:<label>". Throws std::invalid_argument otherwise.
Method parse_method(std::string_view name);

struct SimilarityEdge {
  FileId id_a;  // id_a < id_b
  FileId id_b;
  std::string method;  // method_name(), or "embedding:<label>" for a named store
  double score = 0.0;  // in [0, 1], already rounded to six decimals
  std::optional<double> raw;

  friend bool operator==(const SimilarityEdge&, const SimilarityEdge&) = default;
};

double round_score(double score);

/// Orders the ids and rounds the score. Throws std::invalid_argument when
/// a == b or the score is outside [0, 1].
SimilarityEdge make_edge(const FileId& a, const FileId& b, std::string method, double score,
                         std::optional<double> raw = std::nullopt);

/// Sorts by (id_a, id_b, method) and keeps the first of any repeated key.
void sort_and_dedupe(std::vector<SimilarityEdge>& edges);

std::string edges_to_csv(std::span<const SimilarityEdge> edges);
std::vector<SimilarityEdge> edges_from_csv(std::string_view text);

/// Splits one CSV record into fields, honouring quotes.
std::vector<std::string> split_csv_record(std::string_view line);

}  // namespace mididedup
