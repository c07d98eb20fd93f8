/// @file
/// @brief Duplicate graph, connected components and filter-list output.

#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "mididedup/eval.h"

namespace mididedup {

/// Undirected simple graph over the files that appear in at least one pair.
struct DuplicateGraph {
  std::vector<FileId> nodes;                        // sorted
  std::vector<std::vector<std::size_t>> adjacency;  // sorted, no self loops
};

DuplicateGraph build_graph(const PredictedPairs& pairs);

/// Components found with an explicit-stack depth-first search. Members are
/// sorted and components are ordered by their smallest member.
std::vector<std::vector<FileId>> connected_components(const DuplicateGraph& graph);

struct DuplicateCluster {
  FileId representative;
  std::vector<FileId> members;
};

struct ClusterSelection {
  std::vector<DuplicateCluster> clusters;
  std::vector<FileId> keep;    // one representative per cluster
  std::vector<FileId> filter;  // everything else, sorted
};

/// Keeps the member with the most notes (smallest id on ties). Files absent
/// from `note_counts` count as zero notes.
ClusterSelection select_representatives(const std::vector<std::vector<FileId>>& components,
                                        const std::unordered_map<FileId, std::size_t>& note_counts);

std::string filter_list_text(const ClusterSelection& selection);  // one id per LF-terminated line
std::string clusters_json(const ClusterSelection& selection);     // [{representative, members}]

struct FilterCounts {
  std::size_t clusters = 0;
  std::size_t filtered = 0;
};

/// Writes filter_list.txt and clusters.json into `out_dir`.
FilterCounts emit_filter_list(const ClusterSelection& selection, const std::filesystem::path& out_dir);

}  // namespace mididedup
