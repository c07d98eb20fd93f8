#include "mididedup/cluster.h"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mididedup {

DuplicateGraph build_graph(const PredictedPairs& pairs) {
  DuplicateGraph g;
  for (const auto& [a, b] : pairs) {
    if (a == b) continue;
    g.nodes.push_back(a);
    g.nodes.push_back(b);
  }
  std::sort(g.nodes.begin(), g.nodes.end());
  g.nodes.erase(std::unique(g.nodes.begin(), g.nodes.end()), g.nodes.end());
  const auto index = [&](const FileId& id) {
    return static_cast<std::size_t>(std::lower_bound(g.nodes.begin(), g.nodes.end(), id) -
                                    g.nodes.begin());
  };
  g.adjacency.resize(g.nodes.size());
  for (const auto& [a, b] : pairs) {
    if (a == b) continue;
    const std::size_t ia = index(a), ib = index(b);
    g.adjacency[ia].push_back(ib);
    g.adjacency[ib].push_back(ia);
  }
  for (auto& adj : g.adjacency) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return g;
}

std::vector<std::vector<FileId>> connected_components(const DuplicateGraph& graph) {
  const std::size_t n = graph.nodes.size();
  std::vector<bool> seen(n, false);
  std::vector<std::vector<FileId>> components;
  std::vector<std::size_t> stack;
  // Nodes are sorted, so visiting roots in index order yields components
  // already ordered by their smallest member.
  for (std::size_t root = 0; root < n; ++root) {
    if (seen[root]) continue;
    std::vector<std::size_t> members;
    stack.push_back(root);
    seen[root] = true;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      members.push_back(v);
      for (std::size_t w : graph.adjacency[v]) {
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
    std::sort(members.begin(), members.end());
    std::vector<FileId> ids;
    ids.reserve(members.size());
    for (std::size_t v : members) ids.push_back(graph.nodes[v]);
    components.push_back(std::move(ids));
  }
  return components;
}

ClusterSelection select_representatives(const std::vector<std::vector<FileId>>& components,
                                        const std::unordered_map<FileId, std::size_t>& note_counts) {
  const auto count_of = [&](const FileId& id) -> std::size_t {
    const auto it = note_counts.find(id);
    return it == note_counts.end() ? 0 : it->second;
  };
  ClusterSelection sel;
  for (const auto& members : components) {
    if (members.size() < 2) continue;
    const FileId* best = &members.front();
    for (const auto& id : members) {
      const std::size_t c = count_of(id), b = count_of(*best);
      if (c > b || (c == b && id < *best)) best = &id;
    }
    DuplicateCluster cluster{*best, members};
    std::sort(cluster.members.begin(), cluster.members.end());
    sel.keep.push_back(*best);
    for (const auto& id : cluster.members) {
      if (id != *best) sel.filter.push_back(id);
    }
    sel.clusters.push_back(std::move(cluster));
  }
  std::sort(sel.filter.begin(), sel.filter.end());
  return sel;
}

std::string filter_list_text(const ClusterSelection& selection) {
  std::string out;
  for (const auto& id : selection.filter) {
    out += id;
    out += '\n';
  }
  return out;
}

std::string clusters_json(const ClusterSelection& selection) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : selection.clusters) {
    nlohmann::ordered_json rec;
    rec["representative"] = c.representative;
    rec["members"] = c.members;
    arr.push_back(std::move(rec));
  }
  return arr.dump(1) + "\n";
}

FilterCounts emit_filter_list(const ClusterSelection& selection, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + p.string());
  };
  write(out_dir / "filter_list.txt", filter_list_text(selection));
  write(out_dir / "clusters.json", clusters_json(selection));
  return {selection.clusters.size(), selection.filter.size()};
}

}  // namespace mididedup
