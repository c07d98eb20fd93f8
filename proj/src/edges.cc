#include "mididedup/edges.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <tuple>

namespace mididedup {
namespace {

std::string quote_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kHash:
      return "hash";
    case Method::kEntropy:
      return "entropy";
    case Method::kChromaDtw:
      return "chroma_dtw";
    case Method::kEmbedding:
      return "embedding";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "hash") return Method::kHash;
  if (name == "entropy") return Method::kEntropy;
  if (name == "chroma_dtw" || name == "chroma") return Method::kChromaDtw;
  if (name == "embedding" || name.starts_with("embedding:")) return Method::kEmbedding;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

double round_score(double score) { return std::round(score * 1e6) / 1e6; }

SimilarityEdge make_edge(const FileId& a, const FileId& b, std::string method, double score,
                         std::optional<double> raw) {
  if (a == b) throw std::invalid_argument("self edge on " + a);
  if (!(score >= 0.0 && score <= 1.0)) throw std::invalid_argument("edge score outside [0,1]");
  SimilarityEdge e;
  e.id_a = a < b ? a : b;
  e.id_b = a < b ? b : a;
  e.method = std::move(method);
  e.score = round_score(score);
  e.raw = raw;
  return e;
}

void sort_and_dedupe(std::vector<SimilarityEdge>& edges) {
  const auto key = [](const SimilarityEdge& e) { return std::tie(e.id_a, e.id_b, e.method); };
  std::stable_sort(edges.begin(), edges.end(),
                   [&](const auto& x, const auto& y) { return key(x) < key(y); });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [&](const auto& x, const auto& y) { return key(x) == key(y); }),
              edges.end());
}

std::string edges_to_csv(std::span<const SimilarityEdge> edges) {
  std::string out = "id_a,id_b,method,score,raw\n";
  for (const auto& e : edges) {
    out += quote_field(e.id_a);
    out += ',';
    out += quote_field(e.id_b);
    out += ',';
    out += quote_field(e.method);
    out += ',';
    out += format_fixed6(e.score);
    out += ',';
    if (e.raw) out += format_fixed6(*e.raw);
    out += '\n';
  }
  return out;
}

std::vector<std::string> split_csv_record(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          fields.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw std::runtime_error("unterminated quote in CSV record");
  return fields;
}

std::vector<SimilarityEdge> edges_from_csv(std::string_view text) {
  // Records may span lines inside quotes, so split on unquoted newlines.
  std::vector<std::string_view> records;
  bool quoted = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '"') quoted = !quoted;
    if (text[i] == '\n' && !quoted) {
      std::size_t end = i;
      if (end > start && text[end - 1] == '\r') --end;
      records.push_back(text.substr(start, end - start));
      start = i + 1;
    }
  }
  if (start < text.size()) records.push_back(text.substr(start));

  if (records.empty() || records.front() != "id_a,id_b,method,score,raw") {
    throw std::runtime_error("edges.csv: missing or unexpected header");
  }
  std::vector<SimilarityEdge> edges;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].empty()) continue;
    auto f = split_csv_record(records[r]);
    if (f.size() != 5) {
      throw std::runtime_error("edges.csv: record " + std::to_string(r) + " has " +
                               std::to_string(f.size()) + " fields");
    }
    SimilarityEdge e;
    e.id_a = std::move(f[0]);
    e.id_b = std::move(f[1]);
    e.method = std::move(f[2]);
    e.score = std::stod(f[3]);
    if (!f[4].empty()) e.raw = std::stod(f[4]);
    edges.push_back(std::move(e));
  }
  return edges;
}

}  // namespace mididedup
