#include "mididedup/pipeline.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mididedup/augment.h"
#include "mididedup/embeddings.h"
#include "mididedup/parallel.h"
#include "mididedup/rng.h"

namespace mididedup {
namespace {

using ojson = nlohmann::ordered_json;

void log(const std::string& msg) { std::cerr << "[mididedup] " << msg << '\n'; }

bool is_embedding(std::string_view method) {
  return method == "embedding" || method.starts_with("embedding:");
}

std::string embedding_method(const EmbeddingSource& src) {
  return src.label.empty() ? "embedding" : "embedding:" + src.label;
}

std::vector<FileFeatures> load_features(const PipelinePaths& paths) {
  if (!std::filesystem::exists(paths.features())) {
    throw UsageError(paths.features().string() + " not found; run `features` first");
  }
  try {
    return features_from_json(read_text_file(paths.features()));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(paths.features().string() + ": " + e.what());
  }
}

std::vector<SimilarityEdge> load_edges(const PipelinePaths& paths) {
  if (!std::filesystem::exists(paths.edges())) {
    throw UsageError(paths.edges().string() + " not found; run `detect` first");
  }
  try {
    return edges_from_csv(read_text_file(paths.edges()));
  } catch (const std::exception& e) {
    throw DataError(paths.edges().string() + ": " + e.what());
  }
}

GroundTruth load_ground_truth(const PipelineConfig& config, std::span<const FileId> ids) {
  GroundTruth truth;
  try {
    if (!config.ground_truth.empty()) {
      truth = ground_truth_from_json(read_text_file(config.ground_truth));
      // Unlabelled corpus files are singletons.
      auto groups = truth.groups;
      for (const auto& id : ids) {
        if (!truth.group_of.contains(id)) groups["unlabelled:" + id].push_back(id);
      }
      truth = ground_truth_from_groups(std::move(groups));
    } else {
      truth = ground_truth_from_paths(ids);
    }
  } catch (const std::exception& e) {
    throw DataError(std::string("ground truth: ") + e.what());
  }
  return restrict_ground_truth(truth, ids);
}

void put_metrics(ojson& j, const ClassificationMetrics& m) {
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["fn_count"] = m.fn_count;
  j["true_positives"] = m.true_positives;
  j["predicted_pairs"] = m.predicted;
  j["truth_pairs"] = m.truth_pairs;
}

// Pairwise score lookup built from one method's edges; absent pairs score 0.
class EdgeScorer {
 public:
  EdgeScorer(std::span<const SimilarityEdge> edges, std::span<const FileId> ids) : adj_(ids.size()) {
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
    for (const auto& e : edges) {
      const auto a = index.find(e.id_a), b = index.find(e.id_b);
      if (a == index.end() || b == index.end()) continue;
      adj_[a->second][b->second] = e.score;
      adj_[b->second][a->second] = e.score;
    }
  }
  double operator()(std::size_t q, std::size_t c) const {
    const auto it = adj_[q].find(c);
    return it == adj_[q].end() ? 0.0 : it->second;
  }

 private:
  std::vector<std::unordered_map<std::size_t, double>> adj_;
};

PairScorer scorer_for(const std::string& method, std::span<const FileFeatures> features,
                      std::span<const SimilarityEdge> edges, std::span<const FileId> ids) {
  if (method == "hash") {
    return [features](std::size_t q, std::size_t c) {
      return features[q].md5 == features[c].md5 ? 1.0 : 0.0;
    };
  }
  if (method == "entropy") {
    return [features](std::size_t q, std::size_t c) {
      if (features[q].entropy.empty || features[c].entropy.empty) return 0.0;
      return entropy_similarity(features[q].entropy.bits, features[c].entropy.bits);
    };
  }
  auto scorer = std::make_shared<EdgeScorer>(edges, ids);
  return [scorer](std::size_t q, std::size_t c) { return (*scorer)(q, c); };
}

}  // namespace

std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::filesystem::path& p, std::string_view text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("cannot write " + p.string());
}

std::vector<std::string> PipelineConfig::method_set() const {
  std::vector<std::string> out;
  for (const auto& m : methods) {
    if (!is_embedding(m)) out.push_back(std::string(method_name(parse_method(m))));
  }
  for (const auto& src : embeddings) out.push_back(embedding_method(src));
  return out;
}

double PipelineConfig::threshold_for(const std::string& method) const {
  if (conservative) return kConservativeThreshold;
  if (const auto it = thresholds.find(method); it != thresholds.end()) return it->second;
  if (method == "hash" || method == "entropy") return 1.0;
  if (method == "chroma_dtw") return 0.9;
  return kConservativeThreshold;
}

void PipelineConfig::validate() const {
  if (!(emit_floor >= 0.0 && emit_floor <= 1.0)) throw UsageError("emit_floor must be in [0,1]");
  if (prefilter_k < 1) throw UsageError("prefilter_k must be >= 1");
  if (!(precision_floor > 0.0 && precision_floor <= 1.0)) {
    throw UsageError("precision_floor must be in (0,1]");
  }
  if (threads < 1) throw UsageError("threads must be >= 1");
  bool wants_embedding = false;
  for (const auto& m : methods) {
    if (is_embedding(m)) {
      wants_embedding = true;
      continue;
    }
    try {
      parse_method(m);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (wants_embedding && embeddings.empty()) {
    throw UsageError("embedding method enabled but no embedding store configured");
  }
  std::set<std::string> labels;
  for (const auto& src : embeddings) {
    if (!labels.insert(src.label).second) throw UsageError("duplicate embedding label '" + src.label + "'");
  }
  for (const auto& [method, t] : thresholds) {
    if (!(t >= emit_floor && t <= 1.0)) {
      throw UsageError("threshold for " + method + " must lie in [emit_floor, 1]");
    }
  }
}

PipelineConfig config_from_json(std::string_view text, PipelineConfig c) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    if (j.contains("methods")) c.methods = j["methods"].get<std::vector<std::string>>();
    if (j.contains("thresholds")) c.thresholds = j["thresholds"].get<std::map<std::string, double>>();
    c.emit_floor = j.value("emit_floor", c.emit_floor);
    c.prefilter_k = j.value("prefilter_k", c.prefilter_k);
    c.precision_floor = j.value("precision_floor", c.precision_floor);
    c.conservative = j.value("conservative", c.conservative);
    if (j.contains("corpus")) c.corpus_root = j["corpus"].get<std::string>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("ground_truth")) c.ground_truth = j["ground_truth"].get<std::string>();
    c.ground_truth_from_paths = j.value("ground_truth_from_paths", c.ground_truth_from_paths);
    if (j.contains("bench")) c.bench = j["bench"].get<std::string>();
    if (j.contains("embeddings")) {
      c.embeddings.clear();
      for (const auto& e : j["embeddings"]) {
        c.embeddings.push_back({e.value("label", std::string{}), e.at("manifest").get<std::string>()});
      }
    }
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.max_parse_failure_rate = j.value("max_parse_failure_rate", c.max_parse_failure_rate);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

CorpusIndex run_scan(const PipelineConfig& config) {
  if (config.corpus_root.empty()) throw UsageError("no corpus root given");
  CorpusIndex index;
  try {
    index = scan_corpus(config.corpus_root, config.threads);
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }
  const PipelinePaths paths{config.out_dir};
  write_text_file(paths.index(), index_to_json(index));
  const std::size_t failed = index.failed_count();
  log("scan: " + std::to_string(index.entries.size()) + " files, " + std::to_string(failed) +
      " failed to parse");
  if (!index.entries.empty() &&
      static_cast<double>(failed) / static_cast<double>(index.entries.size()) >
          config.max_parse_failure_rate) {
    throw DataError("parse failure rate above max_parse_failure_rate");
  }
  return index;
}

std::vector<FileFeatures> run_features(const PipelineConfig& config) {
  if (config.corpus_root.empty()) throw UsageError("no corpus root given");
  const PipelinePaths paths{config.out_dir};
  if (!std::filesystem::exists(paths.index())) throw UsageError("index.json not found; run `scan` first");
  CorpusIndex index;
  try {
    index = index_from_json(read_text_file(paths.index()), config.corpus_root);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("index.json: ") + e.what());
  }
  std::vector<const CorpusEntry*> ok;
  for (const auto& e : index.entries) {
    if (e.status == ParseStatus::kOk) ok.push_back(&e);
  }
  std::vector<FileFeatures> features(ok.size());
  parallel_for(ok.size(), config.threads, [&](std::size_t i) {
    try {
      features[i] = extract_features(parse_midi_file(config.corpus_root / ok[i]->id, ok[i]->id));
    } catch (const MidiParseError& e) {
      throw DataError(ok[i]->id + ": " + e.what());
    }
  });
  std::sort(features.begin(), features.end(),
            [](const FileFeatures& a, const FileFeatures& b) { return a.id < b.id; });
  write_text_file(paths.features(), features_to_json(features));
  log("features: " + std::to_string(features.size()) + " files");
  return features;
}

std::vector<SimilarityEdge> run_detect(const PipelineConfig& config) {
  config.validate();
  const PipelinePaths paths{config.out_dir};
  const auto features = load_features(paths);
  std::vector<FileId> ids;
  for (const auto& f : features) ids.push_back(f.id);

  const DetectorParams params{config.emit_floor, config.prefilter_k, config.threads};
  std::vector<SimilarityEdge> edges;
  for (const auto& m : config.methods) {
    if (is_embedding(m)) continue;
    auto part = run_detector(parse_method(m), features, params);
    log("detect: " + std::string(method_name(parse_method(m))) + " " + std::to_string(part.size()) +
        " edges");
    edges.insert(edges.end(), part.begin(), part.end());
  }
  for (const auto& src : config.embeddings) {
    EmbeddingStore store;
    try {
      store = load_embeddings(src.manifest);
    } catch (const EmbeddingLoadError& e) {
      throw DataError(e.what());
    }
    const auto extra = unknown_ids(store, ids);
    if (!extra.empty()) {
      log("detect: warning: " + std::to_string(extra.size()) + " ids in " + src.manifest.string() +
          " are not in the corpus; their edges are dropped");
    }
    const std::set<FileId> unknown(extra.begin(), extra.end());
    auto part = pairwise_embedding_edges(store, config.emit_floor, src.label, config.threads);
    std::erase_if(part, [&](const SimilarityEdge& e) {
      return unknown.contains(e.id_a) || unknown.contains(e.id_b);
    });
    log("detect: " + embedding_method(src) + " " + std::to_string(part.size()) + " edges");
    edges.insert(edges.end(), part.begin(), part.end());
  }
  sort_and_dedupe(edges);
  write_text_file(paths.edges(), edges_to_csv(edges));
  return edges;
}

EvalReport run_eval(const PipelineConfig& config) {
  config.validate();
  if (!config.has_ground_truth()) throw UsageError("eval needs --ground-truth or --truth-from-paths");
  const PipelinePaths paths{config.out_dir};
  const auto features = load_features(paths);
  std::vector<FileId> ids;
  for (const auto& f : features) ids.push_back(f.id);
  const auto edges = load_edges(paths);
  const GroundTruth truth = load_ground_truth(config, ids);

  EvalReport report;
  ojson methods_json = ojson::object();
  for (const auto& method : config.method_set()) {
    std::vector<SimilarityEdge> own;
    for (const auto& e : edges) {
      if (e.method == method) own.push_back(e);
    }
    MethodReport mr;
    mr.retrieval = evaluate_retrieval(ids, truth, scorer_for(method, features, own, ids), config.threads);
    mr.sweep = sweep_threshold(own, truth, config.precision_floor, config.emit_floor);
    mr.at_threshold = classification_metrics(classify_pairs(own, {{method, mr.sweep.threshold}}), truth);
    if (config.conservative) {
      report.thresholds_used[method] = kConservativeThreshold;
    } else if (mr.sweep.reachable) {
      report.thresholds_used[method] = mr.sweep.threshold;
    } else {
      log("eval: " + method + " never reaches precision " + std::to_string(config.precision_floor) +
          "; left out of the union");
    }

    ojson mj;
    mj["ndcg_mean"] = mr.retrieval.ndcg_mean;
    mj["mrr_mean"] = mr.retrieval.mrr_mean;
    mj["queries"] = mr.retrieval.queries;
    mj["threshold"] = mr.sweep.threshold;
    mj["floor_reachable"] = mr.sweep.reachable;
    put_metrics(mj, mr.at_threshold);
    ojson curve = ojson::array();
    for (const auto& p : mr.sweep.curve) curve.push_back({p.threshold, p.precision, p.recall});
    mj["curve"] = std::move(curve);
    methods_json[method] = std::move(mj);
    report.methods.emplace(method, std::move(mr));
  }

  const PredictedPairs predicted = classify_pairs(edges, report.thresholds_used);
  report.union_metrics = classification_metrics(predicted, truth);

  ojson root;
  root["config"] = {{"emit_floor", config.emit_floor},
                    {"precision_floor", config.precision_floor},
                    {"prefilter_k", config.prefilter_k},
                    {"conservative", config.conservative},
                    {"seed", config.seed}};
  root["corpus"] = {{"files", ids.size()},
                    {"groups", truth.groups.size()},
                    {"duplicate_files", truth.duplicate_files().size()},
                    {"truth_pairs", truth.truth_pair_count()}};
  root["methods"] = std::move(methods_json);
  ojson uj;
  ojson members = ojson::array();
  for (const auto& [m, t] : report.thresholds_used) members.push_back(m);
  uj["method_set"] = std::move(members);
  uj["thresholds"] = report.thresholds_used;
  put_metrics(uj, report.union_metrics);
  root["union"] = std::move(uj);

  if (!config.bench.empty()) {
    std::set<FileId> detected;
    for (const auto& [a, b] : predicted) {
      if (truth.same_group(a, b)) {
        detected.insert(a);
        detected.insert(b);
      }
    }
    const std::set<FileId> present(ids.begin(), ids.end());
    std::map<std::string, std::pair<std::size_t, std::size_t>> by_profile;
    for (const auto& rec : nlohmann::json::parse(read_text_file(config.bench))) {
      if (rec.at("base_id").is_null()) continue;
      const auto id = rec.at("id").get<std::string>();
      if (!present.contains(id)) continue;
      auto& [files, hit] = by_profile[rec.value("profile", std::string("unknown"))];
      ++files;
      hit += detected.contains(id);
    }
    ojson vr = ojson::object();
    for (const auto& [profile, fh] : by_profile) {
      vr[profile] = {{"files", fh.first},
                     {"detected", fh.second},
                     {"recall", fh.first ? static_cast<double>(fh.second) / fh.first : 0.0}};
    }
    root["variant_recall"] = std::move(vr);
  }

  write_text_file(paths.report(), root.dump(1) + "\n");
  log("eval: union precision " + std::to_string(report.union_metrics.precision) + ", recall " +
      std::to_string(report.union_metrics.recall) + ", FN files " +
      std::to_string(report.union_metrics.fn_count));
  return report;
}

std::map<std::string, double> thresholds_from_report(const std::filesystem::path& report) {
  try {
    const auto j = nlohmann::json::parse(read_text_file(report));
    return j.at("union").at("thresholds").get<std::map<std::string, double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(report.string() + ": " + e.what());
  }
}

FilterCounts run_cluster(const PipelineConfig& config) {
  config.validate();
  const PipelinePaths paths{config.out_dir};
  const auto features = load_features(paths);
  const auto edges = load_edges(paths);

  std::map<std::string, double> thresholds;
  if (!config.conservative && std::filesystem::exists(paths.report())) {
    thresholds = thresholds_from_report(paths.report());
    log("cluster: using swept thresholds from report.json");
  } else {
    for (const auto& m : config.method_set()) thresholds[m] = config.threshold_for(m);
  }

  std::unordered_map<FileId, std::size_t> note_counts;
  for (const auto& f : features) note_counts[f.id] = f.note_count;
  const auto selection =
      select_representatives(connected_components(build_graph(classify_pairs(edges, thresholds))),
                             note_counts);
  const FilterCounts counts = emit_filter_list(selection, config.out_dir);
  log("cluster: " + std::to_string(counts.clusters) + " clusters, " +
      std::to_string(counts.filtered) + " duplicates to filter");
  return counts;
}

DedupSummary run_dedup(const PipelineConfig& config) {
  config.validate();
  DedupSummary summary;
  const CorpusIndex index = run_scan(config);
  summary.files = index.entries.size();
  summary.failed = index.failed_count();
  run_features(config);
  summary.edges = run_detect(config).size();
  const PipelinePaths paths{config.out_dir};
  if (config.has_ground_truth()) {
    summary.report = run_eval(config);
  } else {
    std::filesystem::remove(paths.report());
  }
  summary.counts = run_cluster(config);
  return summary;
}

// --- synthetic benchmark ----------------------------------------------------

Piece generate_base_piece(std::uint64_t seed, const FileId& id) {
  static constexpr int kMajor[] = {0, 2, 4, 5, 7, 9, 11};
  static constexpr int kMinor[] = {0, 2, 3, 5, 7, 8, 10};
  static constexpr int kDurations[] = {1, 2, 2, 3, 4, 4, 6, 8};
  static constexpr int kDrumKit[] = {36, 38, 42, 46, 49};

  CounterRng rng(seed);
  Piece p;
  p.id = id;
  p.ticks_per_quarter = 480;
  const int bars = rng.uniform_int(8, 32);
  const int numerator = rng.bernoulli(0.25) ? 3 : 4;
  const int bpm = rng.uniform_int(70, 160);
  const int root = rng.uniform_int(0, 11);
  const int* scale = rng.bernoulli(0.5) ? kMinor : kMajor;
  const int tracks = rng.uniform_int(1, 6);
  const Tick step = p.ticks_per_quarter / 4;
  const int total = bars * numerator * 4;

  bool have_drums = false;
  for (int t = 0; t < tracks; ++t) {
    const bool drum = t > 0 && !have_drums && rng.bernoulli(0.25);
    have_drums |= drum;
    const int program = rng.uniform_int(0, 127);
    const double density = 0.25 + 0.5 * rng.uniform();
    const int low = 12 * rng.uniform_int(3, 6);
    int degree = rng.uniform_int(0, 6);
    for (int slot = 0; slot < total;) {
      if (!rng.bernoulli(density)) {
        ++slot;
        continue;
      }
      const int d = std::min(kDurations[rng.uniform_int(0, 7)], total - slot);
      int pitch;
      if (drum) {
        pitch = kDrumKit[rng.uniform_int(0, 4)];
      } else {
        degree = std::clamp(degree + rng.uniform_int(-2, 2), 0, 13);
        pitch = low + root + scale[degree % 7] + 12 * (degree / 7);
      }
      const int velocity = rng.uniform_int(60, 110);
      p.notes.push_back({slot * step, d * step, pitch, velocity, drum ? 0 : program, drum, t});
      slot += d;
    }
  }
  if (p.notes.empty()) p.notes.push_back({0, 4 * step, 60 + root, 90, 0, false, 0});
  p.tempo_map = {{0, static_cast<double>(bpm)}};
  p.time_signatures = {{0, numerator, 4}};
  normalize(p);
  return p;
}

std::string_view profile_name(VariantProfile p) {
  switch (p) {
    case VariantProfile::kExact:
      return "exact";
    case VariantProfile::kRulePreserving:
      return "rule_preserving";
    case VariantProfile::kFull:
      return "full";
  }
  return "unknown";
}

VariantProfile profile_for_variant(int index) { return static_cast<VariantProfile>(index % 3); }

namespace {

AugmentationSpec profile_spec(VariantProfile p) {
  AugmentationSpec spec;
  switch (p) {
    case VariantProfile::kExact:
      spec.enabled = {AugmentKind::kInstOrder};
      spec.fire_probability = 1.0;
      break;
    case VariantProfile::kRulePreserving:
      spec.enabled = {AugmentKind::kInstMapping, AugmentKind::kVelocityShift,
                      AugmentKind::kOctaveShift, AugmentKind::kPitchTranspose,
                      AugmentKind::kInstOrder};
      spec.fire_probability = 0.5;
      break;
    case VariantProfile::kFull:
      spec = full_grammar();
      break;
  }
  return spec;
}

ojson applied_json(const std::vector<AppliedAugmentation>& applied) {
  ojson arr = ojson::array();
  for (const auto& a : applied) {
    ojson params = ojson::object();
    for (const auto& [k, v] : a.params) params[k] = v;
    arr.push_back({{"kind", augment_kind_name(a.kind)}, {"params", std::move(params)}});
  }
  return arr;
}

}  // namespace

BenchSummary run_synth_bench(int n_bases, int variants_per_base, std::uint64_t seed,
                             const std::filesystem::path& out_dir, int threads) {
  if (n_bases < 1 || variants_per_base < 0) throw UsageError("synth-bench needs n_bases >= 1");
  const auto corpus = out_dir / "corpus";
  std::filesystem::create_directories(corpus);

  struct GroupOutput {
    std::string group;
    std::vector<ojson> records;
  };
  std::vector<GroupOutput> groups(static_cast<std::size_t>(n_bases));
  parallel_for(groups.size(), threads, [&](std::size_t b) {
    char name[32];
    std::snprintf(name, sizeof name, "g%04zu", b);
    GroupOutput& out = groups[b];
    out.group = name;
    const FileId base_id = out.group + "/base.mid";
    const Piece base = generate_base_piece(derive_seed(seed, 2 * b), base_id);
    const auto base_bytes = write_midi(base);
    write_text_file(corpus / base_id,
                    std::string_view(reinterpret_cast<const char*>(base_bytes.data()), base_bytes.size()));
    out.records.push_back({{"id", base_id},
                           {"group", out.group},
                           {"base_id", nullptr},
                           {"profile", nullptr},
                           {"applied", ojson::array()}});

    const std::uint64_t variant_seed = derive_seed(seed, 2 * b + 1);
    for (int v = 0; v < variants_per_base; ++v) {
      const VariantProfile profile = profile_for_variant(v);
      auto variants = make_variant_set(base, 1, derive_seed(variant_seed, static_cast<std::uint64_t>(v)),
                                       profile_spec(profile));
      Variant& variant = variants.front();
      const FileId id = out.group + "/v" + std::to_string(v + 1) + ".mid";
      std::vector<MidiTrackMeta> meta;
      if (profile == VariantProfile::kExact) {
        // Metadata-only difference on top of the track shuffle.
        for (int t = 0; t < 16; ++t) meta.push_back({"copy " + std::to_string(v) + " part " + std::to_string(t)});
      }
      const auto bytes = write_midi(variant.piece, meta);
      write_text_file(corpus / id,
                      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
      out.records.push_back({{"id", id},
                             {"group", out.group},
                             {"base_id", base_id},
                             {"profile", profile_name(profile)},
                             {"seed", variant.seed},
                             {"applied", applied_json(variant.applied)}});
    }
  });

  ojson bench = ojson::array();
  std::map<std::string, std::vector<FileId>> truth_groups;
  BenchSummary summary;
  for (auto& g : groups) {
    for (auto& rec : g.records) {
      truth_groups[g.group].push_back(rec["id"].get<std::string>());
      bench.push_back(std::move(rec));
      ++summary.files;
    }
  }
  summary.groups = groups.size();
  write_text_file(out_dir / "bench.json", bench.dump(1) + "\n");
  write_text_file(out_dir / "ground_truth.json",
                  ground_truth_to_json(ground_truth_from_groups(std::move(truth_groups))));
  log("synth-bench: " + std::to_string(summary.files) + " files in " +
      std::to_string(summary.groups) + " groups");
  return summary;
}

}  // namespace mididedup
