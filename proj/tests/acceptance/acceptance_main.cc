/// @file
/// @brief Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.
///
/// Criteria 1-5 exercise the library against brute-force oracles. Criteria 6
/// and 7 drive the `mididedup` binary end to end. Criterion 8 needs the
/// LMD-clean corpus and runs only when MIDIDEDUP_LMD_CLEAN points at it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mididedup/augment.h"
#include "mididedup/cluster.h"
#include "mididedup/detectors.h"
#include "mididedup/embeddings.h"
#include "mididedup/eval.h"
#include "mididedup/pipeline.h"
#include "mididedup/rng.h"
#include "testing/oracles.h"

namespace fs = std::filesystem;
using namespace mididedup;

namespace {

struct Outcome {
  bool pass = true;
  bool skipped = false;
  std::string detail;
};

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_++ < 5) msgs_ << (msgs_.tellp() > 0 ? "; " : "") << what;
  }
  Outcome done(const std::string& summary) const {
    Outcome o;
    o.pass = failures_ == 0;
    o.detail = summary;
    if (failures_) o.detail += " | " + std::to_string(failures_) + " failures: " + msgs_.str();
    return o;
  }

 private:
  int failures_ = 0;
  std::ostringstream msgs_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// --- 1 ----------------------------------------------------------------------

Outcome dtw_oracle() {
  Check c;
  std::mt19937_64 rng(1);
  const auto t0 = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 500; ++trial) {
    Chromagram a, b;
    const int na = 1 + static_cast<int>(rng() % 6), nb = 1 + static_cast<int>(rng() % 6);
    // Sparse and dense frames, with some silence.
    for (int i = 0; i < na; ++i) a.frames.push_back(static_cast<std::uint16_t>(rng() & rng() & 0x0FFF));
    for (int i = 0; i < nb; ++i) b.frames.push_back(static_cast<std::uint16_t>(rng() & (trial % 2 ? rng() : ~0ull) & 0x0FFF));
    const double got = dtw_distance(a, b).distance;
    const double want = testing::dtw_exhaustive(a, b);
    c.expect(got == want, "pair " + std::to_string(trial) + ": " + fmt(got, 17) + " != " + fmt(want, 17));
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 10.0, "took " + fmt(secs, 2) + " s");
  return c.done("500 random pairs, T <= 6, exact equality, " + fmt(secs, 3) + " s");
}

// --- 2 ----------------------------------------------------------------------

Outcome metric_oracles() {
  Check c;
  struct RankFixture {
    std::vector<std::size_t> ranks;
    double ndcg;
  };
  const auto d = [](double r) { return 1.0 / std::log2(r + 1.0); };
  const std::vector<RankFixture> ndcg_fixtures{
      {{1}, 1.0},
      {{3}, 0.5},
      {{1, 2}, 1.0},
      {{2}, d(2)},
      {{7}, d(7)},
      {{1, 3}, (1 + 0.5) / (1 + d(2))},
      {{2, 3}, (d(2) + 0.5) / (1 + d(2))},
      {{1, 2, 3}, 1.0},
      {{2, 4, 6}, (d(2) + d(4) + d(6)) / (1 + d(2) + d(3))},
      {{5, 1}, (1 + d(5)) / (1 + d(2))},
      {{10, 20}, (d(10) + d(20)) / (1 + d(2))},
  };
  int fixtures = 0;
  for (const auto& f : ndcg_fixtures) {
    const double got = ndcg_from_ranks(f.ranks);
    c.expect(std::abs(got - f.ndcg) <= 1e-12, "ndcg fixture " + std::to_string(fixtures));
    ++fixtures;
  }
  struct MrrFixture {
    std::vector<std::size_t> first;
    double mrr;
  };
  const std::vector<MrrFixture> mrr_fixtures{
      {{1, 1, 1}, 1.0}, {{1, 4}, 0.625}, {{4}, 0.25}, {{2, 2}, 0.5}, {{1, 2, 3, 6}, (1 + 0.5 + 1.0 / 3 + 1.0 / 6) / 4},
  };
  for (const auto& f : mrr_fixtures) {
    c.expect(std::abs(mrr(f.first) - f.mrr) <= 1e-12, "mrr fixture " + std::to_string(fixtures));
    ++fixtures;
  }
  // Ranking path: query's only duplicate scored lowest among 5 files.
  {
    const std::vector<FileId> ids{"a/q.mid", "a/x.mid", "a/y.mid", "a/z.mid", "b/q.mid"};
    const std::vector<double> scores{0, 0.9, 0.8, 0.7, 0.1};
    const auto ranking = rank_candidates(ids, scores, 0);
    c.expect(std::abs(reciprocal_rank(ranking, {"b/q.mid"}) - 0.25) <= 1e-12, "rank fixture rr");
    c.expect(std::abs(ndcg_all(ranking, {"b/q.mid"}) - d(4)) <= 1e-12, "rank fixture ndcg");
    fixtures += 2;
  }

  std::mt19937 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 15)(rng);
    const int labels = std::uniform_int_distribution<int>(1, n)(rng);
    std::vector<FileId> files;
    std::vector<int> label;
    std::map<std::string, std::vector<FileId>> groups;
    for (int i = 0; i < n; ++i) {
      files.push_back("f" + std::to_string(i));
      label.push_back(std::uniform_int_distribution<int>(0, labels - 1)(rng));
      groups["g" + std::to_string(label.back())].push_back(files.back());
    }
    std::vector<SimilarityEdge> edges;
    std::set<std::pair<std::string, std::string>> predicted;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double s = std::uniform_int_distribution<int>(500, 1000)(rng) / 1000.0;
        edges.push_back(make_edge(files[i], files[j], "x", s));
        if (s >= 0.8) predicted.insert(std::minmax(files[i], files[j]));
      }
    const auto m = classification_metrics(classify_pairs(edges, {{"x", 0.8}}), ground_truth_from_groups(groups));
    const auto o = testing::classify_bruteforce(files, label, predicted);
    c.expect(m.precision == o.precision && m.recall == o.recall && m.fn_count == o.fn_count,
             "classification corpus " + std::to_string(trial));
  }
  return c.done(std::to_string(fixtures) + " ranking fixtures (incl. 0.5 and 0.625), 200 random corpora <= 15 files");
}

// --- 3 ----------------------------------------------------------------------

Outcome sweep_oracle() {
  Check c;
  std::mt19937 rng(3);
  int reachable = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = std::uniform_int_distribution<int>(4, 25)(rng);
    std::map<std::string, std::vector<FileId>> groups;
    std::vector<FileId> ids;
    for (int i = 0; i < n; ++i) {
      ids.push_back("f" + std::to_string(i));
      groups["g" + std::to_string(rng() % std::max(2, n / 3))].push_back(ids.back());
    }
    const auto truth = ground_truth_from_groups(groups);
    const double emit_floor = std::uniform_int_distribution<int>(0, 8)(rng) / 10.0;
    std::vector<SimilarityEdge> edges;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (rng() % 2) continue;
        const bool dup = truth.same_group(ids[i], ids[j]);
        const double lo = dup ? 0.55 : emit_floor, hi = dup ? 1.0 : 0.97;
        const double s = std::uniform_real_distribution<double>(std::max(lo, emit_floor), std::max(hi, emit_floor))(rng);
        edges.push_back(make_edge(ids[i], ids[j], "x", s));
      }
    const auto r = sweep_threshold(edges, truth, 0.9, emit_floor);
    const auto [t, ok] = testing::sweep_bruteforce(edges, truth, 0.9, emit_floor);
    c.expect(r.threshold == t && r.reachable == ok, "trial " + std::to_string(trial) + " disagrees with grid scan");
    if (!r.reachable) continue;
    ++reachable;
    const auto precision_at = [&](double thr) {
      return classification_metrics(classify_pairs(edges, {{"x", thr}}), truth).precision;
    };
    c.expect(precision_at(r.threshold) >= 0.9, "trial " + std::to_string(trial) + " precision below floor");
    const double below = std::round((r.threshold - 0.001) * 1000) / 1000;
    c.expect(below < emit_floor - 1e-12 || precision_at(below) < 0.9,
             "trial " + std::to_string(trial) + " threshold not minimal");
  }
  return c.done("100 random labelled edge sets, " + std::to_string(reachable) + " with a reachable floor");
}

// --- 4 ----------------------------------------------------------------------

Outcome cluster_oracle() {
  Check c;
  std::mt19937 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 50)(rng);
    const int m = std::uniform_int_distribution<int>(0, 2 * n)(rng);
    const auto name = [](int i) { return "n" + std::to_string(1000 + i); };
    std::vector<std::pair<int, int>> edges;
    PredictedPairs pairs;
    for (int e = 0; e < m; ++e) {
      const int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
      if (a == b) continue;
      edges.emplace_back(a, b);
      pairs.emplace(std::min(name(a), name(b)), std::max(name(a), name(b)));
    }
    std::unordered_map<FileId, std::size_t> notes;
    for (int i = 0; i < n; ++i) notes[name(i)] = rng() % 4;  // small range forces ties

    const auto comps = connected_components(build_graph(pairs));
    std::set<std::set<int>> got;
    for (const auto& comp : comps) {
      std::set<int> s;
      for (const auto& id : comp) s.insert(std::stoi(id.substr(1)) - 1000);
      got.insert(s);
    }
    std::set<std::set<int>> want;
    std::size_t expected_filter = 0;
    for (const auto& part : testing::closure_partition(n, edges)) {
      if (part.size() < 2) continue;
      want.insert(part);
      expected_filter += part.size() - 1;
    }
    c.expect(got == want, "graph " + std::to_string(trial) + " partition differs");

    const auto sel = select_representatives(comps, notes);
    c.expect(sel.filter.size() == expected_filter, "graph " + std::to_string(trial) + " filter size");
    for (const auto& cl : sel.clusters) {
      FileId best = cl.members.front();
      for (const auto& id : cl.members) {
        if (notes[id] > notes[best] || (notes[id] == notes[best] && id < best)) best = id;
      }
      c.expect(cl.representative == best, "graph " + std::to_string(trial) + " representative");
    }
  }
  return c.done("200 random graphs <= 50 nodes vs transitive closure");
}

// --- 5 ----------------------------------------------------------------------

HashSignature hash_of(const Piece& p) { return hash_signature(encode_octuple(p)); }
double entropy_of(const Piece& p) { return beat_position_entropy(beat_position_histogram(p)).bits; }

Piece reparsed(const Piece& p, std::span<const MidiTrackMeta> meta = {}) { return parse_midi(write_midi(p, meta), p.id); }

bool unique_mode(const Chromagram& c) {
  std::array<int, 12> occ{};
  for (auto f : c.frames)
    for (int pc = 0; pc < 12; ++pc) occ[pc] += (f >> pc) & 1;
  const int top = *std::max_element(occ.begin(), occ.end());
  return std::count(occ.begin(), occ.end(), top) == 1;
}

Outcome invariance_suite() {
  Check c;
  int unique_mode_pieces = 0, transposes = 0;
  for (int i = 0; i < 100; ++i) {
    const std::string tag = "piece " + std::to_string(i);
    const Piece base = reparsed(generate_base_piece(derive_seed(5, i), "inv/" + std::to_string(i) + ".mid"));

    // (a) track reorder and metadata-only change
    AugmentationSpec reorder;
    reorder.rng_seed = derive_seed(50, i);
    reorder.enabled = {AugmentKind::kInstOrder};
    Piece reversed = base;
    int max_track = 0;
    for (const auto& n : base.notes) max_track = std::max(max_track, n.track_index);
    for (auto& n : reversed.notes) n.track_index = max_track - n.track_index;
    normalize(reversed);
    const std::vector<MidiTrackMeta> names(16, MidiTrackMeta{"renamed " + std::to_string(i)});
    for (const Piece& v : {reparsed(apply_augmentation(base, reorder).piece), reparsed(reversed),
                           reparsed(base, names)}) {
      c.expect(hash_similarity(hash_of(base), hash_of(v)) == 1.0, tag + " (a) hash changed");
    }

    // (b) instrument remap: hash breaks, entropy holds
    AugmentationSpec remap;
    remap.rng_seed = derive_seed(51, i);
    remap.enabled = {AugmentKind::kInstMapping};
    const Piece mapped = reparsed(apply_augmentation(base, remap).piece);
    c.expect(hash_similarity(hash_of(base), hash_of(mapped)) == 0.0, tag + " (b) hash survived remap");
    c.expect(entropy_similarity(entropy_of(base), entropy_of(mapped)) == 1.0, tag + " (b) entropy moved");

    // (c) transposition, pieces with a unique modal pitch class
    const Chromagram chroma = chromagram(base);
    if (unique_mode(chroma)) {
      ++unique_mode_pieces;
      for (int k = -6; k <= 6; ++k) {
        AugmentationSpec tr;
        tr.enabled = {AugmentKind::kPitchTranspose};
        tr.pitch_transpose = k;
        c.expect(chroma_similarity(base, apply_augmentation(base, tr).piece) == 1.0,
                 tag + " (c) transpose " + std::to_string(k));
        ++transposes;
      }
    }

    // (d) exact entropy invariance
    for (auto kind : {AugmentKind::kVelocityShift, AugmentKind::kOctaveShift, AugmentKind::kInstMapping}) {
      AugmentationSpec spec;
      spec.rng_seed = derive_seed(52, i);
      spec.enabled = {kind};
      c.expect(entropy_of(apply_augmentation(base, spec).piece) == entropy_of(base),
               tag + " (d) " + std::string(augment_kind_name(kind)));
    }
    AugmentationSpec all;
    all.rng_seed = derive_seed(53, i);
    all.enabled = {AugmentKind::kVelocityShift, AugmentKind::kOctaveShift, AugmentKind::kInstMapping};
    c.expect(entropy_of(apply_augmentation(base, all).piece) == entropy_of(base), tag + " (d) combined");
  }
  c.expect(unique_mode_pieces >= 50, "only " + std::to_string(unique_mode_pieces) + " pieces with a unique mode");
  return c.done("100 pieces; (c) ran " + std::to_string(transposes) + " transpositions over " +
                std::to_string(unique_mode_pieces) + " unique-mode pieces");
}

// --- 6, 7 -------------------------------------------------------------------

int run(const std::string& cmd) {
  const int rc = std::system((cmd + " 2>>" + "acceptance_cli.log").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) { return fs::exists(p) ? read_text_file(p) : std::string("<missing>"); }

Outcome synthetic_benchmark(const std::string& cli, const fs::path& work) {
  Check c;
  const fs::path bench = work / "bench";
  fs::remove_all(bench);
  const auto t0 = std::chrono::steady_clock::now();
  c.expect(run(cli + " synth-bench --bases 200 --variants 3 --seed 42 --out-dir " + bench.string()) == 0,
           "synth-bench failed");
  const double gen_secs = seconds_since(t0);
  const std::string dedup = cli + " dedup --seed 42 --corpus " + (bench / "corpus").string() + " --ground-truth " +
                            (bench / "ground_truth.json").string() + " --bench " + (bench / "bench.json").string() +
                            " --methods hash,entropy,chroma_dtw";
  double worst = 0;
  for (int threads : {1, 8}) {
    const auto t1 = std::chrono::steady_clock::now();
    c.expect(run(dedup + " --threads " + std::to_string(threads) + " --out-dir " +
                 (bench / ("out" + std::to_string(threads))).string()) == 0,
             "dedup --threads " + std::to_string(threads) + " failed");
    worst = std::max(worst, seconds_since(t1));
  }
  const double total = gen_secs + worst;
  c.expect(total < 300.0, "runtime " + fmt(total, 1) + " s");
  for (const char* f : {"report.json", "edges.csv", "filter_list.txt", "clusters.json", "features.json"}) {
    c.expect(slurp(bench / "out1" / f) == slurp(bench / "out8" / f), std::string(f) + " differs across --threads");
  }
  double precision = 0, recall_exact = 0;
  try {
    const auto report = nlohmann::json::parse(read_text_file(bench / "out1" / "report.json"));
    precision = report.at("union").at("precision").get<double>();
    recall_exact = report.at("variant_recall").at("exact").at("recall").get<double>();
    for (const char* m : {"hash", "entropy", "chroma_dtw"}) {
      c.expect(report.at("methods").contains(m), std::string("report lacks ") + m);
    }
  } catch (const std::exception& e) {
    c.expect(false, std::string("report.json: ") + e.what());
  }
  c.expect(precision >= 0.9, "union precision " + fmt(precision));
  c.expect(recall_exact >= 0.8, "hash-detectable recall " + fmt(recall_exact));
  return c.done("800 files; union precision " + fmt(precision) + ", exact-copy file recall " + fmt(recall_exact) +
                ", threads 1 vs 8 byte-identical, " + fmt(total, 1) + " s (generate + slowest dedup)");
}

// Two synthetic stores ("near" and "far") with per-group centres, so the
// embedding path is part of the determinism check.
void write_synthetic_stores(const fs::path& bench) {
  const auto truth = ground_truth_from_json(read_text_file(bench / "ground_truth.json"));
  for (const auto& [label, noise] : std::vector<std::pair<std::string, double>>{{"near", 0.02}, {"far", 0.3}}) {
    EmbeddingStore store;
    store.dim = 16;
    store.model_tag = "synthetic:" + label;
    CounterRng rng(label == "near" ? 1 : 2);
    for (const auto& [key, ids] : truth.groups) {
      std::vector<float> centre(store.dim);
      for (auto& v : centre) v = static_cast<float>(rng.uniform() * 2 - 1);
      for (const auto& id : ids) {
        store.ids.push_back(id);
        for (float v : centre) store.matrix.push_back(v + static_cast<float>(noise * (rng.uniform() * 2 - 1)));
      }
    }
    save_embeddings(store, bench / ("store_" + label + ".json"));
  }
}

Outcome determinism(const std::string& cli, const fs::path& work) {
  Check c;
  const fs::path bench = work / "determinism";
  fs::remove_all(bench);
  c.expect(run(cli + " synth-bench --bases 60 --variants 3 --seed 7 --out-dir " + bench.string()) == 0,
           "synth-bench failed");
  write_synthetic_stores(bench);
  const std::string dedup = cli + " dedup --seed 7 --corpus " + (bench / "corpus").string() + " --ground-truth " +
                            (bench / "ground_truth.json").string() + " --methods hash,entropy,chroma_dtw,embedding" +
                            " --embeddings near=" + (bench / "store_near.json").string() +
                            " --embeddings far=" + (bench / "store_far.json").string();
  for (const char* out : {"run_a", "run_b"}) {
    c.expect(run(dedup + " --out-dir " + (bench / out).string()) == 0, std::string("dedup ") + out + " failed");
  }
  for (const char* f : {"edges.csv", "report.json", "filter_list.txt"}) {
    const auto a = slurp(bench / "run_a" / f);
    c.expect(a != "<missing>", std::string(f) + " missing");
    c.expect(a == slurp(bench / "run_b" / f), std::string(f) + " differs between runs");
  }
  const auto edges = slurp(bench / "run_a" / "edges.csv");
  c.expect(edges.find(",embedding:near,") != std::string::npos, "no embedding:near edges");
  return c.done("240 files + two synthetic embedding stores; edges.csv, report.json, filter_list.txt identical");
}

// --- 8 ----------------------------------------------------------------------

Outcome lmd_clean(const std::string& cli, const fs::path& work) {
  const char* root = std::getenv("MIDIDEDUP_LMD_CLEAN");
  if (!root || !*root) {
    Outcome o;
    o.skipped = true;
    o.detail = "optional full-scale check; set MIDIDEDUP_LMD_CLEAN to the LMD-clean directory";
    return o;
  }
  Check c;
  const auto files = list_midi_files(root);
  const auto truth = ground_truth_from_paths(files);
  const std::size_t in_groups = truth.duplicate_files().size();
  c.expect(files.size() == 17184, "file count " + std::to_string(files.size()));
  c.expect(in_groups == 10355, "files in groups >= 2: " + std::to_string(in_groups));

  const fs::path out = work / "lmd";
  c.expect(run(cli + " dedup --truth-from-paths --max-failure-rate 1 --methods hash,entropy,chroma_dtw --corpus " +
               std::string(root) + " --out-dir " + out.string()) == 0,
           "dedup failed");
  std::map<std::string, double> f1, precision;
  try {
    const auto report = nlohmann::json::parse(read_text_file(out / "report.json"));
    for (const char* m : {"hash", "entropy", "chroma_dtw"}) {
      f1[m] = report.at("methods").at(m).at("f1").get<double>();
      precision[m] = report.at("methods").at(m).at("precision").get<double>();
    }
  } catch (const std::exception& e) {
    c.expect(false, std::string("report.json: ") + e.what());
  }
  c.expect(f1["entropy"] > f1["hash"] && f1["hash"] > f1["chroma_dtw"], "F1 ordering");
  c.expect(precision["hash"] > 0.9, "hash precision " + fmt(precision["hash"]));
  return c.done(std::to_string(files.size()) + " files, " + std::to_string(in_groups) + " in groups; F1 hash " +
                fmt(f1["hash"]) + ", entropy " + fmt(f1["entropy"]) + ", chroma " + fmt(f1["chroma_dtw"]));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mididedup acceptance criteria"};
  std::string cli = "mididedup";
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--cli", cli, "Path to the mididedup binary");
  app.add_option("--work-dir", work, "Scratch directory");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  if (cli.find('/') != std::string::npos) cli = fs::absolute(cli).string();
  fs::create_directories(work);
  fs::current_path(work);
  const fs::path work_dir = fs::current_path();

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"DTW oracle equivalence", dtw_oracle},
      {"Metric oracles", metric_oracles},
      {"Threshold sweep", sweep_oracle},
      {"Clustering oracle", cluster_oracle},
      {"Invariance suite", invariance_suite},
      {"Synthetic end-to-end benchmark", [&] { return synthetic_benchmark(cli, work_dir); }},
      {"Determinism", [&] { return determinism(cli, work_dir); }},
      {"LMD-clean full scale", [&] { return lmd_clean(cli, work_dir); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const char* status = o.skipped ? "SKIP" : (o.pass ? "PASS" : "FAIL");
    if (!o.skipped && !o.pass) ++failed;
    std::cout << "[" << status << "] " << number << ". " << criteria[i].first << ": " << o.detail << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
