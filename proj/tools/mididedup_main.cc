/// @file
/// @brief `mididedup` command line: scan, features, detect, eval, cluster,
/// dedup and synth-bench.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mididedup/pipeline.h"

namespace {

using mididedup::PipelineConfig;

struct Flags {
  std::string config;
  std::string out_dir;
  std::string corpus;
  std::vector<std::string> methods;
  std::vector<std::string> thresholds;  // method=value
  std::vector<std::string> embeddings;  // [label=]manifest
  std::string ground_truth;
  std::string bench;
  double emit_floor = -1;
  double precision_floor = -1;
  double max_failure_rate = -1;
  long long prefilter_k = -1;
  long long threads = -1;
  long long seed = -1;
  bool conservative = false;
  bool truth_from_paths = false;
};

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) return {"", s};
  return {s.substr(0, eq), s.substr(eq + 1)};
}

PipelineConfig resolve(const Flags& f) {
  PipelineConfig c;
  if (!f.config.empty()) c = mididedup::config_from_json(mididedup::read_text_file(f.config));
  if (!f.out_dir.empty()) c.out_dir = f.out_dir;
  if (!f.corpus.empty()) c.corpus_root = f.corpus;
  if (!f.methods.empty()) c.methods = f.methods;
  for (const auto& t : f.thresholds) {
    const auto [method, value] = split_assignment(t);
    if (method.empty()) throw mididedup::UsageError("--threshold expects METHOD=VALUE, got " + t);
    try {
      c.thresholds[method] = std::stod(value);
    } catch (const std::exception&) {
      throw mididedup::UsageError("bad threshold value in " + t);
    }
  }
  if (!f.embeddings.empty()) {
    c.embeddings.clear();
    for (const auto& e : f.embeddings) {
      const auto [label, path] = split_assignment(e);
      c.embeddings.push_back({label, path});
    }
  }
  if (!f.ground_truth.empty()) c.ground_truth = f.ground_truth;
  if (f.truth_from_paths) c.ground_truth_from_paths = true;
  if (!f.bench.empty()) c.bench = f.bench;
  if (f.emit_floor >= 0) c.emit_floor = f.emit_floor;
  if (f.precision_floor >= 0) c.precision_floor = f.precision_floor;
  if (f.max_failure_rate >= 0) c.max_parse_failure_rate = f.max_failure_rate;
  if (f.prefilter_k >= 0) c.prefilter_k = static_cast<std::size_t>(f.prefilter_k);
  if (f.threads >= 0) c.threads = static_cast<int>(f.threads);
  if (f.seed >= 0) c.seed = static_cast<std::uint64_t>(f.seed);
  if (f.conservative) c.conservative = true;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIDI corpus de-duplication"};
  app.require_subcommand(1);
  Flags f;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--out-dir", f.out_dir, "Output directory");
    cmd->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "Seed")->check(CLI::NonNegativeNumber);
  };
  const auto add_detect = [&](CLI::App* cmd) {
    cmd->add_option("--methods", f.methods, "hash, entropy, chroma_dtw, embedding")->delimiter(',');
    cmd->add_option("--embeddings", f.embeddings, "[LABEL=]store.json (repeatable)");
    cmd->add_option("--emit-floor", f.emit_floor, "Minimum score written to edges.csv");
    cmd->add_option("--prefilter-k", f.prefilter_k, "KL prefilter candidates per query");
  };
  const auto add_truth = [&](CLI::App* cmd) {
    cmd->add_option("--ground-truth", f.ground_truth, "ground_truth.json");
    cmd->add_flag("--truth-from-paths", f.truth_from_paths, "Group files by artist/title path");
    cmd->add_option("--bench", f.bench, "bench.json for per-profile recall");
    cmd->add_option("--precision-floor", f.precision_floor, "Pair precision the sweep must reach");
  };
  const auto add_cluster = [&](CLI::App* cmd) {
    cmd->add_option("--threshold", f.thresholds, "METHOD=VALUE (repeatable)");
    cmd->add_flag("--conservative", f.conservative, "Every threshold 0.99");
  };

  auto* scan = app.add_subcommand("scan", "Index and parse a corpus");
  add_common(scan);
  scan->add_option("--corpus", f.corpus, "Corpus root");
  scan->add_option("--max-failure-rate", f.max_failure_rate, "Tolerated parse failure rate");

  auto* features = app.add_subcommand("features", "Extract per-file features");
  add_common(features);
  features->add_option("--corpus", f.corpus, "Corpus root");

  auto* detect = app.add_subcommand("detect", "Score candidate pairs");
  add_common(detect);
  add_detect(detect);

  auto* eval = app.add_subcommand("eval", "Retrieval and classification report");
  add_common(eval);
  add_detect(eval);
  add_truth(eval);
  eval->add_flag("--conservative", f.conservative, "Every threshold 0.99");

  auto* cluster = app.add_subcommand("cluster", "Group duplicates and write the filter list");
  add_common(cluster);
  add_cluster(cluster);
  cluster->add_option("--methods", f.methods, "Methods to union")->delimiter(',');
  cluster->add_option("--embeddings", f.embeddings, "[LABEL=]store.json (repeatable)");

  auto* dedup = app.add_subcommand("dedup", "scan, features, detect, eval and cluster");
  add_common(dedup);
  add_detect(dedup);
  add_truth(dedup);
  add_cluster(dedup);
  dedup->add_option("--corpus", f.corpus, "Corpus root");
  dedup->add_option("--max-failure-rate", f.max_failure_rate, "Tolerated parse failure rate");

  int bases = 200, variants = 3;
  auto* synth = app.add_subcommand("synth-bench", "Generate a labelled synthetic corpus");
  add_common(synth);
  synth->add_option("--bases", bases, "Base pieces")->check(CLI::PositiveNumber);
  synth->add_option("--variants", variants, "Variants per base")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const PipelineConfig config = resolve(f);
    if (*scan) {
      mididedup::run_scan(config);
    } else if (*features) {
      mididedup::run_features(config);
    } else if (*detect) {
      mididedup::run_detect(config);
    } else if (*eval) {
      mididedup::run_eval(config);
    } else if (*cluster) {
      mididedup::run_cluster(config);
    } else if (*dedup) {
      const auto s = mididedup::run_dedup(config);
      std::cerr << "[mididedup] dedup: " << s.files << " files, " << s.counts.clusters << " clusters, "
                << s.counts.filtered << " duplicates\n";
    } else if (*synth) {
      mididedup::run_synth_bench(bases, variants, config.seed, config.out_dir, config.threads);
    }
  } catch (const mididedup::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
