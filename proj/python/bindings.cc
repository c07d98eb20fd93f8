/// @file
/// @brief Python module `mididedup._core`.

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

#include "mididedup/augment.h"
#include "mididedup/cluster.h"
#include "mididedup/detectors.h"
#include "mididedup/edges.h"
#include "mididedup/embeddings.h"
#include "mididedup/eval.h"
#include "mididedup/features.h"
#include "mididedup/midi.h"
#include "mididedup/octuple.h"
#include "mididedup/pipeline.h"

namespace py = pybind11;
using namespace mididedup;

namespace {

std::vector<std::uint8_t> as_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

py::dict metrics_dict(const ClassificationMetrics& m) {
  py::dict d;
  d["precision"] = m.precision;
  d["recall"] = m.recall;
  d["f1"] = m.f1;
  d["fn_count"] = m.fn_count;
  d["true_positives"] = m.true_positives;
  d["predicted"] = m.predicted;
  d["truth_pairs"] = m.truth_pairs;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Near-duplicate detection for MIDI corpora";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<EmbeddingLoadError>(m, "EmbeddingLoadError", PyExc_RuntimeError);
  py::register_exception<DegenerateVariant>(m, "DegenerateVariant", PyExc_RuntimeError);

  // --- pieces ---------------------------------------------------------------

  py::class_<NoteEvent>(m, "NoteEvent")
      .def(py::init<>())
      .def(py::init([](Tick onset, Tick duration, int pitch, int velocity, int program, bool is_drum,
                       int track_index) {
             return NoteEvent{onset, duration, pitch, velocity, program, is_drum, track_index};
           }),
           py::arg("onset"), py::arg("duration"), py::arg("pitch"), py::arg("velocity") = 100,
           py::arg("program") = 0, py::arg("is_drum") = false, py::arg("track_index") = 0)
      .def_readwrite("onset", &NoteEvent::onset)
      .def_readwrite("duration", &NoteEvent::duration)
      .def_readwrite("pitch", &NoteEvent::pitch)
      .def_readwrite("velocity", &NoteEvent::velocity)
      .def_readwrite("program", &NoteEvent::program)
      .def_readwrite("is_drum", &NoteEvent::is_drum)
      .def_readwrite("track_index", &NoteEvent::track_index)
      .def(py::self == py::self)
      .def("__repr__", [](const NoteEvent& n) {
        return "NoteEvent(onset=" + std::to_string(n.onset) + ", duration=" + std::to_string(n.duration) +
               ", pitch=" + std::to_string(n.pitch) + ")";
      });

  py::class_<TempoChange>(m, "TempoChange")
      .def(py::init<>())
      .def_readwrite("tick", &TempoChange::tick)
      .def_readwrite("bpm", &TempoChange::bpm);

  py::class_<TimeSignature>(m, "TimeSignature")
      .def(py::init<>())
      .def_readwrite("tick", &TimeSignature::tick)
      .def_readwrite("numerator", &TimeSignature::numerator)
      .def_readwrite("denominator", &TimeSignature::denominator);

  py::class_<Piece>(m, "Piece")
      .def(py::init<>())
      .def_readwrite("id", &Piece::id)
      .def_readwrite("notes", &Piece::notes)
      .def_readwrite("tempo_map", &Piece::tempo_map)
      .def_readwrite("time_signatures", &Piece::time_signatures)
      .def_readwrite("ticks_per_quarter", &Piece::ticks_per_quarter)
      .def(py::self == py::self)
      .def("__len__", [](const Piece& p) { return p.notes.size(); });

  m.def(
      "parse_midi", [](const py::bytes& data, const FileId& id) { return parse_midi(as_bytes(data), id); },
      py::arg("data"), py::arg("id") = "");
  m.def("parse_midi_file", &parse_midi_file, py::arg("path"), py::arg("id") = "");
  m.def(
      "write_midi",
      [](const Piece& p) {
        const auto bytes = write_midi(p);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      },
      py::arg("piece"));
  m.def("list_midi_files", &list_midi_files, py::arg("root"));

  // --- detectors ------------------------------------------------------------

  m.def(
      "encoding_preimage", [](const Piece& p) { return py::bytes(serialize_tokens(encode_octuple(p))); },
      py::arg("piece"));
  m.def(
      "encoding_hash", [](const Piece& p) { return to_hex(hash_signature(encode_octuple(p)).digest); },
      py::arg("piece"));
  m.def(
      "beat_position_entropy",
      [](const Piece& p) -> py::object {
        const auto e = beat_position_entropy(beat_position_histogram(p));
        if (e.empty) return py::none();
        return py::float_(e.bits);
      },
      py::arg("piece"));
  m.def("entropy_similarity", &entropy_similarity, py::arg("e1"), py::arg("e2"));
  m.def(
      "chromagram", [](const Piece& p) { return chromagram(p).frames; }, py::arg("piece"));
  m.def(
      "dtw_distance",
      [](std::vector<std::uint16_t> a, std::vector<std::uint16_t> b) {
        return dtw_distance(Chromagram{std::move(a)}, Chromagram{std::move(b)}).distance;
      },
      py::arg("a"), py::arg("b"));
  m.def("frame_cost", &frame_cost, py::arg("a"), py::arg("b"));
  m.def(
      "chroma_similarity", [](const Piece& a, const Piece& b) { return chroma_similarity(a, b); },
      py::arg("ref"), py::arg("other"));
  m.def(
      "embedding_cosine",
      [](const std::vector<float>& u, const std::vector<float>& v) { return embedding_cosine(u, v); },
      py::arg("u"), py::arg("v"));

  // --- edges and embeddings -------------------------------------------------

  py::class_<SimilarityEdge>(m, "SimilarityEdge")
      .def_readonly("id_a", &SimilarityEdge::id_a)
      .def_readonly("id_b", &SimilarityEdge::id_b)
      .def_readonly("method", &SimilarityEdge::method)
      .def_readonly("score", &SimilarityEdge::score)
      .def_readonly("raw", &SimilarityEdge::raw)
      .def("__repr__", [](const SimilarityEdge& e) {
        return "SimilarityEdge(" + e.id_a + ", " + e.id_b + ", " + e.method + ", " + std::to_string(e.score) + ")";
      });
  m.def("make_edge", &make_edge, py::arg("a"), py::arg("b"), py::arg("method"), py::arg("score"),
        py::arg("raw") = py::none());
  m.def(
      "edges_to_csv", [](const std::vector<SimilarityEdge>& e) { return edges_to_csv(e); }, py::arg("edges"));
  m.def("edges_from_csv", &edges_from_csv, py::arg("text"));

  py::class_<EmbeddingStore>(m, "EmbeddingStore")
      .def(py::init<>())
      .def_readwrite("ids", &EmbeddingStore::ids)
      .def_readwrite("dim", &EmbeddingStore::dim)
      .def_readwrite("matrix", &EmbeddingStore::matrix)
      .def_readwrite("model_tag", &EmbeddingStore::model_tag)
      .def("__len__", &EmbeddingStore::count);
  m.def("load_embeddings", &load_embeddings, py::arg("manifest"));
  m.def("save_embeddings", &save_embeddings, py::arg("store"), py::arg("manifest"));
  m.def("pairwise_embedding_edges", &pairwise_embedding_edges, py::arg("store"), py::arg("emit_floor"),
        py::arg("label") = "", py::arg("threads") = 1);

  // --- augmentation ---------------------------------------------------------

  m.def(
      "augment",
      [](const Piece& p, const std::vector<std::string>& kinds, std::uint64_t seed, double fire_probability) {
        AugmentationSpec spec;
        spec.rng_seed = seed;
        spec.fire_probability = fire_probability;
        for (const auto& k : kinds) spec.enabled.insert(parse_augment_kind(k));
        return apply_augmentation(p, spec).piece;
      },
      py::arg("piece"), py::arg("kinds"), py::arg("seed"), py::arg("fire_probability") = 1.0);
  m.def("generate_base_piece", &generate_base_piece, py::arg("seed"), py::arg("id") = "");

  // --- evaluation -----------------------------------------------------------

  m.def(
      "ground_truth_from_paths",
      [](const std::vector<FileId>& ids) { return ground_truth_from_paths(ids).groups; }, py::arg("ids"));
  m.def("title_key", &title_key, py::arg("id"));
  m.def(
      "ndcg_from_ranks", [](const std::vector<std::size_t>& r) { return ndcg_from_ranks(r); }, py::arg("ranks"));
  m.def(
      "mrr", [](const std::vector<std::size_t>& r) { return mrr(r); }, py::arg("first_relevant_ranks"));
  m.def(
      "classify",
      [](const std::vector<SimilarityEdge>& edges, const std::map<std::string, double>& thresholds,
         const std::map<std::string, std::vector<FileId>>& groups) {
        const auto truth = ground_truth_from_groups(groups);
        return metrics_dict(classification_metrics(classify_pairs(edges, thresholds), truth));
      },
      py::arg("edges"), py::arg("thresholds"), py::arg("groups"));
  m.def(
      "sweep_threshold",
      [](const std::vector<SimilarityEdge>& edges, const std::map<std::string, std::vector<FileId>>& groups,
         double precision_floor, double emit_floor) {
        const auto r = sweep_threshold(edges, ground_truth_from_groups(groups), precision_floor, emit_floor);
        return py::make_tuple(r.threshold, r.reachable);
      },
      py::arg("edges"), py::arg("groups"), py::arg("precision_floor") = kDefaultPrecisionFloor,
      py::arg("emit_floor") = kDefaultEmitFloor);
  m.def(
      "connected_components",
      [](const std::vector<std::pair<FileId, FileId>>& pairs) {
        PredictedPairs p(pairs.begin(), pairs.end());
        return connected_components(build_graph(p));
      },
      py::arg("pairs"));

  // --- pipeline -------------------------------------------------------------

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_static(
          "from_json", [](const std::string& text) { return config_from_json(text); }, py::arg("text"))
      .def_readwrite("methods", &PipelineConfig::methods)
      .def_readwrite("thresholds", &PipelineConfig::thresholds)
      .def_readwrite("emit_floor", &PipelineConfig::emit_floor)
      .def_readwrite("prefilter_k", &PipelineConfig::prefilter_k)
      .def_readwrite("precision_floor", &PipelineConfig::precision_floor)
      .def_readwrite("conservative", &PipelineConfig::conservative)
      .def_readwrite("corpus_root", &PipelineConfig::corpus_root)
      .def_readwrite("out_dir", &PipelineConfig::out_dir)
      .def_readwrite("ground_truth", &PipelineConfig::ground_truth)
      .def_readwrite("ground_truth_from_paths", &PipelineConfig::ground_truth_from_paths)
      .def_readwrite("bench", &PipelineConfig::bench)
      .def_readwrite("seed", &PipelineConfig::seed)
      .def_readwrite("threads", &PipelineConfig::threads)
      .def_readwrite("max_parse_failure_rate", &PipelineConfig::max_parse_failure_rate)
      .def(
          "add_embeddings",
          [](PipelineConfig& c, const std::filesystem::path& manifest, const std::string& label) {
            c.embeddings.push_back({label, manifest});
          },
          py::arg("manifest"), py::arg("label") = "")
      .def("method_set", &PipelineConfig::method_set)
      .def("validate", &PipelineConfig::validate);

  const auto released = py::call_guard<py::gil_scoped_release>();
  m.def(
      "run_scan", [](const PipelineConfig& c) { return run_scan(c).entries.size(); }, py::arg("config"), released);
  m.def(
      "run_features", [](const PipelineConfig& c) { return run_features(c).size(); }, py::arg("config"),
      released);
  m.def("run_detect", &run_detect, py::arg("config"), released);
  m.def(
      "run_eval",
      [](const PipelineConfig& c) {
        const auto r = [&] {
          py::gil_scoped_release release;
          return run_eval(c);
        }();
        py::dict d;
        d["thresholds"] = r.thresholds_used;
        d["union"] = metrics_dict(r.union_metrics);
        return d;
      },
      py::arg("config"));
  m.def(
      "run_cluster",
      [](const PipelineConfig& c) {
        const auto f = run_cluster(c);
        return py::make_tuple(f.clusters, f.filtered);
      },
      py::arg("config"));
  m.def(
      "run_dedup",
      [](const PipelineConfig& c) {
        const auto s = [&] {
          py::gil_scoped_release release;
          return run_dedup(c);
        }();
        py::dict d;
        d["files"] = s.files;
        d["failed"] = s.failed;
        d["edges"] = s.edges;
        d["clusters"] = s.counts.clusters;
        d["filtered"] = s.counts.filtered;
        if (s.report) d["union"] = metrics_dict(s.report->union_metrics);
        return d;
      },
      py::arg("config"));
  m.def(
      "run_synth_bench",
      [](int bases, int variants, std::uint64_t seed, const std::filesystem::path& out, int threads) {
        const auto s = [&] {
          py::gil_scoped_release release;
          return run_synth_bench(bases, variants, seed, out, threads);
        }();
        return py::make_tuple(s.files, s.groups);
      },
      py::arg("bases"), py::arg("variants"), py::arg("seed"), py::arg("out_dir"), py::arg("threads") = 1);
}
