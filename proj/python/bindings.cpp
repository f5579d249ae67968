#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "astray/corpus.hpp"
#include "astray/detect.hpp"
#include "astray/features.hpp"
#include "astray/parser.hpp"
#include "astray/preprocess.hpp"
#include "astray/report.hpp"

namespace py = pybind11;
using namespace astray;

namespace {

py::dict tree_to_dict(const SyntaxNode& node) {
    py::dict d;
    d["kind"] = std::string(node_kind_label(node.kind));
    py::list children;
    for (const SyntaxNode& child : node.children) children.append(tree_to_dict(child));
    d["children"] = children;
    if (!node.text.empty()) d["text"] = node.text;
    d["span"] = py::make_tuple(node.span.first_line, node.span.last_line);
    return d;
}

NGramCounts counts_from_dict(const py::dict& counts) {
    NGramCounts out;
    for (auto item : counts) {
        NGram gram;
        for (auto part : item.first.cast<py::tuple>()) {
            gram.items.push_back(part.cast<std::string>());
        }
        out[gram] = item.second.cast<std::uint64_t>();
    }
    return out;
}

py::dict counts_to_dict(const NGramCounts& counts) {
    py::dict out;
    for (const auto& [gram, count] : counts) {
        py::tuple key(gram.items.size());
        for (std::size_t i = 0; i < gram.items.size(); ++i) key[i] = gram.items[i];
        out[key] = count;
    }
    return out;
}

py::dict record_to_dict(const AnomalyRecord& r) {
    py::dict d;
    d["unit_id"] = r.unit_id;
    d["kind"] = std::string(anomaly_kind_label(r.kind));
    py::list detectors;
    for (const DetectorEntry& e : r.detectors) {
        py::dict entry;
        entry["name"] = e.name;
        entry["score"] = e.score;
        entry["threshold"] = e.threshold;
        detectors.append(entry);
    }
    d["detectors"] = detectors;
    if (r.kind == AnomalyKind::CompilerInduced) {
        d["direction"] = std::string(direction_label(r.direction));
    }
    d["tags"] = std::vector<std::string>(r.tags.begin(), r.tags.end());
    d["origin"] = py::make_tuple(r.origin_path, r.origin_span.first_line, r.origin_span.last_line);
    d["excerpt"] = r.excerpt;
    return d;
}

}  // namespace

PYBIND11_MODULE(_astray, m) {
    m.doc() = "code anomaly detection over syntax trees and bytecode";

    py::register_exception<Error>(m, "AstrayError");

    // --- parser ---
    m.def(
        "parse",
        [](const std::string& source) { return tree_to_dict(parse_source(source)); },
        py::arg("source"),
        "Parse source text into a FILE-rooted syntax tree (as nested dicts).");
    m.def(
        "tokenize",
        [](const std::string& source) {
            py::list out;
            for (const Token& t : tokenize(source)) {
                py::dict d;
                d["kind"] = std::string(token_kind_label(t.kind));
                d["text"] = t.text;
                d["line"] = t.line;
                d["column"] = t.column;
                out.append(d);
            }
            return out;
        },
        py::arg("source"));
    m.def(
        "pretty_print",
        [](const std::string& source) { return pretty_print(parse_source(source)); },
        py::arg("source"), "Parse and re-render source text in canonical form.");
    m.def("supported_subset", [] { return supported_subset().to_json_string(); },
          "Machine-readable grammar of the accepted language subset (JSON).");

    // --- features ---
    m.def(
        "compute_metrics",
        [](const std::string& source) {
            SyntaxNode file = parse_source(source);
            py::list out;
            for (const SyntaxNode& decl : file.children) {
                if (decl.kind != NodeKind::Function) continue;
                MetricVector v = compute_metrics(decl);
                py::dict d;
                for (std::size_t i = 0; i < v.values.size(); ++i) {
                    d[py::str(metric_catalog()[i].name)] = v.values[i];
                }
                out.append(d);
            }
            return out;
        },
        py::arg("source"),
        "Metric vectors (as name->value dicts) for each top-level function.");
    m.def("metric_names", [] {
        std::vector<std::string> names;
        for (const MetricInfo& info : metric_catalog()) names.push_back(info.name);
        return names;
    });
    m.def(
        "extract_tree_ngrams",
        [](const std::string& source, int n_max) {
            return counts_to_dict(extract_tree_ngrams(parse_source(source), n_max));
        },
        py::arg("source"), py::arg("n_max") = 3);
    m.def(
        "extract_bytecode_ngrams",
        [](const std::vector<std::string>& instructions, int n_max, int window) {
            return counts_to_dict(extract_bytecode_ngrams(instructions, n_max, window));
        },
        py::arg("instructions"), py::arg("n_max") = 3, py::arg("window") = 3);
    m.def(
        "build_vocabulary",
        [](const std::vector<py::dict>& per_unit, int min_df, double max_df_ratio,
           const std::string& domain) {
            std::vector<NGramCounts> counts;
            for (const py::dict& d : per_unit) counts.push_back(counts_from_dict(d));
            NGramVocabulary vocab =
                build_vocabulary(counts, min_df, max_df_ratio,
                                 domain == "bytecode" ? NGramDomain::Bytecode : NGramDomain::Tree);
            return py::module_::import("json").attr("loads")(vocab.to_json().dump());
        },
        py::arg("per_unit_counts"), py::arg("min_df") = 5, py::arg("max_df_ratio") = 0.5,
        py::arg("domain") = "tree");

    // --- preprocess ---
    py::class_<Scaler>(m, "Scaler")
        .def_readonly("mean", &Scaler::mean)
        .def_readonly("stddev", &Scaler::stddev)
        .def("transform",
             py::overload_cast<const Scaler&, const Eigen::MatrixXd&>(&scaler_transform));
    m.def("scaler_fit", &scaler_fit, py::arg("rows"));
    py::class_<PcaModel>(m, "PcaModel")
        .def_readonly("mean", &PcaModel::mean)
        .def_readonly("components", &PcaModel::components)
        .def_readonly("explained_variance", &PcaModel::explained_variance)
        .def_readonly("explained_variance_ratio", &PcaModel::explained_variance_ratio)
        .def("transform",
             py::overload_cast<const PcaModel&, const Eigen::MatrixXd&>(&pca_transform));
    m.def("pca_fit", &pca_fit, py::arg("rows"), py::arg("k"));

    // --- detectors ---
    py::class_<AnomalyScoreSet>(m, "AnomalyScoreSet")
        .def_readonly("detector", &AnomalyScoreSet::detector)
        .def_readonly("threshold", &AnomalyScoreSet::threshold)
        .def_readonly("scores", &AnomalyScoreSet::scores)
        .def_readonly("flagged", &AnomalyScoreSet::flagged);
    m.def(
        "lof_scores",
        [](const std::vector<std::string>& ids, const Eigen::MatrixXd& points, int n_neighbors,
           double contamination) {
            return lof_scores(ids, points, {n_neighbors, contamination});
        },
        py::arg("ids"), py::arg("points"), py::arg("n_neighbors") = 20,
        py::arg("contamination") = 0.001);
    m.def(
        "iforest_fit_score",
        [](const std::vector<std::string>& ids, const Eigen::MatrixXd& points, int n_estimators,
           int subsample_size, double contamination, std::uint64_t seed) {
            IForestConfig config;
            config.n_estimators = n_estimators;
            config.subsample_size = subsample_size;
            config.contamination = contamination;
            config.seed = seed;
            return iforest_fit_score(ids, points, config);
        },
        py::arg("ids"), py::arg("points"), py::arg("n_estimators") = 200,
        py::arg("subsample_size") = 256, py::arg("contamination") = 0.0001, py::arg("seed") = 1);

    py::class_<AutoencoderModel>(m, "AutoencoderModel")
        .def_property_readonly("input_width", &AutoencoderModel::input_width)
        .def_property_readonly("hidden_width", &AutoencoderModel::hidden_width)
        .def_readonly("epoch_losses", &AutoencoderModel::epoch_losses)
        .def("score", [](const AutoencoderModel& model, const Eigen::VectorXd& x) {
            return autoencoder_score(model, x);
        });
    m.def(
        "autoencoder_train",
        [](const Eigen::MatrixXd& rows, double compression_rate, int epochs, int minibatch,
           double learning_rate, std::uint64_t seed) {
            AutoencoderConfig config;
            config.compression_rate = compression_rate;
            config.epochs = epochs;
            config.minibatch = minibatch;
            config.learning_rate = learning_rate;
            config.seed = seed;
            return autoencoder_train(rows, config);
        },
        py::arg("rows"), py::arg("compression_rate") = 0.5, py::arg("epochs") = 5,
        py::arg("minibatch") = 1024, py::arg("learning_rate") = 0.01, py::arg("seed") = 1);
    m.def(
        "rms_threshold",
        [](const std::map<std::string, double>& scores, double multiplier) {
            RmsThresholdResult result = rms_threshold(scores, multiplier);
            return py::make_tuple(result.threshold, result.flagged);
        },
        py::arg("scores"), py::arg("multiplier") = 3.0);
    m.def(
        "compiler_induced_detect",
        [](const std::map<std::string, double>& tree_scores,
           const std::map<std::string, double>& bytecode_scores,
           const std::map<std::string, std::vector<std::string>>& links, double delta) {
            CompilerInducedResult result =
                compiler_induced_detect(tree_scores, bytecode_scores, links, delta);
            py::list records;
            for (const AnomalyRecord& r : result.records) records.append(record_to_dict(r));
            return py::make_tuple(records, result.compared_pairs);
        },
        py::arg("tree_scores"), py::arg("bytecode_scores"), py::arg("links"),
        py::arg("delta") = 0.8);

    // --- corpus + pipeline ---
    m.def(
        "ingest_source",
        [](const std::vector<std::filesystem::path>& paths) {
            IngestResult result = ingest_source(paths);
            py::list units;
            for (const CodeUnit& u : result.units) {
                py::dict d;
                d["unit_id"] = u.unit_id;
                d["display_name"] = u.display_name;
                d["origin"] = py::make_tuple(u.origin.path, u.origin.span.first_line,
                                             u.origin.span.last_line);
                units.append(d);
            }
            py::list notes;
            for (const IngestNote& n : result.notes) {
                notes.append(py::make_tuple(n.path, n.message));
            }
            return py::make_tuple(units, notes);
        },
        py::arg("paths"));
    m.def("tag_vocabulary", [] { return TagVocabulary::builtin(); });
    m.def(
        "ingest_corpus",
        [](const std::vector<std::filesystem::path>& sources,
           const std::filesystem::path& bytecode_listing,
           const std::filesystem::path& out_dir) {
            Corpus corpus;
            IngestResult result = ingest_source(sources);
            corpus.functions = dedup_units(result.units);
            if (!bytecode_listing.empty()) {
                BytecodeIngestResult bc = ingest_bytecode(bytecode_listing);
                corpus.classes = std::move(bc.units);
            }
            corpus.links = build_links(corpus.functions, corpus.classes);
            persist_corpus(corpus, out_dir);
            py::dict summary;
            summary["functions"] = corpus.functions.size();
            summary["classes"] = corpus.classes.size();
            summary["skipped"] = result.notes.size();
            return summary;
        },
        py::arg("sources"), py::arg("bytecode_listing") = std::filesystem::path(),
        py::arg("out_dir") = std::filesystem::path("corpus"),
        "Ingest sources (and optionally a bytecode listing) into a corpus directory.");
    m.def(
        "run_pipeline",
        [](const std::filesystem::path& corpus_dir, const std::string& experiment,
           const std::string& config_json, const std::filesystem::path& out_dir) {
            PipelineConfig config;
            if (!config_json.empty()) {
                config = PipelineConfig::from_json(nlohmann::json::parse(config_json));
            }
            std::vector<AnomalyRecord> records =
                run_pipeline(corpus_dir, experiment, config, out_dir);
            py::list out;
            for (const AnomalyRecord& r : records) out.append(record_to_dict(r));
            return out;
        },
        py::arg("corpus_dir"), py::arg("experiment"), py::arg("config_json") = std::string(),
        py::arg("out_dir") = std::filesystem::path("astray-out"),
        "Run a full experiment over a corpus directory; returns the anomaly records.");
    m.def("default_config", [] { return PipelineConfig().to_json().dump(2); });
}
