// astray: corpus-scale code anomaly detection over syntax trees and
// bytecode instruction sequences.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "astray/corpus.hpp"
#include "astray/detect.hpp"
#include "astray/features.hpp"
#include "astray/formats.hpp"
#include "astray/parser.hpp"
#include "astray/preprocess.hpp"
#include "astray/report.hpp"

namespace fs = std::filesystem;
using namespace astray;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStageFailure = 1;
constexpr int kExitConfigError = 2;

std::vector<fs::path> collect_sources(const fs::path& dir) {
    std::vector<fs::path> paths;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".kt") {
            paths.push_back(entry.path());
        }
    }
    std::sort(paths.begin(), paths.end());
    return paths;
}

int cmd_ingest(const std::string& src_dir, const std::string& trees_file,
               const std::string& bytecode_file, const std::string& out_dir) {
    if (src_dir.empty() && trees_file.empty() && bytecode_file.empty()) {
        throw ConfigError("ingest needs at least one of --src, --trees, --bytecode");
    }
    Corpus corpus;
    nlohmann::json config = nlohmann::json::object();
    std::size_t skipped = 0;

    if (!src_dir.empty()) {
        auto paths = collect_sources(src_dir);
        IngestResult result = ingest_source(paths);
        for (const IngestNote& note : result.notes) {
            std::cerr << "note: " << note.path << ": " << note.message << "\n";
            ++skipped;
        }
        corpus.functions = std::move(result.units);
        config["src"] = src_dir;
        config["source_files"] = paths.size();
    }
    if (!trees_file.empty()) {
        std::vector<CodeUnit> units = ingest_trees(fs::path(trees_file));
        std::move(units.begin(), units.end(), std::back_inserter(corpus.functions));
        config["trees"] = trees_file;
    }
    if (!bytecode_file.empty()) {
        BytecodeIngestResult result = ingest_bytecode(fs::path(bytecode_file));
        for (const IngestNote& note : result.notes) {
            std::cerr << "note: " << note.path << ": " << note.message << "\n";
        }
        corpus.classes = std::move(result.units);
        config["bytecode"] = bytecode_file;
    }

    corpus.functions = dedup_units(corpus.functions);
    corpus.links = build_links(corpus.functions, corpus.classes);
    for (auto& cls : corpus.classes) {
        if (auto it = corpus.links.find(cls.unit_id); it != corpus.links.end()) {
            cls.source_link = it->second;
        }
    }
    config["skipped_files"] = skipped;
    corpus.manifest.config = config;
    persist_corpus(corpus, out_dir);
    std::cout << "ingested " << corpus.functions.size() << " function units, "
              << corpus.classes.size() << " class units -> " << out_dir << "\n";
    return kExitOk;
}

int cmd_features(const std::string& corpus_dir, const std::string& mode, int nmax, int window,
                 int min_df, double max_df, const std::string& out_file) {
    Corpus corpus = load_corpus(corpus_dir);

    if (mode == "metrics") {
        std::vector<const CodeUnit*> units;
        for (const CodeUnit& u : corpus.functions) units.push_back(&u);
        std::sort(units.begin(), units.end(),
                  [](const CodeUnit* a, const CodeUnit* b) { return a->unit_id < b->unit_id; });
        DenseVectorFile file;
        file.meta = nlohmann::json{
            {"record", "meta"}, {"kind", "metrics"}, {"catalog_version", kMetricCatalogVersion}};
        file.rows.resize(static_cast<Eigen::Index>(units.size()), kMetricCount);
        for (std::size_t i = 0; i < units.size(); ++i) {
            file.ids.push_back(units[i]->unit_id);
            MetricVector v = compute_metrics(*units[i]);
            for (int c = 0; c < kMetricCount; ++c) {
                file.rows(static_cast<Eigen::Index>(i), c) = v.values[static_cast<std::size_t>(c)];
            }
        }
        write_dense_vectors(out_file, file);
        std::cout << "wrote " << file.ids.size() << " metric vectors -> " << out_file << "\n";
        return kExitOk;
    }

    SparseVectorFile file;
    NGramVocabulary vocab;
    if (mode == "tree-ngrams") {
        std::vector<const CodeUnit*> units;
        for (const CodeUnit& u : corpus.functions) units.push_back(&u);
        std::sort(units.begin(), units.end(),
                  [](const CodeUnit* a, const CodeUnit* b) { return a->unit_id < b->unit_id; });
        std::vector<NGramCounts> counts;
        for (const CodeUnit* u : units) counts.push_back(extract_tree_ngrams(u->tree, nmax));
        vocab = build_vocabulary(counts, min_df, max_df, NGramDomain::Tree);
        for (std::size_t i = 0; i < units.size(); ++i) {
            file.ids.push_back(units[i]->unit_id);
            file.vectors.push_back(vectorize(counts[i], vocab));
        }
    } else if (mode == "bytecode-ngrams") {
        std::vector<const BytecodeUnit*> units;
        for (const BytecodeUnit& u : corpus.classes) units.push_back(&u);
        std::sort(units.begin(), units.end(), [](const BytecodeUnit* a, const BytecodeUnit* b) {
            return a->unit_id < b->unit_id;
        });
        std::vector<NGramCounts> counts;
        for (const BytecodeUnit* u : units) {
            counts.push_back(extract_bytecode_ngrams(u->instructions, nmax, window));
        }
        vocab = build_vocabulary(counts, min_df, max_df, NGramDomain::Bytecode);
        for (std::size_t i = 0; i < units.size(); ++i) {
            file.ids.push_back(units[i]->unit_id);
            file.vectors.push_back(vectorize(counts[i], vocab));
        }
    } else {
        throw ConfigError("unknown --mode '" + mode + "'");
    }
    file.meta = nlohmann::json{{"record", "meta"},
                               {"kind", mode},
                               {"nmax", nmax},
                               {"window", window},
                               {"min_df", min_df},
                               {"max_df_ratio", max_df}};
    write_sparse_vectors(out_file, file);
    std::ofstream vocab_out(out_file + ".vocab.json", std::ios::binary);
    vocab_out << vocab.to_json().dump(2) << "\n";
    std::cout << "wrote " << file.ids.size() << " sparse vectors (dim " << vocab.size() << ") -> "
              << out_file << "\n";
    return kExitOk;
}

int cmd_preprocess(const std::string& vectors_file, int pca_k, const std::string& out_file) {
    DenseVectorFile in = read_dense_vectors(vectors_file);
    if (in.ids.empty()) throw Error("no vectors in " + vectors_file);
    Scaler scaler = scaler_fit(in.rows);
    Eigen::MatrixXd scaled = scaler_transform(scaler, in.rows);
    PcaModel pca = pca_fit(scaled, pca_k);

    DenseVectorFile out;
    out.ids = in.ids;
    out.rows = pca_transform(pca, scaled);
    out.scaler = scaler.to_json();
    out.pca = pca.to_json();
    out.meta = nlohmann::json{{"record", "meta"},
                              {"kind", "preprocessed"},
                              {"pca_k", pca_k},
                              {"cumulative_explained_variance",
                               pca.cumulative_explained_variance()}};
    write_dense_vectors(out_file, out);
    std::cout << "scaled + projected " << out.ids.size() << " vectors to " << pca_k
              << " dims (explained variance "
              << pca.cumulative_explained_variance() << ") -> " << out_file << "\n";
    return kExitOk;
}

int cmd_detect(const std::string& vectors_file, const std::string& algo, double contamination,
               int k, int trees, int epochs, int batch, double rate, double rms_multiplier,
               std::uint64_t seed, const std::string& out_file) {
    AnomalyScoreSet scores;
    nlohmann::json config;
    if (algo == "lof" || algo == "iforest") {
        DenseVectorFile in = read_dense_vectors(vectors_file);
        if (algo == "lof") {
            LofConfig lof{k, contamination > 0 ? contamination : 0.001};
            scores = lof_scores(in.ids, in.rows, lof);
            config = {{"algo", "lof"},
                      {"n_neighbors", lof.n_neighbors},
                      {"contamination", lof.contamination}};
        } else {
            IForestConfig ifc;
            ifc.n_estimators = trees;
            ifc.contamination = contamination > 0 ? contamination : 0.0001;
            ifc.seed = seed;
            scores = iforest_fit_score(in.ids, in.rows, ifc);
            config = {{"algo", "iforest"},
                      {"n_estimators", ifc.n_estimators},
                      {"subsample_size", ifc.subsample_size},
                      {"contamination", ifc.contamination},
                      {"seed", seed}};
        }
    } else if (algo == "autoencoder") {
        SparseVectorFile in = read_sparse_vectors(vectors_file);
        if (in.ids.empty()) throw Error("no vectors in " + vectors_file);
        AutoencoderConfig ae;
        ae.compression_rate = rate;
        ae.epochs = epochs;
        ae.minibatch = batch;
        ae.seed = seed;
        AutoencoderModel model = autoencoder_train(in.vectors, ae);
        std::map<std::string, double> s;
        for (std::size_t i = 0; i < in.ids.size(); ++i) {
            s[in.ids[i]] = autoencoder_score(model, in.vectors[i]);
        }
        RmsThresholdResult rms = rms_threshold(s, rms_multiplier);
        scores.detector = "autoencoder-" + std::to_string(rate).substr(0, 4);
        scores.threshold = rms.threshold;
        scores.scores = std::move(s);
        scores.flagged = std::move(rms.flagged);
        config = {{"algo", "autoencoder"},       {"compression_rate", rate},
                  {"epochs", epochs},             {"minibatch", batch},
                  {"rms_multiplier", rms_multiplier}, {"seed", seed},
                  {"epoch_losses", model.epoch_losses}};
    } else {
        throw ConfigError("unknown --algo '" + algo + "'");
    }
    write_score_set(out_file, scores, config);
    std::cout << scores.detector << ": scored " << scores.scores.size() << " units, flagged "
              << scores.flagged.size() << " -> " << out_file << "\n";
    return kExitOk;
}

int cmd_detect_compiler_induced(const std::string& tree_scores_file,
                                const std::string& bytecode_scores_file,
                                const std::string& links_file, double delta,
                                const std::string& out_file) {
    AnomalyScoreSet tree = read_score_set(tree_scores_file);
    AnomalyScoreSet bytecode = read_score_set(bytecode_scores_file);
    auto links = read_links(links_file);
    CompilerInducedResult result =
        compiler_induced_detect(tree.scores, bytecode.scores, links, delta);
    if (result.compared_pairs == 0) {
        std::cerr << "warning: no linked units to compare; result is empty\n";
    }
    write_records(out_file, result.records);
    std::cout << "compared " << result.compared_pairs << " pairs, flagged "
              << result.records.size() << " -> " << out_file << "\n";
    return kExitOk;
}

int cmd_pipeline_run(const std::string& corpus_dir, const std::string& experiment,
                     const std::string& config_file, std::uint64_t seed_override, bool has_seed,
                     const std::string& out_dir) {
    PipelineConfig config;
    if (!config_file.empty()) {
        std::ifstream in(config_file, std::ios::binary);
        if (!in) throw ConfigError("cannot read config file: " + config_file);
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + config_file);
        config = PipelineConfig::from_json(j);
    }
    if (has_seed) config.seed = seed_override;
    std::vector<AnomalyRecord> records = run_pipeline(corpus_dir, experiment, config, out_dir);
    std::cout << experiment << ": " << records.size() << " anomaly record(s) -> " << out_dir
              << "/report.json\n";
    return kExitOk;
}

int cmd_pipeline_report(const std::string& records_file, const std::string& format,
                        const std::string& manifest_file, const std::string& out_file) {
    std::vector<AnomalyRecord> records = read_records(records_file);
    RunManifest manifest;
    if (!manifest_file.empty()) {
        std::ifstream in(manifest_file, std::ios::binary);
        if (!in) throw ConfigError("cannot read manifest: " + manifest_file);
        nlohmann::json j = nlohmann::json::parse(in);
        manifest.corpus_id = j.value("corpus_id", "");
        manifest.experiment = j.value("experiment", "");
        if (j.contains("config")) manifest.config = PipelineConfig::from_json(j["config"]);
    }
    std::string text = format == "markdown" ? render_report_markdown(records, manifest)
                                            : render_report_json(records, manifest);
    if (out_file.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw IoError("cannot write " + out_file);
        out << text;
    }
    return kExitOk;
}

int cmd_convert_disassembly(const std::string& in_file, const std::string& out_file) {
    std::ifstream in(in_file, std::ios::binary);
    if (!in) throw IoError("cannot read " + in_file);
    std::string listing = convert_disassembly(in);
    if (out_file.empty()) {
        std::cout << listing;
    } else {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw IoError("cannot write " + out_file);
        out << listing;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"astray: code anomaly detection over syntax trees and bytecode"};
    app.require_subcommand(1);

    // ingest
    std::string src_dir, trees_file, bytecode_file, out_path;
    CLI::App* ingest = app.add_subcommand("ingest", "Build a corpus from sources, trees, bytecode");
    ingest->add_option("--src", src_dir, "Directory of .kt sources (recursive)");
    ingest->add_option("--trees", trees_file, "Neutral tree format file (one JSON tree per line)");
    ingest->add_option("--bytecode", bytecode_file, "Bytecode listing file");
    ingest->add_option("--out", out_path, "Corpus directory")->required();

    // features
    std::string corpus_dir, mode = "metrics";
    int nmax = 3, window = 3, min_df = 5;
    double max_df = 0.5;
    std::string features_out;
    CLI::App* features = app.add_subcommand("features", "Extract feature vectors from a corpus");
    features->add_option("--corpus", corpus_dir, "Corpus directory")->required();
    features->add_option("--mode", mode, "metrics | tree-ngrams | bytecode-ngrams")
        ->check(CLI::IsMember({"metrics", "tree-ngrams", "bytecode-ngrams"}));
    features->add_option("--nmax", nmax, "Maximum N-gram arity");
    features->add_option("--window", window, "Extraction window (bytecode)");
    features->add_option("--min-df", min_df, "Minimum document frequency");
    features->add_option("--max-df", max_df, "Maximum document frequency ratio");
    features->add_option("--out", features_out, "Output vector file")->required();

    // preprocess
    std::string pre_vectors, pre_out;
    int pca_k = 20;
    CLI::App* preprocess = app.add_subcommand("preprocess", "Standardize and PCA-reduce vectors");
    preprocess->add_option("--vectors", pre_vectors, "Dense vector file")->required();
    preprocess->add_option("--pca-k", pca_k, "Number of principal components");
    preprocess->add_option("--out", pre_out, "Output vector file")->required();

    // detect (+ compiler-induced subcommand)
    std::string det_vectors, algo = "lof", det_out;
    double contamination = -1.0, rate = 0.5, rms_multiplier = 3.0, delta = 0.8;
    int k = 20, trees = 200, epochs = 5, batch = 1024;
    std::uint64_t seed = 1;
    CLI::App* detect = app.add_subcommand("detect", "Score vectors for anomalousness");
    detect->add_option("--vectors", det_vectors, "Vector file");
    detect->add_option("--algo", algo, "lof | iforest | autoencoder")
        ->check(CLI::IsMember({"lof", "iforest", "autoencoder"}));
    detect->add_option("--contamination", contamination, "Fraction of units to flag");
    detect->add_option("--k", k, "LOF neighbor count");
    detect->add_option("--trees", trees, "Isolation forest tree count");
    detect->add_option("--epochs", epochs, "Autoencoder epochs");
    detect->add_option("--batch", batch, "Autoencoder minibatch size");
    detect->add_option("--rate", rate, "Autoencoder compression rate");
    detect->add_option("--rms", rms_multiplier, "RMS threshold multiplier (autoencoder)");
    detect->add_option("--seed", seed, "Random seed");
    detect->add_option("--out", det_out, "Output score file");

    std::string ci_tree, ci_bytecode, ci_links, ci_out;
    CLI::App* compiler_induced =
        detect->add_subcommand("compiler-induced", "Flag score divergence between representations");
    compiler_induced->add_option("--tree-scores", ci_tree, "Tree-side score file")->required();
    compiler_induced->add_option("--bytecode-scores", ci_bytecode, "Bytecode-side score file")
        ->required();
    compiler_induced->add_option("--links", ci_links, "Class-to-function links JSON")->required();
    compiler_induced->add_option("--delta", delta, "Divergence threshold");
    compiler_induced->add_option("--out", ci_out, "Output records file")->required();

    // pipeline run / report
    std::string pr_corpus, pr_experiment = "explicit", pr_config, pr_out;
    std::uint64_t pr_seed = 0;
    CLI::App* pipeline = app.add_subcommand("pipeline", "Run experiments and render reports");
    pipeline->require_subcommand(1);
    CLI::App* pipeline_run = pipeline->add_subcommand("run", "Run a full experiment");
    pipeline_run->add_option("--corpus", pr_corpus, "Corpus directory")->required();
    pipeline_run->add_option("--experiment", pr_experiment,
                             "explicit | implicit | compiler-induced")
        ->check(CLI::IsMember({"explicit", "implicit", "compiler-induced"}));
    pipeline_run->add_option("--config", pr_config, "Pipeline config JSON");
    CLI::Option* seed_opt = pipeline_run->add_option("--seed", pr_seed, "Master seed override");
    pipeline_run->add_option("--out", pr_out, "Output directory")->required();

    std::string rep_records, rep_format = "markdown", rep_manifest, rep_out;
    CLI::App* pipeline_report = pipeline->add_subcommand("report", "Render a records file");
    pipeline_report->add_option("--records", rep_records, "Records file (JSONL)")->required();
    pipeline_report->add_option("--format", rep_format, "json | markdown")
        ->check(CLI::IsMember({"json", "markdown"}));
    pipeline_report->add_option("--manifest", rep_manifest, "Manifest JSON for the header");
    pipeline_report->add_option("--out", rep_out, "Output file (default stdout)");

    // convert-disassembly
    std::string conv_in, conv_out;
    CLI::App* convert = app.add_subcommand(
        "convert-disassembly", "Convert javap -c output to the bytecode listing format");
    convert->add_option("--in", conv_in, "Disassembler output file")->required();
    convert->add_option("--out", conv_out, "Listing file (default stdout)");

    // grammar
    CLI::App* grammar = app.add_subcommand("grammar", "Print the supported language subset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (*ingest) return cmd_ingest(src_dir, trees_file, bytecode_file, out_path);
        if (*features) {
            return cmd_features(corpus_dir, mode, nmax, window, min_df, max_df, features_out);
        }
        if (*preprocess) return cmd_preprocess(pre_vectors, pca_k, pre_out);
        if (*detect) {
            if (*compiler_induced) {
                return cmd_detect_compiler_induced(ci_tree, ci_bytecode, ci_links, delta, ci_out);
            }
            if (det_vectors.empty() || det_out.empty()) {
                throw ConfigError("detect needs --vectors and --out");
            }
            return cmd_detect(det_vectors, algo, contamination, k, trees, epochs, batch, rate,
                              rms_multiplier, seed, det_out);
        }
        if (*pipeline_run) {
            return cmd_pipeline_run(pr_corpus, pr_experiment, pr_config, pr_seed,
                                    seed_opt->count() > 0, pr_out);
        }
        if (*pipeline_report) {
            return cmd_pipeline_report(rep_records, rep_format, rep_manifest, rep_out);
        }
        if (*convert) return cmd_convert_disassembly(conv_in, conv_out);
        if (*grammar) {
            std::cout << supported_subset().to_json_string() << "\n";
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStageFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStageFailure;
    }
    return kExitOk;
}
