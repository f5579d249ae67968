#include "astray/report.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "astray/formats.hpp"
#include "astray/parser.hpp"
#include "astray/preprocess.hpp"

namespace astray {

namespace {

using nlohmann::json;

constexpr std::size_t kExcerptMaxLines = 60;

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::string rate_label(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", rate);
    return buf;
}

// Times a stage and prefixes propagated errors with the stage identity.
template <typename Fn>
auto with_stage(const std::string& name, RunManifest& manifest, Fn&& fn) {
    auto start = std::chrono::steady_clock::now();
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            manifest.stage_seconds[name] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            return;
        } else {
            auto result = fn();
            manifest.stage_seconds[name] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            return result;
        }
    } catch (const Error& e) {
        throw Error("[stage " + name + "] " + e.what());
    }
}

std::string clip_excerpt(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        if (n == kExcerptMaxLines) {
            out << "... (truncated)\n";
            break;
        }
        out << line << "\n";
        ++n;
    }
    std::string s = out.str();
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

std::string excerpt_for(const CodeUnit& unit) {
    std::ifstream in(unit.origin.path, std::ios::binary);
    if (in && unit.origin.span.first_line > 0) {
        std::ostringstream out;
        std::string line;
        int lineno = 0;
        std::size_t taken = 0;
        bool truncated = false;
        while (std::getline(in, line)) {
            ++lineno;
            if (lineno < unit.origin.span.first_line) continue;
            if (lineno > unit.origin.span.last_line) break;
            if (taken == kExcerptMaxLines) {
                truncated = true;
                break;
            }
            out << line << "\n";
            ++taken;
        }
        if (taken > 0) {
            std::string s = out.str();
            if (truncated) s += "... (truncated)";
            else if (!s.empty() && s.back() == '\n') s.pop_back();
            return s;
        }
    }
    return clip_excerpt(pretty_print(unit.tree));
}

// Sorted-by-unit_id view of the corpus functions, for deterministic scoring.
std::vector<const CodeUnit*> sorted_functions(const Corpus& corpus) {
    std::vector<const CodeUnit*> units;
    units.reserve(corpus.functions.size());
    for (const CodeUnit& u : corpus.functions) units.push_back(&u);
    std::sort(units.begin(), units.end(),
              [](const CodeUnit* a, const CodeUnit* b) { return a->unit_id < b->unit_id; });
    return units;
}

std::vector<const BytecodeUnit*> sorted_classes(const Corpus& corpus) {
    std::vector<const BytecodeUnit*> units;
    units.reserve(corpus.classes.size());
    for (const BytecodeUnit& u : corpus.classes) units.push_back(&u);
    std::sort(units.begin(), units.end(),
              [](const BytecodeUnit* a, const BytecodeUnit* b) { return a->unit_id < b->unit_id; });
    return units;
}

// Merges per-detector flag sets into one record per unit.
std::vector<AnomalyRecord> merge_flagged(const std::vector<const AnomalyScoreSet*>& score_sets,
                                         const Corpus& corpus) {
    std::map<std::string, AnomalyRecord> by_unit;
    for (const AnomalyScoreSet* set : score_sets) {
        for (const std::string& id : set->flagged) {
            AnomalyRecord& record = by_unit[id];
            record.unit_id = id;
            record.kind = AnomalyKind::SyntaxTree;
            record.detectors.push_back({set->detector, set->scores.at(id), set->threshold});
        }
    }
    std::map<std::string, const CodeUnit*> units;
    for (const CodeUnit& u : corpus.functions) units[u.unit_id] = &u;
    std::vector<AnomalyRecord> records;
    records.reserve(by_unit.size());
    for (auto& [id, record] : by_unit) {
        if (auto it = units.find(id); it != units.end()) {
            record.origin_path = it->second->origin.path;
            record.origin_span = it->second->origin.span;
            record.excerpt = excerpt_for(*it->second);
        }
        records.push_back(std::move(record));
    }
    return records;
}

struct SparseCorpus {
    std::vector<std::string> ids;
    std::vector<SparseVector> vectors;
};

SparseCorpus tree_sparse_vectors(const Corpus& corpus, const PipelineConfig& config,
                                 NGramVocabulary* vocab_out = nullptr) {
    std::vector<const CodeUnit*> units = sorted_functions(corpus);
    std::vector<NGramCounts> counts;
    counts.reserve(units.size());
    for (const CodeUnit* u : units) {
        counts.push_back(extract_tree_ngrams(u->tree, config.nmax));
    }
    NGramVocabulary vocab =
        build_vocabulary(counts, config.min_df, config.max_df_ratio, NGramDomain::Tree);
    SparseCorpus out;
    for (std::size_t i = 0; i < units.size(); ++i) {
        out.ids.push_back(units[i]->unit_id);
        out.vectors.push_back(vectorize(counts[i], vocab));
    }
    if (vocab_out != nullptr) *vocab_out = std::move(vocab);
    return out;
}

SparseCorpus bytecode_sparse_vectors(const Corpus& corpus, const PipelineConfig& config,
                                     NGramVocabulary* vocab_out = nullptr) {
    std::vector<const BytecodeUnit*> units = sorted_classes(corpus);
    std::vector<NGramCounts> counts;
    counts.reserve(units.size());
    for (const BytecodeUnit* u : units) {
        counts.push_back(extract_bytecode_ngrams(u->instructions, config.nmax, config.window));
    }
    NGramVocabulary vocab =
        build_vocabulary(counts, config.min_df, config.max_df_ratio, NGramDomain::Bytecode);
    SparseCorpus out;
    for (std::size_t i = 0; i < units.size(); ++i) {
        out.ids.push_back(units[i]->unit_id);
        out.vectors.push_back(vectorize(counts[i], vocab));
    }
    if (vocab_out != nullptr) *vocab_out = std::move(vocab);
    return out;
}

std::map<std::string, double> autoencoder_scores(const SparseCorpus& corpus,
                                                 const AutoencoderConfig& config) {
    AutoencoderModel model = autoencoder_train(corpus.vectors, config);
    std::map<std::string, double> scores;
    for (std::size_t i = 0; i < corpus.ids.size(); ++i) {
        scores[corpus.ids[i]] = autoencoder_score(model, corpus.vectors[i]);
    }
    return scores;
}

}  // namespace

// --- configuration ---

json PipelineConfig::to_json() const {
    json rates = json::array();
    for (double r : compression_rates) rates.push_back(r);
    return {
        {"seed", seed},
        {"metrics",
         {{"total", kMetricCount},
          {"quantitative", kQuantitativeMetricCount},
          {"binary", kMetricCount - kQuantitativeMetricCount},
          {"catalog_version", kMetricCatalogVersion}}},
        {"ngrams",
         {{"nmax", nmax}, {"window", window}, {"min_df", min_df}, {"max_df_ratio", max_df_ratio}}},
        {"preprocess", {{"pca_k", pca_k}, {"scale_binary_metrics", scale_binary_metrics}}},
        {"lof", {{"n_neighbors", lof.n_neighbors}, {"contamination", lof.contamination}}},
        {"iforest",
         {{"n_estimators", iforest.n_estimators},
          {"subsample_size", iforest.subsample_size},
          {"contamination", iforest.contamination}}},
        {"autoencoder",
         {{"epochs", autoencoder.epochs},
          {"minibatch", autoencoder.minibatch},
          {"learning_rate", autoencoder.learning_rate},
          {"compression_rates", rates}}},
        {"rms_multiplier", rms_multiplier},
        {"compiler_induced_delta", compiler_induced_delta},
    };
}

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig c;
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("ngrams")) {
        const json& n = j["ngrams"];
        if (n.contains("nmax")) c.nmax = n["nmax"].get<int>();
        if (n.contains("window")) c.window = n["window"].get<int>();
        if (n.contains("min_df")) c.min_df = n["min_df"].get<int>();
        if (n.contains("max_df_ratio")) c.max_df_ratio = n["max_df_ratio"].get<double>();
    }
    if (j.contains("preprocess")) {
        const json& p = j["preprocess"];
        if (p.contains("pca_k")) c.pca_k = p["pca_k"].get<int>();
        if (p.contains("scale_binary_metrics")) {
            c.scale_binary_metrics = p["scale_binary_metrics"].get<bool>();
        }
    }
    if (j.contains("lof")) {
        const json& l = j["lof"];
        if (l.contains("n_neighbors")) c.lof.n_neighbors = l["n_neighbors"].get<int>();
        if (l.contains("contamination")) c.lof.contamination = l["contamination"].get<double>();
    }
    if (j.contains("iforest")) {
        const json& f = j["iforest"];
        if (f.contains("n_estimators")) c.iforest.n_estimators = f["n_estimators"].get<int>();
        if (f.contains("subsample_size")) c.iforest.subsample_size = f["subsample_size"].get<int>();
        if (f.contains("contamination")) c.iforest.contamination = f["contamination"].get<double>();
    }
    if (j.contains("autoencoder")) {
        const json& a = j["autoencoder"];
        if (a.contains("epochs")) c.autoencoder.epochs = a["epochs"].get<int>();
        if (a.contains("minibatch")) c.autoencoder.minibatch = a["minibatch"].get<int>();
        if (a.contains("learning_rate")) {
            c.autoencoder.learning_rate = a["learning_rate"].get<double>();
        }
        if (a.contains("compression_rates")) {
            c.compression_rates = a["compression_rates"].get<std::vector<double>>();
        }
    }
    if (j.contains("rms_multiplier")) c.rms_multiplier = j["rms_multiplier"].get<double>();
    if (j.contains("compiler_induced_delta")) {
        c.compiler_induced_delta = j["compiler_induced_delta"].get<double>();
    }
    return c;
}

json RunManifest::to_json(bool include_timings) const {
    json j{{"corpus_id", corpus_id},
           {"experiment", experiment},
           {"config", config.to_json()},
           {"counts", counts},
           {"audit", audit}};
    if (include_timings) j["stage_seconds"] = stage_seconds;
    return j;
}

// --- tags ---

const std::vector<std::string>& TagVocabulary::builtin() {
    static const std::vector<std::string> names = {
        "Delegates",
        "Type arguments",
        "\"When\" expression",
        "Annotations",
        "Call chains",
        "Enumerations in \"when\"",
        "\"If\" expressions",
        "Nested calls",
        "Similar call expressions",
        "Strange code constructs",
        "Assignments",
        "Large methods",
        "Code hierarchy",
        "Function parameters",
        "Multiline strings",
        "\"Try-catch\" expressions",
        "Arrays or maps",
        "Class references",
        "Concatenations",
        "Lambdas",
        "String literals",
        "Logical expressions",
        "Complex loops",
        "Similar code fragments",
        "\"Throw\" expressions",
        "Assertions",
        "Empty string literals",
        "Local variables",
        "Nested functions",
        "Type casts",
    };
    return names;
}

namespace {
std::string strip_quotes(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c != '"') out += c;
    }
    return out;
}
}  // namespace

std::string TagVocabulary::canonical(const std::string& name) {
    std::string bare = strip_quotes(name);
    for (const std::string& entry : builtin()) {
        if (entry == name || strip_quotes(entry) == bare) return entry;
    }
    return name;
}

bool TagVocabulary::contains(const std::string& name) {
    std::string bare = strip_quotes(name);
    for (const std::string& entry : builtin()) {
        if (entry == name || strip_quotes(entry) == bare) return true;
    }
    return false;
}

void tag_record(AnomalyRecord& record, const std::vector<std::string>& tags, bool strict,
                RunManifest* manifest) {
    for (const std::string& raw : tags) {
        if (strict && !TagVocabulary::contains(raw)) {
            throw UnknownTag("tag '" + raw + "' is not in the vocabulary (strict mode)");
        }
        std::string tag = TagVocabulary::canonical(raw);
        if (record.tags.insert(tag).second && manifest != nullptr) {
            manifest->audit.push_back("tag " + record.unit_id + ": +" + tag);
        }
    }
}

bool record_has_tag(const AnomalyRecord& record, const std::string& name) {
    return record.tags.count(TagVocabulary::canonical(name)) > 0;
}

// --- runners ---

std::vector<AnomalyRecord> run_explicit(const Corpus& corpus, const PipelineConfig& config,
                                        RunManifest& manifest) {
    if (corpus.functions.empty()) {
        throw EmptyCorpus("the explicit experiment needs function units");
    }
    manifest.experiment = "explicit";
    manifest.corpus_id = corpus.manifest.corpus_id;
    manifest.config = config;
    manifest.counts["function_units"] = corpus.functions.size();

    std::vector<const CodeUnit*> units = sorted_functions(corpus);
    std::vector<std::string> ids;
    ids.reserve(units.size());
    for (const CodeUnit* u : units) ids.push_back(u->unit_id);

    Eigen::MatrixXd metrics = with_stage("metrics", manifest, [&] {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(units.size()), kMetricCount);
        for (std::size_t i = 0; i < units.size(); ++i) {
            MetricVector v = compute_metrics(*units[i]);
            for (int c = 0; c < kMetricCount; ++c) {
                m(static_cast<Eigen::Index>(i), c) = v.values[static_cast<std::size_t>(c)];
            }
        }
        return m;
    });

    Eigen::MatrixXd projected = with_stage("preprocess", manifest, [&] {
        Eigen::MatrixXd scaled;
        if (config.scale_binary_metrics) {
            Scaler scaler = scaler_fit(metrics);
            scaled = scaler_transform(scaler, metrics);
        } else {
            Eigen::MatrixXd quantitative = metrics.leftCols(kQuantitativeMetricCount);
            Scaler scaler = scaler_fit(quantitative);
            scaled = metrics;
            scaled.leftCols(kQuantitativeMetricCount) = scaler_transform(scaler, quantitative);
        }
        PcaModel pca = pca_fit(scaled, config.pca_k);
        return pca_transform(pca, scaled);
    });

    AnomalyScoreSet lof = with_stage("lof", manifest,
                                     [&] { return lof_scores(ids, projected, config.lof); });
    AnomalyScoreSet forest = with_stage("iforest", manifest, [&] {
        IForestConfig ifc = config.iforest;
        ifc.seed = mix(config.seed, 1);
        return iforest_fit_score(ids, projected, ifc);
    });

    std::vector<AnomalyRecord> records = merge_flagged({&lof, &forest}, corpus);
    sort_records(records);
    manifest.counts["flagged_lof"] = lof.flagged.size();
    manifest.counts["flagged_iforest"] = forest.flagged.size();
    manifest.counts["anomalies"] = records.size();
    return records;
}

std::vector<AnomalyRecord> run_implicit(const Corpus& corpus, const PipelineConfig& config,
                                        RunManifest& manifest) {
    if (corpus.functions.empty()) {
        throw EmptyCorpus("the implicit experiment needs function units");
    }
    manifest.experiment = "implicit";
    manifest.corpus_id = corpus.manifest.corpus_id;
    manifest.config = config;
    manifest.counts["function_units"] = corpus.functions.size();

    SparseCorpus sparse = with_stage("tree-ngrams", manifest,
                                     [&] { return tree_sparse_vectors(corpus, config); });
    manifest.counts["vocabulary_tree"] =
        sparse.vectors.empty() ? 0 : sparse.vectors.front().dimension;

    std::vector<AnomalyScoreSet> sets;
    for (std::size_t m = 0; m < config.compression_rates.size(); ++m) {
        double rate = config.compression_rates[m];
        std::string label = "autoencoder-" + rate_label(rate);
        AnomalyScoreSet set = with_stage(label, manifest, [&] {
            AutoencoderConfig ae = config.autoencoder;
            ae.compression_rate = rate;
            ae.seed = mix(config.seed, 100 + m);
            std::map<std::string, double> scores = autoencoder_scores(sparse, ae);
            RmsThresholdResult rms = rms_threshold(scores, config.rms_multiplier);
            AnomalyScoreSet s;
            s.detector = label;
            s.threshold = rms.threshold;
            s.scores = std::move(scores);
            s.flagged = std::move(rms.flagged);
            return s;
        });
        manifest.counts["flagged_" + set.detector] = set.flagged.size();
        sets.push_back(std::move(set));
    }

    std::vector<const AnomalyScoreSet*> set_ptrs;
    for (const AnomalyScoreSet& s : sets) set_ptrs.push_back(&s);
    std::vector<AnomalyRecord> records = merge_flagged(set_ptrs, corpus);
    sort_records(records);
    manifest.counts["anomalies"] = records.size();
    return records;
}

std::vector<AnomalyRecord> run_compiler_induced(const Corpus& corpus,
                                                const PipelineConfig& config,
                                                RunManifest& manifest) {
    if (corpus.functions.empty() || corpus.classes.empty()) {
        throw NoLinkedUnits("the compiler-induced experiment needs function and class units");
    }
    if (corpus.links.empty()) {
        throw NoLinkedUnits("the corpus has no class-to-function links");
    }
    manifest.experiment = "compiler-induced";
    manifest.corpus_id = corpus.manifest.corpus_id;
    manifest.config = config;
    manifest.counts["function_units"] = corpus.functions.size();
    manifest.counts["class_units"] = corpus.classes.size();

    SparseCorpus tree_sparse = with_stage("tree-ngrams", manifest,
                                          [&] { return tree_sparse_vectors(corpus, config); });
    SparseCorpus bc_sparse = with_stage("bytecode-ngrams", manifest,
                                        [&] { return bytecode_sparse_vectors(corpus, config); });

    std::map<std::string, double> tree_scores = with_stage("autoencoder-tree", manifest, [&] {
        AutoencoderConfig ae = config.autoencoder;
        ae.seed = mix(config.seed, 200);
        return autoencoder_scores(tree_sparse, ae);
    });
    std::map<std::string, double> bc_scores = with_stage("autoencoder-bytecode", manifest, [&] {
        AutoencoderConfig ae = config.autoencoder;
        ae.seed = mix(config.seed, 201);
        return autoencoder_scores(bc_sparse, ae);
    });

    CompilerInducedResult result =
        compiler_induced_detect(tree_scores, bc_scores, corpus.links, config.compiler_induced_delta);
    if (result.compared_pairs == 0) {
        throw NoLinkedUnits("no class with a scored linked function; nothing to compare");
    }
    manifest.counts["compared_pairs"] = result.compared_pairs;

    // Attach the strongest linked function's origin as the record excerpt.
    std::map<std::string, const CodeUnit*> units;
    for (const CodeUnit& u : corpus.functions) units[u.unit_id] = &u;
    for (AnomalyRecord& record : result.records) {
        auto link_it = corpus.links.find(record.unit_id);
        if (link_it == corpus.links.end()) continue;
        const CodeUnit* best = nullptr;
        double best_score = -1.0;
        for (const std::string& fn : link_it->second) {
            auto score_it = tree_scores.find(fn);
            auto unit_it = units.find(fn);
            if (score_it == tree_scores.end() || unit_it == units.end()) continue;
            if (score_it->second > best_score) {
                best_score = score_it->second;
                best = unit_it->second;
            }
        }
        if (best != nullptr) {
            record.origin_path = best->origin.path;
            record.origin_span = best->origin.span;
            record.excerpt = excerpt_for(*best);
        }
    }

    std::vector<AnomalyRecord> records = std::move(result.records);
    sort_records(records);
    manifest.counts["anomalies"] = records.size();
    return records;
}

// --- rendering ---

void sort_records(std::vector<AnomalyRecord>& records) {
    std::sort(records.begin(), records.end(), [](const AnomalyRecord& a, const AnomalyRecord& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        double sa = a.max_score(), sb = b.max_score();
        if (sa != sb) return sa > sb;
        return a.unit_id < b.unit_id;
    });
}

std::string render_report_json(const std::vector<AnomalyRecord>& records,
                               const RunManifest& manifest) {
    json j{{"schema_version", kReportSchemaVersion},
           {"manifest", manifest.to_json(/*include_timings=*/false)},
           {"records", json::array()}};
    for (const AnomalyRecord& r : records) j["records"].push_back(record_to_json(r));
    return j.dump(2) + "\n";
}

namespace {

std::string double_repr(double x) { return json(x).dump(); }

std::string fence_for(const std::string& text) {
    std::size_t longest = 0, run = 0;
    for (char c : text) {
        run = c == '`' ? run + 1 : 0;
        longest = std::max(longest, run);
    }
    return std::string(std::max<std::size_t>(3, longest + 1), '`');
}

}  // namespace

std::string render_report_markdown(const std::vector<AnomalyRecord>& records,
                                   const RunManifest& manifest) {
    std::ostringstream out;
    out << "# Anomaly report\n\n";
    out << "- schema: " << kReportSchemaVersion << "\n";
    out << "- corpus: " << manifest.corpus_id << "\n";
    out << "- experiment: " << manifest.experiment << "\n";
    out << "- records: " << records.size() << "\n";

    std::size_t n = 0;
    for (const AnomalyRecord& r : records) {
        ++n;
        out << "\n## " << n << ". unit `" << r.unit_id << "` :: "
            << anomaly_kind_label(r.kind) << "\n\n";
        out << "- origin: `" << r.origin_path << "`, lines " << r.origin_span.first_line << "-"
            << r.origin_span.last_line << "\n";
        if (r.kind == AnomalyKind::CompilerInduced) {
            out << "- direction: " << direction_label(r.direction) << "\n";
        }
        out << "- detectors:\n";
        for (const DetectorEntry& d : r.detectors) {
            out << "    - `" << d.name << "`: score " << double_repr(d.score) << ", threshold "
                << double_repr(d.threshold) << "\n";
        }
        out << "- tags:";
        bool first = true;
        for (const std::string& tag : r.tags) {
            out << (first ? " `" : " | `") << tag << "`";
            first = false;
        }
        out << "\n";
        std::string fence = fence_for(r.excerpt);
        out << "\n" << fence << "\n";
        if (!r.excerpt.empty()) out << r.excerpt << "\n";
        out << fence << "\n";
    }
    return out.str();
}

std::vector<AnomalyRecord> parse_report_json(const std::string& text) {
    json j = json::parse(text);
    std::vector<AnomalyRecord> records;
    for (const json& r : j.at("records")) records.push_back(record_from_json(r));
    return records;
}

std::vector<AnomalyRecord> parse_report_markdown(const std::string& text) {
    std::vector<AnomalyRecord> records;
    std::istringstream in(text);
    std::string line;
    AnomalyRecord* current = nullptr;
    while (std::getline(in, line)) {
        if (line.rfind("## ", 0) == 0) {
            std::size_t tick1 = line.find('`');
            std::size_t tick2 = line.find('`', tick1 + 1);
            AnomalyRecord record;
            record.unit_id = line.substr(tick1 + 1, tick2 - tick1 - 1);
            record.kind = line.find(":: compiler-induced") != std::string::npos
                              ? AnomalyKind::CompilerInduced
                              : AnomalyKind::SyntaxTree;
            records.push_back(std::move(record));
            current = &records.back();
            continue;
        }
        if (current == nullptr) continue;
        if (line.rfind("- origin: `", 0) == 0) {
            std::size_t tick1 = line.find('`');
            std::size_t tick2 = line.find('`', tick1 + 1);
            current->origin_path = line.substr(tick1 + 1, tick2 - tick1 - 1);
            std::size_t lines_at = line.find(", lines ", tick2);
            if (lines_at != std::string::npos) {
                int a = 0, b = 0;
                std::sscanf(line.c_str() + lines_at, ", lines %d-%d", &a, &b);
                current->origin_span = {a, b};
            }
            continue;
        }
        if (line.rfind("- direction: ", 0) == 0) {
            std::string d = line.substr(std::string("- direction: ").size());
            current->direction = d == "bytecode-loud"  ? Direction::BytecodeLoud
                                 : d == "source-loud" ? Direction::SourceLoud
                                                      : Direction::None;
            continue;
        }
        if (line.rfind("    - `", 0) == 0) {
            std::size_t tick1 = line.find('`');
            std::size_t tick2 = line.find('`', tick1 + 1);
            DetectorEntry entry;
            entry.name = line.substr(tick1 + 1, tick2 - tick1 - 1);
            std::size_t score_at = line.find(": score ", tick2);
            std::size_t thr_at = line.find(", threshold ", tick2);
            entry.score = std::stod(line.substr(score_at + 8));
            entry.threshold = std::stod(line.substr(thr_at + 12));
            current->detectors.push_back(std::move(entry));
            continue;
        }
        if (line.rfind("- tags:", 0) == 0) {
            std::size_t at = 0;
            while (true) {
                std::size_t tick1 = line.find('`', at);
                if (tick1 == std::string::npos) break;
                std::size_t tick2 = line.find('`', tick1 + 1);
                if (tick2 == std::string::npos) break;
                current->tags.insert(line.substr(tick1 + 1, tick2 - tick1 - 1));
                at = tick2 + 1;
            }
            continue;
        }
        if (!line.empty() && line.find_first_not_of('`') == std::string::npos && line.size() >= 3) {
            // fenced excerpt
            std::string fence = line;
            std::ostringstream excerpt;
            bool first = true;
            while (std::getline(in, line) && line != fence) {
                if (!first) excerpt << "\n";
                excerpt << line;
                first = false;
            }
            current->excerpt = excerpt.str();
            continue;
        }
    }
    return records;
}

void emit_report(const std::vector<AnomalyRecord>& records, const RunManifest& manifest,
                 ReportFormat format, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write report: " + path.string());
    out << (format == ReportFormat::Json ? render_report_json(records, manifest)
                                         : render_report_markdown(records, manifest));
}

// --- file-mediated pipeline ---

std::vector<AnomalyRecord> run_pipeline(const std::filesystem::path& corpus_dir,
                                        const std::string& experiment,
                                        const PipelineConfig& config,
                                        const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    Corpus corpus = load_corpus(corpus_dir);
    RunManifest manifest;

    std::vector<AnomalyRecord> records;
    if (experiment == "explicit") {
        records = run_explicit(corpus, config, manifest);

        // persist the stage products
        std::vector<const CodeUnit*> units = sorted_functions(corpus);
        DenseVectorFile vectors;
        vectors.meta = json{{"record", "meta"},
                            {"kind", "metrics"},
                            {"catalog_version", kMetricCatalogVersion}};
        vectors.rows.resize(static_cast<Eigen::Index>(units.size()), kMetricCount);
        for (std::size_t i = 0; i < units.size(); ++i) {
            vectors.ids.push_back(units[i]->unit_id);
            MetricVector v = compute_metrics(*units[i]);
            for (int c = 0; c < kMetricCount; ++c) {
                vectors.rows(static_cast<Eigen::Index>(i), c) =
                    v.values[static_cast<std::size_t>(c)];
            }
        }
        write_dense_vectors(out_dir / "vectors-metrics.jsonl", vectors);

        Scaler scaler = scaler_fit(vectors.rows);
        Eigen::MatrixXd scaled = scaler_transform(scaler, vectors.rows);
        PcaModel pca = pca_fit(scaled, config.pca_k);
        DenseVectorFile projected;
        projected.ids = vectors.ids;
        projected.rows = pca_transform(pca, scaled);
        projected.scaler = scaler.to_json();
        projected.pca = pca.to_json();
        write_dense_vectors(out_dir / "vectors-preprocessed.jsonl", projected);

        AnomalyScoreSet lof = lof_scores(projected.ids, projected.rows, config.lof);
        write_score_set(out_dir / "scores-lof.json", lof, config.to_json());
        IForestConfig ifc = config.iforest;
        ifc.seed = mix(config.seed, 1);
        AnomalyScoreSet forest = iforest_fit_score(projected.ids, projected.rows, ifc);
        write_score_set(out_dir / "scores-iforest.json", forest, config.to_json());
    } else if (experiment == "implicit") {
        records = run_implicit(corpus, config, manifest);

        NGramVocabulary vocab;
        SparseCorpus sparse = tree_sparse_vectors(corpus, config, &vocab);
        SparseVectorFile file;
        file.ids = sparse.ids;
        file.vectors = sparse.vectors;
        file.meta = json{{"record", "meta"}, {"kind", "tree-ngrams"}, {"nmax", config.nmax}};
        write_sparse_vectors(out_dir / "vectors-tree-ngrams.jsonl", file);
        std::ofstream vocab_out(out_dir / "vocabulary-tree.json", std::ios::binary);
        vocab_out << vocab.to_json().dump(2) << "\n";
    } else if (experiment == "compiler-induced") {
        records = run_compiler_induced(corpus, config, manifest);
        write_links(out_dir / "links.json", corpus.links);
    } else {
        throw ConfigError("unknown experiment '" + experiment +
                          "' (expected explicit, implicit or compiler-induced)");
    }

    write_records(out_dir / "records.jsonl", records);
    emit_report(records, manifest, ReportFormat::Json, out_dir / "report.json");
    emit_report(records, manifest, ReportFormat::Markdown, out_dir / "report.md");
    std::ofstream manifest_out(out_dir / "manifest.json", std::ios::binary);
    manifest_out << manifest.to_json(/*include_timings=*/true).dump(2) << "\n";
    return records;
}

}  // namespace astray
