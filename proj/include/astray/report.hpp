#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "astray/anomaly.hpp"
#include "astray/corpus.hpp"
#include "astray/detect.hpp"
#include "astray/errors.hpp"

namespace astray {

class NoLinkedUnits : public Error {
public:
    using Error::Error;
};

inline constexpr const char* kReportSchemaVersion = "astray-report-1";

// Every knob of the pipeline in one place.
struct PipelineConfig {
    std::uint64_t seed = 1;

    // feature extraction
    int nmax = 3;
    int window = 3;
    int min_df = 5;
    double max_df_ratio = 0.5;

    // preprocessing (explicit experiment)
    int pca_k = 20;
    bool scale_binary_metrics = true;

    // detectors
    LofConfig lof;            // n_neighbors 20, contamination 0.001
    IForestConfig iforest;    // 200 trees, subsample 256, contamination 0.0001
    AutoencoderConfig autoencoder;  // epochs 5, minibatch 1024, lr 0.01
    std::vector<double> compression_rates = {0.25, 0.5, 0.75};
    double rms_multiplier = 3.0;
    double compiler_induced_delta = 0.8;

    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
};

struct RunManifest {
    std::string corpus_id;
    std::string experiment;
    PipelineConfig config;
    std::map<std::string, std::uint64_t> counts;
    std::map<std::string, double> stage_seconds;  // volatile; kept out of reports
    std::vector<std::string> audit;               // tagging audit trail

    // Timings are excluded by default so reports stay byte-reproducible.
    nlohmann::json to_json(bool include_timings = false) const;
};

// The 30 anomaly-type names used to classify findings, plus free-form
// extensions. Lookup ignores the decorative quotes in names like
// «"When" expression».
class TagVocabulary {
public:
    static const std::vector<std::string>& builtin();
    // Canonical builtin spelling for `name`, or `name` itself if unknown.
    static std::string canonical(const std::string& name);
    static bool contains(const std::string& name);
};

// Stores tags on a record (never infers them). Unknown tags are rejected in
// strict mode; otherwise they pass through as free-form entries. Idempotent;
// appends an audit note per newly added tag.
void tag_record(AnomalyRecord& record, const std::vector<std::string>& tags, bool strict,
                RunManifest* manifest);

bool record_has_tag(const AnomalyRecord& record, const std::string& name);

// --- experiment runners (in-memory composition of the stages) ---

// metrics -> scale -> PCA -> LOF + Isolation Forest -> union of flags.
std::vector<AnomalyRecord> run_explicit(const Corpus& corpus, const PipelineConfig& config,
                                        RunManifest& manifest);

// tree N-grams -> vocabulary -> one autoencoder per compression rate ->
// per-model RMS flags -> union across models.
std::vector<AnomalyRecord> run_implicit(const Corpus& corpus, const PipelineConfig& config,
                                        RunManifest& manifest);

// per-representation autoencoder scores -> max-normalization -> delta rule.
std::vector<AnomalyRecord> run_compiler_induced(const Corpus& corpus,
                                                const PipelineConfig& config,
                                                RunManifest& manifest);

// Stable report order: kind, then descending max score, then unit_id.
void sort_records(std::vector<AnomalyRecord>& records);

std::string render_report_json(const std::vector<AnomalyRecord>& records,
                               const RunManifest& manifest);
std::string render_report_markdown(const std::vector<AnomalyRecord>& records,
                                   const RunManifest& manifest);
std::vector<AnomalyRecord> parse_report_json(const std::string& text);
std::vector<AnomalyRecord> parse_report_markdown(const std::string& text);

enum class ReportFormat { Json, Markdown };

void emit_report(const std::vector<AnomalyRecord>& records, const RunManifest& manifest,
                 ReportFormat format, const std::filesystem::path& path);

// File-mediated orchestration used by the CLI: every stage reads its input
// from disk and persists its output under out_dir (vectors, scores, records,
// report.json, manifest.json).
std::vector<AnomalyRecord> run_pipeline(const std::filesystem::path& corpus_dir,
                                        const std::string& experiment,
                                        const PipelineConfig& config,
                                        const std::filesystem::path& out_dir);

}  // namespace astray
