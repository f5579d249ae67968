#pragma once

// Line-delimited file formats the pipeline stages communicate through:
// vector files (dense or sparse, with model records riding along), score
// files, and anomaly record files.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "astray/anomaly.hpp"
#include "astray/detect.hpp"
#include "astray/features.hpp"

namespace astray {

struct DenseVectorFile {
    std::vector<std::string> ids;
    Eigen::MatrixXd rows;
    std::optional<nlohmann::json> scaler;   // {"record":"scaler", ...}
    std::optional<nlohmann::json> pca;      // {"record":"pca", ...}
    std::optional<nlohmann::json> meta;     // {"record":"meta", ...}
};

struct SparseVectorFile {
    std::vector<std::string> ids;
    std::vector<SparseVector> vectors;
    std::optional<nlohmann::json> meta;
};

void write_dense_vectors(const std::filesystem::path& path, const DenseVectorFile& file);
DenseVectorFile read_dense_vectors(const std::filesystem::path& path);

void write_sparse_vectors(const std::filesystem::path& path, const SparseVectorFile& file);
SparseVectorFile read_sparse_vectors(const std::filesystem::path& path);

void write_score_set(const std::filesystem::path& path, const AnomalyScoreSet& scores,
                     const nlohmann::json& config);
AnomalyScoreSet read_score_set(const std::filesystem::path& path);

nlohmann::json record_to_json(const AnomalyRecord& record);
AnomalyRecord record_from_json(const nlohmann::json& j);

void write_records(const std::filesystem::path& path, const std::vector<AnomalyRecord>& records);
std::vector<AnomalyRecord> read_records(const std::filesystem::path& path);

void write_links(const std::filesystem::path& path,
                 const std::map<std::string, std::vector<std::string>>& links);
std::map<std::string, std::vector<std::string>> read_links(const std::filesystem::path& path);

}  // namespace astray
