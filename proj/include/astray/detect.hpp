#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "astray/anomaly.hpp"
#include "astray/errors.hpp"
#include "astray/features.hpp"

namespace astray {

struct LofConfig {
    int n_neighbors = 20;
    double contamination = 0.001;
};

struct IForestConfig {
    int n_estimators = 200;
    int subsample_size = 256;  // clipped to the sample count
    double contamination = 0.0001;
    std::uint64_t seed = 1;
};

struct AutoencoderConfig {
    double compression_rate = 0.5;  // hidden width = ceil(rate * input width)
    int epochs = 5;
    int minibatch = 1024;
    double learning_rate = 0.01;
    std::uint64_t seed = 1;
};

int autoencoder_hidden_width(int input_width, double compression_rate);

struct AnomalyScoreSet {
    std::string detector;
    double threshold = 0.0;
    std::map<std::string, double> scores;   // unit_id -> score
    std::vector<std::string> flagged;       // sorted by unit_id

    nlohmann::json to_json() const;
    static AnomalyScoreSet from_json(const nlohmann::json& j);
};

// Local Outlier Factor over dense points (one row per unit). Scores follow
// the classical definition with k-distance neighborhoods (ties included),
// reachability distances and local reachability densities; duplicates get
// infinite density, which makes identical points score exactly 1. Flags the
// top ceil(contamination * n) scores, ties broken by unit_id.
AnomalyScoreSet lof_scores(const std::vector<std::string>& ids, const Eigen::MatrixXd& points,
                           const LofConfig& config);

// Isolation Forest. The per-unit score is the standard anomaly score
// s = 2^(-E[h]/c(subsample)); the normality measure E[h]/c(subsample) is
// decreasing in s, and the flagged set is the bottom ceil(contamination * n)
// units by normality. Same seed and data give bit-identical scores.
AnomalyScoreSet iforest_fit_score(const std::vector<std::string>& ids,
                                  const Eigen::MatrixXd& points, const IForestConfig& config);

// Single-hidden-layer autoencoder: ReLU hidden activation, linear output,
// mean-squared-error loss, plain SGD, Xavier-style init from the seeded
// generator. Sparse inputs are densified one minibatch at a time.
struct AutoencoderModel {
    Eigen::MatrixXd w1;  // hidden x input
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // input x hidden
    Eigen::VectorXd b2;
    AutoencoderConfig config;
    std::vector<double> epoch_losses;  // full-corpus loss after each epoch

    int input_width() const { return static_cast<int>(w1.cols()); }
    int hidden_width() const { return static_cast<int>(w1.rows()); }

    Eigen::VectorXd reconstruct(const Eigen::VectorXd& x) const;

    nlohmann::json to_json() const;
    static AutoencoderModel from_json(const nlohmann::json& j);
};

AutoencoderModel autoencoder_train(const std::vector<SparseVector>& vectors,
                                   const AutoencoderConfig& config);
AutoencoderModel autoencoder_train(const Eigen::MatrixXd& rows, const AutoencoderConfig& config);

// Anomaly score: Euclidean distance between input and reconstruction.
double autoencoder_score(const AutoencoderModel& model, const Eigen::VectorXd& x);
double autoencoder_score(const AutoencoderModel& model, const SparseVector& x);

// Loss and analytic gradients on one densified minibatch; exposed so the
// gradient check can compare them against finite differences.
struct AutoencoderGradients {
    double loss = 0.0;
    Eigen::MatrixXd w1, w2;
    Eigen::VectorXd b1, b2;
};
AutoencoderGradients autoencoder_loss_gradients(const AutoencoderModel& model,
                                                const Eigen::MatrixXd& batch_cols);

// Threshold at multiplier * sqrt(mean(score^2)); flags scores strictly above.
struct RmsThresholdResult {
    double threshold = 0.0;
    std::vector<std::string> flagged;  // sorted by unit_id
};
RmsThresholdResult rms_threshold(const std::map<std::string, double>& scores, double multiplier);

// Compiler-induced rule: normalize both score sets to [0,1] by their corpus
// maximum, aggregate a class's tree-side score as the max over its linked
// functions, and flag pairs whose normalized scores differ by more than
// delta, recording the loud side.
struct CompilerInducedResult {
    std::vector<AnomalyRecord> records;
    std::size_t compared_pairs = 0;  // 0 means no linked units were scored
};
CompilerInducedResult compiler_induced_detect(
    const std::map<std::string, double>& tree_scores,
    const std::map<std::string, double>& bytecode_scores,
    const std::map<std::string, std::vector<std::string>>& links, double delta);

}  // namespace astray
