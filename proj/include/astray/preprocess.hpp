#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "astray/errors.hpp"

namespace astray {

// Per-dimension standardization to mean 0 / variance 1 (population variance).
// Zero-variance dimensions transform to 0.
struct Scaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;  // population standard deviation, >= 0

    nlohmann::json to_json() const;
    static Scaler from_json(const nlohmann::json& j);
};

Scaler scaler_fit(const Eigen::MatrixXd& rows);
Eigen::VectorXd scaler_transform(const Scaler& scaler, const Eigen::VectorXd& x);
Eigen::MatrixXd scaler_transform(const Scaler& scaler, const Eigen::MatrixXd& rows);

// Principal component analysis via eigendecomposition of the population
// covariance matrix. Components are canonicalized so that each one's
// largest-magnitude entry is non-negative.
struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;               // k x d, orthonormal rows
    Eigen::VectorXd explained_variance;       // top-k eigenvalues, descending
    Eigen::VectorXd explained_variance_ratio; // eigenvalue / total variance
    double total_variance = 0.0;

    int k() const { return static_cast<int>(components.rows()); }
    double cumulative_explained_variance() const { return explained_variance_ratio.sum(); }

    nlohmann::json to_json() const;
    static PcaModel from_json(const nlohmann::json& j);
};

PcaModel pca_fit(const Eigen::MatrixXd& rows, int k);
Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& x);
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& rows);
// Maps a k-vector back to the original space (used by reconstruction checks).
Eigen::VectorXd pca_inverse_transform(const PcaModel& model, const Eigen::VectorXd& z);

}  // namespace astray
