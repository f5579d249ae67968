#include "astray/preprocess.hpp"

#include <vector>

namespace astray {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

}  // namespace

Scaler scaler_fit(const Eigen::MatrixXd& rows) {
    if (rows.rows() < 2) throw DimensionMismatch("scaler_fit needs at least 2 vectors");
    Scaler scaler;
    scaler.mean = rows.colwise().mean();
    Eigen::MatrixXd centered = rows.rowwise() - scaler.mean.transpose();
    // population variance: divide by n
    Eigen::VectorXd var =
        centered.array().square().colwise().sum() / static_cast<double>(rows.rows());
    scaler.stddev = var.array().sqrt();
    return scaler;
}

Eigen::VectorXd scaler_transform(const Scaler& scaler, const Eigen::VectorXd& x) {
    if (x.size() != scaler.mean.size()) {
        throw DimensionMismatch("vector has dimension " + std::to_string(x.size()) +
                                ", scaler was fit on " + std::to_string(scaler.mean.size()));
    }
    Eigen::VectorXd out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        out[i] = scaler.stddev[i] > 0.0 ? (x[i] - scaler.mean[i]) / scaler.stddev[i] : 0.0;
    }
    return out;
}

Eigen::MatrixXd scaler_transform(const Scaler& scaler, const Eigen::MatrixXd& rows) {
    if (rows.cols() != scaler.mean.size()) {
        throw DimensionMismatch("matrix has " + std::to_string(rows.cols()) +
                                " columns, scaler was fit on " + std::to_string(scaler.mean.size()));
    }
    Eigen::MatrixXd out(rows.rows(), rows.cols());
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
        if (scaler.stddev[c] > 0.0) {
            out.col(c) = (rows.col(c).array() - scaler.mean[c]) / scaler.stddev[c];
        } else {
            out.col(c).setZero();
        }
    }
    return out;
}

json Scaler::to_json() const {
    return {{"record", "scaler"},
            {"version", 1},
            {"mean", vector_to_json(mean)},
            {"stddev", vector_to_json(stddev)}};
}

Scaler Scaler::from_json(const json& j) {
    Scaler s;
    s.mean = vector_from_json(j.at("mean"));
    s.stddev = vector_from_json(j.at("stddev"));
    return s;
}

PcaModel pca_fit(const Eigen::MatrixXd& rows, int k) {
    const Eigen::Index n = rows.rows();
    const Eigen::Index d = rows.cols();
    if (k < 1 || k > d) {
        throw DimensionMismatch("k must be in [1, dimension]; got k=" + std::to_string(k) +
                                ", dimension=" + std::to_string(d));
    }
    if (n < 1 || k > n) {
        throw DimensionMismatch("k must not exceed the sample count");
    }

    PcaModel model;
    model.mean = rows.colwise().mean();
    Eigen::MatrixXd centered = rows.rowwise() - model.mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);

    model.total_variance = cov.trace();
    if (model.total_variance <= 0.0) {
        throw DegenerateCovariance("all points are identical; covariance is zero");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw DegenerateCovariance("eigendecomposition failed to converge");
    }

    // SelfAdjointEigenSolver returns ascending eigenvalues; take the top k.
    model.components.resize(k, d);
    model.explained_variance.resize(k);
    model.explained_variance_ratio.resize(k);
    for (int i = 0; i < k; ++i) {
        Eigen::Index src = d - 1 - i;
        Eigen::VectorXd comp = solver.eigenvectors().col(src);
        // Sign canonicalization: largest-magnitude entry becomes non-negative.
        Eigen::Index at = 0;
        comp.cwiseAbs().maxCoeff(&at);
        if (comp[at] < 0.0) comp = -comp;
        model.components.row(i) = comp.transpose();
        double eigenvalue = std::max(0.0, solver.eigenvalues()[src]);
        model.explained_variance[i] = eigenvalue;
        model.explained_variance_ratio[i] = eigenvalue / model.total_variance;
    }
    return model;
}

Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.mean.size()) {
        throw DimensionMismatch("vector has dimension " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(model.mean.size()));
    }
    return model.components * (x - model.mean);
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& rows) {
    if (rows.cols() != model.mean.size()) {
        throw DimensionMismatch("matrix has " + std::to_string(rows.cols()) +
                                " columns, model expects " + std::to_string(model.mean.size()));
    }
    return (rows.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::VectorXd pca_inverse_transform(const PcaModel& model, const Eigen::VectorXd& z) {
    if (z.size() != model.components.rows()) {
        throw DimensionMismatch("latent vector has dimension " + std::to_string(z.size()) +
                                ", model has k=" + std::to_string(model.components.rows()));
    }
    return model.components.transpose() * z + model.mean;
}

json PcaModel::to_json() const {
    json comps = json::array();
    for (Eigen::Index r = 0; r < components.rows(); ++r) {
        comps.push_back(vector_to_json(components.row(r)));
    }
    return {{"record", "pca"},
            {"version", 1},
            {"mean", vector_to_json(mean)},
            {"components", comps},
            {"explained_variance", vector_to_json(explained_variance)},
            {"explained_variance_ratio", vector_to_json(explained_variance_ratio)},
            {"total_variance", total_variance}};
}

PcaModel PcaModel::from_json(const json& j) {
    PcaModel m;
    m.mean = vector_from_json(j.at("mean"));
    const json& comps = j.at("components");
    m.components.resize(static_cast<Eigen::Index>(comps.size()), m.mean.size());
    for (std::size_t r = 0; r < comps.size(); ++r) {
        m.components.row(static_cast<Eigen::Index>(r)) =
            vector_from_json(comps[r]).transpose();
    }
    m.explained_variance = vector_from_json(j.at("explained_variance"));
    m.explained_variance_ratio = vector_from_json(j.at("explained_variance_ratio"));
    m.total_variance = j.at("total_variance").get<double>();
    return m;
}

}  // namespace astray
