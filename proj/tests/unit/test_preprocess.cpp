#include <random>

#include "doctest.h"

#include "astray/preprocess.hpp"
#include "support/oracles.hpp"

using namespace astray;

namespace {

Eigen::MatrixXd random_rows(std::mt19937_64& rng, int n, int d, double spread = 2.0) {
    std::normal_distribution<double> dist(0.0, spread);
    Eigen::MatrixXd m(n, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) m(i, j) = dist(rng);
    }
    return m;
}

}  // namespace

TEST_CASE("scaler maps {0,2} to {-1,+1} with population variance") {
    Eigen::MatrixXd rows(2, 1);
    rows << 0.0, 2.0;
    Scaler s = scaler_fit(rows);
    CHECK(s.mean[0] == doctest::Approx(1.0));
    CHECK(s.stddev[0] == doctest::Approx(1.0));  // population: sqrt(((1)^2+(1)^2)/2)
    Eigen::VectorXd lo(1), hi(1);
    lo << 0.0;
    hi << 2.0;
    CHECK(scaler_transform(s, lo)[0] == doctest::Approx(-1.0));
    CHECK(scaler_transform(s, hi)[0] == doctest::Approx(1.0));
}

TEST_CASE("constant columns transform to zero") {
    Eigen::MatrixXd rows(3, 2);
    rows << 5.0, 1.0, 5.0, 2.0, 5.0, 3.0;
    Scaler s = scaler_fit(rows);
    Eigen::MatrixXd out = scaler_transform(s, rows);
    CHECK(out.col(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(out.col(1).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("binary metric columns pass through the same transform") {
    // A 0/1 column is scaled exactly like any quantitative column.
    Eigen::MatrixXd rows(4, 1);
    rows << 0.0, 1.0, 0.0, 1.0;
    Scaler s = scaler_fit(rows);
    CHECK(s.stddev[0] == doctest::Approx(0.5));
    Eigen::VectorXd x(1);
    x << 1.0;
    CHECK(scaler_transform(s, x)[0] == doctest::Approx(1.0));
}

TEST_CASE("transformed corpus has mean 0 and variance 1") {
    std::mt19937_64 rng(42);
    Eigen::MatrixXd rows = random_rows(rng, 200, 7);
    rows.col(3).setConstant(9.0);  // one constant dim
    Scaler s = scaler_fit(rows);
    Eigen::MatrixXd out = scaler_transform(s, rows);
    for (int c = 0; c < out.cols(); ++c) {
        double mean = out.col(c).mean();
        double var = (out.col(c).array() - mean).square().sum() / out.rows();
        CHECK(std::abs(mean) < 1e-9);
        if (c == 3) {
            CHECK(var == 0.0);
        } else {
            CHECK(std::abs(var - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("scaler dimension mismatch") {
    Eigen::MatrixXd rows(3, 2);
    rows.setRandom();
    Scaler s = scaler_fit(rows);
    Eigen::VectorXd wrong(3);
    wrong.setZero();
    CHECK_THROWS_AS(scaler_transform(s, wrong), DimensionMismatch);
    Eigen::MatrixXd one_row(1, 2);
    one_row.setZero();
    CHECK_THROWS_AS(scaler_fit(one_row), DimensionMismatch);
}

TEST_CASE("scaler json round trip") {
    std::mt19937_64 rng(5);
    Eigen::MatrixXd rows = random_rows(rng, 20, 4);
    Scaler s = scaler_fit(rows);
    Scaler back = Scaler::from_json(s.to_json());
    CHECK((back.mean - s.mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.stddev - s.stddev).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pca on collinear data explains everything with one component") {
    // points on a line in 3-D
    Eigen::MatrixXd rows(5, 3);
    Eigen::Vector3d direction(1.0, -2.0, 0.5);
    for (int i = 0; i < 5; ++i) {
        rows.row(i) = (direction * (i - 2.0)).transpose();
    }
    PcaModel model = pca_fit(rows, 1);
    CHECK(model.explained_variance_ratio[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pca components match the Jacobi oracle up to sign") {
    std::mt19937_64 rng(202408);
    for (int round = 0; round < 10; ++round) {
        int d = 8;
        Eigen::MatrixXd rows = random_rows(rng, 60, d);
        PcaModel model = pca_fit(rows, d);

        // oracle on the same population covariance
        Eigen::VectorXd mean = rows.colwise().mean();
        Eigen::MatrixXd centered = rows.rowwise() - mean.transpose();
        Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(rows.rows());
        std::vector<std::vector<double>> cov_vec(d, std::vector<double>(d));
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) cov_vec[i][j] = cov(i, j);
        }
        auto eig = oracles::JacobiEigen::decompose(cov_vec);

        for (int i = 0; i < d; ++i) {
            CHECK(model.explained_variance[i] == doctest::Approx(eig.values[i]).epsilon(1e-6));
            // compare up to sign
            double dot = 0.0;
            for (int j = 0; j < d; ++j) dot += model.components(i, j) * eig.vectors[i][j];
            CHECK(std::abs(std::abs(dot) - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("pca rows are orthonormal and ratios non-increasing") {
    std::mt19937_64 rng(7);
    Eigen::MatrixXd rows = random_rows(rng, 100, 10);
    PcaModel model = pca_fit(rows, 6);
    Eigen::MatrixXd gram = model.components * model.components.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
    for (int i = 1; i < 6; ++i) {
        CHECK(model.explained_variance_ratio[i] <= model.explained_variance_ratio[i - 1] + 1e-12);
    }
    CHECK(model.explained_variance_ratio.sum() <= 1.0 + 1e-9);
}

TEST_CASE("sign canonicalization makes outputs deterministic") {
    std::mt19937_64 rng(11);
    Eigen::MatrixXd rows = random_rows(rng, 50, 6);
    PcaModel model = pca_fit(rows, 4);
    for (int i = 0; i < 4; ++i) {
        Eigen::Index at = 0;
        model.components.row(i).cwiseAbs().maxCoeff(&at);
        CHECK(model.components(i, at) >= 0.0);
    }
}

TEST_CASE("reconstruction error equals the dropped eigenvalue mass") {
    std::mt19937_64 rng(13);
    for (int round = 0; round < 5; ++round) {
        Eigen::MatrixXd rows = random_rows(rng, 80, 9);
        PcaModel full = pca_fit(rows, 9);
        for (int k : {2, 5, 8}) {
            PcaModel model = pca_fit(rows, k);
            double mse = 0.0;
            for (Eigen::Index r = 0; r < rows.rows(); ++r) {
                Eigen::VectorXd x = rows.row(r);
                Eigen::VectorXd rec = pca_inverse_transform(model, pca_transform(model, x));
                mse += (x - rec).squaredNorm();
            }
            mse /= static_cast<double>(rows.rows());
            double dropped = 0.0;
            for (int i = k; i < 9; ++i) dropped += full.explained_variance[i];
            CHECK(mse == doctest::Approx(dropped).epsilon(1e-6));
        }
    }
}

TEST_CASE("transform is linear after centering") {
    std::mt19937_64 rng(17);
    Eigen::MatrixXd rows = random_rows(rng, 40, 5);
    PcaModel model = pca_fit(rows, 3);
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::VectorXd x(5), y(5);
    for (int i = 0; i < 5; ++i) {
        x[i] = dist(rng);
        y[i] = dist(rng);
    }
    double a = 0.7, b = -1.3;
    Eigen::VectorXd lhs = pca_transform(model, (a * x + b * y).eval());
    // T(ax + by) = a T(x) + b T(y) + (1 - a - b) T(mean-as-point-at-origin)
    Eigen::VectorXd tx = pca_transform(model, x);
    Eigen::VectorXd ty = pca_transform(model, y);
    Eigen::VectorXd correction = model.components * ((1.0 - a - b) * -model.mean);
    Eigen::VectorXd rhs = a * tx + b * ty + correction;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("degenerate covariance raises") {
    Eigen::MatrixXd rows(4, 3);
    for (int i = 0; i < 4; ++i) rows.row(i) << 1.0, 2.0, 3.0;
    CHECK_THROWS_AS(pca_fit(rows, 2), DegenerateCovariance);
}

TEST_CASE("k bounds are enforced") {
    Eigen::MatrixXd rows(3, 4);
    rows.setRandom();
    CHECK_THROWS_AS(pca_fit(rows, 5), DimensionMismatch);  // k > dim
    CHECK_THROWS_AS(pca_fit(rows, 4), DimensionMismatch);  // k > samples
    CHECK_THROWS_AS(pca_fit(rows, 0), DimensionMismatch);
}

TEST_CASE("pca json round trip") {
    std::mt19937_64 rng(23);
    Eigen::MatrixXd rows = random_rows(rng, 30, 6);
    PcaModel model = pca_fit(rows, 3);
    PcaModel back = PcaModel::from_json(model.to_json());
    CHECK((back.components - model.components).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.mean - model.mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.total_variance == model.total_variance);
}
