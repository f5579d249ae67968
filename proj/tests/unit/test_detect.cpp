#include <random>

#include "doctest.h"

#include "astray/detect.hpp"
#include "support/oracles.hpp"

using namespace astray;

namespace {

std::vector<std::string> index_ids(std::size_t n) {
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        ids[i] = "u" + std::string(6 - std::to_string(i).size(), '0') + std::to_string(i);
    }
    return ids;
}

Eigen::MatrixXd gaussian_cluster(std::mt19937_64& rng, int n, int d, double sigma,
                                 const Eigen::VectorXd& center) {
    std::normal_distribution<double> dist(0.0, sigma);
    Eigen::MatrixXd m(n, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) m(i, j) = center[j] + dist(rng);
    }
    return m;
}

}  // namespace

// --- LOF ---

TEST_CASE("identical points all score 1") {
    Eigen::MatrixXd pts(8, 2);
    for (int i = 0; i < 8; ++i) pts.row(i) << 3.0, -1.0;
    auto out = lof_scores(index_ids(8), pts, {.n_neighbors = 3, .contamination = 0.25});
    for (const auto& [id, s] : out.scores) CHECK(s == doctest::Approx(1.0));
}

TEST_CASE("far point gets the strictly largest LOF score") {
    std::mt19937_64 rng(321);
    Eigen::VectorXd center = Eigen::VectorXd::Zero(2);
    Eigen::MatrixXd cluster = gaussian_cluster(rng, 50, 2, 1.0, center);
    Eigen::MatrixXd pts(51, 2);
    pts.topRows(50) = cluster;
    pts.row(50) << 100.0, 100.0;
    auto ids = index_ids(51);
    auto out = lof_scores(ids, pts, {.n_neighbors = 5, .contamination = 0.02});

    auto oracle_pts = std::vector<std::vector<double>>(51, std::vector<double>(2));
    for (int i = 0; i < 51; ++i) {
        oracle_pts[i] = {pts(i, 0), pts(i, 1)};
    }
    auto reference = oracles::LofReference::scores(oracle_pts, 5);

    double far_score = out.scores.at(ids[50]);
    for (int i = 0; i < 50; ++i) {
        CHECK(far_score > out.scores.at(ids[i]));
    }
    for (int i = 0; i < 51; ++i) {
        CHECK(out.scores.at(ids[i]) == doctest::Approx(reference[i]).epsilon(1e-12));
    }
    REQUIRE(out.flagged.size() == 2);  // ceil(0.02 * 51)
    CHECK(std::find(out.flagged.begin(), out.flagged.end(), ids[50]) != out.flagged.end());
}

TEST_CASE("contamination 0.001 on 1000 points flags exactly one") {
    std::mt19937_64 rng(11);
    Eigen::MatrixXd pts = gaussian_cluster(rng, 1000, 3, 1.0, Eigen::VectorXd::Zero(3));
    auto out = lof_scores(index_ids(1000), pts, {.n_neighbors = 20, .contamination = 0.001});
    CHECK(out.flagged.size() == 1);
}

TEST_CASE("LOF matches the brute-force reference on random data") {
    std::mt19937_64 rng(20240810);
    for (int round = 0; round < 25; ++round) {
        int n = std::uniform_int_distribution<int>(25, 120)(rng);
        int d = std::uniform_int_distribution<int>(1, 6)(rng);
        Eigen::MatrixXd pts = gaussian_cluster(rng, n, d, 2.0, Eigen::VectorXd::Zero(d));
        for (int k : {2, 5, 20}) {
            if (n <= k) continue;
            auto out = lof_scores(index_ids(static_cast<std::size_t>(n)), pts,
                                  {.n_neighbors = k, .contamination = 0.01});
            std::vector<std::vector<double>> rows(static_cast<std::size_t>(n),
                                                  std::vector<double>(static_cast<std::size_t>(d)));
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < d; ++j) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = pts(i, j);
            }
            auto reference = oracles::LofReference::scores(rows, k);
            auto ids = index_ids(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                CHECK(std::abs(out.scores.at(ids[static_cast<std::size_t>(i)]) -
                               reference[static_cast<std::size_t>(i)]) < 1e-9);
            }
        }
    }
}

TEST_CASE("uniform grid interior scores stay within 5% of 1") {
    // A uniform grid has uniform density; away from the boundary LOF ~ 1.
    const int side = 15;
    Eigen::MatrixXd pts(side * side, 2);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            pts.row(r * side + c) << static_cast<double>(r), static_cast<double>(c);
        }
    }
    auto ids = index_ids(static_cast<std::size_t>(side * side));
    auto out = lof_scores(ids, pts, {.n_neighbors = 5, .contamination = 0.01});
    const int margin = 4;
    for (int r = margin; r < side - margin; ++r) {
        for (int c = margin; c < side - margin; ++c) {
            double s = out.scores.at(ids[static_cast<std::size_t>(r * side + c)]);
            CHECK(s == doctest::Approx(1.0).epsilon(0.05));
        }
    }
}

TEST_CASE("too few points for the requested k") {
    Eigen::MatrixXd pts(5, 2);
    pts.setRandom();
    CHECK_THROWS_AS(lof_scores(index_ids(5), pts, {.n_neighbors = 5, .contamination = 0.1}),
                    TooFewPoints);
}

// --- Isolation Forest ---

TEST_CASE("planted outlier gets the worst normality across seeds") {
    int hits = 0;
    for (int seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed) * 7919);
        Eigen::VectorXd c1 = Eigen::VectorXd::Zero(4);
        Eigen::VectorXd c2 = Eigen::VectorXd::Constant(4, 8.0);
        Eigen::MatrixXd pts(201, 4);
        pts.topRows(100) = gaussian_cluster(rng, 100, 4, 1.0, c1);
        pts.middleRows(100, 100) = gaussian_cluster(rng, 100, 4, 1.0, c2);
        pts.row(200) = Eigen::VectorXd::Constant(4, 50.0 * 1.0 + 8.0).transpose();

        auto ids = index_ids(201);
        auto out = iforest_fit_score(ids, pts,
                                     {.n_estimators = 200,
                                      .subsample_size = 256,
                                      .contamination = 0.005,
                                      .seed = static_cast<std::uint64_t>(seed)});
        // highest anomaly score == worst normality
        double best = -1.0;
        std::string best_id;
        for (const auto& [id, s] : out.scores) {
            if (s > best) {
                best = s;
                best_id = id;
            }
        }
        hits += best_id == ids[200] ? 1 : 0;
    }
    CHECK(hits >= 18);
}

TEST_CASE("identical seed and data give bit-identical scores") {
    std::mt19937_64 rng(5);
    Eigen::MatrixXd pts = gaussian_cluster(rng, 300, 6, 1.0, Eigen::VectorXd::Zero(6));
    auto a = iforest_fit_score(index_ids(300), pts, {.seed = 42});
    auto b = iforest_fit_score(index_ids(300), pts, {.seed = 42});
    REQUIRE(a.scores.size() == b.scores.size());
    for (const auto& [id, s] : a.scores) {
        CHECK(b.scores.at(id) == s);  // bitwise equality
    }
    auto c = iforest_fit_score(index_ids(300), pts, {.seed = 43});
    bool any_diff = false;
    for (const auto& [id, s] : a.scores) any_diff |= c.scores.at(id) != s;
    CHECK(any_diff);
}

TEST_CASE("contamination 0.0001 on 10000 points flags exactly one") {
    std::mt19937_64 rng(99);
    Eigen::MatrixXd pts = gaussian_cluster(rng, 10000, 3, 1.0, Eigen::VectorXd::Zero(3));
    auto out = iforest_fit_score(index_ids(10000), pts,
                                 {.n_estimators = 200, .contamination = 0.0001, .seed = 7});
    CHECK(out.flagged.size() == 1);
}

TEST_CASE("duplicated single point is degenerate") {
    Eigen::MatrixXd pts(100, 3);
    for (int i = 0; i < 100; ++i) pts.row(i) << 1.0, 2.0, 3.0;
    CHECK_THROWS_AS(iforest_fit_score(index_ids(100), pts, {}), DegenerateData);
}

TEST_CASE("monotone separation: farther outliers never look more normal") {
    // normality is monotone in anomaly score: check score grows with distance
    int good = 0;
    for (int seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed) * 31337);
        Eigen::MatrixXd base = gaussian_cluster(rng, 150, 3, 1.0, Eigen::VectorXd::Zero(3));
        double prev = -1.0;
        bool monotone = true;
        for (double dist : {5.0, 10.0, 20.0, 40.0, 80.0}) {
            Eigen::MatrixXd pts(151, 3);
            pts.topRows(150) = base;
            pts.row(150) = Eigen::VectorXd::Constant(3, dist).transpose();
            auto out = iforest_fit_score(index_ids(151), pts,
                                         {.seed = static_cast<std::uint64_t>(seed)});
            double s = out.scores.at(index_ids(151)[150]);
            if (s < prev - 1e-12) monotone = false;
            prev = s;
        }
        good += monotone ? 1 : 0;
    }
    CHECK(good >= 18);
}

// --- autoencoder ---

TEST_CASE("hidden width follows the compression rate") {
    CHECK(autoencoder_hidden_width(4560, 0.5) == 2280);
    CHECK(autoencoder_hidden_width(4560, 0.25) == 1140);
    CHECK(autoencoder_hidden_width(4560, 0.75) == 3420);
    CHECK(autoencoder_hidden_width(10, 0.25) == 3);  // ceil(2.5)
    CHECK(autoencoder_hidden_width(1, 0.25) == 1);   // floor of 1
}

TEST_CASE("compression 0.5 on 4560-dim sparse vectors builds a 2280 hidden layer") {
    std::vector<SparseVector> vectors(3);
    for (std::uint32_t i = 0; i < 3; ++i) {
        vectors[i].dimension = 4560;
        vectors[i].pairs = {{i * 7, 1.0}, {i * 11 + 3, 2.0}};
    }
    AutoencoderModel model = autoencoder_train(
        vectors, {.compression_rate = 0.5, .epochs = 1, .minibatch = 3, .seed = 9});
    CHECK(model.hidden_width() == 2280);
    CHECK(model.input_width() == 4560);
}

TEST_CASE("one repeated vector is learned to under 10% of its norm") {
    Eigen::VectorXd x(8);
    x << 1.0, 0.0, 2.0, 0.5, 0.0, 1.5, 0.25, 0.75;
    Eigen::MatrixXd rows(512, 8);
    for (int i = 0; i < 512; ++i) rows.row(i) = x.transpose();
    AutoencoderModel model = autoencoder_train(
        rows, {.compression_rate = 0.75, .epochs = 5, .minibatch = 4, .seed = 3});
    CHECK(autoencoder_score(model, x) < 0.1 * x.norm());
    REQUIRE(model.epoch_losses.size() == 5);
    CHECK(model.epoch_losses.back() <= model.epoch_losses.front());
}

TEST_CASE("zero input reconstructs to the norm of the output, finite") {
    std::mt19937_64 rng(17);
    Eigen::MatrixXd rows(32, 6);
    std::normal_distribution<double> dist(1.0, 0.2);
    for (int i = 0; i < 32; ++i) {
        for (int j = 0; j < 6; ++j) rows(i, j) = dist(rng);
    }
    AutoencoderModel model =
        autoencoder_train(rows, {.compression_rate = 0.5, .epochs = 2, .minibatch = 8, .seed = 4});
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(6);
    double score = autoencoder_score(model, zero);
    CHECK(std::isfinite(score));
    CHECK(score == doctest::Approx(model.reconstruct(zero).norm()));
}

TEST_CASE("perfect reconstruction scores zero; known pair matches the formula") {
    // hand-built identity model: w1 = I, w2 = I, biases 0, relu passes x >= 0
    AutoencoderModel model;
    model.w1 = Eigen::MatrixXd::Identity(4, 4);
    model.w2 = Eigen::MatrixXd::Identity(4, 4);
    model.b1 = Eigen::VectorXd::Zero(4);
    model.b2 = Eigen::VectorXd::Zero(4);
    Eigen::VectorXd x(4);
    x << 1.0, 2.0, 0.0, 0.5;
    CHECK(autoencoder_score(model, x) == 0.0);

    model.b2 << 0.5, -0.5, 1.0, 0.0;  // output y = x + b2
    double expected = std::sqrt(0.25 + 0.25 + 1.0);
    CHECK(autoencoder_score(model, x) == doctest::Approx(expected));
}

TEST_CASE("analytic gradients match central finite differences") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd batch(10, 4);  // 10-dim network, 4 samples
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 4; ++j) batch(i, j) = dist(rng);
    }
    AutoencoderModel model = autoencoder_train(
        Eigen::MatrixXd(batch.transpose()),
        {.compression_rate = 0.5, .epochs = 1, .minibatch = 4, .seed = 8});

    AutoencoderGradients analytic = autoencoder_loss_gradients(model, batch);
    const double eps = 1e-6;
    auto loss_at = [&](AutoencoderModel m) {
        AutoencoderGradients g = autoencoder_loss_gradients(m, batch);
        return g.loss;
    };

    double max_rel = 0.0;
    auto check_param = [&](auto get_param, auto get_grad) {
        AutoencoderModel probe = model;
        auto& param = get_param(probe);
        const auto& grad = get_grad(analytic);
        for (Eigen::Index r = 0; r < param.rows(); ++r) {
            for (Eigen::Index c = 0; c < param.cols(); ++c) {
                double saved = param(r, c);
                param(r, c) = saved + eps;
                double up = loss_at(probe);
                param(r, c) = saved - eps;
                double down = loss_at(probe);
                param(r, c) = saved;
                double fd = (up - down) / (2.0 * eps);
                double denom = std::max({std::abs(fd), std::abs(grad(r, c)), 1e-8});
                max_rel = std::max(max_rel, std::abs(fd - grad(r, c)) / denom);
            }
        }
    };
    check_param([](AutoencoderModel& m) -> Eigen::MatrixXd& { return m.w1; },
                [](const AutoencoderGradients& g) -> const Eigen::MatrixXd& { return g.w1; });
    check_param([](AutoencoderModel& m) -> Eigen::MatrixXd& { return m.w2; },
                [](const AutoencoderGradients& g) -> const Eigen::MatrixXd& { return g.w2; });
    CHECK(max_rel < 1e-4);
}

TEST_CASE("sparse outlier scores above the corpus 99th percentile") {
    // synthetic n-gram corpus: 300 units over 40 dims drawn from 5 templates
    std::mt19937_64 rng(314159);
    std::uniform_int_distribution<int> jitter(0, 2);
    std::vector<SparseVector> vectors;
    for (int i = 0; i < 300; ++i) {
        SparseVector v;
        v.dimension = 40;
        int tmpl = i % 5;
        for (std::uint32_t d = 0; d < 8; ++d) {
            std::uint32_t idx = static_cast<std::uint32_t>(tmpl) * 8 + d;
            v.pairs.emplace_back(idx, 1.0 + jitter(rng));
        }
        vectors.push_back(std::move(v));
    }
    SparseVector outlier;
    outlier.dimension = 40;
    for (std::uint32_t d = 0; d < 40; ++d) outlier.pairs.emplace_back(d, 60.0);
    vectors.push_back(outlier);

    AutoencoderModel model = autoencoder_train(
        vectors, {.compression_rate = 0.5, .epochs = 5, .minibatch = 64, .seed = 77});
    std::vector<double> scores;
    for (const SparseVector& v : vectors) scores.push_back(autoencoder_score(model, v));
    double outlier_score = scores.back();
    std::vector<double> sorted(scores.begin(), scores.end() - 1);
    std::sort(sorted.begin(), sorted.end());
    double p99 = sorted[static_cast<std::size_t>(0.99 * static_cast<double>(sorted.size()))];
    CHECK(outlier_score > p99);
}

TEST_CASE("training on an empty corpus fails") {
    CHECK_THROWS_AS(autoencoder_train(std::vector<SparseVector>{}, {}), EmptyCorpus);
}

TEST_CASE("diverging training aborts with NonFiniteLoss") {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Constant(512, 8, 1e4);
    AutoencoderConfig config;
    config.learning_rate = 1e8;  // guaranteed blow-up
    config.minibatch = 8;
    config.epochs = 10;
    CHECK_THROWS_AS(autoencoder_train(rows, config), NonFiniteLoss);
}

TEST_CASE("scoring rejects mismatched dimensions") {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Random(16, 6).cwiseAbs();
    AutoencoderModel model =
        autoencoder_train(rows, {.compression_rate = 0.5, .epochs = 1, .minibatch = 8, .seed = 2});
    Eigen::VectorXd wrong(9);
    wrong.setZero();
    CHECK_THROWS_AS(autoencoder_score(model, wrong), DimensionMismatch);
    SparseVector sparse;
    sparse.dimension = 4;
    CHECK_THROWS_AS(autoencoder_score(model, sparse), DimensionMismatch);
}

// --- RMS threshold ---

TEST_CASE("equal scores flag nothing at multiplier 3") {
    std::map<std::string, double> scores;
    for (int i = 0; i < 10; ++i) scores["u" + std::to_string(i)] = 2.5;
    auto out = rms_threshold(scores, 3.0);
    CHECK(out.threshold == doctest::Approx(7.5));
    CHECK(out.flagged.empty());
}

TEST_CASE("rms of {1,1,1,10} stays above all scores") {
    std::map<std::string, double> scores = {{"a", 1.0}, {"b", 1.0}, {"c", 1.0}, {"d", 10.0}};
    auto out = rms_threshold(scores, 3.0);
    CHECK(out.threshold == doctest::Approx(3.0 * std::sqrt(25.75)));
    CHECK(out.threshold == doctest::Approx(15.2233).epsilon(1e-4));
    CHECK(out.flagged.empty());
}

TEST_CASE("strictly-above rule flags a genuine outlier") {
    std::map<std::string, double> scores;
    for (int i = 0; i < 400; ++i) scores["u" + std::to_string(i)] = 1.0;
    scores["outlier"] = 100.0;
    auto out = rms_threshold(scores, 3.0);
    REQUIRE(out.flagged.size() == 1);
    CHECK(out.flagged[0] == "outlier");
}

// --- compiler-induced rule ---

TEST_CASE("divergent pair flags bytecode-loud") {
    std::map<std::string, double> tree = {{"f1", 0.05}};
    std::map<std::string, double> bytecode = {{"c1", 0.95}};
    std::map<std::string, std::vector<std::string>> links = {{"c1", {"f1"}}};
    // scores already in [0,1]: normalization by max keeps ratio; use raw maxes of 1.0
    tree["fmax"] = 1.0;
    bytecode["cmax"] = 1.0;
    auto out = compiler_induced_detect(tree, bytecode, links, 0.8);
    REQUIRE(out.records.size() == 1);
    CHECK(out.records[0].unit_id == "c1");
    CHECK(out.records[0].direction == Direction::BytecodeLoud);
    CHECK(out.records[0].kind == AnomalyKind::CompilerInduced);
    REQUIRE(out.records[0].detectors.size() == 2);
    CHECK(out.records[0].detectors[0].score == doctest::Approx(0.05));
    CHECK(out.records[0].detectors[1].score == doctest::Approx(0.95));
}

TEST_CASE("equal pair is not flagged") {
    std::map<std::string, double> tree = {{"f1", 0.5}, {"fmax", 1.0}};
    std::map<std::string, double> bytecode = {{"c1", 0.5}, {"cmax", 1.0}};
    std::map<std::string, std::vector<std::string>> links = {{"c1", {"f1"}}};
    auto out = compiler_induced_detect(tree, bytecode, links, 0.8);
    CHECK(out.records.empty());
    CHECK(out.compared_pairs == 1);
}

TEST_CASE("source-loud direction for the opposite divergence") {
    std::map<std::string, double> tree = {{"f1", 0.95}, {"fmax", 1.0}};
    std::map<std::string, double> bytecode = {{"c1", 0.05}, {"cmax", 1.0}};
    std::map<std::string, std::vector<std::string>> links = {{"c1", {"f1"}}};
    auto out = compiler_induced_detect(tree, bytecode, links, 0.8);
    REQUIRE(out.records.size() == 1);
    CHECK(out.records[0].direction == Direction::SourceLoud);
}

TEST_CASE("swapping score sets preserves the flagged pairs, flipping direction") {
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::map<std::string, double> tree, bytecode;
    std::map<std::string, std::vector<std::string>> links;
    for (int i = 0; i < 50; ++i) {
        std::string f = "f" + std::to_string(i);
        std::string c = "c" + std::to_string(i);
        tree[f] = unit(rng);
        bytecode[c] = unit(rng);
        links[c] = {f};
    }
    // make the maxima 1.0 so swapping does not change normalization
    tree["f0"] = 1.0;
    bytecode["c0"] = 1.0;

    auto forward = compiler_induced_detect(tree, bytecode, links, 0.6);

    std::map<std::string, double> tree_swapped, bytecode_swapped;
    for (int i = 0; i < 50; ++i) {
        tree_swapped["f" + std::to_string(i)] = bytecode["c" + std::to_string(i)];
        bytecode_swapped["c" + std::to_string(i)] = tree["f" + std::to_string(i)];
    }
    auto backward = compiler_induced_detect(tree_swapped, bytecode_swapped, links, 0.6);

    REQUIRE(forward.records.size() == backward.records.size());
    for (std::size_t i = 0; i < forward.records.size(); ++i) {
        CHECK(forward.records[i].unit_id == backward.records[i].unit_id);
        CHECK(forward.records[i].direction != backward.records[i].direction);
    }
}

TEST_CASE("no linked units gives an empty result") {
    std::map<std::string, double> tree = {{"f1", 0.9}};
    std::map<std::string, double> bytecode = {{"c1", 0.1}};
    auto out = compiler_induced_detect(tree, bytecode, {}, 0.8);
    CHECK(out.records.empty());
    CHECK(out.compared_pairs == 0);
    // links to units that were never scored also count as unlinked
    auto out2 = compiler_induced_detect(tree, bytecode, {{"cX", {"fY"}}}, 0.8);
    CHECK(out2.compared_pairs == 0);
}

TEST_CASE("contamination exactness with deterministic ties") {
    // 10 equal scores: the flag boundary cuts ties by unit_id
    Eigen::MatrixXd pts(10, 1);
    for (int i = 0; i < 10; ++i) pts(i, 0) = static_cast<double>(i % 2);
    auto ids = index_ids(10);
    auto out = iforest_fit_score(ids, pts, {.n_estimators = 10, .contamination = 0.3, .seed = 5});
    CHECK(out.flagged.size() == 3);  // ceil(0.3 * 10)
    auto again = iforest_fit_score(ids, pts, {.n_estimators = 10, .contamination = 0.3, .seed = 5});
    CHECK(out.flagged == again.flagged);
}
