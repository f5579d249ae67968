#include "astray/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace astray {

namespace {

using nlohmann::json;

constexpr double kEulerMascheroni = 0.5772156649015329;

// Expected path length of an unsuccessful BST search over n points.
double expected_path_length(std::size_t n) {
    if (n <= 1) return 0.0;
    if (n == 2) return 1.0;
    double h = std::log(static_cast<double>(n - 1)) + kEulerMascheroni;
    return 2.0 * h - 2.0 * static_cast<double>(n - 1) / static_cast<double>(n);
}

// Flags the `count` worst units; `worse` orders unit indices by severity.
// Ties at the boundary are broken by ascending unit_id.
std::vector<std::string> flag_worst(const std::vector<std::string>& ids,
                                    const std::vector<double>& severity, std::size_t count) {
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (severity[a] != severity[b]) return severity[a] > severity[b];
        return ids[a] < ids[b];
    });
    std::vector<std::string> flagged;
    flagged.reserve(count);
    for (std::size_t i = 0; i < count && i < order.size(); ++i) {
        flagged.push_back(ids[order[i]]);
    }
    std::sort(flagged.begin(), flagged.end());
    return flagged;
}

std::size_t contamination_count(double contamination, std::size_t n) {
    return static_cast<std::size_t>(
        std::ceil(contamination * static_cast<double>(n) - 1e-12));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over (seed, stream)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

json AnomalyScoreSet::to_json() const {
    json scores_json = json::object();
    for (const auto& [id, score] : scores) scores_json[id] = score;
    return {{"detector", detector},
            {"threshold", threshold},
            {"scores", scores_json},
            {"flagged", flagged}};
}

AnomalyScoreSet AnomalyScoreSet::from_json(const json& j) {
    AnomalyScoreSet s;
    s.detector = j.at("detector").get<std::string>();
    s.threshold = j.at("threshold").get<double>();
    for (const auto& [id, score] : j.at("scores").items()) {
        s.scores[id] = score.get<double>();
    }
    s.flagged = j.at("flagged").get<std::vector<std::string>>();
    return s;
}

// --- Local Outlier Factor ---

AnomalyScoreSet lof_scores(const std::vector<std::string>& ids, const Eigen::MatrixXd& points,
                           const LofConfig& config) {
    const std::size_t n = static_cast<std::size_t>(points.rows());
    if (ids.size() != n) throw DimensionMismatch("ids and points disagree in length");
    const int k = config.n_neighbors;
    if (k < 1) throw ConfigError("n_neighbors must be positive");
    if (n < static_cast<std::size_t>(k) + 1) {
        throw TooFewPoints("LOF with k=" + std::to_string(k) + " needs at least " +
                           std::to_string(k + 1) + " points, got " + std::to_string(n));
    }

    // k-distance and k-distance neighborhood (ties included) per point.
    std::vector<double> kdist(n, 0.0);
    std::vector<std::vector<std::pair<std::size_t, double>>> neighbors(n);
    std::vector<std::pair<double, std::size_t>> dists;
    for (std::size_t i = 0; i < n; ++i) {
        dists.clear();
        dists.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dists.emplace_back((points.row(i) - points.row(j)).norm(), j);
        }
        std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        kdist[i] = dists[static_cast<std::size_t>(k - 1)].first;
        for (const auto& [d, j] : dists) {
            if (d <= kdist[i]) neighbors[i].emplace_back(j, d);
        }
    }

    // local reachability density; duplicates (k-distance 0) become infinite
    std::vector<double> lrd(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double reach_sum = 0.0;
        for (const auto& [j, d] : neighbors[i]) {
            reach_sum += std::max(kdist[j], d);
        }
        lrd[i] = reach_sum == 0.0 ? std::numeric_limits<double>::infinity()
                                  : static_cast<double>(neighbors[i].size()) / reach_sum;
    }

    std::vector<double> lof(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        double ratio_sum = 0.0;
        for (const auto& [j, d] : neighbors[i]) {
            (void)d;
            if (std::isinf(lrd[j]) && std::isinf(lrd[i])) {
                ratio_sum += 1.0;
            } else {
                ratio_sum += lrd[j] / lrd[i];
            }
        }
        lof[i] = ratio_sum / static_cast<double>(neighbors[i].size());
        // A finite point sitting next to >= k exact duplicates has an infinite
        // density ratio; store it as the largest finite double so score files
        // stay valid JSON while the ranking is unchanged.
        if (std::isinf(lof[i])) lof[i] = std::numeric_limits<double>::max();
    }

    AnomalyScoreSet out;
    out.detector = "lof";
    for (std::size_t i = 0; i < n; ++i) out.scores[ids[i]] = lof[i];
    out.flagged = flag_worst(ids, lof, contamination_count(config.contamination, n));
    if (!out.flagged.empty()) {
        out.threshold = std::numeric_limits<double>::infinity();
        for (const std::string& id : out.flagged) {
            out.threshold = std::min(out.threshold, out.scores.at(id));
        }
    }
    return out;
}

// --- Isolation Forest ---

namespace {

struct IsoNode {
    int feature = -1;
    double cutoff = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t size = 0;  // leaf population
};

struct IsoTree {
    std::vector<IsoNode> nodes;

    double path_length(const Eigen::VectorXd& x) const {
        std::int32_t at = 0;
        double depth = 0.0;
        while (true) {
            const IsoNode& node = nodes[static_cast<std::size_t>(at)];
            if (node.feature < 0) {
                return depth + expected_path_length(static_cast<std::size_t>(node.size));
            }
            at = x[node.feature] < node.cutoff ? node.left : node.right;
            depth += 1.0;
        }
    }
};

class IsoTreeBuilder {
public:
    IsoTreeBuilder(const Eigen::MatrixXd& points, int depth_limit, std::mt19937_64& rng)
        : points_(points), depth_limit_(depth_limit), rng_(rng) {}

    IsoTree build(std::vector<std::int32_t> sample) {
        tree_.nodes.clear();
        grow(std::move(sample), 0);
        return std::move(tree_);
    }

private:
    std::int32_t grow(std::vector<std::int32_t> idx, int depth) {
        std::int32_t me = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        if (idx.size() <= 1 || depth >= depth_limit_) {
            tree_.nodes[static_cast<std::size_t>(me)].size =
                static_cast<std::int32_t>(idx.size());
            return me;
        }

        // candidate features: non-constant over this node's points
        candidates_.clear();
        for (int f = 0; f < points_.cols(); ++f) {
            double lo = points_(idx[0], f), hi = lo;
            for (std::int32_t i : idx) {
                lo = std::min(lo, points_(i, f));
                hi = std::max(hi, points_(i, f));
            }
            if (hi > lo) candidates_.push_back({f, lo, hi});
        }
        if (candidates_.empty()) {
            tree_.nodes[static_cast<std::size_t>(me)].size =
                static_cast<std::int32_t>(idx.size());
            return me;
        }

        auto [feature, lo, hi] =
            candidates_[std::uniform_int_distribution<std::size_t>(0, candidates_.size() - 1)(rng_)];
        double cutoff = lo;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int attempt = 0; attempt < 16 && cutoff <= lo; ++attempt) {
            cutoff = lo + unit(rng_) * (hi - lo);
        }
        if (cutoff <= lo) cutoff = hi;  // still splits the max off the min

        std::vector<std::int32_t> left, right;
        for (std::int32_t i : idx) {
            (points_(i, feature) < cutoff ? left : right).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        std::int32_t l = grow(std::move(left), depth + 1);
        std::int32_t r = grow(std::move(right), depth + 1);
        IsoNode& node = tree_.nodes[static_cast<std::size_t>(me)];
        node.feature = feature;
        node.cutoff = cutoff;
        node.left = l;
        node.right = r;
        return me;
    }

    struct Candidate {
        int feature;
        double lo, hi;
    };
    const Eigen::MatrixXd& points_;
    int depth_limit_;
    std::mt19937_64& rng_;
    IsoTree tree_;
    std::vector<Candidate> candidates_;
};

}  // namespace

AnomalyScoreSet iforest_fit_score(const std::vector<std::string>& ids,
                                  const Eigen::MatrixXd& points, const IForestConfig& config) {
    const std::size_t n = static_cast<std::size_t>(points.rows());
    if (ids.size() != n) throw DimensionMismatch("ids and points disagree in length");
    if (n < 2) throw DegenerateData("isolation forest needs at least 2 points");
    if (config.n_estimators < 1 || config.subsample_size < 2) {
        throw ConfigError("n_estimators must be >= 1 and subsample_size >= 2");
    }

    bool any_split = false;
    for (int f = 0; f < points.cols() && !any_split; ++f) {
        any_split = (points.col(f).maxCoeff() > points.col(f).minCoeff());
    }
    if (!any_split) throw DegenerateData("all points are identical");

    const std::size_t psi = std::min<std::size_t>(static_cast<std::size_t>(config.subsample_size), n);
    const int depth_limit =
        static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(2, psi)))));

    std::vector<IsoTree> forest;
    forest.reserve(static_cast<std::size_t>(config.n_estimators));
    std::vector<std::int32_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    for (int t = 0; t < config.n_estimators; ++t) {
        std::mt19937_64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(t)));
        // partial Fisher-Yates: sample psi indices without replacement
        std::vector<std::int32_t> pool = all;
        std::vector<std::int32_t> sample;
        sample.reserve(psi);
        for (std::size_t i = 0; i < psi; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
            std::swap(pool[i], pool[pick(rng)]);
            sample.push_back(pool[i]);
        }
        IsoTreeBuilder builder(points, depth_limit, rng);
        forest.push_back(builder.build(std::move(sample)));
    }

    const double norm = expected_path_length(psi);
    std::vector<double> score(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (const IsoTree& tree : forest) {
            total += tree.path_length(points.row(i));
        }
        double avg_depth = total / static_cast<double>(forest.size());
        double normality = avg_depth / norm;
        score[i] = std::pow(2.0, -normality);
    }

    AnomalyScoreSet out;
    out.detector = "iforest";
    for (std::size_t i = 0; i < n; ++i) out.scores[ids[i]] = score[i];
    std::size_t flag_count = contamination_count(config.contamination, n);
    out.flagged = flag_worst(ids, score, flag_count);  // highest score = lowest normality
    if (!out.flagged.empty()) {
        out.threshold = std::numeric_limits<double>::infinity();
        for (const std::string& id : out.flagged) {
            out.threshold = std::min(out.threshold, out.scores.at(id));
        }
    }
    return out;
}

// --- Autoencoder ---

int autoencoder_hidden_width(int input_width, double compression_rate) {
    int width = static_cast<int>(
        std::ceil(compression_rate * static_cast<double>(input_width) - 1e-12));
    return std::max(1, width);
}

namespace {

Eigen::MatrixXd densify_batch(const std::vector<SparseVector>& vectors,
                              const std::vector<std::size_t>& order, std::size_t begin,
                              std::size_t end, int dim) {
    Eigen::MatrixXd batch = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(end - begin));
    for (std::size_t b = begin; b < end; ++b) {
        const SparseVector& v = vectors[order[b]];
        for (const auto& [idx, value] : v.pairs) {
            batch(idx, static_cast<Eigen::Index>(b - begin)) = value;
        }
    }
    return batch;
}

AutoencoderModel init_model(int input_width, const AutoencoderConfig& config) {
    int hidden = autoencoder_hidden_width(input_width, config.compression_rate);
    AutoencoderModel model;
    model.config = config;
    std::mt19937_64 rng(config.seed);
    auto xavier = [&rng](Eigen::MatrixXd& w, int fan_in, int fan_out) {
        double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
        }
    };
    model.w1.resize(hidden, input_width);
    model.w2.resize(input_width, hidden);
    xavier(model.w1, input_width, hidden);
    xavier(model.w2, hidden, input_width);
    model.b1 = Eigen::VectorXd::Zero(hidden);
    model.b2 = Eigen::VectorXd::Zero(input_width);
    return model;
}

// Mean over the batch of 0.5 * ||reconstruction - input||^2.
double batch_loss(const AutoencoderModel& model, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd h =
        ((model.w1 * x).colwise() + model.b1).cwiseMax(0.0);
    Eigen::MatrixXd y = (model.w2 * h).colwise() + model.b2;
    return 0.5 * (y - x).squaredNorm() / static_cast<double>(x.cols());
}

template <typename BatchFn>
AutoencoderModel train_impl(std::size_t count, int dim, BatchFn make_batch,
                            const AutoencoderConfig& config) {
    if (count == 0) throw EmptyCorpus("autoencoder_train needs a non-empty corpus");
    if (config.epochs < 1 || config.minibatch < 1) {
        throw ConfigError("epochs and minibatch must be positive");
    }
    AutoencoderModel model = init_model(dim, config);

    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(mix_seed(config.seed, 0x5e55));

    const std::size_t bs = static_cast<std::size_t>(config.minibatch);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t begin = 0; begin < count; begin += bs) {
            std::size_t end = std::min(count, begin + bs);
            Eigen::MatrixXd x = make_batch(order, begin, end);
            const double inv_b = 1.0 / static_cast<double>(x.cols());

            Eigen::MatrixXd z1 = (model.w1 * x).colwise() + model.b1;
            Eigen::MatrixXd h = z1.cwiseMax(0.0);
            Eigen::MatrixXd y = (model.w2 * h).colwise() + model.b2;
            Eigen::MatrixXd dy = (y - x) * inv_b;

            double loss = 0.5 * (y - x).squaredNorm() * inv_b;
            if (!std::isfinite(loss)) {
                throw NonFiniteLoss("training diverged at epoch " + std::to_string(epoch + 1) +
                                    " (loss is not finite); lower the learning rate");
            }

            Eigen::MatrixXd gw2 = dy * h.transpose();
            Eigen::VectorXd gb2 = dy.rowwise().sum();
            Eigen::MatrixXd dh = model.w2.transpose() * dy;
            Eigen::MatrixXd dz1 = (z1.array() > 0.0).cast<double>().array() * dh.array();
            Eigen::MatrixXd gw1 = dz1 * x.transpose();
            Eigen::VectorXd gb1 = dz1.rowwise().sum();

            model.w2 -= config.learning_rate * gw2;
            model.b2 -= config.learning_rate * gb2;
            model.w1 -= config.learning_rate * gw1;
            model.b1 -= config.learning_rate * gb1;
        }

        // full-corpus loss after this epoch
        std::vector<std::size_t> plain(count);
        std::iota(plain.begin(), plain.end(), 0);
        double total = 0.0;
        for (std::size_t begin = 0; begin < count; begin += bs) {
            std::size_t end = std::min(count, begin + bs);
            Eigen::MatrixXd x = make_batch(plain, begin, end);
            total += batch_loss(model, x) * static_cast<double>(end - begin);
        }
        double epoch_loss = total / static_cast<double>(count);
        if (!std::isfinite(epoch_loss)) {
            throw NonFiniteLoss("training diverged after epoch " + std::to_string(epoch + 1));
        }
        model.epoch_losses.push_back(epoch_loss);
    }
    return model;
}

}  // namespace

AutoencoderModel autoencoder_train(const std::vector<SparseVector>& vectors,
                                   const AutoencoderConfig& config) {
    if (vectors.empty()) throw EmptyCorpus("autoencoder_train needs a non-empty corpus");
    int dim = static_cast<int>(vectors.front().dimension);
    for (const SparseVector& v : vectors) {
        if (static_cast<int>(v.dimension) != dim) {
            throw DimensionMismatch("sparse vectors disagree in dimension");
        }
    }
    return train_impl(
        vectors.size(), dim,
        [&](const std::vector<std::size_t>& order, std::size_t b, std::size_t e) {
            return densify_batch(vectors, order, b, e, dim);
        },
        config);
}

AutoencoderModel autoencoder_train(const Eigen::MatrixXd& rows, const AutoencoderConfig& config) {
    if (rows.rows() == 0) throw EmptyCorpus("autoencoder_train needs a non-empty corpus");
    return train_impl(
        static_cast<std::size_t>(rows.rows()), static_cast<int>(rows.cols()),
        [&](const std::vector<std::size_t>& order, std::size_t b, std::size_t e) {
            Eigen::MatrixXd batch(rows.cols(), static_cast<Eigen::Index>(e - b));
            for (std::size_t i = b; i < e; ++i) {
                batch.col(static_cast<Eigen::Index>(i - b)) =
                    rows.row(static_cast<Eigen::Index>(order[i])).transpose();
            }
            return batch;
        },
        config);
}

Eigen::VectorXd AutoencoderModel::reconstruct(const Eigen::VectorXd& x) const {
    Eigen::VectorXd h = ((w1 * x) + b1).cwiseMax(0.0);
    return (w2 * h) + b2;
}

double autoencoder_score(const AutoencoderModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.w1.cols()) {
        throw DimensionMismatch("vector has dimension " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(model.w1.cols()));
    }
    return (model.reconstruct(x) - x).norm();
}

double autoencoder_score(const AutoencoderModel& model, const SparseVector& v) {
    if (static_cast<Eigen::Index>(v.dimension) != model.w1.cols()) {
        throw DimensionMismatch("sparse vector has dimension " + std::to_string(v.dimension) +
                                ", model expects " + std::to_string(model.w1.cols()));
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(model.w1.cols());
    for (const auto& [idx, value] : v.pairs) x[idx] = value;
    return autoencoder_score(model, x);
}

AutoencoderGradients autoencoder_loss_gradients(const AutoencoderModel& model,
                                                const Eigen::MatrixXd& x) {
    const double inv_b = 1.0 / static_cast<double>(x.cols());
    Eigen::MatrixXd z1 = (model.w1 * x).colwise() + model.b1;
    Eigen::MatrixXd h = z1.cwiseMax(0.0);
    Eigen::MatrixXd y = (model.w2 * h).colwise() + model.b2;
    Eigen::MatrixXd dy = (y - x) * inv_b;

    AutoencoderGradients g;
    g.loss = 0.5 * (y - x).squaredNorm() * inv_b;
    g.w2 = dy * h.transpose();
    g.b2 = dy.rowwise().sum();
    Eigen::MatrixXd dh = model.w2.transpose() * dy;
    Eigen::MatrixXd dz1 = (z1.array() > 0.0).cast<double>().array() * dh.array();
    g.w1 = dz1 * x.transpose();
    g.b1 = dz1.rowwise().sum();
    return g;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    Eigen::MatrixXd m(j.size(), j.empty() ? 0 : j[0].size());
    for (std::size_t r = 0; r < j.size(); ++r) {
        for (std::size_t c = 0; c < j[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

}  // namespace

json AutoencoderModel::to_json() const {
    // The architecture choices ride along in the artifact.
    return {{"record", "autoencoder"},
            {"version", 1},
            {"architecture",
             {{"hidden_layers", 1},
              {"hidden_activation", "relu"},
              {"output_activation", "linear"},
              {"loss", "mse"},
              {"optimizer", "sgd"},
              {"init", "xavier-uniform"}}},
            {"config",
             {{"compression_rate", config.compression_rate},
              {"epochs", config.epochs},
              {"minibatch", config.minibatch},
              {"learning_rate", config.learning_rate},
              {"seed", config.seed}}},
            {"w1", matrix_to_json(w1)},
            {"b1", matrix_to_json(b1)},
            {"w2", matrix_to_json(w2)},
            {"b2", matrix_to_json(b2)},
            {"epoch_losses", epoch_losses}};
}

AutoencoderModel AutoencoderModel::from_json(const json& j) {
    AutoencoderModel m;
    const json& c = j.at("config");
    m.config.compression_rate = c.at("compression_rate").get<double>();
    m.config.epochs = c.at("epochs").get<int>();
    m.config.minibatch = c.at("minibatch").get<int>();
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.w1 = matrix_from_json(j.at("w1"));
    m.w2 = matrix_from_json(j.at("w2"));
    m.b1 = matrix_from_json(j.at("b1")).col(0);
    m.b2 = matrix_from_json(j.at("b2")).col(0);
    m.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();
    return m;
}

// --- thresholds and the compiler-induced rule ---

RmsThresholdResult rms_threshold(const std::map<std::string, double>& scores, double multiplier) {
    if (scores.empty()) throw Error("rms_threshold needs a non-empty score set");
    double sum_sq = 0.0;
    for (const auto& [id, s] : scores) {
        (void)id;
        sum_sq += s * s;
    }
    RmsThresholdResult out;
    out.threshold = multiplier * std::sqrt(sum_sq / static_cast<double>(scores.size()));
    for (const auto& [id, s] : scores) {
        if (s > out.threshold) out.flagged.push_back(id);
    }
    return out;  // map iteration keeps flagged sorted by unit_id
}

CompilerInducedResult compiler_induced_detect(
    const std::map<std::string, double>& tree_scores,
    const std::map<std::string, double>& bytecode_scores,
    const std::map<std::string, std::vector<std::string>>& links, double delta) {
    CompilerInducedResult result;

    double tree_max = 0.0;
    for (const auto& [id, s] : tree_scores) {
        (void)id;
        tree_max = std::max(tree_max, s);
    }
    double bc_max = 0.0;
    for (const auto& [id, s] : bytecode_scores) {
        (void)id;
        bc_max = std::max(bc_max, s);
    }

    for (const auto& [class_id, fn_ids] : links) {
        auto bc_it = bytecode_scores.find(class_id);
        if (bc_it == bytecode_scores.end()) continue;

        // A class's tree-side score is the worst of its linked functions.
        bool any = false;
        double tree_side = 0.0;
        for (const std::string& fn : fn_ids) {
            auto it = tree_scores.find(fn);
            if (it != tree_scores.end()) {
                any = true;
                tree_side = std::max(tree_side, it->second);
            }
        }
        if (!any) continue;
        ++result.compared_pairs;

        double s_tree = tree_max > 0.0 ? tree_side / tree_max : 0.0;
        double s_bc = bc_max > 0.0 ? bc_it->second / bc_max : 0.0;
        if (std::abs(s_tree - s_bc) > delta) {
            AnomalyRecord record;
            record.unit_id = class_id;
            record.kind = AnomalyKind::CompilerInduced;
            record.direction = s_bc > s_tree ? Direction::BytecodeLoud : Direction::SourceLoud;
            record.detectors.push_back({"autoencoder-tree", s_tree, delta});
            record.detectors.push_back({"autoencoder-bytecode", s_bc, delta});
            result.records.push_back(std::move(record));
        }
    }
    return result;
}

}  // namespace astray
