#include "slicesim/learn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

#include "slicesim/error.hpp"
#include "slicesim/rng.hpp"

namespace slicesim {

const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::DecisionTree: return "DecisionTree";
        case Algorithm::RandomForest: return "RandomForest";
        case Algorithm::ExtraTrees: return "ExtraTrees";
        case Algorithm::Knn: return "Knn";
        case Algorithm::RidgeClassifier: return "RidgeClassifier";
        case Algorithm::Qda: return "Qda";
        case Algorithm::SoftmaxRegression: return "SoftmaxRegression";
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
    for (Algorithm a : {Algorithm::DecisionTree, Algorithm::RandomForest, Algorithm::ExtraTrees,
                        Algorithm::Knn, Algorithm::RidgeClassifier, Algorithm::Qda,
                        Algorithm::SoftmaxRegression}) {
        if (s == to_string(a)) return a;
    }
    throw Error(ErrorCode::ParseError, "unknown algorithm '" + s + "'");
}

namespace {

int infer_class_count(const std::vector<int>& y) {
    int c = 0;
    for (int v : y) {
        if (v < 0) throw Error(ErrorCode::InvalidConfig, "labels must be non-negative");
        c = std::max(c, v + 1);
    }
    return c;
}

std::vector<int> class_counts(const std::vector<int>& y, int n_classes) {
    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    for (int v : y) ++counts[static_cast<std::size_t>(v)];
    return counts;
}

int majority_label(const std::vector<int>& counts) {
    int best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    }
    return best;
}

double gini_impurity(const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    for (int c : counts) {
        const double p = static_cast<double>(c) / total;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

// ---------------------------------------------------------------------------
// CART trees

struct TreeNode {
    bool leaf = true;
    int label = 0;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
};

struct TreeOptions {
    int max_depth = 16;
    int min_samples_leaf = 1;
    int max_features = 0;    // 0 = all features, in index order
    bool random_thresholds = false;
};

class DecisionTreeModel {
public:
    void fit(const Eigen::MatrixXd& X, const std::vector<int>& y, const std::vector<int>& rows,
             int n_classes, const TreeOptions& opts, Rng& rng) {
        n_classes_ = n_classes;
        nodes_.clear();
        build(X, y, rows, 0, opts, rng);
    }

    int predict_row(const Eigen::MatrixXd& X, Eigen::Index row) const {
        int node = 0;
        while (!nodes_[static_cast<std::size_t>(node)].leaf) {
            const auto& nd = nodes_[static_cast<std::size_t>(node)];
            node = X(row, nd.feature) < nd.threshold ? nd.left : nd.right;
        }
        return nodes_[static_cast<std::size_t>(node)].label;
    }

private:
    struct Split {
        bool found = false;
        int feature = -1;
        double threshold = 0.0;
        double impurity = std::numeric_limits<double>::infinity();
    };

    Split best_split(const Eigen::MatrixXd& X, const std::vector<int>& y,
                     const std::vector<int>& rows, const TreeOptions& opts, Rng& rng) const {
        const int d = static_cast<int>(X.cols());
        std::vector<int> features(static_cast<std::size_t>(d));
        std::iota(features.begin(), features.end(), 0);
        if (opts.max_features > 0 && opts.max_features < d) {
            // seeded partial Fisher-Yates, then sort so tie-breaking stays
            // by feature index among the sampled candidates
            for (int i = 0; i < opts.max_features; ++i) {
                const auto j = static_cast<std::size_t>(i + static_cast<int>(rng.below(
                                                                static_cast<std::uint64_t>(d - i))));
                std::swap(features[static_cast<std::size_t>(i)], features[j]);
            }
            features.resize(static_cast<std::size_t>(opts.max_features));
            std::sort(features.begin(), features.end());
        }

        Split best;
        const int total = static_cast<int>(rows.size());
        std::vector<std::pair<double, int>> values(rows.size());

        for (int f : features) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                values[i] = {X(rows[i], f), y[static_cast<std::size_t>(rows[i])]};
            }
            std::sort(values.begin(), values.end());
            if (values.front().first == values.back().first) continue;

            if (opts.random_thresholds) {
                const double lo = values.front().first;
                const double hi = values.back().first;
                const double thr = rng.uniform(lo, hi);
                evaluate_threshold(values, thr, total, f, best);
            } else {
                std::vector<int> left_counts(static_cast<std::size_t>(n_classes_), 0);
                std::vector<int> right_counts = count_all(values);
                int left_total = 0;
                for (std::size_t i = 0; i + 1 < values.size(); ++i) {
                    ++left_counts[static_cast<std::size_t>(values[i].second)];
                    --right_counts[static_cast<std::size_t>(values[i].second)];
                    ++left_total;
                    if (values[i].first == values[i + 1].first) continue;
                    const int right_total = total - left_total;
                    if (left_total < 1 || right_total < 1) continue;
                    const double impurity =
                        (left_total * gini_impurity(left_counts, left_total) +
                         right_total * gini_impurity(right_counts, right_total)) /
                        total;
                    if (impurity + 1e-12 < best.impurity) {
                        best.found = true;
                        best.impurity = impurity;
                        best.feature = f;
                        best.threshold =
                            0.5 * (values[i].first + values[i + 1].first);
                    }
                }
            }
        }
        return best;
    }

    std::vector<int> count_all(const std::vector<std::pair<double, int>>& values) const {
        std::vector<int> counts(static_cast<std::size_t>(n_classes_), 0);
        for (const auto& [v, label] : values) ++counts[static_cast<std::size_t>(label)];
        return counts;
    }

    void evaluate_threshold(const std::vector<std::pair<double, int>>& values, double thr,
                            int total, int feature, Split& best) const {
        std::vector<int> left_counts(static_cast<std::size_t>(n_classes_), 0);
        std::vector<int> right_counts(static_cast<std::size_t>(n_classes_), 0);
        int left_total = 0;
        for (const auto& [v, label] : values) {
            if (v < thr) {
                ++left_counts[static_cast<std::size_t>(label)];
                ++left_total;
            } else {
                ++right_counts[static_cast<std::size_t>(label)];
            }
        }
        const int right_total = total - left_total;
        if (left_total < 1 || right_total < 1) return;
        const double impurity = (left_total * gini_impurity(left_counts, left_total) +
                                 right_total * gini_impurity(right_counts, right_total)) /
                                total;
        if (impurity + 1e-12 < best.impurity) {
            best.found = true;
            best.impurity = impurity;
            best.feature = feature;
            best.threshold = thr;
        }
    }

    int build(const Eigen::MatrixXd& X, const std::vector<int>& y, const std::vector<int>& rows,
              int depth, const TreeOptions& opts, Rng& rng) {
        const int index = static_cast<int>(nodes_.size());
        nodes_.emplace_back();

        std::vector<int> counts(static_cast<std::size_t>(n_classes_), 0);
        for (int r : rows) ++counts[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])];
        nodes_[static_cast<std::size_t>(index)].label = majority_label(counts);

        const bool pure = gini_impurity(counts, static_cast<int>(rows.size())) == 0.0;
        if (pure || depth >= opts.max_depth ||
            static_cast<int>(rows.size()) < 2 * opts.min_samples_leaf) {
            return index;
        }

        Split split = best_split(X, y, rows, opts, rng);
        if (!split.found) return index;

        std::vector<int> left_rows, right_rows;
        for (int r : rows) {
            (X(r, split.feature) < split.threshold ? left_rows : right_rows).push_back(r);
        }
        if (static_cast<int>(left_rows.size()) < opts.min_samples_leaf ||
            static_cast<int>(right_rows.size()) < opts.min_samples_leaf) {
            return index;
        }

        nodes_[static_cast<std::size_t>(index)].leaf = false;
        nodes_[static_cast<std::size_t>(index)].feature = split.feature;
        nodes_[static_cast<std::size_t>(index)].threshold = split.threshold;
        const int left = build(X, y, left_rows, depth + 1, opts, rng);
        nodes_[static_cast<std::size_t>(index)].left = left;
        const int right = build(X, y, right_rows, depth + 1, opts, rng);
        nodes_[static_cast<std::size_t>(index)].right = right;
        return index;
    }

    std::vector<TreeNode> nodes_;
    int n_classes_ = 0;
};

} // namespace

// ---------------------------------------------------------------------------
// SoftmaxModel

SoftmaxModel SoftmaxModel::zeros(int d, int n_classes) {
    SoftmaxModel m;
    m.weights = Eigen::MatrixXd::Zero(d, n_classes);
    m.bias = Eigen::VectorXd::Zero(n_classes);
    return m;
}

Eigen::MatrixXd SoftmaxModel::probabilities(const Eigen::MatrixXd& X) const {
    if (X.cols() != weights.rows()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "matrix has " + std::to_string(X.cols()) + " columns, model expects " +
                        std::to_string(weights.rows()));
    }
    Eigen::MatrixXd logits = (X * weights).rowwise() + bias.transpose();
    Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
    logits.colwise() -= row_max;
    Eigen::MatrixXd exp = logits.array().exp();
    Eigen::VectorXd norm = exp.rowwise().sum();
    exp.array().colwise() /= norm.array();
    return exp;
}

std::vector<int> SoftmaxModel::predict(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd probs = probabilities(X);
    std::vector<int> out(static_cast<std::size_t>(X.rows()), 0);
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        int best = 0;
        for (Eigen::Index c = 1; c < probs.cols(); ++c) {
            if (probs(i, c) > probs(i, best)) best = static_cast<int>(c);
        }
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

double SoftmaxModel::cross_entropy(const Eigen::MatrixXd& X, const std::vector<int>& y) const {
    Eigen::MatrixXd probs = probabilities(X);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        loss -= std::log(std::max(probs(i, y[static_cast<std::size_t>(i)]), 1e-300));
    }
    return loss / static_cast<double>(std::max<Eigen::Index>(1, probs.rows()));
}

void softmax_train_epoch(SoftmaxModel& model, const Eigen::MatrixXd& X, const std::vector<int>& y,
                         const SoftmaxOpts& opts, std::uint64_t seed_base, int global_epoch) {
    const Eigen::Index n = X.rows();
    const auto C = static_cast<int>(model.weights.cols());
    Rng rng(derive_seed(seed_base, "epoch", static_cast<std::uint64_t>(global_epoch)));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    const int batch = std::max(1, opts.batch_size);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch));
        const auto m = static_cast<double>(end - start);
        Eigen::MatrixXd Xb(static_cast<Eigen::Index>(end - start), X.cols());
        std::vector<int> yb(end - start);
        for (std::size_t i = start; i < end; ++i) {
            Xb.row(static_cast<Eigen::Index>(i - start)) = X.row(order[i]);
            yb[i - start] = y[static_cast<std::size_t>(order[i])];
        }
        Eigen::MatrixXd probs = model.probabilities(Xb);
        for (std::size_t i = 0; i < yb.size(); ++i) {
            probs(static_cast<Eigen::Index>(i), yb[i]) -= 1.0;
        }
        probs /= m;
        model.weights -= opts.learning_rate * (Xb.transpose() * probs);
        model.bias -= opts.learning_rate * probs.colwise().sum().transpose();
        (void)C;
    }
}

void softmax_train(SoftmaxModel& model, const Eigen::MatrixXd& X, const std::vector<int>& y,
                   const SoftmaxOpts& opts, std::uint64_t seed_base, int first_epoch, int epochs) {
    for (int e = 0; e < epochs; ++e) {
        softmax_train_epoch(model, X, y, opts, seed_base, first_epoch + e);
    }
}

// ---------------------------------------------------------------------------
// Classifier

struct Classifier::Impl {
    bool fitted = false;
    int n_classes = 0;
    Eigen::Index d = 0;

    // trees / forests
    std::vector<DecisionTreeModel> trees;

    // knn
    Eigen::MatrixXd train_X;
    std::vector<int> train_y;

    // ridge
    Eigen::MatrixXd ridge_W;  // d x C

    // qda
    std::vector<Eigen::VectorXd> qda_means;
    std::vector<Eigen::LDLT<Eigen::MatrixXd>> qda_solvers;
    std::vector<double> qda_log_det;
    std::vector<double> qda_log_prior;

    // softmax
    SoftmaxModel softmax;
};

Classifier::Classifier(Algorithm algorithm, Hyperparams hyperparams)
    : algorithm_(algorithm), hyperparams_(hyperparams), impl_(std::make_unique<Impl>()) {}

Classifier::Classifier(Classifier&&) noexcept = default;
Classifier& Classifier::operator=(Classifier&&) noexcept = default;
Classifier::~Classifier() = default;

bool Classifier::fitted() const { return impl_->fitted; }

void Classifier::fit(const Eigen::MatrixXd& X, const std::vector<int>& y, std::uint64_t seed) {
    if (X.rows() != static_cast<Eigen::Index>(y.size())) {
        throw Error(ErrorCode::DimensionMismatch, "row count != label count");
    }
    if (X.rows() == 0) throw Error(ErrorCode::EmptyDataset, "cannot fit on empty data");

    impl_ = std::make_unique<Impl>();
    Impl& im = *impl_;
    im.n_classes = infer_class_count(y);
    im.d = X.cols();
    const auto counts = class_counts(y, im.n_classes);

    switch (algorithm_) {
        case Algorithm::DecisionTree: {
            TreeOptions opts{hyperparams_.max_depth, hyperparams_.min_samples_leaf, 0, false};
            std::vector<int> rows(static_cast<std::size_t>(X.rows()));
            std::iota(rows.begin(), rows.end(), 0);
            Rng rng(derive_seed(seed, "tree", 0));
            im.trees.resize(1);
            im.trees[0].fit(X, y, rows, im.n_classes, opts, rng);
            break;
        }
        case Algorithm::RandomForest:
        case Algorithm::ExtraTrees: {
            const int d = static_cast<int>(X.cols());
            int max_features = hyperparams_.max_features;
            if (max_features <= 0) {
                max_features = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
            }
            max_features = std::min(max_features, d);
            TreeOptions opts{hyperparams_.max_depth, hyperparams_.min_samples_leaf, max_features,
                             algorithm_ == Algorithm::ExtraTrees};
            if (max_features == d) opts.max_features = 0;
            im.trees.resize(static_cast<std::size_t>(std::max(1, hyperparams_.n_trees)));
            for (std::size_t t = 0; t < im.trees.size(); ++t) {
                Rng rng(derive_seed(seed, "tree", t));
                std::vector<int> rows(static_cast<std::size_t>(X.rows()));
                if (hyperparams_.bootstrap) {
                    for (auto& r : rows) {
                        r = static_cast<int>(rng.below(static_cast<std::uint64_t>(X.rows())));
                    }
                } else {
                    std::iota(rows.begin(), rows.end(), 0);
                }
                im.trees[t].fit(X, y, rows, im.n_classes, opts, rng);
            }
            break;
        }
        case Algorithm::Knn: {
            im.train_X = X;
            im.train_y = y;
            break;
        }
        case Algorithm::RidgeClassifier: {
            Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(X.rows(), im.n_classes);
            for (Eigen::Index i = 0; i < X.rows(); ++i) {
                Y(i, y[static_cast<std::size_t>(i)]) = 1.0;
            }
            Eigen::MatrixXd gram = X.transpose() * X;
            gram.diagonal().array() += hyperparams_.ridge_lambda;
            im.ridge_W = gram.ldlt().solve(X.transpose() * Y);
            break;
        }
        case Algorithm::Qda: {
            for (int c = 0; c < im.n_classes; ++c) {
                if (counts[static_cast<std::size_t>(c)] == 0) {
                    throw Error(ErrorCode::ClassMissing, "class " + std::to_string(c));
                }
            }
            const auto n = static_cast<double>(X.rows());
            for (int c = 0; c < im.n_classes; ++c) {
                const int nc = counts[static_cast<std::size_t>(c)];
                Eigen::MatrixXd Xc(nc, X.cols());
                int row = 0;
                for (Eigen::Index i = 0; i < X.rows(); ++i) {
                    if (y[static_cast<std::size_t>(i)] == c) Xc.row(row++) = X.row(i);
                }
                Eigen::VectorXd mu = Xc.colwise().mean();
                Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(X.cols(), X.cols());
                if (nc > 1) {
                    Eigen::MatrixXd centered = Xc.rowwise() - mu.transpose();
                    cov = centered.transpose() * centered / static_cast<double>(nc - 1);
                }
                cov.diagonal().array() += hyperparams_.qda_shrinkage;

                Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
                double log_det = 0.0;
                bool singular = ldlt.info() != Eigen::Success;
                if (!singular) {
                    for (Eigen::Index i = 0; i < X.cols(); ++i) {
                        const double dv = ldlt.vectorD()(i);
                        if (dv <= 0.0) {
                            singular = true;
                            break;
                        }
                        log_det += std::log(dv);
                    }
                }
                if (singular) {
                    throw Error(ErrorCode::SingularCovariance,
                                "class " + std::to_string(c) + " (shrinkage " +
                                    std::to_string(hyperparams_.qda_shrinkage) + ")");
                }
                im.qda_means.push_back(std::move(mu));
                im.qda_solvers.push_back(std::move(ldlt));
                im.qda_log_det.push_back(log_det);
                im.qda_log_prior.push_back(std::log(static_cast<double>(nc) / n));
            }
            break;
        }
        case Algorithm::SoftmaxRegression: {
            for (int c = 0; c < im.n_classes; ++c) {
                if (counts[static_cast<std::size_t>(c)] == 0) {
                    throw Error(ErrorCode::ClassMissing, "class " + std::to_string(c));
                }
            }
            im.softmax = SoftmaxModel::zeros(static_cast<int>(X.cols()), im.n_classes);
            SoftmaxOpts opts{hyperparams_.softmax_lr, hyperparams_.softmax_batch};
            softmax_train(im.softmax, X, y, opts, seed, 0, hyperparams_.softmax_epochs);
            break;
        }
    }
    im.fitted = true;
}

std::vector<int> Classifier::predict(const Eigen::MatrixXd& X) const {
    const Impl& im = *impl_;
    if (!im.fitted) throw Error(ErrorCode::NotFitted, to_string(algorithm_));
    if (X.cols() != im.d) {
        throw Error(ErrorCode::DimensionMismatch,
                    "matrix has " + std::to_string(X.cols()) + " columns, model expects " +
                        std::to_string(im.d));
    }
    std::vector<int> out(static_cast<std::size_t>(X.rows()), 0);
    if (X.rows() == 0) return out;

    switch (algorithm_) {
        case Algorithm::DecisionTree:
        case Algorithm::RandomForest:
        case Algorithm::ExtraTrees: {
            std::vector<int> votes(static_cast<std::size_t>(im.n_classes));
            for (Eigen::Index i = 0; i < X.rows(); ++i) {
                std::fill(votes.begin(), votes.end(), 0);
                for (const auto& tree : im.trees) {
                    ++votes[static_cast<std::size_t>(tree.predict_row(X, i))];
                }
                out[static_cast<std::size_t>(i)] = majority_label(votes);
            }
            break;
        }
        case Algorithm::Knn: {
            const int k = std::min<int>(hyperparams_.knn_k, static_cast<int>(im.train_X.rows()));
            std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(im.train_X.rows()));
            std::vector<int> votes(static_cast<std::size_t>(im.n_classes));
            for (Eigen::Index i = 0; i < X.rows(); ++i) {
                for (Eigen::Index t = 0; t < im.train_X.rows(); ++t) {
                    dist[static_cast<std::size_t>(t)] = {
                        (X.row(i) - im.train_X.row(t)).squaredNorm(), static_cast<int>(t)};
                }
                std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
                std::fill(votes.begin(), votes.end(), 0);
                for (int j = 0; j < k; ++j) {
                    ++votes[static_cast<std::size_t>(
                        im.train_y[static_cast<std::size_t>(dist[static_cast<std::size_t>(j)]
                                                                .second)])];
                }
                out[static_cast<std::size_t>(i)] = majority_label(votes);
            }
            break;
        }
        case Algorithm::RidgeClassifier: {
            Eigen::MatrixXd scores = X * im.ridge_W;
            for (Eigen::Index i = 0; i < scores.rows(); ++i) {
                int best = 0;
                for (Eigen::Index c = 1; c < scores.cols(); ++c) {
                    if (scores(i, c) > scores(i, best)) best = static_cast<int>(c);
                }
                out[static_cast<std::size_t>(i)] = best;
            }
            break;
        }
        case Algorithm::Qda: {
            for (Eigen::Index i = 0; i < X.rows(); ++i) {
                int best = 0;
                double best_score = -std::numeric_limits<double>::infinity();
                for (int c = 0; c < im.n_classes; ++c) {
                    const auto cs = static_cast<std::size_t>(c);
                    Eigen::VectorXd diff = X.row(i).transpose() - im.qda_means[cs];
                    const double maha = diff.dot(im.qda_solvers[cs].solve(diff));
                    const double score =
                        -0.5 * (im.qda_log_det[cs] + maha) + im.qda_log_prior[cs];
                    if (score > best_score) {
                        best_score = score;
                        best = c;
                    }
                }
                out[static_cast<std::size_t>(i)] = best;
            }
            break;
        }
        case Algorithm::SoftmaxRegression: {
            out = im.softmax.predict(X);
            break;
        }
    }
    return out;
}

Eigen::MatrixXd Classifier::predict_proba(const Eigen::MatrixXd& X) const {
    if (!impl_->fitted) throw Error(ErrorCode::NotFitted, to_string(algorithm_));
    if (algorithm_ != Algorithm::SoftmaxRegression) {
        throw Error(ErrorCode::InvalidConfig, "predict_proba is softmax-only");
    }
    return impl_->softmax.probabilities(X);
}

// ---------------------------------------------------------------------------
// Cross-validation

std::vector<Fold> stratified_kfold(const std::vector<int>& labels, const EvalConfig& config) {
    if (config.n_folds < 2) throw Error(ErrorCode::InvalidConfig, "n_folds must be >= 2");
    const int n = static_cast<int>(labels.size());
    if (n < config.n_folds) throw Error(ErrorCode::InvalidConfig, "fewer samples than folds");

    const int k = config.n_folds;
    std::vector<std::vector<int>> fold_members(static_cast<std::size_t>(k));

    if (config.stratified) {
        const int n_classes = infer_class_count(labels);
        int offset = 0;
        for (int c = 0; c < n_classes; ++c) {
            std::vector<int> members;
            for (int i = 0; i < n; ++i) {
                if (labels[static_cast<std::size_t>(i)] == c) members.push_back(i);
            }
            if (members.empty()) continue;
            if (static_cast<int>(members.size()) < k) {
                throw Error(ErrorCode::ClassTooSmall,
                            "class " + std::to_string(c) + " has " +
                                std::to_string(members.size()) + " < " + std::to_string(k) +
                                " members");
            }
            Rng rng(derive_seed(config.seed, "fold-class", static_cast<std::uint64_t>(c)));
            rng.shuffle(members);
            // deal round-robin; offsetting by the cumulative count spreads the
            // remainders across folds instead of stacking them on fold 0
            for (std::size_t i = 0; i < members.size(); ++i) {
                fold_members[static_cast<std::size_t>((offset + static_cast<int>(i)) % k)]
                    .push_back(members[i]);
            }
            offset = (offset + static_cast<int>(members.size())) % k;
        }
    } else {
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        Rng rng(derive_seed(config.seed, "fold-plain"));
        rng.shuffle(order);
        for (std::size_t i = 0; i < order.size(); ++i) {
            fold_members[i % static_cast<std::size_t>(k)].push_back(order[i]);
        }
    }

    std::vector<Fold> folds(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        auto& fold = folds[static_cast<std::size_t>(f)];
        fold.test_indices = fold_members[static_cast<std::size_t>(f)];
        std::sort(fold.test_indices.begin(), fold.test_indices.end());
        for (int g = 0; g < k; ++g) {
            if (g == f) continue;
            fold.train_indices.insert(fold.train_indices.end(),
                                      fold_members[static_cast<std::size_t>(g)].begin(),
                                      fold_members[static_cast<std::size_t>(g)].end());
        }
        std::sort(fold.train_indices.begin(), fold.train_indices.end());
    }
    return folds;
}

namespace detail {

FoldOutcome run_fold(Algorithm algorithm, const Hyperparams& hyperparams,
                     const Eigen::MatrixXd& raw_matrix, const std::vector<int>& labels,
                     const Fold& fold, std::uint64_t seed) {
    Eigen::MatrixXd train(static_cast<Eigen::Index>(fold.train_indices.size()),
                          raw_matrix.cols());
    std::vector<int> train_y(fold.train_indices.size());
    for (std::size_t i = 0; i < fold.train_indices.size(); ++i) {
        train.row(static_cast<Eigen::Index>(i)) = raw_matrix.row(fold.train_indices[i]);
        train_y[i] = labels[static_cast<std::size_t>(fold.train_indices[i])];
    }
    Eigen::MatrixXd test(static_cast<Eigen::Index>(fold.test_indices.size()), raw_matrix.cols());
    std::vector<int> test_y(fold.test_indices.size());
    for (std::size_t i = 0; i < fold.test_indices.size(); ++i) {
        test.row(static_cast<Eigen::Index>(i)) = raw_matrix.row(fold.test_indices[i]);
        test_y[i] = labels[static_cast<std::size_t>(fold.test_indices[i])];
    }

    FoldOutcome outcome;
    outcome.scaler = FeatureScaler::fit(train);  // train rows only, never test

    Classifier clf(algorithm, hyperparams);
    clf.fit(outcome.scaler.apply(train), train_y, seed);
    outcome.predictions = clf.predict(outcome.scaler.apply(test));

    int correct = 0;
    for (std::size_t i = 0; i < test_y.size(); ++i) {
        if (outcome.predictions[i] == test_y[i]) ++correct;
    }
    outcome.accuracy =
        test_y.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test_y.size());
    return outcome;
}

} // namespace detail

EvalReport evaluate(Algorithm algorithm, const Hyperparams& hyperparams,
                    const Eigen::MatrixXd& raw_matrix, const std::vector<int>& labels,
                    const EvalConfig& config) {
    const auto folds = stratified_kfold(labels, config);
    const int n_classes = infer_class_count(labels);

    EvalReport report;
    report.confusion = Eigen::MatrixXi::Zero(n_classes, n_classes);

    for (std::size_t f = 0; f < folds.size(); ++f) {
        auto outcome = detail::run_fold(algorithm, hyperparams, raw_matrix, labels, folds[f],
                                        derive_seed(config.seed, "fold-fit", f));
        report.per_fold_accuracy.push_back(outcome.accuracy);
        for (std::size_t i = 0; i < folds[f].test_indices.size(); ++i) {
            const int truth = labels[static_cast<std::size_t>(folds[f].test_indices[i])];
            report.confusion(truth, outcome.predictions[i]) += 1;
        }
    }

    double sum = 0.0;
    for (double a : report.per_fold_accuracy) sum += a;
    report.mean_accuracy = sum / static_cast<double>(report.per_fold_accuracy.size());

    double ss = 0.0;
    for (double a : report.per_fold_accuracy) {
        ss += (a - report.mean_accuracy) * (a - report.mean_accuracy);
    }
    const auto f = static_cast<double>(report.per_fold_accuracy.size());
    const double sd = f > 1 ? std::sqrt(ss / (f - 1.0)) : 0.0;
    report.ci95_halfwidth = 1.96 * sd / std::sqrt(f);

    for (int c = 0; c < n_classes; ++c) {
        const double row_total = report.confusion.row(c).sum();
        report.per_class_recall[c] =
            row_total > 0 ? report.confusion(c, c) / row_total : 0.0;
    }
    return report;
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json conf = nlohmann::json::array();
    for (Eigen::Index i = 0; i < confusion.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < confusion.cols(); ++j) row.push_back(confusion(i, j));
        conf.push_back(row);
    }
    nlohmann::json recall = nlohmann::json::object();
    for (const auto& [c, r] : per_class_recall) recall[std::to_string(c)] = r;
    return {{"per_fold_accuracy", per_fold_accuracy},
            {"mean_accuracy", mean_accuracy},
            {"ci95_halfwidth", ci95_halfwidth},
            {"confusion", conf},
            {"per_class_recall", recall}};
}

} // namespace slicesim
