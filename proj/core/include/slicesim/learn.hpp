#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "slicesim/features.hpp"

namespace slicesim {

enum class Algorithm {
    DecisionTree,
    RandomForest,
    ExtraTrees,
    Knn,
    RidgeClassifier,
    Qda,
    SoftmaxRegression,
};

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

/// Fixed, versioned defaults; the experiment plan may override.
struct Hyperparams {
    int max_depth = 16;          // trees
    int min_samples_leaf = 1;    // trees
    int n_trees = 100;           // forests
    int max_features = 0;        // forests; 0 = ceil(sqrt(d))
    bool bootstrap = true;       // forests
    int knn_k = 5;
    double ridge_lambda = 1.0;
    double qda_shrinkage = 1e-3;
    double softmax_lr = 0.1;
    int softmax_batch = 32;
    int softmax_epochs = 30;
};

/// Multinomial logistic model; shared with the federated path, where its
/// flat parameter vector is what gets averaged.
struct SoftmaxModel {
    Eigen::MatrixXd weights;  // d x C
    Eigen::VectorXd bias;     // C

    static SoftmaxModel zeros(int d, int n_classes);
    Eigen::MatrixXd probabilities(const Eigen::MatrixXd& X) const;
    std::vector<int> predict(const Eigen::MatrixXd& X) const;
    double cross_entropy(const Eigen::MatrixXd& X, const std::vector<int>& y) const;
};

struct SoftmaxOpts {
    double learning_rate = 0.1;
    int batch_size = 32;
};

/// One pass of seeded mini-batch gradient descent. Epoch seeds derive from
/// (seed_base, global_epoch) so chained local rounds reproduce one long
/// centralized run exactly.
void softmax_train_epoch(SoftmaxModel& model, const Eigen::MatrixXd& X, const std::vector<int>& y,
                         const SoftmaxOpts& opts, std::uint64_t seed_base, int global_epoch);

void softmax_train(SoftmaxModel& model, const Eigen::MatrixXd& X, const std::vector<int>& y,
                   const SoftmaxOpts& opts, std::uint64_t seed_base, int first_epoch, int epochs);

class Classifier {
public:
    Classifier(Algorithm algorithm, Hyperparams hyperparams);
    Classifier(Classifier&&) noexcept;
    Classifier& operator=(Classifier&&) noexcept;
    ~Classifier();

    Algorithm algorithm() const { return algorithm_; }
    const Hyperparams& hyperparams() const { return hyperparams_; }
    bool fitted() const;

    void fit(const Eigen::MatrixXd& X, const std::vector<int>& y, std::uint64_t seed);
    std::vector<int> predict(const Eigen::MatrixXd& X) const;

    /// SoftmaxRegression only: per-row class probabilities.
    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const;

private:
    Algorithm algorithm_;
    Hyperparams hyperparams_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct EvalConfig {
    int n_folds = 10;
    std::uint64_t seed = 0;
    bool stratified = true;
};

struct Fold {
    std::vector<int> train_indices;
    std::vector<int> test_indices;
};

/// Disjoint folds covering every index; per-fold class counts stay within
/// one sample of exact proportionality. Deterministic given seed.
std::vector<Fold> stratified_kfold(const std::vector<int>& labels, const EvalConfig& config);

struct EvalReport {
    std::vector<double> per_fold_accuracy;
    double mean_accuracy = 0.0;
    double ci95_halfwidth = 0.0;
    Eigen::MatrixXi confusion;  // rows = true class, cols = predicted
    std::map<int, double> per_class_recall;

    nlohmann::json to_json() const;
};

/// Runs stratified k-fold evaluation. The z-score scaler is fit on each
/// training fold only and applied to its test fold.
EvalReport evaluate(Algorithm algorithm, const Hyperparams& hyperparams,
                    const Eigen::MatrixXd& raw_matrix, const std::vector<int>& labels,
                    const EvalConfig& config);

namespace detail {

struct FoldOutcome {
    FeatureScaler scaler;
    std::vector<int> predictions;
    double accuracy = 0.0;
};

/// Single evaluation fold, exposed so tests can check that nothing leaks
/// from test rows into the scaler or the fitted model.
FoldOutcome run_fold(Algorithm algorithm, const Hyperparams& hyperparams,
                     const Eigen::MatrixXd& raw_matrix, const std::vector<int>& labels,
                     const Fold& fold, std::uint64_t seed);

} // namespace detail

} // namespace slicesim
