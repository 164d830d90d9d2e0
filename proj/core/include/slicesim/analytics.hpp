#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace slicesim {

struct ClusteringResult {
    int k = 0;
    Eigen::MatrixXd centroids;     // k x d
    std::vector<int> assignments;  // nearest centroid, ties to lowest index
    double wcss = 0.0;
    int iterations = 0;
};

struct KMeansOptions {
    int max_iter = 100;
    double tol = 1e-6;
    // test hook: observes wcss after every Lloyd update
    std::function<void(int iteration, double wcss)> on_iteration;
};

/// Lloyd iterations from seeded k-means++ starts. Empty clusters are
/// re-seeded to the point currently farthest from its assigned centroid.
ClusteringResult kmeans(const Eigen::MatrixXd& matrix, int k, std::uint64_t seed,
                        const KMeansOptions& options = {});

struct ElbowResult {
    int chosen_k = 0;
    std::vector<std::pair<int, double>> wcss_curve;
};

/// Knee rule: the k whose wcss point lies farthest (perpendicular distance)
/// from the chord joining the curve endpoints; ties go to the smallest k.
ElbowResult elbow_select(const Eigen::MatrixXd& matrix, int k_min, int k_max, std::uint64_t seed,
                         const KMeansOptions& options = {});

struct PcaResult {
    Eigen::MatrixXd components;        // d x d, rows are principal axes
    Eigen::VectorXd explained_variance;  // non-increasing
    Eigen::VectorXd mean;
};

/// Eigendecomposition of the sample covariance (n-1 divisor) of centered
/// data. Sign convention: each axis's largest-magnitude entry is positive.
PcaResult pca(const Eigen::MatrixXd& matrix);

struct TopFeature {
    int component = 0;
    std::string feature_name;
    double abs_loading = 0.0;
};

/// For each of the first n_components axes, the feature with the largest
/// absolute loading (ties to the lowest feature index).
std::vector<TopFeature> top_features(const PcaResult& result, int n_components,
                                     const std::vector<std::string>& names);

struct FeatureImportanceReport {
    std::map<std::string, std::vector<TopFeature>> per_dataset;
    std::map<std::string, int> frequency;

    /// Names ordered by (count desc, feature order asc).
    std::vector<std::pair<std::string, int>> ranking(
        const std::vector<std::string>& feature_order) const;
};

FeatureImportanceReport importance_frequency(
    const std::map<std::string, std::vector<TopFeature>>& per_dataset);

} // namespace slicesim
