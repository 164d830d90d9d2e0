#include "slicesim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "slicesim/error.hpp"
#include "slicesim/rng.hpp"

namespace slicesim {

namespace {

double squared_distance(const Eigen::MatrixXd& matrix, Eigen::Index row,
                        const Eigen::MatrixXd& centroids, Eigen::Index c) {
    return (matrix.row(row) - centroids.row(c)).squaredNorm();
}

// nearest centroid, ties to lowest index
int nearest(const Eigen::MatrixXd& matrix, Eigen::Index row, const Eigen::MatrixXd& centroids) {
    int best = 0;
    double best_d = squared_distance(matrix, row, centroids, 0);
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
        const double d = squared_distance(matrix, row, centroids, c);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

Eigen::MatrixXd kmeans_pp_init(const Eigen::MatrixXd& matrix, int k, Rng& rng) {
    const Eigen::Index n = matrix.rows();
    Eigen::MatrixXd centroids(k, matrix.cols());
    centroids.row(0) = matrix.row(static_cast<Eigen::Index>(rng.below(n)));
    Eigen::VectorXd dist2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist2(i) = (matrix.row(i) - centroids.row(0)).squaredNorm();
    }
    for (int c = 1; c < k; ++c) {
        const double total = dist2.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            double x = rng.uniform() * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                x -= dist2(i);
                if (x < 0.0) {
                    pick = i;
                    break;
                }
                pick = i;
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.below(n));
        }
        centroids.row(c) = matrix.row(pick);
        for (Eigen::Index i = 0; i < n; ++i) {
            dist2(i) = std::min(dist2(i), (matrix.row(i) - centroids.row(c)).squaredNorm());
        }
    }
    return centroids;
}

double compute_wcss(const Eigen::MatrixXd& matrix, const Eigen::MatrixXd& centroids,
                    const std::vector<int>& assignments) {
    double wcss = 0.0;
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        wcss += (matrix.row(i) - centroids.row(assignments[static_cast<std::size_t>(i)]))
                    .squaredNorm();
    }
    return wcss;
}

} // namespace

ClusteringResult kmeans(const Eigen::MatrixXd& matrix, int k, std::uint64_t seed,
                        const KMeansOptions& options) {
    const Eigen::Index n = matrix.rows();
    if (k < 1 || k > n) {
        throw Error(ErrorCode::KExceedsN,
                    "k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    }
    if (options.max_iter < 1) throw Error(ErrorCode::InvalidConfig, "max_iter must be >= 1");
    if (options.tol <= 0.0) throw Error(ErrorCode::InvalidConfig, "tol must be positive");

    Rng rng(seed);
    Eigen::MatrixXd centroids = kmeans_pp_init(matrix, k, rng);
    std::vector<int> assignments(static_cast<std::size_t>(n), 0);

    int iterations = 0;
    for (; iterations < options.max_iter; ++iterations) {
        for (Eigen::Index i = 0; i < n; ++i) {
            assignments[static_cast<std::size_t>(i)] = nearest(matrix, i, centroids);
        }

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, matrix.cols());
        std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(assignments[static_cast<std::size_t>(i)]) += matrix.row(i);
            ++counts[static_cast<std::size_t>(assignments[static_cast<std::size_t>(i)])];
        }

        // re-seed empty clusters to the worst-fit point
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index farthest = 0;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const int a = assignments[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(a)] <= 1) continue;  // keep donors non-empty
                const double d = squared_distance(matrix, i, centroids, a);
                if (d > far_d) {
                    far_d = d;
                    farthest = i;
                }
            }
            const int old = assignments[static_cast<std::size_t>(farthest)];
            sums.row(old) -= matrix.row(farthest);
            --counts[static_cast<std::size_t>(old)];
            sums.row(c) += matrix.row(farthest);
            ++counts[static_cast<std::size_t>(c)];
            assignments[static_cast<std::size_t>(farthest)] = c;
        }

        double shift = 0.0;
        for (int c = 0; c < k; ++c) {
            Eigen::RowVectorXd updated =
                sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            shift = std::max(shift, (updated - centroids.row(c)).norm());
            centroids.row(c) = updated;
        }

        if (options.on_iteration) {
            std::vector<int> snap(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) {
                snap[static_cast<std::size_t>(i)] = nearest(matrix, i, centroids);
            }
            options.on_iteration(iterations + 1, compute_wcss(matrix, centroids, snap));
        }
        if (shift < options.tol) {
            ++iterations;
            break;
        }
    }

    // final consistent assignment pass
    for (Eigen::Index i = 0; i < n; ++i) {
        assignments[static_cast<std::size_t>(i)] = nearest(matrix, i, centroids);
    }

    ClusteringResult result;
    result.k = k;
    result.centroids = std::move(centroids);
    result.wcss = compute_wcss(matrix, result.centroids, assignments);
    result.assignments = std::move(assignments);
    result.iterations = iterations;
    return result;
}

ElbowResult elbow_select(const Eigen::MatrixXd& matrix, int k_min, int k_max, std::uint64_t seed,
                         const KMeansOptions& options) {
    if (k_min < 1 || k_max > matrix.rows() || k_max < k_min) {
        throw Error(ErrorCode::RangeTooSmall, "k range must lie within [1, n]");
    }
    if (k_max - k_min + 1 < 3) {
        throw Error(ErrorCode::RangeTooSmall, "need at least 3 candidate k values");
    }

    ElbowResult result;
    for (int k = k_min; k <= k_max; ++k) {
        auto clustering = kmeans(matrix, k, derive_seed(seed, "kmeans", k), options);
        result.wcss_curve.emplace_back(k, clustering.wcss);
    }

    // perpendicular distance from each point to the endpoint chord
    const double x1 = result.wcss_curve.front().first;
    const double y1 = result.wcss_curve.front().second;
    const double x2 = result.wcss_curve.back().first;
    const double y2 = result.wcss_curve.back().second;
    const double chord = std::hypot(x2 - x1, y2 - y1);

    double best_dist = -1.0;
    int best_k = result.wcss_curve.front().first;
    for (const auto& [k, wcss] : result.wcss_curve) {
        const double num = std::abs((y2 - y1) * k - (x2 - x1) * wcss + x2 * y1 - y2 * x1);
        const double dist = chord > 0.0 ? num / chord : 0.0;
        if (dist > best_dist + 1e-12) {
            best_dist = dist;
            best_k = k;
        }
    }
    result.chosen_k = best_k;
    return result;
}

PcaResult pca(const Eigen::MatrixXd& matrix) {
    const Eigen::Index n = matrix.rows();
    if (n < 2) throw Error(ErrorCode::DegenerateInput, "pca needs at least 2 rows");
    const Eigen::Index d = matrix.cols();

    PcaResult result;
    result.mean = matrix.colwise().mean();
    Eigen::MatrixXd centered = matrix.rowwise() - result.mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::DegenerateInput, "eigendecomposition failed");
    }

    // Eigen returns ascending order; flip to non-increasing
    result.explained_variance.resize(d);
    result.components.resize(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const Eigen::Index src = d - 1 - j;
        result.explained_variance(j) = std::max(0.0, solver.eigenvalues()(src));
        result.components.row(j) = solver.eigenvectors().col(src).transpose();
    }

    // sign convention: largest-magnitude entry positive (first on ties)
    for (Eigen::Index j = 0; j < d; ++j) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            const double mag = std::abs(result.components(j, i));
            if (mag > best + 1e-15) {
                best = mag;
                arg = i;
            }
        }
        if (result.components(j, arg) < 0.0) result.components.row(j) *= -1.0;
    }
    return result;
}

std::vector<TopFeature> top_features(const PcaResult& result, int n_components,
                                     const std::vector<std::string>& names) {
    const Eigen::Index d = result.components.cols();
    if (n_components < 1 || n_components > d) {
        throw Error(ErrorCode::InvalidConfig, "n_components outside [1, d]");
    }
    if (static_cast<Eigen::Index>(names.size()) != d) {
        throw Error(ErrorCode::DimensionMismatch, "feature name count != d");
    }
    std::vector<TopFeature> out;
    out.reserve(static_cast<std::size_t>(n_components));
    for (int j = 0; j < n_components; ++j) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            const double mag = std::abs(result.components(j, i));
            if (mag > best) {  // strict: ties keep the lowest index
                best = mag;
                arg = i;
            }
        }
        out.push_back({j, names[static_cast<std::size_t>(arg)], best});
    }
    return out;
}

FeatureImportanceReport importance_frequency(
    const std::map<std::string, std::vector<TopFeature>>& per_dataset) {
    if (per_dataset.empty()) throw Error(ErrorCode::EmptyDataset, "no datasets");
    FeatureImportanceReport report;
    report.per_dataset = per_dataset;
    for (const auto& [dataset, tops] : per_dataset) {
        for (const auto& t : tops) ++report.frequency[t.feature_name];
    }
    return report;
}

std::vector<std::pair<std::string, int>> FeatureImportanceReport::ranking(
    const std::vector<std::string>& feature_order) const {
    auto order_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < feature_order.size(); ++i) {
            if (feature_order[i] == name) return i;
        }
        return feature_order.size();
    };
    std::vector<std::pair<std::string, int>> ranked(frequency.begin(), frequency.end());
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return order_of(a.first) < order_of(b.first);
    });
    return ranked;
}

} // namespace slicesim
