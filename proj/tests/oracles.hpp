// Test-only oracles, deliberately independent of the library's own
// implementations: a Jacobi eigensolver for PCA checks, brute-force
// assignment enumeration for resource selection, and a plain 1-NN.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

// Cyclic Jacobi rotations on a symmetric matrix. Returns eigenvalues in
// non-increasing order with matching eigenvector rows.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> jacobi_eigensymmetric(Eigen::MatrixXd a,
                                                                         int sweeps = 100,
                                                                         double tol = 1e-14) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (off < tol * tol) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(n, n);
                rot(p, p) = c;
                rot(q, q) = c;
                rot(p, q) = s;
                rot(q, p) = -s;
                a = rot.transpose() * a * rot;
                v = v * rot;
            }
        }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
    Eigen::VectorXd values(n);
    Eigen::MatrixXd vectors(n, n);  // rows = eigenvectors
    for (Eigen::Index i = 0; i < n; ++i) {
        values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        vectors.row(i) = v.col(order[static_cast<std::size_t>(i)]).transpose();
    }
    return {values, vectors};
}

struct AssignmentOracle {
    bool feasible = false;
    double best_cost = std::numeric_limits<double>::infinity();
};

// Exhaustive single-offer-per-demand assignment search. offers_per_demand
// gives, for each demand, the usable (offer id, available, unit cost).
struct OfferView {
    std::string id;
    double available;
    double unit_cost;
};

inline AssignmentOracle enumerate_assignments(
    const std::vector<std::vector<OfferView>>& offers_per_demand,
    const std::vector<double>& amounts) {
    AssignmentOracle out;
    const std::size_t n = amounts.size();
    std::vector<std::size_t> choice(n, 0);
    while (true) {
        std::map<std::string, double> used;
        bool ok = true;
        double cost = 0.0;
        for (std::size_t i = 0; i < n && ok; ++i) {
            if (offers_per_demand[i].empty()) {
                ok = false;
                break;
            }
            const auto& offer = offers_per_demand[i][choice[i]];
            used[offer.id] += amounts[i];
            if (used[offer.id] > offer.available + 1e-12) ok = false;
            cost += amounts[i] * offer.unit_cost;
        }
        if (ok) {
            out.feasible = true;
            out.best_cost = std::min(out.best_cost, cost);
        }
        std::size_t level = 0;
        while (level < n) {
            if (offers_per_demand[level].empty()) return out;
            if (++choice[level] < offers_per_demand[level].size()) break;
            choice[level] = 0;
            ++level;
        }
        if (level == n) break;
    }
    return out;
}

// plain 1-NN on rows of X (leave-one-out style lookups use exclude_self)
inline int one_nn(const Eigen::MatrixXd& train, const std::vector<int>& labels,
                  const Eigen::RowVectorXd& query) {
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < train.rows(); ++i) {
        const double d = (train.row(i) - query).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return labels[static_cast<std::size_t>(best)];
}

} // namespace oracles
