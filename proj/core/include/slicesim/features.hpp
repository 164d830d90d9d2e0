#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slicesim/telemetry.hpp"

namespace slicesim {

/// Fixed feature order shared by every consumer:
/// [duration_s, s_load, r_load, s_pkts, r_pkts, s_bytes, r_bytes,
///  proto_tcp, proto_udp, proto_icmp, proto_other]
const std::vector<std::string>& feature_names();
constexpr int kFeatureCount = 11;

struct FeatureMatrix {
    Eigen::MatrixXd matrix;  // n x d, raw values
    std::vector<int> labels;
    std::vector<std::string> names;
};

/// z-score statistics; constant columns keep std 1 so they map to zero.
struct FeatureScaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;

    static FeatureScaler fit(const Eigen::MatrixXd& matrix);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& matrix) const;
};

FeatureMatrix raw_features(const std::vector<FlowRecord>& records);

struct Featurized {
    Eigen::MatrixXd matrix;  // standardized
    std::vector<int> labels;
    std::vector<std::string> names;
    FeatureScaler scaler;    // fit on these records, reusable on test data
};

Featurized featurize(const std::vector<FlowRecord>& records);

} // namespace slicesim
