#include "slicesim/features.hpp"

#include <cmath>

#include "slicesim/error.hpp"

namespace slicesim {

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = {
        "duration_s", "s_load", "r_load", "s_pkts", "r_pkts", "s_bytes", "r_bytes",
        "proto_tcp", "proto_udp", "proto_icmp", "proto_other"};
    return names;
}

FeatureMatrix raw_features(const std::vector<FlowRecord>& records) {
    if (records.empty()) throw Error(ErrorCode::EmptyDataset, "no records to featurize");
    const auto n = static_cast<Eigen::Index>(records.size());
    FeatureMatrix fm;
    fm.matrix.resize(n, kFeatureCount);
    fm.labels.reserve(records.size());
    fm.names = feature_names();
    for (Eigen::Index i = 0; i < n; ++i) {
        const FlowRecord& r = records[static_cast<std::size_t>(i)];
        fm.matrix(i, 0) = r.duration_s;
        fm.matrix(i, 1) = r.s_load;
        fm.matrix(i, 2) = r.r_load;
        fm.matrix(i, 3) = static_cast<double>(r.s_pkts);
        fm.matrix(i, 4) = static_cast<double>(r.r_pkts);
        fm.matrix(i, 5) = static_cast<double>(r.s_bytes);
        fm.matrix(i, 6) = static_cast<double>(r.r_bytes);
        for (int p = 0; p < kProtoCount; ++p) {
            fm.matrix(i, 7 + p) = (static_cast<int>(r.proto) == p) ? 1.0 : 0.0;
        }
        fm.labels.push_back(static_cast<int>(r.label));
    }
    return fm;
}

FeatureScaler FeatureScaler::fit(const Eigen::MatrixXd& matrix) {
    FeatureScaler s;
    const auto n = matrix.rows();
    s.mean = matrix.colwise().mean();
    if (n < 2) {
        s.std = Eigen::VectorXd::Ones(matrix.cols());
        return s;
    }
    Eigen::MatrixXd centered = matrix.rowwise() - s.mean.transpose();
    s.std = (centered.array().square().colwise().sum() / static_cast<double>(n - 1))
                .sqrt()
                .matrix()
                .transpose();
    for (Eigen::Index j = 0; j < s.std.size(); ++j) {
        if (s.std(j) == 0.0 || !std::isfinite(s.std(j))) s.std(j) = 1.0;  // constant column rule
    }
    return s;
}

Eigen::MatrixXd FeatureScaler::apply(const Eigen::MatrixXd& matrix) const {
    if (matrix.cols() != mean.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "matrix has " + std::to_string(matrix.cols()) + " columns, scaler expects " +
                        std::to_string(mean.size()));
    }
    Eigen::MatrixXd out = matrix.rowwise() - mean.transpose();
    out.array().rowwise() /= std.transpose().array();
    return out;
}

Featurized featurize(const std::vector<FlowRecord>& records) {
    FeatureMatrix raw = raw_features(records);
    Featurized f;
    f.labels = std::move(raw.labels);
    f.names = std::move(raw.names);
    f.scaler = FeatureScaler::fit(raw.matrix);
    f.matrix = f.scaler.apply(raw.matrix);
    return f;
}

} // namespace slicesim
