#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicesim/features.hpp"
#include "slicesim/learn.hpp"
#include "slicesim/orchestrator.hpp"
#include "slicesim/telemetry.hpp"

namespace slicesim {

struct TensorSpec {
    std::string name;
    std::vector<int> shape;

    bool operator==(const TensorSpec&) const = default;
};

/// Flat parameter vector plus layout; the unit the aggregator averages.
struct ModelParams {
    std::vector<TensorSpec> layout;
    std::vector<double> values;
    int version = 0;

    std::size_t expected_size() const;
    nlohmann::json to_json() const;
    static ModelParams from_json(const nlohmann::json& j);
};

ModelParams pack_softmax(const SoftmaxModel& model, int version);
SoftmaxModel unpack_softmax(const ModelParams& params);

struct LocalMetrics {
    double train_loss = 0.0;
    double train_accuracy = 0.0;
};

struct AgentReport {
    std::string agent_id;
    ModelParams params;
    std::size_t n_samples = 0;
    LocalMetrics local_metrics;
};

struct RoundLog {
    int round = 0;
    double global_accuracy = 0.0;
    double global_loss = 0.0;
    std::vector<std::string> participating;
};

/// An ML-Agent embedded in one architecture block: featurizes its local
/// partition with the shared scaler and trains the broadcast model on it.
struct AgentContext {
    std::string agent_id;
    int agent_index = 0;
    FeatureScaler scaler;
    SoftmaxOpts opts;
};

/// Local pass of the federated model. first_global_epoch keys the per-epoch
/// shuffle seeds, so round-by-round training chains exactly like one long
/// centralized run.
AgentReport local_train(const AgentContext& agent, const ModelParams& global_params,
                        const DatasetPartition& partition, int epochs, std::uint64_t seed,
                        int first_global_epoch = 0);

/// Sample-count-weighted mean of the reports (reduced in sorted agent-id
/// order); version = max input version + 1.
ModelParams fedavg(const std::vector<AgentReport>& reports);

struct FederationConfig {
    int rounds = 50;
    int epochs_per_round = 1;
    std::uint64_t seed = 0;
    SoftmaxOpts opts;
};

struct FederationRun {
    std::vector<RoundLog> logs;
    ModelParams final_params;
    FeatureScaler scaler;  // fit on the union of the training partitions
};

FederationRun run_federation(const std::vector<DatasetPartition>& partitions,
                             const FederationConfig& config, const DatasetPartition& holdout);

/// Centralized baseline with the same epoch-seed derivation as a single
/// agent at index 0; used to compare IID federation against pooled training.
SoftmaxModel train_centralized(const Eigen::MatrixXd& X, const std::vector<int>& y, int n_classes,
                               const SoftmaxOpts& opts, int epochs, std::uint64_t seed);

struct DetectionModel {
    ModelParams params;
    FeatureScaler scaler;

    nlohmann::json to_json() const;
    static DetectionModel from_json(const nlohmann::json& j);
};

struct ActionRecord {
    std::string slice_id;
    std::string action;
    double attack_ratio = 0.0;
    std::size_t flows_seen = 0;

    nlohmann::json to_json() const;
};

/// Per-slice attack ratio over the flows its monitors contributed; above
/// the threshold the slice gets a Quarantine directive. Orchestrator errors
/// are recorded on the action, never raised.
std::vector<ActionRecord> detect_and_act(const DetectionModel& model,
                                         const std::vector<FlowRecord>& live_batch,
                                         OrchestratorState& state, double threshold);

} // namespace slicesim
