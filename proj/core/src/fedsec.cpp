#include "slicesim/fedsec.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "slicesim/error.hpp"
#include "slicesim/rng.hpp"

namespace slicesim {

using nlohmann::json;

std::size_t ModelParams::expected_size() const {
    std::size_t total = 0;
    for (const auto& t : layout) {
        std::size_t prod = 1;
        for (int s : t.shape) prod *= static_cast<std::size_t>(s);
        total += prod;
    }
    return total;
}

json ModelParams::to_json() const {
    json layout_j = json::array();
    for (const auto& t : layout) layout_j.push_back({{"name", t.name}, {"shape", t.shape}});
    return {{"layout", layout_j}, {"values", values}, {"version", version}};
}

ModelParams ModelParams::from_json(const json& j) {
    ModelParams p;
    for (const auto& t : j.at("layout")) {
        p.layout.push_back({t.at("name").get<std::string>(), t.at("shape").get<std::vector<int>>()});
    }
    p.values = j.at("values").get<std::vector<double>>();
    p.version = j.at("version").get<int>();
    if (p.values.size() != p.expected_size()) {
        throw Error(ErrorCode::LayoutMismatch, "value count does not match layout");
    }
    return p;
}

ModelParams pack_softmax(const SoftmaxModel& model, int version) {
    const auto d = static_cast<int>(model.weights.rows());
    const auto c = static_cast<int>(model.weights.cols());
    ModelParams p;
    p.layout = {{"weights", {d, c}}, {"bias", {c}}};
    p.values.reserve(static_cast<std::size_t>(d * c + c));
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < c; ++j) p.values.push_back(model.weights(i, j));
    }
    for (int j = 0; j < c; ++j) p.values.push_back(model.bias(j));
    p.version = version;
    return p;
}

SoftmaxModel unpack_softmax(const ModelParams& params) {
    if (params.layout.size() != 2 || params.layout[0].name != "weights" ||
        params.layout[1].name != "bias" || params.layout[0].shape.size() != 2 ||
        params.layout[1].shape.size() != 1 ||
        params.values.size() != params.expected_size()) {
        throw Error(ErrorCode::LayoutMismatch, "not a softmax parameter layout");
    }
    const int d = params.layout[0].shape[0];
    const int c = params.layout[0].shape[1];
    SoftmaxModel m = SoftmaxModel::zeros(d, c);
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < c; ++j) m.weights(i, j) = params.values[idx++];
    }
    for (int j = 0; j < c; ++j) m.bias(j) = params.values[idx++];
    return m;
}

AgentReport local_train(const AgentContext& agent, const ModelParams& global_params,
                        const DatasetPartition& partition, int epochs, std::uint64_t seed,
                        int first_global_epoch) {
    if (partition.records.empty()) {
        throw Error(ErrorCode::EmptyDataset, "agent " + agent.agent_id + " has no records");
    }
    SoftmaxModel model = unpack_softmax(global_params);

    FeatureMatrix raw = raw_features(partition.records);
    if (raw.matrix.cols() != model.weights.rows()) {
        throw Error(ErrorCode::LayoutMismatch, "feature width does not match global layout");
    }
    Eigen::MatrixXd X = agent.scaler.apply(raw.matrix);

    const std::uint64_t agent_seed =
        derive_seed(seed, "local", static_cast<std::uint64_t>(agent.agent_index));
    softmax_train(model, X, raw.labels, agent.opts, agent_seed, first_global_epoch, epochs);

    AgentReport report;
    report.agent_id = agent.agent_id;
    report.params = pack_softmax(model, global_params.version);
    report.n_samples = partition.records.size();
    report.local_metrics.train_loss = model.cross_entropy(X, raw.labels);
    auto preds = model.predict(X);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] == raw.labels[i]) ++correct;
    }
    report.local_metrics.train_accuracy =
        static_cast<double>(correct) / static_cast<double>(preds.size());
    return report;
}

ModelParams fedavg(const std::vector<AgentReport>& reports) {
    if (reports.empty()) throw Error(ErrorCode::EmptyReportSet, "no agent reports");

    // fixed reduction order: sort by agent_id so any caller ordering gives
    // bitwise-identical sums
    std::vector<const AgentReport*> ordered;
    ordered.reserve(reports.size());
    for (const auto& r : reports) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(),
              [](const AgentReport* a, const AgentReport* b) { return a->agent_id < b->agent_id; });

    const auto& layout = ordered.front()->params.layout;
    const std::size_t size = ordered.front()->params.values.size();
    for (const auto* r : ordered) {
        if (r->params.layout != layout || r->params.values.size() != size) {
            throw Error(ErrorCode::LayoutMismatch, "agent " + r->agent_id);
        }
        if (r->n_samples < 1) {
            throw Error(ErrorCode::InvalidConfig, "agent " + r->agent_id + " reports 0 samples");
        }
    }

    double total_samples = 0.0;
    for (const auto* r : ordered) total_samples += static_cast<double>(r->n_samples);

    ModelParams avg;
    avg.layout = layout;
    avg.values.assign(size, 0.0);
    for (const auto* r : ordered) {
        const double w = static_cast<double>(r->n_samples);
        for (std::size_t i = 0; i < size; ++i) avg.values[i] += w * r->params.values[i];
    }
    for (auto& v : avg.values) v /= total_samples;

    int max_version = 0;
    for (const auto* r : ordered) max_version = std::max(max_version, r->params.version);
    avg.version = max_version + 1;
    return avg;
}

SoftmaxModel train_centralized(const Eigen::MatrixXd& X, const std::vector<int>& y, int n_classes,
                               const SoftmaxOpts& opts, int epochs, std::uint64_t seed) {
    SoftmaxModel model = SoftmaxModel::zeros(static_cast<int>(X.cols()), n_classes);
    softmax_train(model, X, y, opts, derive_seed(seed, "local", 0), 0, epochs);
    return model;
}

FederationRun run_federation(const std::vector<DatasetPartition>& partitions,
                             const FederationConfig& config, const DatasetPartition& holdout) {
    if (partitions.empty()) throw Error(ErrorCode::EmptyDataset, "no partitions");
    for (const auto& p : partitions) {
        if (p.records.empty()) {
            throw Error(ErrorCode::EmptyDataset, "partition " + p.probe_id + " is empty");
        }
    }
    if (holdout.records.empty()) throw Error(ErrorCode::EmptyDataset, "holdout is empty");

    // agents in sorted id order; ids must be unique
    std::vector<const DatasetPartition*> ordered;
    for (const auto& p : partitions) ordered.push_back(&p);
    std::sort(ordered.begin(), ordered.end(),
              [](const DatasetPartition* a, const DatasetPartition* b) {
                  return a->probe_id < b->probe_id;
              });
    {
        std::set<std::string> ids;
        for (const auto* p : ordered) {
            if (!ids.insert(p->probe_id).second) {
                throw Error(ErrorCode::DuplicateId, "partition " + p->probe_id);
            }
        }
    }

    // shared featurization: scaler fit on the union of training partitions
    // (the holdout contributes nothing)
    std::vector<FlowRecord> pooled;
    for (const auto* p : ordered) {
        pooled.insert(pooled.end(), p->records.begin(), p->records.end());
    }
    FeatureMatrix pooled_raw = raw_features(pooled);
    FeatureScaler scaler = FeatureScaler::fit(pooled_raw.matrix);

    int n_classes = 0;
    for (int label : pooled_raw.labels) n_classes = std::max(n_classes, label + 1);
    FeatureMatrix holdout_raw = raw_features(holdout.records);
    for (int label : holdout_raw.labels) n_classes = std::max(n_classes, label + 1);
    Eigen::MatrixXd holdout_X = scaler.apply(holdout_raw.matrix);

    std::vector<AgentContext> agents;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        agents.push_back({ordered[i]->probe_id, static_cast<int>(i), scaler, config.opts});
    }

    FederationRun run;
    run.scaler = scaler;
    run.final_params =
        pack_softmax(SoftmaxModel::zeros(static_cast<int>(pooled_raw.matrix.cols()), n_classes), 0);

    for (int round = 0; round < config.rounds; ++round) {
        std::vector<AgentReport> reports;
        reports.reserve(agents.size());
        for (std::size_t i = 0; i < agents.size(); ++i) {
            reports.push_back(local_train(agents[i], run.final_params, *ordered[i],
                                          config.epochs_per_round, config.seed,
                                          round * config.epochs_per_round));
        }
        run.final_params = fedavg(reports);

        SoftmaxModel global = unpack_softmax(run.final_params);
        auto preds = global.predict(holdout_X);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            if (preds[i] == holdout_raw.labels[i]) ++correct;
        }
        RoundLog log;
        log.round = round + 1;
        log.global_accuracy = static_cast<double>(correct) / static_cast<double>(preds.size());
        log.global_loss = global.cross_entropy(holdout_X, holdout_raw.labels);
        for (const auto& r : reports) log.participating.push_back(r.agent_id);
        std::sort(log.participating.begin(), log.participating.end());
        run.logs.push_back(std::move(log));
    }
    return run;
}

json DetectionModel::to_json() const {
    return {{"params", params.to_json()},
            {"scaler",
             {{"mean", std::vector<double>(scaler.mean.data(), scaler.mean.data() + scaler.mean.size())},
              {"std", std::vector<double>(scaler.std.data(), scaler.std.data() + scaler.std.size())}}}};
}

DetectionModel DetectionModel::from_json(const json& j) {
    DetectionModel m;
    m.params = ModelParams::from_json(j.at("params"));
    auto mean = j.at("scaler").at("mean").get<std::vector<double>>();
    auto std_ = j.at("scaler").at("std").get<std::vector<double>>();
    m.scaler.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    m.scaler.std = Eigen::Map<Eigen::VectorXd>(std_.data(), static_cast<Eigen::Index>(std_.size()));
    return m;
}

json ActionRecord::to_json() const {
    return {{"slice", slice_id},
            {"action", action},
            {"attack_ratio", attack_ratio},
            {"flows_seen", flows_seen}};
}

std::vector<ActionRecord> detect_and_act(const DetectionModel& model,
                                         const std::vector<FlowRecord>& live_batch,
                                         OrchestratorState& state, double threshold) {
    std::vector<ActionRecord> actions;
    if (live_batch.empty()) return actions;

    SoftmaxModel softmax = unpack_softmax(model.params);
    FeatureMatrix raw = raw_features(live_batch);
    auto preds = softmax.predict(model.scaler.apply(raw.matrix));

    for (const auto& [slice_id, slice] : state.slices) {
        if (slice.state != SliceState::Operational || slice.quarantined) continue;
        if (slice.monitors.empty()) continue;
        std::set<std::string> monitors(slice.monitors.begin(), slice.monitors.end());

        std::size_t seen = 0;
        std::size_t attacks = 0;
        for (std::size_t i = 0; i < live_batch.size(); ++i) {
            if (!monitors.count(live_batch[i].probe_id)) continue;
            ++seen;
            if (preds[i] != static_cast<int>(TrafficClass::HarmlessSsh)) ++attacks;
        }
        if (seen == 0) continue;  // no evidence, no directive

        const double ratio = static_cast<double>(attacks) / static_cast<double>(seen);
        if (ratio > threshold) {
            ActionRecord action{slice_id, "Quarantine", ratio, seen};
            try {
                Directive directive;
                directive.type = DirectiveType::Quarantine;
                state = supervise(state, slice_id, directive);
            } catch (const Error& e) {
                action.action = std::string("Quarantine (rejected: ") + e.what() + ")";
            }
            actions.push_back(std::move(action));
        }
    }
    return actions;
}

} // namespace slicesim
