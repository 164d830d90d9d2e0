#include "slicesim/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "slicesim/analytics.hpp"
#include "slicesim/error.hpp"
#include "slicesim/rng.hpp"

namespace slicesim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out << text;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string resolve_relative(const fs::path& base_dir, const std::string& p) {
    fs::path path(p);
    if (path.is_absolute()) return path.string();
    return (base_dir / path).lexically_normal().string();
}

} // namespace

std::string hash_file_hex(const std::string& path) {
    const std::uint64_t h = fnv1a64(read_text_file(path));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

json ExperimentPlan::to_json() const {
    json algos = json::array();
    for (auto a : algorithms) algos.push_back(to_string(a));
    return {
        {"seed", seed},
        {"catalog", catalog_path},
        {"generator", generator.to_json()},
        {"n_per_probe", n_per_probe},
        {"holdout_n", holdout_n},
        {"analytics",
         {{"k_min", analytics.k_min},
          {"k_max", analytics.k_max},
          {"n_components", analytics.n_components},
          {"pooled_elbow", analytics.pooled_elbow}}},
        {"eval", {{"n_folds", eval.n_folds}, {"stratified", eval.stratified}}},
        {"algorithms", algos},
        {"hyperparams",
         {{"max_depth", hyperparams.max_depth},
          {"min_samples_leaf", hyperparams.min_samples_leaf},
          {"n_trees", hyperparams.n_trees},
          {"max_features", hyperparams.max_features},
          {"bootstrap", hyperparams.bootstrap},
          {"knn_k", hyperparams.knn_k},
          {"ridge_lambda", hyperparams.ridge_lambda},
          {"qda_shrinkage", hyperparams.qda_shrinkage},
          {"softmax_lr", hyperparams.softmax_lr},
          {"softmax_batch", hyperparams.softmax_batch},
          {"softmax_epochs", hyperparams.softmax_epochs}}},
        {"federation",
         {{"rounds", federation.rounds},
          {"epochs_per_round", federation.epochs_per_round},
          {"learning_rate", federation.opts.learning_rate},
          {"batch_size", federation.opts.batch_size}}},
        {"detection_threshold", detection_threshold},
        {"scenario", scenario},
        {"output_dir", output_dir},
        {"dataset_csv", dataset_csv},
    };
}

ExperimentPlan default_plan() {
    ExperimentPlan plan;
    plan.seed = 11;
    plan.generator = GeneratorSpec::defaults();
    plan.algorithms = {Algorithm::DecisionTree,    Algorithm::RandomForest,
                       Algorithm::ExtraTrees,      Algorithm::Knn,
                       Algorithm::RidgeClassifier, Algorithm::Qda};
    plan.eval.n_folds = 10;
    plan.eval.stratified = true;
    plan.federation.rounds = 50;
    plan.federation.epochs_per_round = 1;
    plan.detection_threshold = 0.5;

    // two slices on disjoint probes; the scenario injects scan traffic at
    // the first slice's monitor only
    plan.scenario = json::parse(R"({
      "commands": [
        {"op": "submit_request", "request": {"id": "slice-a", "tenant": "tenant-1",
          "demands": [{"kind": "compute", "amount": 4.0}, {"kind": "link", "amount": 2.0}],
          "max_latency_ms": 20.0, "min_throughput": 100.0}},
        {"op": "commission", "slice": "slice-a"},
        {"op": "instantiate", "slice": "slice-a", "probes": ["bottom"]},
        {"op": "submit_request", "request": {"id": "slice-b", "tenant": "tenant-2",
          "demands": [{"kind": "compute", "amount": 2.0}],
          "max_latency_ms": 50.0, "min_throughput": 10.0}},
        {"op": "commission", "slice": "slice-b"},
        {"op": "instantiate", "slice": "slice-b", "probes": ["left"]},
        {"op": "advance_time", "dt": 60.0},
        {"op": "inject", "probe": "bottom", "class": "PortScan", "count": 200},
        {"op": "inject", "probe": "left", "class": "HarmlessSsh", "count": 200},
        {"op": "detect"},
        {"op": "advance_time", "dt": 60.0}
      ]
    })");
    return plan;
}

ExperimentPlan load_plan(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, "plan: " + std::string(e.what()));
    }
    const fs::path base = fs::path(path).parent_path();

    ExperimentPlan plan = default_plan();
    if (!j.contains("seed")) {
        throw Error(ErrorCode::InvalidConfig, "plan must pin a seed (no wall-clock default)");
    }
    plan.seed = j.at("seed").get<std::uint64_t>();

    if (j.contains("catalog")) {
        plan.catalog_path = resolve_relative(base, j.at("catalog").get<std::string>());
        if (!fs::exists(plan.catalog_path)) {
            throw Error(ErrorCode::InvalidConfig, "catalog not found: " + plan.catalog_path);
        }
    }
    if (j.contains("generator")) {
        const auto& g = j.at("generator");
        if (g.is_string()) {
            const std::string gpath = resolve_relative(base, g.get<std::string>());
            if (!fs::exists(gpath)) {
                throw Error(ErrorCode::InvalidConfig, "generator spec not found: " + gpath);
            }
            plan.generator = GeneratorSpec::from_json(json::parse(read_text_file(gpath)));
        } else {
            plan.generator = GeneratorSpec::from_json(g);
        }
    }
    plan.n_per_probe = j.value("n_per_probe", plan.n_per_probe);
    plan.holdout_n = j.value("holdout_n", plan.holdout_n);
    if (j.contains("analytics")) {
        const auto& a = j.at("analytics");
        plan.analytics.k_min = a.value("k_min", plan.analytics.k_min);
        plan.analytics.k_max = a.value("k_max", plan.analytics.k_max);
        plan.analytics.n_components = a.value("n_components", plan.analytics.n_components);
        plan.analytics.pooled_elbow = a.value("pooled_elbow", plan.analytics.pooled_elbow);
    }
    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        plan.eval.n_folds = e.value("n_folds", plan.eval.n_folds);
        plan.eval.stratified = e.value("stratified", plan.eval.stratified);
    }
    if (j.contains("algorithms")) {
        plan.algorithms.clear();
        for (const auto& a : j.at("algorithms")) {
            plan.algorithms.push_back(algorithm_from_string(a.get<std::string>()));
        }
    }
    if (j.contains("hyperparams")) {
        const auto& h = j.at("hyperparams");
        plan.hyperparams.max_depth = h.value("max_depth", plan.hyperparams.max_depth);
        plan.hyperparams.min_samples_leaf =
            h.value("min_samples_leaf", plan.hyperparams.min_samples_leaf);
        plan.hyperparams.n_trees = h.value("n_trees", plan.hyperparams.n_trees);
        plan.hyperparams.max_features = h.value("max_features", plan.hyperparams.max_features);
        plan.hyperparams.bootstrap = h.value("bootstrap", plan.hyperparams.bootstrap);
        plan.hyperparams.knn_k = h.value("knn_k", plan.hyperparams.knn_k);
        plan.hyperparams.ridge_lambda = h.value("ridge_lambda", plan.hyperparams.ridge_lambda);
        plan.hyperparams.qda_shrinkage = h.value("qda_shrinkage", plan.hyperparams.qda_shrinkage);
        plan.hyperparams.softmax_lr = h.value("softmax_lr", plan.hyperparams.softmax_lr);
        plan.hyperparams.softmax_batch = h.value("softmax_batch", plan.hyperparams.softmax_batch);
        plan.hyperparams.softmax_epochs =
            h.value("softmax_epochs", plan.hyperparams.softmax_epochs);
    }
    if (j.contains("federation")) {
        const auto& f = j.at("federation");
        plan.federation.rounds = f.value("rounds", plan.federation.rounds);
        plan.federation.epochs_per_round =
            f.value("epochs_per_round", plan.federation.epochs_per_round);
        plan.federation.opts.learning_rate =
            f.value("learning_rate", plan.federation.opts.learning_rate);
        plan.federation.opts.batch_size = f.value("batch_size", plan.federation.opts.batch_size);
    }
    plan.detection_threshold = j.value("detection_threshold", plan.detection_threshold);
    if (j.contains("scenario")) {
        const auto& s = j.at("scenario");
        if (s.is_string()) {
            const std::string spath = resolve_relative(base, s.get<std::string>());
            if (!fs::exists(spath)) {
                throw Error(ErrorCode::InvalidConfig, "scenario not found: " + spath);
            }
            plan.scenario = json::parse(read_text_file(spath));
        } else {
            plan.scenario = s;
        }
    }
    plan.output_dir = j.value("output_dir", plan.output_dir);
    if (j.contains("dataset_csv")) {
        plan.dataset_csv = resolve_relative(base, j.at("dataset_csv").get<std::string>());
        if (!fs::exists(plan.dataset_csv)) {
            throw Error(ErrorCode::InvalidConfig, "dataset not found: " + plan.dataset_csv);
        }
    }
    if (j.contains("column_map")) {
        const std::string cpath = resolve_relative(base, j.at("column_map").get<std::string>());
        if (!fs::exists(cpath)) {
            throw Error(ErrorCode::InvalidConfig, "column map not found: " + cpath);
        }
        json cm = json::parse(read_text_file(cpath));
        for (const auto& [external, canonical] : cm.at("columns").items()) {
            plan.import_options.column_map[external] = canonical.get<std::string>();
        }
        plan.import_options.enforce_load_relation =
            cm.value("enforce_load_relation", plan.import_options.enforce_load_relation);
    }
    return plan;
}

namespace {

struct StageRunner {
    fs::path out_dir;
    std::vector<StageStatus> stages;
    std::map<std::string, std::string> artifact_hashes;

    void record_artifact(const std::string& filename) {
        artifact_hashes[filename] = hash_file_hex((out_dir / filename).string());
    }

    template <typename Fn>
    bool stage(const std::string& name, Fn&& fn) {
        try {
            fn();
            stages.push_back({name, "ok", ""});
            return true;
        } catch (const std::exception& e) {
            stages.push_back({name, "failed", e.what()});
            return false;
        }
    }
};

// deterministic split: every stride-th record goes to the holdout
void split_holdout(std::vector<FlowRecord>& records, std::vector<FlowRecord>& holdout,
                   std::size_t stride) {
    std::vector<FlowRecord> keep;
    keep.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (stride > 0 && i % stride == stride - 1) {
            holdout.push_back(records[i]);
        } else {
            keep.push_back(records[i]);
        }
    }
    records = std::move(keep);
}

} // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan, const std::string& out_dir) {
    ExperimentResult result;
    StageRunner runner;
    runner.out_dir = out_dir;
    fs::create_directories(runner.out_dir);

    std::vector<DatasetPartition> partitions;
    DatasetPartition holdout;
    Eigen::MatrixXd pooled_std;               // standardized pooled features
    std::map<std::string, Featurized> per_probe;
    FederationRun federation;
    bool have_federation = false;

    // --- generate ------------------------------------------------------
    bool ok = runner.stage("generate", [&] {
        if (!plan.dataset_csv.empty()) {
            auto imported = import_flow_csv(plan.dataset_csv, plan.import_options);
            write_text_file((runner.out_dir / "rejects.jsonl").string(),
                            rejects_to_jsonl(imported.rejects));
            runner.record_artifact("rejects.jsonl");
            // group by probe and carve a deterministic 1-in-5 holdout
            std::map<std::string, std::vector<FlowRecord>> by_probe;
            for (const auto& r : imported.partition.records) by_probe[r.probe_id].push_back(r);
            std::vector<FlowRecord> holdout_records;
            for (auto& [probe, records] : by_probe) {
                split_holdout(records, holdout_records, 5);
                partitions.push_back(make_partition(probe, std::move(records)));
            }
            holdout = make_partition("holdout", std::move(holdout_records));
        } else {
            partitions = generate_synthetic(derive_seed(plan.seed, "generate"), plan.generator,
                                            plan.n_per_probe);
            // holdout mixture = average of the probe mixtures
            std::array<double, kTrafficClassCount> mix{};
            for (const auto& [probe, m] : plan.generator.probe_mixtures) {
                for (int c = 0; c < kTrafficClassCount; ++c) mix[c] += m[c];
            }
            const auto n_probes = static_cast<double>(plan.generator.probe_mixtures.size());
            for (auto& w : mix) w /= n_probes;
            holdout = generate_partition(derive_seed(plan.seed, "holdout"), plan.generator,
                                         "holdout", mix, plan.holdout_n);
        }
        for (const auto& p : partitions) {
            write_flow_csv(p, (runner.out_dir / ("flows_" + p.probe_id + ".csv")).string());
            runner.record_artifact("flows_" + p.probe_id + ".csv");
        }
    });

    // --- featurize -----------------------------------------------------
    ok = ok && runner.stage("featurize", [&] {
        std::vector<FlowRecord> pooled;
        for (const auto& p : partitions) {
            per_probe.emplace(p.probe_id, featurize(p.records));
            pooled.insert(pooled.end(), p.records.begin(), p.records.end());
        }
        pooled_std = featurize(pooled).matrix;
    });

    // --- analytics -----------------------------------------------------
    ok = ok && runner.stage("analytics", [&] {
        const auto elbow_seed = derive_seed(plan.seed, "elbow");
        std::string curve_csv = "k,wcss\n";
        json elbow_json;
        if (plan.analytics.pooled_elbow) {
            auto elbow = elbow_select(pooled_std, plan.analytics.k_min, plan.analytics.k_max,
                                      elbow_seed);
            for (const auto& [k, w] : elbow.wcss_curve) {
                curve_csv += std::to_string(k) + "," + format_double(w) + "\n";
            }
            elbow_json = {{"mode", "pooled"}, {"chosen_k", elbow.chosen_k}};
        } else {
            json per = json::object();
            bool first = true;
            for (const auto& [probe, feats] : per_probe) {
                auto elbow = elbow_select(feats.matrix, plan.analytics.k_min,
                                          plan.analytics.k_max, derive_seed(elbow_seed, probe));
                per[probe] = elbow.chosen_k;
                if (first) {
                    for (const auto& [k, w] : elbow.wcss_curve) {
                        curve_csv += std::to_string(k) + "," + format_double(w) + "\n";
                    }
                    first = false;
                }
            }
            elbow_json = {{"mode", "per_probe"}, {"chosen_k", per}};
        }
        write_text_file((runner.out_dir / "wcss_curve.csv").string(), curve_csv);
        runner.record_artifact("wcss_curve.csv");

        std::map<std::string, std::vector<TopFeature>> tops;
        for (const auto& [probe, feats] : per_probe) {
            auto pca_result = pca(feats.matrix);
            tops[probe] = top_features(pca_result, plan.analytics.n_components, feats.names);
        }
        auto report = importance_frequency(tops);

        json per_dataset = json::object();
        for (const auto& [probe, list] : report.per_dataset) {
            json arr = json::array();
            for (const auto& t : list) {
                arr.push_back({{"component", t.component},
                               {"feature", t.feature_name},
                               {"abs_loading", t.abs_loading}});
            }
            per_dataset[probe] = arr;
        }
        json ranking = json::array();
        for (const auto& [name, count] : report.ranking(feature_names())) {
            ranking.push_back({{"feature", name}, {"count", count}});
        }
        json importance = {{"elbow", elbow_json},
                           {"per_dataset", per_dataset},
                           {"frequency", report.frequency},
                           {"ranking", ranking}};
        write_text_file((runner.out_dir / "importance.json").string(), importance.dump(2) + "\n");
        runner.record_artifact("importance.json");
    });

    // --- evaluate ------------------------------------------------------
    ok = ok && runner.stage("evaluate", [&] {
        for (const auto& p : partitions) {
            FeatureMatrix raw = raw_features(p.records);
            EvalConfig config = plan.eval;
            config.seed = derive_seed(plan.seed, "evaluate:" + p.probe_id);
            json out;
            out["probe"] = p.probe_id;
            json algos = json::object();
            for (Algorithm a : plan.algorithms) {
                auto report = evaluate(a, plan.hyperparams, raw.matrix, raw.labels, config);
                algos[to_string(a)] = report.to_json();
            }
            // gradient-boosting families stay out of scope; keep the rows
            // so comparisons with the full suite stay honest
            algos["XGBoost"] = "not implemented";
            algos["CatBoost"] = "not implemented";
            out["algorithms"] = algos;
            const std::string name = "eval_" + p.probe_id + ".json";
            write_text_file((runner.out_dir / name).string(), out.dump(2) + "\n");
            runner.record_artifact(name);
        }
    });

    // --- federate ------------------------------------------------------
    ok = ok && runner.stage("federate", [&] {
        FederationConfig config = plan.federation;
        config.seed = derive_seed(plan.seed, "federate");
        federation = run_federation(partitions, config, holdout);
        have_federation = true;

        std::string csv = "round,accuracy,loss\n";
        for (const auto& log : federation.logs) {
            csv += std::to_string(log.round) + "," + format_double(log.global_accuracy) + "," +
                   format_double(log.global_loss) + "\n";
        }
        write_text_file((runner.out_dir / "federation_rounds.csv").string(), csv);
        runner.record_artifact("federation_rounds.csv");

        DetectionModel model{federation.final_params, federation.scaler};
        write_text_file((runner.out_dir / "model.json").string(), model.to_json().dump(2) + "\n");
        runner.record_artifact("model.json");
    });

    // --- detect --------------------------------------------------------
    ok = ok && runner.stage("detect", [&] {
        if (plan.catalog_path.empty()) {
            throw Error(ErrorCode::InvalidConfig, "plan has no catalog for the scenario");
        }
        OrchestratorState state;
        state.market = load_catalog(plan.catalog_path);
        DetectionModel model{federation.final_params, federation.scaler};

        std::string actions_jsonl;
        std::vector<FlowRecord> pending;
        std::size_t inject_index = 0;
        for (const auto& cmd : plan.scenario.at("commands")) {
            const std::string op = cmd.at("op").get<std::string>();
            if (op == "inject") {
                const std::string probe = cmd.at("probe").get<std::string>();
                auto cls = traffic_class_from_string(cmd.at("class").get<std::string>());
                if (!cls) {
                    throw Error(ErrorCode::ParseError,
                                "unknown class '" + cmd.at("class").get<std::string>() + "'");
                }
                std::array<double, kTrafficClassCount> mix{};
                mix[static_cast<std::size_t>(*cls)] = 1.0;
                auto burst = generate_partition(
                    derive_seed(plan.seed, "inject", inject_index++), plan.generator, probe, mix,
                    cmd.at("count").get<std::size_t>());
                pending.insert(pending.end(), burst.records.begin(), burst.records.end());
            } else if (op == "detect") {
                auto actions = detect_and_act(model, pending, state, plan.detection_threshold);
                for (const auto& a : actions) actions_jsonl += a.to_json().dump() + "\n";
                pending.clear();
            } else {
                state = apply_command(state, Command::from_json(cmd));
            }
        }
        write_text_file((runner.out_dir / "actions.jsonl").string(), actions_jsonl);
        runner.record_artifact("actions.jsonl");
        write_text_file((runner.out_dir / "state.json").string(),
                        state_to_json(state).dump(2) + "\n");
        runner.record_artifact("state.json");
    });

    // --- manifest ------------------------------------------------------
    json stages_json = json::array();
    for (const auto& s : runner.stages) {
        json stage = {{"name", s.name}, {"status", s.status}};
        if (!s.error.empty()) stage["error"] = s.error;
        stages_json.push_back(stage);
    }
    json artifacts = json::object();
    for (const auto& [name, hash] : runner.artifact_hashes) {
        artifacts[name] = {{"fnv1a64", hash}};
    }
    json manifest = {{"tool_version", kToolVersion},
                     {"seed", plan.seed},
                     {"plan", plan.to_json()},
                     {"stages", stages_json},
                     {"artifacts", artifacts}};
    write_text_file((runner.out_dir / "manifest.json").string(), manifest.dump(2) + "\n");

    result.stages = runner.stages;
    result.ok = ok;
    if (!ok) {
        for (const auto& s : runner.stages) {
            if (s.status == "failed") {
                result.failed_stage = s.name;
                break;
            }
        }
    }
    return result;
}

std::vector<std::string> verify_manifest(const std::string& out_dir) {
    const fs::path dir(out_dir);
    json manifest = json::parse(read_text_file((dir / "manifest.json").string()));
    std::vector<std::string> mismatches;
    for (const auto& [name, meta] : manifest.at("artifacts").items()) {
        const fs::path path = dir / name;
        if (!fs::exists(path)) {
            mismatches.push_back(name + ": missing");
            continue;
        }
        if (hash_file_hex(path.string()) != meta.at("fnv1a64").get<std::string>()) {
            mismatches.push_back(name + ": hash mismatch");
        }
    }
    return mismatches;
}

} // namespace slicesim
