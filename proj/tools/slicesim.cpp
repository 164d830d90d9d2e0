// slicesim: network-slicing lifecycle simulator with embedded federated
// intrusion detection. Subcommands: run, slice, report.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "slicesim/error.hpp"
#include "slicesim/experiment.hpp"
#include "slicesim/orchestrator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slicesim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

int log_level() {
    const char* env = std::getenv("SLICESIM_LOG");
    if (!env) return 1;
    const std::string v(env);
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << msg << "\n";
}

void print_error_json(const Error& e) {
    json j = {{"error", {{"code", error_code_name(e.code())}, {"message", e.what()}}}};
    std::cout << j.dump() << "\n";
}

int classify(const Error& e) {
    switch (e.code()) {
        case ErrorCode::InvalidConfig:
        case ErrorCode::ParseError:
        case ErrorCode::IoError:
        case ErrorCode::MissingColumn:
        case ErrorCode::EmptyDataset:
        case ErrorCode::DuplicateId:
        case ErrorCode::UnknownSlice:
        case ErrorCode::UnknownProbe:
            return kExitData;
        default:
            return kExitInternal;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
    std::string plan_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::string catalog;
    std::string dataset;
    std::string column_map;
};

int cmd_run(const RunArgs& args) {
    ExperimentPlan plan = load_plan(args.plan_path);
    if (args.seed) plan.seed = *args.seed;
    if (!args.catalog.empty()) plan.catalog_path = args.catalog;
    if (!args.dataset.empty()) plan.dataset_csv = args.dataset;
    if (!args.column_map.empty()) {
        json cm = json::parse(read_file(args.column_map));
        plan.import_options.column_map.clear();
        for (const auto& [external, canonical] : cm.at("columns").items()) {
            plan.import_options.column_map[external] = canonical.get<std::string>();
        }
        plan.import_options.enforce_load_relation =
            cm.value("enforce_load_relation", plan.import_options.enforce_load_relation);
    }
    const std::string out_dir = args.out_dir.empty() ? plan.output_dir : args.out_dir;

    info("running experiment (seed " + std::to_string(plan.seed) + ") -> " + out_dir);
    auto result = run_experiment(plan, out_dir);
    for (const auto& s : result.stages) {
        info("  stage " + s.name + ": " + s.status + (s.error.empty() ? "" : " (" + s.error + ")"));
    }
    if (!result.ok) {
        json j = {{"error",
                   {{"code", "StageFailed"},
                    {"stage", result.failed_stage},
                    {"manifest", (fs::path(out_dir) / "manifest.json").string()}}}};
        std::cout << j.dump() << "\n";
        return kExitData;
    }
    std::cout << json({{"ok", true}, {"output_dir", out_dir}}).dump() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// slice

OrchestratorState load_state(const std::string& state_path) {
    return state_from_json(json::parse(read_file(state_path)));
}

void save_state(const OrchestratorState& state, const std::string& state_path) {
    std::ofstream out(state_path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + state_path + "'");
    out << state_to_json(state).dump(2) << "\n";
}

void print_slice(const Slice& slice) {
    std::cout << "slice " << slice.id << "\n";
    std::cout << "  state: " << to_string(slice.state)
              << (slice.quarantined ? " (quarantined)" : "") << "\n";
    std::cout << "  allocations:";
    if (slice.allocations.empty()) std::cout << " none";
    std::cout << "\n";
    for (const auto& a : slice.allocations) {
        std::cout << "    " << a.resource_id << " = " << a.amount << "\n";
    }
    std::cout << "  monitors:";
    for (const auto& m : slice.monitors) std::cout << " " << m;
    std::cout << "\n";
}

int cmd_slice_request(const std::string& state_path, const std::string& catalog,
                      const SliceRequest& request, const std::vector<std::string>& probes,
                      const std::string& policy) {
    OrchestratorState state;
    if (fs::exists(state_path)) {
        state = load_state(state_path);
    } else {
        if (catalog.empty()) {
            throw Error(ErrorCode::InvalidConfig,
                        "no state snapshot yet; --catalog is required to create one");
        }
        state.market = load_catalog(catalog);
    }
    if (!policy.empty()) state.policy = selection_policy_from_string(policy);

    state = prepare(state, request);
    if (state.slices.at(request.id).state == SliceState::Failed) {
        save_state(state, state_path);
        std::cout << "slice " << request.id << " failed during preparation\n";
        return kExitData;
    }
    state = commission(state, request.id);
    if (state.slices.at(request.id).state == SliceState::Failed) {
        save_state(state, state_path);
        std::cout << "slice " << request.id << " failed during commissioning\n";
        return kExitData;
    }
    state = instantiate(state, request.id, probes);
    save_state(state, state_path);
    print_slice(state.slices.at(request.id));
    return kExitOk;
}

int cmd_slice_status(const std::string& state_path, const std::string& slice_id) {
    auto state = load_state(state_path);
    auto it = state.slices.find(slice_id);
    if (it == state.slices.end()) throw Error(ErrorCode::UnknownSlice, slice_id);
    print_slice(it->second);
    return kExitOk;
}

int cmd_slice_decommission(const std::string& state_path, const std::string& slice_id) {
    auto state = load_state(state_path);
    if (!state.slices.count(slice_id)) throw Error(ErrorCode::UnknownSlice, slice_id);
    Directive d;
    d.type = DirectiveType::Decommission;
    state = supervise(state, slice_id, d);
    save_state(state, state_path);
    print_slice(state.slices.at(slice_id));
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const std::string& dir) {
    std::vector<std::string> missing;
    auto have = [&](const std::string& name) {
        if (fs::exists(fs::path(dir) / name)) return true;
        missing.push_back(name);
        return false;
    };

    bool any = false;
    std::cout << "=== experiment report: " << dir << " ===\n";

    if (have("importance.json")) {
        any = true;
        json imp = json::parse(read_file((fs::path(dir) / "importance.json").string()));
        std::cout << "\n-- clustering --\n";
        std::cout << "chosen k (" << imp["elbow"]["mode"].get<std::string>()
                  << "): " << imp["elbow"]["chosen_k"].dump() << "\n";
        std::cout << "\n-- top features by frequency --\n";
        std::string freq_csv = "feature,count\n";
        for (const auto& row : imp["ranking"]) {
            std::cout << "  " << row["feature"].get<std::string>() << ": " << row["count"]
                      << "\n";
            freq_csv += row["feature"].get<std::string>() + "," +
                        std::to_string(row["count"].get<int>()) + "\n";
        }
        std::ofstream((fs::path(dir) / "importance_frequency.csv").string()) << freq_csv;
    }

    if (have("wcss_curve.csv")) {
        any = true;
        std::cout << "\n(wcss_curve.csv is plot-ready)\n";
    }

    std::string eval_csv = "probe,algorithm,mean_accuracy,ci95_halfwidth\n";
    bool have_eval = false;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("eval_", 0) != 0 || entry.path().extension() != ".json") continue;
        have_eval = true;
        any = true;
        json ev = json::parse(read_file(entry.path().string()));
        const std::string probe = ev["probe"].get<std::string>();
        std::cout << "\n-- localized accuracy: " << probe << " --\n";
        for (const auto& [algo, report] : ev["algorithms"].items()) {
            if (report.is_string()) {
                std::cout << "  " << algo << ": " << report.get<std::string>() << "\n";
                continue;
            }
            const double acc = report["mean_accuracy"].get<double>();
            const double ci = report["ci95_halfwidth"].get<double>();
            std::cout << "  " << algo << ": " << acc << " +/- " << ci << "\n";
            eval_csv += probe + "," + algo + "," + std::to_string(acc) + "," +
                        std::to_string(ci) + "\n";
        }
    }
    if (have_eval) {
        std::ofstream((fs::path(dir) / "eval_summary.csv").string()) << eval_csv;
    }

    if (have("federation_rounds.csv")) {
        any = true;
        std::string csv = read_file((fs::path(dir) / "federation_rounds.csv").string());
        std::istringstream in(csv);
        std::string line, last;
        std::getline(in, line);  // header
        std::size_t rounds = 0;
        while (std::getline(in, line)) {
            if (!line.empty()) {
                last = line;
                ++rounds;
            }
        }
        std::cout << "\n-- federation --\n";
        std::cout << "rounds: " << rounds << "\n";
        std::cout << "final (round,accuracy,loss): " << last << "\n";
    } else {
        std::cout << "\n-- federation: absent --\n";
    }

    if (have("actions.jsonl")) {
        any = true;
        std::cout << "\n-- detection actions --\n";
        std::istringstream in(read_file((fs::path(dir) / "actions.jsonl").string()));
        std::string line;
        bool none = true;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            none = false;
            json a = json::parse(line);
            std::cout << "  " << a["action"].get<std::string>() << " " << a["slice"].get<std::string>()
                      << " (attack ratio " << a["attack_ratio"].get<double>() << ")\n";
        }
        if (none) std::cout << "  none\n";
    }

    if (!missing.empty()) {
        std::cout << "\n-- missing artifacts --\n";
        for (const auto& m : missing) std::cout << "  " << m << "\n";
    }
    if (!any) {
        std::cout << "no experiment artifacts found\n";
        return kExitData;
    }

    if (fs::exists(fs::path(dir) / "manifest.json")) {
        auto mismatches = verify_manifest(dir);
        if (mismatches.empty()) {
            std::cout << "\nmanifest hashes: all verified\n";
        } else {
            std::cout << "\nmanifest hash mismatches:\n";
            for (const auto& m : mismatches) std::cout << "  " << m << "\n";
            return kExitData;
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"network-slicing orchestration simulator with federated intrusion detection"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "run an experiment plan end to end");
    run->add_option("--plan", run_args.plan_path, "experiment plan JSON")->required();
    run->add_option("--out", run_args.out_dir, "output directory (overrides plan)");
    std::uint64_t seed_value = 0;
    auto* seed_opt = run->add_option("--seed", seed_value, "seed override");
    run->add_option("--catalog", run_args.catalog, "catalog CSV override");
    run->add_option("--dataset", run_args.dataset, "flow CSV (real-data mode)");
    run->add_option("--column-map", run_args.column_map, "column map JSON for --dataset");

    auto* slice = app.add_subcommand("slice", "drive slices against a state snapshot");
    slice->require_subcommand(1);
    std::string state_path, catalog, slice_id, tenant, policy, probes_csv;
    std::vector<std::string> demand_args;
    double max_latency = 50.0, min_throughput = 1.0;

    auto* request = slice->add_subcommand("request", "prepare, commission and activate a slice");
    request->add_option("--state", state_path, "state snapshot file")->required();
    request->add_option("--catalog", catalog, "catalog CSV (used when creating the snapshot)");
    request->add_option("--id", slice_id, "slice/request id")->required();
    request->add_option("--tenant", tenant, "tenant id");
    request->add_option("--demand", demand_args, "demand as kind:amount (repeatable)")
        ->required();
    request->add_option("--max-latency", max_latency, "QoS: max latency (ms)");
    request->add_option("--min-throughput", min_throughput, "QoS: min throughput");
    request->add_option("--probes", probes_csv, "comma-separated probe ids");
    request->add_option("--policy", policy, "MinCost | MaxResidual | CleanEnergyFirst");

    auto* status = slice->add_subcommand("status", "print lifecycle state and allocations");
    status->add_option("--state", state_path, "state snapshot file")->required();
    status->add_option("id", slice_id, "slice id")->required();

    auto* decommission = slice->add_subcommand("decommission", "decommission and release");
    decommission->add_option("--state", state_path, "state snapshot file")->required();
    decommission->add_option("id", slice_id, "slice id")->required();

    std::string report_dir;
    auto* report = app.add_subcommand("report", "summarize a results directory");
    report->add_option("dir", report_dir, "results directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) {
            if (*seed_opt) run_args.seed = seed_value;
            return cmd_run(run_args);
        }
        if (*request) {
            SliceRequest r;
            r.id = slice_id;
            r.tenant = tenant;
            r.qos = {max_latency, min_throughput};
            for (const auto& d : demand_args) {
                const auto colon = d.find(':');
                if (colon == std::string::npos) {
                    throw Error(ErrorCode::InvalidConfig, "demand must be kind:amount, got '" + d + "'");
                }
                r.demands.push_back({resource_kind_from_string(d.substr(0, colon)),
                                     std::stod(d.substr(colon + 1))});
            }
            std::vector<std::string> probes;
            std::stringstream ss(probes_csv);
            std::string p;
            while (std::getline(ss, p, ',')) {
                if (!p.empty()) probes.push_back(p);
            }
            return cmd_slice_request(state_path, catalog, r, probes, policy);
        }
        if (*status) return cmd_slice_status(state_path, slice_id);
        if (*decommission) return cmd_slice_decommission(state_path, slice_id);
        if (*report) return cmd_report(report_dir);
    } catch (const Error& e) {
        print_error_json(e);
        return classify(e);
    } catch (const std::exception& e) {
        json j = {{"error", {{"code", "Internal"}, {"message", e.what()}}}};
        std::cout << j.dump() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
