#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicesim/fedsec.hpp"
#include "slicesim/learn.hpp"
#include "slicesim/telemetry.hpp"

namespace slicesim {

inline constexpr const char* kToolVersion = "0.1.0";

struct AnalyticsConfig {
    int k_min = 1;
    int k_max = 15;
    int n_components = 3;
    bool pooled_elbow = true;  // pool the three probes before the elbow scan
};

struct ExperimentPlan {
    std::uint64_t seed = 0;
    std::string catalog_path;
    GeneratorSpec generator;
    std::size_t n_per_probe = 1500;
    std::size_t holdout_n = 900;
    AnalyticsConfig analytics;
    EvalConfig eval;
    std::vector<Algorithm> algorithms;
    Hyperparams hyperparams;
    FederationConfig federation;
    double detection_threshold = 0.5;
    nlohmann::json scenario;  // ordered command list for the detection stage
    std::string output_dir = "out";

    // real-data pass-through; replaces the generator when set
    std::string dataset_csv;
    ImportOptions import_options;

    nlohmann::json to_json() const;
};

/// Loads and validates a plan file. Relative paths inside the plan are
/// resolved against the plan file's directory; referenced files must exist.
ExperimentPlan load_plan(const std::string& path);

ExperimentPlan default_plan();

struct StageStatus {
    std::string name;
    std::string status;  // "ok" | "failed"
    std::string error;
};

struct ExperimentResult {
    std::vector<StageStatus> stages;
    bool ok = false;
    std::string failed_stage;
};

/// Runs generate -> featurize -> analytics -> evaluate -> federate -> detect,
/// writing every artifact plus a manifest with content hashes into out_dir.
ExperimentResult run_experiment(const ExperimentPlan& plan, const std::string& out_dir);

/// Recomputes artifact hashes against the manifest; returns mismatches.
std::vector<std::string> verify_manifest(const std::string& out_dir);

std::string hash_file_hex(const std::string& path);

} // namespace slicesim
