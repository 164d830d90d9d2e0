#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicesim/rng.hpp"

namespace slicesim {

enum class Proto { Tcp, Udp, Icmp, Other };
constexpr int kProtoCount = 4;

enum class TrafficClass { HarmlessSsh, BadSsh, MisconfiguredIp, DuplicatedIp, PortScan, Mitm };
constexpr int kTrafficClassCount = 6;

const char* to_string(Proto p);
const char* to_string(TrafficClass c);
std::optional<Proto> proto_from_string(const std::string& s);
std::optional<TrafficClass> traffic_class_from_string(const std::string& s);

/// One monitored flow; the unit of all learning. Loads are bits/s and obey
/// load = 8 * bytes / duration (exact from the generator, within 1% from
/// importers unless relaxed).
struct FlowRecord {
    std::string probe_id;
    double timestamp_s = 0.0;
    double duration_s = 0.0;
    std::string src;
    std::string dst;
    Proto proto = Proto::Tcp;
    double s_load = 0.0;
    double r_load = 0.0;
    std::uint64_t s_pkts = 0;
    std::uint64_t r_pkts = 0;
    std::uint64_t s_bytes = 0;
    std::uint64_t r_bytes = 0;
    TrafficClass label = TrafficClass::HarmlessSsh;
};

struct DatasetPartition {
    std::string probe_id;
    std::vector<FlowRecord> records;
    std::map<TrafficClass, std::size_t> class_histogram;
};

DatasetPartition make_partition(std::string probe_id, std::vector<FlowRecord> records);

/// Per-class feature distributions. Loads and packet counts are log-normal
/// with class-specific medians; bytes follow from load * duration / 8, so the
/// load/byte/duration relation holds exactly.
struct ClassProfile {
    double duration_median = 2.0;
    double duration_sigma = 0.30;
    double s_load_median = 1.0e4;
    double s_load_sigma = 0.10;
    double r_load_median = 1.0e4;
    double r_load_sigma = 0.10;
    double s_pkts_median = 10.0;
    double r_pkts_median = 10.0;
    double pkts_sigma = 0.55;
    std::array<double, kProtoCount> proto_mix = {1.0, 0.0, 0.0, 0.0};
    int endpoint_pool = 50;  // DuplicatedIp uses a tiny pool so endpoints collide
};

struct GeneratorSpec {
    std::map<std::string, std::array<double, kTrafficClassCount>> probe_mixtures;
    std::array<ClassProfile, kTrafficClassCount> profiles;
    double horizon_s = 5400.0;  // timestamps drawn in [0, horizon)

    static GeneratorSpec defaults();
    nlohmann::json to_json() const;
    static GeneratorSpec from_json(const nlohmann::json& j);
};

/// Deterministic synthetic partitions, one per probe in the spec, probes in
/// sorted order. Throws InvalidMixture if a mixture does not sum to 1.
std::vector<DatasetPartition> generate_synthetic(std::uint64_t seed, const GeneratorSpec& spec,
                                                 std::size_t n_per_probe);

/// Single partition with an explicit mixture (holdout splits, scenarios).
DatasetPartition generate_partition(std::uint64_t seed, const GeneratorSpec& spec,
                                    const std::string& probe_id,
                                    const std::array<double, kTrafficClassCount>& mixture,
                                    std::size_t n);

struct RejectedRow {
    int line = 0;
    std::string reason;
};

struct ImportResult {
    DatasetPartition partition;
    std::vector<RejectedRow> rejects;
};

struct ImportOptions {
    // external column name -> canonical field name; identity when empty
    std::map<std::string, std::string> column_map;
    bool enforce_load_relation = true;  // |load - 8*bytes/dur| <= 1% relative
    std::string probe_id = "imported";
};

ImportResult import_flow_csv(const std::string& path, const ImportOptions& options);
ImportResult parse_flow_csv(const std::string& text, const ImportOptions& options);
std::string export_flow_csv(const DatasetPartition& partition);
void write_flow_csv(const DatasetPartition& partition, const std::string& path);
std::string rejects_to_jsonl(const std::vector<RejectedRow>& rejects);

/// Order-preserving batch view; the concatenation of all batches equals the
/// input. Several streams over one partition give independent cursors.
class BatchStream {
public:
    BatchStream(std::shared_ptr<const std::vector<FlowRecord>> records, std::size_t batch_size);
    std::optional<std::span<const FlowRecord>> next();
    void reset() { cursor_ = 0; }

private:
    std::shared_ptr<const std::vector<FlowRecord>> records_;
    std::size_t batch_size_;
    std::size_t cursor_ = 0;
};

std::vector<std::vector<FlowRecord>> stream_batches(const DatasetPartition& partition,
                                                    std::size_t batch_size);

} // namespace slicesim
