#include "slicesim/telemetry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "slicesim/error.hpp"

namespace slicesim {

using nlohmann::json;

const char* to_string(Proto p) {
    switch (p) {
        case Proto::Tcp: return "tcp";
        case Proto::Udp: return "udp";
        case Proto::Icmp: return "icmp";
        case Proto::Other: return "other";
    }
    return "?";
}

const char* to_string(TrafficClass c) {
    switch (c) {
        case TrafficClass::HarmlessSsh: return "HarmlessSsh";
        case TrafficClass::BadSsh: return "BadSsh";
        case TrafficClass::MisconfiguredIp: return "MisconfiguredIp";
        case TrafficClass::DuplicatedIp: return "DuplicatedIp";
        case TrafficClass::PortScan: return "PortScan";
        case TrafficClass::Mitm: return "Mitm";
    }
    return "?";
}

std::optional<Proto> proto_from_string(const std::string& s) {
    for (Proto p : {Proto::Tcp, Proto::Udp, Proto::Icmp, Proto::Other}) {
        if (s == to_string(p)) return p;
    }
    return std::nullopt;
}

std::optional<TrafficClass> traffic_class_from_string(const std::string& s) {
    for (int i = 0; i < kTrafficClassCount; ++i) {
        auto c = static_cast<TrafficClass>(i);
        if (s == to_string(c)) return c;
    }
    return std::nullopt;
}

DatasetPartition make_partition(std::string probe_id, std::vector<FlowRecord> records) {
    DatasetPartition p;
    p.probe_id = std::move(probe_id);
    p.records = std::move(records);
    for (const auto& r : p.records) ++p.class_histogram[r.label];
    return p;
}

GeneratorSpec GeneratorSpec::defaults() {
    GeneratorSpec spec;
    spec.probe_mixtures["bottom"] = {0.56, 0.06, 0.06, 0.05, 0.21, 0.06};
    spec.probe_mixtures["left"] = {0.11, 0.37, 0.20, 0.08, 0.08, 0.16};
    spec.probe_mixtures["right"] = {0.15, 0.13, 0.09, 0.26, 0.08, 0.29};

    auto& hs = spec.profiles[static_cast<int>(TrafficClass::HarmlessSsh)];
    hs = {2.0, 0.30, 5.0e4, 0.06, 2.0e5, 0.05, 20.0, 30.0, 0.55, {0.96, 0.02, 0.01, 0.01}, 50};
    auto& bad = spec.profiles[static_cast<int>(TrafficClass::BadSsh)];
    bad = {2.0, 0.30, 3.5e5, 0.08, 1.2e4, 0.08, 40.0, 8.0, 0.55, {0.96, 0.02, 0.01, 0.01}, 50};
    auto& mis = spec.profiles[static_cast<int>(TrafficClass::MisconfiguredIp)];
    mis = {2.0, 0.30, 1.0e4, 0.10, 1.5e3, 0.10, 8.0, 3.0, 0.55, {0.06, 0.15, 0.75, 0.04}, 50};
    auto& dup = spec.profiles[static_cast<int>(TrafficClass::DuplicatedIp)];
    dup = {2.0, 0.30, 3.0e4, 0.10, 6.0e3, 0.10, 12.0, 14.0, 0.55, {0.10, 0.80, 0.06, 0.04}, 2};
    auto& ps = spec.profiles[static_cast<int>(TrafficClass::PortScan)];
    ps = {2.0, 0.30, 1.5e3, 0.10, 6.0e3, 0.10, 5.0, 3.0, 0.55, {0.96, 0.02, 0.02, 0.00}, 50};
    auto& mitm = spec.profiles[static_cast<int>(TrafficClass::Mitm)];
    mitm = {2.0, 0.30, 8.0e4, 0.05, 8.0e4, 0.05, 25.0, 25.0, 0.55, {0.50, 0.02, 0.02, 0.46}, 50};
    return spec;
}

json GeneratorSpec::to_json() const {
    json mixtures = json::object();
    for (const auto& [probe, mix] : probe_mixtures) {
        json m = json::object();
        for (int c = 0; c < kTrafficClassCount; ++c) {
            m[to_string(static_cast<TrafficClass>(c))] = mix[c];
        }
        mixtures[probe] = m;
    }
    json profile_obj = json::object();
    for (int c = 0; c < kTrafficClassCount; ++c) {
        const auto& p = profiles[c];
        profile_obj[to_string(static_cast<TrafficClass>(c))] = {
            {"duration_median", p.duration_median},
            {"duration_sigma", p.duration_sigma},
            {"s_load_median", p.s_load_median},
            {"s_load_sigma", p.s_load_sigma},
            {"r_load_median", p.r_load_median},
            {"r_load_sigma", p.r_load_sigma},
            {"s_pkts_median", p.s_pkts_median},
            {"r_pkts_median", p.r_pkts_median},
            {"pkts_sigma", p.pkts_sigma},
            {"proto_mix",
             {{"tcp", p.proto_mix[0]}, {"udp", p.proto_mix[1]}, {"icmp", p.proto_mix[2]},
              {"other", p.proto_mix[3]}}},
            {"endpoint_pool", p.endpoint_pool},
        };
    }
    return {{"probe_mixtures", mixtures}, {"class_profiles", profile_obj}, {"horizon_s", horizon_s}};
}

GeneratorSpec GeneratorSpec::from_json(const json& j) {
    GeneratorSpec spec;
    spec.horizon_s = j.value("horizon_s", 5400.0);
    for (const auto& [probe, m] : j.at("probe_mixtures").items()) {
        std::array<double, kTrafficClassCount> mix{};
        for (int c = 0; c < kTrafficClassCount; ++c) {
            mix[c] = m.value(to_string(static_cast<TrafficClass>(c)), 0.0);
        }
        spec.probe_mixtures[probe] = mix;
    }
    for (const auto& [name, p] : j.at("class_profiles").items()) {
        auto cls = traffic_class_from_string(name);
        if (!cls) throw Error(ErrorCode::ParseError, "unknown traffic class '" + name + "'");
        ClassProfile& prof = spec.profiles[static_cast<int>(*cls)];
        prof.duration_median = p.at("duration_median").get<double>();
        prof.duration_sigma = p.at("duration_sigma").get<double>();
        prof.s_load_median = p.at("s_load_median").get<double>();
        prof.s_load_sigma = p.at("s_load_sigma").get<double>();
        prof.r_load_median = p.at("r_load_median").get<double>();
        prof.r_load_sigma = p.at("r_load_sigma").get<double>();
        prof.s_pkts_median = p.at("s_pkts_median").get<double>();
        prof.r_pkts_median = p.at("r_pkts_median").get<double>();
        prof.pkts_sigma = p.at("pkts_sigma").get<double>();
        const auto& mix = p.at("proto_mix");
        prof.proto_mix = {mix.value("tcp", 0.0), mix.value("udp", 0.0), mix.value("icmp", 0.0),
                          mix.value("other", 0.0)};
        prof.endpoint_pool = p.value("endpoint_pool", 50);
    }
    return spec;
}

namespace {

void check_mixture(const std::array<double, kTrafficClassCount>& mix, const std::string& probe) {
    double sum = 0.0;
    for (double w : mix) {
        if (w < 0.0) throw Error(ErrorCode::InvalidMixture, probe + ": negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidMixture,
                    probe + ": mixture sums to " + std::to_string(sum));
    }
}

FlowRecord draw_record(Rng& rng, const std::string& probe, const GeneratorSpec& spec,
                       TrafficClass cls) {
    const ClassProfile& p = spec.profiles[static_cast<int>(cls)];
    FlowRecord r;
    r.probe_id = probe;
    r.label = cls;
    r.timestamp_s = rng.uniform(0.0, spec.horizon_s);
    r.duration_s = rng.lognormal(std::log(p.duration_median), p.duration_sigma);

    // target loads, then bytes, then loads recomputed so the relation is exact
    const double s_target = rng.lognormal(std::log(p.s_load_median), p.s_load_sigma);
    const double r_target = rng.lognormal(std::log(p.r_load_median), p.r_load_sigma);
    r.s_bytes = std::max<std::uint64_t>(1, std::llround(s_target * r.duration_s / 8.0));
    r.r_bytes = std::max<std::uint64_t>(1, std::llround(r_target * r.duration_s / 8.0));
    r.s_load = 8.0 * static_cast<double>(r.s_bytes) / r.duration_s;
    r.r_load = 8.0 * static_cast<double>(r.r_bytes) / r.duration_s;

    r.s_pkts = std::max<std::uint64_t>(
        1, std::llround(rng.lognormal(std::log(p.s_pkts_median), p.pkts_sigma)));
    r.r_pkts = std::max<std::uint64_t>(
        1, std::llround(rng.lognormal(std::log(p.r_pkts_median), p.pkts_sigma)));

    std::vector<double> mix(p.proto_mix.begin(), p.proto_mix.end());
    r.proto = static_cast<Proto>(rng.categorical(mix));

    const int pool = std::max(1, p.endpoint_pool);
    const char* prefix = (cls == TrafficClass::DuplicatedIp) ? "dup-host-" : nullptr;
    if (prefix) {
        r.src = prefix + std::to_string(rng.below(pool));
        r.dst = prefix + std::to_string(rng.below(pool));
    } else {
        r.src = "host-" + probe + "-" + std::to_string(rng.below(pool));
        r.dst = "host-" + probe + "-" + std::to_string(rng.below(pool));
    }
    return r;
}

} // namespace

DatasetPartition generate_partition(std::uint64_t seed, const GeneratorSpec& spec,
                                    const std::string& probe_id,
                                    const std::array<double, kTrafficClassCount>& mixture,
                                    std::size_t n) {
    if (n < 1) throw Error(ErrorCode::InvalidConfig, "n must be >= 1");
    check_mixture(mixture, probe_id);
    Rng rng(derive_seed(seed, "telemetry:" + probe_id));
    std::vector<double> weights(mixture.begin(), mixture.end());
    std::vector<FlowRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto cls = static_cast<TrafficClass>(rng.categorical(weights));
        records.push_back(draw_record(rng, probe_id, spec, cls));
    }
    std::sort(records.begin(), records.end(),
              [](const FlowRecord& a, const FlowRecord& b) { return a.timestamp_s < b.timestamp_s; });
    return make_partition(probe_id, std::move(records));
}

std::vector<DatasetPartition> generate_synthetic(std::uint64_t seed, const GeneratorSpec& spec,
                                                 std::size_t n_per_probe) {
    for (const auto& [probe, mix] : spec.probe_mixtures) check_mixture(mix, probe);
    std::vector<DatasetPartition> out;
    for (const auto& [probe, mix] : spec.probe_mixtures) {
        out.push_back(generate_partition(seed, spec, probe, mix, n_per_probe));
    }
    return out;
}

namespace {

const std::vector<std::string> kCanonicalColumns = {
    "probe_id", "timestamp_s", "duration_s", "src", "dst", "proto",
    "s_load", "r_load", "s_pkts", "r_pkts", "s_bytes", "r_bytes", "label"};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::optional<double> parse_double_opt(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<std::uint64_t> parse_u64_opt(const std::string& s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

// shortest round-trip formatting, locale independent
std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

} // namespace

ImportResult parse_flow_csv(const std::string& text, const ImportOptions& options) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::EmptyDataset, "no header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = split_csv(line);
    // apply column_map: external name -> canonical name
    for (auto& h : header) {
        auto it = options.column_map.find(h);
        if (it != options.column_map.end()) h = it->second;
    }
    std::map<std::string, int> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = static_cast<int>(i);
    for (const auto& name : kCanonicalColumns) {
        if (!col.count(name)) throw Error(ErrorCode::MissingColumn, name);
    }

    ImportResult result;
    std::vector<FlowRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != header.size()) {
            result.rejects.push_back({line_no, "field count mismatch"});
            continue;
        }
        auto get = [&](const std::string& name) -> const std::string& {
            return fields[col.at(name)];
        };

        FlowRecord r;
        r.probe_id = get("probe_id");
        r.src = get("src");
        r.dst = get("dst");

        auto ts = parse_double_opt(get("timestamp_s"));
        auto dur = parse_double_opt(get("duration_s"));
        auto sl = parse_double_opt(get("s_load"));
        auto rl = parse_double_opt(get("r_load"));
        auto sp = parse_u64_opt(get("s_pkts"));
        auto rp = parse_u64_opt(get("r_pkts"));
        auto sb = parse_u64_opt(get("s_bytes"));
        auto rb = parse_u64_opt(get("r_bytes"));
        if (!ts || !dur || !sl || !rl || !sp || !rp || !sb || !rb) {
            result.rejects.push_back({line_no, "unparseable numeric field"});
            continue;
        }
        auto proto = proto_from_string(get("proto"));
        if (!proto) {
            result.rejects.push_back({line_no, "unknown proto '" + get("proto") + "'"});
            continue;
        }
        auto label = traffic_class_from_string(get("label"));
        if (!label) {
            result.rejects.push_back({line_no, "unknown label '" + get("label") + "'"});
            continue;
        }
        if (*ts < 0.0) {
            result.rejects.push_back({line_no, "negative timestamp"});
            continue;
        }
        if (*dur <= 0.0) {
            result.rejects.push_back({line_no, "duration must be positive"});
            continue;
        }
        if (*sl < 0.0 || *rl < 0.0) {
            result.rejects.push_back({line_no, "negative load"});
            continue;
        }
        if (options.enforce_load_relation) {
            const double s_expect = 8.0 * static_cast<double>(*sb) / *dur;
            const double r_expect = 8.0 * static_cast<double>(*rb) / *dur;
            if (std::abs(*sl - s_expect) > 0.01 * std::max(1.0, s_expect) ||
                std::abs(*rl - r_expect) > 0.01 * std::max(1.0, r_expect)) {
                result.rejects.push_back({line_no, "load does not match 8*bytes/duration"});
                continue;
            }
        }
        r.timestamp_s = *ts;
        r.duration_s = *dur;
        r.s_load = *sl;
        r.r_load = *rl;
        r.s_pkts = *sp;
        r.r_pkts = *rp;
        r.s_bytes = *sb;
        r.r_bytes = *rb;
        r.proto = *proto;
        r.label = *label;
        records.push_back(std::move(r));
    }

    if (records.empty()) {
        throw Error(ErrorCode::EmptyDataset,
                    "no valid rows (" + std::to_string(result.rejects.size()) + " rejected)");
    }
    result.partition = make_partition(options.probe_id, std::move(records));
    return result;
}

ImportResult import_flow_csv(const std::string& path, const ImportOptions& options) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open dataset '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_flow_csv(buf.str(), options);
}

std::string export_flow_csv(const DatasetPartition& partition) {
    std::string out;
    for (std::size_t i = 0; i < kCanonicalColumns.size(); ++i) {
        if (i) out += ',';
        out += kCanonicalColumns[i];
    }
    out += '\n';
    for (const auto& r : partition.records) {
        out += r.probe_id;
        out += ',' + format_double(r.timestamp_s);
        out += ',' + format_double(r.duration_s);
        out += ',' + r.src;
        out += ',' + r.dst;
        out += ',';
        out += to_string(r.proto);
        out += ',' + format_double(r.s_load);
        out += ',' + format_double(r.r_load);
        out += ',' + std::to_string(r.s_pkts);
        out += ',' + std::to_string(r.r_pkts);
        out += ',' + std::to_string(r.s_bytes);
        out += ',' + std::to_string(r.r_bytes);
        out += ',';
        out += to_string(r.label);
        out += '\n';
    }
    return out;
}

void write_flow_csv(const DatasetPartition& partition, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out << export_flow_csv(partition);
}

std::string rejects_to_jsonl(const std::vector<RejectedRow>& rejects) {
    std::string out;
    for (const auto& r : rejects) {
        json j = {{"line", r.line}, {"reason", r.reason}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

BatchStream::BatchStream(std::shared_ptr<const std::vector<FlowRecord>> records,
                         std::size_t batch_size)
    : records_(std::move(records)), batch_size_(batch_size) {
    if (batch_size_ < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be >= 1");
}

std::optional<std::span<const FlowRecord>> BatchStream::next() {
    if (cursor_ >= records_->size()) return std::nullopt;
    const std::size_t count = std::min(batch_size_, records_->size() - cursor_);
    std::span<const FlowRecord> batch(records_->data() + cursor_, count);
    cursor_ += count;
    return batch;
}

std::vector<std::vector<FlowRecord>> stream_batches(const DatasetPartition& partition,
                                                    std::size_t batch_size) {
    auto shared = std::make_shared<const std::vector<FlowRecord>>(partition.records);
    BatchStream stream(shared, batch_size);
    std::vector<std::vector<FlowRecord>> out;
    while (auto batch = stream.next()) {
        out.emplace_back(batch->begin(), batch->end());
    }
    return out;
}

} // namespace slicesim
