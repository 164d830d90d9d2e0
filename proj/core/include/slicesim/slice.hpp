#pragma once

#include <string>
#include <vector>

namespace slicesim {

enum class ResourceKind { Compute, Link, Radio, Iot };
enum class EnergyClass { Clean, Mixed, Dirty };

const char* to_string(ResourceKind kind);
const char* to_string(EnergyClass ec);
ResourceKind resource_kind_from_string(const std::string& s);
EnergyClass energy_class_from_string(const std::string& s);

struct ResourceOffer {
    std::string id;
    std::string domain_id;
    ResourceKind kind = ResourceKind::Compute;
    double capacity = 0.0;
    double unit_cost = 0.0;
    EnergyClass energy_class = EnergyClass::Mixed;
};

struct Demand {
    ResourceKind kind = ResourceKind::Compute;
    double amount = 0.0;
};

struct QosSpec {
    double max_latency_ms = 0.0;
    double min_throughput = 0.0;
};

struct SliceRequest {
    std::string id;
    std::vector<Demand> demands;
    QosSpec qos;
    std::string tenant;
};

struct Allocation {
    std::string resource_id;
    double amount = 0.0;
};

/// Lifecycle phases: preparation, commissioning, operation, decommissioning,
/// plus a terminal failure state so supervision faults have somewhere to go.
enum class SliceState { Requested, Prepared, Commissioned, Operational, Decommissioned, Failed };

enum class LifecycleEvent { PreparationDone, CommissioningDone, Activated, Decommission, Fault };

const char* to_string(SliceState s);
const char* to_string(LifecycleEvent e);

struct Slice {
    std::string id;
    std::string request_id;
    std::vector<Allocation> allocations;
    SliceState state = SliceState::Requested;
    std::vector<std::string> monitors;
    bool quarantined = false;
};

inline bool is_terminal(SliceState s) {
    return s == SliceState::Decommissioned || s == SliceState::Failed;
}

/// Moves a slice along the legal lifecycle edges; throws IllegalTransition
/// (leaving the input untouched) for every other (state, event) pair.
Slice advance_lifecycle(const Slice& slice, LifecycleEvent event);

} // namespace slicesim
