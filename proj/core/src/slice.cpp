#include "slicesim/slice.hpp"

#include "slicesim/error.hpp"

namespace slicesim {

const char* to_string(ResourceKind kind) {
    switch (kind) {
        case ResourceKind::Compute: return "compute";
        case ResourceKind::Link: return "link";
        case ResourceKind::Radio: return "radio";
        case ResourceKind::Iot: return "iot";
    }
    return "?";
}

const char* to_string(EnergyClass ec) {
    switch (ec) {
        case EnergyClass::Clean: return "clean";
        case EnergyClass::Mixed: return "mixed";
        case EnergyClass::Dirty: return "dirty";
    }
    return "?";
}

ResourceKind resource_kind_from_string(const std::string& s) {
    if (s == "compute") return ResourceKind::Compute;
    if (s == "link") return ResourceKind::Link;
    if (s == "radio") return ResourceKind::Radio;
    if (s == "iot") return ResourceKind::Iot;
    throw Error(ErrorCode::ParseError, "unknown resource kind '" + s + "'");
}

EnergyClass energy_class_from_string(const std::string& s) {
    if (s == "clean") return EnergyClass::Clean;
    if (s == "mixed") return EnergyClass::Mixed;
    if (s == "dirty") return EnergyClass::Dirty;
    throw Error(ErrorCode::ParseError, "unknown energy class '" + s + "'");
}

const char* to_string(SliceState s) {
    switch (s) {
        case SliceState::Requested: return "Requested";
        case SliceState::Prepared: return "Prepared";
        case SliceState::Commissioned: return "Commissioned";
        case SliceState::Operational: return "Operational";
        case SliceState::Decommissioned: return "Decommissioned";
        case SliceState::Failed: return "Failed";
    }
    return "?";
}

const char* to_string(LifecycleEvent e) {
    switch (e) {
        case LifecycleEvent::PreparationDone: return "PreparationDone";
        case LifecycleEvent::CommissioningDone: return "CommissioningDone";
        case LifecycleEvent::Activated: return "Activated";
        case LifecycleEvent::Decommission: return "Decommission";
        case LifecycleEvent::Fault: return "Fault";
    }
    return "?";
}

Slice advance_lifecycle(const Slice& slice, LifecycleEvent event) {
    if (event == LifecycleEvent::Fault) {
        if (is_terminal(slice.state)) {
            throw Error(ErrorCode::IllegalTransition,
                        std::string(to_string(slice.state)) + " absorbs " + to_string(event));
        }
        Slice next = slice;
        next.state = SliceState::Failed;
        return next;
    }

    bool legal = false;
    SliceState target = slice.state;
    switch (slice.state) {
        case SliceState::Requested:
            legal = event == LifecycleEvent::PreparationDone;
            target = SliceState::Prepared;
            break;
        case SliceState::Prepared:
            legal = event == LifecycleEvent::CommissioningDone;
            target = SliceState::Commissioned;
            break;
        case SliceState::Commissioned:
            legal = event == LifecycleEvent::Activated;
            target = SliceState::Operational;
            break;
        case SliceState::Operational:
            legal = event == LifecycleEvent::Decommission;
            target = SliceState::Decommissioned;
            break;
        case SliceState::Decommissioned:
        case SliceState::Failed:
            break;
    }
    if (!legal) {
        throw Error(ErrorCode::IllegalTransition,
                    std::string("(") + to_string(slice.state) + ", " + to_string(event) + ")");
    }
    Slice next = slice;
    next.state = target;
    return next;
}

} // namespace slicesim
