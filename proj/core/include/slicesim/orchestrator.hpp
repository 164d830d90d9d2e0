#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicesim/marketplace.hpp"
#include "slicesim/slice.hpp"

namespace slicesim {

enum class DirectiveType { ScaleUp, ScaleDown, Quarantine, Decommission };

const char* to_string(DirectiveType t);
DirectiveType directive_type_from_string(const std::string& s);

struct Directive {
    DirectiveType type = DirectiveType::Quarantine;
    ResourceKind kind = ResourceKind::Compute;  // ScaleUp / ScaleDown only
    double amount = 0.0;
};

enum class CommandType { SubmitRequest, Commission, Instantiate, Supervise, AdvanceTime };

const char* to_string(CommandType t);

/// One replayable orchestrator input. Everything a command needs is inside
/// it, so re-applying a logged sequence reproduces the state exactly.
struct Command {
    CommandType type = CommandType::AdvanceTime;
    SliceRequest request;             // SubmitRequest
    std::string slice_id;             // Commission / Instantiate / Supervise
    std::vector<std::string> probes;  // Instantiate
    Directive directive;              // Supervise
    double dt = 0.0;                  // AdvanceTime

    nlohmann::json to_json() const;
    static Command from_json(const nlohmann::json& j);
};

struct EventRecord {
    std::uint64_t seq = 0;
    double time = 0.0;
    Command command;
    std::string outcome;
};

/// Owned by a single-writer event loop; all mutation goes through apply().
struct OrchestratorState {
    Marketplace market;
    std::map<std::string, Slice> slices;
    std::map<std::string, std::vector<Allocation>> pending_picks;  // Prepared, not yet reserved
    std::map<std::string, SliceRequest> requests;
    std::vector<EventRecord> event_log;
    double now = 0.0;
    std::set<std::string> known_probes = {"bottom", "left", "right"};
    SelectionPolicy policy = SelectionPolicy::MinCost;
};

/// Preparation phase: select (but do not reserve) resources. Infeasible
/// requests leave a Failed slice behind rather than throwing.
OrchestratorState prepare(const OrchestratorState& state, const SliceRequest& request);

/// Commissioning phase: reserve the recorded pick atomically. On contention
/// the pick is re-selected once; a second failure fails the slice.
OrchestratorState commission(const OrchestratorState& state, const std::string& slice_id);

/// Instantiation: attach monitoring probes and activate.
OrchestratorState instantiate(const OrchestratorState& state, const std::string& slice_id,
                              const std::vector<std::string>& probes);

/// Operation phase reconfiguration and security actions.
OrchestratorState supervise(const OrchestratorState& state, const std::string& slice_id,
                            const Directive& directive);

OrchestratorState advance_time(const OrchestratorState& state, double dt);

/// Dispatches a command through the matching operation and appends the
/// event-log record. Rejected commands throw and change nothing.
OrchestratorState apply_command(const OrchestratorState& state, const Command& command);

/// Re-applies a logged command sequence against a fresh state.
OrchestratorState replay(const Marketplace& initial_market,
                         const std::set<std::string>& known_probes, SelectionPolicy policy,
                         const std::vector<EventRecord>& log);

nlohmann::json state_to_json(const OrchestratorState& state);
OrchestratorState state_from_json(const nlohmann::json& j);

} // namespace slicesim
