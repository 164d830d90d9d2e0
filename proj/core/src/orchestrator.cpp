#include "slicesim/orchestrator.hpp"

#include <algorithm>

#include "slicesim/error.hpp"

namespace slicesim {

using nlohmann::json;

const char* to_string(DirectiveType t) {
    switch (t) {
        case DirectiveType::ScaleUp: return "ScaleUp";
        case DirectiveType::ScaleDown: return "ScaleDown";
        case DirectiveType::Quarantine: return "Quarantine";
        case DirectiveType::Decommission: return "Decommission";
    }
    return "?";
}

DirectiveType directive_type_from_string(const std::string& s) {
    if (s == "ScaleUp") return DirectiveType::ScaleUp;
    if (s == "ScaleDown") return DirectiveType::ScaleDown;
    if (s == "Quarantine") return DirectiveType::Quarantine;
    if (s == "Decommission") return DirectiveType::Decommission;
    throw Error(ErrorCode::ParseError, "unknown directive '" + s + "'");
}

const char* to_string(CommandType t) {
    switch (t) {
        case CommandType::SubmitRequest: return "submit_request";
        case CommandType::Commission: return "commission";
        case CommandType::Instantiate: return "instantiate";
        case CommandType::Supervise: return "supervise";
        case CommandType::AdvanceTime: return "advance_time";
    }
    return "?";
}

json Command::to_json() const {
    json j;
    j["op"] = to_string(type);
    switch (type) {
        case CommandType::SubmitRequest: {
            json demands = json::array();
            for (const auto& d : request.demands) {
                demands.push_back({{"kind", to_string(d.kind)}, {"amount", d.amount}});
            }
            j["request"] = {{"id", request.id},
                            {"tenant", request.tenant},
                            {"demands", demands},
                            {"max_latency_ms", request.qos.max_latency_ms},
                            {"min_throughput", request.qos.min_throughput}};
            break;
        }
        case CommandType::Commission:
            j["slice"] = slice_id;
            break;
        case CommandType::Instantiate:
            j["slice"] = slice_id;
            j["probes"] = probes;
            break;
        case CommandType::Supervise:
            j["slice"] = slice_id;
            j["directive"] = {{"type", to_string(directive.type)},
                              {"kind", to_string(directive.kind)},
                              {"amount", directive.amount}};
            break;
        case CommandType::AdvanceTime:
            j["dt"] = dt;
            break;
    }
    return j;
}

Command Command::from_json(const json& j) {
    Command c;
    const std::string op = j.at("op").get<std::string>();
    if (op == "submit_request") {
        c.type = CommandType::SubmitRequest;
        const auto& r = j.at("request");
        c.request.id = r.at("id").get<std::string>();
        c.request.tenant = r.value("tenant", "");
        c.request.qos.max_latency_ms = r.value("max_latency_ms", 0.0);
        c.request.qos.min_throughput = r.value("min_throughput", 0.0);
        for (const auto& d : r.at("demands")) {
            c.request.demands.push_back(
                {resource_kind_from_string(d.at("kind").get<std::string>()),
                 d.at("amount").get<double>()});
        }
    } else if (op == "commission") {
        c.type = CommandType::Commission;
        c.slice_id = j.at("slice").get<std::string>();
    } else if (op == "instantiate") {
        c.type = CommandType::Instantiate;
        c.slice_id = j.at("slice").get<std::string>();
        c.probes = j.at("probes").get<std::vector<std::string>>();
    } else if (op == "supervise") {
        c.type = CommandType::Supervise;
        c.slice_id = j.at("slice").get<std::string>();
        const auto& d = j.at("directive");
        c.directive.type = directive_type_from_string(d.at("type").get<std::string>());
        c.directive.kind = resource_kind_from_string(d.value("kind", "compute"));
        c.directive.amount = d.value("amount", 0.0);
    } else if (op == "advance_time") {
        c.type = CommandType::AdvanceTime;
        c.dt = j.at("dt").get<double>();
    } else {
        throw Error(ErrorCode::ParseError, "unknown command op '" + op + "'");
    }
    return c;
}

namespace {

const Slice& find_slice(const OrchestratorState& state, const std::string& slice_id) {
    auto it = state.slices.find(slice_id);
    if (it == state.slices.end()) throw Error(ErrorCode::UnknownSlice, slice_id);
    return it->second;
}

void log_event(OrchestratorState& state, const Command& command, std::string outcome) {
    EventRecord rec;
    rec.seq = state.event_log.size();
    rec.time = state.now;
    rec.command = command;
    rec.outcome = std::move(outcome);
    state.event_log.push_back(std::move(rec));
}

Command make_request_command(const SliceRequest& request) {
    Command c;
    c.type = CommandType::SubmitRequest;
    c.request = request;
    return c;
}

void merge_allocation(std::vector<Allocation>& allocations, const Allocation& extra) {
    for (auto& a : allocations) {
        if (a.resource_id == extra.resource_id) {
            a.amount += extra.amount;
            return;
        }
    }
    allocations.push_back(extra);
}

} // namespace

OrchestratorState prepare(const OrchestratorState& state, const SliceRequest& request) {
    if (state.slices.count(request.id) || state.requests.count(request.id)) {
        throw Error(ErrorCode::DuplicateRequest, request.id);
    }
    if (request.demands.empty()) {
        throw Error(ErrorCode::InvalidConfig, "request '" + request.id + "' has no demands");
    }

    OrchestratorState next = state;
    Slice slice;
    slice.id = request.id;
    slice.request_id = request.id;
    next.requests[request.id] = request;

    try {
        auto pick = select_resources(state.market, request, state.policy);
        slice = advance_lifecycle(slice, LifecycleEvent::PreparationDone);
        next.pending_picks[slice.id] = std::move(pick);
        next.slices[slice.id] = std::move(slice);
        log_event(next, make_request_command(request), "prepared");
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Infeasible) throw;
        slice = advance_lifecycle(slice, LifecycleEvent::Fault);
        next.slices[slice.id] = std::move(slice);
        log_event(next, make_request_command(request), std::string("failed: ") + e.what());
    }
    return next;
}

OrchestratorState commission(const OrchestratorState& state, const std::string& slice_id) {
    const Slice& slice = find_slice(state, slice_id);
    Slice commissioned = advance_lifecycle(slice, LifecycleEvent::CommissioningDone);

    auto pick_it = state.pending_picks.find(slice_id);
    if (pick_it == state.pending_picks.end()) {
        throw Error(ErrorCode::InvalidConfig, "no pending pick for slice " + slice_id);
    }

    Command cmd;
    cmd.type = CommandType::Commission;
    cmd.slice_id = slice_id;

    OrchestratorState next = state;
    try {
        next.market = reserve(state.market, pick_it->second);
        commissioned.allocations = pick_it->second;
        next.slices[slice_id] = std::move(commissioned);
        next.pending_picks.erase(slice_id);
        log_event(next, cmd, "commissioned");
        return next;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientCapacity) throw;
    }

    // one automatic re-selection against current availability
    try {
        auto fresh_pick = select_resources(state.market, state.requests.at(slice_id), state.policy);
        next.market = reserve(state.market, fresh_pick);
        commissioned.allocations = std::move(fresh_pick);
        next.slices[slice_id] = std::move(commissioned);
        next.pending_picks.erase(slice_id);
        log_event(next, cmd, "commissioned after re-selection");
        return next;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Infeasible && e.code() != ErrorCode::InsufficientCapacity) throw;
        next.market = state.market;
        next.slices[slice_id] = advance_lifecycle(slice, LifecycleEvent::Fault);
        next.pending_picks.erase(slice_id);
        log_event(next, cmd, std::string("failed: ") + e.what());
        return next;
    }
}

OrchestratorState instantiate(const OrchestratorState& state, const std::string& slice_id,
                              const std::vector<std::string>& probes) {
    const Slice& slice = find_slice(state, slice_id);
    Slice operational = advance_lifecycle(slice, LifecycleEvent::Activated);
    for (const auto& p : probes) {
        if (!state.known_probes.count(p)) throw Error(ErrorCode::UnknownProbe, p);
    }
    operational.monitors = probes;

    OrchestratorState next = state;
    next.slices[slice_id] = std::move(operational);
    Command cmd;
    cmd.type = CommandType::Instantiate;
    cmd.slice_id = slice_id;
    cmd.probes = probes;
    log_event(next, cmd, probes.empty() ? "operational (warning: no monitors)" : "operational");
    return next;
}

OrchestratorState supervise(const OrchestratorState& state, const std::string& slice_id,
                            const Directive& directive) {
    const Slice& slice = find_slice(state, slice_id);
    if (slice.state != SliceState::Operational) {
        throw Error(ErrorCode::IllegalTransition,
                    std::string("supervise on ") + to_string(slice.state) + " slice " + slice_id);
    }

    Command cmd;
    cmd.type = CommandType::Supervise;
    cmd.slice_id = slice_id;
    cmd.directive = directive;

    OrchestratorState next = state;
    Slice updated = slice;
    std::string outcome;

    switch (directive.type) {
        case DirectiveType::ScaleUp: {
            if (slice.quarantined) throw Error(ErrorCode::SliceQuarantined, slice_id);
            if (directive.amount <= 0.0) {
                throw Error(ErrorCode::InvalidConfig, "scale amount must be positive");
            }
            SliceRequest extra;
            extra.id = slice_id;
            extra.demands = {{directive.kind, directive.amount}};
            auto pick = select_resources(state.market, extra, state.policy);
            next.market = reserve(state.market, pick);
            for (const auto& a : pick) merge_allocation(updated.allocations, a);
            outcome = "scaled up";
            break;
        }
        case DirectiveType::ScaleDown: {
            if (directive.amount <= 0.0) {
                throw Error(ErrorCode::InvalidConfig, "scale amount must be positive");
            }
            double held = 0.0;
            for (const auto& a : slice.allocations) {
                if (state.market.offers.at(a.resource_id).kind == directive.kind) held += a.amount;
            }
            if (directive.amount > held + 1e-12) {
                throw Error(ErrorCode::AmountExceedsAllocation,
                            slice_id + " holds " + std::to_string(held) + " of " +
                                to_string(directive.kind));
            }
            // release in ascending resource-id order (allocations stay sorted
            // by construction of merge over ordered picks; sort to be sure)
            std::sort(updated.allocations.begin(), updated.allocations.end(),
                      [](const Allocation& a, const Allocation& b) {
                          return a.resource_id < b.resource_id;
                      });
            double to_release = directive.amount;
            for (auto& a : updated.allocations) {
                if (to_release <= 0.0) break;
                if (state.market.offers.at(a.resource_id).kind != directive.kind) continue;
                const double take = std::min(a.amount, to_release);
                a.amount -= take;
                to_release -= take;
                next.market.available.at(a.resource_id) += take;
            }
            updated.allocations.erase(
                std::remove_if(updated.allocations.begin(), updated.allocations.end(),
                               [](const Allocation& a) { return a.amount <= 0.0; }),
                updated.allocations.end());
            outcome = "scaled down";
            break;
        }
        case DirectiveType::Quarantine: {
            updated.quarantined = true;
            updated.monitors.clear();
            outcome = "quarantined";
            break;
        }
        case DirectiveType::Decommission: {
            updated = advance_lifecycle(updated, LifecycleEvent::Decommission);
            auto [released, market] = release_allocations(updated, next.market);
            updated = std::move(released);
            next.market = std::move(market);
            outcome = "decommissioned";
            break;
        }
    }

    next.slices[slice_id] = std::move(updated);
    log_event(next, cmd, std::move(outcome));
    return next;
}

OrchestratorState advance_time(const OrchestratorState& state, double dt) {
    if (dt < 0.0) throw Error(ErrorCode::InvalidConfig, "time cannot go backwards");
    OrchestratorState next = state;
    next.now += dt;
    Command cmd;
    cmd.type = CommandType::AdvanceTime;
    cmd.dt = dt;
    log_event(next, cmd, "advanced");
    return next;
}

OrchestratorState apply_command(const OrchestratorState& state, const Command& command) {
    switch (command.type) {
        case CommandType::SubmitRequest: return prepare(state, command.request);
        case CommandType::Commission: return commission(state, command.slice_id);
        case CommandType::Instantiate: return instantiate(state, command.slice_id, command.probes);
        case CommandType::Supervise: return supervise(state, command.slice_id, command.directive);
        case CommandType::AdvanceTime: return advance_time(state, command.dt);
    }
    throw Error(ErrorCode::InvalidConfig, "unhandled command");
}

OrchestratorState replay(const Marketplace& initial_market,
                         const std::set<std::string>& known_probes, SelectionPolicy policy,
                         const std::vector<EventRecord>& log) {
    OrchestratorState state;
    state.market = initial_market;
    state.known_probes = known_probes;
    state.policy = policy;
    for (const auto& rec : log) {
        state = apply_command(state, rec.command);
    }
    return state;
}

namespace {

json slice_to_json(const Slice& s) {
    json allocations = json::array();
    for (const auto& a : s.allocations) {
        allocations.push_back({{"resource", a.resource_id}, {"amount", a.amount}});
    }
    return {{"id", s.id},
            {"request_id", s.request_id},
            {"state", to_string(s.state)},
            {"allocations", allocations},
            {"monitors", s.monitors},
            {"quarantined", s.quarantined}};
}

SliceState slice_state_from_string(const std::string& s) {
    for (SliceState st : {SliceState::Requested, SliceState::Prepared, SliceState::Commissioned,
                          SliceState::Operational, SliceState::Decommissioned, SliceState::Failed}) {
        if (s == to_string(st)) return st;
    }
    throw Error(ErrorCode::ParseError, "unknown slice state '" + s + "'");
}

} // namespace

json state_to_json(const OrchestratorState& state) {
    json offers = json::array();
    for (const auto& [id, o] : state.market.offers) {
        offers.push_back({{"id", o.id},
                          {"domain", o.domain_id},
                          {"kind", to_string(o.kind)},
                          {"capacity", o.capacity},
                          {"unit_cost", o.unit_cost},
                          {"energy_class", to_string(o.energy_class)}});
    }
    json slices = json::object();
    for (const auto& [id, s] : state.slices) slices[id] = slice_to_json(s);
    json picks = json::object();
    for (const auto& [id, pick] : state.pending_picks) {
        json arr = json::array();
        for (const auto& a : pick) arr.push_back({{"resource", a.resource_id}, {"amount", a.amount}});
        picks[id] = arr;
    }
    json requests = json::object();
    for (const auto& [id, r] : state.requests) {
        Command c = [&] {
            Command x;
            x.type = CommandType::SubmitRequest;
            x.request = r;
            return x;
        }();
        requests[id] = c.to_json()["request"];
    }
    json log = json::array();
    for (const auto& rec : state.event_log) {
        log.push_back({{"seq", rec.seq},
                       {"time", rec.time},
                       {"command", rec.command.to_json()},
                       {"outcome", rec.outcome}});
    }
    return {{"market", {{"offers", offers}, {"available", state.market.available}}},
            {"slices", slices},
            {"pending_picks", picks},
            {"requests", requests},
            {"event_log", log},
            {"now", state.now},
            {"known_probes", std::vector<std::string>(state.known_probes.begin(),
                                                      state.known_probes.end())},
            {"policy", to_string(state.policy)}};
}

OrchestratorState state_from_json(const json& j) {
    OrchestratorState state;
    for (const auto& o : j.at("market").at("offers")) {
        ResourceOffer offer;
        offer.id = o.at("id").get<std::string>();
        offer.domain_id = o.at("domain").get<std::string>();
        offer.kind = resource_kind_from_string(o.at("kind").get<std::string>());
        offer.capacity = o.at("capacity").get<double>();
        offer.unit_cost = o.at("unit_cost").get<double>();
        offer.energy_class = energy_class_from_string(o.at("energy_class").get<std::string>());
        state.market.offers[offer.id] = offer;
    }
    state.market.available =
        j.at("market").at("available").get<std::map<std::string, double>>();
    for (const auto& [id, s] : j.at("slices").items()) {
        Slice slice;
        slice.id = s.at("id").get<std::string>();
        slice.request_id = s.at("request_id").get<std::string>();
        slice.state = slice_state_from_string(s.at("state").get<std::string>());
        for (const auto& a : s.at("allocations")) {
            slice.allocations.push_back(
                {a.at("resource").get<std::string>(), a.at("amount").get<double>()});
        }
        slice.monitors = s.at("monitors").get<std::vector<std::string>>();
        slice.quarantined = s.at("quarantined").get<bool>();
        state.slices[id] = std::move(slice);
    }
    for (const auto& [id, pick] : j.at("pending_picks").items()) {
        std::vector<Allocation> allocations;
        for (const auto& a : pick) {
            allocations.push_back(
                {a.at("resource").get<std::string>(), a.at("amount").get<double>()});
        }
        state.pending_picks[id] = std::move(allocations);
    }
    for (const auto& [id, r] : j.at("requests").items()) {
        json wrapped = {{"op", "submit_request"}, {"request", r}};
        state.requests[id] = Command::from_json(wrapped).request;
    }
    for (const auto& rec : j.at("event_log")) {
        EventRecord e;
        e.seq = rec.at("seq").get<std::uint64_t>();
        e.time = rec.at("time").get<double>();
        e.command = Command::from_json(rec.at("command"));
        e.outcome = rec.at("outcome").get<std::string>();
        state.event_log.push_back(std::move(e));
    }
    state.now = j.at("now").get<double>();
    auto probes = j.at("known_probes").get<std::vector<std::string>>();
    state.known_probes = std::set<std::string>(probes.begin(), probes.end());
    state.policy = selection_policy_from_string(j.at("policy").get<std::string>());
    return state;
}

} // namespace slicesim
