#include "slicesim/marketplace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "slicesim/error.hpp"

namespace slicesim {

const char* to_string(SelectionPolicy p) {
    switch (p) {
        case SelectionPolicy::MinCost: return "MinCost";
        case SelectionPolicy::MaxResidual: return "MaxResidual";
        case SelectionPolicy::CleanEnergyFirst: return "CleanEnergyFirst";
    }
    return "?";
}

SelectionPolicy selection_policy_from_string(const std::string& s) {
    if (s == "MinCost") return SelectionPolicy::MinCost;
    if (s == "MaxResidual") return SelectionPolicy::MaxResidual;
    if (s == "CleanEnergyFirst") return SelectionPolicy::CleanEnergyFirst;
    throw Error(ErrorCode::ParseError, "unknown selection policy '" + s + "'");
}

namespace {

// Locale-independent double parse; rejects trailing junk.
double parse_double(const std::string& field, int line) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line) + ": bad number '" + field + "'");
    }
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

Marketplace parse_catalog(const std::string& text) {
    Marketplace market;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "id,domain,kind,capacity,unit_cost,energy_class") {
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(line_no) + ": unexpected catalog header");
            }
            header_seen = true;
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != 6) {
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": expected 6 fields, got " +
                            std::to_string(fields.size()));
        }
        ResourceOffer offer;
        offer.id = fields[0];
        offer.domain_id = fields[1];
        offer.kind = resource_kind_from_string(fields[2]);
        offer.capacity = parse_double(fields[3], line_no);
        offer.unit_cost = parse_double(fields[4], line_no);
        offer.energy_class = energy_class_from_string(fields[5]);
        if (offer.capacity < 0.0 || offer.unit_cost < 0.0) {
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": negative capacity or cost");
        }
        if (market.offers.count(offer.id)) {
            throw Error(ErrorCode::DuplicateId, offer.id);
        }
        market.available[offer.id] = offer.capacity;
        market.offers[offer.id] = std::move(offer);
    }
    return market;
}

Marketplace load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open catalog '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_catalog(buf.str());
}

namespace {

struct Candidate {
    const ResourceOffer* offer;
    double available;
};

int energy_rank(EnergyClass ec) {
    switch (ec) {
        case EnergyClass::Clean: return 0;
        case EnergyClass::Mixed: return 1;
        case EnergyClass::Dirty: return 2;
    }
    return 2;
}

// Objective tuple ordered lexicographically, smaller is better. The id
// sequence is the final component so equal-score assignments resolve to the
// lexicographically smallest resource ids.
struct Score {
    double primary = 0.0;
    double secondary = 0.0;
    std::vector<std::string> ids;

    bool better_than(const Score& other) const {
        if (primary != other.primary) return primary < other.primary;
        if (secondary != other.secondary) return secondary < other.secondary;
        return ids < other.ids;
    }
};

} // namespace

std::vector<Allocation> select_resources(const Marketplace& market,
                                         const SliceRequest& request,
                                         SelectionPolicy policy) {
    if (request.demands.empty()) {
        throw Error(ErrorCode::InvalidConfig, "request '" + request.id + "' has no demands");
    }
    for (const auto& d : request.demands) {
        if (d.amount <= 0.0) {
            throw Error(ErrorCode::InvalidConfig, "demand amount must be positive");
        }
    }

    // candidates per demand, sorted by id for deterministic exploration
    std::vector<std::vector<Candidate>> candidates(request.demands.size());
    for (std::size_t i = 0; i < request.demands.size(); ++i) {
        for (const auto& [id, offer] : market.offers) {
            if (offer.kind != request.demands[i].kind) continue;
            candidates[i].push_back({&offer, market.available.at(id)});
        }
    }

    // quick per-demand feasibility: no single offer can hold this demand
    for (std::size_t i = 0; i < request.demands.size(); ++i) {
        double max_avail = 0.0;
        for (const auto& c : candidates[i]) max_avail = std::max(max_avail, c.available);
        if (request.demands[i].amount > max_avail) {
            throw Error(ErrorCode::Infeasible,
                        std::string(to_string(request.demands[i].kind)) + " short by " +
                            std::to_string(request.demands[i].amount - max_avail));
        }
    }

    const std::size_t n = request.demands.size();
    std::vector<const ResourceOffer*> chosen(n, nullptr);
    std::vector<const ResourceOffer*> best_choice;
    Score best;
    bool have_best = false;
    std::map<std::string, double> remaining = market.available;
    std::size_t deepest_fail = 0;

    auto assignment_score = [&](const std::vector<const ResourceOffer*>& pick) {
        Score s;
        s.ids.reserve(n);
        double cost = 0.0;
        double energy = 0.0;
        std::map<std::string, double> residual = market.available;
        for (std::size_t i = 0; i < n; ++i) {
            cost += request.demands[i].amount * pick[i]->unit_cost;
            energy += request.demands[i].amount * energy_rank(pick[i]->energy_class);
            residual[pick[i]->id] -= request.demands[i].amount;
            s.ids.push_back(pick[i]->id);
        }
        double min_residual = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) min_residual = std::min(min_residual, residual[pick[i]->id]);
        switch (policy) {
            case SelectionPolicy::MinCost:
                s.primary = cost;
                s.secondary = 0.0;
                break;
            case SelectionPolicy::CleanEnergyFirst:
                s.primary = energy;
                s.secondary = cost;
                break;
            case SelectionPolicy::MaxResidual:
                s.primary = -min_residual;
                s.secondary = cost;
                break;
        }
        return s;
    };

    // full search works because catalogs and demand lists are small
    auto dfs = [&](auto&& self, std::size_t depth) -> void {
        if (depth == n) {
            Score s = assignment_score(chosen);
            if (!have_best || s.better_than(best)) {
                best = std::move(s);
                best_choice = chosen;
                have_best = true;
            }
            return;
        }
        bool any = false;
        for (const auto& c : candidates[depth]) {
            double& avail = remaining[c.offer->id];
            if (request.demands[depth].amount > avail) continue;
            any = true;
            avail -= request.demands[depth].amount;
            chosen[depth] = c.offer;
            self(self, depth + 1);
            avail += request.demands[depth].amount;
        }
        if (!any) deepest_fail = std::max(deepest_fail, depth);
    };
    dfs(dfs, 0);

    if (!have_best) {
        // joint contention: report the demand the search could not place
        const auto& d = request.demands[deepest_fail];
        double max_avail = 0.0;
        for (const auto& c : candidates[deepest_fail]) max_avail = std::max(max_avail, c.available);
        throw Error(ErrorCode::Infeasible,
                    std::string(to_string(d.kind)) + " short by " +
                        std::to_string(std::max(0.0, d.amount - max_avail)));
    }

    std::vector<Allocation> picks;
    picks.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        picks.push_back({best_choice[i]->id, request.demands[i].amount});
    }
    return picks;
}

Marketplace reserve(const Marketplace& market, const std::vector<Allocation>& picks) {
    Marketplace next = market;
    for (const auto& pick : picks) {
        auto it = next.available.find(pick.resource_id);
        if (it == next.available.end()) {
            throw Error(ErrorCode::InsufficientCapacity, "unknown resource " + pick.resource_id);
        }
        if (pick.amount > it->second) {
            throw Error(ErrorCode::InsufficientCapacity, pick.resource_id);
        }
        it->second -= pick.amount;
    }
    return next;
}

std::pair<Slice, Marketplace> release_allocations(const Slice& slice, const Marketplace& market) {
    if (slice.state != SliceState::Decommissioned) {
        throw Error(ErrorCode::NotDecommissioned, slice.id);
    }
    Marketplace next_market = market;
    for (const auto& alloc : slice.allocations) {
        next_market.available.at(alloc.resource_id) += alloc.amount;
    }
    Slice next_slice = slice;
    next_slice.allocations.clear();
    return {std::move(next_slice), std::move(next_market)};
}

} // namespace slicesim
