#pragma once

#include <map>
#include <string>
#include <vector>

#include "slicesim/slice.hpp"

namespace slicesim {

enum class SelectionPolicy { MinCost, MaxResidual, CleanEnergyFirst };

const char* to_string(SelectionPolicy p);
SelectionPolicy selection_policy_from_string(const std::string& s);

/// Resource catalog with live availability. Invariants: the key sets of
/// offers and available coincide, and 0 <= available[r] <= offers[r].capacity.
struct Marketplace {
    std::map<std::string, ResourceOffer> offers;
    std::map<std::string, double> available;
};

/// Parses a catalog CSV (header: id,domain,kind,capacity,unit_cost,energy_class).
/// Every offer starts fully available.
Marketplace load_catalog(const std::string& path);
Marketplace parse_catalog(const std::string& text);

/// Picks one offer per demand line (no splitting). MinCost minimizes total
/// amount-weighted cost over all feasible assignments; CleanEnergyFirst
/// minimizes total energy rank (clean < mixed < dirty) before cost;
/// MaxResidual maximizes the smallest post-reservation residual before cost.
/// Ties always break toward the lexicographically smallest resource ids.
std::vector<Allocation> select_resources(const Marketplace& market,
                                         const SliceRequest& request,
                                         SelectionPolicy policy);

/// Applies all picks or none.
Marketplace reserve(const Marketplace& market, const std::vector<Allocation>& picks);

/// Returns capacity from a decommissioned slice back to the marketplace and
/// clears the slice's allocations. Releasing twice is a no-op.
std::pair<Slice, Marketplace> release_allocations(const Slice& slice, const Marketplace& market);

} // namespace slicesim
