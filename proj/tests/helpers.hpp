#pragma once

#include <vector>

#include "domain.hpp"
#include "transform.hpp"

namespace fixtures {

using namespace evselca;

// Geometry pinned entirely by a travel override. Unset edges default to a
// time far beyond any battery, so facilities are only reachable from the
// clusters a test wires up explicitly.
inline Instance matrix_instance(int facilities, const std::vector<int>& stops_per_route,
                                double fill = 5000) {
    Instance inst;
    inst.name = "fixture";
    inst.chargers = default_charger_catalog();
    inst.facilities.assign(static_cast<size_t>(facilities), Facility{});
    for (int s : stops_per_route) {
        Route r;
        r.stops.assign(static_cast<size_t>(s), Stop{{0, 0}, 0.0});
        inst.routes.push_back(r);
    }
    const int n = inst.node_count();
    TravelOverride ov;
    ov.minutes.assign(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n), fill));
    for (int i = 0; i < n; ++i) ov.minutes[static_cast<size_t>(i)][static_cast<size_t>(i)] = 0;
    inst.travel_override = ov;
    return inst;
}

inline void set_time(Instance& inst, int a, int b, double minutes) {
    auto& m = inst.travel_override->minutes;
    m[static_cast<size_t>(a)][static_cast<size_t>(b)] = minutes;
    m[static_cast<size_t>(b)][static_cast<size_t>(a)] = minutes;
}

// Single charger type gaining `rate` driving minutes per charging minute,
// amortizing to one dollar per day, at 0.43 USD per charging minute energy.
inline ChargerSpec unit_charger(double rate = 1.0) {
    ChargerSpec c;
    c.name = "unit";
    c.power_kw = 60;
    c.added_range_miles = rate * 30.0;
    c.added_charge_minutes = 60;
    c.purchase_cost_usd = 3650;
    return c;
}

// Two single-stop routes sharing one facility. Each route drives 25 minutes
// out, serves one long stop, can detour 10 minutes to the facility and
// resume 25 minutes to the depot. Service times stagger facility arrivals at
// 600 and 605, and each route needs exactly 20 driving minutes of recharge.
inline Instance two_route_fixture() {
    Instance inst = matrix_instance(1, {1, 1});
    inst.chargers = {unit_charger()};
    inst.routes[0].stops[0].service_min = 565;
    inst.routes[1].stops[0].service_min = 570;
    set_time(inst, 1, 2, 25); // depot 0 to its stop
    set_time(inst, 3, 4, 25); // depot 1 to its stop
    set_time(inst, 0, 2, 10); // facility to stop 0
    set_time(inst, 0, 4, 10); // facility to stop 1
    set_time(inst, 0, 1, 25); // facility to depot 0
    set_time(inst, 0, 3, 25); // facility to depot 1
    return inst;
}

} // namespace fixtures
