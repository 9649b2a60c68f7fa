#include "domain.hpp"

#include <cmath>
#include <sstream>

namespace evselca {

int Instance::node_count() const {
    int n = static_cast<int>(facilities.size());
    for (const Route& r : routes) n += 1 + static_cast<int>(r.stops.size());
    return n;
}

int Instance::depot_node(int r) const {
    int n = static_cast<int>(facilities.size());
    for (int i = 0; i < r; ++i) n += 1 + static_cast<int>(routes[static_cast<size_t>(i)].stops.size());
    return n;
}

Point Instance::node_pos(int node) const {
    if (node < static_cast<int>(facilities.size())) return facilities[static_cast<size_t>(node)].pos;
    int n = static_cast<int>(facilities.size());
    for (const Route& r : routes) {
        if (node == n) return r.depot;
        const int stops = static_cast<int>(r.stops.size());
        if (node <= n + stops) return r.stops[static_cast<size_t>(node - n - 1)].pos;
        n += 1 + stops;
    }
    throw InputError("node index out of range");
}

double Instance::travel_minutes_between(int node_a, int node_b) const {
    if (travel_override) {
        const auto& m = travel_override->minutes;
        if (node_a < 0 || node_b < 0 || node_a >= static_cast<int>(m.size()) ||
            node_b >= static_cast<int>(m.size())) {
            throw InputError("travel override lookup out of range");
        }
        return m[static_cast<size_t>(node_a)][static_cast<size_t>(node_b)];
    }
    return manhattan_miles(node_pos(node_a), node_pos(node_b)) / costs.truck_speed_mph * 60.0;
}

DerivedParams derive_model_params(const std::vector<ChargerSpec>& chargers, const CostParams& costs) {
    if (costs.truck_speed_mph <= 0) throw InputError("truck speed must be positive");
    if (costs.charger_lifespan_days <= 0) throw InputError("charger lifespan must be positive");
    DerivedParams d;
    d.vot_per_min = costs.vot_usd_per_mile * costs.truck_speed_mph / 60.0;
    d.recharge_rate.reserve(chargers.size());
    d.charger_cost_per_day.reserve(chargers.size());
    d.energy_cost_per_min.reserve(chargers.size());
    for (const ChargerSpec& c : chargers) {
        if (c.added_charge_minutes <= 0) throw InputError("charger session length must be positive");
        if (c.added_range_miles <= 0) throw InputError("charger added range must be positive");
        const double range_min = c.added_range_miles / costs.truck_speed_mph * 60.0;
        d.recharge_rate.push_back(range_min / c.added_charge_minutes);
        d.charger_cost_per_day.push_back(c.purchase_cost_usd / costs.charger_lifespan_days);
        d.energy_cost_per_min.push_back(costs.energy_price_usd_per_kwh * c.power_kw / 60.0);
    }
    return d;
}

namespace {

void require(std::vector<Violation>& out, bool ok, const char* code, const std::string& detail) {
    if (!ok) out.push_back({code, detail});
}

std::string at(const char* what, size_t idx) {
    std::ostringstream s;
    s << what << " " << idx;
    return s.str();
}

}  // namespace

std::vector<Violation> validate_instance(const Instance& inst) {
    std::vector<Violation> v;
    require(v, !inst.routes.empty(), "routes_empty", "instance has no routes");
    require(v, !inst.facilities.empty(), "facilities_empty", "instance has no candidate facilities");
    require(v, !inst.chargers.empty(), "chargers_empty", "instance has no charger types");
    require(v, inst.battery_cap_min > 0, "battery_cap", "battery capacity must be positive");
    require(v, inst.max_shift_min > 0, "shift_range", "shift length must be positive");
    require(v, inst.time_step_min > 0, "time_step_range", "time step must be positive");
    require(v, inst.time_step_min <= inst.max_shift_min, "time_step_range",
            "time step exceeds the shift length");
    require(v, inst.epsilon_min > 0 && inst.epsilon_min < inst.time_step_min, "epsilon_range",
            "epsilon must lie strictly between 0 and the time step");
    require(v, inst.costs.truck_speed_mph > 0, "cost_positive", "truck speed must be positive");
    require(v, inst.costs.energy_price_usd_per_kwh >= 0, "cost_positive",
            "energy price must be non-negative");
    require(v, inst.costs.vot_usd_per_mile >= 0, "cost_positive", "value of time must be non-negative");
    require(v, inst.costs.charger_lifespan_days > 0, "cost_positive",
            "charger lifespan must be positive");
    require(v, inst.costs.facility_lifespan_days > 0, "cost_positive",
            "facility lifespan must be positive");

    for (size_t r = 0; r < inst.routes.size(); ++r) {
        const Route& route = inst.routes[r];
        require(v, !route.stops.empty(), "route_empty", at("route", r) + " has no stops");
        require(v, route.initial_battery_min > 0, "battery_order",
                at("route", r) + ": initial battery must be positive");
        require(v, route.final_battery_min >= 0, "battery_order",
                at("route", r) + ": final battery must be non-negative");
        require(v, route.initial_battery_min <= inst.battery_cap_min + kFeasTol, "battery_cap",
                at("route", r) + ": initial battery exceeds capacity");
        require(v, route.final_battery_min <= route.initial_battery_min + kFeasTol, "battery_order",
                at("route", r) + ": final battery requirement exceeds the initial charge");
        for (size_t i = 0; i < route.stops.size(); ++i) {
            require(v, route.stops[i].service_min >= 0, "service_range",
                    at("route", r) + " stop " + std::to_string(i) + ": negative service time");
        }
    }
    for (size_t f = 0; f < inst.facilities.size(); ++f) {
        require(v, inst.facilities[f].cost_per_day_usd >= 0, "facility_cost",
                at("facility", f) + ": negative daily cost");
    }
    for (size_t k = 0; k < inst.chargers.size(); ++k) {
        const ChargerSpec& c = inst.chargers[k];
        require(v, c.power_kw > 0, "charger_power", at("charger", k) + ": power must be positive");
        require(v, c.added_range_miles > 0, "charger_range",
                at("charger", k) + ": added range must be positive");
        require(v, c.added_charge_minutes > 0, "charger_time",
                at("charger", k) + ": session length must be positive");
        require(v, c.purchase_cost_usd >= 0, "charger_cost",
                at("charger", k) + ": negative purchase cost");
    }
    if (inst.travel_override) {
        const auto& m = inst.travel_override->minutes;
        const size_t n = static_cast<size_t>(inst.node_count());
        require(v, m.size() == n, "travel_override_shape",
                "travel override must have one row per node (" + std::to_string(n) + ")");
        for (size_t i = 0; i < m.size(); ++i) {
            require(v, m[i].size() == n, "travel_override_shape",
                    "travel override row " + std::to_string(i) + " has the wrong width");
            for (size_t j = 0; j < m[i].size(); ++j) {
                require(v, m[i][j] >= 0 && std::isfinite(m[i][j]), "travel_override_value",
                        "travel override entry (" + std::to_string(i) + "," + std::to_string(j) +
                            ") must be a finite non-negative time");
            }
        }
    }
    return v;
}

std::vector<ChargerSpec> default_charger_catalog() {
    return {
        {"basic", 50.0, 100.0, 265.0, 73000.0},
        {"moderate", 180.0, 100.0, 88.0, 157000.0},
        {"fast", 360.0, 100.0, 29.0, 228000.0},
    };
}

}  // namespace evselca
