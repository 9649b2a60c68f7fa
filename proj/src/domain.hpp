#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"

namespace evselca {

struct Point {
    double x = 0;
    double y = 0;
};

inline double manhattan_miles(Point a, Point b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

struct ChargerSpec {
    std::string name;
    double power_kw = 0;
    double added_range_miles = 0;    // driving range gained by a full session
    double added_charge_minutes = 0; // session length that gains it
    double purchase_cost_usd = 0;
};

struct CostParams {
    double energy_price_usd_per_kwh = 0.43;
    double vot_usd_per_mile = 1.377;       // driver value of time expressed per mile driven
    double truck_speed_mph = 30.0;
    double charger_lifespan_days = 3650.0;
    double facility_lifespan_days = 14600.0;
};

struct Facility {
    Point pos;
    double cost_per_day_usd = 35.0;
};

struct Stop {
    Point pos;
    double service_min = 2.0;
};

struct Route {
    Point depot;
    std::vector<Stop> stops;
    double initial_battery_min = 200.0; // charge on departure, in driving minutes
    double final_battery_min = 160.0;   // minimum required on return
};

// Optional explicit travel-time matrix. Node order: facilities first, then
// per route the depot followed by its stops.
struct TravelOverride {
    std::vector<std::vector<double>> minutes;
};

struct Instance {
    std::string name = "instance";
    std::vector<Route> routes;
    std::vector<Facility> facilities;
    std::vector<ChargerSpec> chargers;
    CostParams costs;
    double battery_cap_min = 200.0; // full battery, in driving minutes
    double max_shift_min = 840.0;
    double time_step_min = 15.0;
    double epsilon_min = 1e-3;
    std::optional<TravelOverride> travel_override;

    int num_time_steps() const {
        return static_cast<int>(std::ceil(max_shift_min / time_step_min - 1e-9)) + 1;
    }
    double step_time(int t) const { return t * time_step_min; }

    int node_count() const;
    int facility_node(int f) const { return f; }
    int depot_node(int r) const;
    int stop_node(int r, int i) const { return depot_node(r) + 1 + i; }
    Point node_pos(int node) const;
    double travel_minutes_between(int node_a, int node_b) const;
};

struct DerivedParams {
    std::vector<double> recharge_rate;        // driving minutes gained per charging minute
    std::vector<double> charger_cost_per_day; // amortized purchase cost
    std::vector<double> energy_cost_per_min;  // energy spend per charging minute
    double vot_per_min = 0;                   // driver time cost per minute
};

DerivedParams derive_model_params(const std::vector<ChargerSpec>& chargers, const CostParams& costs);

struct Violation {
    std::string code;
    std::string detail;
};

std::vector<Violation> validate_instance(const Instance& inst);

// Built-in catalog: basic / moderate / fast chargers.
std::vector<ChargerSpec> default_charger_catalog();

}  // namespace evselca
