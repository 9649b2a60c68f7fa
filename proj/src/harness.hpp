#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "domain.hpp"
#include "exact.hpp"
#include "ga.hpp"

namespace evselca {

struct GenSpec {
    std::string name = "generated";
    int routes = 3;
    int stops_per_route = 6;
    int facilities = 3;
    double extent_miles = 40;
    double time_step_min = 15;
    std::uint64_t seed = 1;
};

// Draws a synthetic instance on a square: depot at the center, stops uniform
// over the square in nearest-neighbor visiting order, facilities uniform over
// the central half, built-in charger catalog and default costs.
Instance gen_instance(const GenSpec& spec);

struct SweepSpec {
    GenSpec base;
    std::string axis;           // charger_cost_pct | energy_cost_pct | vot_pct |
                                // range_miles | t_delta_min
    std::vector<double> levels; // first level is the normalization baseline
    double intra_cap_frac = 0.5;
    std::string method = "ga"; // ga | exact | hybrid
    int replications = 5;
    GaConfig ga;
    ExactConfig exact;
};

struct SweepRepRow {
    double level = 0;
    int rep = 0;
    std::uint64_t seed = 0;
    bool feasible = false;
    CostBreakdown cost;
    std::vector<int> chargers_by_type; // deployed counts summed over facilities
    std::string note;
};

struct SweepLevelRow {
    double level = 0;
    int feasible_reps = 0;
    double min = 0;
    double mean = 0;
    double stddev = 0;
    double normalized = 0; // 100 * level min / baseline min
    bool is_best = false;
    std::string note;
};

struct SweepOutcome {
    std::string axis;
    std::vector<SweepRepRow> reps;
    std::vector<SweepLevelRow> levels;
};

// Re-solves the generated instance at every level of one parameter axis.
// Deterministic methods collapse to a single replication. Level/replication
// tasks share the solver thread budget; results gather in task order, so the
// outcome does not depend on scheduling.
SweepOutcome run_sweep(const SweepSpec& spec);

std::string sweep_csv(const SweepOutcome& outcome);

}  // namespace evselca
