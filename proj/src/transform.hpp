#pragma once

#include <utility>
#include <vector>

#include "clustering.hpp"
#include "domain.hpp"

namespace evselca {

// One route lifted to the cluster sequence. Node indices run 0 (depot start),
// 1..m (clusters), m+1 (depot end). Leg i connects node i to node i+1, so
// leg 0 leaves the depot and leg m returns to it.
struct RouteTransform {
    int route_idx = 0;
    CutSolution cuts;
    std::vector<Cluster> clusters;

    std::vector<double> leg_min;    // size m+1
    std::vector<double> gamma_min;  // per-cluster interior travel
    std::vector<double> kappa_min;  // per-cluster service total
    std::vector<std::vector<double>> detour_min; // [cluster][facility], exit -> facility
    std::vector<std::vector<double>> resume_min; // [cluster][facility], facility -> next entry
    std::vector<std::vector<int>> feasible_facilities; // per cluster, sorted by detour then index
    std::vector<int> depot_feasible_facilities;        // return-leg candidates, audit only

    std::vector<double> window_lo; // per cluster, earliest recharge start
    std::vector<double> window_hi; // per cluster, latest recharge start
    std::vector<std::pair<int, int>> step_window; // inclusive step range, lo > hi when empty

    double base_route_min = 0; // duration with no recharging
    double base_drive_min = 0; // battery drain with no recharging
    double initial_battery_min = 0;
    double final_battery_min = 0;

    int size() const { return static_cast<int>(clusters.size()); }
    // Battery shortfall a plan must recover, in driving minutes.
    double deficit_min() const {
        const double d = final_battery_min + base_drive_min - initial_battery_min;
        return d > 0 ? d : 0;
    }
};

struct ClusterInstance {
    Instance base;
    DerivedParams derived;
    double intra_cap_min = 0;
    std::vector<RouteTransform> routes;
    int num_steps = 0;
    double big_m = 0;
    std::vector<std::pair<int, int>> cluster_index; // global cluster -> (route, local)

    int total_clusters() const { return static_cast<int>(cluster_index.size()); }
    int global_cluster(int r, int c) const;
    int num_facilities() const { return static_cast<int>(base.facilities.size()); }
    int num_charger_types() const { return static_cast<int>(base.chargers.size()); }
    bool step_feasible(int r, int c, int t) const {
        const auto& w = routes[static_cast<size_t>(r)].step_window[static_cast<size_t>(c)];
        return t >= w.first && t <= w.second;
    }
    // Clusters of route r allowed to occupy step t at facility f.
    std::vector<int> eligible_clusters(int r, int f, int t) const;
};

// Runs min_clusters per route with cap = intra_cap_frac * battery capacity,
// then precomputes the recharge geometry. Throws InfeasibleError when a
// route cannot be cut within the cap.
ClusterInstance build_cluster_instance(const Instance& inst, double intra_cap_frac);

// Route duration for a given set of per-cluster detour choices; detours is a
// vector of facility indices (-1 for none), one per cluster. Waits and
// recharge durations are excluded, matching the planning-time bound.
double plan_route_minutes(const RouteTransform& rt, const std::vector<int>& detours);

}  // namespace evselca
