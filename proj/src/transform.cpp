#include "transform.hpp"

#include <algorithm>
#include <cmath>

namespace evselca {

int ClusterInstance::global_cluster(int r, int c) const {
    int g = 0;
    for (int i = 0; i < r; ++i) g += routes[static_cast<size_t>(i)].size();
    return g + c;
}

std::vector<int> ClusterInstance::eligible_clusters(int r, int f, int t) const {
    std::vector<int> out;
    const RouteTransform& rt = routes[static_cast<size_t>(r)];
    for (int c = 0; c < rt.size(); ++c) {
        if (!step_feasible(r, c, t)) continue;
        const auto& fs = rt.feasible_facilities[static_cast<size_t>(c)];
        if (std::find(fs.begin(), fs.end(), f) != fs.end()) out.push_back(c);
    }
    return out;
}

namespace {

RouteTransform build_route_transform(const Instance& inst, const DerivedParams& derived, int r,
                                     const MinClustersOutcome& cut_result) {
    const Route& route = inst.routes[static_cast<size_t>(r)];
    RouteTransform rt;
    rt.route_idx = r;
    rt.cuts = cut_result.solution;
    rt.clusters = build_clusters(inst, r, cut_result.solution);
    rt.initial_battery_min = route.initial_battery_min;
    rt.final_battery_min = route.final_battery_min;

    const int m = rt.size();
    const int F = static_cast<int>(inst.facilities.size());
    const int depot = inst.depot_node(r);

    rt.leg_min.resize(static_cast<size_t>(m + 1));
    rt.gamma_min.resize(static_cast<size_t>(m));
    rt.kappa_min.resize(static_cast<size_t>(m));
    for (int c = 0; c < m; ++c) {
        const Cluster& cl = rt.clusters[static_cast<size_t>(c)];
        rt.gamma_min[static_cast<size_t>(c)] = cl.internal_travel_min;
        rt.kappa_min[static_cast<size_t>(c)] = cl.internal_service_min;
        const int from = c == 0 ? depot : inst.stop_node(r, rt.clusters[static_cast<size_t>(c - 1)].exit_stop);
        rt.leg_min[static_cast<size_t>(c)] = inst.travel_minutes_between(from, inst.stop_node(r, cl.entry_stop));
    }
    rt.leg_min[static_cast<size_t>(m)] =
        inst.travel_minutes_between(inst.stop_node(r, rt.clusters[static_cast<size_t>(m - 1)].exit_stop), depot);

    rt.base_route_min = 0;
    rt.base_drive_min = 0;
    for (int c = 0; c <= m; ++c) rt.base_drive_min += rt.leg_min[static_cast<size_t>(c)];
    for (int c = 0; c < m; ++c) rt.base_drive_min += rt.gamma_min[static_cast<size_t>(c)];
    rt.base_route_min = rt.base_drive_min;
    for (int c = 0; c < m; ++c) rt.base_route_min += rt.kappa_min[static_cast<size_t>(c)];

    rt.detour_min.assign(static_cast<size_t>(m), std::vector<double>(static_cast<size_t>(F), 0));
    rt.resume_min.assign(static_cast<size_t>(m), std::vector<double>(static_cast<size_t>(F), 0));
    rt.feasible_facilities.resize(static_cast<size_t>(m));

    double max_rate = 0;
    for (double rate : derived.recharge_rate) max_rate = std::max(max_rate, rate);
    const double surplus = rt.initial_battery_min - rt.base_drive_min - rt.final_battery_min;
    const double slack = inst.max_shift_min - rt.base_route_min + std::min(0.0, surplus / max_rate);

    for (int c = 0; c < m; ++c) {
        const int exit_node = inst.stop_node(r, rt.clusters[static_cast<size_t>(c)].exit_stop);
        const int next_node =
            c + 1 < m ? inst.stop_node(r, rt.clusters[static_cast<size_t>(c + 1)].entry_stop) : depot;
        std::vector<int>& fs = rt.feasible_facilities[static_cast<size_t>(c)];
        for (int f = 0; f < F; ++f) {
            const double detour = inst.travel_minutes_between(exit_node, inst.facility_node(f));
            const double resume = inst.travel_minutes_between(inst.facility_node(f), next_node);
            rt.detour_min[static_cast<size_t>(c)][static_cast<size_t>(f)] = detour;
            rt.resume_min[static_cast<size_t>(c)][static_cast<size_t>(f)] = resume;
            if (detour <= inst.battery_cap_min + kFeasTol && detour + resume <= slack + kFeasTol) {
                fs.push_back(f);
            }
        }
        std::sort(fs.begin(), fs.end(), [&](int a, int b) {
            const double da = rt.detour_min[static_cast<size_t>(c)][static_cast<size_t>(a)];
            const double db = rt.detour_min[static_cast<size_t>(c)][static_cast<size_t>(b)];
            if (da != db) return da < db;
            return a < b;
        });
    }

    for (int f = 0; f < F; ++f) {
        const double out = inst.travel_minutes_between(depot, inst.facility_node(f));
        const double back = inst.travel_minutes_between(inst.facility_node(f), depot);
        if (out <= inst.battery_cap_min + kFeasTol && out + back <= slack + kFeasTol) {
            rt.depot_feasible_facilities.push_back(f);
        }
    }

    rt.window_lo.resize(static_cast<size_t>(m));
    rt.window_hi.resize(static_cast<size_t>(m));
    rt.step_window.resize(static_cast<size_t>(m));
    const int last_step = inst.num_time_steps() - 1;
    double head = 0;
    for (int c = 0; c < m; ++c) {
        head += rt.leg_min[static_cast<size_t>(c)] + rt.kappa_min[static_cast<size_t>(c)] +
                rt.gamma_min[static_cast<size_t>(c)];
        double tail = 0;
        for (int j = c + 1; j <= m; ++j) tail += rt.leg_min[static_cast<size_t>(j)];
        for (int j = c; j < m; ++j) {
            tail += rt.kappa_min[static_cast<size_t>(j)] + rt.gamma_min[static_cast<size_t>(j)];
        }
        rt.window_lo[static_cast<size_t>(c)] = head;
        rt.window_hi[static_cast<size_t>(c)] = inst.max_shift_min - tail;
        int t_lo = static_cast<int>(std::ceil(head / inst.time_step_min - 1e-9));
        int t_hi = static_cast<int>(std::floor(rt.window_hi[static_cast<size_t>(c)] / inst.time_step_min + 1e-9));
        t_lo = std::max(t_lo, 0);
        t_hi = std::min(t_hi, last_step);
        rt.step_window[static_cast<size_t>(c)] = {t_lo, t_hi};
    }
    return rt;
}

}  // namespace

ClusterInstance build_cluster_instance(const Instance& inst, double intra_cap_frac) {
    if (intra_cap_frac <= 0 || intra_cap_frac > 1) {
        throw InputError("intra-cluster cap fraction must lie in (0, 1]");
    }
    {
        const auto violations = validate_instance(inst);
        if (!violations.empty()) {
            throw InputError("invalid instance: " + violations.front().code + ": " +
                             violations.front().detail);
        }
    }
    ClusterInstance ci;
    ci.base = inst;
    ci.derived = derive_model_params(inst.chargers, inst.costs);
    ci.intra_cap_min = intra_cap_frac * inst.battery_cap_min;
    ci.num_steps = inst.num_time_steps();
    ci.big_m = 2 * inst.battery_cap_min + inst.max_shift_min + 1;

    for (int r = 0; r < static_cast<int>(inst.routes.size()); ++r) {
        MinClustersOutcome cut = min_clusters(inst, r, ci.intra_cap_min);
        if (!cut.feasible) {
            throw InfeasibleError("route " + std::to_string(r) +
                                  " cannot be clustered within the cap: " + cut.reason);
        }
        ci.routes.push_back(build_route_transform(inst, ci.derived, r, cut));
        for (int c = 0; c < ci.routes.back().size(); ++c) ci.cluster_index.push_back({r, c});
    }
    return ci;
}

double plan_route_minutes(const RouteTransform& rt, const std::vector<int>& detours) {
    double total = rt.base_route_min;
    for (size_t c = 0; c < detours.size(); ++c) {
        if (detours[c] >= 0) total += rt.detour_min[c][static_cast<size_t>(detours[c])];
    }
    return total;
}

}  // namespace evselca
