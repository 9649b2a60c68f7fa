#pragma once

#include <string>
#include <vector>

#include "transform.hpp"

namespace evselca {

// One gene per global cluster: recharge at (facility, charger) after serving
// the cluster, or skip (facility = -1).
struct PlanGene {
    int facility = -1;
    int charger = -1;
    bool set() const { return facility >= 0; }
};

inline bool operator==(const PlanGene& a, const PlanGene& b) {
    return a.facility == b.facility && (a.facility < 0 || a.charger == b.charger);
}

struct RechargePlan {
    std::vector<PlanGene> genes;
};

struct Deployment {
    std::vector<int> open;                  // y per facility
    std::vector<std::vector<int>> chargers; // z[facility][charger type]
};

Deployment open_flags_from_z(const std::vector<std::vector<int>>& z);

struct ChargeEvent {
    int route = 0;
    int cluster_local = 0;
    int cluster_global = 0;
    int facility = 0;
    int charger = 0;
    double arrival = 0;
    double wait = 0;
    double start = 0;
    double end = 0;
    double duration = 0;
    double battery_at_facility = 0;
};

struct Schedule {
    std::vector<ChargeEvent> events;             // route-major order
    std::vector<std::vector<double>> departure;  // [route][node 0..m+1]
    std::vector<std::vector<double>> battery;    // [route][node 0..m+1], at node entry
    bool waits_converged = true;
    int sweeps = 0;
};

struct CostBreakdown {
    double detour_vot = 0;
    double wait_vot = 0;
    double recharge_vot = 0;
    double energy = 0;
    double facility = 0;
    double charger = 0;
    double total = 0;
};

struct EvalOptions {
    bool legacy_rounding = false; // integerize route deficits the way the legacy pipeline did
    double tol = kFeasTol;
};

struct EvalOutcome {
    bool feasible = false;
    int defect_count = 0;
    std::vector<std::string> defects;
    Schedule schedule;
    CostBreakdown cost;
    Deployment deployment;
};

// Realized visit after the planning pass; dropped genes never appear.
struct Visit {
    int route = 0;
    int cluster_local = 0;
    int cluster_global = 0;
    int facility = 0;
    int charger = 0;
    double duration = 0;
    double battery_at_facility = 0;
};

struct Pass1Result {
    std::vector<Visit> visits;                // route-major
    std::vector<int> route_begin;             // size R+1, offsets into visits
    std::vector<std::vector<double>> battery; // [route][node 0..m+1]
    std::vector<double> route_deficit;        // target recharge per route, driving minutes
    int battery_defects = 0;
    int deficit_defects = 0;
    std::vector<std::string> notes;
};

struct PoolStat {
    double total_wait = 0;
    int peak_slot_count = 0;
    int visitors = 0;
};

struct Pass2Result {
    std::vector<double> waits;    // per visit
    std::vector<double> arrivals; // per visit, consistent with the final waits
    std::vector<double> final_departure;
    bool converged = true;
    int sweeps = 0;
    int capacity_defects = 0;
    int shift_defects = 0;
    std::vector<PoolStat> pools; // flat facility-major [f * K + k]
    CostBreakdown cost;
    int defect_count(const Pass1Result& p1) const {
        return p1.battery_defects + p1.deficit_defects + capacity_defects + shift_defects +
               (converged ? 0 : 1);
    }
};

// Reusable evaluation state. Pass 1 depends on the plan only; pass 2 may be
// re-run for many charger deployments against the same pass-1 result.
class Evaluator {
public:
    Evaluator(const ClusterInstance& ci, EvalOptions opts = {});

    const Pass1Result& run_pass1(const std::vector<PlanGene>& genes);
    // tie_rank, when given, orders visits with equal arrival times (lower
    // rank first); by default ties break on (route, cluster).
    const Pass2Result& run_pass2(const std::vector<std::vector<int>>& z,
                                 const std::vector<int>* tie_rank = nullptr);
    const Pass1Result& pass1() const { return p1_; }
    const Pass2Result& pass2() const { return p2_; }

    EvalOutcome build_outcome(const RechargePlan& plan, const std::vector<std::vector<int>>& z);

private:
    const ClusterInstance& ci_;
    EvalOptions opts_;
    Pass1Result p1_;
    Pass2Result p2_;
    std::vector<std::vector<int>> pool_visits_;
    std::vector<double> arrivals_;
    std::vector<double> new_waits_;
    std::vector<int> slot_counts_;
    std::vector<double> servers_;
};

// Grid slots a session [start, end] occupies: all t with
// start - step < D_t <= end, closed boundaries resolved with a 1e-9 band.
std::vector<int> occupied_steps(double start, double end, double step_min, int num_steps);

struct OccupancyCell {
    int facility = 0;
    int charger = 0;
    int step = 0;
    int count = 0;
};

std::vector<OccupancyCell> compute_occupancy(const ClusterInstance& ci, const Schedule& schedule);

Pass1Result compute_recharge_durations(const ClusterInstance& ci, const RechargePlan& plan,
                                       const EvalOptions& opts = {});

EvalOutcome evaluate_plan(const ClusterInstance& ci, const RechargePlan& plan,
                          const std::vector<std::vector<int>>& z, const EvalOptions& opts = {});

CostBreakdown objective(const ClusterInstance& ci, const Schedule& schedule,
                        const Deployment& deployment);

// Verifies a schedule against the cluster-level model constraints. Lenient
// where the time grid merely discretizes a continuous quantity; genuinely
// boundary-sensitive observations land in audit instead.
std::vector<Violation> check_feasibility(const ClusterInstance& ci, const RechargePlan& plan,
                                         const Deployment& deployment, const Schedule& schedule,
                                         std::vector<std::string>* audit = nullptr,
                                         double tol = kFeasTol);

}  // namespace evselca
