#pragma once

#include <string>
#include <vector>

#include "domain.hpp"

namespace evselca {

// Cut positions are counted in stops: cut p splits the stop sequence after
// the p-th stop (1-based), i.e. it removes leg p-1 (0-based) from cluster
// interiors. A segment's load is the sum of its interior legs plus its
// outgoing cut leg; the final segment has no cut leg.
struct CutSolution {
    std::vector<int> cut_positions; // strictly increasing, each in [1, M-1]
    double objective = 0;           // total travel time of the cut legs
};

struct CutOutcome {
    bool feasible = false;
    CutSolution solution;
    std::string reason; // set when infeasible
};

struct MinClustersOutcome {
    bool feasible = false;
    int n_cuts = 0;
    CutSolution solution;
    int offending_leg = -1; // leg whose time alone exceeds the cap, when hard infeasible
    std::string reason;
};

struct Cluster {
    std::vector<int> members;       // contiguous ascending stop indices
    double internal_travel_min = 0; // legs strictly inside the cluster
    double internal_service_min = 0;
    int entry_stop = -1;
    int exit_stop = -1;
};

// Travel times of consecutive stop legs (size M-1 for M stops).
std::vector<double> internal_leg_minutes(const Instance& inst, int route_idx);

// Exact DP over the given leg times. Ties in the objective resolve to the
// lexicographically smallest cut vector.
CutOutcome solve_cuts_legs(const std::vector<double>& legs, int n_cuts, double intra_cap);
CutOutcome solve_cuts(const Instance& inst, int route_idx, int n_cuts, double intra_cap);

// Smallest cut count whose DP is feasible; 0 means the whole route fits.
MinClustersOutcome min_clusters_legs(const std::vector<double>& legs, double intra_cap);
MinClustersOutcome min_clusters(const Instance& inst, int route_idx, double intra_cap);

std::vector<Cluster> build_clusters(const Instance& inst, int route_idx, const CutSolution& cuts);

std::vector<Violation> validate_cut_solution(size_t num_stops, const CutSolution& cuts);

}  // namespace evselca
