#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "evaluator.hpp"
#include "transform.hpp"

namespace evselca {

struct LpLimits {
    std::int64_t max_vars = 2000000;
    std::int64_t max_rows = 5000000;
};

// Writes the cluster-level MILP in CPLEX LP format. Variable and row names
// encode their indices (q_r0c1f2k0, x_r0c1f2k0t14, b_r0n3, ...), so a solver
// solution can be replayed against the same clustered instance. Throws
// LimitError when the model would exceed the size limits.
std::string emit_lp(const ClusterInstance& ci, const LpLimits& limits = {});

struct SolutionValues {
    std::map<std::string, double> variables; // absent names read as zero
    bool has_objective = false;
    double objective = 0;
};

struct ReplayResult {
    RechargePlan plan;
    Deployment deployment;
    Schedule schedule;
    CostBreakdown cost; // recomputed from the reconstructed schedule
    bool has_file_objective = false;
    double file_objective = 0;
    bool objective_matches = true;
    std::vector<Violation> violations;
    std::vector<std::string> audit;
};

// Reconstructs plan, deployment and schedule from solver variable values,
// cross-checks the occupancy grid against the session times, then runs the
// full feasibility checker and reprices the objective.
ReplayResult replay_solution(const ClusterInstance& ci, const SolutionValues& sol,
                             double rel_tol = 1e-6);

}  // namespace evselca
