#pragma once

#include <cstdint>
#include <vector>

#include "evaluator.hpp"
#include "ga.hpp"

namespace evselca {

struct ExactConfig {
    double max_space = 1e7; // cap on (plan, deployment) evaluations
    int threads = 1;
    int tie_perm_cap = 24;  // alternative service orders tried on arrival ties
    bool legacy_rounding = false;
};

struct ExactResult {
    bool feasible = false;
    RechargePlan plan;
    Deployment deployment;
    CostBreakdown cost;
    double plans_enumerated = 0;
    std::int64_t evaluations = 0;
    bool optimal = false;        // true only for the full enumeration
    bool tie_order_used = false; // cost relies on a non-default service order
    int defects = 0;             // best attempt when infeasible
};

// Full enumeration over the gene space crossed with charger counts from one
// per used pool up to that pool's visitor count. Optimal with respect to the
// evaluator's first-come-first-served semantics; on arrival ties the best
// service order found within tie_perm_cap variants is used.
ExactResult exact_solve(const ClusterInstance& ci, const ExactConfig& cfg = {});

// Deployment enumeration for one fixed plan.
ExactResult solve_fixed_q(const ClusterInstance& ci, const RechargePlan& plan,
                          const ExactConfig& cfg = {});

// Seeded construction plans, each refined by solve_fixed_q; not optimal.
ExactResult hybrid_solve(const ClusterInstance& ci, const GaConfig& ga_cfg,
                         const ExactConfig& cfg = {});

}  // namespace evselca
