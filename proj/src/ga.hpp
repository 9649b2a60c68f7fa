#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "evaluator.hpp"
#include "rng.hpp"

namespace evselca {

struct GaConfig {
    int population = 50;
    int iterations = 200;
    int parents = 10;
    double mutate_fraction = 0.2;
    double no_charge_prob = 0.5;  // chance a drawn stop is discarded during init
    double temperature = 1.0;     // roulette sharpening on 1/(1+detour)
    std::vector<double> charger_weights; // empty = uniform over types
    int n_lower = 1;
    int n_upper = 0;              // 0 = one per used charger pool
    double time_limit_s = 0;      // 0 disables the wall clock entirely
    int threads = 1;
    std::uint64_t seed = 1;
    bool legacy_rounding = false;
};

struct Fitness {
    bool feasible = false;
    double cost = std::numeric_limits<double>::infinity();
    int defects = std::numeric_limits<int>::max();
};

inline bool operator<(const Fitness& a, const Fitness& b) {
    if (a.feasible != b.feasible) return a.feasible;
    if (a.feasible) return a.cost < b.cost;
    if (a.defects != b.defects) return a.defects < b.defects;
    return a.cost < b.cost;
}

struct RefineResult {
    Fitness fitness;
    std::vector<std::vector<int>> z;
    CostBreakdown cost;
    int evaluations = 0;
};

struct GaTraceRow {
    int generation = 0;
    bool best_feasible = false;
    double best_cost = 0;
    int feasible_count = 0;
    double mean_feasible_cost = 0;
};

struct GaResult {
    bool feasible = false;
    RechargePlan plan;
    Deployment deployment;
    CostBreakdown cost;
    int defects = 0;
    std::vector<GaTraceRow> trace;
    std::int64_t unique_plans = 0;
    std::int64_t deployment_evals = 0;
    double wall_time_s = 0;
};

// One individual drawn by the seeded construction: roulette facility pick,
// keep coin, then forced stops for deficit routes that came out empty.
RechargePlan initialize_plan(const ClusterInstance& ci, const GaConfig& cfg, Rng& rng);

RechargePlan crossover(const RechargePlan& a, const RechargePlan& b, Rng& rng);

RechargePlan mutate(const ClusterInstance& ci, const RechargePlan& parent, const GaConfig& cfg,
                    Rng& rng);

// Charger-count ladder for a fixed plan: bracket [one per pool, visitor
// count], randomized escalation out of an infeasible floor, then single-pool
// hill moves. Deterministic given the seed.
RefineResult refine_charger_counts(const ClusterInstance& ci, Evaluator& ev,
                                   const std::vector<PlanGene>& genes, const GaConfig& cfg,
                                   std::uint64_t seed);

GaResult ga_solve(const ClusterInstance& ci, const GaConfig& cfg);

// Cache key for memoized plan evaluation.
std::string plan_key(const std::vector<PlanGene>& genes);

}  // namespace evselca
