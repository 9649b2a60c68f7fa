#include "exact.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

namespace evselca {

namespace {

struct OptionTable {
    // Per global cluster: option 0 is "skip"; option 1 + fi * K + k picks the
    // fi-th reachable facility with charger type k.
    std::vector<std::vector<PlanGene>> options;
    double plan_count = 1;

    explicit OptionTable(const ClusterInstance& ci) {
        const int K = ci.num_charger_types();
        options.resize(static_cast<size_t>(ci.total_clusters()));
        for (int g = 0; g < ci.total_clusters(); ++g) {
            const auto [r, c] = ci.cluster_index[static_cast<size_t>(g)];
            const auto& fs =
                ci.routes[static_cast<size_t>(r)].feasible_facilities[static_cast<size_t>(c)];
            auto& opts = options[static_cast<size_t>(g)];
            opts.push_back(PlanGene{});
            for (int f : fs) {
                for (int k = 0; k < K; ++k) opts.push_back(PlanGene{f, k});
            }
            plan_count *= static_cast<double>(opts.size());
        }
    }

    void decode(std::uint64_t id, std::vector<PlanGene>& genes) const {
        for (size_t g = 0; g < options.size(); ++g) {
            const std::uint64_t radix = options[g].size();
            genes[g] = options[g][static_cast<size_t>(id % radix)];
            id /= radix;
        }
    }
};

struct Best {
    bool found = false;
    double cost = 0;
    std::uint64_t plan_id = 0;
    std::vector<PlanGene> genes;
    std::vector<std::vector<int>> z;

    bool better(double c, std::uint64_t id, const std::vector<std::vector<int>>& zc) const {
        if (!found) return true;
        if (c != cost) return c < cost;
        if (id != plan_id) return id < plan_id;
        return zc < z;
    }
    void take(double c, std::uint64_t id, std::vector<PlanGene> g, std::vector<std::vector<int>> zc) {
        found = true;
        cost = c;
        plan_id = id;
        genes = std::move(g);
        z = std::move(zc);
    }
};

struct InfeasBest {
    bool seen = false;
    int defects = 0;
    double cost = 0;
    std::uint64_t plan_id = 0;
    std::vector<PlanGene> genes;
    std::vector<std::vector<int>> z;
};

// Enumerates charger counts over the used pools of the current pass-1 state;
// calls visit(z, pass2) for each combination.
template <typename Fn>
void for_each_deployment(const ClusterInstance& ci, Evaluator& ev, Fn&& visit) {
    const int F = ci.num_facilities();
    const int K = ci.num_charger_types();
    std::vector<int> pool_of;
    std::vector<int> cap;
    std::vector<std::vector<int>> z(static_cast<size_t>(F), std::vector<int>(static_cast<size_t>(K), 0));
    for (const Visit& v : ev.pass1().visits) {
        const int p = v.facility * K + v.charger;
        auto it = std::find(pool_of.begin(), pool_of.end(), p);
        if (it == pool_of.end()) {
            pool_of.push_back(p);
            cap.push_back(1);
        } else {
            ++cap[static_cast<size_t>(it - pool_of.begin())];
        }
    }
    // ascending pool order keeps the z-lexicographic tie rule meaningful
    std::vector<size_t> perm(pool_of.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(), [&](size_t a, size_t b) { return pool_of[a] < pool_of[b]; });

    const size_t n = pool_of.size();
    std::vector<int> counts(n, 1);
    while (true) {
        for (size_t i = 0; i < n; ++i) {
            const int p = pool_of[perm[i]];
            z[static_cast<size_t>(p / K)][static_cast<size_t>(p % K)] = counts[i];
        }
        visit(z);
        size_t i = 0;
        for (; i < n; ++i) {
            if (counts[i] < cap[perm[i]]) {
                ++counts[i];
                break;
            }
            counts[i] = 1;
        }
        if (i == n) break;
    }
}

std::vector<std::vector<int>> tie_groups(const ClusterInstance& ci, const Pass1Result& p1,
                                         const Pass2Result& p2) {
    const int K = ci.num_charger_types();
    const int V = static_cast<int>(p1.visits.size());
    std::vector<std::vector<int>> groups;
    std::vector<std::vector<int>> by_pool(static_cast<size_t>(ci.num_facilities() * K));
    for (int v = 0; v < V; ++v) {
        const Visit& vis = p1.visits[static_cast<size_t>(v)];
        by_pool[static_cast<size_t>(vis.facility * K + vis.charger)].push_back(v);
    }
    for (auto& members : by_pool) {
        std::sort(members.begin(), members.end(), [&](int a, int b) {
            return p2.arrivals[static_cast<size_t>(a)] < p2.arrivals[static_cast<size_t>(b)];
        });
        for (size_t i = 0; i < members.size();) {
            size_t j = i + 1;
            while (j < members.size() &&
                   std::abs(p2.arrivals[static_cast<size_t>(members[j])] -
                            p2.arrivals[static_cast<size_t>(members[i])]) <= 1e-12) {
                ++j;
            }
            if (j - i >= 2) {
                groups.emplace_back(members.begin() + static_cast<std::ptrdiff_t>(i),
                                    members.begin() + static_cast<std::ptrdiff_t>(j));
            }
            i = j;
        }
    }
    return groups;
}

// Arrival ties make the service order at a pool ambiguous; the model treats
// any order as admissible, so the winner is the cheapest feasible variant.
// The deterministic (route, cluster) order is always among those tried.
void improve_with_tie_orders(const ClusterInstance& ci, Evaluator& ev, const ExactConfig& cfg,
                             Best& best, CostBreakdown& cost, bool& tie_order_used,
                             std::int64_t& evals) {
    const Pass1Result& p1 = ev.run_pass1(best.genes);
    cost = ev.run_pass2(best.z).cost;
    const auto groups = tie_groups(ci, p1, ev.pass2());
    if (groups.empty()) return;

    double variants = 1;
    for (const auto& g : groups) {
        for (size_t i = 2; i <= g.size(); ++i) variants *= static_cast<double>(i);
    }
    if (variants > cfg.tie_perm_cap) return;

    const int V = static_cast<int>(p1.visits.size());
    std::vector<int> identity(static_cast<size_t>(V));
    for (int v = 0; v < V; ++v) identity[static_cast<size_t>(v)] = v;

    std::vector<std::vector<int>> ranks{identity};
    for (const auto& group : groups) {
        std::vector<int> slots(group);
        std::sort(slots.begin(), slots.end());
        std::vector<int> serve = slots;
        std::vector<std::vector<int>> expanded;
        do {
            for (const auto& base : ranks) {
                std::vector<int> variant = base;
                for (size_t j = 0; j < serve.size(); ++j) {
                    variant[static_cast<size_t>(serve[j])] = slots[j];
                }
                expanded.push_back(std::move(variant));
            }
        } while (std::next_permutation(serve.begin(), serve.end()));
        ranks = std::move(expanded);
    }

    for (const auto& variant : ranks) {
        const Pass2Result& p2 = ev.run_pass2(best.z, &variant);
        ++evals;
        if (p2.defect_count(p1) == 0 && p2.cost.total < cost.total - 1e-12) {
            cost = p2.cost;
            tie_order_used = true;
        }
    }
    best.cost = cost.total;
}

ExactResult finish(const ClusterInstance& ci, const ExactConfig& cfg, Best& best,
                   const InfeasBest& infeas, double plans, std::int64_t evals, bool optimal) {
    ExactResult out;
    out.plans_enumerated = plans;
    out.evaluations = evals;
    out.optimal = optimal && best.found;
    Evaluator ev(ci, EvalOptions{cfg.legacy_rounding, kFeasTol});
    if (best.found) {
        out.feasible = true;
        out.plan.genes = best.genes;
        out.deployment = open_flags_from_z(best.z);
        improve_with_tie_orders(ci, ev, cfg, best, out.cost, out.tie_order_used, out.evaluations);
    } else if (infeas.seen) {
        out.plan.genes = infeas.genes;
        out.deployment = open_flags_from_z(infeas.z);
        out.defects = infeas.defects;
        ev.run_pass1(infeas.genes);
        out.cost = ev.run_pass2(infeas.z).cost;
    }
    return out;
}

}  // namespace

ExactResult exact_solve(const ClusterInstance& ci, const ExactConfig& cfg) {
    OptionTable table(ci);
    if (table.plan_count > cfg.max_space) {
        throw LimitError("exact enumeration needs " + std::to_string(table.plan_count) +
                         " plans, above the cap " + std::to_string(cfg.max_space) +
                         "; shrink the instance or raise max_space");
    }
    const std::uint64_t plan_count = static_cast<std::uint64_t>(table.plan_count);

    std::atomic<std::int64_t> evals{0};
    std::atomic<std::uint64_t> cursor{0};
    std::atomic<bool> over_budget{false};
    const int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(plan_count)));

    std::vector<Best> bests(static_cast<size_t>(threads));
    std::vector<InfeasBest> infeas(static_cast<size_t>(threads));

    auto worker = [&](int tid) {
        Evaluator ev(ci, EvalOptions{cfg.legacy_rounding, kFeasTol});
        std::vector<PlanGene> genes(static_cast<size_t>(ci.total_clusters()));
        Best& best = bests[static_cast<size_t>(tid)];
        InfeasBest& inf = infeas[static_cast<size_t>(tid)];
        constexpr std::uint64_t kChunk = 64;
        while (true) {
            const std::uint64_t begin = cursor.fetch_add(kChunk);
            if (begin >= plan_count || over_budget.load()) break;
            const std::uint64_t end = std::min(plan_count, begin + kChunk);
            for (std::uint64_t id = begin; id < end; ++id) {
                table.decode(id, genes);
                const Pass1Result& p1 = ev.run_pass1(genes);
                if (p1.battery_defects > 0 || p1.deficit_defects > 0) {
                    const int d = p1.battery_defects + p1.deficit_defects;
                    if (!inf.seen || d < inf.defects) {
                        inf.seen = true;
                        inf.defects = d;
                        inf.genes = genes;
                        inf.z.assign(static_cast<size_t>(ci.num_facilities()),
                                     std::vector<int>(static_cast<size_t>(ci.num_charger_types()), 0));
                        inf.plan_id = id;
                    }
                    continue;
                }
                std::int64_t local = 0;
                for_each_deployment(ci, ev, [&](const std::vector<std::vector<int>>& z) {
                    const Pass2Result& p2 = ev.run_pass2(z);
                    ++local;
                    const int d = p2.defect_count(p1);
                    if (d == 0) {
                        if (best.better(p2.cost.total, id, z)) {
                            best.take(p2.cost.total, id, genes, z);
                        }
                    } else if (!inf.seen || d < inf.defects) {
                        inf.seen = true;
                        inf.defects = d;
                        inf.genes = genes;
                        inf.z = z;
                        inf.plan_id = id;
                    }
                });
                if (evals.fetch_add(local) + local > static_cast<std::int64_t>(cfg.max_space)) {
                    over_budget.store(true);
                    break;
                }
            }
        }
    };

    if (threads <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    if (over_budget.load()) {
        throw LimitError("exact enumeration exceeded the evaluation cap " +
                         std::to_string(cfg.max_space) + "; shrink the instance or raise max_space");
    }

    Best merged;
    for (Best& b : bests) {
        if (b.found && merged.better(b.cost, b.plan_id, b.z)) {
            merged.take(b.cost, b.plan_id, std::move(b.genes), std::move(b.z));
        }
    }
    InfeasBest worst;
    for (InfeasBest& b : infeas) {
        if (!b.seen) continue;
        if (!worst.seen || b.defects < worst.defects ||
            (b.defects == worst.defects && b.plan_id < worst.plan_id)) {
            worst = std::move(b);
        }
    }
    return finish(ci, cfg, merged, worst, table.plan_count, evals.load(), true);
}

ExactResult solve_fixed_q(const ClusterInstance& ci, const RechargePlan& plan,
                          const ExactConfig& cfg) {
    Evaluator ev(ci, EvalOptions{cfg.legacy_rounding, kFeasTol});
    const Pass1Result& p1 = ev.run_pass1(plan.genes);
    Best best;
    InfeasBest inf;
    std::int64_t evals = 0;
    if (p1.battery_defects > 0 || p1.deficit_defects > 0) {
        inf.seen = true;
        inf.defects = p1.battery_defects + p1.deficit_defects;
        inf.genes = plan.genes;
        inf.z.assign(static_cast<size_t>(ci.num_facilities()),
                     std::vector<int>(static_cast<size_t>(ci.num_charger_types()), 0));
        return finish(ci, cfg, best, inf, 1, 0, false);
    }
    for_each_deployment(ci, ev, [&](const std::vector<std::vector<int>>& z) {
        if (evals > static_cast<std::int64_t>(cfg.max_space)) {
            throw LimitError("deployment enumeration exceeded the evaluation cap");
        }
        const Pass2Result& p2 = ev.run_pass2(z);
        ++evals;
        const int d = p2.defect_count(p1);
        if (d == 0) {
            if (best.better(p2.cost.total, 0, z)) best.take(p2.cost.total, 0, plan.genes, z);
        } else if (!inf.seen || d < inf.defects) {
            inf.seen = true;
            inf.defects = d;
            inf.genes = plan.genes;
            inf.z = z;
        }
    });
    return finish(ci, cfg, best, inf, 1, evals, false);
}

ExactResult hybrid_solve(const ClusterInstance& ci, const GaConfig& ga_cfg,
                         const ExactConfig& cfg) {
    std::set<std::string> seen;
    ExactResult best;
    bool have_attempt = false;
    std::int64_t evals = 0;
    double plans = 0;
    for (int i = 0; i < ga_cfg.population; ++i) {
        Rng rng(derive_seed(ga_cfg.seed, 0, static_cast<std::uint64_t>(i)));
        RechargePlan plan = initialize_plan(ci, ga_cfg, rng);
        if (!seen.insert(plan_key(plan.genes)).second) continue;
        plans += 1;
        ExactResult one = solve_fixed_q(ci, plan, cfg);
        evals += one.evaluations;
        if (one.feasible) {
            if (!best.feasible || one.cost.total < best.cost.total ||
                (one.cost.total == best.cost.total &&
                 plan_key(one.plan.genes) < plan_key(best.plan.genes))) {
                best = std::move(one);
            }
        } else if (!best.feasible && (!have_attempt || one.defects < best.defects)) {
            have_attempt = true;
            best = std::move(one);
        }
    }
    best.plans_enumerated = plans;
    best.evaluations = evals;
    best.optimal = false;
    return best;
}

}  // namespace evselca
