#include "ga.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>
#include <unordered_map>

namespace evselca {

std::string plan_key(const std::vector<PlanGene>& genes) {
    std::string key;
    key.reserve(genes.size() * 2);
    for (const PlanGene& g : genes) {
        key.push_back(static_cast<char>(g.set() ? g.facility + 1 : 0));
        key.push_back(static_cast<char>(g.set() ? g.charger + 1 : 0));
    }
    return key;
}

RechargePlan initialize_plan(const ClusterInstance& ci, const GaConfig& cfg, Rng& rng) {
    const int K = ci.num_charger_types();
    RechargePlan plan;
    plan.genes.assign(static_cast<size_t>(ci.total_clusters()), PlanGene{});
    std::vector<PlanGene> drawn(plan.genes.size());

    std::vector<double> fweights;
    std::vector<double> kweights = cfg.charger_weights;
    if (kweights.empty()) kweights.assign(static_cast<size_t>(K), 1.0);

    for (int g = 0; g < ci.total_clusters(); ++g) {
        const auto [r, c] = ci.cluster_index[static_cast<size_t>(g)];
        const RouteTransform& rt = ci.routes[static_cast<size_t>(r)];
        const auto& fs = rt.feasible_facilities[static_cast<size_t>(c)];
        if (fs.empty()) continue;
        fweights.clear();
        for (int f : fs) {
            const double detour = rt.detour_min[static_cast<size_t>(c)][static_cast<size_t>(f)];
            fweights.push_back(std::pow(1.0 / (1.0 + detour), cfg.temperature));
        }
        const int f = fs[rng.weighted_index(fweights)];
        const int k = static_cast<int>(rng.weighted_index(kweights));
        drawn[static_cast<size_t>(g)] = {f, k};
        if (rng.uniform() < 1.0 - cfg.no_charge_prob) plan.genes[static_cast<size_t>(g)] = {f, k};
    }

    int g0 = 0;
    for (const RouteTransform& rt : ci.routes) {
        const int m = rt.size();
        bool any = false;
        std::vector<int> candidates;
        for (int c = 0; c < m; ++c) {
            if (plan.genes[static_cast<size_t>(g0 + c)].set()) any = true;
            if (!rt.feasible_facilities[static_cast<size_t>(c)].empty()) candidates.push_back(c);
        }
        if (!any && rt.deficit_min() > kFeasTol && !candidates.empty()) {
            int stops = static_cast<int>(std::ceil(rt.deficit_min() / ci.base.battery_cap_min));
            stops = std::min(stops, static_cast<int>(candidates.size()));
            const auto picks = rng.sample_indices(static_cast<int>(candidates.size()), stops);
            for (int idx : picks) {
                const int c = candidates[static_cast<size_t>(idx)];
                plan.genes[static_cast<size_t>(g0 + c)] = drawn[static_cast<size_t>(g0 + c)];
            }
        }
        g0 += m;
    }
    return plan;
}

RechargePlan crossover(const RechargePlan& a, const RechargePlan& b, Rng& rng) {
    RechargePlan child;
    child.genes.resize(a.genes.size());
    for (size_t i = 0; i < a.genes.size(); ++i) {
        child.genes[i] = rng.bernoulli(0.5) ? a.genes[i] : b.genes[i];
    }
    return child;
}

RechargePlan mutate(const ClusterInstance& ci, const RechargePlan& parent, const GaConfig& cfg,
                    Rng& rng) {
    RechargePlan out = parent;
    const int total = static_cast<int>(out.genes.size());
    const int n = static_cast<int>(std::floor(total * cfg.mutate_fraction));
    if (n <= 0) return out;
    const int K = ci.num_charger_types();
    for (int p : rng.sample_indices(total, std::min(n, total))) {
        const auto [r, c] = ci.cluster_index[static_cast<size_t>(p)];
        const auto& fs =
            ci.routes[static_cast<size_t>(r)].feasible_facilities[static_cast<size_t>(c)];
        PlanGene& gene = out.genes[static_cast<size_t>(p)];
        if (!gene.set()) {
            if (!fs.empty()) gene = {fs.front(), 0};
            continue;
        }
        int fi = 0;
        for (size_t i = 0; i < fs.size(); ++i) {
            if (fs[i] == gene.facility) {
                fi = static_cast<int>(i);
                break;
            }
        }
        gene.facility = fs.empty() ? gene.facility
                                   : fs[static_cast<size_t>((fi + 1) % static_cast<int>(fs.size()))];
        gene.charger = (gene.charger + 1) % K;
    }
    return out;
}

namespace {

struct RefineState {
    const ClusterInstance& ci;
    Evaluator& ev;
    RefineResult& result;
    int used_pools = 0;

    // Evaluates z and folds the outcome into the running best.
    const Pass2Result& probe(const std::vector<std::vector<int>>& z) {
        const Pass2Result& p2 = ev.run_pass2(z);
        ++result.evaluations;
        const int defects = p2.defect_count(ev.pass1());
        if (defects == 0) {
            if (!result.fitness.feasible || p2.cost.total < result.fitness.cost ||
                (p2.cost.total == result.fitness.cost && z < result.z)) {
                result.fitness = {true, p2.cost.total, 0};
                result.z = z;
                result.cost = p2.cost;
            }
        } else if (!result.fitness.feasible) {
            if (defects < result.fitness.defects ||
                (defects == result.fitness.defects && p2.cost.total < result.fitness.cost)) {
                result.fitness.defects = defects;
                result.fitness.cost = p2.cost.total;
                result.z = z;
                result.cost = p2.cost;
            }
        }
        return p2;
    }
};

std::vector<std::pair<int, int>> used_pool_list(const Pass1Result& p1) {
    std::vector<std::pair<int, int>> pools;
    for (const Visit& v : p1.visits) {
        const std::pair<int, int> p{v.facility, v.charger};
        if (std::find(pools.begin(), pools.end(), p) == pools.end()) pools.push_back(p);
    }
    std::sort(pools.begin(), pools.end());
    return pools;
}

}  // namespace

RefineResult refine_charger_counts(const ClusterInstance& ci, Evaluator& ev,
                                   const std::vector<PlanGene>& genes, const GaConfig& cfg,
                                   std::uint64_t seed) {
    RefineResult result;
    const int F = ci.num_facilities();
    const int K = ci.num_charger_types();
    const Pass1Result& p1 = ev.run_pass1(genes);

    std::vector<std::vector<int>> zeros(static_cast<size_t>(F), std::vector<int>(static_cast<size_t>(K), 0));
    if (p1.battery_defects > 0 || p1.deficit_defects > 0) {
        // No deployment can repair the battery chain; report the plan defect.
        const Pass2Result& p2 = ev.run_pass2(zeros);
        ++result.evaluations;
        result.fitness = {false, p2.cost.total, p2.defect_count(p1)};
        result.z = zeros;
        result.cost = p2.cost;
        return result;
    }

    RefineState st{ci, ev, result};
    if (p1.visits.empty()) {
        st.probe(zeros);
        return result;
    }

    const auto pools = used_pool_list(p1);
    st.used_pools = static_cast<int>(pools.size());

    // Ceiling: one charger per visitor, then tightened to the grid peak of
    // the resulting zero-wait schedule.
    std::vector<std::vector<int>> z_hi = zeros;
    for (const Visit& v : p1.visits) {
        ++z_hi[static_cast<size_t>(v.facility)][static_cast<size_t>(v.charger)];
    }
    {
        const Pass2Result& p2 = st.probe(z_hi);
        for (const auto& [f, k] : pools) {
            const int peak = p2.pools[static_cast<size_t>(f * K + k)].peak_slot_count;
            if (peak > 0) z_hi[static_cast<size_t>(f)][static_cast<size_t>(k)] = peak;
        }
    }
    const Pass2Result& hi2 = st.probe(z_hi);
    const bool hi_ok = hi2.defect_count(p1) == 0;
    const double hi_cost = hi2.cost.total;
    if (!hi_ok) {
        // The wait-free ceiling already fails, so the plan itself is beyond
        // rescue by charger counts alone.
        return result;
    }

    std::vector<std::vector<int>> z_lo = zeros;
    for (const auto& [f, k] : pools) z_lo[static_cast<size_t>(f)][static_cast<size_t>(k)] = 1;

    Rng rng(seed);
    bool lo_ok = false;
    double lo_cost = 0;
    std::vector<std::vector<int>> z_cur = z_lo;
    {
        const Pass2Result* p2 = &st.probe(z_cur);
        lo_ok = p2->defect_count(p1) == 0;
        lo_cost = p2->cost.total;
        const int n_lower = std::max(1, cfg.n_lower);
        double n_upper = cfg.n_upper > 0 ? cfg.n_upper : static_cast<double>(pools.size());
        while (!lo_ok) {
            std::vector<std::pair<int, int>> cand;
            for (const auto& [f, k] : pools) {
                if (z_cur[static_cast<size_t>(f)][static_cast<size_t>(k)] <
                    z_hi[static_cast<size_t>(f)][static_cast<size_t>(k)]) {
                    cand.push_back({f, k});
                }
            }
            if (cand.empty()) break;
            std::sort(cand.begin(), cand.end(), [&](const auto& a, const auto& b) {
                const PoolStat& sa = p2->pools[static_cast<size_t>(a.first * K + a.second)];
                const PoolStat& sb = p2->pools[static_cast<size_t>(b.first * K + b.second)];
                if (sa.total_wait != sb.total_wait) return sa.total_wait > sb.total_wait;
                const int ea = sa.peak_slot_count - z_cur[static_cast<size_t>(a.first)][static_cast<size_t>(a.second)];
                const int eb = sb.peak_slot_count - z_cur[static_cast<size_t>(b.first)][static_cast<size_t>(b.second)];
                if (ea != eb) return ea > eb;
                return a < b;
            });
            const int hi_draw = std::max(n_lower, static_cast<int>(std::llround(n_upper)));
            const int n = static_cast<int>(rng.uniform_int(n_lower, hi_draw));
            for (int i = 0; i < std::min<int>(n, static_cast<int>(cand.size())); ++i) {
                ++z_cur[static_cast<size_t>(cand[static_cast<size_t>(i)].first)]
                       [static_cast<size_t>(cand[static_cast<size_t>(i)].second)];
            }
            p2 = &st.probe(z_cur);
            lo_ok = p2->defect_count(p1) == 0;
            lo_cost = p2->cost.total;
            if (n_upper - n_lower >= 1) n_upper = (n_upper + n_lower) / 2;
        }
    }

    // Hill phase: walk single-pool moves from the cheaper bracket end.
    if (hi_ok && (!lo_ok || hi_cost <= lo_cost)) {
        std::vector<std::vector<int>> z = z_hi;
        double cost = hi_cost;
        bool moved = true;
        while (moved) {
            moved = false;
            std::vector<std::pair<int, int>> order = pools;
            std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
                const int za = z[static_cast<size_t>(a.first)][static_cast<size_t>(a.second)];
                const int zb = z[static_cast<size_t>(b.first)][static_cast<size_t>(b.second)];
                if (za != zb) return za > zb;
                return a < b;
            });
            for (const auto& [f, k] : order) {
                int& cell = z[static_cast<size_t>(f)][static_cast<size_t>(k)];
                if (cell <= 1) continue;
                --cell;
                const Pass2Result& p2 = st.probe(z);
                if (p2.defect_count(p1) == 0 && p2.cost.total <= cost) {
                    cost = p2.cost.total;
                    moved = true;
                    break;
                }
                ++cell;
            }
        }
    } else if (lo_ok) {
        std::vector<std::vector<int>> z = z_cur;
        double cost = lo_cost;
        bool moved = true;
        while (moved) {
            moved = false;
            const Pass2Result& base = st.probe(z);
            std::vector<std::pair<int, int>> order = pools;
            std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
                const PoolStat& sa = base.pools[static_cast<size_t>(a.first * K + a.second)];
                const PoolStat& sb = base.pools[static_cast<size_t>(b.first * K + b.second)];
                if (sa.total_wait != sb.total_wait) return sa.total_wait > sb.total_wait;
                return a < b;
            });
            for (const auto& [f, k] : order) {
                int& cell = z[static_cast<size_t>(f)][static_cast<size_t>(k)];
                if (cell >= z_hi[static_cast<size_t>(f)][static_cast<size_t>(k)]) continue;
                ++cell;
                const Pass2Result& p2 = st.probe(z);
                if (p2.defect_count(p1) == 0 && p2.cost.total < cost) {
                    cost = p2.cost.total;
                    moved = true;
                    break;
                }
                --cell;
            }
        }
    }
    return result;
}

namespace {

struct Individual {
    RechargePlan plan;
    std::string key;
    Fitness fitness;
};

bool individual_less(const Individual& a, const Individual& b) {
    if (a.fitness < b.fitness) return true;
    if (b.fitness < a.fitness) return false;
    return a.key < b.key;
}

class PlanCache {
public:
    explicit PlanCache(const ClusterInstance& ci, const GaConfig& cfg) : ci_(ci), cfg_(cfg) {}

    const RefineResult* find(const std::string& key) const {
        auto it = map_.find(key);
        return it == map_.end() ? nullptr : &it->second;
    }

    // Evaluates every key not yet cached. Results are keyed by content, so
    // thread scheduling cannot affect them.
    void evaluate(const std::vector<const Individual*>& batch) {
        std::vector<const Individual*> todo;
        for (const Individual* ind : batch) {
            if (map_.count(ind->key)) continue;
            bool seen = false;
            for (const Individual* t : todo) {
                if (t->key == ind->key) {
                    seen = true;
                    break;
                }
            }
            if (!seen) todo.push_back(ind);
        }
        if (todo.empty()) return;
        std::vector<RefineResult> results(todo.size());
        auto work = [&](size_t begin, size_t end) {
            Evaluator ev(ci_, EvalOptions{cfg_.legacy_rounding, kFeasTol});
            for (size_t i = begin; i < end; ++i) {
                const std::uint64_t seed = derive_seed(cfg_.seed, fnv1a64(todo[i]->key));
                results[i] = refine_charger_counts(ci_, ev, todo[i]->plan.genes, cfg_, seed);
            }
        };
        const int threads = std::min<int>(cfg_.threads, static_cast<int>(todo.size()));
        if (threads <= 1) {
            work(0, todo.size());
        } else {
            std::vector<std::thread> pool;
            const size_t chunk = (todo.size() + static_cast<size_t>(threads) - 1) / static_cast<size_t>(threads);
            for (int t = 0; t < threads; ++t) {
                const size_t b = static_cast<size_t>(t) * chunk;
                const size_t e = std::min(todo.size(), b + chunk);
                if (b < e) pool.emplace_back(work, b, e);
            }
            for (auto& th : pool) th.join();
        }
        for (size_t i = 0; i < todo.size(); ++i) {
            deployment_evals += results[i].evaluations;
            map_.emplace(todo[i]->key, std::move(results[i]));
        }
    }

    size_t size() const { return map_.size(); }
    std::int64_t deployment_evals = 0;

private:
    const ClusterInstance& ci_;
    const GaConfig& cfg_;
    std::unordered_map<std::string, RefineResult> map_;
};

}  // namespace

GaResult ga_solve(const ClusterInstance& ci, const GaConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    GaResult out;

    for (const RouteTransform& rt : ci.routes) {
        if (rt.deficit_min() <= kFeasTol) continue;
        bool reachable = false;
        for (const auto& fs : rt.feasible_facilities) {
            if (!fs.empty()) reachable = true;
        }
        if (!reachable) {
            throw InfeasibleError("route " + std::to_string(rt.route_idx) +
                                  " needs recharging but no facility is reachable from any cluster");
        }
    }

    PlanCache cache(ci, cfg);
    std::vector<Individual> pop;
    pop.reserve(static_cast<size_t>(cfg.population));
    for (int i = 0; i < cfg.population; ++i) {
        Rng rng(derive_seed(cfg.seed, 0, static_cast<std::uint64_t>(i)));
        Individual ind;
        ind.plan = initialize_plan(ci, cfg, rng);
        ind.key = plan_key(ind.plan.genes);
        pop.push_back(std::move(ind));
    }

    auto evaluate_all = [&](std::vector<Individual>& group) {
        std::vector<const Individual*> batch;
        batch.reserve(group.size());
        for (const Individual& ind : group) batch.push_back(&ind);
        cache.evaluate(batch);
        for (Individual& ind : group) ind.fitness = cache.find(ind.key)->fitness;
    };
    evaluate_all(pop);
    std::sort(pop.begin(), pop.end(), individual_less);

    auto trace_row = [&](int gen) {
        GaTraceRow row;
        row.generation = gen;
        row.best_feasible = pop.front().fitness.feasible;
        row.best_cost = pop.front().fitness.feasible ? pop.front().fitness.cost : -1;
        double sum = 0;
        for (const Individual& ind : pop) {
            if (ind.fitness.feasible) {
                ++row.feasible_count;
                sum += ind.fitness.cost;
            }
        }
        row.mean_feasible_cost = row.feasible_count ? sum / row.feasible_count : -1;
        out.trace.push_back(row);
    };
    trace_row(0);

    const int P = std::min(cfg.parents, cfg.population);
    for (int gen = 1; gen <= cfg.iterations; ++gen) {
        if (cfg.time_limit_s > 0) {
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (elapsed > cfg.time_limit_s) break;
        }
        std::vector<Individual> next(pop.begin(), pop.begin() + P);
        int slot = 0;
        for (int i = 0; i < P; ++i) {
            for (int j = 0; j < P; ++j) {
                if (i == j) continue;
                Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(gen),
                                    static_cast<std::uint64_t>(slot++)));
                Individual child;
                child.plan = crossover(pop[static_cast<size_t>(i)].plan,
                                       pop[static_cast<size_t>(j)].plan, rng);
                child.key = plan_key(child.plan.genes);
                next.push_back(std::move(child));
            }
        }
        for (int i = 0; i < P; ++i) {
            Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(gen),
                                static_cast<std::uint64_t>(slot++)));
            Individual mut;
            mut.plan = mutate(ci, pop[static_cast<size_t>(i)].plan, cfg, rng);
            mut.key = plan_key(mut.plan.genes);
            next.push_back(std::move(mut));
        }
        while (static_cast<int>(next.size()) < cfg.population) {
            Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(gen),
                                static_cast<std::uint64_t>(slot++)));
            Individual fresh;
            fresh.plan = initialize_plan(ci, cfg, rng);
            fresh.key = plan_key(fresh.plan.genes);
            next.push_back(std::move(fresh));
        }
        evaluate_all(next);
        std::sort(next.begin(), next.end(), individual_less);
        if (static_cast<int>(next.size()) > cfg.population) {
            next.resize(static_cast<size_t>(cfg.population));
        }
        pop = std::move(next);
        trace_row(gen);
    }

    const Individual& best = pop.front();
    const RefineResult* rr = cache.find(best.key);
    out.feasible = rr->fitness.feasible;
    out.plan = best.plan;
    out.deployment = open_flags_from_z(rr->z);
    out.cost = rr->cost;
    out.defects = rr->fitness.feasible ? 0 : rr->fitness.defects;
    out.unique_plans = static_cast<std::int64_t>(cache.size());
    out.deployment_evals = cache.deployment_evals;
    out.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace evselca
