#include "evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <tuple>

namespace evselca {

Deployment open_flags_from_z(const std::vector<std::vector<int>>& z) {
    Deployment d;
    d.chargers = z;
    d.open.resize(z.size(), 0);
    for (size_t f = 0; f < z.size(); ++f) {
        for (int count : z[f]) {
            if (count > 0) {
                d.open[f] = 1;
                break;
            }
        }
    }
    return d;
}

std::vector<int> occupied_steps(double start, double end, double step_min, int num_steps) {
    std::vector<int> steps;
    if (end < start) return steps;
    int t_first = static_cast<int>(std::floor((start - step_min + 1e-9) / step_min)) + 1;
    int t_last = static_cast<int>(std::floor((end + 1e-9) / step_min));
    t_first = std::max(t_first, 0);
    t_last = std::min(t_last, num_steps - 1);
    for (int t = t_first; t <= t_last; ++t) steps.push_back(t);
    return steps;
}

Evaluator::Evaluator(const ClusterInstance& ci, EvalOptions opts) : ci_(ci), opts_(opts) {
    pool_visits_.resize(static_cast<size_t>(ci.num_facilities() * ci.num_charger_types()));
}

namespace {

double detour_extra(const RouteTransform& rt, int c, int f) {
    return rt.detour_min[static_cast<size_t>(c)][static_cast<size_t>(f)] +
           rt.resume_min[static_cast<size_t>(c)][static_cast<size_t>(f)] -
           rt.leg_min[static_cast<size_t>(c + 1)];
}

void validate_genes(const ClusterInstance& ci, const std::vector<PlanGene>& genes) {
    if (static_cast<int>(genes.size()) != ci.total_clusters()) {
        throw InputError("plan has " + std::to_string(genes.size()) + " genes, expected " +
                         std::to_string(ci.total_clusters()));
    }
    for (int g = 0; g < static_cast<int>(genes.size()); ++g) {
        const PlanGene& gene = genes[static_cast<size_t>(g)];
        if (!gene.set()) continue;
        if (gene.facility >= ci.num_facilities() || gene.charger < 0 ||
            gene.charger >= ci.num_charger_types()) {
            throw InputError("gene " + std::to_string(g) + " references an unknown facility or charger");
        }
        const auto [r, c] = ci.cluster_index[static_cast<size_t>(g)];
        const auto& fs = ci.routes[static_cast<size_t>(r)].feasible_facilities[static_cast<size_t>(c)];
        if (std::find(fs.begin(), fs.end(), gene.facility) == fs.end()) {
            throw InputError("gene " + std::to_string(g) + ": facility " +
                             std::to_string(gene.facility) + " is not reachable from this cluster");
        }
    }
}

}  // namespace

const Pass1Result& Evaluator::run_pass1(const std::vector<PlanGene>& genes) {
    validate_genes(ci_, genes);
    const int R = static_cast<int>(ci_.routes.size());
    p1_.visits.clear();
    p1_.route_begin.assign(static_cast<size_t>(R) + 1, 0);
    p1_.battery.resize(static_cast<size_t>(R));
    p1_.route_deficit.assign(static_cast<size_t>(R), 0);
    p1_.battery_defects = 0;
    p1_.deficit_defects = 0;
    p1_.notes.clear();

    int g0 = 0;
    for (int r = 0; r < R; ++r) {
        const RouteTransform& rt = ci_.routes[static_cast<size_t>(r)];
        const int m = rt.size();
        auto& battery = p1_.battery[static_cast<size_t>(r)];
        battery.assign(static_cast<size_t>(m) + 2, 0);

        double drain = rt.base_drive_min;
        for (int c = 0; c < m; ++c) {
            const PlanGene& gene = genes[static_cast<size_t>(g0 + c)];
            if (gene.set()) drain += detour_extra(rt, c, gene.facility);
        }
        double deficit = rt.final_battery_min + drain - rt.initial_battery_min;
        deficit = deficit > 0 ? deficit : 0;
        if (opts_.legacy_rounding && deficit > opts_.tol) deficit = std::floor(deficit + 1);
        p1_.route_deficit[static_cast<size_t>(r)] = deficit;

        double remaining = deficit;
        double cur = rt.initial_battery_min;
        battery[0] = cur;
        // A realized detour resumes directly at the next node, replacing the
        // direct leg; skip_leg marks that the arrival drain is already paid.
        bool skip_leg = false;
        for (int c = 0; c < m; ++c) {
            if (!skip_leg) cur -= rt.leg_min[static_cast<size_t>(c)];
            skip_leg = false;
            battery[static_cast<size_t>(c) + 1] = cur;
            if (cur < -opts_.tol) ++p1_.battery_defects;
            cur -= rt.gamma_min[static_cast<size_t>(c)];
            const PlanGene& gene = genes[static_cast<size_t>(g0 + c)];
            if (gene.set()) {
                const double b_fac =
                    cur - rt.detour_min[static_cast<size_t>(c)][static_cast<size_t>(gene.facility)];
                const double headroom = ci_.base.battery_cap_min - b_fac;
                const double gained = remaining < headroom ? remaining : headroom;
                if (remaining > opts_.tol && gained > opts_.tol) {
                    if (b_fac < -opts_.tol) ++p1_.battery_defects;
                    Visit v;
                    v.route = r;
                    v.cluster_local = c;
                    v.cluster_global = g0 + c;
                    v.facility = gene.facility;
                    v.charger = gene.charger;
                    v.duration = gained / ci_.derived.recharge_rate[static_cast<size_t>(gene.charger)];
                    v.battery_at_facility = b_fac;
                    p1_.visits.push_back(v);
                    remaining -= gained;
                    cur = b_fac + gained -
                          rt.resume_min[static_cast<size_t>(c)][static_cast<size_t>(gene.facility)];
                    skip_leg = true;
                } else {
                    remaining -= detour_extra(rt, c, gene.facility);
                    if (remaining < 0) remaining = 0;
                }
            }
        }
        if (!skip_leg) cur -= rt.leg_min[static_cast<size_t>(m)];
        battery[static_cast<size_t>(m) + 1] = cur;
        if (cur < rt.final_battery_min - opts_.tol) ++p1_.battery_defects;
        if (remaining > opts_.tol) {
            ++p1_.deficit_defects;
            std::ostringstream s;
            s << "route " << r << ": " << remaining << " driving minutes of deficit left unmet";
            p1_.notes.push_back(s.str());
        }
        g0 += m;
        p1_.route_begin[static_cast<size_t>(r) + 1] = static_cast<int>(p1_.visits.size());
    }
    // battery breach notes summarize; individual entries carry no extra signal
    if (p1_.battery_defects > 0) {
        p1_.notes.push_back("battery dips below empty " + std::to_string(p1_.battery_defects) +
                            " time(s) along the plan");
    }
    return p1_;
}

const Pass2Result& Evaluator::run_pass2(const std::vector<std::vector<int>>& z,
                                        const std::vector<int>* tie_rank) {
    const int R = static_cast<int>(ci_.routes.size());
    const int K = ci_.num_charger_types();
    const int P = ci_.num_facilities() * K;
    const int V = static_cast<int>(p1_.visits.size());
    if (static_cast<int>(z.size()) != ci_.num_facilities()) {
        throw InputError("deployment has the wrong facility count");
    }
    for (const auto& row : z) {
        if (static_cast<int>(row.size()) != K) throw InputError("deployment has the wrong charger type count");
    }

    p2_.waits.assign(static_cast<size_t>(V), 0);
    p2_.final_departure.assign(static_cast<size_t>(R), 0);
    p2_.converged = true;
    p2_.sweeps = 0;
    p2_.capacity_defects = 0;
    p2_.shift_defects = 0;
    p2_.pools.assign(static_cast<size_t>(P), PoolStat{});
    p2_.cost = CostBreakdown{};

    for (auto& pv : pool_visits_) pv.clear();
    for (int v = 0; v < V; ++v) {
        const Visit& vis = p1_.visits[static_cast<size_t>(v)];
        const int pool = vis.facility * K + vis.charger;
        pool_visits_[static_cast<size_t>(pool)].push_back(v);
        ++p2_.pools[static_cast<size_t>(pool)].visitors;
    }
    bool server_gap = false;
    for (int p = 0; p < P; ++p) {
        if (p2_.pools[static_cast<size_t>(p)].visitors > 0 && z[static_cast<size_t>(p / K)][static_cast<size_t>(p % K)] <= 0) {
            ++p2_.capacity_defects;
            server_gap = true;
        }
    }

    arrivals_.assign(static_cast<size_t>(V), 0);
    new_waits_.assign(static_cast<size_t>(V), 0);

    auto compute_arrivals = [&]() {
        for (int r = 0; r < R; ++r) {
            const RouteTransform& rt = ci_.routes[static_cast<size_t>(r)];
            double d = 0;
            int vp = p1_.route_begin[static_cast<size_t>(r)];
            const int vend = p1_.route_begin[static_cast<size_t>(r) + 1];
            for (int c = 0; c < rt.size(); ++c) {
                d += rt.leg_min[static_cast<size_t>(c)] + rt.kappa_min[static_cast<size_t>(c)] +
                     rt.gamma_min[static_cast<size_t>(c)];
                if (vp < vend && p1_.visits[static_cast<size_t>(vp)].cluster_local == c) {
                    const Visit& vis = p1_.visits[static_cast<size_t>(vp)];
                    const double detour =
                        rt.detour_min[static_cast<size_t>(c)][static_cast<size_t>(vis.facility)];
                    arrivals_[static_cast<size_t>(vp)] = d + detour;
                    d += detour + p2_.waits[static_cast<size_t>(vp)] + vis.duration;
                    ++vp;
                }
            }
            p2_.final_departure[static_cast<size_t>(r)] = d + rt.leg_min[static_cast<size_t>(rt.size())];
        }
    };

    if (!server_gap && V > 0) {
        const int max_sweeps = V + 2;
        while (true) {
            ++p2_.sweeps;
            compute_arrivals();
            double delta = 0;
            for (int p = 0; p < P; ++p) {
                auto& members = pool_visits_[static_cast<size_t>(p)];
                if (members.empty()) continue;
                std::sort(members.begin(), members.end(), [&](int a, int b) {
                    if (arrivals_[static_cast<size_t>(a)] != arrivals_[static_cast<size_t>(b)]) {
                        return arrivals_[static_cast<size_t>(a)] < arrivals_[static_cast<size_t>(b)];
                    }
                    if (tie_rank) {
                        return (*tie_rank)[static_cast<size_t>(a)] < (*tie_rank)[static_cast<size_t>(b)];
                    }
                    return a < b;
                });
                const int servers = z[static_cast<size_t>(p / K)][static_cast<size_t>(p % K)];
                servers_.assign(static_cast<size_t>(servers), 0.0);
                for (int v : members) {
                    std::pop_heap(servers_.begin(), servers_.end(), std::greater<>());
                    const double free_at = servers_.back();
                    const double a = arrivals_[static_cast<size_t>(v)];
                    const double start = free_at > a ? free_at : a;
                    new_waits_[static_cast<size_t>(v)] = start - a;
                    servers_.back() = start + p1_.visits[static_cast<size_t>(v)].duration;
                    std::push_heap(servers_.begin(), servers_.end(), std::greater<>());
                    const double diff = new_waits_[static_cast<size_t>(v)] - p2_.waits[static_cast<size_t>(v)];
                    delta = std::max(delta, diff < 0 ? -diff : diff);
                }
            }
            p2_.waits.swap(new_waits_);
            if (delta < kWaitTol) break;
            if (p2_.sweeps >= max_sweeps) {
                p2_.converged = false;
                break;
            }
        }
        compute_arrivals();
    } else {
        compute_arrivals();
    }

    for (int r = 0; r < R; ++r) {
        if (p2_.final_departure[static_cast<size_t>(r)] > ci_.base.max_shift_min + opts_.tol) {
            ++p2_.shift_defects;
        }
    }

    // Strict per-step capacity: every occupied slot needs its own charger.
    for (int p = 0; p < P; ++p) {
        const auto& members = pool_visits_[static_cast<size_t>(p)];
        if (members.empty()) continue;
        const int servers = z[static_cast<size_t>(p / K)][static_cast<size_t>(p % K)];
        slot_counts_.clear();
        for (int v : members) {
            const double s = arrivals_[static_cast<size_t>(v)] + p2_.waits[static_cast<size_t>(v)];
            const double e = s + p1_.visits[static_cast<size_t>(v)].duration;
            int t_first = static_cast<int>(std::floor((s - ci_.base.time_step_min + 1e-9) /
                                                      ci_.base.time_step_min)) + 1;
            int t_last = static_cast<int>(std::floor((e + 1e-9) / ci_.base.time_step_min));
            t_first = std::max(t_first, 0);
            t_last = std::min(t_last, ci_.num_steps - 1);
            for (int t = t_first; t <= t_last; ++t) slot_counts_.push_back(t);
        }
        std::sort(slot_counts_.begin(), slot_counts_.end());
        int peak = 0;
        for (size_t i = 0; i < slot_counts_.size();) {
            size_t j = i;
            while (j < slot_counts_.size() && slot_counts_[j] == slot_counts_[i]) ++j;
            const int count = static_cast<int>(j - i);
            peak = std::max(peak, count);
            if (count > servers) ++p2_.capacity_defects;
            i = j;
        }
        p2_.pools[static_cast<size_t>(p)].peak_slot_count = peak;
    }

    for (int v = 0; v < V; ++v) {
        const int pool = p1_.visits[static_cast<size_t>(v)].facility * K +
                         p1_.visits[static_cast<size_t>(v)].charger;
        p2_.pools[static_cast<size_t>(pool)].total_wait += p2_.waits[static_cast<size_t>(v)];
    }
    p2_.arrivals = arrivals_;

    const double vot = ci_.derived.vot_per_min;
    for (int v = 0; v < V; ++v) {
        const Visit& vis = p1_.visits[static_cast<size_t>(v)];
        const RouteTransform& rt = ci_.routes[static_cast<size_t>(vis.route)];
        p2_.cost.detour_vot +=
            vot * rt.detour_min[static_cast<size_t>(vis.cluster_local)][static_cast<size_t>(vis.facility)];
        p2_.cost.wait_vot += vot * p2_.waits[static_cast<size_t>(v)];
        p2_.cost.recharge_vot += vot * vis.duration;
        p2_.cost.energy += ci_.derived.energy_cost_per_min[static_cast<size_t>(vis.charger)] * vis.duration;
    }
    for (int f = 0; f < ci_.num_facilities(); ++f) {
        bool open = false;
        for (int k = 0; k < K; ++k) {
            const int count = z[static_cast<size_t>(f)][static_cast<size_t>(k)];
            if (count > 0) open = true;
            p2_.cost.charger += count * ci_.derived.charger_cost_per_day[static_cast<size_t>(k)];
        }
        if (open) p2_.cost.facility += ci_.base.facilities[static_cast<size_t>(f)].cost_per_day_usd;
    }
    p2_.cost.total = p2_.cost.detour_vot + p2_.cost.wait_vot + p2_.cost.recharge_vot +
                     p2_.cost.energy + p2_.cost.facility + p2_.cost.charger;
    return p2_;
}

EvalOutcome Evaluator::build_outcome(const RechargePlan& plan, const std::vector<std::vector<int>>& z) {
    run_pass1(plan.genes);
    run_pass2(z);

    EvalOutcome out;
    out.cost = p2_.cost;
    out.deployment = open_flags_from_z(z);
    out.defect_count = p2_.defect_count(p1_);
    out.feasible = out.defect_count == 0;
    out.defects = p1_.notes;
    if (!p2_.converged) out.defects.push_back("queue waits failed to stabilize");
    if (p2_.capacity_defects > 0) {
        out.defects.push_back(std::to_string(p2_.capacity_defects) +
                              " time step(s) demand more chargers than deployed");
    }
    if (p2_.shift_defects > 0) {
        out.defects.push_back(std::to_string(p2_.shift_defects) + " route(s) exceed the shift limit");
    }

    Schedule& s = out.schedule;
    s.waits_converged = p2_.converged;
    s.sweeps = p2_.sweeps;
    s.battery = p1_.battery;
    const int R = static_cast<int>(ci_.routes.size());
    s.departure.resize(static_cast<size_t>(R));
    for (int r = 0; r < R; ++r) {
        const RouteTransform& rt = ci_.routes[static_cast<size_t>(r)];
        auto& d = s.departure[static_cast<size_t>(r)];
        d.assign(static_cast<size_t>(rt.size()) + 2, 0);
        int vp = p1_.route_begin[static_cast<size_t>(r)];
        const int vend = p1_.route_begin[static_cast<size_t>(r) + 1];
        double cur = 0;
        for (int c = 0; c < rt.size(); ++c) {
            cur += rt.leg_min[static_cast<size_t>(c)] + rt.kappa_min[static_cast<size_t>(c)] +
                   rt.gamma_min[static_cast<size_t>(c)];
            d[static_cast<size_t>(c) + 1] = cur;
            if (vp < vend && p1_.visits[static_cast<size_t>(vp)].cluster_local == c) {
                const Visit& vis = p1_.visits[static_cast<size_t>(vp)];
                ChargeEvent ev;
                ev.route = r;
                ev.cluster_local = c;
                ev.cluster_global = vis.cluster_global;
                ev.facility = vis.facility;
                ev.charger = vis.charger;
                ev.duration = vis.duration;
                ev.battery_at_facility = vis.battery_at_facility;
                ev.arrival = cur + rt.detour_min[static_cast<size_t>(c)][static_cast<size_t>(vis.facility)];
                ev.wait = p2_.waits[static_cast<size_t>(vp)];
                ev.start = ev.arrival + ev.wait;
                ev.end = ev.start + ev.duration;
                s.events.push_back(ev);
                cur += rt.detour_min[static_cast<size_t>(c)][static_cast<size_t>(vis.facility)] +
                       ev.wait + ev.duration;
                ++vp;
            }
        }
        d[static_cast<size_t>(rt.size()) + 1] = cur + rt.leg_min[static_cast<size_t>(rt.size())];
    }
    return out;
}

std::vector<OccupancyCell> compute_occupancy(const ClusterInstance& ci, const Schedule& schedule) {
    std::vector<OccupancyCell> cells;
    std::vector<std::tuple<int, int, int>> hits;
    for (const ChargeEvent& ev : schedule.events) {
        for (int t : occupied_steps(ev.start, ev.end, ci.base.time_step_min, ci.num_steps)) {
            hits.emplace_back(ev.facility, ev.charger, t);
        }
    }
    std::sort(hits.begin(), hits.end());
    for (size_t i = 0; i < hits.size();) {
        size_t j = i;
        while (j < hits.size() && hits[j] == hits[i]) ++j;
        cells.push_back({std::get<0>(hits[i]), std::get<1>(hits[i]), std::get<2>(hits[i]),
                         static_cast<int>(j - i)});
        i = j;
    }
    return cells;
}

Pass1Result compute_recharge_durations(const ClusterInstance& ci, const RechargePlan& plan,
                                       const EvalOptions& opts) {
    Evaluator ev(ci, opts);
    return ev.run_pass1(plan.genes);
}

EvalOutcome evaluate_plan(const ClusterInstance& ci, const RechargePlan& plan,
                          const std::vector<std::vector<int>>& z, const EvalOptions& opts) {
    Evaluator ev(ci, opts);
    return ev.build_outcome(plan, z);
}

CostBreakdown objective(const ClusterInstance& ci, const Schedule& schedule,
                        const Deployment& deployment) {
    CostBreakdown cost;
    const double vot = ci.derived.vot_per_min;
    for (const ChargeEvent& ev : schedule.events) {
        const RouteTransform& rt = ci.routes[static_cast<size_t>(ev.route)];
        cost.detour_vot +=
            vot * rt.detour_min[static_cast<size_t>(ev.cluster_local)][static_cast<size_t>(ev.facility)];
        cost.wait_vot += vot * ev.wait;
        cost.recharge_vot += vot * ev.duration;
        cost.energy += ci.derived.energy_cost_per_min[static_cast<size_t>(ev.charger)] * ev.duration;
    }
    for (size_t f = 0; f < deployment.open.size(); ++f) {
        if (deployment.open[f]) cost.facility += ci.base.facilities[f].cost_per_day_usd;
    }
    for (size_t f = 0; f < deployment.chargers.size(); ++f) {
        for (size_t k = 0; k < deployment.chargers[f].size(); ++k) {
            cost.charger += deployment.chargers[f][k] * ci.derived.charger_cost_per_day[k];
        }
    }
    cost.total = cost.detour_vot + cost.wait_vot + cost.recharge_vot + cost.energy + cost.facility +
                 cost.charger;
    return cost;
}

}  // namespace evselca
