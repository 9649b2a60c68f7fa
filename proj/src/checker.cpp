#include <algorithm>
#include <cmath>
#include <sstream>

#include "evaluator.hpp"

namespace evselca {

namespace {

struct Ctx {
    const ClusterInstance& ci;
    std::vector<Violation>& out;
    std::vector<std::string>* audit;
    double tol;

    void add(const char* code, const std::string& detail) { out.push_back({code, detail}); }
    void note(const std::string& text) {
        if (audit) audit->push_back(text);
    }
};

std::string fmt(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

bool check_shapes(Ctx& ctx, const RechargePlan& plan, const Deployment& dep, const Schedule& s) {
    const ClusterInstance& ci = ctx.ci;
    const int F = ci.num_facilities();
    const int K = ci.num_charger_types();
    bool ok = true;
    if (static_cast<int>(plan.genes.size()) != ci.total_clusters()) {
        ctx.add("shape", "plan gene count does not match the cluster count");
        ok = false;
    }
    if (static_cast<int>(dep.open.size()) != F ||
        static_cast<int>(dep.chargers.size()) != F) {
        ctx.add("shape", "deployment facility dimension mismatch");
        ok = false;
    } else {
        for (const auto& row : dep.chargers) {
            if (static_cast<int>(row.size()) != K) {
                ctx.add("shape", "deployment charger dimension mismatch");
                ok = false;
                break;
            }
        }
    }
    if (static_cast<int>(s.departure.size()) != static_cast<int>(ci.routes.size()) ||
        static_cast<int>(s.battery.size()) != static_cast<int>(ci.routes.size())) {
        ctx.add("shape", "schedule route dimension mismatch");
        ok = false;
    } else {
        for (size_t r = 0; r < ci.routes.size(); ++r) {
            const size_t want = static_cast<size_t>(ci.routes[r].size()) + 2;
            if (s.departure[r].size() != want || s.battery[r].size() != want) {
                ctx.add("shape", "schedule node arrays for route " + std::to_string(r) +
                                     " have the wrong length");
                ok = false;
            }
        }
    }
    for (const ChargeEvent& ev : s.events) {
        if (ev.route < 0 || ev.route >= static_cast<int>(ci.routes.size()) || ev.facility < 0 ||
            ev.facility >= F || ev.charger < 0 || ev.charger >= K || ev.cluster_local < 0 ||
            ev.cluster_local >= ci.routes[static_cast<size_t>(ev.route)].size()) {
            ctx.add("shape", "event references an unknown route, cluster, facility or charger");
            ok = false;
        }
    }
    return ok;
}

}  // namespace

std::vector<Violation> check_feasibility(const ClusterInstance& ci, const RechargePlan& plan,
                                         const Deployment& dep, const Schedule& s,
                                         std::vector<std::string>* audit, double tol) {
    std::vector<Violation> out;
    Ctx ctx{ci, out, audit, tol};
    if (!check_shapes(ctx, plan, dep, s)) return out;

    const int R = static_cast<int>(ci.routes.size());
    const int K = ci.num_charger_types();
    const double big_m = ci.big_m;
    const double step = ci.base.time_step_min;

    // c6 and the z/y coupling
    for (int f = 0; f < ci.num_facilities(); ++f) {
        for (int k = 0; k < K; ++k) {
            const int z = dep.chargers[static_cast<size_t>(f)][static_cast<size_t>(k)];
            if (z < 0) {
                ctx.add("domain", "negative charger count at facility " + std::to_string(f));
            }
            if (z > 0 && !dep.open[static_cast<size_t>(f)]) {
                ctx.add("c6", "facility " + std::to_string(f) + " hosts " + std::to_string(z) +
                                  " chargers of type " + std::to_string(k) + " but is not open");
            }
        }
    }

    // Realized visits per route, checking single-visit-per-cluster on the way.
    std::vector<std::vector<const ChargeEvent*>> visit_at(static_cast<size_t>(R));
    for (int r = 0; r < R; ++r) {
        visit_at[static_cast<size_t>(r)].assign(
            static_cast<size_t>(ci.routes[static_cast<size_t>(r)].size()), nullptr);
    }
    for (const ChargeEvent& ev : s.events) {
        auto& slot = visit_at[static_cast<size_t>(ev.route)][static_cast<size_t>(ev.cluster_local)];
        if (slot) {
            ctx.add("c10", "route " + std::to_string(ev.route) + " cluster " +
                               std::to_string(ev.cluster_local) + " recharges more than once");
            continue;
        }
        slot = &ev;
    }

    for (const ChargeEvent& ev : s.events) {
        const RouteTransform& rt = ci.routes[static_cast<size_t>(ev.route)];
        const std::string where =
            "route " + std::to_string(ev.route) + " cluster " + std::to_string(ev.cluster_local);
        const auto& fs = rt.feasible_facilities[static_cast<size_t>(ev.cluster_local)];
        if (std::find(fs.begin(), fs.end(), ev.facility) == fs.end()) {
            ctx.add("q_domain", where + " recharges at facility " + std::to_string(ev.facility) +
                                    ", outside its reachable set");
        }
        const int g = ci.global_cluster(ev.route, ev.cluster_local);
        const PlanGene gene = g < static_cast<int>(plan.genes.size())
                                  ? plan.genes[static_cast<size_t>(g)]
                                  : PlanGene{};
        if (!gene.set() || gene.facility != ev.facility || gene.charger != ev.charger) {
            ctx.add("c7", where + " spends charge time without a matching planned visit");
            if (ev.wait > ctx.tol) {
                ctx.add("c8", where + " waits in queue without a matching planned visit");
            }
        }
        if (ev.duration < -ctx.tol) ctx.add("domain", where + ": negative recharge duration");
        if (ev.wait < -ctx.tol) ctx.add("domain", where + ": negative wait");
        if (ev.battery_at_facility < -ctx.tol) {
            ctx.add("domain", where + ": battery below empty on facility arrival");
        }
        if (ev.battery_at_facility > big_m + ctx.tol) {
            ctx.add("c12", where + ": facility-arrival battery exceeds the model bound");
        }

        // c19 / c20 against the stored departures
        const auto& d = s.departure[static_cast<size_t>(ev.route)];
        const double detour =
            rt.detour_min[static_cast<size_t>(ev.cluster_local)][static_cast<size_t>(ev.facility)];
        const double want_start = d[static_cast<size_t>(ev.cluster_local) + 1] + detour + ev.wait;
        if (std::abs(ev.start - want_start) > ctx.tol) {
            ctx.add("c19", where + ": session start " + fmt(ev.start) +
                               " disagrees with departure + detour + wait " + fmt(want_start));
        }
        if (std::abs(ev.end - (ev.start + ev.duration)) > ctx.tol) {
            ctx.add("c20", where + ": session end is not start + duration");
        }
        if (std::abs(ev.arrival - (d[static_cast<size_t>(ev.cluster_local) + 1] + detour)) > ctx.tol) {
            ctx.add("c19", where + ": stored arrival disagrees with departure + detour");
        }

        // Occupancy recomposition: c9, c3 and the c5 bracket
        const auto steps = occupied_steps(ev.start, ev.end, step, ci.num_steps);
        const double span = step * static_cast<double>(steps.size());
        if (steps.empty()) {
            ctx.add("c9", where + ": session occupies no grid step");
        }
        if (ev.duration > span + ctx.tol) {
            ctx.add("c3", where + ": duration " + fmt(ev.duration) +
                              " exceeds its occupied span " + fmt(span));
        }
        if (span - ev.duration > 2 * step + ctx.tol) {
            ctx.add("c5", where + ": occupied span overshoots the session by more than two steps");
        }
        if (span - ev.duration > step - ci.base.epsilon_min + ctx.tol) {
            ctx.note("c5 strict-form exceedance at " + where + ": span " + fmt(span) +
                     " vs duration " + fmt(ev.duration));
        }
    }

    // Route walks: battery chain, departure recursion, endpoint constraints.
    for (int r = 0; r < R; ++r) {
        const RouteTransform& rt = ci.routes[static_cast<size_t>(r)];
        const int m = rt.size();
        const auto& d = s.departure[static_cast<size_t>(r)];
        const auto& b = s.battery[static_cast<size_t>(r)];
        const std::string route = "route " + std::to_string(r);

        if (std::abs(b[0] - rt.initial_battery_min) > ctx.tol) {
            ctx.add("c16", route + ": initial battery " + fmt(b[0]) + " differs from " +
                               fmt(rt.initial_battery_min));
        }
        if (b[static_cast<size_t>(m) + 1] < rt.final_battery_min - ctx.tol) {
            ctx.add("c17", route + ": returns with " + fmt(b[static_cast<size_t>(m) + 1]) +
                               " driving minutes, below the required " + fmt(rt.final_battery_min));
        }
        for (int n = 0; n <= m + 1; ++n) {
            if (b[static_cast<size_t>(n)] < -ctx.tol) {
                ctx.add("domain", route + " node " + std::to_string(n) + ": battery below empty");
            }
            if (b[static_cast<size_t>(n)] > ci.base.battery_cap_min + ctx.tol) {
                ctx.add("domain", route + " node " + std::to_string(n) + ": battery above capacity");
            }
        }
        if (std::abs(d[0]) > ctx.tol) {
            ctx.add("c32", route + ": departure clock does not start at zero");
        }
        if (d[static_cast<size_t>(m) + 1] > ci.base.max_shift_min + ctx.tol) {
            ctx.add("c25", route + ": returns at " + fmt(d[static_cast<size_t>(m) + 1]) +
                               ", after the shift limit " + fmt(ci.base.max_shift_min));
        }

        for (int n = 0; n <= m; ++n) {
            const ChargeEvent* prev_ev =
                n >= 1 ? visit_at[static_cast<size_t>(r)][static_cast<size_t>(n - 1)] : nullptr;
            double expected = d[static_cast<size_t>(n)] + rt.leg_min[static_cast<size_t>(n)];
            if (prev_ev) {
                expected += rt.detour_min[static_cast<size_t>(n - 1)][static_cast<size_t>(prev_ev->facility)] +
                            prev_ev->wait + prev_ev->duration;
            }
            if (n < m) {
                expected += rt.kappa_min[static_cast<size_t>(n)] + rt.gamma_min[static_cast<size_t>(n)];
            }
            if (std::abs(d[static_cast<size_t>(n) + 1] - expected) > ctx.tol) {
                ctx.add("c32", route + " node " + std::to_string(n + 1) + ": departure " +
                                   fmt(d[static_cast<size_t>(n) + 1]) + " disagrees with the recursion (" +
                                   fmt(expected) + ")");
            }

            // battery transition n -> n+1
            if (n == 0) {
                const double bound = b[0] - rt.leg_min[0];
                if (b[1] > bound + ctx.tol) {
                    ctx.add("c31", route + " node 1: battery exceeds the drive-only bound");
                }
                continue;
            }
            const int c = n - 1;
            const ChargeEvent* ev = visit_at[static_cast<size_t>(r)][static_cast<size_t>(c)];
            const double pre = b[static_cast<size_t>(n)] - rt.gamma_min[static_cast<size_t>(c)];
            if (ev) {
                const double detour =
                    rt.detour_min[static_cast<size_t>(c)][static_cast<size_t>(ev->facility)];
                const double rate = ci.derived.recharge_rate[static_cast<size_t>(ev->charger)];
                if (ev->battery_at_facility > pre - detour + ctx.tol) {
                    ctx.add("c30", route + " cluster " + std::to_string(c) +
                                       ": facility-arrival battery exceeds the detour bound");
                }
                const double post = ev->battery_at_facility + rate * ev->duration;
                if (post > ci.base.battery_cap_min + ctx.tol) {
                    ctx.add("c13", route + " cluster " + std::to_string(c) +
                                       ": session overfills the battery (" + fmt(post) + ")");
                }
                const double resume =
                    rt.resume_min[static_cast<size_t>(c)][static_cast<size_t>(ev->facility)];
                if (b[static_cast<size_t>(n) + 1] > post - resume + ctx.tol) {
                    ctx.add("c15", route + " node " + std::to_string(n + 1) +
                                       ": battery exceeds the post-recharge bound");
                }
            } else {
                const double bound = pre - rt.leg_min[static_cast<size_t>(n)];
                if (b[static_cast<size_t>(n) + 1] > bound + ctx.tol) {
                    ctx.add("c31", route + " node " + std::to_string(n + 1) +
                                       ": battery exceeds the drive-only bound");
                }
            }
        }
    }

    // c4: continuous simultaneous occupancy per charger pool.
    for (int f = 0; f < ci.num_facilities(); ++f) {
        for (int k = 0; k < K; ++k) {
            std::vector<std::pair<double, int>> marks; // (+1 start shifted by tolerance, -1 end)
            for (const ChargeEvent& ev : s.events) {
                if (ev.facility != f || ev.charger != k) continue;
                marks.push_back({ev.start + 1e-9, 1});
                marks.push_back({ev.end, -1});
            }
            if (marks.empty()) continue;
            std::sort(marks.begin(), marks.end());
            int cur = 0, peak = 0;
            for (const auto& mk : marks) {
                cur += mk.second;
                peak = std::max(peak, cur);
            }
            const int z = dep.chargers[static_cast<size_t>(f)][static_cast<size_t>(k)];
            if (peak > z) {
                ctx.add("c4", "facility " + std::to_string(f) + " charger type " + std::to_string(k) +
                                  ": " + std::to_string(peak) + " simultaneous sessions exceed the " +
                                  std::to_string(z) + " deployed");
            } else {
                int slot_peak = 0;
                std::vector<int> counts(static_cast<size_t>(ci.num_steps), 0);
                for (const ChargeEvent& ev : s.events) {
                    if (ev.facility != f || ev.charger != k) continue;
                    for (int t : occupied_steps(ev.start, ev.end, step, ci.num_steps)) {
                        slot_peak = std::max(slot_peak, ++counts[static_cast<size_t>(t)]);
                    }
                }
                if (slot_peak > z) {
                    ctx.note("c4 grid sharing at facility " + std::to_string(f) + " charger type " +
                             std::to_string(k) + ": " + std::to_string(slot_peak) +
                             " sessions touch one step with " + std::to_string(z) + " chargers");
                }
            }
        }
    }

    return out;
}

}  // namespace evselca
