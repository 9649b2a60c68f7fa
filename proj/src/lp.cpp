#include "lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace evselca {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string nm_y(int f) { return "y_f" + std::to_string(f); }
std::string nm_z(int f, int k) { return "z_f" + std::to_string(f) + "k" + std::to_string(k); }
std::string nm_b(int r, int n) { return "b_r" + std::to_string(r) + "n" + std::to_string(n); }
std::string nm_d(int r, int n) { return "d_r" + std::to_string(r) + "n" + std::to_string(n); }
std::string nm_bp(int r, int c, int f) {
    return "bp_r" + std::to_string(r) + "c" + std::to_string(c) + "f" + std::to_string(f);
}
std::string stem(int r, int c, int f, int k) {
    return "_r" + std::to_string(r) + "c" + std::to_string(c) + "f" + std::to_string(f) + "k" +
           std::to_string(k);
}
std::string nm_q(int r, int c, int f, int k) { return "q" + stem(r, c, f, k); }
std::string nm_u(int r, int c, int f, int k) { return "u" + stem(r, c, f, k); }
std::string nm_w(int r, int c, int f, int k) { return "w" + stem(r, c, f, k); }
std::string nm_ts(int r, int c, int f, int k) { return "ts" + stem(r, c, f, k); }
std::string nm_te(int r, int c, int f, int k) { return "te" + stem(r, c, f, k); }
std::string nm_x(int r, int c, int f, int k, int t) {
    return "x" + stem(r, c, f, k) + "t" + std::to_string(t);
}
std::string nm_xa(int r, int c, int f, int k, int t) {
    return "xa" + stem(r, c, f, k) + "t" + std::to_string(t);
}
std::string nm_xb(int r, int c, int f, int k, int t) {
    return "xb" + stem(r, c, f, k) + "t" + std::to_string(t);
}

// First grid step a session starting at or after window_lo can occupy; uses
// the same boundary arithmetic as occupied_steps.
int first_step(double window_lo, double step) {
    const int t = static_cast<int>(std::floor((window_lo - step + 1e-9) / step)) + 1;
    return t < 0 ? 0 : t;
}

struct LpText {
    std::string out;
    int line_terms = 0;

    void line(const std::string& s) {
        out += s;
        out += '\n';
    }
    void begin(const std::string& name) {
        out += ' ';
        out += name;
        out += ':';
        line_terms = 0;
    }
    void term(double coef, const std::string& var) {
        if (coef == 0) return;
        if (line_terms == 8) {
            out += "\n  ";
            line_terms = 0;
        }
        out += coef < 0 ? " - " : " + ";
        out += num(std::abs(coef));
        out += ' ';
        out += var;
        ++line_terms;
    }
    void end(const char* op, double rhs) {
        out += ' ';
        out += op;
        out += ' ';
        out += num(rhs);
        out += '\n';
    }
    void name_list(const std::string& name) {
        if (line_terms == 10) {
            out += '\n';
            line_terms = 0;
        }
        out += ' ';
        out += name;
        ++line_terms;
    }
};

}  // namespace

std::string emit_lp(const ClusterInstance& ci, const LpLimits& limits) {
    const int R = static_cast<int>(ci.routes.size());
    const int F = ci.num_facilities();
    const int K = ci.num_charger_types();
    const int N = ci.num_steps;
    const double step = ci.base.time_step_min;
    const double eps = ci.base.epsilon_min;
    const double M = ci.big_m;
    const double cap = ci.base.battery_cap_min;

    std::vector<std::vector<int>> t_lo(static_cast<size_t>(R));
    std::int64_t vars = F + static_cast<std::int64_t>(F) * K;
    std::int64_t rows = static_cast<std::int64_t>(F) * K; // c6
    for (int r = 0; r < R; ++r) {
        const RouteTransform& rt = ci.routes[static_cast<size_t>(r)];
        const int m = rt.size();
        t_lo[static_cast<size_t>(r)].resize(static_cast<size_t>(m));
        vars += 2 * (m + 2);          // b, d
        rows += (m + 1) + (m + 2) + 3; // c31, c32 incl. origin, c16/c17/c25
        for (int c = 0; c < m; ++c) {
            const int lo = first_step(rt.window_lo[static_cast<size_t>(c)], step);
            t_lo[static_cast<size_t>(r)][static_cast<size_t>(c)] = lo;
            const std::int64_t nfs =
                static_cast<std::int64_t>(rt.feasible_facilities[static_cast<size_t>(c)].size());
            const std::int64_t nt = lo < N ? N - lo : 0;
            vars += nfs * K * 5 + nfs + nfs * K * nt * 3;
            rows += 1 + (nfs > 0 ? 1 : 0) + nfs * 3 + nfs * K * 7 + nfs * K * nt * 6;
        }
    }

    // Per-step capacity rows exist where at least one cluster can occupy.
    std::vector<std::vector<std::vector<std::pair<int, int>>>> elig(
        static_cast<size_t>(F),
        std::vector<std::vector<std::pair<int, int>>>(static_cast<size_t>(N)));
    for (int r = 0; r < R; ++r) {
        const RouteTransform& rt = ci.routes[static_cast<size_t>(r)];
        for (int c = 0; c < rt.size(); ++c) {
            for (int f : rt.feasible_facilities[static_cast<size_t>(c)]) {
                for (int t = t_lo[static_cast<size_t>(r)][static_cast<size_t>(c)]; t < N; ++t) {
                    elig[static_cast<size_t>(f)][static_cast<size_t>(t)].push_back({r, c});
                }
            }
        }
    }
    for (int f = 0; f < F; ++f) {
        for (int t = 0; t < N; ++t) {
            if (!elig[static_cast<size_t>(f)][static_cast<size_t>(t)].empty()) rows += K;
        }
    }

    if (vars > limits.max_vars) {
        throw LimitError("LP export needs " + std::to_string(vars) + " variables, over the cap " +
                         std::to_string(limits.max_vars));
    }
    if (rows > limits.max_rows) {
        throw LimitError("LP export needs " + std::to_string(rows) + " rows, over the cap " +
                         std::to_string(limits.max_rows));
    }

    LpText lp;
    lp.line("\\ EVSELCA cluster-level MILP");
    lp.line("\\ instance: " + ci.base.name);
    lp.line("\\ routes " + std::to_string(R) + ", clusters " + std::to_string(ci.total_clusters()) +
            ", facilities " + std::to_string(F) + ", charger_types " + std::to_string(K) +
            ", steps " + std::to_string(N));
    lp.line("\\ time_step_min " + num(step) + ", epsilon_min " + num(eps) + ", big_m " + num(M));
    for (int r = 0; r < R; ++r) {
        std::string cuts;
        for (int p : ci.routes[static_cast<size_t>(r)].cuts.cut_positions) {
            cuts += (cuts.empty() ? "" : " ") + std::to_string(p);
        }
        lp.line("\\ route " + std::to_string(r) + " cuts: [" + cuts + "]");
    }

    const double vot = ci.derived.vot_per_min;
    lp.line("Minimize");
    lp.begin("obj");
    for (int r = 0; r < R; ++r) {
        const RouteTransform& rt = ci.routes[static_cast<size_t>(r)];
        for (int c = 0; c < rt.size(); ++c) {
            for (int f : rt.feasible_facilities[static_cast<size_t>(c)]) {
                const double detour = rt.detour_min[static_cast<size_t>(c)][static_cast<size_t>(f)];
                for (int k = 0; k < K; ++k) {
                    lp.term(vot * detour, nm_q(r, c, f, k));
                    lp.term(vot, nm_w(r, c, f, k));
                    lp.term(vot + ci.derived.energy_cost_per_min[static_cast<size_t>(k)],
                            nm_u(r, c, f, k));
                }
            }
        }
    }
    for (int f = 0; f < F; ++f) {
        lp.term(ci.base.facilities[static_cast<size_t>(f)].cost_per_day_usd, nm_y(f));
        for (int k = 0; k < K; ++k) {
            lp.term(ci.derived.charger_cost_per_day[static_cast<size_t>(k)], nm_z(f, k));
        }
    }
    lp.out += '\n';

    lp.line("Subject To");
    for (int r = 0; r < R; ++r) {
        const RouteTransform& rt = ci.routes[static_cast<size_t>(r)];
        const int m = rt.size();
        const std::string rs = std::to_string(r);

        lp.begin("c32_r" + rs + "n0");
        lp.term(1, nm_d(r, 0));
        lp.end("=", 0);
        for (int n = 0; n <= m; ++n) {
            lp.begin("c32_r" + rs + "n" + std::to_string(n + 1));
            lp.term(1, nm_d(r, n + 1));
            lp.term(-1, nm_d(r, n));
            double rhs = rt.leg_min[static_cast<size_t>(n)];
            if (n < m) {
                rhs += rt.kappa_min[static_cast<size_t>(n)] + rt.gamma_min[static_cast<size_t>(n)];
            }
            if (n >= 1) {
                const int c = n - 1;
                for (int f : rt.feasible_facilities[static_cast<size_t>(c)]) {
                    const double detour =
                        rt.detour_min[static_cast<size_t>(c)][static_cast<size_t>(f)];
                    for (int k = 0; k < K; ++k) {
                        lp.term(-detour, nm_q(r, c, f, k));
                        lp.term(-1, nm_u(r, c, f, k));
                        lp.term(-1, nm_w(r, c, f, k));
                    }
                }
            }
            lp.end("=", rhs);
        }

        lp.begin("c16_r" + rs);
        lp.term(1, nm_b(r, 0));
        lp.end("=", rt.initial_battery_min);
        lp.begin("c17_r" + rs);
        lp.term(1, nm_b(r, m + 1));
        lp.end(">=", rt.final_battery_min);
        lp.begin("c25_r" + rs);
        lp.term(1, nm_d(r, m + 1));
        lp.end("<=", ci.base.max_shift_min);

        for (int n = 0; n <= m; ++n) {
            lp.begin("c31_r" + rs + "n" + std::to_string(n));
            lp.term(1, nm_b(r, n + 1));
            lp.term(-1, nm_b(r, n));
            double drain = rt.leg_min[static_cast<size_t>(n)];
            if (n >= 1) {
                const int c = n - 1;
                drain += rt.gamma_min[static_cast<size_t>(c)];
                for (int f : rt.feasible_facilities[static_cast<size_t>(c)]) {
                    for (int k = 0; k < K; ++k) {
                        lp.term(-(drain + M), nm_q(r, c, f, k));
                    }
                }
            }
            lp.end("<=", -drain);
        }

        for (int c = 0; c < m; ++c) {
            const std::string cs = "_r" + rs + "c" + std::to_string(c);
            const auto& fs = rt.feasible_facilities[static_cast<size_t>(c)];
            const int lo = t_lo[static_cast<size_t>(r)][static_cast<size_t>(c)];

            if (!fs.empty()) {
                lp.begin("c10" + cs);
                for (int f : fs) {
                    for (int k = 0; k < K; ++k) lp.term(1, nm_q(r, c, f, k));
                }
                lp.end("<=", 1);

                lp.begin("c15" + cs);
                lp.term(1, nm_b(r, c + 2));
                for (int f : fs) {
                    lp.term(-1, nm_bp(r, c, f));
                    const double resume =
                        rt.resume_min[static_cast<size_t>(c)][static_cast<size_t>(f)];
                    for (int k = 0; k < K; ++k) {
                        lp.term(-ci.derived.recharge_rate[static_cast<size_t>(k)],
                                nm_u(r, c, f, k));
                        lp.term(resume + M, nm_q(r, c, f, k));
                    }
                }
                lp.end("<=", M);
            }

            for (int f : fs) {
                const std::string cfs = cs + "f" + std::to_string(f);
                const double detour = rt.detour_min[static_cast<size_t>(c)][static_cast<size_t>(f)];

                lp.begin("c12" + cfs);
                lp.term(1, nm_bp(r, c, f));
                for (int k = 0; k < K; ++k) lp.term(-M, nm_q(r, c, f, k));
                lp.end("<=", 0);

                lp.begin("c13" + cfs);
                lp.term(1, nm_bp(r, c, f));
                for (int k = 0; k < K; ++k) {
                    lp.term(ci.derived.recharge_rate[static_cast<size_t>(k)], nm_u(r, c, f, k));
                }
                lp.end("<=", cap);

                lp.begin("c30" + cfs);
                lp.term(1, nm_bp(r, c, f));
                lp.term(-1, nm_b(r, c + 1));
                for (int k = 0; k < K; ++k) lp.term(M, nm_q(r, c, f, k));
                lp.end("<=", M - rt.gamma_min[static_cast<size_t>(c)] - detour);

                for (int k = 0; k < K; ++k) {
                    const std::string cfk = cfs + "k" + std::to_string(k);
                    const std::string q = nm_q(r, c, f, k);
                    const std::string u = nm_u(r, c, f, k);
                    const std::string w = nm_w(r, c, f, k);
                    const std::string ts = nm_ts(r, c, f, k);
                    const std::string te = nm_te(r, c, f, k);

                    lp.begin("c3" + cfk);
                    lp.term(1, u);
                    for (int t = lo; t < N; ++t) lp.term(-step, nm_x(r, c, f, k, t));
                    lp.end("<=", 0);

                    lp.begin("c5" + cfk);
                    for (int t = lo; t < N; ++t) lp.term(step, nm_x(r, c, f, k, t));
                    lp.term(-1, u);
                    lp.end("<=", step - eps);

                    lp.begin("c7" + cfk);
                    lp.term(1, u);
                    lp.term(-M, q);
                    lp.end("<=", 0);

                    lp.begin("c8" + cfk);
                    lp.term(1, w);
                    lp.term(-M, q);
                    lp.end("<=", 0);

                    lp.begin("c9a" + cfk);
                    lp.term(1, q);
                    for (int t = lo; t < N; ++t) lp.term(-1, nm_x(r, c, f, k, t));
                    lp.end("<=", 0);

                    lp.begin("c19" + cfk);
                    lp.term(1, ts);
                    lp.term(-1, nm_d(r, c + 1));
                    lp.term(-detour, q);
                    lp.term(-1, w);
                    lp.end("=", 0);

                    lp.begin("c20" + cfk);
                    lp.term(1, te);
                    lp.term(-1, ts);
                    lp.term(-1, u);
                    lp.end("=", 0);

                    for (int t = lo; t < N; ++t) {
                        const std::string cfkt = cfk + "t" + std::to_string(t);
                        const double grid = step * static_cast<double>(t);

                        lp.begin("c2" + cfkt);
                        lp.term(1, nm_x(r, c, f, k, t));
                        lp.term(-1, nm_xb(r, c, f, k, t));
                        lp.term(1, nm_xa(r, c, f, k, t));
                        lp.end("=", 0);

                        lp.begin("c9b" + cfkt);
                        lp.term(1, nm_x(r, c, f, k, t));
                        lp.term(-1, q);
                        lp.end("<=", 0);

                        lp.begin("c21" + cfkt);
                        lp.term(1, ts);
                        lp.term(M, q);
                        lp.term(-M, nm_xa(r, c, f, k, t));
                        lp.end("<=", grid + step - eps + M);

                        lp.begin("c22" + cfkt);
                        lp.term(1, ts);
                        lp.term(-M, q);
                        lp.term(-M, nm_xa(r, c, f, k, t));
                        lp.end(">=", grid + step - 2 * M);

                        lp.begin("c23" + cfkt);
                        lp.term(1, te);
                        lp.term(M, q);
                        lp.term(-M, nm_xb(r, c, f, k, t));
                        lp.end("<=", grid - eps + M);

                        lp.begin("c24" + cfkt);
                        lp.term(1, te);
                        lp.term(-M, q);
                        lp.term(-M, nm_xb(r, c, f, k, t));
                        lp.end(">=", grid - 2 * M);
                    }
                }
            }
        }
    }

    for (int f = 0; f < F; ++f) {
        for (int k = 0; k < K; ++k) {
            lp.begin("c6_f" + std::to_string(f) + "k" + std::to_string(k));
            lp.term(1, nm_z(f, k));
            lp.term(-M, nm_y(f));
            lp.end("<=", 0);
        }
    }
    for (int f = 0; f < F; ++f) {
        for (int t = 0; t < N; ++t) {
            const auto& members = elig[static_cast<size_t>(f)][static_cast<size_t>(t)];
            if (members.empty()) continue;
            for (int k = 0; k < K; ++k) {
                lp.begin("c4_f" + std::to_string(f) + "k" + std::to_string(k) + "t" +
                         std::to_string(t));
                for (const auto& [r, c] : members) lp.term(1, nm_x(r, c, f, k, t));
                lp.term(-1, nm_z(f, k));
                lp.end("<=", 0);
            }
        }
    }

    lp.line("Bounds");
    for (int r = 0; r < R; ++r) {
        const int m = ci.routes[static_cast<size_t>(r)].size();
        for (int n = 0; n <= m + 1; ++n) {
            lp.line(" " + nm_b(r, n) + " <= " + num(cap));
        }
    }

    lp.line("Binaries");
    lp.line_terms = 0;
    for (int f = 0; f < F; ++f) lp.name_list(nm_y(f));
    for (int r = 0; r < R; ++r) {
        const RouteTransform& rt = ci.routes[static_cast<size_t>(r)];
        for (int c = 0; c < rt.size(); ++c) {
            for (int f : rt.feasible_facilities[static_cast<size_t>(c)]) {
                for (int k = 0; k < K; ++k) {
                    lp.name_list(nm_q(r, c, f, k));
                    for (int t = t_lo[static_cast<size_t>(r)][static_cast<size_t>(c)]; t < N; ++t) {
                        lp.name_list(nm_x(r, c, f, k, t));
                        lp.name_list(nm_xa(r, c, f, k, t));
                        lp.name_list(nm_xb(r, c, f, k, t));
                    }
                }
            }
        }
    }
    lp.out += '\n';

    lp.line("Generals");
    lp.line_terms = 0;
    for (int f = 0; f < F; ++f) {
        for (int k = 0; k < K; ++k) lp.name_list(nm_z(f, k));
    }
    lp.out += '\n';

    lp.line("End");
    return lp.out;
}

ReplayResult replay_solution(const ClusterInstance& ci, const SolutionValues& sol,
                             double rel_tol) {
    ReplayResult out;
    const int R = static_cast<int>(ci.routes.size());
    const int F = ci.num_facilities();
    const int K = ci.num_charger_types();
    const int N = ci.num_steps;
    const double step = ci.base.time_step_min;

    auto val = [&](const std::string& name) {
        auto it = sol.variables.find(name);
        return it == sol.variables.end() ? 0.0 : it->second;
    };

    out.plan.genes.assign(static_cast<size_t>(ci.total_clusters()), PlanGene{});
    out.deployment.open.assign(static_cast<size_t>(F), 0);
    out.deployment.chargers.assign(static_cast<size_t>(F),
                                   std::vector<int>(static_cast<size_t>(K), 0));
    for (int f = 0; f < F; ++f) {
        out.deployment.open[static_cast<size_t>(f)] = val(nm_y(f)) > 0.5 ? 1 : 0;
        for (int k = 0; k < K; ++k) {
            const long long z = std::llround(val(nm_z(f, k)));
            out.deployment.chargers[static_cast<size_t>(f)][static_cast<size_t>(k)] =
                z > 0 ? static_cast<int>(z) : 0;
        }
    }

    out.schedule.departure.resize(static_cast<size_t>(R));
    out.schedule.battery.resize(static_cast<size_t>(R));
    for (int r = 0; r < R; ++r) {
        const RouteTransform& rt = ci.routes[static_cast<size_t>(r)];
        const int m = rt.size();
        auto& d = out.schedule.departure[static_cast<size_t>(r)];
        auto& b = out.schedule.battery[static_cast<size_t>(r)];
        d.resize(static_cast<size_t>(m) + 2);
        b.resize(static_cast<size_t>(m) + 2);
        for (int n = 0; n <= m + 1; ++n) {
            d[static_cast<size_t>(n)] = val(nm_d(r, n));
            b[static_cast<size_t>(n)] = val(nm_b(r, n));
        }

        for (int c = 0; c < m; ++c) {
            const auto& fs = rt.feasible_facilities[static_cast<size_t>(c)];
            const std::string where =
                "route " + std::to_string(r) + " cluster " + std::to_string(c);
            int chosen_f = -1, chosen_k = -1;
            for (int f : fs) {
                for (int k = 0; k < K; ++k) {
                    if (val(nm_q(r, c, f, k)) <= 0.5) continue;
                    if (chosen_f >= 0) {
                        out.violations.push_back(
                            {"c10", where + " sets more than one recharge indicator"});
                    } else {
                        chosen_f = f;
                        chosen_k = k;
                    }
                }
            }

            // x set without its q is a linking breach even before rebuilding
            // the schedule.
            for (int f : fs) {
                for (int k = 0; k < K; ++k) {
                    if (f == chosen_f && k == chosen_k) continue;
                    for (int t = first_step(rt.window_lo[static_cast<size_t>(c)], step); t < N;
                         ++t) {
                        if (val(nm_x(r, c, f, k, t)) > 0.5) {
                            out.violations.push_back(
                                {"c9", where + " occupies facility " + std::to_string(f) +
                                           " charger type " + std::to_string(k) + " step " +
                                           std::to_string(t) + " without recharging there"});
                            break;
                        }
                    }
                }
            }
            if (chosen_f < 0) continue;

            out.plan.genes[static_cast<size_t>(ci.global_cluster(r, c))] = {chosen_f, chosen_k};
            ChargeEvent ev;
            ev.route = r;
            ev.cluster_local = c;
            ev.cluster_global = ci.global_cluster(r, c);
            ev.facility = chosen_f;
            ev.charger = chosen_k;
            const double detour =
                rt.detour_min[static_cast<size_t>(c)][static_cast<size_t>(chosen_f)];
            ev.arrival = d[static_cast<size_t>(c) + 1] + detour;
            ev.wait = val(nm_w(r, c, chosen_f, chosen_k));
            ev.duration = val(nm_u(r, c, chosen_f, chosen_k));
            const std::string ts_name = nm_ts(r, c, chosen_f, chosen_k);
            ev.start = sol.variables.count(ts_name) ? sol.variables.at(ts_name)
                                                    : ev.arrival + ev.wait;
            const std::string te_name = nm_te(r, c, chosen_f, chosen_k);
            ev.end = sol.variables.count(te_name) ? sol.variables.at(te_name)
                                                  : ev.start + ev.duration;
            ev.battery_at_facility = val(nm_bp(r, c, chosen_f));
            out.schedule.events.push_back(ev);

            const auto expect = occupied_steps(ev.start, ev.end, step, N);
            const int lo = first_step(rt.window_lo[static_cast<size_t>(c)], step);
            bool mismatch = false;
            for (int t = lo; t < N && !mismatch; ++t) {
                const bool want =
                    std::binary_search(expect.begin(), expect.end(), t);
                if ((val(nm_x(r, c, chosen_f, chosen_k, t)) > 0.5) != want) mismatch = true;
            }
            for (int t : expect) {
                if (t < lo) mismatch = true;
            }
            if (mismatch) {
                out.violations.push_back(
                    {"c2", where + ": occupancy grid disagrees with the session interval [" +
                               num(ev.start) + ", " + num(ev.end) + "]"});
            }
        }
    }

    const auto checked = check_feasibility(ci, out.plan, out.deployment, out.schedule,
                                           &out.audit, kFeasTol);
    out.violations.insert(out.violations.end(), checked.begin(), checked.end());

    out.cost = objective(ci, out.schedule, out.deployment);
    out.has_file_objective = sol.has_objective;
    if (sol.has_objective) {
        out.file_objective = sol.objective;
        const double scale = std::max(1.0, std::abs(sol.objective));
        out.objective_matches = std::abs(out.cost.total - sol.objective) <= rel_tol * scale;
    }
    return out;
}

}  // namespace evselca
