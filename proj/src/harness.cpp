#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>
#include <thread>

#include "rng.hpp"
#include "transform.hpp"

namespace evselca {

namespace {

std::vector<Stop> nearest_neighbor_order(Point depot, std::vector<Stop> stops) {
    std::vector<Stop> ordered;
    ordered.reserve(stops.size());
    Point at = depot;
    while (!stops.empty()) {
        size_t pick = 0;
        double best = manhattan_miles(at, stops[0].pos);
        for (size_t i = 1; i < stops.size(); ++i) {
            const double dist = manhattan_miles(at, stops[i].pos);
            if (dist < best) {
                best = dist;
                pick = i;
            }
        }
        at = stops[pick].pos;
        ordered.push_back(stops[pick]);
        stops.erase(stops.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return ordered;
}

}  // namespace

Instance gen_instance(const GenSpec& spec) {
    if (spec.routes < 1 || spec.stops_per_route < 1 || spec.facilities < 1 ||
        spec.extent_miles <= 0 || spec.time_step_min <= 0) {
        throw InputError("generator spec needs positive dimensions");
    }
    Rng rng(spec.seed);
    Instance inst;
    inst.name = spec.name;
    inst.time_step_min = spec.time_step_min;
    inst.chargers = default_charger_catalog();

    const double side = spec.extent_miles;
    const Point depot{side / 2, side / 2};
    for (int r = 0; r < spec.routes; ++r) {
        Route route;
        route.depot = depot;
        std::vector<Stop> stops;
        for (int i = 0; i < spec.stops_per_route; ++i) {
            Stop s;
            s.pos = {rng.uniform(0, side), rng.uniform(0, side)};
            stops.push_back(s);
        }
        route.stops = nearest_neighbor_order(depot, std::move(stops));
        inst.routes.push_back(std::move(route));
    }
    for (int f = 0; f < spec.facilities; ++f) {
        Facility fac;
        fac.pos = {rng.uniform(side / 4, 3 * side / 4), rng.uniform(side / 4, 3 * side / 4)};
        inst.facilities.push_back(fac);
    }

    const auto bad = validate_instance(inst);
    if (!bad.empty()) {
        throw InputError("generated instance fails validation: " + bad.front().code + ": " +
                         bad.front().detail);
    }
    return inst;
}

namespace {

Instance instance_at_level(const Instance& base, const std::string& axis, double level) {
    Instance inst = base;
    if (axis == "charger_cost_pct") {
        for (auto& ch : inst.chargers) ch.purchase_cost_usd *= 1 + level / 100;
    } else if (axis == "energy_cost_pct") {
        inst.costs.energy_price_usd_per_kwh *= 1 + level / 100;
    } else if (axis == "vot_pct") {
        inst.costs.vot_usd_per_mile *= 1 + level / 100;
    } else if (axis == "range_miles") {
        const double cap = level / inst.costs.truck_speed_mph * 60;
        for (auto& route : inst.routes) {
            const double ratio = route.final_battery_min / base.battery_cap_min;
            route.initial_battery_min = cap;
            route.final_battery_min = ratio * cap;
        }
        inst.battery_cap_min = cap;
    } else if (axis == "t_delta_min") {
        inst.time_step_min = level;
    } else {
        throw InputError("unknown sweep axis: " + axis);
    }
    return inst;
}

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string csv_note(std::string note) {
    for (char& ch : note) {
        if (ch == ',' || ch == '\n') ch = ';';
    }
    return note;
}

std::vector<int> type_totals(const Deployment& dep, int types) {
    std::vector<int> totals(static_cast<size_t>(types), 0);
    for (const auto& row : dep.chargers) {
        for (size_t k = 0; k < row.size() && k < totals.size(); ++k) {
            totals[k] += row[k];
        }
    }
    return totals;
}

}  // namespace

namespace {

SweepRepRow run_sweep_task(const SweepSpec& spec, const ClusterInstance& ci, double level,
                           size_t level_index, int rep, int solver_threads) {
    SweepRepRow rr;
    rr.level = level;
    rr.rep = rep;
    rr.seed = derive_seed(spec.ga.seed, static_cast<std::uint64_t>(level_index),
                          static_cast<std::uint64_t>(rep));
    const int types = ci.num_charger_types();
    try {
        if (spec.method == "exact") {
            ExactConfig cfg = spec.exact;
            cfg.threads = solver_threads;
            ExactResult res = exact_solve(ci, cfg);
            rr.feasible = res.feasible;
            rr.cost = res.cost;
            rr.chargers_by_type = type_totals(res.deployment, types);
            if (!res.feasible) rr.note = std::to_string(res.defects) + " defects";
        } else if (spec.method == "ga") {
            GaConfig cfg = spec.ga;
            cfg.seed = rr.seed;
            cfg.threads = solver_threads;
            GaResult res = ga_solve(ci, cfg);
            rr.feasible = res.feasible;
            rr.cost = res.cost;
            rr.chargers_by_type = type_totals(res.deployment, types);
            if (!res.feasible) rr.note = std::to_string(res.defects) + " defects";
        } else {
            GaConfig cfg = spec.ga;
            cfg.seed = rr.seed;
            cfg.threads = solver_threads;
            ExactConfig ex = spec.exact;
            ex.threads = solver_threads;
            ExactResult res = hybrid_solve(ci, cfg, ex);
            rr.feasible = res.feasible;
            rr.cost = res.cost;
            rr.chargers_by_type = type_totals(res.deployment, types);
            if (!res.feasible) rr.note = std::to_string(res.defects) + " defects";
        }
    } catch (const std::exception& e) {
        rr.feasible = false;
        rr.note = e.what();
    }
    return rr;
}

}  // namespace

SweepOutcome run_sweep(const SweepSpec& spec) {
    if (spec.levels.empty()) throw InputError("sweep needs at least one level");
    if (spec.replications < 1) throw InputError("sweep needs at least one replication");
    if (spec.method != "ga" && spec.method != "exact" && spec.method != "hybrid") {
        throw InputError("unknown sweep method: " + spec.method);
    }
    const Instance base = gen_instance(spec.base);
    const int reps = spec.method == "exact" ? 1 : spec.replications;

    SweepOutcome out;
    out.axis = spec.axis;
    out.levels.resize(spec.levels.size());

    std::vector<std::unique_ptr<ClusterInstance>> level_ci(spec.levels.size());
    for (size_t li = 0; li < spec.levels.size(); ++li) {
        SweepLevelRow& row = out.levels[li];
        row.level = spec.levels[li];
        try {
            const Instance inst = instance_at_level(base, spec.axis, spec.levels[li]);
            const auto bad = validate_instance(inst);
            if (!bad.empty()) throw InputError(bad.front().code + ": " + bad.front().detail);
            level_ci[li] = std::make_unique<ClusterInstance>(
                build_cluster_instance(inst, spec.intra_cap_frac));
        } catch (const std::exception& e) {
            row.note = e.what();
        }
    }

    struct Task {
        size_t level_index;
        int rep;
        size_t slot;
    };
    std::vector<Task> tasks;
    for (size_t li = 0; li < spec.levels.size(); ++li) {
        if (!level_ci[li]) continue;
        for (int rep = 0; rep < reps; ++rep) {
            tasks.push_back({li, rep, out.reps.size()});
            out.reps.emplace_back();
        }
    }

    const int requested =
        spec.method == "exact" ? spec.exact.threads : spec.ga.threads;
    const int workers =
        std::max(1, std::min(requested, static_cast<int>(tasks.size())));
    if (workers > 1) {
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
                const Task& t = tasks[i];
                out.reps[t.slot] = run_sweep_task(spec, *level_ci[t.level_index],
                                                  spec.levels[t.level_index], t.level_index,
                                                  t.rep, 1);
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    } else {
        for (const Task& t : tasks) {
            out.reps[t.slot] =
                run_sweep_task(spec, *level_ci[t.level_index], spec.levels[t.level_index],
                               t.level_index, t.rep, std::max(1, requested));
        }
    }

    std::vector<std::vector<double>> totals(spec.levels.size());
    for (const Task& t : tasks) {
        const SweepRepRow& rr = out.reps[t.slot];
        if (rr.feasible) totals[t.level_index].push_back(rr.cost.total);
    }
    for (size_t li = 0; li < spec.levels.size(); ++li) {
        SweepLevelRow& row = out.levels[li];
        const auto& vals = totals[li];
        row.feasible_reps = static_cast<int>(vals.size());
        if (!vals.empty()) {
            row.min = *std::min_element(vals.begin(), vals.end());
            double sum = 0;
            for (double v : vals) sum += v;
            row.mean = sum / static_cast<double>(vals.size());
            double var = 0;
            for (double v : vals) var += (v - row.mean) * (v - row.mean);
            row.stddev = std::sqrt(var / static_cast<double>(vals.size()));
        } else if (row.note.empty()) {
            row.note = "no feasible replication";
        }
    }

    double baseline = 0;
    bool have_baseline = false;
    if (!out.levels.empty() && out.levels.front().feasible_reps > 0) {
        baseline = out.levels.front().min;
        have_baseline = true;
    }
    size_t best = out.levels.size();
    for (size_t i = 0; i < out.levels.size(); ++i) {
        SweepLevelRow& row = out.levels[i];
        if (row.feasible_reps == 0) continue;
        if (have_baseline && baseline > 0) {
            row.normalized = 100.0 * row.min / baseline;
        } else if (row.note.empty()) {
            row.note = "no baseline";
        }
        if (best == out.levels.size() || row.min < out.levels[best].min) best = i;
    }
    if (best < out.levels.size()) out.levels[best].is_best = true;
    return out;
}

std::string sweep_csv(const SweepOutcome& outcome) {
    std::ostringstream csv;
    csv << "kind,axis,level,rep,seed,feasible,feasible_reps,total,detour_vot,wait_vot,"
           "recharge_vot,energy,facility,charger,chargers_by_type,min,mean,std,normalized,"
           "is_best,note\n";
    for (const SweepRepRow& r : outcome.reps) {
        std::string types;
        for (size_t k = 0; k < r.chargers_by_type.size(); ++k) {
            types += (k ? "|" : "") + std::to_string(r.chargers_by_type[k]);
        }
        csv << "rep," << outcome.axis << ',' << fmt_num(r.level) << ',' << r.rep << ',' << r.seed
            << ',' << (r.feasible ? 1 : 0) << ",," << fmt_num(r.cost.total) << ','
            << fmt_num(r.cost.detour_vot) << ',' << fmt_num(r.cost.wait_vot) << ','
            << fmt_num(r.cost.recharge_vot) << ',' << fmt_num(r.cost.energy) << ','
            << fmt_num(r.cost.facility) << ',' << fmt_num(r.cost.charger) << ',' << types
            << ",,,,,," << csv_note(r.note) << '\n';
    }
    for (const SweepLevelRow& l : outcome.levels) {
        csv << "level," << outcome.axis << ',' << fmt_num(l.level) << ",,,," << l.feasible_reps
            << ",,,,,,,,," << fmt_num(l.min) << ',' << fmt_num(l.mean) << ',' << fmt_num(l.stddev)
            << ',' << fmt_num(l.normalized) << ',' << (l.is_best ? 1 : 0) << ','
            << csv_note(l.note) << '\n';
    }
    return csv.str();
}

}  // namespace evselca
