#include "json_io.hpp"

#include <cmath>

namespace evselca {

using nlohmann::json;

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(what + ": " + e.what());
    }
}

namespace {

double want_number(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) throw InputError(std::string("field ") + key + " must be a number");
    return v.get<double>();
}

json point_to_json(Point p) { return json{{"x", p.x}, {"y", p.y}}; }

Point point_from_json(const json& j, const char* what) {
    if (!j.is_object() || !j.contains("x") || !j.contains("y")) {
        throw InputError(std::string(what) + " needs x and y");
    }
    return {j.at("x").get<double>(), j.at("y").get<double>()};
}

}  // namespace

json instance_to_json(const Instance& inst) {
    json j;
    j["name"] = inst.name;
    j["battery_cap_min"] = inst.battery_cap_min;
    j["max_shift_min"] = inst.max_shift_min;
    j["time_step_min"] = inst.time_step_min;
    j["epsilon_min"] = inst.epsilon_min;
    j["costs"] = {{"energy_price_usd_per_kwh", inst.costs.energy_price_usd_per_kwh},
                  {"vot_usd_per_mile", inst.costs.vot_usd_per_mile},
                  {"truck_speed_mph", inst.costs.truck_speed_mph},
                  {"charger_lifespan_days", inst.costs.charger_lifespan_days},
                  {"facility_lifespan_days", inst.costs.facility_lifespan_days}};
    j["chargers"] = json::array();
    for (const ChargerSpec& ch : inst.chargers) {
        j["chargers"].push_back({{"name", ch.name},
                                 {"power_kw", ch.power_kw},
                                 {"added_range_miles", ch.added_range_miles},
                                 {"added_charge_minutes", ch.added_charge_minutes},
                                 {"purchase_cost_usd", ch.purchase_cost_usd}});
    }
    j["facilities"] = json::array();
    for (const Facility& f : inst.facilities) {
        json fj = point_to_json(f.pos);
        fj["cost_per_day_usd"] = f.cost_per_day_usd;
        j["facilities"].push_back(std::move(fj));
    }
    j["routes"] = json::array();
    for (const Route& r : inst.routes) {
        json rj;
        rj["depot"] = point_to_json(r.depot);
        rj["initial_battery_min"] = r.initial_battery_min;
        rj["final_battery_min"] = r.final_battery_min;
        rj["stops"] = json::array();
        for (const Stop& s : r.stops) {
            json sj = point_to_json(s.pos);
            sj["service_min"] = s.service_min;
            rj["stops"].push_back(std::move(sj));
        }
        j["routes"].push_back(std::move(rj));
    }
    if (inst.travel_override) {
        j["travel_override"] = {{"minutes", inst.travel_override->minutes}};
    }
    return j;
}

Instance instance_from_json(const json& j) {
    if (!j.is_object()) throw InputError("instance JSON must be an object");
    Instance inst;
    inst.name = j.value("name", inst.name);
    inst.battery_cap_min = want_number(j, "battery_cap_min", inst.battery_cap_min);
    inst.max_shift_min = want_number(j, "max_shift_min", inst.max_shift_min);
    inst.time_step_min = want_number(j, "time_step_min", inst.time_step_min);
    inst.epsilon_min = want_number(j, "epsilon_min", inst.epsilon_min);
    if (j.contains("costs")) {
        const json& c = j.at("costs");
        inst.costs.energy_price_usd_per_kwh =
            want_number(c, "energy_price_usd_per_kwh", inst.costs.energy_price_usd_per_kwh);
        inst.costs.vot_usd_per_mile = want_number(c, "vot_usd_per_mile", inst.costs.vot_usd_per_mile);
        inst.costs.truck_speed_mph = want_number(c, "truck_speed_mph", inst.costs.truck_speed_mph);
        inst.costs.charger_lifespan_days =
            want_number(c, "charger_lifespan_days", inst.costs.charger_lifespan_days);
        inst.costs.facility_lifespan_days =
            want_number(c, "facility_lifespan_days", inst.costs.facility_lifespan_days);
    }
    if (j.contains("chargers")) {
        for (const json& cj : j.at("chargers")) {
            ChargerSpec ch;
            ch.name = cj.value("name", std::string{});
            ch.power_kw = want_number(cj, "power_kw", 0);
            ch.added_range_miles = want_number(cj, "added_range_miles", 0);
            ch.added_charge_minutes = want_number(cj, "added_charge_minutes", 0);
            ch.purchase_cost_usd = want_number(cj, "purchase_cost_usd", 0);
            inst.chargers.push_back(std::move(ch));
        }
    } else {
        inst.chargers = default_charger_catalog();
    }
    if (!j.contains("facilities") || !j.contains("routes")) {
        throw InputError("instance JSON needs facilities and routes");
    }
    for (const json& fj : j.at("facilities")) {
        Facility f;
        f.pos = point_from_json(fj, "facility");
        f.cost_per_day_usd = want_number(fj, "cost_per_day_usd", f.cost_per_day_usd);
        inst.facilities.push_back(f);
    }
    for (const json& rj : j.at("routes")) {
        Route r;
        if (!rj.contains("depot")) throw InputError("route needs a depot");
        r.depot = point_from_json(rj.at("depot"), "depot");
        r.initial_battery_min = want_number(rj, "initial_battery_min", inst.battery_cap_min);
        r.final_battery_min = want_number(rj, "final_battery_min", r.final_battery_min);
        if (rj.contains("stops")) {
            for (const json& sj : rj.at("stops")) {
                Stop s;
                s.pos = point_from_json(sj, "stop");
                s.service_min = want_number(sj, "service_min", s.service_min);
                r.stops.push_back(s);
            }
        }
        inst.routes.push_back(std::move(r));
    }
    if (j.contains("travel_override")) {
        TravelOverride ov;
        const json& oj = j.at("travel_override");
        if (!oj.contains("minutes") || !oj.at("minutes").is_array()) {
            throw InputError("travel_override needs a minutes matrix");
        }
        for (const json& row : oj.at("minutes")) {
            ov.minutes.push_back(row.get<std::vector<double>>());
        }
        inst.travel_override = std::move(ov);
    }
    return inst;
}

std::string instance_hash(const Instance& inst) {
    return hex64(fnv1a64(instance_to_json(inst).dump()));
}

json clusters_to_json(const ClusterInstance& ci, double intra_cap_frac) {
    json j;
    j["instance"] = ci.base.name;
    j["intra_cap_frac"] = intra_cap_frac;
    j["intra_cap_min"] = ci.intra_cap_min;
    j["num_steps"] = ci.num_steps;
    j["total_clusters"] = ci.total_clusters();
    j["routes"] = json::array();
    for (size_t r = 0; r < ci.routes.size(); ++r) {
        const RouteTransform& rt = ci.routes[r];
        json rj;
        rj["route"] = static_cast<int>(r);
        rj["cuts"] = rt.cuts.cut_positions;
        rj["cut_objective_min"] = rt.cuts.objective;
        rj["leg_min"] = rt.leg_min;
        rj["base_route_min"] = rt.base_route_min;
        rj["base_drive_min"] = rt.base_drive_min;
        rj["deficit_min"] = rt.deficit_min();
        rj["clusters"] = json::array();
        for (int c = 0; c < rt.size(); ++c) {
            const Cluster& cl = rt.clusters[static_cast<size_t>(c)];
            json cj;
            cj["members"] = cl.members;
            cj["entry_stop"] = cl.entry_stop;
            cj["exit_stop"] = cl.exit_stop;
            cj["internal_travel_min"] = cl.internal_travel_min;
            cj["internal_service_min"] = cl.internal_service_min;
            cj["feasible_facilities"] = rt.feasible_facilities[static_cast<size_t>(c)];
            cj["step_window"] = {rt.step_window[static_cast<size_t>(c)].first,
                                 rt.step_window[static_cast<size_t>(c)].second};
            rj["clusters"].push_back(std::move(cj));
        }
        j["routes"].push_back(std::move(rj));
    }
    return j;
}

json plan_to_json(const RechargePlan& plan) {
    json arr = json::array();
    for (const PlanGene& g : plan.genes) {
        if (g.set()) {
            arr.push_back(json::array({g.facility, g.charger}));
        } else {
            arr.push_back(nullptr);
        }
    }
    return arr;
}

RechargePlan plan_from_json(const json& j, int expected_genes) {
    if (!j.is_array()) throw InputError("plan JSON must be an array of [facility, charger] or null");
    RechargePlan plan;
    for (const json& g : j) {
        if (g.is_null()) {
            plan.genes.push_back({});
        } else if (g.is_array() && g.size() == 2) {
            plan.genes.push_back({g.at(0).get<int>(), g.at(1).get<int>()});
        } else {
            throw InputError("plan entries must be null or [facility, charger]");
        }
    }
    if (expected_genes >= 0 && static_cast<int>(plan.genes.size()) != expected_genes) {
        throw InputError("plan has " + std::to_string(plan.genes.size()) + " genes, expected " +
                         std::to_string(expected_genes));
    }
    return plan;
}

json deployment_to_json(const Deployment& dep) {
    return json{{"open", dep.open}, {"chargers", dep.chargers}};
}

Deployment deployment_from_json(const json& j) {
    if (!j.is_object() || !j.contains("chargers")) {
        throw InputError("deployment JSON needs a chargers matrix");
    }
    Deployment dep;
    for (const json& row : j.at("chargers")) {
        dep.chargers.push_back(row.get<std::vector<int>>());
    }
    if (j.contains("open")) {
        dep.open = j.at("open").get<std::vector<int>>();
    } else {
        for (const auto& row : dep.chargers) {
            int total = 0;
            for (int z : row) total += z;
            dep.open.push_back(total > 0 ? 1 : 0);
        }
    }
    if (dep.open.size() != dep.chargers.size()) {
        throw InputError("deployment open and chargers disagree on facility count");
    }
    return dep;
}

json schedule_to_json(const Schedule& s) {
    json j;
    j["events"] = json::array();
    for (const ChargeEvent& ev : s.events) {
        j["events"].push_back({{"route", ev.route},
                               {"cluster", ev.cluster_local},
                               {"cluster_global", ev.cluster_global},
                               {"facility", ev.facility},
                               {"charger", ev.charger},
                               {"arrival", ev.arrival},
                               {"wait", ev.wait},
                               {"start", ev.start},
                               {"end", ev.end},
                               {"duration", ev.duration},
                               {"battery_at_facility", ev.battery_at_facility}});
    }
    j["departure"] = s.departure;
    j["battery"] = s.battery;
    j["waits_converged"] = s.waits_converged;
    j["sweeps"] = s.sweeps;
    return j;
}

json cost_to_json(const CostBreakdown& c) {
    return json{{"detour_vot", c.detour_vot}, {"wait_vot", c.wait_vot},
                {"recharge_vot", c.recharge_vot}, {"energy", c.energy},
                {"facility", c.facility},     {"charger", c.charger},
                {"total", c.total}};
}

json violations_to_json(const std::vector<Violation>& v) {
    json arr = json::array();
    for (const Violation& x : v) arr.push_back({{"code", x.code}, {"detail", x.detail}});
    return arr;
}

GenSpec gen_spec_from_json(const json& j) {
    GenSpec spec;
    spec.name = j.value("name", spec.name);
    spec.routes = j.value("routes", spec.routes);
    spec.stops_per_route = j.value("stops_per_route", spec.stops_per_route);
    spec.facilities = j.value("facilities", spec.facilities);
    spec.extent_miles = want_number(j, "extent_miles", spec.extent_miles);
    spec.time_step_min = want_number(j, "time_step_min", spec.time_step_min);
    spec.seed = j.value("seed", spec.seed);
    return spec;
}

json gen_spec_to_json(const GenSpec& spec) {
    return json{{"name", spec.name},
                {"routes", spec.routes},
                {"stops_per_route", spec.stops_per_route},
                {"facilities", spec.facilities},
                {"extent_miles", spec.extent_miles},
                {"time_step_min", spec.time_step_min},
                {"seed", spec.seed}};
}

GaConfig ga_config_from_json(const json& j) {
    GaConfig cfg;
    cfg.population = j.value("population", cfg.population);
    cfg.iterations = j.value("iterations", cfg.iterations);
    cfg.parents = j.value("parents", cfg.parents);
    cfg.mutate_fraction = want_number(j, "mutate_fraction", cfg.mutate_fraction);
    cfg.no_charge_prob = want_number(j, "no_charge_prob", cfg.no_charge_prob);
    cfg.temperature = want_number(j, "temperature", cfg.temperature);
    if (j.contains("charger_weights")) {
        cfg.charger_weights = j.at("charger_weights").get<std::vector<double>>();
    }
    cfg.n_lower = j.value("n_lower", cfg.n_lower);
    cfg.n_upper = j.value("n_upper", cfg.n_upper);
    cfg.time_limit_s = want_number(j, "time_limit_s", cfg.time_limit_s);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.legacy_rounding = j.value("legacy_rounding", cfg.legacy_rounding);
    return cfg;
}

json ga_config_to_json(const GaConfig& cfg) {
    json j{{"population", cfg.population},
           {"iterations", cfg.iterations},
           {"parents", cfg.parents},
           {"mutate_fraction", cfg.mutate_fraction},
           {"no_charge_prob", cfg.no_charge_prob},
           {"temperature", cfg.temperature},
           {"n_lower", cfg.n_lower},
           {"n_upper", cfg.n_upper},
           {"time_limit_s", cfg.time_limit_s},
           {"threads", cfg.threads},
           {"seed", cfg.seed},
           {"legacy_rounding", cfg.legacy_rounding}};
    if (!cfg.charger_weights.empty()) j["charger_weights"] = cfg.charger_weights;
    return j;
}

ExactConfig exact_config_from_json(const json& j) {
    ExactConfig cfg;
    cfg.max_space = want_number(j, "max_space", cfg.max_space);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.tie_perm_cap = j.value("tie_perm_cap", cfg.tie_perm_cap);
    cfg.legacy_rounding = j.value("legacy_rounding", cfg.legacy_rounding);
    return cfg;
}

json exact_config_to_json(const ExactConfig& cfg) {
    return json{{"max_space", cfg.max_space},
                {"threads", cfg.threads},
                {"tie_perm_cap", cfg.tie_perm_cap},
                {"legacy_rounding", cfg.legacy_rounding}};
}

SweepSpec sweep_spec_from_json(const json& j) {
    if (!j.is_object()) throw InputError("sweep spec must be an object");
    SweepSpec spec;
    if (j.contains("base")) spec.base = gen_spec_from_json(j.at("base"));
    if (!j.contains("axis") || !j.contains("levels")) {
        throw InputError("sweep spec needs axis and levels");
    }
    spec.axis = j.at("axis").get<std::string>();
    spec.levels = j.at("levels").get<std::vector<double>>();
    spec.intra_cap_frac = want_number(j, "intra_cap_frac", spec.intra_cap_frac);
    spec.method = j.value("method", spec.method);
    spec.replications = j.value("replications", spec.replications);
    if (j.contains("ga")) spec.ga = ga_config_from_json(j.at("ga"));
    if (j.contains("exact")) spec.exact = exact_config_from_json(j.at("exact"));
    return spec;
}

SolutionValues solution_values_from_json(const json& j) {
    if (!j.is_object()) throw InputError("solution JSON must be an object");
    SolutionValues sol;
    if (j.contains("objective")) {
        sol.has_objective = true;
        sol.objective = j.at("objective").get<double>();
    }
    if (!j.contains("variables") || !j.at("variables").is_object()) {
        throw InputError("solution JSON needs a variables object");
    }
    for (const auto& [name, value] : j.at("variables").items()) {
        if (!value.is_number()) {
            throw InputError("solution variable " + name + " must be a number");
        }
        sol.variables[name] = value.get<double>();
    }
    return sol;
}

json ga_result_to_json(const GaResult& res) {
    json j;
    j["feasible"] = res.feasible;
    j["plan"] = plan_to_json(res.plan);
    j["deployment"] = deployment_to_json(res.deployment);
    j["cost"] = cost_to_json(res.cost);
    j["defects"] = res.defects;
    j["unique_plans"] = res.unique_plans;
    j["deployment_evals"] = res.deployment_evals;
    return j;
}

json exact_result_to_json(const ExactResult& res) {
    json j;
    j["feasible"] = res.feasible;
    j["plan"] = plan_to_json(res.plan);
    j["deployment"] = deployment_to_json(res.deployment);
    j["cost"] = cost_to_json(res.cost);
    j["plans_enumerated"] = res.plans_enumerated;
    j["evaluations"] = res.evaluations;
    j["optimal"] = res.optimal;
    j["tie_order_used"] = res.tie_order_used;
    j["defects"] = res.defects;
    return j;
}

json replay_result_to_json(const ReplayResult& res) {
    json j;
    j["plan"] = plan_to_json(res.plan);
    j["deployment"] = deployment_to_json(res.deployment);
    j["schedule"] = schedule_to_json(res.schedule);
    j["cost"] = cost_to_json(res.cost);
    j["violations"] = violations_to_json(res.violations);
    j["audit"] = res.audit;
    if (res.has_file_objective) {
        j["file_objective"] = res.file_objective;
        j["objective_matches"] = res.objective_matches;
    }
    j["feasible"] = res.violations.empty();
    return j;
}

json sweep_outcome_to_json(const SweepOutcome& outcome) {
    json j;
    j["axis"] = outcome.axis;
    j["replications"] = json::array();
    for (const SweepRepRow& r : outcome.reps) {
        j["replications"].push_back({{"level", r.level},
                                     {"rep", r.rep},
                                     {"seed", r.seed},
                                     {"feasible", r.feasible},
                                     {"cost", cost_to_json(r.cost)},
                                     {"chargers_by_type", r.chargers_by_type},
                                     {"note", r.note}});
    }
    j["levels"] = json::array();
    for (const SweepLevelRow& l : outcome.levels) {
        j["levels"].push_back({{"level", l.level},
                               {"feasible_reps", l.feasible_reps},
                               {"min", l.min},
                               {"mean", l.mean},
                               {"stddev", l.stddev},
                               {"normalized", l.normalized},
                               {"is_best", l.is_best},
                               {"note", l.note}});
    }
    return j;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace evselca
