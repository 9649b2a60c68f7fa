#include "evselca/evselca.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <utility>

#include "json_io.hpp"

struct evselca_instance {
    evselca::Instance inst;
};

namespace {

using nlohmann::json;
using namespace evselca;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_string(char** slot, const std::string& s) {
    if (slot != nullptr) *slot = dup_string(s);
}

template <typename Fn>
int guarded(char** error, Fn&& fn) {
    if (error != nullptr) *error = nullptr;
    try {
        return fn();
    } catch (const InputError& e) {
        set_string(error, e.what());
        return EVSELCA_INVALID_INPUT;
    } catch (const InfeasibleError& e) {
        set_string(error, e.what());
        return EVSELCA_INFEASIBLE;
    } catch (const LimitError& e) {
        set_string(error, e.what());
        return EVSELCA_LIMIT_EXCEEDED;
    } catch (const std::exception& e) {
        set_string(error, e.what());
        return EVSELCA_INTERNAL_ERROR;
    } catch (...) {
        set_string(error, "unknown failure");
        return EVSELCA_INTERNAL_ERROR;
    }
}

const char* require_text(const char* text, const char* what) {
    if (text == nullptr) throw InputError(std::string(what) + " must not be null");
    return text;
}

const Instance& require_instance(const evselca_instance* inst) {
    if (inst == nullptr) throw InputError("instance handle must not be null");
    return inst->inst;
}

template <typename T>
T* require_slot(T* slot, const char* what) {
    if (slot == nullptr) throw InputError(std::string(what) + " must not be null");
    return slot;
}

ClusterInstance build_checked(const evselca_instance* inst, double intra_cap_frac) {
    return build_cluster_instance(require_instance(inst), intra_cap_frac);
}

RechargePlan parse_plan(const ClusterInstance& ci, const char* plan_json) {
    RechargePlan plan =
        plan_from_json(parse_json(require_text(plan_json, "plan"), "plan"), ci.total_clusters());
    for (const PlanGene& g : plan.genes) {
        if (!g.set()) continue;
        if (g.facility >= ci.num_facilities() || g.charger < 0 ||
            g.charger >= ci.num_charger_types()) {
            throw InputError("plan gene references an unknown facility or charger type");
        }
    }
    return plan;
}

Deployment parse_deployment(const ClusterInstance& ci, const char* deployment_json) {
    Deployment dep =
        deployment_from_json(parse_json(require_text(deployment_json, "deployment"), "deployment"));
    if (static_cast<int>(dep.chargers.size()) != ci.num_facilities()) {
        throw InputError("deployment lists " + std::to_string(dep.chargers.size()) +
                         " facilities, instance has " + std::to_string(ci.num_facilities()));
    }
    for (size_t f = 0; f < dep.chargers.size(); ++f) {
        if (static_cast<int>(dep.chargers[f].size()) != ci.num_charger_types()) {
            throw InputError("deployment charger row " + std::to_string(f) + " needs " +
                             std::to_string(ci.num_charger_types()) + " entries");
        }
        int total = 0;
        for (int z : dep.chargers[f]) {
            if (z < 0) throw InputError("charger counts must be non-negative");
            total += z;
        }
        if (total > 0 && dep.open[f] == 0) {
            throw InputError("facility " + std::to_string(f) + " holds chargers but is not open");
        }
    }
    return dep;
}

json explain_sets(const ClusterInstance& ci) {
    json j;
    j["feasible_facilities"] = json::array();
    j["step_windows"] = json::array();
    j["eligible_clusters"] = json::array();
    for (size_t r = 0; r < ci.routes.size(); ++r) {
        const RouteTransform& rt = ci.routes[r];
        for (int c = 0; c < rt.size(); ++c) {
            j["feasible_facilities"].push_back(
                {{"route", static_cast<int>(r)},
                 {"cluster", c},
                 {"facilities", rt.feasible_facilities[static_cast<size_t>(c)]}});
            const auto& w = rt.step_window[static_cast<size_t>(c)];
            j["step_windows"].push_back({{"route", static_cast<int>(r)},
                                         {"cluster", c},
                                         {"first_step", w.first},
                                         {"last_step", w.second}});
        }
        for (int f = 0; f < ci.num_facilities(); ++f) {
            for (int t = 0; t < ci.num_steps; ++t) {
                auto members = ci.eligible_clusters(static_cast<int>(r), f, t);
                if (members.empty()) continue;
                j["eligible_clusters"].push_back({{"route", static_cast<int>(r)},
                                                  {"facility", f},
                                                  {"step", t},
                                                  {"clusters", members}});
            }
        }
    }
    return j;
}

json occupancy_to_json(const std::vector<OccupancyCell>& cells) {
    json arr = json::array();
    for (const OccupancyCell& cell : cells) {
        arr.push_back({{"facility", cell.facility},
                       {"charger", cell.charger},
                       {"step", cell.step},
                       {"count", cell.count}});
    }
    return arr;
}

json ga_trace_to_json(const std::vector<GaTraceRow>& trace) {
    json arr = json::array();
    for (const GaTraceRow& row : trace) {
        arr.push_back({{"generation", row.generation},
                       {"best_feasible", row.best_feasible},
                       {"best_cost", row.best_cost},
                       {"feasible_count", row.feasible_count},
                       {"mean_feasible_cost", row.mean_feasible_cost}});
    }
    return arr;
}

}  // namespace

extern "C" {

const char* evselca_version(void) { return "1.0.0"; }

const char* evselca_status_name(int status) {
    switch (status) {
        case EVSELCA_OK: return "ok";
        case EVSELCA_INFEASIBLE: return "infeasible";
        case EVSELCA_INVALID_INPUT: return "invalid_input";
        case EVSELCA_LIMIT_EXCEEDED: return "limit_exceeded";
        case EVSELCA_INTERNAL_ERROR: return "internal_error";
        default: return "unknown";
    }
}

void evselca_string_free(char* text) { std::free(text); }

int evselca_instance_parse(const char* json_text, evselca_instance** out, char** error) {
    return guarded(error, [&] {
        require_slot(out, "out");
        Instance inst = instance_from_json(
            parse_json(require_text(json_text, "instance JSON"), "instance"));
        *out = new evselca_instance{std::move(inst)};
        return EVSELCA_OK;
    });
}

int evselca_instance_generate(const char* gen_spec_json, evselca_instance** out, char** error) {
    return guarded(error, [&] {
        require_slot(out, "out");
        GenSpec spec;
        if (gen_spec_json != nullptr && *gen_spec_json != '\0') {
            spec = gen_spec_from_json(parse_json(gen_spec_json, "generator spec"));
        }
        *out = new evselca_instance{gen_instance(spec)};
        return EVSELCA_OK;
    });
}

int evselca_instance_to_json(const evselca_instance* inst, char** out_json, char** error) {
    return guarded(error, [&] {
        const Instance& i = require_instance(inst);
        set_string(require_slot(out_json, "out_json"), dump_json(instance_to_json(i)));
        return EVSELCA_OK;
    });
}

int evselca_instance_validate(const evselca_instance* inst, char** violations_json, char** error) {
    return guarded(error, [&] {
        const auto violations = validate_instance(require_instance(inst));
        set_string(violations_json, dump_json(violations_to_json(violations)));
        if (!violations.empty()) {
            set_string(error, "instance violates " + std::to_string(violations.size()) +
                                  " invariant(s); first: " + violations.front().detail);
            return static_cast<int>(EVSELCA_INVALID_INPUT);
        }
        return static_cast<int>(EVSELCA_OK);
    });
}

int evselca_instance_hash(const evselca_instance* inst, char** out_hash, char** error) {
    return guarded(error, [&] {
        const Instance& i = require_instance(inst);
        set_string(require_slot(out_hash, "out_hash"), instance_hash(i));
        return EVSELCA_OK;
    });
}

void evselca_instance_free(evselca_instance* inst) { delete inst; }

int evselca_cluster(const evselca_instance* inst, double intra_cap_frac, char** out_json,
                    char** error) {
    return guarded(error, [&] {
        require_slot(out_json, "out_json");
        ClusterInstance ci = build_checked(inst, intra_cap_frac);
        set_string(out_json, dump_json(clusters_to_json(ci, intra_cap_frac)));
        return EVSELCA_OK;
    });
}

int evselca_evaluate(const evselca_instance* inst, double intra_cap_frac, const char* plan_json,
                     const char* deployment_json, int explain, char** out_json, char** error) {
    return guarded(error, [&] {
        require_slot(out_json, "out_json");
        ClusterInstance ci = build_checked(inst, intra_cap_frac);
        RechargePlan plan = parse_plan(ci, plan_json);
        Deployment dep = parse_deployment(ci, deployment_json);

        EvalOutcome outcome = evaluate_plan(ci, plan, dep.chargers);
        // Honor explicitly opened-but-empty facilities in the cost.
        outcome.cost = objective(ci, outcome.schedule, dep);

        json j;
        j["feasible"] = outcome.feasible;
        j["defect_count"] = outcome.defect_count;
        j["defects"] = outcome.defects;
        j["plan"] = plan_to_json(plan);
        j["deployment"] = deployment_to_json(dep);
        j["schedule"] = schedule_to_json(outcome.schedule);
        j["cost"] = cost_to_json(outcome.cost);
        j["occupancy"] = occupancy_to_json(compute_occupancy(ci, outcome.schedule));
        if (explain != 0) j["explain"] = explain_sets(ci);
        set_string(out_json, dump_json(j));
        return EVSELCA_OK;
    });
}

int evselca_solve(const evselca_instance* inst, double intra_cap_frac, const char* method,
                  const char* config_json, char** out_json, char** error) {
    return guarded(error, [&] {
        require_slot(out_json, "out_json");
        const std::string m = require_text(method, "method");
        ClusterInstance ci = build_checked(inst, intra_cap_frac);

        json cfg = json::object();
        if (config_json != nullptr && *config_json != '\0') {
            cfg = parse_json(config_json, "solver config");
            if (!cfg.is_object()) throw InputError("solver config must be an object");
        }
        GaConfig ga_cfg =
            cfg.contains("ga") ? ga_config_from_json(cfg.at("ga")) : GaConfig{};
        ExactConfig ex_cfg =
            cfg.contains("exact") ? exact_config_from_json(cfg.at("exact")) : ExactConfig{};

        json j;
        bool feasible = false;
        if (m == "ga") {
            GaResult res = ga_solve(ci, ga_cfg);
            feasible = res.feasible;
            j = ga_result_to_json(res);
            j["trace"] = ga_trace_to_json(res.trace);
        } else if (m == "exact" || m == "hybrid") {
            ExactResult res =
                m == "exact" ? exact_solve(ci, ex_cfg) : hybrid_solve(ci, ga_cfg, ex_cfg);
            feasible = res.feasible;
            j = exact_result_to_json(res);
            j["trace"] = json::array();
        } else {
            throw InputError("unknown solve method: " + m);
        }
        j["method"] = m;
        set_string(out_json, dump_json(j));
        return feasible ? EVSELCA_OK : EVSELCA_INFEASIBLE;
    });
}

int evselca_export_milp(const evselca_instance* inst, double intra_cap_frac, char** out_lp,
                        char** error) {
    return guarded(error, [&] {
        require_slot(out_lp, "out_lp");
        ClusterInstance ci = build_checked(inst, intra_cap_frac);
        set_string(out_lp, emit_lp(ci));
        return EVSELCA_OK;
    });
}

int evselca_replay(const evselca_instance* inst, double intra_cap_frac, const char* solution_json,
                   char** out_json, char** error) {
    return guarded(error, [&] {
        require_slot(out_json, "out_json");
        ClusterInstance ci = build_checked(inst, intra_cap_frac);
        SolutionValues sol = solution_values_from_json(
            parse_json(require_text(solution_json, "solution"), "solution"));
        ReplayResult res = replay_solution(ci, sol);
        set_string(out_json, dump_json(replay_result_to_json(res)));
        const bool accepted = res.violations.empty() && res.objective_matches;
        if (!accepted) {
            set_string(error, res.violations.empty()
                                  ? "solver objective disagrees with the recomputed cost"
                                  : "replayed schedule violates " + res.violations.front().code);
        }
        return accepted ? EVSELCA_OK : EVSELCA_INFEASIBLE;
    });
}

int evselca_sweep(const char* sweep_spec_json, char** out_json, char** out_csv, char** error) {
    return guarded(error, [&] {
        SweepSpec spec = sweep_spec_from_json(
            parse_json(require_text(sweep_spec_json, "sweep spec"), "sweep spec"));
        SweepOutcome outcome = run_sweep(spec);
        set_string(out_json, dump_json(sweep_outcome_to_json(outcome)));
        set_string(out_csv, sweep_csv(outcome));
        return EVSELCA_OK;
    });
}

}  // extern "C"
