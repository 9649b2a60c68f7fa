#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evselca/evselca.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliError {
    int exit_code;
    std::string message;
};

int exit_code_for(int status) {
    switch (status) {
        case EVSELCA_OK: return 0;
        case EVSELCA_INFEASIBLE:
        case EVSELCA_LIMIT_EXCEEDED: return 1;
        default: return 2;
    }
}

struct CStr {
    char* p = nullptr;
    CStr() = default;
    CStr(const CStr&) = delete;
    CStr& operator=(const CStr&) = delete;
    ~CStr() { evselca_string_free(p); }
    std::string str() const { return p != nullptr ? std::string(p) : std::string(); }
};

struct InstanceHandle {
    evselca_instance* h = nullptr;
    InstanceHandle() = default;
    InstanceHandle(InstanceHandle&& other) noexcept : h(other.h) { other.h = nullptr; }
    InstanceHandle(const InstanceHandle&) = delete;
    InstanceHandle& operator=(const InstanceHandle&) = delete;
    ~InstanceHandle() { evselca_instance_free(h); }
};

[[noreturn]] void raise(int status, const std::string& prefix, const CStr& err) {
    std::string msg = err.str();
    if (msg.empty()) msg = evselca_status_name(status);
    throw CliError{exit_code_for(status), prefix + ": " + msg};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError{2, "cannot read " + path};
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError{2, "cannot write " + path.string()};
    out << content;
    out.flush();
    if (!out) throw CliError{2, "short write to " + path.string()};
}

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

json parse_checked(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw CliError{2, "malformed JSON in " + what};
    return j;
}

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

struct Options {
    std::string instance_path;
    std::string out_dir = ".";
    std::string out_file;
    double intra_cap_frac = 0.5;
    double t_delta = 0; // 0 keeps the instance grid
    std::uint64_t seed = 1;
    double time_limit_s = 0;
    int threads = 0; // 0 = all cores

    std::string name = "generated";
    int routes = 3;
    int stops = 6;
    int facilities = 3;
    double extent = 40;
    double gen_t_delta = 15;

    std::string plan_path;
    std::string deployment_path;
    bool explain = false;

    std::string method = "ga";
    int population = 50;
    int iterations = 200;
    int parents = 10;
    double mutate_fraction = 0.2;
    double no_charge_prob = 0.5;
    double temperature = 1.0;
    std::vector<double> charger_weights;
    int n_lower = 1;
    int n_upper = 0;
    bool legacy_rounding = false;
    double max_space = 1e7;
    int tie_perm_cap = 24;

    std::string solution_path;

    std::string spec_path;
    bool full_scale = false;

    int resolved_threads() const {
        if (threads > 0) return threads;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? static_cast<int>(hw) : 1;
    }
};

InstanceHandle load_instance(const Options& o) {
    std::string text = slurp(o.instance_path);
    if (o.t_delta > 0) {
        json j = parse_checked(text, o.instance_path);
        j["time_step_min"] = o.t_delta;
        text = j.dump();
    }
    InstanceHandle inst;
    CStr err;
    const int rc = evselca_instance_parse(text.c_str(), &inst.h, &err.p);
    if (rc != EVSELCA_OK) raise(rc, o.instance_path, err);
    return inst;
}

std::string hash_of(const InstanceHandle& inst) {
    CStr out;
    CStr err;
    const int rc = evselca_instance_hash(inst.h, &out.p, &err.p);
    if (rc != EVSELCA_OK) raise(rc, "instance hash", err);
    return out.str();
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void write_manifest(const fs::path& path, const std::string& command, const json& config,
                    std::uint64_t seed, const std::string& instance_hash, double wall_s,
                    int exit_code) {
    json j{{"command", command},        {"config", config},
           {"seed", seed},              {"tool_version", evselca_version()},
           {"instance_hash", instance_hash}, {"wall_time_s", wall_s},
           {"exit_status", exit_code}};
    write_file(path, pretty(j));
}

fs::path resolve_out(const Options& o, const char* default_name) {
    if (o.out_file.empty()) return fs::path(o.out_dir) / default_name;
    fs::path out(o.out_file);
    return out.is_absolute() ? out : fs::path(o.out_dir) / out;
}

std::string occupancy_csv(const json& cells) {
    std::string csv = "facility,charger_type,step,count\n";
    for (const json& c : cells) {
        csv += std::to_string(c.at("facility").get<int>());
        csv += ',';
        csv += std::to_string(c.at("charger").get<int>());
        csv += ',';
        csv += std::to_string(c.at("step").get<int>());
        csv += ',';
        csv += std::to_string(c.at("count").get<int>());
        csv += '\n';
    }
    return csv;
}

std::string convergence_csv(const json& trace) {
    std::string csv = "generation,best,mean\n";
    for (const json& row : trace) {
        csv += std::to_string(row.at("generation").get<int>());
        csv += ',';
        if (row.at("best_feasible").get<bool>()) {
            csv += fmt_num(row.at("best_cost").get<double>());
        }
        csv += ',';
        if (row.at("feasible_count").get<int>() > 0) {
            csv += fmt_num(row.at("mean_feasible_cost").get<double>());
        }
        csv += '\n';
    }
    return csv;
}

int run_gen(const Options& o) {
    Timer timer;
    const json spec{{"name", o.name},
                    {"routes", o.routes},
                    {"stops_per_route", o.stops},
                    {"facilities", o.facilities},
                    {"extent_miles", o.extent},
                    {"time_step_min", o.gen_t_delta},
                    {"seed", o.seed}};
    InstanceHandle inst;
    {
        CStr err;
        const int rc = evselca_instance_generate(spec.dump().c_str(), &inst.h, &err.p);
        if (rc != EVSELCA_OK) raise(rc, "gen-instance", err);
    }
    CStr text;
    CStr err;
    const int rc = evselca_instance_to_json(inst.h, &text.p, &err.p);
    if (rc != EVSELCA_OK) raise(rc, "gen-instance", err);

    const fs::path out = resolve_out(o, "instance.json");
    const std::string hash = hash_of(inst);
    write_file(out, text.str());
    write_manifest(out.string() + ".manifest.json", "gen-instance", spec, o.seed, hash,
                   timer.seconds(), 0);
    std::cout << "wrote " << out.string() << " (hash " << hash << ")\n";
    return 0;
}

int run_cluster(const Options& o) {
    Timer timer;
    InstanceHandle inst = load_instance(o);
    CStr out;
    CStr err;
    const int rc = evselca_cluster(inst.h, o.intra_cap_frac, &out.p, &err.p);
    if (rc != EVSELCA_OK) raise(rc, "cluster", err);

    const fs::path dir(o.out_dir);
    write_file(dir / "clusters.json", out.str());
    const json cfg{{"instance", o.instance_path},
                   {"intra_cap_frac", o.intra_cap_frac},
                   {"t_delta", o.t_delta}};
    write_manifest(dir / "manifest.json", "cluster", cfg, 0, hash_of(inst), timer.seconds(), 0);

    const json payload = parse_checked(out.str(), "cluster payload");
    std::cout << "wrote " << (dir / "clusters.json").string() << " ("
              << payload.at("total_clusters").get<int>() << " clusters)\n";
    return 0;
}

int run_evaluate(const Options& o) {
    Timer timer;
    InstanceHandle inst = load_instance(o);
    const std::string plan_text = slurp(o.plan_path);
    const std::string dep_text = slurp(o.deployment_path);
    CStr out;
    CStr err;
    const int rc = evselca_evaluate(inst.h, o.intra_cap_frac, plan_text.c_str(), dep_text.c_str(),
                                    o.explain ? 1 : 0, &out.p, &err.p);
    if (rc != EVSELCA_OK) raise(rc, "evaluate", err);

    json payload = parse_checked(out.str(), "evaluate payload");
    json schedule = payload.at("schedule");
    schedule["feasible"] = payload.at("feasible");
    schedule["defects"] = payload.at("defects");

    const fs::path dir(o.out_dir);
    write_file(dir / "schedule.json", pretty(schedule));
    write_file(dir / "cost.json", pretty(payload.at("cost")));
    write_file(dir / "occupancy.csv", occupancy_csv(payload.at("occupancy")));
    if (o.explain) write_file(dir / "explain.json", pretty(payload.at("explain")));

    const json cfg{{"instance", o.instance_path},
                   {"plan", o.plan_path},
                   {"deployment", o.deployment_path},
                   {"intra_cap_frac", o.intra_cap_frac},
                   {"t_delta", o.t_delta},
                   {"explain", o.explain}};
    write_manifest(dir / "manifest.json", "evaluate", cfg, 0, hash_of(inst), timer.seconds(), 0);

    std::cout << (payload.at("feasible").get<bool>() ? "feasible" : "infeasible") << ", total "
              << fmt_num(payload.at("cost").at("total").get<double>()) << " per day\n";
    for (const json& d : payload.at("defects")) {
        std::cout << "  defect: " << d.get<std::string>() << "\n";
    }
    return 0;
}

int run_solve(const Options& o) {
    Timer timer;
    InstanceHandle inst = load_instance(o);
    json ga{{"population", o.population},
            {"iterations", o.iterations},
            {"parents", o.parents},
            {"mutate_fraction", o.mutate_fraction},
            {"no_charge_prob", o.no_charge_prob},
            {"temperature", o.temperature},
            {"n_lower", o.n_lower},
            {"n_upper", o.n_upper},
            {"time_limit_s", o.time_limit_s},
            {"threads", o.resolved_threads()},
            {"seed", o.seed},
            {"legacy_rounding", o.legacy_rounding}};
    if (!o.charger_weights.empty()) ga["charger_weights"] = o.charger_weights;
    const json exact{{"max_space", o.max_space},
                     {"threads", o.resolved_threads()},
                     {"tie_perm_cap", o.tie_perm_cap},
                     {"legacy_rounding", o.legacy_rounding}};
    const json cfg{{"ga", ga}, {"exact", exact}};

    CStr out;
    CStr err;
    const int rc = evselca_solve(inst.h, o.intra_cap_frac, o.method.c_str(), cfg.dump().c_str(),
                                 &out.p, &err.p);
    if (rc != EVSELCA_OK && rc != EVSELCA_INFEASIBLE) raise(rc, "solve", err);

    json payload = parse_checked(out.str(), "solve payload");
    const json trace = payload.at("trace");
    payload.erase("trace");

    const fs::path dir(o.out_dir);
    write_file(dir / "solution.json", pretty(payload));
    write_file(dir / "cost.json", pretty(payload.at("cost")));
    write_file(dir / "convergence.csv", convergence_csv(trace));

    const int code = exit_code_for(rc);
    const json mcfg{{"instance", o.instance_path},
                    {"method", o.method},
                    {"intra_cap_frac", o.intra_cap_frac},
                    {"t_delta", o.t_delta},
                    {"ga", ga},
                    {"exact", exact}};
    write_manifest(dir / "manifest.json", "solve", mcfg, o.seed, hash_of(inst), timer.seconds(),
                   code);

    if (payload.at("feasible").get<bool>()) {
        std::cout << "feasible, total " << fmt_num(payload.at("cost").at("total").get<double>())
                  << " per day\n";
    } else {
        std::cout << "no feasible plan found (best attempt has "
                  << payload.at("defects").get<int>() << " defects)\n";
    }
    return code;
}

int run_export_milp(const Options& o) {
    Timer timer;
    InstanceHandle inst = load_instance(o);
    CStr out;
    CStr err;
    const int rc = evselca_export_milp(inst.h, o.intra_cap_frac, &out.p, &err.p);
    if (rc != EVSELCA_OK) raise(rc, "export-milp", err);

    const fs::path path = resolve_out(o, "model.lp");
    write_file(path, out.str());
    const json cfg{{"instance", o.instance_path},
                   {"intra_cap_frac", o.intra_cap_frac},
                   {"t_delta", o.t_delta}};
    write_manifest(path.string() + ".manifest.json", "export-milp", cfg, 0, hash_of(inst),
                   timer.seconds(), 0);
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int run_replay(const Options& o) {
    Timer timer;
    InstanceHandle inst = load_instance(o);
    const std::string sol_text = slurp(o.solution_path);
    CStr out;
    CStr err;
    const int rc = evselca_replay(inst.h, o.intra_cap_frac, sol_text.c_str(), &out.p, &err.p);
    if (rc != EVSELCA_OK && rc != EVSELCA_INFEASIBLE) raise(rc, "replay", err);

    const json payload = parse_checked(out.str(), "replay payload");
    const fs::path dir(o.out_dir);
    write_file(dir / "replay.json", pretty(payload));

    const int code = exit_code_for(rc);
    const json cfg{{"instance", o.instance_path},
                   {"solution", o.solution_path},
                   {"intra_cap_frac", o.intra_cap_frac},
                   {"t_delta", o.t_delta}};
    write_manifest(dir / "manifest.json", "replay", cfg, 0, hash_of(inst), timer.seconds(), code);

    std::cout << "recomputed objective: "
              << fmt_num(payload.at("cost").at("total").get<double>()) << "\n";
    if (payload.contains("file_objective")) {
        std::cout << "solver objective:   " << fmt_num(payload.at("file_objective").get<double>())
                  << (payload.at("objective_matches").get<bool>() ? " (matches)" : " (MISMATCH)")
                  << "\n";
    }
    const json& violations = payload.at("violations");
    if (!violations.empty()) {
        std::cout << violations.size() << " violation(s); first: "
                  << violations.front().at("code").get<std::string>() << ": "
                  << violations.front().at("detail").get<std::string>() << "\n";
    }
    return code;
}

int run_sweep(const Options& o, bool seed_given, bool threads_given, bool time_limit_given) {
    Timer timer;
    json spec = parse_checked(slurp(o.spec_path), o.spec_path);
    if (!spec.is_object()) throw CliError{2, "sweep spec must be a JSON object"};

    if (!spec.contains("replications")) spec["replications"] = o.full_scale ? 20 : 5;
    if (!spec["ga"].is_object()) spec["ga"] = json::object();
    if (!spec["exact"].is_object()) spec["exact"] = json::object();
    json& ga = spec["ga"];
    json& exact = spec["exact"];
    if (time_limit_given || !ga.contains("time_limit_s")) {
        ga["time_limit_s"] =
            time_limit_given ? o.time_limit_s : (o.full_scale ? 600.0 : 30.0);
    }
    if (seed_given || !ga.contains("seed")) ga["seed"] = o.seed;
    if (threads_given || !ga.contains("threads")) ga["threads"] = o.resolved_threads();
    if (threads_given || !exact.contains("threads")) exact["threads"] = o.resolved_threads();

    CStr out_json;
    CStr out_csv;
    CStr err;
    const int rc = evselca_sweep(spec.dump().c_str(), &out_json.p, &out_csv.p, &err.p);
    if (rc != EVSELCA_OK) raise(rc, "sweep", err);

    const fs::path path = resolve_out(o, "results.csv");
    write_file(path, out_csv.str());

    std::string base_hash;
    {
        InstanceHandle base;
        CStr gen_err;
        const json base_spec = spec.contains("base") ? spec.at("base") : json::object();
        if (evselca_instance_generate(base_spec.dump().c_str(), &base.h, &gen_err.p) ==
            EVSELCA_OK) {
            base_hash = hash_of(base);
        }
    }
    write_manifest(path.string() + ".manifest.json", "sweep", spec,
                   ga.at("seed").get<std::uint64_t>(), base_hash, timer.seconds(), 0);

    const json payload = parse_checked(out_json.str(), "sweep payload");
    std::cout << "wrote " << path.string() << " (" << payload.at("levels").size()
              << " levels, " << payload.at("replications").size() << " runs)\n";
    for (const json& level : payload.at("levels")) {
        if (level.at("is_best").get<bool>()) {
            std::cout << "best level " << fmt_num(level.at("level").get<double>()) << ", min total "
                      << fmt_num(level.at("min").get<double>()) << " per day\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EVSELCA toolkit: charger placement and recharge scheduling on fixed routes"};
    app.require_subcommand(1);
    app.set_version_flag("--version", evselca_version());

    Options o;

    const auto add_instance = [&](CLI::App* sub) {
        sub->add_option("--instance", o.instance_path, "Instance JSON file")
            ->envname("EVSELCA_INSTANCE")
            ->required();
        sub->add_option("--t-delta", o.t_delta,
                        "Override the occupancy grid step in minutes (0 keeps the instance value)")
            ->envname("EVSELCA_T_DELTA");
        sub->add_option("--intra-cap-frac", o.intra_cap_frac,
                        "Battery fraction a cluster may consume internally")
            ->envname("EVSELCA_INTRA_CAP_FRAC");
    };
    const auto add_out_dir = [&](CLI::App* sub) {
        sub->add_option("--out-dir", o.out_dir, "Directory receiving the artifacts")
            ->envname("EVSELCA_OUT_DIR");
    };
    const auto add_seed = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "Master random seed")->envname("EVSELCA_SEED");
    };
    const auto add_threads = [&](CLI::App* sub) {
        sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)")
            ->envname("EVSELCA_THREADS");
    };
    const auto add_time_limit = [&](CLI::App* sub) {
        sub->add_option("--time-limit-s", o.time_limit_s,
                        "Wall-clock budget in seconds (0 = none)")
            ->envname("EVSELCA_TIME_LIMIT_S");
    };

    CLI::App* gen = app.add_subcommand("gen-instance", "Generate a synthetic instance");
    gen->add_option("--name", o.name, "Instance name");
    gen->add_option("--routes", o.routes, "Route count");
    gen->add_option("--stops-per-route", o.stops, "Stops per route");
    gen->add_option("--facilities", o.facilities, "Candidate facility count");
    gen->add_option("--extent-miles", o.extent, "Service square side length in miles");
    gen->add_option("--t-delta", o.gen_t_delta, "Occupancy grid step in minutes")
        ->envname("EVSELCA_T_DELTA");
    add_seed(gen);
    gen->add_option("--out", o.out_file, "Instance path (default instance.json)");
    add_out_dir(gen);

    CLI::App* cluster = app.add_subcommand("cluster", "Cut routes into battery-bounded clusters");
    add_instance(cluster);
    add_out_dir(cluster);

    CLI::App* evaluate =
        app.add_subcommand("evaluate", "Score a recharge plan against a charger deployment");
    add_instance(evaluate);
    add_out_dir(evaluate);
    evaluate->add_option("--plan", o.plan_path, "Recharge plan JSON")->required();
    evaluate->add_option("--deployment", o.deployment_path, "Charger deployment JSON")->required();
    evaluate->add_flag("--explain", o.explain, "Also dump the eligibility sets");

    CLI::App* solve = app.add_subcommand("solve", "Optimize facility opening and charger counts");
    add_instance(solve);
    add_out_dir(solve);
    solve->add_option("--method", o.method, "ga, exact, or hybrid")
        ->envname("EVSELCA_METHOD")
        ->check(CLI::IsMember({"ga", "exact", "hybrid"}));
    add_seed(solve);
    add_threads(solve);
    add_time_limit(solve);
    solve->add_option("--population", o.population, "GA population size")
        ->envname("EVSELCA_POPULATION");
    solve->add_option("--iterations", o.iterations, "GA generations")->envname("EVSELCA_ITERATIONS");
    solve->add_option("--parents", o.parents, "Parents kept per generation")
        ->envname("EVSELCA_PARENTS");
    solve->add_option("--mutate-fraction", o.mutate_fraction, "Mutated share of each generation")
        ->envname("EVSELCA_MUTATE_FRACTION");
    solve->add_option("--no-charge-prob", o.no_charge_prob,
                      "Chance a drawn stop is discarded during construction")
        ->envname("EVSELCA_NO_CHARGE_PROB");
    solve->add_option("--temperature", o.temperature, "Roulette sharpening exponent")
        ->envname("EVSELCA_TEMPERATURE");
    solve->add_option("--charger-weights", o.charger_weights,
                      "Relative draw weights per charger type")
        ->envname("EVSELCA_CHARGER_WEIGHTS");
    solve->add_option("--n-lower", o.n_lower, "Escalation batch lower bound")
        ->envname("EVSELCA_N_LOWER");
    solve->add_option("--n-upper", o.n_upper, "Escalation batch upper bound (0 = pool count)")
        ->envname("EVSELCA_N_UPPER");
    solve->add_flag("--legacy-rounding", o.legacy_rounding,
                    "Round route deficits up to whole minutes");
    solve->add_option("--max-space", o.max_space, "Exact enumeration cap")
        ->envname("EVSELCA_MAX_SPACE");
    solve->add_option("--tie-perm-cap", o.tie_perm_cap,
                      "Service orders tried per arrival tie group")
        ->envname("EVSELCA_TIE_PERM_CAP");

    CLI::App* milp =
        app.add_subcommand("export-milp", "Emit the cluster-level MILP in CPLEX LP format");
    add_instance(milp);
    add_out_dir(milp);
    milp->add_option("--out", o.out_file, "LP path (default model.lp)");

    CLI::App* replay =
        app.add_subcommand("replay", "Rebuild and check an externally solved MILP point");
    add_instance(replay);
    add_out_dir(replay);
    replay->add_option("--solution", o.solution_path, "Solver variable values JSON")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "Re-solve across one parameter axis");
    sweep->add_option("--spec", o.spec_path, "Sweep spec JSON")->required();
    sweep->add_option("--out", o.out_file, "Results CSV path (default results.csv)");
    add_out_dir(sweep);
    add_seed(sweep);
    add_threads(sweep);
    add_time_limit(sweep);
    sweep->add_flag("--full-scale", o.full_scale,
                    "Full-scale budgets: 20 replications, 600 s GA limit");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(gen)) return run_gen(o);
        if (app.got_subcommand(cluster)) return run_cluster(o);
        if (app.got_subcommand(evaluate)) return run_evaluate(o);
        if (app.got_subcommand(solve)) return run_solve(o);
        if (app.got_subcommand(milp)) return run_export_milp(o);
        if (app.got_subcommand(replay)) return run_replay(o);
        if (app.got_subcommand(sweep)) {
            return run_sweep(o, sweep->count("--seed") > 0, sweep->count("--threads") > 0,
                             sweep->count("--time-limit-s") > 0);
        }
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
