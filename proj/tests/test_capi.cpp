#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include <evselca/evselca.h>

namespace {

// Owns one string out-parameter so failed CHECKs cannot leak.
struct Text {
    char* p = nullptr;
    ~Text() { evselca_string_free(p); }
    char** slot() { return &p; }
    std::string str() const { return p != nullptr ? std::string(p) : std::string(); }
    bool has(const std::string& needle) const { return str().find(needle) != std::string::npos; }
};

struct Handle {
    evselca_instance* p = nullptr;
    ~Handle() { evselca_instance_free(p); }
    evselca_instance** slot() { return &p; }
};

// Two single-stop routes sharing one facility, geometry pinned by a travel
// matrix (facility, depot 0, stop 0, depot 1, stop 1). Staggered services
// put the facility arrivals at 600 and 605, each needing 20 minutes back.
constexpr const char* kTwoRouteJson = R"({
  "name": "two-route",
  "chargers": [
    {"name": "unit", "power_kw": 60, "added_range_miles": 30,
     "added_charge_minutes": 60, "purchase_cost_usd": 3650}
  ],
  "facilities": [{"x": 0, "y": 0}],
  "routes": [
    {"depot": {"x": 0, "y": 0},
     "stops": [{"x": 0, "y": 0, "service_min": 565}]},
    {"depot": {"x": 0, "y": 0},
     "stops": [{"x": 0, "y": 0, "service_min": 570}]}
  ],
  "travel_override": {"minutes": [
    [0, 25, 10, 25, 10],
    [25, 0, 25, 5000, 5000],
    [10, 25, 0, 5000, 5000],
    [25, 5000, 5000, 0, 25],
    [10, 5000, 5000, 25, 0]
  ]}
})";

Handle parse_two_route() {
    Handle h;
    Text err;
    REQUIRE(evselca_instance_parse(kTwoRouteJson, h.slot(), err.slot()) == EVSELCA_OK);
    REQUIRE(h.p != nullptr);
    return h;
}

}  // namespace

TEST_CASE("version and status names are stable") {
    CHECK(std::string(evselca_version()) == "1.0.0");
    CHECK(std::string(evselca_status_name(EVSELCA_OK)) == "ok");
    CHECK(std::string(evselca_status_name(EVSELCA_INFEASIBLE)) == "infeasible");
    CHECK(std::string(evselca_status_name(EVSELCA_INVALID_INPUT)) == "invalid_input");
    CHECK(std::string(evselca_status_name(EVSELCA_LIMIT_EXCEEDED)) == "limit_exceeded");
    CHECK(std::string(evselca_status_name(EVSELCA_INTERNAL_ERROR)) == "internal_error");
    CHECK(std::string(evselca_status_name(99)) == "unknown");
}

TEST_CASE("null frees are safe") {
    evselca_string_free(nullptr);
    evselca_instance_free(nullptr);
}

TEST_CASE("instances parse, serialize, hash and validate through the boundary") {
    Handle h = parse_two_route();

    Text json_out, err;
    REQUIRE(evselca_instance_to_json(h.p, json_out.slot(), err.slot()) == EVSELCA_OK);
    CHECK(json_out.has("\"routes\""));
    CHECK(json_out.has("\"travel_override\""));

    Text hash_a;
    REQUIRE(evselca_instance_hash(h.p, hash_a.slot(), nullptr) == EVSELCA_OK);
    CHECK(hash_a.str().size() == 16);

    SUBCASE("the hash survives a serialization cycle") {
        Handle again;
        REQUIRE(evselca_instance_parse(json_out.p, again.slot(), nullptr) == EVSELCA_OK);
        Text hash_b;
        REQUIRE(evselca_instance_hash(again.p, hash_b.slot(), nullptr) == EVSELCA_OK);
        CHECK(hash_b.str() == hash_a.str());
    }

    SUBCASE("a clean instance validates silently") {
        Text violations;
        CHECK(evselca_instance_validate(h.p, violations.slot(), err.slot()) == EVSELCA_OK);
        CHECK(violations.has("[]"));
        CHECK(err.p == nullptr);
    }

    SUBCASE("semantic violations are reported as data and status") {
        Handle bad;
        const std::string text = std::string("{\"battery_cap_min\": -5,") + (kTwoRouteJson + 1);
        REQUIRE(evselca_instance_parse(text.c_str(), bad.slot(), nullptr) == EVSELCA_OK);
        Text violations, verr;
        CHECK(evselca_instance_validate(bad.p, violations.slot(), verr.slot()) ==
              EVSELCA_INVALID_INPUT);
        CHECK(violations.has("\"code\""));
        CHECK(verr.has("invariant"));
    }
}

TEST_CASE("parse failures set INVALID_INPUT and a message") {
    Handle h;
    Text err;
    CHECK(evselca_instance_parse("{\"name\":", h.slot(), err.slot()) == EVSELCA_INVALID_INPUT);
    CHECK(h.p == nullptr);
    CHECK(err.has("instance"));

    Text err2;
    CHECK(evselca_instance_parse(nullptr, h.slot(), err2.slot()) == EVSELCA_INVALID_INPUT);
    CHECK(err2.has("must not be null"));

    Text err3;
    CHECK(evselca_instance_parse("{}", h.slot(), err3.slot()) == EVSELCA_INVALID_INPUT);
    CHECK(err3.has("facilities and routes"));

    CHECK(evselca_instance_parse(kTwoRouteJson, nullptr, nullptr) == EVSELCA_INVALID_INPUT);
}

TEST_CASE("the generator accepts a spec or falls back to defaults") {
    Handle h;
    Text err;
    REQUIRE(evselca_instance_generate(
                "{\"routes\": 2, \"stops_per_route\": 4, \"facilities\": 2,"
                " \"extent_miles\": 18, \"seed\": 11}",
                h.slot(), err.slot()) == EVSELCA_OK);
    Text violations;
    CHECK(evselca_instance_validate(h.p, violations.slot(), nullptr) == EVSELCA_OK);

    Handle dflt;
    CHECK(evselca_instance_generate(nullptr, dflt.slot(), nullptr) == EVSELCA_OK);
    CHECK(dflt.p != nullptr);

    Handle bad;
    Text gerr;
    CHECK(evselca_instance_generate("{\"routes\": 0}", bad.slot(), gerr.slot()) ==
          EVSELCA_INVALID_INPUT);
    CHECK(gerr.has("positive dimensions"));
}

TEST_CASE("clustering returns the cluster document") {
    Handle h = parse_two_route();
    Text out, err;
    REQUIRE(evselca_cluster(h.p, 0.5, out.slot(), err.slot()) == EVSELCA_OK);
    CHECK(out.has("\"total_clusters\": 2"));
    CHECK(out.has("\"feasible_facilities\""));

    Text err2;
    CHECK(evselca_cluster(nullptr, 0.5, out.slot(), err2.slot()) == EVSELCA_INVALID_INPUT);
    CHECK(err2.has("instance handle"));
}

TEST_CASE("evaluate reports schedule, cost and defects as data") {
    Handle h = parse_two_route();

    SUBCASE("a sufficient deployment is feasible at the known cost") {
        Text out, err;
        REQUIRE(evselca_evaluate(h.p, 0.5, "[[0,0],[0,0]]",
                                 "{\"open\":[1],\"chargers\":[[2]]}", 0, out.slot(),
                                 err.slot()) == EVSELCA_OK);
        CHECK(out.has("\"feasible\": true"));
        CHECK(out.has("95.51"));
        CHECK(out.has("\"occupancy\""));
        CHECK(!out.has("\"explain\""));
    }

    SUBCASE("a starved deployment stays OK but infeasible") {
        Text out;
        REQUIRE(evselca_evaluate(h.p, 0.5, "[[0,0],[0,0]]",
                                 "{\"open\":[1],\"chargers\":[[1]]}", 0, out.slot(),
                                 nullptr) == EVSELCA_OK);
        CHECK(out.has("\"feasible\": false"));
        CHECK(out.has("\"defects\""));
    }

    SUBCASE("the explain flag adds the eligibility sets") {
        Text out;
        REQUIRE(evselca_evaluate(h.p, 0.5, "[[0,0],[0,0]]",
                                 "{\"open\":[1],\"chargers\":[[2]]}", 1, out.slot(),
                                 nullptr) == EVSELCA_OK);
        CHECK(out.has("\"explain\""));
        CHECK(out.has("\"step_windows\""));
    }

    SUBCASE("plans and deployments are checked against the instance") {
        Text out, err;
        CHECK(evselca_evaluate(h.p, 0.5, "[[7,0],[0,0]]", "{\"chargers\":[[2]]}", 0,
                               out.slot(), err.slot()) == EVSELCA_INVALID_INPUT);
        CHECK(err.has("unknown facility or charger type"));

        Text err2;
        CHECK(evselca_evaluate(h.p, 0.5, "[[0,0],[0,0]]", "{\"chargers\":[[1],[1]]}", 0,
                               out.slot(), err2.slot()) == EVSELCA_INVALID_INPUT);
        CHECK(err2.has("instance has 1"));

        Text err3;
        CHECK(evselca_evaluate(h.p, 0.5, "[[0,0],[0,0]]", "{\"chargers\":[[1,1]]}", 0,
                               out.slot(), err3.slot()) == EVSELCA_INVALID_INPUT);
        CHECK(err3.has("needs 1 entries"));

        Text err4;
        CHECK(evselca_evaluate(h.p, 0.5, "[[0,0],[0,0]]", "{\"chargers\":[[-1]]}", 0,
                               out.slot(), err4.slot()) == EVSELCA_INVALID_INPUT);
        CHECK(err4.has("non-negative"));

        Text err5;
        CHECK(evselca_evaluate(h.p, 0.5, "[[0,0],[0,0]]",
                               "{\"open\":[0],\"chargers\":[[2]]}", 0, out.slot(),
                               err5.slot()) == EVSELCA_INVALID_INPUT);
        CHECK(err5.has("not open"));

        Text err6;
        CHECK(evselca_evaluate(h.p, 0.5, "[[0,0]]", "{\"chargers\":[[2]]}", 0, out.slot(),
                               err6.slot()) == EVSELCA_INVALID_INPUT);
        CHECK(err6.has("expected 2"));
    }
}

TEST_CASE("solve drives every method through one entry point") {
    Handle h = parse_two_route();

    SUBCASE("exact finds the optimum") {
        Text out, err;
        REQUIRE(evselca_solve(h.p, 0.5, "exact", nullptr, out.slot(), err.slot()) ==
                EVSELCA_OK);
        CHECK(out.has("\"optimal\": true"));
        CHECK(out.has("95.51"));
        CHECK(out.has("\"method\": \"exact\""));
    }

    SUBCASE("ga and hybrid agree on this instance") {
        const char* cfg = "{\"ga\": {\"population\": 8, \"iterations\": 4,"
                          " \"parents\": 3, \"seed\": 3}}";
        Text ga_out;
        REQUIRE(evselca_solve(h.p, 0.5, "ga", cfg, ga_out.slot(), nullptr) == EVSELCA_OK);
        CHECK(ga_out.has("\"feasible\": true"));
        CHECK(ga_out.has("95.51"));
        CHECK(ga_out.has("\"trace\""));

        Text hy_out;
        REQUIRE(evselca_solve(h.p, 0.5, "hybrid", cfg, hy_out.slot(), nullptr) == EVSELCA_OK);
        CHECK(hy_out.has("\"feasible\": true"));
        CHECK(hy_out.has("95.51"));
    }

    SUBCASE("an unknown method is rejected") {
        Text out, err;
        CHECK(evselca_solve(h.p, 0.5, "magic", nullptr, out.slot(), err.slot()) ==
              EVSELCA_INVALID_INPUT);
        CHECK(err.has("unknown solve method"));
    }

    SUBCASE("a malformed config is rejected") {
        Text out, err;
        CHECK(evselca_solve(h.p, 0.5, "exact", "[]", out.slot(), err.slot()) ==
              EVSELCA_INVALID_INPUT);
        CHECK(err.has("must be an object"));
    }

    SUBCASE("infeasible instances still return a payload") {
        // Cut the facility off: every travel time to node 0 goes dead.
        std::string text = kTwoRouteJson;
        text.replace(text.find("[0, 25, 10, 25, 10]"), 19, "[0, 5000, 5000, 5000, 5000]");
        text.replace(text.find("[25, 0, 25, 5000, 5000]"), 23, "[5000, 0, 25, 5000, 5000]");
        text.replace(text.find("[10, 25, 0, 5000, 5000]"), 23, "[5000, 25, 0, 5000, 5000]");
        text.replace(text.find("[25, 5000, 5000, 0, 25]"), 23, "[5000, 5000, 5000, 0, 25]");
        text.replace(text.find("[10, 5000, 5000, 25, 0]"), 23, "[5000, 5000, 5000, 25, 0]");
        Handle cut;
        REQUIRE(evselca_instance_parse(text.c_str(), cut.slot(), nullptr) == EVSELCA_OK);
        Text out, err;
        CHECK(evselca_solve(cut.p, 0.5, "exact", nullptr, out.slot(), err.slot()) ==
              EVSELCA_INFEASIBLE);
        CHECK(out.has("\"feasible\": false"));
    }

    SUBCASE("the enumeration cap maps to LIMIT_EXCEEDED") {
        Text out, err;
        CHECK(evselca_solve(h.p, 0.5, "exact", "{\"exact\": {\"max_space\": 1}}", out.slot(),
                            err.slot()) == EVSELCA_LIMIT_EXCEEDED);
        CHECK(err.has("above the cap"));
    }
}

TEST_CASE("export and replay close the MILP loop") {
    Handle h = parse_two_route();

    Text lp, err;
    REQUIRE(evselca_export_milp(h.p, 0.5, lp.slot(), err.slot()) == EVSELCA_OK);
    CHECK(lp.has("Minimize"));
    CHECK(lp.has("Subject To"));
    CHECK(lp.has("End"));

    // The hand-checked optimum of the two-route instance, named as emitted.
    const char* solution = R"({
      "objective": 95.51,
      "variables": {
        "y_f0": 1, "z_f0k0": 2,
        "d_r0n0": 0, "d_r0n1": 590, "d_r0n2": 645,
        "b_r0n0": 200, "b_r0n1": 175, "b_r0n2": 160,
        "bp_r0c0f0": 165,
        "q_r0c0f0k0": 1, "u_r0c0f0k0": 20, "w_r0c0f0k0": 0,
        "ts_r0c0f0k0": 600, "te_r0c0f0k0": 620,
        "x_r0c0f0k0t40": 1, "x_r0c0f0k0t41": 1,
        "d_r1n0": 0, "d_r1n1": 595, "d_r1n2": 650,
        "b_r1n0": 200, "b_r1n1": 175, "b_r1n2": 160,
        "bp_r1c0f0": 165,
        "q_r1c0f0k0": 1, "u_r1c0f0k0": 20, "w_r1c0f0k0": 0,
        "ts_r1c0f0k0": 605, "te_r1c0f0k0": 625,
        "x_r1c0f0k0t40": 1, "x_r1c0f0k0t41": 1
      }
    })";

    SUBCASE("a consistent solution replays clean") {
        Text out, rerr;
        REQUIRE(evselca_replay(h.p, 0.5, solution, out.slot(), rerr.slot()) == EVSELCA_OK);
        CHECK(out.has("\"objective_matches\": true"));
        CHECK(out.has("\"violations\": []"));
        CHECK(rerr.p == nullptr);
    }

    SUBCASE("an undersized deployment is caught on replay") {
        std::string tampered = solution;
        tampered.replace(tampered.find("\"z_f0k0\": 2"), 11, "\"z_f0k0\": 1");
        Text out, rerr;
        CHECK(evselca_replay(h.p, 0.5, tampered.c_str(), out.slot(), rerr.slot()) ==
              EVSELCA_INFEASIBLE);
        CHECK(rerr.has("violates"));
    }

    SUBCASE("a lying objective is caught on replay") {
        std::string tampered = solution;
        tampered.replace(tampered.find("\"objective\": 95.51"), 18, "\"objective\": 90.00");
        Text out, rerr;
        CHECK(evselca_replay(h.p, 0.5, tampered.c_str(), out.slot(), rerr.slot()) ==
              EVSELCA_INFEASIBLE);
        CHECK(rerr.has("objective disagrees"));
        CHECK(out.has("\"objective_matches\": false"));
    }
}

TEST_CASE("sweeps run end to end from a spec document") {
    const char* spec = R"({
      "axis": "charger_cost_pct",
      "levels": [0, -50],
      "method": "ga",
      "replications": 1,
      "base": {"routes": 2, "stops_per_route": 4, "facilities": 2,
               "extent_miles": 18, "seed": 11},
      "ga": {"population": 10, "iterations": 3, "parents": 4, "seed": 7}
    })";
    Text out_json, out_csv, err;
    REQUIRE(evselca_sweep(spec, out_json.slot(), out_csv.slot(), err.slot()) == EVSELCA_OK);
    CHECK(out_json.has("\"levels\""));
    CHECK(out_csv.has("kind,axis,level"));

    Text err2;
    CHECK(evselca_sweep("{\"levels\": [0]}", out_json.slot(), out_csv.slot(), err2.slot()) ==
          EVSELCA_INVALID_INPUT);
    CHECK(err2.has("axis and levels"));

    Text err3;
    CHECK(evselca_sweep(nullptr, out_json.slot(), out_csv.slot(), err3.slot()) ==
          EVSELCA_INVALID_INPUT);
}
