#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "evaluator.hpp"
#include "helpers.hpp"

using namespace evselca;
using namespace fixtures;

namespace {

struct Scenario {
    ClusterInstance ci;
    RechargePlan plan;
    Deployment dep;
    Schedule schedule;
};

Scenario feasible_scenario(int chargers = 2) {
    Scenario sc{build_cluster_instance(two_route_fixture(), 0.5), {}, {}, {}};
    sc.plan.genes = {{0, 0}, {0, 0}};
    const EvalOutcome out = evaluate_plan(sc.ci, sc.plan, {{chargers}});
    sc.dep = out.deployment;
    sc.schedule = out.schedule;
    return sc;
}

bool has_code(const std::vector<Violation>& v, const char* code) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.code == code; });
}

} // namespace

TEST_CASE("a defect-free evaluation passes the checker") {
    Scenario sc = feasible_scenario();
    std::vector<std::string> audit;
    const auto v = check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule, &audit);
    CHECK(v.empty());
    CHECK(audit.empty());
}

TEST_CASE("grid-step sharing is an audit note, not a violation") {
    // One charger serializes the two sessions; they still touch a common
    // grid step, which the strict evaluator counts as a defect.
    Scenario sc{build_cluster_instance(two_route_fixture(), 0.5), {}, {}, {}};
    sc.plan.genes = {{0, 0}, {0, 0}};
    const EvalOutcome out = evaluate_plan(sc.ci, sc.plan, {{1}});
    CHECK_FALSE(out.feasible);

    std::vector<std::string> audit;
    const auto v = check_feasibility(sc.ci, sc.plan, out.deployment, out.schedule, &audit);
    CHECK(v.empty());
    REQUIRE(audit.size() == 1);
    CHECK(audit[0].find("c4 grid sharing") == 0);
}

TEST_CASE("chargers at a closed facility violate the coupling") {
    Scenario sc = feasible_scenario();
    sc.dep.open = {0};
    CHECK(has_code(check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule), "c6"));
}

TEST_CASE("negative charger counts are a domain error") {
    Scenario sc = feasible_scenario();
    sc.dep.chargers = {{-1}};
    CHECK(has_code(check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule), "domain"));
}

TEST_CASE("double visits to one cluster are rejected") {
    Scenario sc = feasible_scenario();
    sc.schedule.events.push_back(sc.schedule.events[0]);
    CHECK(has_code(check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule), "c10"));
}

TEST_CASE("events need a matching planned visit") {
    Scenario sc = feasible_scenario();
    sc.plan.genes[0] = {-1, -1};
    const auto v = check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule);
    CHECK(has_code(v, "c7"));
    CHECK_FALSE(has_code(v, "c8")); // no wait under two chargers

    Scenario queued{build_cluster_instance(two_route_fixture(), 0.5), {}, {}, {}};
    queued.plan.genes = {{0, 0}, {0, 0}};
    const EvalOutcome out = evaluate_plan(queued.ci, queued.plan, {{1}});
    queued.plan.genes[1] = {-1, -1};
    const auto v2 = check_feasibility(queued.ci, queued.plan, out.deployment, out.schedule);
    CHECK(has_code(v2, "c7"));
    CHECK(has_code(v2, "c8")); // the orphaned visit also waited
}

TEST_CASE("events outside the reachable set are rejected") {
    Instance inst = two_route_fixture();
    inst.facilities.push_back({{0, 0}, 35.0});
    const int n0 = inst.node_count();
    // rebuild the override with the extra facility node, keeping it far away
    TravelOverride ov;
    ov.minutes.assign(static_cast<size_t>(n0), std::vector<double>(static_cast<size_t>(n0), 5000));
    inst.travel_override = ov;
    for (int i = 0; i < n0; ++i) inst.travel_override->minutes[static_cast<size_t>(i)][static_cast<size_t>(i)] = 0;
    set_time(inst, 2, 3, 25);
    set_time(inst, 4, 5, 25);
    set_time(inst, 0, 3, 10);
    set_time(inst, 0, 5, 10);
    set_time(inst, 0, 2, 25);
    set_time(inst, 0, 4, 25);

    const ClusterInstance ci = build_cluster_instance(inst, 0.5);
    RechargePlan plan;
    plan.genes = {{0, 0}, {0, 0}};
    const EvalOutcome out = evaluate_plan(ci, plan, {{2}, {0}});
    REQUIRE(out.feasible);

    Schedule tampered = out.schedule;
    tampered.events[0].facility = 1;
    const auto v = check_feasibility(ci, plan, out.deployment, tampered);
    CHECK(has_code(v, "q_domain"));
    CHECK(has_code(v, "c7"));
}

TEST_CASE("session timing must match the stored departures") {
    SUBCASE("shifted start") {
        Scenario sc = feasible_scenario();
        sc.schedule.events[0].start += 1;
        const auto v = check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule);
        CHECK(has_code(v, "c19"));
        CHECK(has_code(v, "c20")); // end no longer matches start + duration
    }
    SUBCASE("shifted arrival") {
        Scenario sc = feasible_scenario();
        sc.schedule.events[1].arrival -= 2;
        CHECK(has_code(check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule), "c19"));
    }
    SUBCASE("inconsistent end") {
        Scenario sc = feasible_scenario();
        sc.schedule.events[0].end += 3;
        CHECK(has_code(check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule), "c20"));
    }
    SUBCASE("degenerate session occupies nothing") {
        Scenario sc = feasible_scenario();
        sc.schedule.events[0].end = sc.schedule.events[0].start - 5;
        const auto v = check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule);
        CHECK(has_code(v, "c9"));
    }
    SUBCASE("span far beyond the duration") {
        Scenario sc = feasible_scenario();
        sc.schedule.events[0].end = sc.schedule.events[0].start + 60;
        const auto v = check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule);
        CHECK(has_code(v, "c20"));
        CHECK(has_code(v, "c5"));
    }
}

TEST_CASE("battery endpoints and chain") {
    SUBCASE("initial battery pinned") {
        Scenario sc = feasible_scenario();
        sc.schedule.battery[0][0] = 180;
        CHECK(has_code(check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule), "c16"));
    }
    SUBCASE("return floor") {
        Scenario sc = feasible_scenario();
        sc.schedule.battery[1][2] = 150;
        CHECK(has_code(check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule), "c17"));
    }
    SUBCASE("battery above capacity") {
        Scenario sc = feasible_scenario();
        sc.schedule.battery[0][1] = 250;
        CHECK(has_code(check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule), "domain"));
    }
    SUBCASE("post-recharge linkage") {
        Scenario sc = feasible_scenario();
        sc.schedule.battery[0][2] = 170; // implied bound is exactly 160
        CHECK(has_code(check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule), "c15"));
    }
    SUBCASE("drive-only bound without a visit") {
        Instance inst = two_route_fixture();
        inst.routes[0].final_battery_min = 100;
        inst.routes[1].final_battery_min = 100;
        const ClusterInstance ci = build_cluster_instance(inst, 0.5);
        RechargePlan plan;
        plan.genes = {{-1, -1}, {-1, -1}};
        const EvalOutcome out = evaluate_plan(ci, plan, {{0}});
        REQUIRE(out.feasible);
        Schedule tampered = out.schedule;
        tampered.battery[0][1] = 190; // drive-only bound is 175
        const auto v = check_feasibility(ci, plan, out.deployment, tampered);
        CHECK(has_code(v, "c31"));
    }
    SUBCASE("facility-arrival battery bounds") {
        Scenario sc = feasible_scenario();
        sc.schedule.events[0].battery_at_facility = 180; // detour bound is 165
        const auto v = check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule);
        CHECK(has_code(v, "c30"));

        Scenario big = feasible_scenario();
        big.schedule.events[0].battery_at_facility = 1300; // above big M
        CHECK(has_code(check_feasibility(big.ci, big.plan, big.dep, big.schedule), "c12"));
    }
    SUBCASE("overfilled session") {
        Scenario sc = feasible_scenario();
        sc.schedule.events[0].duration = 60; // would land at 225 driving minutes
        sc.schedule.events[0].end = sc.schedule.events[0].start + 60;
        const auto v = check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule);
        CHECK(has_code(v, "c13"));
    }
}

TEST_CASE("departure clock and shift limit") {
    SUBCASE("clock starts at zero") {
        Scenario sc = feasible_scenario();
        sc.schedule.departure[0][0] = 4;
        CHECK(has_code(check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule), "c32"));
    }
    SUBCASE("recursion holds at every node") {
        Scenario sc = feasible_scenario();
        sc.schedule.departure[1][1] += 7;
        CHECK(has_code(check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule), "c32"));
    }
    SUBCASE("return before the shift limit") {
        Scenario sc = feasible_scenario();
        sc.schedule.departure[0][2] = 900;
        const auto v = check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule);
        CHECK(has_code(v, "c25"));
    }
}

TEST_CASE("concurrent sessions cannot exceed the deployed chargers") {
    Scenario sc = feasible_scenario(2); // sessions overlap 605 to 620
    sc.dep.chargers = {{1}};
    const auto v = check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule);
    CHECK(has_code(v, "c4"));
}

TEST_CASE("shape mismatches stop the checker early") {
    Scenario sc = feasible_scenario();
    SUBCASE("plan size") {
        sc.plan.genes.resize(1);
        CHECK(has_code(check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule), "shape"));
    }
    SUBCASE("deployment size") {
        sc.dep.chargers = {{2, 2}};
        CHECK(has_code(check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule), "shape"));
    }
    SUBCASE("schedule arrays") {
        sc.schedule.battery[0].resize(2);
        CHECK(has_code(check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule), "shape"));
    }
    SUBCASE("event indices") {
        sc.schedule.events[0].charger = 7;
        CHECK(has_code(check_feasibility(sc.ci, sc.plan, sc.dep, sc.schedule), "shape"));
    }
}
