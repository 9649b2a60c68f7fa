#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "lp.hpp"
#include "transform.hpp"

using namespace evselca;
using fixtures::two_route_fixture;

namespace {

bool has_code(const std::vector<Violation>& v, const char* code) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.code == code; });
}

std::vector<std::string> strip_comments(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '\\') continue;
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> identifiers(const std::vector<std::string>& lines) {
    std::vector<std::string> out;
    for (const std::string& line : lines) {
        size_t i = 0;
        while (i < line.size()) {
            if (std::isalpha(static_cast<unsigned char>(line[i])) || line[i] == '_') {
                size_t j = i;
                while (j < line.size() &&
                       (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_')) {
                    ++j;
                }
                out.push_back(line.substr(i, j - i));
                i = j;
            } else {
                ++i;
            }
        }
    }
    return out;
}

bool is_variable(const std::string& tok) {
    static const std::vector<std::string> prefixes = {"bp_", "ts_", "te_", "xa_", "xb_", "y_",
                                                      "z_",  "b_",  "d_",  "q_",  "u_",  "w_",
                                                      "x_"};
    for (const std::string& p : prefixes) {
        if (tok.rfind(p, 0) == 0) return true;
    }
    return false;
}

// The hand-built optimum of the two-route fixture: both trucks recharge 20
// driving minutes at the shared site on two chargers, no waiting.
SolutionValues two_route_optimum() {
    SolutionValues sol;
    auto& v = sol.variables;
    v["y_f0"] = 1;
    v["z_f0k0"] = 2;
    for (int r = 0; r < 2; ++r) {
        const std::string rs = std::to_string(r);
        const double kappa = r == 0 ? 565 : 570;
        v["d_r" + rs + "n0"] = 0;
        v["d_r" + rs + "n1"] = 25 + kappa;
        v["d_r" + rs + "n2"] = 25 + kappa + 25 + 10 + 20;
        v["b_r" + rs + "n0"] = 200;
        v["b_r" + rs + "n1"] = 175;
        v["b_r" + rs + "n2"] = 160;
        v["bp_r" + rs + "c0f0"] = 165;
        v["q_r" + rs + "c0f0k0"] = 1;
        v["u_r" + rs + "c0f0k0"] = 20;
        v["w_r" + rs + "c0f0k0"] = 0;
        v["ts_r" + rs + "c0f0k0"] = 25 + kappa + 10;
        v["te_r" + rs + "c0f0k0"] = 25 + kappa + 10 + 20;
        v["x_r" + rs + "c0f0k0t40"] = 1;
        v["x_r" + rs + "c0f0k0t41"] = 1;
    }
    sol.has_objective = true;
    sol.objective = 0.6885 * 60 + 0.43 * 40 + 35 + 2;
    return sol;
}

}  // namespace

TEST_CASE("the emitted model is structurally complete") {
    const ClusterInstance ci = build_cluster_instance(two_route_fixture(), 0.5);
    const std::string text = emit_lp(ci);

    SUBCASE("sections appear in CPLEX order") {
        const size_t min_pos = text.find("Minimize");
        const size_t st_pos = text.find("Subject To");
        const size_t bounds_pos = text.find("Bounds");
        const size_t bin_pos = text.find("Binaries");
        const size_t gen_pos = text.find("Generals");
        const size_t end_pos = text.find("End");
        REQUIRE(min_pos != std::string::npos);
        REQUIRE(st_pos != std::string::npos);
        REQUIRE(bounds_pos != std::string::npos);
        REQUIRE(bin_pos != std::string::npos);
        REQUIRE(gen_pos != std::string::npos);
        REQUIRE(end_pos != std::string::npos);
        CHECK(min_pos < st_pos);
        CHECK(st_pos < bounds_pos);
        CHECK(bounds_pos < bin_pos);
        CHECK(bin_pos < gen_pos);
        CHECK(gen_pos < end_pos);
    }

    SUBCASE("the header records the grid and clustering") {
        CHECK(text.find("routes 2, clusters 2") != std::string::npos);
        CHECK(text.find("steps 57") != std::string::npos);
        CHECK(text.find("time_step_min 15") != std::string::npos);
        CHECK(text.find("epsilon_min 0.001") != std::string::npos);
        CHECK(text.find("big_m 1241") != std::string::npos);
    }

    SUBCASE("objective prices time, energy and hardware") {
        CHECK(text.find("6.885 q_r0c0f0k0") != std::string::npos);
        CHECK(text.find("0.6885 w_r0c0f0k0") != std::string::npos);
        CHECK(text.find("1.1185 u_r0c0f0k0") != std::string::npos);
        CHECK(text.find("35 y_f0") != std::string::npos);
        CHECK(text.find("1 z_f0k0") != std::string::npos);
    }

    SUBCASE("every constraint family is present for both routes") {
        for (const char* row : {"c32_r0n0:", "c32_r0n2:", "c16_r0:", "c17_r0:", "c25_r0:",
                                "c31_r0n0:", "c31_r0n1:", "c10_r0c0:", "c15_r0c0:", "c12_r0c0f0:",
                                "c13_r0c0f0:", "c30_r0c0f0:", "c3_r0c0f0k0:", "c5_r0c0f0k0:",
                                "c7_r0c0f0k0:", "c8_r0c0f0k0:", "c9a_r0c0f0k0:", "c19_r0c0f0k0:",
                                "c20_r0c0f0k0:", "c2_r0c0f0k0t40:", "c9b_r0c0f0k0t40:",
                                "c21_r0c0f0k0t40:", "c22_r0c0f0k0t40:", "c23_r0c0f0k0t40:",
                                "c24_r0c0f0k0t40:", "c6_f0k0:", "c4_f0k0t40:", "c32_r1n0:",
                                "c16_r1:", "c4_f0k0t56:"}) {
            CAPTURE(row);
            CHECK(text.find(row) != std::string::npos);
        }
    }

    SUBCASE("time-indexed variables start at the route window") {
        // head time 590 and 595 both land in grid step 39
        CHECK(text.find("x_r0c0f0k0t39") != std::string::npos);
        CHECK(text.find("x_r0c0f0k0t38") == std::string::npos);
        CHECK(text.find("x_r0c0f0k0t56") != std::string::npos);
        CHECK(text.find("x_r0c0f0k0t57") == std::string::npos);
        CHECK(text.find("x_r1c0f0k0t39") != std::string::npos);
        CHECK(text.find("c4_f0k0t38") == std::string::npos);
    }

    SUBCASE("row names are unique and the size pencils out") {
        const auto lines = strip_comments(text);
        std::set<std::string> rows;
        int row_lines = 0;
        for (const std::string& line : lines) {
            if (line.size() > 2 && line[0] == ' ' && line[1] == 'c' &&
                std::isdigit(static_cast<unsigned char>(line[2]))) {
                ++row_lines;
                rows.insert(line.substr(1, line.find(':') - 1));
            }
        }
        // 1 c6 row, 8 route rows per route, 120 per cluster, 18 capacity steps
        CHECK(row_lines == 275);
        CHECK(rows.size() == 275);

        std::set<std::string> vars;
        for (const std::string& tok : identifiers(lines)) {
            if (is_variable(tok)) vars.insert(tok);
        }
        // 2 facility vars, 12 node chains, 60 per cluster
        CHECK(vars.size() == 134);
    }

    SUBCASE("no identifier can be mistaken for an exponent") {
        const std::set<std::string> keywords = {"Minimize", "Subject", "To",       "Bounds",
                                                "Binaries", "Generals", "End",     "obj"};
        for (const std::string& tok : identifiers(strip_comments(text))) {
            if (keywords.count(tok)) continue;
            CAPTURE(tok);
            CHECK(tok[0] != 'e');
            CHECK(tok[0] != 'E');
        }
    }

    SUBCASE("battery bounds cover every node") {
        int bounds = 0;
        for (const std::string& line : strip_comments(text)) {
            if (line.rfind(" b_r", 0) == 0 && line.find("<= 200") != std::string::npos) ++bounds;
        }
        CHECK(bounds == 6);
    }

    SUBCASE("emission is deterministic") {
        CHECK(emit_lp(ci) == text);
    }
}

TEST_CASE("size limits trip before a huge model is written") {
    const ClusterInstance ci = build_cluster_instance(two_route_fixture(), 0.5);

    LpLimits tight_vars;
    tight_vars.max_vars = 10;
    CHECK_THROWS_WITH_AS(emit_lp(ci, tight_vars), doctest::Contains("variables, over the cap"),
                         LimitError);

    LpLimits tight_rows;
    tight_rows.max_rows = 10;
    CHECK_THROWS_WITH_AS(emit_lp(ci, tight_rows), doctest::Contains("rows, over the cap"),
                         LimitError);

    LpLimits enough;
    enough.max_vars = 134;
    enough.max_rows = 275;
    CHECK_NOTHROW(emit_lp(ci, enough));
}

TEST_CASE("a hand-built optimum replays cleanly") {
    const ClusterInstance ci = build_cluster_instance(two_route_fixture(), 0.5);
    const ReplayResult rep = replay_solution(ci, two_route_optimum());

    CHECK(rep.violations.empty());
    CHECK(rep.audit.empty());
    REQUIRE(rep.plan.genes.size() == 2);
    CHECK(rep.plan.genes[0] == PlanGene{0, 0});
    CHECK(rep.plan.genes[1] == PlanGene{0, 0});
    CHECK(rep.deployment.open == std::vector<int>{1});
    CHECK(rep.deployment.chargers == std::vector<std::vector<int>>{{2}});

    REQUIRE(rep.schedule.events.size() == 2);
    CHECK(rep.schedule.events[0].start == doctest::Approx(600.0));
    CHECK(rep.schedule.events[0].end == doctest::Approx(620.0));
    CHECK(rep.schedule.events[1].start == doctest::Approx(605.0));
    CHECK(rep.schedule.events[1].wait == doctest::Approx(0.0));

    CHECK(rep.cost.total == doctest::Approx(0.6885 * 60 + 0.43 * 40 + 37).epsilon(1e-9));
    CHECK(rep.has_file_objective);
    CHECK(rep.file_objective == doctest::Approx(rep.cost.total).epsilon(1e-9));
    CHECK(rep.objective_matches);
}

TEST_CASE("replay flags tampered solutions with the right constraint") {
    const ClusterInstance ci = build_cluster_instance(two_route_fixture(), 0.5);

    SUBCASE("an understated objective fails the cross-check") {
        SolutionValues sol = two_route_optimum();
        sol.objective = 90.0;
        const ReplayResult rep = replay_solution(ci, sol);
        CHECK(rep.violations.empty());
        CHECK_FALSE(rep.objective_matches);
        CHECK(rep.file_objective == doctest::Approx(90.0));
    }

    SUBCASE("no stated objective skips the cross-check") {
        SolutionValues sol = two_route_optimum();
        sol.has_objective = false;
        const ReplayResult rep = replay_solution(ci, sol);
        CHECK_FALSE(rep.has_file_objective);
        CHECK(rep.objective_matches);
    }

    SUBCASE("one charger cannot host the overlap") {
        SolutionValues sol = two_route_optimum();
        sol.variables["z_f0k0"] = 1;
        sol.has_objective = false;
        const ReplayResult rep = replay_solution(ci, sol);
        CHECK(has_code(rep.violations, "c4"));
    }

    SUBCASE("a shifted start breaks the timing chain") {
        SolutionValues sol = two_route_optimum();
        sol.variables["ts_r0c0f0k0"] = 601;
        sol.has_objective = false;
        const ReplayResult rep = replay_solution(ci, sol);
        CHECK(has_code(rep.violations, "c19"));
        CHECK(has_code(rep.violations, "c20"));
    }

    SUBCASE("a stray occupancy step disagrees with the interval") {
        SolutionValues sol = two_route_optimum();
        sol.variables["x_r0c0f0k0t43"] = 1;
        sol.has_objective = false;
        const ReplayResult rep = replay_solution(ci, sol);
        CHECK(has_code(rep.violations, "c2"));
    }

    SUBCASE("occupancy without the recharge indicator") {
        SolutionValues sol = two_route_optimum();
        sol.variables.erase("q_r1c0f0k0");
        sol.has_objective = false;
        const ReplayResult rep = replay_solution(ci, sol);
        CHECK(has_code(rep.violations, "c9"));
        CHECK(has_code(rep.violations, "c31"));
    }

    SUBCASE("an oversized session overfills the battery") {
        SolutionValues sol = two_route_optimum();
        sol.variables["u_r0c0f0k0"] = 60;
        sol.has_objective = false;
        const ReplayResult rep = replay_solution(ci, sol);
        CHECK(has_code(rep.violations, "c13"));
    }
}
