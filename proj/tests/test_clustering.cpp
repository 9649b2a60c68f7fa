#include <doctest.h>

#include <numeric>
#include <random>
#include <vector>

#include "clustering.hpp"

using namespace evselca;

namespace {

struct OracleResult {
    bool feasible = false;
    std::vector<int> cuts;
    double objective = 0;
};

// Exhaustive reference: every strictly increasing cut vector in [1, M-1],
// loads checked per segment, keeping the largest cut-leg total and breaking
// ties toward the lexicographically smallest vector.
OracleResult oracle_cuts(const std::vector<double>& legs, int n_cuts, double cap) {
    OracleResult best;
    const int M = static_cast<int>(legs.size()) + 1;
    if (n_cuts < 1 || n_cuts > M - 2) return best;
    std::vector<double> prefix(static_cast<size_t>(M), 0);
    for (int j = 1; j < M; ++j) prefix[static_cast<size_t>(j)] = prefix[static_cast<size_t>(j - 1)] + legs[static_cast<size_t>(j - 1)];
    const double total = prefix[static_cast<size_t>(M - 1)];

    std::vector<int> cuts(static_cast<size_t>(n_cuts));
    std::iota(cuts.begin(), cuts.end(), 1);
    while (true) {
        bool ok = true;
        double obj = 0;
        int prev = 0;
        for (int p : cuts) {
            if (prefix[static_cast<size_t>(p)] - prefix[static_cast<size_t>(prev)] > cap + kFeasTol) ok = false;
            obj += legs[static_cast<size_t>(p - 1)];
            prev = p;
        }
        if (total - prefix[static_cast<size_t>(prev)] > cap + kFeasTol) ok = false;
        if (ok && (!best.feasible || obj > best.objective)) {
            best.feasible = true;
            best.cuts = cuts;
            best.objective = obj;
        }
        int i = n_cuts - 1;
        while (i >= 0 && cuts[static_cast<size_t>(i)] == M - 1 - (n_cuts - 1 - i)) --i;
        if (i < 0) break;
        ++cuts[static_cast<size_t>(i)];
        for (int j = i + 1; j < n_cuts; ++j) cuts[static_cast<size_t>(j)] = cuts[static_cast<size_t>(j - 1)] + 1;
    }
    return best;
}

int oracle_min_cuts(const std::vector<double>& legs, double cap) {
    const double total = std::accumulate(legs.begin(), legs.end(), 0.0);
    if (total <= cap + kFeasTol) return 0;
    const int M = static_cast<int>(legs.size()) + 1;
    for (int n = 1; n <= M - 2; ++n) {
        if (oracle_cuts(legs, n, cap).feasible) return n;
    }
    return -1;
}

} // namespace

TEST_CASE("solve_cuts_legs removes the longest removable leg") {
    const std::vector<double> legs{10, 50, 10};
    const CutOutcome out = solve_cuts_legs(legs, 1, 60);
    REQUIRE(out.feasible);
    CHECK(out.solution.cut_positions == std::vector<int>{2});
    CHECK(out.solution.objective == doctest::Approx(50.0));
}

TEST_CASE("solve_cuts_legs frozen three-way split") {
    const std::vector<double> legs{30, 30, 30};
    CHECK_FALSE(solve_cuts_legs(legs, 1, 45).feasible);
    const CutOutcome out = solve_cuts_legs(legs, 2, 45);
    REQUIRE(out.feasible);
    CHECK(out.solution.cut_positions == std::vector<int>{1, 2});
    CHECK(out.solution.objective == doctest::Approx(60.0));
}

TEST_CASE("objective ties resolve to the lexicographically smallest cuts") {
    const std::vector<double> legs{20, 20, 20};
    const CutOutcome out = solve_cuts_legs(legs, 1, 40);
    REQUIRE(out.feasible);
    CHECK(out.solution.cut_positions == std::vector<int>{1});
    CHECK(out.solution.objective == doctest::Approx(20.0));
}

TEST_CASE("cut count range is [1, M-2]") {
    CHECK_FALSE(solve_cuts_legs({}, 1, 100).feasible);
    CHECK_FALSE(solve_cuts_legs({10}, 1, 100).feasible);
    CHECK_FALSE(solve_cuts_legs({10, 10, 10}, 3, 100).feasible);
    CHECK_FALSE(solve_cuts_legs({10, 10, 10}, 0, 100).feasible);
    CHECK_FALSE(solve_cuts_legs({10, 50, 10}, 1, 5).feasible);
    CHECK_FALSE(solve_cuts_legs({10, 50, 10}, 1, 5).reason.empty());
}

TEST_CASE("min_clusters_legs basics") {
    SUBCASE("whole route fits") {
        const MinClustersOutcome out = min_clusters_legs({10, 20, 10}, 40);
        REQUIRE(out.feasible);
        CHECK(out.n_cuts == 0);
        CHECK(out.solution.cut_positions.empty());
    }
    SUBCASE("no legs at all") {
        CHECK(min_clusters_legs({}, 1).feasible);
    }
    SUBCASE("one cut suffices") {
        const MinClustersOutcome out = min_clusters_legs({10, 50, 10}, 60);
        REQUIRE(out.feasible);
        CHECK(out.n_cuts == 1);
        CHECK(out.solution.cut_positions == std::vector<int>{2});
    }
    SUBCASE("hard infeasible names the largest oversized leg") {
        const MinClustersOutcome out = min_clusters_legs({60, 100, 70}, 50);
        CHECK_FALSE(out.feasible);
        CHECK(out.offending_leg == 1);
        CHECK_FALSE(out.reason.empty());
    }
    SUBCASE("two stops never split") {
        const MinClustersOutcome out = min_clusters_legs({80}, 50);
        CHECK_FALSE(out.feasible);
        CHECK(out.offending_leg == 0);
    }
}

TEST_CASE("DP matches the exhaustive oracle on random quarter-integer legs") {
    std::mt19937 rng(20240814);
    std::uniform_int_distribution<int> stop_count(2, 11);
    std::uniform_int_distribution<int> quarter(1, 160);

    for (int trial = 0; trial < 200; ++trial) {
        const int M = stop_count(rng);
        std::vector<double> legs(static_cast<size_t>(M - 1));
        double longest = 0;
        double total = 0;
        for (double& leg : legs) {
            leg = quarter(rng) * 0.25;
            longest = std::max(longest, leg);
            total += leg;
        }
        std::uniform_real_distribution<double> cap_draw(longest, total + 1);
        const double cap = std::floor(cap_draw(rng) * 4) * 0.25;

        const int oracle_n = oracle_min_cuts(legs, cap);
        const MinClustersOutcome mc = min_clusters_legs(legs, cap);
        if (oracle_n < 0) {
            CHECK_FALSE(mc.feasible);
            continue;
        }
        REQUIRE(mc.feasible);
        CHECK(mc.n_cuts == oracle_n);

        for (int n = 1; n <= M - 2; ++n) {
            const OracleResult want = oracle_cuts(legs, n, cap);
            const CutOutcome got = solve_cuts_legs(legs, n, cap);
            REQUIRE(got.feasible == want.feasible);
            if (want.feasible) {
                CHECK(got.solution.objective == doctest::Approx(want.objective).epsilon(1e-12));
                CHECK(got.solution.cut_positions == want.cuts);
            }
        }
    }
}

TEST_CASE("min cut count is monotone in the cap") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> quarter(1, 120);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> legs(9);
        double longest = 0;
        double total = 0;
        for (double& leg : legs) {
            leg = quarter(rng) * 0.25;
            longest = std::max(longest, leg);
            total += leg;
        }
        bool seen_feasible = false;
        int prev = -1;
        for (int step = 0; step <= 10; ++step) {
            const double cap = longest + (total - longest) * step / 10.0;
            const MinClustersOutcome out = min_clusters_legs(legs, cap);
            if (seen_feasible) REQUIRE(out.feasible);
            if (!out.feasible) continue;
            if (seen_feasible) CHECK(out.n_cuts <= prev);
            seen_feasible = true;
            prev = out.n_cuts;
        }
        CHECK(seen_feasible);
    }
}

TEST_CASE("build_clusters splits members and sums interior quantities") {
    Instance inst;
    inst.facilities.push_back({{0, 0}, 35.0});
    inst.chargers = default_charger_catalog();
    Route r;
    r.depot = {0, 0};
    const double xs[] = {0, 1, 3, 6, 10};
    for (int i = 0; i < 5; ++i) {
        r.stops.push_back({{xs[i], 0}, static_cast<double>(i + 1)});
    }
    inst.routes.push_back(r);

    const std::vector<double> legs = internal_leg_minutes(inst, 0);
    REQUIRE(legs.size() == 4);
    CHECK(legs[0] == doctest::Approx(2.0));
    CHECK(legs[3] == doctest::Approx(8.0));

    CutSolution cuts;
    cuts.cut_positions = {2, 3};
    const auto clusters = build_clusters(inst, 0, cuts);
    REQUIRE(clusters.size() == 3);
    CHECK(clusters[0].members == std::vector<int>{0, 1});
    CHECK(clusters[1].members == std::vector<int>{2});
    CHECK(clusters[2].members == std::vector<int>{3, 4});
    CHECK(clusters[0].internal_travel_min == doctest::Approx(2.0));
    CHECK(clusters[0].internal_service_min == doctest::Approx(3.0));
    CHECK(clusters[1].internal_travel_min == doctest::Approx(0.0));
    CHECK(clusters[2].internal_travel_min == doctest::Approx(8.0));
    CHECK(clusters[2].internal_service_min == doctest::Approx(9.0));
    CHECK(clusters[2].entry_stop == 3);
    CHECK(clusters[2].exit_stop == 4);

    SUBCASE("solve_cuts goes through the instance geometry") {
        const CutOutcome via_inst = solve_cuts(inst, 0, 1, 12);
        const CutOutcome via_legs = solve_cuts_legs(legs, 1, 12);
        REQUIRE(via_inst.feasible == via_legs.feasible);
        CHECK(via_inst.solution.cut_positions == via_legs.solution.cut_positions);
    }
}

TEST_CASE("validate_cut_solution flags range and order") {
    CutSolution cuts;
    cuts.cut_positions = {0, 5, 5};
    const auto v = validate_cut_solution(5, cuts);
    bool range = false;
    bool order = false;
    for (const auto& x : v) {
        if (x.code == "cut_range") range = true;
        if (x.code == "cut_order") order = true;
    }
    CHECK(range);
    CHECK(order);
    CHECK(validate_cut_solution(5, CutSolution{{2, 4}, 0}).empty());
}
