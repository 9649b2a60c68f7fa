#include "clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace evselca {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

std::vector<double> internal_leg_minutes(const Instance& inst, int route_idx) {
    const Route& route = inst.routes.at(static_cast<size_t>(route_idx));
    std::vector<double> legs;
    if (route.stops.size() < 2) return legs;
    legs.reserve(route.stops.size() - 1);
    for (size_t i = 0; i + 1 < route.stops.size(); ++i) {
        legs.push_back(inst.travel_minutes_between(inst.stop_node(route_idx, static_cast<int>(i)),
                                                   inst.stop_node(route_idx, static_cast<int>(i + 1))));
    }
    return legs;
}

CutOutcome solve_cuts_legs(const std::vector<double>& legs, int n_cuts, double intra_cap) {
    CutOutcome out;
    const int M = static_cast<int>(legs.size()) + 1; // stop count
    if (n_cuts < 1 || n_cuts > M - 2) {
        out.reason = "cut count must lie in [1, " + std::to_string(std::max(0, M - 2)) +
                     "] for " + std::to_string(M) + " stops";
        return out;
    }
    std::vector<double> prefix(static_cast<size_t>(M), 0);
    for (int j = 1; j < M; ++j) {
        prefix[static_cast<size_t>(j)] = prefix[static_cast<size_t>(j - 1)] + legs[static_cast<size_t>(j - 1)];
    }
    const double total = prefix[static_cast<size_t>(M - 1)];

    // g[j][k]: best cut-leg total using k more cuts after a boundary at stop
    // position j (j=0 is the route start), all later segments within cap.
    // The segment between boundaries j and j' carries legs [j, j') and ends
    // with cut leg j'-1, so its load is prefix[j'] - prefix[j].
    std::vector<std::vector<double>> g(static_cast<size_t>(M),
                                       std::vector<double>(static_cast<size_t>(n_cuts + 1), kNegInf));
    for (int j = 0; j < M; ++j) {
        if (total - prefix[static_cast<size_t>(j)] <= intra_cap + kFeasTol) {
            g[static_cast<size_t>(j)][0] = 0;
        }
    }
    for (int k = 1; k <= n_cuts; ++k) {
        for (int j = M - 2; j >= 0; --j) {
            double best = kNegInf;
            for (int nj = j + 1; nj <= M - 1; ++nj) {
                if (prefix[static_cast<size_t>(nj)] - prefix[static_cast<size_t>(j)] > intra_cap + kFeasTol) break;
                const double tail = g[static_cast<size_t>(nj)][static_cast<size_t>(k - 1)];
                if (tail == kNegInf) continue;
                best = std::max(best, legs[static_cast<size_t>(nj - 1)] + tail);
            }
            g[static_cast<size_t>(j)][static_cast<size_t>(k)] = best;
        }
    }

    if (g[0][static_cast<size_t>(n_cuts)] == kNegInf) {
        out.reason = "no placement of " + std::to_string(n_cuts) +
                     " cuts keeps every segment within the cap";
        return out;
    }

    out.feasible = true;
    out.solution.objective = g[0][static_cast<size_t>(n_cuts)];
    // Greedy forward reconstruction picks the smallest next cut achieving the
    // stored optimum, which yields the lexicographically smallest cut vector.
    int j = 0;
    for (int k = n_cuts; k >= 1; --k) {
        for (int nj = j + 1; nj <= M - 1; ++nj) {
            if (prefix[static_cast<size_t>(nj)] - prefix[static_cast<size_t>(j)] > intra_cap + kFeasTol) break;
            const double tail = g[static_cast<size_t>(nj)][static_cast<size_t>(k - 1)];
            if (tail == kNegInf) continue;
            if (legs[static_cast<size_t>(nj - 1)] + tail == g[static_cast<size_t>(j)][static_cast<size_t>(k)]) {
                out.solution.cut_positions.push_back(nj);
                j = nj;
                break;
            }
        }
    }
    return out;
}

CutOutcome solve_cuts(const Instance& inst, int route_idx, int n_cuts, double intra_cap) {
    return solve_cuts_legs(internal_leg_minutes(inst, route_idx), n_cuts, intra_cap);
}

MinClustersOutcome min_clusters_legs(const std::vector<double>& legs, double intra_cap) {
    MinClustersOutcome out;
    double total = 0;
    for (size_t j = 0; j < legs.size(); ++j) {
        total += legs[j];
        if (legs[j] > intra_cap + kFeasTol) {
            if (out.offending_leg < 0 || legs[j] > legs[static_cast<size_t>(out.offending_leg)]) {
                out.offending_leg = static_cast<int>(j);
            }
        }
    }
    if (out.offending_leg >= 0) {
        std::ostringstream s;
        s << "leg " << out.offending_leg << " takes " << legs[static_cast<size_t>(out.offending_leg)]
          << " min, above the cap " << intra_cap << "; no cut placement can help";
        out.reason = s.str();
        return out;
    }
    if (total <= intra_cap + kFeasTol) {
        out.feasible = true;
        out.n_cuts = 0;
        return out;
    }
    const int M = static_cast<int>(legs.size()) + 1;
    for (int n = 1; n <= M - 2; ++n) {
        CutOutcome attempt = solve_cuts_legs(legs, n, intra_cap);
        if (attempt.feasible) {
            out.feasible = true;
            out.n_cuts = n;
            out.solution = attempt.solution;
            return out;
        }
    }
    out.reason = "no cut count fits the cap"; // unreachable once every leg fits
    return out;
}

MinClustersOutcome min_clusters(const Instance& inst, int route_idx, double intra_cap) {
    return min_clusters_legs(internal_leg_minutes(inst, route_idx), intra_cap);
}

std::vector<Cluster> build_clusters(const Instance& inst, int route_idx, const CutSolution& cuts) {
    const Route& route = inst.routes.at(static_cast<size_t>(route_idx));
    const auto violations = validate_cut_solution(route.stops.size(), cuts);
    if (!violations.empty()) throw InputError("invalid cut solution: " + violations.front().detail);

    const std::vector<double> legs = internal_leg_minutes(inst, route_idx);
    std::vector<int> bounds;
    bounds.push_back(0);
    for (int p : cuts.cut_positions) bounds.push_back(p);
    bounds.push_back(static_cast<int>(route.stops.size()));

    std::vector<Cluster> clusters;
    clusters.reserve(bounds.size() - 1);
    for (size_t b = 0; b + 1 < bounds.size(); ++b) {
        Cluster c;
        for (int i = bounds[b]; i < bounds[b + 1]; ++i) {
            c.members.push_back(i);
            c.internal_service_min += route.stops[static_cast<size_t>(i)].service_min;
            if (i > bounds[b]) c.internal_travel_min += legs[static_cast<size_t>(i - 1)];
        }
        c.entry_stop = c.members.front();
        c.exit_stop = c.members.back();
        clusters.push_back(std::move(c));
    }
    return clusters;
}

std::vector<Violation> validate_cut_solution(size_t num_stops, const CutSolution& cuts) {
    std::vector<Violation> v;
    int prev = 0;
    for (int p : cuts.cut_positions) {
        if (p < 1 || p > static_cast<int>(num_stops) - 1) {
            v.push_back({"cut_range", "cut position " + std::to_string(p) + " outside [1, " +
                                          std::to_string(num_stops ? num_stops - 1 : 0) + "]"});
        }
        if (p <= prev) {
            v.push_back({"cut_order", "cut positions must be strictly increasing"});
        }
        prev = p;
    }
    return v;
}

}  // namespace evselca
