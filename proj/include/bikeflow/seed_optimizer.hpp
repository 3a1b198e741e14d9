#pragma once

#include "bikeflow/config.hpp"
#include "bikeflow/diffusion.hpp"
#include "bikeflow/mobility_graph.hpp"
#include "bikeflow/spread.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bikeflow {

/// Graph plus the (k, L, tau, objective) parameters every solver consumes.
struct ProblemInstance {
    MobilityGraph graph;
    int k = 1;
    int bikes_per_node = 1;
    int tau = 2;
    SpreadObjective objective = SpreadObjective::square_root();
    // Initial loads on non-seed nodes. Reserved: solvers reject it for now.
    std::optional<std::vector<double>> base_loads;

    // Throws ValidationError naming the violated constraint.
    void validate() const;
};

enum class Algorithm { Greedy, Lazy, BruteForce, Random, TopOutDegree };

std::string to_string(Algorithm a);
// "greedy", "lazy", "brute", "random", "degree".
Algorithm parse_algorithm(const std::string& name);

struct Solution {
    SeedSet seed;
    double spread = 0.0;
    LoadVector loads;  // tau-step loads of `seed`
    Algorithm algorithm = Algorithm::Greedy;
    double wall_time_s = 0.0;
    // Spread evaluations of candidate seed sets.
    std::uint64_t evaluations = 0;
    // Greedy variants: marginal gain and running spread per added node.
    std::vector<double> gains;
    std::vector<double> trajectory;
};

/// Adds, k times, the node with the largest marginal gain; ties go to the
/// smallest node index. Gains are evaluated from scratch as
/// spread(loads_S + L * column_u).
Solution greedy_select(const ProblemInstance& inst, const SolverLimits& limits = {});

/// Greedy with stale upper bounds on marginal gains kept in a max-heap; only
/// the top entry is refreshed until it is current. Same spread as
/// greedy_select; the seed may differ among ties.
Solution lazy_greedy_select(const ProblemInstance& inst, const SolverLimits& limits = {});

/// Exhaustive search over all k-subsets in lexicographic order; returns the
/// lexicographically smallest spread-maximal seed. Throws InfeasibleError
/// when C(n, k) exceeds limits.brute_force_cap.
Solution brute_force_select(const ProblemInstance& inst, const SolverLimits& limits = {});

enum class Baseline { Random, TopOutDegree };

// Random: k nodes without replacement from an mt19937_64 seeded with
// rng_seed. TopOutDegree: most outgoing edges, ties by index.
Solution baseline_select(const ProblemInstance& inst, Baseline strategy, std::uint64_t rng_seed = 0,
                         const SolverLimits& limits = {});

Solution solve(const ProblemInstance& inst, Algorithm algorithm, const SolverLimits& limits = {},
               std::uint64_t rng_seed = 0);

// C(n, k) as a double (inf on overflow).
double subset_count(std::size_t n, std::size_t k);

}  // namespace bikeflow
