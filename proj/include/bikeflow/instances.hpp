#pragma once

#include "bikeflow/mobility_graph.hpp"
#include "bikeflow/seed_optimizer.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bikeflow {

// Simple undirected graph on vertices 0..n-1.
struct UndirectedGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;

    std::vector<std::vector<int>> adjacency() const;
    // Degree if every vertex has the same degree.
    std::optional<int> regular_degree() const;
    bool simple() const;
    bool connected() const;

    static UndirectedGraph complete(int n);
    static UndirectedGraph prism();     // triangular prism, 6 vertices
    static UndirectedGraph petersen();  // 10 vertices
    static UndirectedGraph cube();      // 3-cube, 8 vertices
    // Uniform-ish simple connected d-regular graph via the configuration
    // model with rejection. Throws ValidationError if n*d is odd or d >= n.
    static UndirectedGraph random_regular(int n, int d, std::uint64_t rng_seed);
};

struct MdsInstance {
    UndirectedGraph graph;
    int k = 1;

    // Throws ValidationError unless the graph is simple, connected and
    // d-regular with d >= 3, and k > 0.
    int validate() const;
};

// Exact cover by 3-sets over X = {1, ..., 3q}.
struct X3cInstance {
    int q = 1;
    std::vector<std::array<int, 3>> sets;

    void validate() const;
    // Random collection of r sets; when `plant_cover` is set, the first q
    // sets (before shuffling) partition X.
    static X3cInstance random(int q, int r, bool plant_cover, std::uint64_t rng_seed);
};

// A reduced instance with its known answer.
struct ReducedInstance {
    ProblemInstance instance;
    double target = 0.0;        // spread reachable iff the source answer is yes
    bool has_solution = false;  // answer of the source problem
    std::vector<NodeId> witness;  // seed reaching `target` when has_solution
    std::vector<std::string> warnings;
};

// Exhaustive search for a dominating set with at most k vertices; returns
// the lexicographically first one of size min(k, n). Intended for n <= 24.
std::optional<std::vector<int>> find_dominating_set(const UndirectedGraph& g, int k);

// Exhaustive search for an exact cover; returns indices into inst.sets.
std::optional<std::vector<int>> find_exact_cover(const X3cInstance& inst);

/// Directs every edge both ways, adds self-loops, sets p = 1/(d+1) and
/// asks for threshold spread n with L = d+1, gamma = 1, tau = 1.
ReducedInstance mds_to_tbs(const MdsInstance& inst);

/// Element nodes 0..3q-1 (element e is node e-1) with probability-1
/// self-loops; set node 3q+j sends 1/3 to each of its members. Square-root
/// spread 3q with k = q, L = 3, tau = 1 is reachable iff an exact cover exists.
ReducedInstance x3c_to_sbs(const X3cInstance& inst);

/// Node ids 0..n-1. Each node keeps a self-loop of at least self_loop_min
/// and about avg_out_degree other out-neighbours with random weights.
/// Deterministic per rng_seed.
MobilityGraph random_instance(int n, double avg_out_degree, double self_loop_min,
                              std::uint64_t rng_seed);

}  // namespace bikeflow
