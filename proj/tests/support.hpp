#pragma once

// Independent reference computations used by the tests. Nothing here goes
// through the dense operator, linearity shortcuts or solver code paths.

#include "bikeflow/diffusion.hpp"
#include "bikeflow/instances.hpp"
#include "bikeflow/mobility_graph.hpp"
#include "bikeflow/seed_optimizer.hpp"
#include "bikeflow/spread.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace testing_support {

using namespace bikeflow;

using Matrix = std::vector<std::vector<double>>;

inline MobilityGraph graph_of(const std::vector<std::tuple<NodeId, NodeId, double>>& triples) {
    std::set<NodeId> ids;
    std::vector<Edge> edges;
    for (const auto& [s, d, p] : triples) {
        ids.insert(s);
        ids.insert(d);
        edges.push_back({s, d, p});
    }
    return MobilityGraph::from_edges({ids.begin(), ids.end()}, edges);
}

// P[v][u] = p(u, v), built straight from the edge list.
inline Matrix naive_matrix(const MobilityGraph& g) {
    const std::size_t n = g.node_count();
    Matrix m(n, std::vector<double>(n, 0.0));
    for (const Edge& e : g.edges()) m[g.index_of(e.dst)][g.index_of(e.src)] += e.probability;
    return m;
}

inline Matrix identity(std::size_t n) {
    Matrix m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
    return m;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
    const std::size_t n = a.size();
    Matrix c(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline std::vector<double> mat_vec(const Matrix& m, const std::vector<double>& x) {
    std::vector<double> y(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) y[i] += m[i][j] * x[j];
    return y;
}

// tau explicit multiplications, no squaring.
inline Matrix naive_power(const MobilityGraph& g, int tau) {
    const Matrix p = naive_matrix(g);
    Matrix r = identity(g.node_count());
    for (int t = 0; t < tau; ++t) r = multiply(p, r);
    return r;
}

inline std::vector<double> naive_loads(const MobilityGraph& g, const std::vector<NodeIndex>& seed,
                                       int L, int tau) {
    std::vector<double> x(g.node_count(), 0.0);
    for (NodeIndex u : seed) x[u] = L;
    const Matrix p = naive_matrix(g);
    for (int t = 0; t < tau; ++t) x = mat_vec(p, x);
    return x;
}

inline double naive_spread(const ProblemInstance& inst, const std::vector<NodeIndex>& seed) {
    const auto x = naive_loads(inst.graph, seed, inst.bikes_per_node, inst.tau);
    if (inst.objective.kind() == SpreadObjective::Kind::Threshold) {
        double c = 0;
        for (double v : x)
            if (v >= inst.objective.gamma() - 1e-9) c += 1;
        return c;
    }
    double s = 0;
    for (double v : x) s += std::sqrt(std::max(v, 0.0));
    return s;
}

// Best spread over all k-subsets, enumerated with a selection mask.
inline double naive_optimum(const ProblemInstance& inst) {
    const std::size_t n = inst.graph.node_count();
    std::vector<bool> mask(n, false);
    std::fill(mask.begin(), mask.begin() + inst.k, true);
    double best = -1;
    do {
        std::vector<NodeIndex> seed;
        for (std::size_t i = 0; i < n; ++i)
            if (mask[i]) seed.push_back(i);
        best = std::max(best, naive_spread(inst, seed));
    } while (std::prev_permutation(mask.begin(), mask.end()));
    return best;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

inline std::vector<NodeIndex> random_subset(std::size_t n, std::size_t k, std::mt19937_64& rng) {
    std::vector<NodeIndex> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
}

// Random stochastic graph whose edges include tiny probabilities, for pruning.
inline MobilityGraph random_pruneable(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> deg(1, std::max(1, std::min(n - 1, 4)));
    std::uniform_real_distribution<double> w(0.0, 1.0);
    std::vector<NodeId> ids;
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u) ids.push_back(u);
    for (int u = 0; u < n; ++u) {
        std::vector<int> others;
        for (int v = 0; v < n; ++v)
            if (v != u) others.push_back(v);
        std::shuffle(others.begin(), others.end(), rng);
        const int d = n > 1 ? deg(rng) : 0;
        std::vector<double> weights;
        double total = 0;
        for (int i = 0; i <= d; ++i) {
            double x = w(rng);
            x = x * x * x + 1e-3;
            weights.push_back(x);
            total += x;
        }
        edges.push_back({u, u, weights[0] / total});
        for (int i = 0; i < d; ++i) edges.push_back({u, others[i], weights[i + 1] / total});
    }
    return MobilityGraph::from_edges(ids, edges);
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("bikeflow_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace testing_support
