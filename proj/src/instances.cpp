#include "bikeflow/instances.hpp"

#include "bikeflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace bikeflow {

// ---------------------------------------------------------------------------
// Undirected graphs

std::vector<std::vector<int>> UndirectedGraph::adjacency() const {
    std::vector<std::vector<int>> adj(std::size_t(std::max(n, 0)));
    for (auto [a, b] : edges) {
        adj.at(std::size_t(a)).push_back(b);
        if (a != b) adj.at(std::size_t(b)).push_back(a);
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());
    return adj;
}

std::optional<int> UndirectedGraph::regular_degree() const {
    if (n <= 0) return std::nullopt;
    const auto adj = adjacency();
    const std::size_t d = adj[0].size();
    for (const auto& list : adj)
        if (list.size() != d) return std::nullopt;
    return int(d);
}

bool UndirectedGraph::simple() const {
    std::set<std::pair<int, int>> seen;
    for (auto [a, b] : edges) {
        if (a == b || a < 0 || b < 0 || a >= n || b >= n) return false;
        if (!seen.insert({std::min(a, b), std::max(a, b)}).second) return false;
    }
    return true;
}

bool UndirectedGraph::connected() const {
    if (n <= 0) return false;
    const auto adj = adjacency();
    std::vector<bool> seen(std::size_t(n), false);
    std::vector<int> stack{0};
    seen[0] = true;
    int count = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : adj[std::size_t(v)])
            if (!seen[std::size_t(w)]) {
                seen[std::size_t(w)] = true;
                ++count;
                stack.push_back(w);
            }
    }
    return count == n;
}

UndirectedGraph UndirectedGraph::complete(int n) {
    UndirectedGraph g{n, {}};
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) g.edges.emplace_back(a, b);
    return g;
}

UndirectedGraph UndirectedGraph::prism() {
    return {6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}, {0, 3}, {1, 4}, {2, 5}}};
}

UndirectedGraph UndirectedGraph::petersen() {
    UndirectedGraph g{10, {}};
    for (int i = 0; i < 5; ++i) {
        g.edges.emplace_back(i, (i + 1) % 5);          // outer cycle
        g.edges.emplace_back(i, i + 5);                // spokes
        g.edges.emplace_back(5 + i, 5 + (i + 2) % 5);  // inner pentagram
    }
    return g;
}

UndirectedGraph UndirectedGraph::cube() {
    UndirectedGraph g{8, {}};
    for (int v = 0; v < 8; ++v)
        for (int bit = 1; bit < 8; bit <<= 1)
            if (!(v & bit)) g.edges.emplace_back(v, v | bit);
    return g;
}

UndirectedGraph UndirectedGraph::random_regular(int n, int d, std::uint64_t rng_seed) {
    if (n < 1 || d < 0 || d >= n || (n * d) % 2)
        throw ValidationError("no simple " + std::to_string(d) + "-regular graph on " +
                              std::to_string(n) + " vertices");
    std::mt19937_64 rng(rng_seed);
    std::vector<int> points;
    for (int v = 0; v < n; ++v)
        for (int i = 0; i < d; ++i) points.push_back(v);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::shuffle(points.begin(), points.end(), rng);
        UndirectedGraph g{n, {}};
        for (std::size_t i = 0; i + 1 < points.size(); i += 2)
            g.edges.emplace_back(std::min(points[i], points[i + 1]),
                                 std::max(points[i], points[i + 1]));
        if (g.simple() && g.connected()) {
            std::sort(g.edges.begin(), g.edges.end());
            return g;
        }
    }
    throw ValidationError("failed to sample a simple connected regular graph");
}

// ---------------------------------------------------------------------------
// Source problems

int MdsInstance::validate() const {
    if (!graph.simple()) throw ValidationError("MDS graph must be simple");
    const auto d = graph.regular_degree();
    if (!d) throw ValidationError("MDS graph must be regular");
    if (*d < 3) throw ValidationError("MDS graph degree must be at least 3");
    if (!graph.connected()) throw ValidationError("MDS graph must be connected");
    if (k < 1 || k > graph.n) throw ValidationError("MDS bound k must lie in [1, n]");
    return *d;
}

void X3cInstance::validate() const {
    if (q < 1) throw ValidationError("X3C needs q >= 1");
    for (const auto& s : sets) {
        for (int e : s)
            if (e < 1 || e > 3 * q)
                throw ValidationError("X3C set member " + std::to_string(e) + " outside X");
        if (s[0] == s[1] || s[1] == s[2] || s[0] == s[2])
            throw ValidationError("X3C sets need three distinct members");
    }
}

X3cInstance X3cInstance::random(int q, int r, bool plant_cover, std::uint64_t rng_seed) {
    if (q < 1 || r < 0 || (plant_cover && r < q))
        throw ValidationError("invalid random X3C parameters");
    std::mt19937_64 rng(rng_seed);
    std::vector<int> elems(std::size_t(3 * q));
    std::iota(elems.begin(), elems.end(), 1);
    X3cInstance inst{q, {}};
    auto sorted_triple = [](int a, int b, int c) {
        std::array<int, 3> t{a, b, c};
        std::sort(t.begin(), t.end());
        return t;
    };
    if (plant_cover) {
        std::shuffle(elems.begin(), elems.end(), rng);
        for (int i = 0; i < q; ++i)
            inst.sets.push_back(sorted_triple(elems[3 * i], elems[3 * i + 1], elems[3 * i + 2]));
    }
    while (int(inst.sets.size()) < r) {
        std::shuffle(elems.begin(), elems.end(), rng);
        inst.sets.push_back(sorted_triple(elems[0], elems[1], elems[2]));
    }
    std::shuffle(inst.sets.begin(), inst.sets.end(), rng);
    return inst;
}

std::optional<std::vector<int>> find_dominating_set(const UndirectedGraph& g, int k) {
    if (g.n > 24) throw ValidationError("dominating-set search is limited to 24 vertices");
    if (g.n == 0) return std::vector<int>{};
    const auto adj = g.adjacency();
    std::vector<std::uint32_t> closed(std::size_t(g.n));
    for (int v = 0; v < g.n; ++v) {
        closed[std::size_t(v)] = 1u << v;
        for (int w : adj[std::size_t(v)]) closed[std::size_t(v)] |= 1u << w;
    }
    const std::uint32_t full = (g.n == 32) ? ~0u : ((1u << g.n) - 1);
    const int size = std::min(k, g.n);
    if (size <= 0) return std::nullopt;

    std::vector<int> pick(static_cast<std::size_t>(size));
    std::iota(pick.begin(), pick.end(), 0);
    for (;;) {
        std::uint32_t covered = 0;
        for (int v : pick) covered |= closed[std::size_t(v)];
        if (covered == full) return pick;
        int i = size - 1;
        while (i >= 0 && pick[std::size_t(i)] == g.n - size + i) --i;
        if (i < 0) return std::nullopt;
        ++pick[std::size_t(i)];
        for (int j = i + 1; j < size; ++j) pick[std::size_t(j)] = pick[std::size_t(j - 1)] + 1;
    }
}

std::optional<std::vector<int>> find_exact_cover(const X3cInstance& inst) {
    const int universe = 3 * inst.q;
    std::vector<bool> covered(std::size_t(universe) + 1, false);
    std::vector<int> chosen;

    auto search = [&](auto&& self) -> bool {
        int first = 1;
        while (first <= universe && covered[std::size_t(first)]) ++first;
        if (first > universe) return true;
        for (int j = 0; j < int(inst.sets.size()); ++j) {
            const auto& s = inst.sets[std::size_t(j)];
            if (std::find(s.begin(), s.end(), first) == s.end()) continue;
            if (std::any_of(s.begin(), s.end(), [&](int e) { return covered[std::size_t(e)]; }))
                continue;
            for (int e : s) covered[std::size_t(e)] = true;
            chosen.push_back(j);
            if (self(self)) return true;
            chosen.pop_back();
            for (int e : s) covered[std::size_t(e)] = false;
        }
        return false;
    };
    if (!search(search)) return std::nullopt;
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

// ---------------------------------------------------------------------------
// Reductions

ReducedInstance mds_to_tbs(const MdsInstance& inst) {
    const int d = inst.validate();
    const int n = inst.graph.n;
    const int out_degree = d + 1;
    const double p = 1.0 / out_degree;

    std::vector<NodeId> nodes(static_cast<std::size_t>(n));
    std::iota(nodes.begin(), nodes.end(), NodeId{0});
    std::vector<Edge> edges;
    for (int v = 0; v < n; ++v) edges.push_back({v, v, p});
    for (auto [a, b] : inst.graph.edges) {
        edges.push_back({a, b, p});
        edges.push_back({b, a, p});
    }

    ReducedInstance out;
    out.instance.graph = MobilityGraph::from_edges(nodes, edges);
    out.instance.k = inst.k;
    out.instance.bikes_per_node = out_degree;
    out.instance.tau = 1;
    out.instance.objective = SpreadObjective::threshold(1.0);
    out.target = n;
    if (!(inst.k < n - d + 1))
        out.warnings.push_back("k=" + std::to_string(inst.k) + " lies outside 0 < k < n - d + 1 = " +
                               std::to_string(n - d + 1));
    if (auto ds = find_dominating_set(inst.graph, inst.k)) {
        out.has_solution = true;
        out.witness.assign(ds->begin(), ds->end());
    }
    return out;
}

ReducedInstance x3c_to_sbs(const X3cInstance& inst) {
    inst.validate();
    const int elems = 3 * inst.q;
    const int r = int(inst.sets.size());

    std::vector<NodeId> nodes(static_cast<std::size_t>(elems + r));
    std::iota(nodes.begin(), nodes.end(), NodeId{0});
    std::vector<Edge> edges;
    for (int e = 0; e < elems; ++e) edges.push_back({e, e, 1.0});
    for (int j = 0; j < r; ++j)
        for (int e : inst.sets[std::size_t(j)]) edges.push_back({elems + j, e - 1, 1.0 / 3.0});

    ReducedInstance out;
    out.instance.graph = MobilityGraph::from_edges(nodes, edges);
    out.instance.k = inst.q;
    out.instance.bikes_per_node = 3;
    out.instance.tau = 1;
    out.instance.objective = SpreadObjective::square_root();
    out.target = elems;
    if (auto cover = find_exact_cover(inst)) {
        out.has_solution = true;
        for (int j : *cover) out.witness.push_back(elems + j);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Random stochastic graphs

MobilityGraph random_instance(int n, double avg_out_degree, double self_loop_min,
                              std::uint64_t rng_seed) {
    if (n < 1) throw ValidationError("random instance needs n >= 1");
    if (!(avg_out_degree >= 0.0) || avg_out_degree > n - 1)
        throw ValidationError("average out-degree must lie in [0, n - 1]");
    if (!(self_loop_min >= 0.0 && self_loop_min <= 1.0))
        throw ValidationError("self-loop floor must lie in [0, 1]");
    if (self_loop_min == 1.0 && avg_out_degree > 0.0)
        throw ValidationError("a self-loop floor of 1 leaves no mass for other edges");

    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> weight(0.1, 1.0);
    const int base_degree = int(std::floor(avg_out_degree));
    const double extra = avg_out_degree - base_degree;

    std::vector<NodeId> nodes(static_cast<std::size_t>(n));
    std::iota(nodes.begin(), nodes.end(), NodeId{0});
    std::vector<NodeId> others;
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u) {
        int degree = std::min(base_degree + (unit(rng) < extra ? 1 : 0), n - 1);
        others.clear();
        for (int v = 0; v < n; ++v)
            if (v != u) others.push_back(v);
        for (int i = 0; i < degree; ++i) {
            std::uniform_int_distribution<std::size_t> pick(std::size_t(i), others.size() - 1);
            std::swap(others[std::size_t(i)], others[pick(rng)]);
        }
        if (degree == 0) {
            edges.push_back({u, u, 1.0});
            continue;
        }
        std::vector<double> w(std::size_t(degree) + 1);
        for (double& x : w) x = weight(rng);
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        const double free_mass = 1.0 - self_loop_min;
        edges.push_back({u, u, self_loop_min + free_mass * w[0] / total});
        for (int i = 0; i < degree; ++i)
            edges.push_back({u, others[std::size_t(i)], free_mass * w[std::size_t(i) + 1] / total});
    }
    return MobilityGraph::from_edges(nodes, edges);
}

}  // namespace bikeflow
