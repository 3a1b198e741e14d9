#include "bikeflow/diffusion.hpp"

#include "bikeflow/error.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace bikeflow {

SeedSet SeedSet::make(std::vector<NodeIndex> nodes, int bikes_per_node) {
    if (bikes_per_node < 1) throw ValidationError("bikes per seed node must be at least 1");
    std::sort(nodes.begin(), nodes.end());
    if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end())
        throw ValidationError("seed nodes must be distinct");
    return {std::move(nodes), bikes_per_node};
}

bool SeedSet::contains(NodeIndex u) const {
    return std::binary_search(nodes.begin(), nodes.end(), u);
}

SeedSet SeedSet::with(NodeIndex u) const {
    if (contains(u)) throw ValidationError("node already in seed set");
    SeedSet out = *this;
    out.nodes.insert(std::upper_bound(out.nodes.begin(), out.nodes.end(), u), u);
    return out;
}

double LoadVector::total() const { return std::accumulate(loads.begin(), loads.end(), 0.0); }

LoadVector init_loads(const SeedSet& seed, const MobilityGraph& g) {
    LoadVector out{std::vector<double>(g.node_count(), 0.0), 0};
    for (NodeIndex u : seed.nodes) {
        if (u >= g.node_count())
            throw ValidationError("seed node index " + std::to_string(u) + " outside the graph");
        out.loads[u] = seed.bikes_per_node;
    }
    return out;
}

LoadVector step(const LoadVector& loads, const MobilityGraph& g) {
    const std::size_t n = g.node_count();
    if (loads.size() != n)
        throw ValidationError("load vector has " + std::to_string(loads.size()) +
                              " entries for a graph with " + std::to_string(n) + " nodes");
    LoadVector out{std::vector<double>(n, 0.0), loads.step + 1};
    for (NodeIndex v = 0; v < n; ++v) {
        double acc = 0.0;
        for (const Arc& a : g.in_arcs(v)) acc += a.probability * loads.loads[a.node];
        out.loads[v] = acc;
    }
    return out;
}

LoadVector propagate(const SeedSet& seed, const MobilityGraph& g, int tau) {
    if (tau < 0) throw ValidationError("number of steps must be non-negative");
    LoadVector loads = init_loads(seed, g);
    for (int t = 0; t < tau; ++t) loads = step(loads, g);
    return loads;
}

LoadVector propagate(const SeedSet& seed, const TransitionOperator& op) {
    const std::size_t n = op.node_count();
    LoadVector out{std::vector<double>(n, 0.0), op.tau};
    for (NodeIndex u : seed.nodes) {
        if (u >= n) throw ValidationError("seed node index outside the operator");
        const auto col = op.column(u);
        for (std::size_t v = 0; v < n; ++v) out.loads[v] += seed.bikes_per_node * col[v];
    }
    return out;
}

Eigen::MatrixXd one_step_matrix(const MobilityGraph& g) {
    const auto n = Eigen::Index(g.node_count());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (NodeIndex u = 0; u < g.node_count(); ++u)
        for (const Arc& arc : g.out_arcs(u)) a(Eigen::Index(arc.node), Eigen::Index(u)) = arc.probability;
    return a;
}

TransitionOperator build_operator(const MobilityGraph& g, int tau) {
    if (tau < 0) throw ValidationError("number of steps must be non-negative");
    const auto n = Eigen::Index(g.node_count());
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
    if (tau == 0) return {0, std::move(result)};

    Eigen::MatrixXd base = one_step_matrix(g);
    bool first = true;
    for (int e = tau; e > 0; e >>= 1) {
        if (e & 1) {
            if (first) {
                result = base;
                first = false;
            } else {
                result = (result * base).eval();
            }
        }
        if (e > 1) base = (base * base).eval();
    }
    return {tau, std::move(result)};
}

LoadVector linearity_decompose(const LoadVector& loads_S, const SeedSet& seed, NodeIndex u,
                               std::span<const double> column_u) {
    if (seed.contains(u)) throw ValidationError("node already in seed set");
    if (column_u.size() != loads_S.size())
        throw ValidationError("column and load vector sizes differ");
    LoadVector out{std::vector<double>(loads_S.size()), loads_S.step};
    const double bikes = seed.bikes_per_node;
    for (std::size_t v = 0; v < out.loads.size(); ++v)
        out.loads[v] = loads_S.loads[v] + bikes * column_u[v];
    return out;
}

ColumnProvider::ColumnProvider(const MobilityGraph& g, int tau, std::size_t dense_threshold)
    : graph_(&g), tau_(tau) {
    if (tau < 0) throw ValidationError("number of steps must be non-negative");
    if (g.node_count() <= dense_threshold) op_ = build_operator(g, tau);
}

std::span<const double> ColumnProvider::column(NodeIndex u, std::vector<double>& scratch) const {
    if (op_) return op_->column(u);
    const LoadVector loads = propagate(SeedSet{{u}, 1}, *graph_, tau_);
    scratch = loads.loads;
    return scratch;
}

void write_loads_csv(std::ostream& out, const MobilityGraph& g, const LoadVector& loads) {
    if (loads.size() != g.node_count()) throw ValidationError("load vector does not match graph");
    out << "node_id,row,col,load\n";
    char buf[32];
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
        out << g.id(i) << ',';
        if (auto c = g.cell(i))
            out << c->row << ',' << c->col << ',';
        else
            out << ",,";
        std::snprintf(buf, sizeof buf, "%.12g", loads.loads[i]);
        out << buf << '\n';
    }
}

}  // namespace bikeflow
