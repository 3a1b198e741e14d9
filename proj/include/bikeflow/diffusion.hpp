#pragma once

#include "bikeflow/mobility_graph.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace bikeflow {

/// k distinct nodes, each starting with L bikes. Node indices refer to a
/// specific MobilityGraph. An empty seed is allowed for gain arithmetic.
struct SeedSet {
    std::vector<NodeIndex> nodes;  // ascending, distinct
    int bikes_per_node = 1;

    // Sorts the nodes; throws ValidationError on duplicates or L < 1.
    static SeedSet make(std::vector<NodeIndex> nodes, int bikes_per_node);

    std::size_t size() const noexcept { return nodes.size(); }
    double total_bikes() const noexcept { return double(nodes.size()) * bikes_per_node; }
    bool contains(NodeIndex u) const;
    SeedSet with(NodeIndex u) const;
};

// Expected bike count per node after `step` diffusion steps.
struct LoadVector {
    std::vector<double> loads;
    int step = 0;

    std::size_t size() const noexcept { return loads.size(); }
    double total() const;
    double operator[](std::size_t i) const { return loads[i]; }
};

/// tau-step transition mass: entry (v, u) is the probability that a bike
/// starting at u sits at v after tau steps. Columns sum to one.
struct TransitionOperator {
    int tau = 0;
    Eigen::MatrixXd matrix;

    std::size_t node_count() const noexcept { return std::size_t(matrix.cols()); }
    std::span<const double> column(NodeIndex u) const {
        return {matrix.data() + Eigen::Index(u) * matrix.rows(), std::size_t(matrix.rows())};
    }
};

LoadVector init_loads(const SeedSet& seed, const MobilityGraph& g);

// new[v] = sum over in-arcs (u, v) of p(u, v) * old[u].
LoadVector step(const LoadVector& loads, const MobilityGraph& g);

// Iterated sparse propagation.
LoadVector propagate(const SeedSet& seed, const MobilityGraph& g, int tau);
// Same loads through a precomputed operator: L times the sum of seed columns.
LoadVector propagate(const SeedSet& seed, const TransitionOperator& op);

// Dense one-step operator, column-stochastic.
Eigen::MatrixXd one_step_matrix(const MobilityGraph& g);

// Powers the one-step operator by repeated squaring.
TransitionOperator build_operator(const MobilityGraph& g, int tau);

/// Loads of seed S + {u} as loads_S + L * column_u. Throws ValidationError
/// if u is already in S or the dimensions disagree.
LoadVector linearity_decompose(const LoadVector& loads_S, const SeedSet& seed, NodeIndex u,
                               std::span<const double> column_u);

/// Source of tau-step single-node responses. Uses the dense operator when the
/// graph has at most `dense_threshold` nodes, otherwise propagates a unit
/// load through the sparse graph on every request.
class ColumnProvider {
  public:
    ColumnProvider(const MobilityGraph& g, int tau, std::size_t dense_threshold);

    bool dense() const noexcept { return op_.has_value(); }
    std::size_t node_count() const noexcept { return graph_->node_count(); }
    int tau() const noexcept { return tau_; }

    // Column u. `scratch` backs the result on the sparse path.
    std::span<const double> column(NodeIndex u, std::vector<double>& scratch) const;

  private:
    const MobilityGraph* graph_;
    int tau_;
    std::optional<TransitionOperator> op_;
};

// "node_id,row,col,load" with 12 significant digits; row/col blank when the
// node has no cell.
void write_loads_csv(std::ostream& out, const MobilityGraph& g, const LoadVector& loads);

}  // namespace bikeflow
