#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bikeflow {

// External node identifier (grid cell id for mobility graphs).
using NodeId = std::int64_t;
// Dense position of a node inside a MobilityGraph, in ascending NodeId order.
using NodeIndex = std::size_t;

struct CellCoord {
    int row = 0;
    int col = 0;

    friend bool operator==(const CellCoord&, const CellCoord&) = default;
};

struct Edge {
    NodeId src = 0;
    NodeId dst = 0;
    double probability = 0.0;
};

struct Arc {
    NodeIndex node;  // target for out-arcs, source for in-arcs
    double probability;
};

/// Directed graph whose out-edges at every node form a probability
/// distribution (self-loops included). Immutable once constructed.
///
/// Nodes are stored in ascending id order so that index order and id order
/// coincide; solvers rely on this for the smallest-id tie-break.
class MobilityGraph {
  public:
    MobilityGraph() = default;

    /// Validates and builds. Throws ValidationError when an edge is
    /// duplicated, references an unknown node, has p outside (0, 1], or a
    /// node's outgoing mass is off from 1 by more than Tolerances::unity.
    /// Mass within the tolerance is renormalized. Every node needs at least
    /// one outgoing edge.
    static MobilityGraph from_edges(std::vector<NodeId> nodes, const std::vector<Edge>& edges,
                                    const std::map<NodeId, CellCoord>& cells = {});

    std::size_t node_count() const noexcept { return ids_.size(); }
    std::size_t edge_count() const noexcept { return out_arcs_.size(); }
    bool empty() const noexcept { return ids_.empty(); }

    NodeId id(NodeIndex i) const { return ids_.at(i); }
    std::span<const NodeId> ids() const noexcept { return ids_; }
    std::optional<NodeIndex> find(NodeId id) const;
    NodeIndex index_of(NodeId id) const;  // throws ValidationError

    std::span<const Arc> out_arcs(NodeIndex u) const;
    std::span<const Arc> in_arcs(NodeIndex v) const;
    double self_loop(NodeIndex u) const;

    std::optional<CellCoord> cell(NodeIndex i) const;
    bool has_cells() const noexcept { return !cells_.empty(); }

    // Edges keyed by node id, ordered by (src, dst).
    std::vector<Edge> edges() const;
    std::map<NodeId, CellCoord> cells() const;

  private:
    std::vector<NodeId> ids_;
    std::vector<std::size_t> out_offsets_;
    std::vector<Arc> out_arcs_;
    std::vector<std::size_t> in_offsets_;
    std::vector<Arc> in_arcs_;
    std::vector<std::optional<CellCoord>> cells_;
};

// Same nodes, cells and edges, with probabilities equal within `tol`.
bool approx_equal(const MobilityGraph& a, const MobilityGraph& b, double tol);

// ---------------------------------------------------------------------------
// Grid and rides

struct Ride;

/// Axis-aligned grid of square cells laid over an equirectangular projection
/// centred on the south-west corner. Cells are half-open: [min, min + s).
struct Grid {
    double origin_lat = 0.0;
    double origin_lon = 0.0;
    double cell_size_m = 500.0;
    int n_rows = 1;
    int n_cols = 1;

    void validate() const;
    std::int64_t cell_count() const { return std::int64_t(n_rows) * n_cols; }
    NodeId cell_id(CellCoord c) const { return NodeId(c.row) * n_cols + c.col; }
    CellCoord coord(NodeId id) const { return {int(id / n_cols), int(id % n_cols)}; }

    // Local metres (north, east) of a point relative to the origin.
    std::array<double, 2> to_local(double lat, double lon) const;
    // Inverse of to_local; returns (lat, lon).
    std::array<double, 2> to_geo(double north_m, double east_m) const;
    // Corners of a cell as (lat, lon), counter-clockwise from south-west.
    std::array<std::array<double, 2>, 4> cell_corners(CellCoord c) const;

    // Smallest grid with this cell size whose origin is the south-west
    // corner of all ride endpoints and which covers every endpoint.
    static Grid covering(std::span<const Ride> rides, double cell_size_m);
};

struct Ride {
    std::string user_id;
    std::string bike_id;
    double start_lat = 0.0;
    double start_lon = 0.0;
    double end_lat = 0.0;
    double end_lon = 0.0;
    // Seconds since 1970-01-01 of the wall-clock time as written.
    std::int64_t start_time = 0;
    std::int64_t end_time = 0;

    bool valid() const;
};

// Parses "YYYY-MM-DD[T ]HH:MM[:SS[.fff]][Z|+hh:mm|-hh:mm]". The offset is
// ignored: timestamps keep the local wall-clock time they were written in.
std::int64_t parse_iso8601(const std::string& text);
std::string format_iso8601(std::int64_t seconds);

struct RideTable {
    std::vector<Ride> rides;
    std::size_t rejected = 0;  // rows violating Ride invariants
};

// Reads the rides CSV (header user_id,bike_id,start_lat,...,end_time).
// Throws ParseError with the line number on malformed rows.
RideTable read_rides_csv(std::istream& in);
RideTable read_rides_csv(const std::filesystem::path& path);

/// Time-of-day interval [begin, end) in seconds after midnight. A window
/// with end < begin wraps past midnight.
struct TimeWindow {
    int begin_s = 0;
    int end_s = 24 * 3600;

    bool contains(std::int64_t timestamp) const;
    static TimeWindow morning() { return {6 * 3600 + 30 * 60, 9 * 3600}; }
    static TimeWindow evening() { return {16 * 3600, 20 * 3600}; }
    // "morning", "evening", "all" or "HH:MM-HH:MM".
    static TimeWindow parse(const std::string& text);
};

// Dense id of the cell containing the point. Throws OutOfAreaError.
NodeId snap_point(double lat, double lon, const Grid& grid);
// Same, with the point already in local metres.
NodeId snap_local(double north_m, double east_m, const Grid& grid);

struct BuildDiagnostics {
    std::size_t rides_total = 0;
    std::size_t rides_in_window = 0;
    std::size_t rides_out_of_area = 0;
    std::size_t destination_only_cells = 0;
};

struct GraphBuild {
    MobilityGraph graph;
    BuildDiagnostics diagnostics;
};

/// Edge (u, v) gets n_uv / n_u over rides whose start time falls in the
/// window. Cells that only receive rides become absorbing nodes (self-loop
/// p = 1) so the result is stochastic; prune_graph removes them.
/// Throws ValidationError when no ride survives the window and area filters.
GraphBuild build_graph(std::span<const Ride> rides, const Grid& grid, const TimeWindow& window);

/// Drops non-self edges with p < eta, folding their mass into the source's
/// self-loop, then repeatedly removes nodes left with no edge other than a
/// self-loop. Edges into removed nodes fold into their source's self-loop.
MobilityGraph prune_graph(const MobilityGraph& g, double eta);

// ---------------------------------------------------------------------------
// Graph file I/O
//
//   n m
//   N <node_id> <row> <col>      (row/col are -1 when the node has no cell)
//   E <src> <dst> <p>            (p with 12 significant digits)
//
// Lines starting with '#' are comments.

void write_graph(std::ostream& out, const MobilityGraph& g, const std::string& comment = {});
MobilityGraph read_graph(std::istream& in);

void save_graph(const MobilityGraph& g, const std::filesystem::path& path,
                const std::string& comment = {});
MobilityGraph load_graph(const std::filesystem::path& path);

// Whitespace-separated "src dst p" or networkx "src dst {'weight': p}" lines.
MobilityGraph read_edge_list(std::istream& in);
// Native format when the file starts with "n m" followed by N/E records,
// edge list otherwise.
MobilityGraph load_any_graph(const std::filesystem::path& path);

}  // namespace bikeflow
