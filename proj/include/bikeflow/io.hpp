#pragma once

#include "bikeflow/diffusion.hpp"
#include "bikeflow/instances.hpp"
#include "bikeflow/mobility_graph.hpp"
#include "bikeflow/monte_carlo.hpp"
#include "bikeflow/seed_optimizer.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bikeflow {

using Json = nlohmann::ordered_json;

/// Validated invocation record embedded in every artifact for provenance.
struct RunConfig {
    std::string subcommand;
    Json flags = Json::object();
    unsigned threads = 1;

    Json to_json() const;
};

// Writes to a sibling temporary file, then renames over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// Compact one-line provenance used in comments of text artifacts.
std::string provenance_line(const RunConfig& config);

Json grid_to_json(const Grid& grid);
Grid grid_from_json(const Json& j);

/// Instance parameters, seed node ids, spread, per-node loads, evaluation
/// count and (unless omitted) wall time, plus the run config.
Json solution_to_json(const Solution& sol, const ProblemInstance& inst, const RunConfig& config,
                      bool include_timing = true);

// Seed ids and tau-step loads as read back from a solution file.
struct SolutionRecord {
    std::vector<NodeId> seed;
    std::vector<NodeId> node_ids;
    std::vector<double> loads;
};
SolutionRecord solution_record_from_json(const Json& j);

Json simulation_to_json(const SimulationResult& sim, const ComparisonReport& report,
                        const MobilityGraph& g, const SeedSet& seed, int tau,
                        const RunConfig& config);

Json reduction_to_json(const ReducedInstance& red, const std::string& source,
                       const RunConfig& config);

// Parses the loads CSV written by write_loads_csv; '#' lines are skipped.
std::vector<std::pair<NodeId, double>> read_loads_csv(std::istream& in);

// "a,b,c" into numbers; throws ValidationError on junk.
std::vector<double> parse_number_list(const std::string& text);
std::vector<NodeId> parse_id_list(const std::string& text);

// ---------------------------------------------------------------------------
// Heatmaps

// Upper edges of bins 0..3; bin 4 is everything above the last edge.
using BinEdges = std::array<double, 4>;

// Equal-width edges max/5, 2max/5, 3max/5, 4max/5.
BinEdges equal_width_edges(double max_load);
// Bin of a load under half-open-below intervals (e_{i-1}, e_i]; zero loads
// fall in bin 0.
int bin_of(double load, const BinEdges& edges);

/// FeatureCollection with one Polygon per node holding node_id, row, col,
/// load, bin and seed properties. Requires cell coordinates on every node.
Json heatmap_geojson(const MobilityGraph& g, const Grid& grid, std::span<const double> loads,
                     std::span<const NodeId> seed, const BinEdges& edges, const RunConfig& config);

}  // namespace bikeflow
