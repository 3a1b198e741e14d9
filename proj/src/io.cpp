#include "bikeflow/io.hpp"

#include "bikeflow/config.hpp"
#include "bikeflow/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <unistd.h>

namespace bikeflow {

Json RunConfig::to_json() const {
    Json j;
    j["version"] = std::string(kVersion);
    j["subcommand"] = subcommand;
    j["flags"] = flags;
    j["threads"] = threads;
    j["tolerances"] = {{"unity", Tolerances::unity},
                       {"path_agreement", Tolerances::path_agreement},
                       {"conservation", Tolerances::conservation},
                       {"threshold_slack", Tolerances::threshold_slack},
                       {"order_slack", Tolerances::order_slack}};
    return j;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw ValidationError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ValidationError("cannot move output into place at " + path.string() + ": " +
                              ec.message());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string provenance_line(const RunConfig& config) {
    return "bikeflow " + std::string(kVersion) + " config " + config.to_json().dump();
}

Json grid_to_json(const Grid& grid) {
    return {{"origin_lat", grid.origin_lat},
            {"origin_lon", grid.origin_lon},
            {"cell_size_m", grid.cell_size_m},
            {"n_rows", grid.n_rows},
            {"n_cols", grid.n_cols}};
}

Grid grid_from_json(const Json& j) {
    try {
        Grid g{j.at("origin_lat").get<double>(), j.at("origin_lon").get<double>(),
               j.at("cell_size_m").get<double>(), j.at("n_rows").get<int>(),
               j.at("n_cols").get<int>()};
        g.validate();
        return g;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("invalid grid description: ") + e.what());
    }
}

Json solution_to_json(const Solution& sol, const ProblemInstance& inst, const RunConfig& config,
                      bool include_timing) {
    const MobilityGraph& g = inst.graph;
    Json j;
    j["instance"] = {{"n", g.node_count()},
                     {"m", g.edge_count()},
                     {"k", inst.k},
                     {"L", inst.bikes_per_node},
                     {"tau", inst.tau},
                     {"objective", inst.objective.name()}};
    if (inst.objective.kind() == SpreadObjective::Kind::Threshold)
        j["instance"]["gamma"] = inst.objective.gamma();
    j["algorithm"] = to_string(sol.algorithm);
    Json seed = Json::array();
    for (NodeIndex u : sol.seed.nodes) seed.push_back(g.id(u));
    j["seed"] = seed;
    j["spread"] = sol.spread;
    j["evaluations"] = sol.evaluations;
    if (include_timing) j["wall_time_s"] = sol.wall_time_s;
    if (!sol.gains.empty()) {
        j["gains"] = sol.gains;
        j["trajectory"] = sol.trajectory;
    }
    Json loads = Json::array();
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
        Json entry = {{"node_id", g.id(i)}, {"load", sol.loads.loads[i]}};
        if (auto c = g.cell(i)) {
            entry["row"] = c->row;
            entry["col"] = c->col;
        }
        loads.push_back(entry);
    }
    j["loads"] = loads;
    j["config"] = config.to_json();
    return j;
}

SolutionRecord solution_record_from_json(const Json& j) {
    try {
        SolutionRecord r;
        for (const auto& id : j.at("seed")) r.seed.push_back(id.get<NodeId>());
        for (const auto& e : j.at("loads")) {
            r.node_ids.push_back(e.at("node_id").get<NodeId>());
            r.loads.push_back(e.at("load").get<double>());
        }
        return r;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("invalid solution file: ") + e.what());
    }
}

Json simulation_to_json(const SimulationResult& sim, const ComparisonReport& report,
                        const MobilityGraph& g, const SeedSet& seed, int tau,
                        const RunConfig& config) {
    Json j;
    Json ids = Json::array();
    for (NodeIndex u : seed.nodes) ids.push_back(g.id(u));
    j["seed"] = ids;
    j["L"] = seed.bikes_per_node;
    j["tau"] = tau;
    j["trials"] = sim.trials;
    j["rng_seed"] = sim.rng_seed;
    j["total_bikes"] = sim.total_bikes;
    j["low_confidence"] = report.low_confidence;
    j["max_abs_deviation"] = report.max_abs_deviation;
    j["max_abs_z"] = report.max_abs_z;
    j["fraction_within_4se"] = report.fraction_within_4se;
    j["spread"] = {{"sqrt_of_mean_loads", report.sqrt_spread_of_mean},
                   {"sqrt_of_expected_loads", report.sqrt_spread_of_expected},
                   {"mean_sqrt_of_realized_loads", report.mean_realized_sqrt_spread},
                   {"gamma", report.gamma},
                   {"threshold_of_mean_loads", report.threshold_spread_of_mean},
                   {"threshold_of_expected_loads", report.threshold_spread_of_expected}};
    Json nodes = Json::array();
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
        const double z = report.z_scores[i];
        nodes.push_back({{"node_id", g.id(i)},
                         {"mean", sim.mean_loads[i]},
                         {"std", sim.std_loads[i]},
                         {"z", std::isfinite(z) ? Json(z) : Json(z > 0 ? "inf" : "-inf")}});
    }
    j["nodes"] = nodes;
    j["config"] = config.to_json();
    return j;
}

Json reduction_to_json(const ReducedInstance& red, const std::string& source,
                       const RunConfig& config) {
    const ProblemInstance& inst = red.instance;
    Json j;
    j["source_problem"] = source;
    j["k"] = inst.k;
    j["L"] = inst.bikes_per_node;
    j["tau"] = inst.tau;
    j["objective"] = inst.objective.name();
    if (inst.objective.kind() == SpreadObjective::Kind::Threshold)
        j["gamma"] = inst.objective.gamma();
    j["target_spread"] = red.target;
    j["has_solution"] = red.has_solution;
    j["witness"] = red.witness;
    j["warnings"] = red.warnings;
    j["config"] = config.to_json();
    return j;
}

std::vector<std::pair<NodeId, double>> read_loads_csv(std::istream& in) {
    std::vector<std::pair<NodeId, double>> out;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line.rfind("node_id,row,col,load", 0) != 0)
                throw ParseError("expected header node_id,row,col,load", line_no);
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 4) throw ParseError("expected 4 fields", line_no);
        NodeId id;
        double load;
        auto r1 = std::from_chars(f[0].data(), f[0].data() + f[0].size(), id);
        auto r2 = std::from_chars(f[3].data(), f[3].data() + f[3].size(), load);
        if (r1.ec != std::errc() || r2.ec != std::errc()) throw ParseError("bad number", line_no);
        out.emplace_back(id, load);
    }
    return out;
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string cell; std::getline(ss, cell, ',');) {
        double v;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size())
            throw ValidationError("invalid number '" + cell + "' in list '" + text + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<NodeId> parse_id_list(const std::string& text) {
    std::vector<NodeId> out;
    std::stringstream ss(text);
    for (std::string cell; std::getline(ss, cell, ',');) {
        NodeId v;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size())
            throw ValidationError("invalid node id '" + cell + "' in list '" + text + "'");
        out.push_back(v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Heatmaps

BinEdges equal_width_edges(double max_load) {
    BinEdges e;
    for (int i = 0; i < 4; ++i) e[std::size_t(i)] = max_load * (i + 1) / 5.0;
    return e;
}

int bin_of(double load, const BinEdges& edges) {
    for (int i = 0; i < 4; ++i)
        if (load <= edges[std::size_t(i)]) return i;
    return 4;
}

Json heatmap_geojson(const MobilityGraph& g, const Grid& grid, std::span<const double> loads,
                     std::span<const NodeId> seed, const BinEdges& edges, const RunConfig& config) {
    if (loads.size() != g.node_count()) throw ValidationError("load vector does not match graph");
    Json features = Json::array();
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
        const auto c = g.cell(i);
        if (!c) throw ValidationError("node " + std::to_string(g.id(i)) + " has no grid cell");
        Json ring = Json::array();
        const auto corners = grid.cell_corners(*c);
        for (const auto& [lat, lon] : corners) ring.push_back({lon, lat});
        ring.push_back({corners[0][1], corners[0][0]});
        const bool is_seed = std::find(seed.begin(), seed.end(), g.id(i)) != seed.end();
        features.push_back(
            {{"type", "Feature"},
             {"geometry", {{"type", "Polygon"}, {"coordinates", Json::array({ring})}}},
             {"properties",
              {{"node_id", g.id(i)},
               {"row", c->row},
               {"col", c->col},
               {"load", loads[i]},
               {"bin", bin_of(loads[i], edges)},
               {"seed", is_seed}}}});
    }
    Json j;
    j["type"] = "FeatureCollection";
    j["bin_edges"] = edges;
    j["features"] = features;
    j["config"] = config.to_json();
    return j;
}

}  // namespace bikeflow
