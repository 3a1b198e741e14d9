#include "cli.hpp"

#include "bikeflow/config.hpp"
#include "bikeflow/diffusion.hpp"
#include "bikeflow/error.hpp"
#include "bikeflow/instances.hpp"
#include "bikeflow/io.hpp"
#include "bikeflow/mobility_graph.hpp"
#include "bikeflow/monte_carlo.hpp"
#include "bikeflow/seed_optimizer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

namespace bikeflow::cli {

namespace {

namespace fs = std::filesystem;

struct BuildGraphArgs {
    std::string rides;
    double cell_size = 500;
    std::string window = "morning";
    double prune = 0.0;
    std::string out;
    std::string origin;
    int rows = 0;
    int cols = 0;
};

struct GenArgs {
    std::string out;
    std::uint64_t rng_seed = 0;
    // random
    int n = 20;
    double avg_degree = 3.0;
    double self_loop_min = 0.05;
    // mds
    std::string named;
    std::string edges_file;
    std::string random_regular;
    int k = 1;
    // x3c
    int q = 2;
    std::string sets;
    int random_sets = 0;
    bool plant = false;
};

struct SolveArgs {
    std::string graph;
    std::string objective = "sqrt";
    std::optional<double> gamma;
    int k = 1;
    int bikes = 100;
    int tau = 2;
    std::string algorithm = "greedy";
    std::uint64_t rng_seed = 0;
    std::string out;
    std::size_t dense_threshold = SolverLimits{}.dense_threshold;
    double brute_cap = SolverLimits{}.brute_force_cap;
    bool omit_timing = false;
};

struct SimulateArgs {
    std::string graph;
    std::string seed_nodes;
    int bikes = 100;
    int tau = 2;
    std::uint64_t trials = 10000;
    std::uint64_t rng_seed = 0;
    std::string method = "per-bike";
    double gamma = 1.0;
    std::string out;
};

struct ExportArgs {
    std::string solution;
    std::string graph;
    std::string grid;
    std::string format = "geojson";
    std::string bins;
    std::string out;
};

struct BenchArgs {
    std::string graph;
    std::string ks = "2,4,8,16,32";
    std::string taus = "1";
    std::string objective = "sqrt";
    std::optional<double> gamma;
    int bikes = 100;
    std::string algorithm = "greedy";
    int repeats = 3;
    std::string out;
};

Json collect_flags(const CLI::App* sub) {
    Json flags = Json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_name();
        if (name == "--help" || name.empty()) continue;
        const auto& results = opt->results();
        if (!results.empty()) {
            flags[name] = results.size() == 1 ? Json(results[0]) : Json(results);
        } else if (!opt->get_default_str().empty()) {
            flags[name] = opt->get_default_str();
        }
    }
    return flags;
}

std::string graph_text(const MobilityGraph& g, const RunConfig& config) {
    std::ostringstream ss;
    write_graph(ss, g, provenance_line(config));
    return ss.str();
}

fs::path sidecar(const fs::path& p, const std::string& suffix) {
    fs::path s = p;
    s += suffix;
    return s;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

SolverLimits limits_from(unsigned threads, std::size_t dense, double cap) {
    SolverLimits l;
    l.threads = threads;
    l.dense_threshold = dense;
    l.brute_force_cap = cap;
    return l;
}

int cmd_build_graph(const BuildGraphArgs& a, const RunConfig& config, std::ostream& err) {
    const RideTable table = read_rides_csv(fs::path(a.rides));
    Grid grid;
    if (!a.origin.empty()) {
        const auto o = parse_number_list(a.origin);
        if (o.size() != 2) throw ValidationError("--origin expects lat,lon");
        if (a.rows < 1 || a.cols < 1) throw ValidationError("--origin requires --rows and --cols");
        grid = Grid{o[0], o[1], a.cell_size, a.rows, a.cols};
        grid.validate();
    } else {
        grid = Grid::covering(table.rides, a.cell_size);
    }
    const GraphBuild built = build_graph(table.rides, grid, TimeWindow::parse(a.window));
    const MobilityGraph pruned = prune_graph(built.graph, a.prune);

    atomic_write(a.out, graph_text(pruned, config));
    Json grid_json = grid_to_json(grid);
    grid_json["config"] = config.to_json();
    atomic_write(sidecar(a.out, ".grid.json"), grid_json.dump(2) + "\n");

    const auto& d = built.diagnostics;
    err << "rides: " << d.rides_total << " read, " << table.rejected << " rejected, "
        << d.rides_in_window << " in window, " << d.rides_out_of_area << " outside grid\n"
        << "graph: n=" << pruned.node_count() << " m=" << pruned.edge_count() << " (before pruning n="
        << built.graph.node_count() << " m=" << built.graph.edge_count() << ")\n";
    return kExitOk;
}

int cmd_gen(const std::string& kind, const GenArgs& a, const RunConfig& config, std::ostream& err) {
    if (kind == "random") {
        const MobilityGraph g = random_instance(a.n, a.avg_degree, a.self_loop_min, a.rng_seed);
        atomic_write(a.out, graph_text(g, config));
        Json cert = {{"generator", "random"},
                     {"n", a.n},
                     {"avg_out_degree", a.avg_degree},
                     {"self_loop_min", a.self_loop_min},
                     {"rng_seed", a.rng_seed},
                     {"config", config.to_json()}};
        atomic_write(sidecar(a.out, ".cert.json"), cert.dump(2) + "\n");
        return kExitOk;
    }

    ReducedInstance red;
    std::string source;
    if (kind == "mds") {
        MdsInstance inst;
        inst.k = a.k;
        const int chosen = int(!a.named.empty()) + int(!a.edges_file.empty()) +
                           int(!a.random_regular.empty());
        if (chosen != 1)
            throw ValidationError("gen mds needs exactly one of --named, --edges, --random-regular");
        if (!a.named.empty()) {
            if (a.named == "k4") inst.graph = UndirectedGraph::complete(4);
            else if (a.named == "prism") inst.graph = UndirectedGraph::prism();
            else if (a.named == "petersen") inst.graph = UndirectedGraph::petersen();
            else if (a.named == "cube") inst.graph = UndirectedGraph::cube();
            else throw ValidationError("unknown named graph '" + a.named + "'");
        } else if (!a.random_regular.empty()) {
            const auto nd = parse_number_list(a.random_regular);
            if (nd.size() != 2) throw ValidationError("--random-regular expects n,d");
            inst.graph = UndirectedGraph::random_regular(int(nd[0]), int(nd[1]), a.rng_seed);
        } else {
            std::ifstream in(a.edges_file);
            if (!in) throw ValidationError("cannot open " + a.edges_file);
            int max_v = -1;
            for (int u, v; in >> u >> v;) {
                inst.graph.edges.emplace_back(u, v);
                max_v = std::max({max_v, u, v});
            }
            inst.graph.n = max_v + 1;
        }
        red = mds_to_tbs(inst);
        source = "minimum dominating set";
    } else {
        X3cInstance inst;
        if (!a.sets.empty()) {
            inst.q = a.q;
            std::stringstream ss(a.sets);
            for (std::string part; std::getline(ss, part, ';');) {
                const auto v = parse_number_list(part);
                if (v.size() != 3) throw ValidationError("each X3C set needs three elements");
                inst.sets.push_back({int(v[0]), int(v[1]), int(v[2])});
            }
        } else {
            inst = X3cInstance::random(a.q, a.random_sets, a.plant, a.rng_seed);
        }
        red = x3c_to_sbs(inst);
        source = "exact cover by 3-sets";
    }
    for (const auto& w : red.warnings) err << "warning: " << w << '\n';
    atomic_write(a.out, graph_text(red.instance.graph, config));
    atomic_write(sidecar(a.out, ".cert.json"), reduction_to_json(red, source, config).dump(2) + "\n");
    return kExitOk;
}

int cmd_solve(const SolveArgs& a, const RunConfig& config) {
    ProblemInstance inst;
    inst.graph = load_any_graph(a.graph);
    inst.k = a.k;
    inst.bikes_per_node = a.bikes;
    inst.tau = a.tau;
    inst.objective = SpreadObjective::parse(a.objective, a.gamma);
    inst.validate();
    const Solution sol = solve(inst, parse_algorithm(a.algorithm),
                               limits_from(config.threads, a.dense_threshold, a.brute_cap), a.rng_seed);
    atomic_write(a.out, solution_to_json(sol, inst, config, !a.omit_timing).dump(2) + "\n");
    return kExitOk;
}

int cmd_simulate(const SimulateArgs& a, const RunConfig& config) {
    const MobilityGraph g = load_any_graph(a.graph);
    std::vector<NodeIndex> nodes;
    for (NodeId id : parse_id_list(a.seed_nodes)) nodes.push_back(g.index_of(id));
    const SeedSet seed = SeedSet::make(nodes, a.bikes);
    SimulationOptions opts;
    opts.threads = config.threads;
    if (a.method == "per-bike") opts.method = SamplingMethod::PerBike;
    else if (a.method == "multinomial") opts.method = SamplingMethod::Multinomial;
    else throw ValidationError("unknown sampling method '" + a.method + "'");
    const SimulationResult sim = simulate(seed, g, a.tau, a.trials, a.rng_seed, opts);
    const ComparisonReport rep = compare(sim, propagate(seed, g, a.tau), a.gamma);
    atomic_write(a.out, simulation_to_json(sim, rep, g, seed, a.tau, config).dump(2) + "\n");
    return kExitOk;
}

int cmd_export(const ExportArgs& a, const RunConfig& config, std::ostream& err) {
    const MobilityGraph g = load_any_graph(a.graph);
    const SolutionRecord rec = solution_record_from_json(Json::parse(read_file(a.solution)));
    if (rec.node_ids.size() != g.node_count())
        throw ValidationError("solution loads do not match the graph's nodes");
    LoadVector loads{std::vector<double>(g.node_count(), 0.0), 0};
    for (std::size_t i = 0; i < rec.node_ids.size(); ++i)
        loads.loads[g.index_of(rec.node_ids[i])] = rec.loads[i];

    if (a.format != "geojson" && a.format != "csv")
        throw ValidationError("unknown export format '" + a.format + "'");
    std::string grid_path = a.grid;
    if (grid_path.empty() && fs::exists(sidecar(a.graph, ".grid.json")))
        grid_path = sidecar(a.graph, ".grid.json").string();
    const bool geometry = !grid_path.empty() && g.cells().size() == g.node_count();

    fs::path out = a.out;
    if (a.format == "geojson" && geometry) {
        const Grid grid = grid_from_json(Json::parse(read_file(grid_path)));
        BinEdges edges;
        if (!a.bins.empty()) {
            const auto v = parse_number_list(a.bins);
            if (v.size() != 4 || !std::is_sorted(v.begin(), v.end()))
                throw ValidationError("--bins expects four ascending edges a,b,c,d");
            std::copy(v.begin(), v.end(), edges.begin());
        } else {
            const double max_load =
                loads.loads.empty() ? 0.0 : *std::max_element(loads.loads.begin(), loads.loads.end());
            edges = equal_width_edges(max_load);
        }
        atomic_write(out, heatmap_geojson(g, grid, loads.loads, rec.seed, edges, config).dump(1) + "\n");
        return kExitOk;
    }
    if (a.format == "geojson") {
        out.replace_extension(".csv");
        err << "warning: no grid geometry for this graph; writing CSV to " << out.string() << '\n';
    }
    std::ostringstream ss;
    write_loads_csv(ss, g, loads);
    ss << "# " << provenance_line(config) << '\n';
    atomic_write(out, ss.str());
    return kExitOk;
}

int cmd_bench(const BenchArgs& a, const RunConfig& config, std::ostream& err) {
    ProblemInstance inst;
    inst.graph = load_any_graph(a.graph);
    inst.bikes_per_node = a.bikes;
    inst.objective = SpreadObjective::parse(a.objective, a.gamma);
    const Algorithm algo = parse_algorithm(a.algorithm);
    if (a.repeats < 1) throw ValidationError("--repeats must be at least 1");
    SolverLimits limits;
    limits.threads = config.threads;

    std::ostringstream csv;
    csv << "n,m,algorithm,k,tau,repeats,mean_wall_ms,min_wall_ms,spread,evaluations\n";
    for (double tau : parse_number_list(a.taus)) {
        for (double k : parse_number_list(a.ks)) {
            inst.k = int(k);
            inst.tau = int(tau);
            inst.validate();
            double total = 0.0, best = std::numeric_limits<double>::infinity();
            Solution sol;
            for (int r = 0; r < a.repeats; ++r) {
                sol = solve(inst, algo, limits);
                total += sol.wall_time_s;
                best = std::min(best, sol.wall_time_s);
            }
            csv << inst.graph.node_count() << ',' << inst.graph.edge_count() << ',' << a.algorithm
                << ',' << inst.k << ',' << inst.tau << ',' << a.repeats << ','
                << fmt_double(1e3 * total / a.repeats) << ',' << fmt_double(1e3 * best) << ','
                << fmt_double(sol.spread) << ',' << sol.evaluations << '\n';
            err << "k=" << inst.k << " tau=" << inst.tau << " mean " << 1e3 * total / a.repeats
                << " ms\n";
        }
    }
    csv << "# " << provenance_line(config) << '\n';
    atomic_write(a.out, csv.str());
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"bikeflow: seed selection for spreading free-floating bikes"};
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "Worker thread hint (0 = all cores; BIKEFLOW_THREADS overrides)");
    app.set_version_flag("--version", std::string(kVersion));

    BuildGraphArgs bg;
    auto* build = app.add_subcommand("build-graph", "Build a mobility graph from a rides CSV");
    build->add_option("--rides", bg.rides, "Rides CSV")->required()->check(CLI::ExistingFile);
    build->add_option("--cell-size", bg.cell_size, "Grid cell size in metres")
        ->check(CLI::IsMember({100.0, 500.0}))
        ->capture_default_str();
    build->add_option("--window", bg.window, "morning, evening, all or HH:MM-HH:MM")->capture_default_str();
    build->add_option("--prune", bg.prune, "Edge probability threshold eta in [0, 1)")->capture_default_str();
    build->add_option("--out", bg.out, "Output graph file")->required();
    build->add_option("--origin", bg.origin, "Grid south-west corner lat,lon (default: ride extent)");
    build->add_option("--rows", bg.rows, "Grid rows when --origin is given");
    build->add_option("--cols", bg.cols, "Grid columns when --origin is given");

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "Generate a problem instance");
    gen->require_subcommand(1);
    auto* gen_random = gen->add_subcommand("random", "Random stochastic graph");
    auto* gen_mds = gen->add_subcommand("mds", "Threshold instance from a dominating-set instance");
    auto* gen_x3c = gen->add_subcommand("x3c", "Square-root instance from an exact-cover instance");
    for (auto* sub : {gen_random, gen_mds, gen_x3c}) {
        sub->add_option("--out", ga.out, "Output graph file")->required();
        sub->add_option("--rng-seed", ga.rng_seed)->capture_default_str();
    }
    gen_random->add_option("--n", ga.n)->capture_default_str();
    gen_random->add_option("--avg-degree", ga.avg_degree)->capture_default_str();
    gen_random->add_option("--self-loop-min", ga.self_loop_min)->capture_default_str();
    gen_mds->add_option("--named", ga.named, "k4, prism, petersen or cube");
    gen_mds->add_option("--edges", ga.edges_file, "Undirected edge list file 'u v' per line");
    gen_mds->add_option("--random-regular", ga.random_regular, "n,d");
    gen_mds->add_option("--k", ga.k)->required();
    gen_x3c->add_option("--q", ga.q)->capture_default_str();
    gen_x3c->add_option("--sets", ga.sets, "Sets as '1,2,3;2,3,4;...'");
    gen_x3c->add_option("--random", ga.random_sets, "Number of random sets");
    gen_x3c->add_flag("--plant", ga.plant, "Plant an exact cover among the random sets");

    SolveArgs sa;
    auto* solve_cmd = app.add_subcommand("solve", "Select a (k, L)-seed");
    solve_cmd->add_option("--graph", sa.graph)->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("--objective", sa.objective)->check(CLI::IsMember({"threshold", "sqrt"}))->capture_default_str();
    solve_cmd->add_option("--gamma", sa.gamma, "Threshold gamma (threshold objective only)");
    solve_cmd->add_option("--k", sa.k)->required();
    solve_cmd->add_option("--L", sa.bikes)->capture_default_str();
    solve_cmd->add_option("--tau", sa.tau)->capture_default_str();
    solve_cmd->add_option("--algorithm", sa.algorithm)
        ->check(CLI::IsMember({"greedy", "lazy", "brute", "random", "degree"}))
        ->capture_default_str();
    solve_cmd->add_option("--rng-seed", sa.rng_seed)->capture_default_str();
    solve_cmd->add_option("--dense-threshold", sa.dense_threshold)->capture_default_str();
    solve_cmd->add_option("--brute-cap", sa.brute_cap)->capture_default_str();
    solve_cmd->add_flag("--omit-timing", sa.omit_timing, "Leave wall time out of the solution file");
    solve_cmd->add_option("--out", sa.out)->required();

    SimulateArgs ma;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo simulation of atomic bikes");
    sim_cmd->add_option("--graph", ma.graph)->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--seed-nodes", ma.seed_nodes, "Comma-separated node ids")->required();
    sim_cmd->add_option("--L", ma.bikes)->capture_default_str();
    sim_cmd->add_option("--tau", ma.tau)->capture_default_str();
    sim_cmd->add_option("--trials", ma.trials)->capture_default_str();
    sim_cmd->add_option("--rng-seed", ma.rng_seed)->capture_default_str();
    sim_cmd->add_option("--method", ma.method)->check(CLI::IsMember({"per-bike", "multinomial"}))->capture_default_str();
    sim_cmd->add_option("--gamma", ma.gamma, "Threshold used in the report")->capture_default_str();
    sim_cmd->add_option("--out", ma.out)->required();

    ExportArgs ea;
    auto* export_cmd = app.add_subcommand("export", "Export solution loads as GeoJSON or CSV");
    export_cmd->add_option("--solution", ea.solution)->required()->check(CLI::ExistingFile);
    export_cmd->add_option("--graph", ea.graph)->required()->check(CLI::ExistingFile);
    export_cmd->add_option("--grid", ea.grid, "Grid JSON (default: <graph>.grid.json)");
    export_cmd->add_option("--format", ea.format)->check(CLI::IsMember({"geojson", "csv"}))->capture_default_str();
    export_cmd->add_option("--bins", ea.bins, "Four bin edges a,b,c,d (default: equal width)");
    export_cmd->add_option("--out", ea.out)->required();

    BenchArgs ba;
    auto* bench_cmd = app.add_subcommand("bench", "Time a solver across seed sizes and steps");
    bench_cmd->add_option("--graph", ba.graph)->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--k", ba.ks, "Comma-separated seed sizes")->capture_default_str();
    bench_cmd->add_option("--tau", ba.taus, "Comma-separated step counts")->capture_default_str();
    bench_cmd->add_option("--objective", ba.objective)->check(CLI::IsMember({"threshold", "sqrt"}))->capture_default_str();
    bench_cmd->add_option("--gamma", ba.gamma);
    bench_cmd->add_option("--L", ba.bikes)->capture_default_str();
    bench_cmd->add_option("--algorithm", ba.algorithm)
        ->check(CLI::IsMember({"greedy", "lazy", "brute", "random", "degree"}))
        ->capture_default_str();
    bench_cmd->add_option("--repeats", ba.repeats)->capture_default_str();
    bench_cmd->add_option("--out", ba.out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    RunConfig config;
    config.threads = resolve_threads(threads);
    try {
        if (build->parsed()) {
            config.subcommand = "build-graph";
            config.flags = collect_flags(build);
            return cmd_build_graph(bg, config, err);
        }
        if (gen->parsed()) {
            for (auto* sub : {gen_random, gen_mds, gen_x3c}) {
                if (!sub->parsed()) continue;
                config.subcommand = "gen " + sub->get_name();
                config.flags = collect_flags(sub);
                return cmd_gen(sub->get_name(), ga, config, err);
            }
        }
        if (solve_cmd->parsed()) {
            config.subcommand = "solve";
            config.flags = collect_flags(solve_cmd);
            return cmd_solve(sa, config);
        }
        if (sim_cmd->parsed()) {
            config.subcommand = "simulate";
            config.flags = collect_flags(sim_cmd);
            return cmd_simulate(ma, config);
        }
        if (export_cmd->parsed()) {
            config.subcommand = "export";
            config.flags = collect_flags(export_cmd);
            return cmd_export(ea, config, err);
        }
        if (bench_cmd->parsed()) {
            config.subcommand = "bench";
            config.flags = collect_flags(bench_cmd);
            return cmd_bench(ba, config, err);
        }
    } catch (const InfeasibleError& e) {
        err << "bikeflow: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const Error& e) {
        err << "bikeflow: " << e.what() << '\n';
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        err << "bikeflow: invalid JSON input: " << e.what() << '\n';
        return kExitUsage;
    }
    err << "bikeflow: no subcommand given\n";
    return kExitUsage;
}

}  // namespace bikeflow::cli
