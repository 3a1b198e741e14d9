// Acceptance suite: one PASS / FAIL / SKIP line per criterion.
// Exit status is non-zero when any criterion fails.

#include "bikeflow/diffusion.hpp"
#include "bikeflow/instances.hpp"
#include "bikeflow/mobility_graph.hpp"
#include "bikeflow/monte_carlo.hpp"
#include "bikeflow/seed_optimizer.hpp"
#include "bikeflow/spread.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

using namespace bikeflow;
namespace fs = std::filesystem;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
    Verdict verdict;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome verdict(bool ok, std::string detail) { return {ok ? Verdict::Pass : Verdict::Fail, std::move(detail)}; }

std::mt19937_64& rng() {
    static std::mt19937_64 r(20240601);
    return r;
}

int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }
double uniform_real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

MobilityGraph random_graph(int n) {
    const double avg = std::min(double(n - 1), uniform_real(1.0, 5.0));
    return random_instance(n, avg, uniform_real(0.0, 0.5), rng()());
}

std::vector<NodeIndex> random_subset(std::size_t n, std::size_t k) {
    std::vector<NodeIndex> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng());
    all.resize(k);
    return all;
}

SpreadObjective random_threshold(int L) { return SpreadObjective::threshold(uniform_real(0.2, 1.0) * L); }

double sigma(const SpreadObjective& obj, const MobilityGraph& g, std::vector<NodeIndex> seed, int L,
             int tau) {
    if (seed.empty()) return evaluate(obj, std::vector<double>(g.node_count(), 0.0));
    return evaluate(obj, propagate(SeedSet::make(std::move(seed), L), g, tau).loads);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

// ---------------------------------------------------------------------------

Outcome conservation() {
    int failures = 0;
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
        const int n = uniform_int(1, 100);
        const auto g = random_graph(n);
        const int tau = uniform_int(0, 50);
        const int k = uniform_int(1, std::min(n, 10));
        const int L = uniform_int(1, 100);
        const auto seed = SeedSet::make(random_subset(std::size_t(n), std::size_t(k)), L);
        const double expected = double(k) * L;
        const double a = std::abs(propagate(seed, g, tau).total() - expected);
        const double b = std::abs(propagate(seed, build_operator(g, tau)).total() - expected);
        worst = std::max({worst, a, b});
        if (a > 1e-6 || b > 1e-6) ++failures;
    }
    return verdict(failures == 0, fmt("200 instances, %d failures, max drift %.2e", failures, worst));
}

Outcome monotonicity() {
    int failures[2] = {0, 0};
    for (int i = 0; i < 500; ++i) {
        const int n = uniform_int(2, 40);
        const auto g = random_graph(n);
        const int tau = uniform_int(0, 6), L = uniform_int(1, 50);
        auto s = random_subset(std::size_t(n), std::size_t(uniform_int(1, n)));
        const NodeIndex v = s.back();
        s.pop_back();
        auto sv = s;
        sv.push_back(v);
        const SpreadObjective objs[2] = {SpreadObjective::square_root(), random_threshold(L)};
        for (int o = 0; o < 2; ++o)
            if (sigma(objs[o], g, sv, L, tau) < sigma(objs[o], g, s, L, tau) - 1e-9) ++failures[o];
    }
    return verdict(failures[0] + failures[1] == 0,
                   fmt("500 pairs; violations sqrt %d, threshold %d", failures[0], failures[1]));
}

Outcome submodularity() {
    int failures[2] = {0, 0};
    double worst[2] = {0, 0};
    for (int i = 0; i < 500; ++i) {
        const int n = uniform_int(3, 40);
        const auto g = random_graph(n);
        const int tau = uniform_int(0, 6), L = uniform_int(1, 50);
        auto t = random_subset(std::size_t(n), std::size_t(uniform_int(2, n)));
        const NodeIndex v = t.back();
        t.pop_back();
        const auto s = std::vector<NodeIndex>(t.begin(), t.begin() + uniform_int(0, int(t.size())));
        const SpreadObjective objs[2] = {SpreadObjective::square_root(), random_threshold(L)};
        for (int o = 0; o < 2; ++o) {
            auto sv = s, tv = t;
            sv.push_back(v);
            tv.push_back(v);
            const double gs = sigma(objs[o], g, sv, L, tau) - sigma(objs[o], g, s, L, tau);
            const double gt = sigma(objs[o], g, tv, L, tau) - sigma(objs[o], g, t, L, tau);
            if (gs < gt - 1e-9) {
                ++failures[o];
                worst[o] = std::max(worst[o], gt - gs);
            }
        }
    }
    return verdict(failures[0] + failures[1] == 0,
                   fmt("500 triples; violations sqrt %d (worst %.3g), threshold %d (worst %.3g)",
                       failures[0], worst[0], failures[1], worst[1]));
}

struct RatioStats {
    std::vector<double> ratios;
    int below = 0;
};

RatioStats greedy_ratios(bool threshold, int count) {
    const double bound = 1.0 - 1.0 / std::exp(1.0);
    RatioStats st;
    for (int i = 0; i < count; ++i) {
        ProblemInstance inst;
        const int n = uniform_int(4, 14);
        inst.graph = random_graph(n);
        inst.k = uniform_int(1, std::min(3, n));
        inst.bikes_per_node = uniform_int(5, 100);
        inst.tau = uniform_int(1, 5);
        inst.objective = threshold ? random_threshold(inst.bikes_per_node) : SpreadObjective::square_root();
        const double greedy = greedy_select(inst).spread;
        const double opt = brute_force_select(inst).spread;
        if (greedy < bound * opt - 1e-9) ++st.below;
        st.ratios.push_back(opt > 0 ? greedy / opt : 1.0);
    }
    std::sort(st.ratios.begin(), st.ratios.end());
    return st;
}

std::string describe(const RatioStats& st) {
    const auto n = st.ratios.size();
    const auto exact = std::count_if(st.ratios.begin(), st.ratios.end(), [](double r) { return r >= 1 - 1e-12; });
    return fmt("%zu instances, %d below bound; ratio min %.4f p10 %.4f median %.4f, %d/%zu optimal", n,
               st.below, st.ratios.front(), st.ratios[n / 10], st.ratios[n / 2], int(exact), n);
}

// Gated on the square-root objective; the threshold objective is reported only.
Outcome approximation() {
    const auto sqrt_stats = greedy_ratios(false, 50);
    const auto threshold_stats = greedy_ratios(true, 50);
    return verdict(sqrt_stats.below == 0,
                   "sqrt: " + describe(sqrt_stats) + "; threshold (not gated): " + describe(threshold_stats));
}

Outcome reductions() {
    int mismatches = 0, mds_count = 0, x3c_count = 0, mds_yes = 0, x3c_yes = 0;
    auto check_mds = [&](const MdsInstance& m) {
        const auto red = mds_to_tbs(m);
        const bool reached = brute_force_select(red.instance).spread >= red.target - 1e-9;
        if (reached != red.has_solution) ++mismatches;
        ++mds_count;
        mds_yes += red.has_solution;
    };
    check_mds({UndirectedGraph::complete(4), 1});
    check_mds({UndirectedGraph::petersen(), 3});
    check_mds({UndirectedGraph::petersen(), 2});
    check_mds({UndirectedGraph::prism(), 2});
    check_mds({UndirectedGraph::cube(), 2});
    const std::pair<int, int> shapes[] = {{6, 3}, {8, 3}, {10, 3}, {12, 3}, {8, 4}, {10, 4}, {12, 5}, {9, 4}};
    for (int i = 0; i < 24; ++i) {
        const auto [n, d] = shapes[std::size_t(i) % std::size(shapes)];
        check_mds({UndirectedGraph::random_regular(n, d, rng()()), uniform_int(1, 4)});
    }

    auto check_x3c = [&](const X3cInstance& x) {
        const auto red = x3c_to_sbs(x);
        const bool reached = brute_force_select(red.instance).spread >= red.target - 1e-9;
        if (reached != red.has_solution) ++mismatches;
        ++x3c_count;
        x3c_yes += red.has_solution;
        return brute_force_select(red.instance);
    };
    const auto example = check_x3c({2, {{1, 2, 3}, {2, 3, 4}, {1, 2, 5}, {2, 5, 6}, {1, 5, 6}}});
    const bool example_ok = example.seed.nodes == std::vector<NodeIndex>{7, 10} &&
                            std::abs(example.spread - 6.0) <= 1e-9;
    const auto no = check_x3c({2, {{1, 2, 3}, {2, 4, 5}, {2, 5, 6}}});
    const bool no_ok = no.spread < 6.0 - 1e-9;
    for (int i = 0; i < 24; ++i) {
        const int q = 1 + i % 4;
        check_x3c(X3cInstance::random(q, q + uniform_int(0, 4), i % 2 == 0, rng()()));
    }
    return verdict(mismatches == 0 && example_ok && no_ok,
                   fmt("MDS %d (%d yes), X3C %d (%d yes), %d mismatches; worked example %s, "
                       "no-instance spread %.4f",
                       mds_count, mds_yes, x3c_count, x3c_yes, mismatches, example_ok ? "ok" : "wrong",
                       no.spread));
}

Outcome engine_consistency() {
    double worst_path = 0, worst_linear = 0;
    for (int i = 0; i < 100; ++i) {
        const int n = uniform_int(2, 80);
        const auto g = random_graph(n);
        const int tau = uniform_int(0, 40), L = uniform_int(1, 100);
        const auto nodes = random_subset(std::size_t(n), std::size_t(uniform_int(2, std::min(n, 8))));
        const auto seed = SeedSet::make({nodes.begin(), nodes.end() - 1}, L);
        const auto op = build_operator(g, tau);
        worst_path = std::max(worst_path,
                              max_abs_diff(propagate(seed, g, tau).loads, propagate(seed, op).loads));
        const NodeIndex u = nodes.back();
        const auto decomposed = linearity_decompose(propagate(seed, g, tau), seed, u, op.column(u));
        worst_linear = std::max(worst_linear,
                                max_abs_diff(decomposed.loads, propagate(seed.with(u), g, tau).loads));
    }
    return verdict(worst_path <= 1e-9 && worst_linear <= 1e-9,
                   fmt("100 instances; max path gap %.2e, max linearity gap %.2e", worst_path, worst_linear));
}

Outcome monte_carlo() {
    std::size_t within = 0, total = 0;
    double min_instance = 1.0;
    for (int i = 0; i < 20; ++i) {
        const int n = uniform_int(10, 40);
        const auto g = random_graph(n);
        const int tau = uniform_int(1, 5), L = uniform_int(10, 100);
        const auto seed = SeedSet::make(random_subset(std::size_t(n), std::size_t(uniform_int(1, 3))), L);
        const auto sim = simulate(seed, g, tau, 10000, rng()(), {SamplingMethod::PerBike, 0});
        const auto report = compare(sim, propagate(seed, g, tau));
        for (double z : report.z_scores) within += std::abs(z) <= 4.0;
        total += report.z_scores.size();
        min_instance = std::min(min_instance, report.fraction_within_4se);
    }
    const double fraction = double(within) / double(total);

    const auto det = MobilityGraph::from_edges(
        {0, 1, 2, 3, 4}, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}, {3, 4, 1.0}, {4, 4, 1.0}});
    const auto dseed = SeedSet::make({0, 3}, 13);
    bool exact = true;
    for (auto method : {SamplingMethod::PerBike, SamplingMethod::Multinomial}) {
        const auto sim = simulate(dseed, det, 7, 100, 1, {method, 0});
        exact = exact && sim.mean_loads == propagate(dseed, det, 7).loads &&
                sim.std_loads == std::vector<double>(5, 0.0);
    }
    return verdict(fraction >= 0.99 && exact,
                   fmt("20 instances x 10000 trials; %.4f of %zu nodes within 4 SE (lowest instance %.4f); "
                       "deterministic graph %s",
                       fraction, total, min_instance, exact ? "exact" : "mismatch"));
}

Outcome lazy_equivalence() {
    int spread_mismatch = 0, large = 0, not_fewer = 0;
    std::uint64_t lazy_evals = 0, plain_evals = 0;
    for (int i = 0; i < 50; ++i) {
        ProblemInstance inst;
        const int n = uniform_int(20, 150);
        inst.graph = random_graph(n);
        inst.k = uniform_int(2, 10);
        inst.bikes_per_node = uniform_int(10, 100);
        inst.tau = uniform_int(1, 5);
        const auto plain = greedy_select(inst);
        const auto lazy = lazy_greedy_select(inst);
        if (std::abs(plain.spread - lazy.spread) > 1e-9) ++spread_mismatch;
        if (n >= 50 && inst.k >= 4) {
            ++large;
            if (lazy.evaluations >= plain.evaluations) ++not_fewer;
            lazy_evals += lazy.evaluations;
            plain_evals += plain.evaluations;
        }
    }
    return verdict(spread_mismatch == 0 && not_fewer == 0,
                   fmt("50 instances (square-root); %d spread mismatches; %d large instances, %d without "
                       "savings; evaluations %llu lazy vs %llu plain",
                       spread_mismatch, large, not_fewer, (unsigned long long)lazy_evals,
                       (unsigned long long)plain_evals));
}

// ---------------------------------------------------------------------------
// Published graphs, looked up in $BIKEFLOW_PUBLISHED_DIR as G_<s>_<eta>_<M|E>.<ext>.

std::optional<fs::path> published_dir() {
    const char* dir = std::getenv("BIKEFLOW_PUBLISHED_DIR");
    if (!dir || !*dir || !fs::is_directory(dir)) return std::nullopt;
    return fs::path(dir);
}

std::optional<MobilityGraph> published(const fs::path& dir, const std::string& name) {
    static std::map<std::string, MobilityGraph> cache;
    if (auto it = cache.find(name); it != cache.end()) return it->second;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto file = entry.path().filename().string();
        if (file.rfind(name + ".", 0) != 0) continue;
        if (file.find(".grid.json") != std::string::npos || file.find(".cert.json") != std::string::npos)
            continue;
        return cache[name] = load_any_graph(entry.path());
    }
    return std::nullopt;
}

double seconds_of(const std::function<void()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ProblemInstance sbs(const MobilityGraph& g, int k, int tau) {
    ProblemInstance inst;
    inst.graph = g;
    inst.k = k;
    inst.bikes_per_node = 100;
    inst.tau = tau;
    return inst;
}

Outcome table2(const fs::path& dir) {
    struct Row {
        const char* name;
        std::size_t n, m;
    };
    const Row rows[] = {{"G_100_0_M", 359, 1302},   {"G_100_0.01_M", 287, 954}, {"G_100_0.1_M", 139, 323},
                        {"G_500_0_M", 111, 1196},   {"G_500_0.01_M", 107, 1068}, {"G_500_0.1_M", 75, 272},
                        {"G_100_0_E", 1187, 5854},  {"G_100_0.01_E", 1099, 4986}, {"G_100_0.1_E", 222, 463},
                        {"G_500_0_E", 142, 2625},   {"G_500_0.01_E", 125, 1810}, {"G_500_0.1_E", 92, 229}};
    int found = 0, wrong = 0;
    std::string detail;
    for (const Row& r : rows) {
        const auto g = published(dir, r.name);
        if (!g) continue;
        ++found;
        if (g->node_count() != r.n || g->edge_count() != r.m) {
            ++wrong;
            detail += fmt(" %s %zu/%zu", r.name, g->node_count(), g->edge_count());
        }
    }
    if (found == 0) return {Verdict::Skip, "no published graphs found"};
    return verdict(wrong == 0, fmt("%d graphs, %d mismatched", found, wrong) + detail);
}

Outcome table3(const fs::path& dir) {
    struct Row {
        const char* name;
        double brute2, brute2_s, greedy2, greedy2_s, brute4, brute4_s, greedy4, greedy4_s;
    };
    const Row rows[] = {{"G_500_0.1_M", 32.6, 0.016, 32.6, 0.001, 43.6, 7.20, 42.8, 0.001},
                        {"G_500_0.01_M", 55.3, 0.073, 55.3, 0.002, 63.9, 71.36, 63.9, 0.005},
                        {"G_500_0_M", 57.3, 0.074, 57.3, 0.002, 64.1, 86.16, 63.8, 0.005},
                        {"G_100_0_M", 121.0, 1.787, 121.0, 0.021, 173.9, 18514.85, 123.0, 0.040},
                        {"G_100_0_E", 185.7, 99.00, 185.7, 0.347, -1, -1, 193.3, 0.555}};
    int checked = 0, wrong = 0;
    std::string detail;
    auto check = [&](const char* name, const char* label, double want, double limit_s, auto&& run) {
        if (want < 0) return;
        Solution sol;
        const double t = seconds_of([&] { sol = run(); });
        ++checked;
        const bool ok = std::abs(sol.spread - want) < 0.05 + 1e-9 && t <= 10 * std::max(limit_s, 0.01);
        if (!ok) {
            ++wrong;
            detail += fmt(" %s %s %.2f in %.3fs", name, label, sol.spread, t);
        }
    };
    SolverLimits limits;
    limits.threads = 0;
    limits.brute_force_cap = 1e12;
    for (const Row& r : rows) {
        const auto g = published(dir, r.name);
        if (!g) continue;
        const auto k2 = sbs(*g, 2, 1), k4 = sbs(*g, 4, 1);
        check(r.name, "brute k=2", r.brute2, r.brute2_s, [&] { return brute_force_select(k2, limits); });
        check(r.name, "greedy k=2", r.greedy2, r.greedy2_s, [&] { return greedy_select(k2, limits); });
        if (g->node_count() <= 120)
            check(r.name, "brute k=4", r.brute4, r.brute4_s, [&] { return brute_force_select(k4, limits); });
        check(r.name, "greedy k=4", r.greedy4, r.greedy4_s, [&] { return greedy_select(k4, limits); });
    }
    if (checked == 0) return {Verdict::Skip, "no published graphs found"};
    return verdict(wrong == 0, fmt("%d runs, %d off", checked, wrong) + detail);
}

Outcome scaling(const fs::path& dir) {
    const auto g = published(dir, "G_100_0_E");
    if (!g) return {Verdict::Skip, "G_100_0_E not found"};
    auto time_of = [&](int k, int tau) {
        const auto inst = sbs(*g, k, tau);
        double best = 1e300;
        for (int r = 0; r < 3; ++r) best = std::min(best, seconds_of([&] { greedy_select(inst); }));
        return best;
    };
    bool ok = true;
    std::string detail;
    for (int k : {2, 4, 8}) {
        const double a = time_of(k, 1), b = time_of(k, 10), c = time_of(k, 100);
        const double spread = std::max({a, b, c}) / std::min({a, b, c});
        ok = ok && spread < 2.0;
        detail += fmt(" k=%d tau-spread %.2fx;", k, spread);
    }
    const double t2 = time_of(2, 1), t32 = time_of(32, 1);
    const double ratio = t32 / (16 * t2);
    ok = ok && ratio <= 3.0 && ratio >= 1.0 / 3.0;
    detail += fmt(" k=32 vs 16x k=2: %.2f", ratio);
    return verdict(ok, detail);
}

Outcome morning_vs_evening(const fs::path& dir) {
    const auto m = published(dir, "G_100_0_M");
    const auto e = published(dir, "G_100_0_E");
    if (!m || !e) return {Verdict::Skip, "100 m morning/evening graphs not found"};
    auto covered = [](const MobilityGraph& g) {
        const auto sol = greedy_select(sbs(g, 4, 2));
        return std::count_if(sol.loads.loads.begin(), sol.loads.loads.end(), [](double x) { return x > 1e-12; });
    };
    const auto cm = covered(*m), ce = covered(*e);
    return verdict(ce > cm, fmt("nonzero cells morning %ld, evening %ld", long(cm), long(ce)));
}

}  // namespace

int main() {
    const auto dir = published_dir();
    auto skipped = [](const char*) { return Outcome{Verdict::Skip, "set BIKEFLOW_PUBLISHED_DIR to the published graphs"}; };
    struct Criterion {
        const char* title;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"conservation", conservation},
        {"monotonicity", monotonicity},
        {"submodularity", submodularity},
        {"approximation", approximation},
        {"reduction soundness", reductions},
        {"engine self-consistency", engine_consistency},
        {"Monte Carlo agreement", monte_carlo},
        {"lazy greedy equivalence", lazy_equivalence},
        {"published graph sizes", [&] { return dir ? table2(*dir) : skipped(""); }},
        {"published spreads", [&] { return dir ? table3(*dir) : skipped(""); }},
        {"scaling shape", [&] { return dir ? scaling(*dir) : skipped(""); }},
        {"morning vs evening coverage", [&] { return dir ? morning_vs_evening(*dir) : skipped(""); }},
    };
    int failed = 0, index = 0;
    for (const auto& c : criteria) {
        ++index;
        Outcome o;
        const double t = seconds_of([&] {
            try {
                o = c.run();
            } catch (const std::exception& e) {
                o = {Verdict::Fail, std::string("error: ") + e.what()};
            }
        });
        const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
        failed += o.verdict == Verdict::Fail;
        std::printf("criterion %2d %-28s %s  %s [%.1fs]\n", index, c.title, tag, o.detail.c_str(), t);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
