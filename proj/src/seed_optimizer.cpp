#include "bikeflow/seed_optimizer.hpp"

#include "bikeflow/error.hpp"
#include "bikeflow/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>

namespace bikeflow {

void ProblemInstance::validate() const {
    const std::size_t n = graph.node_count();
    if (k < 1) throw ValidationError("seed size k must be at least 1");
    if (std::size_t(k) > n)
        throw ValidationError("seed size k=" + std::to_string(k) +
                              " exceeds the number of nodes n=" + std::to_string(n));
    if (bikes_per_node < 1) throw ValidationError("bikes per seed node L must be at least 1");
    if (tau < 0) throw ValidationError("number of steps tau must be non-negative");
    objective.validate();
    if (base_loads) throw ValidationError("initial loads on non-seed nodes are not supported");
}

std::string to_string(Algorithm a) {
    switch (a) {
    case Algorithm::Greedy: return "greedy";
    case Algorithm::Lazy: return "lazy";
    case Algorithm::BruteForce: return "brute";
    case Algorithm::Random: return "random";
    case Algorithm::TopOutDegree: return "degree";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& name) {
    for (Algorithm a : {Algorithm::Greedy, Algorithm::Lazy, Algorithm::BruteForce, Algorithm::Random,
                        Algorithm::TopOutDegree})
        if (to_string(a) == name) return a;
    throw ValidationError("unknown algorithm '" + name + "'");
}

double subset_count(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i) c = c * double(n - k + i) / double(i);
    return std::round(c);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Recomputes the reported loads and spread from the seed alone.
void finish(Solution& s, const ProblemInstance& inst, Clock::time_point start) {
    s.loads = propagate(s.seed, inst.graph, inst.tau);
    s.spread = evaluate(inst.objective, s.loads.loads);
    s.wall_time_s = seconds_since(start);
}

// Best candidate under (value desc, index asc), independent of the order in
// which workers produced the values.
struct Best {
    double value = -std::numeric_limits<double>::infinity();
    NodeIndex node = std::numeric_limits<NodeIndex>::max();

    void offer(double v, NodeIndex u) {
        if (v > value || (v == value && u < node)) {
            value = v;
            node = u;
        }
    }
};

}  // namespace

Solution greedy_select(const ProblemInstance& inst, const SolverLimits& limits) {
    const auto start = Clock::now();
    inst.validate();
    const std::size_t n = inst.graph.node_count();
    const unsigned threads = resolve_threads(limits.threads);
    const ColumnProvider columns(inst.graph, inst.tau, limits.dense_threshold);
    const double bikes = inst.bikes_per_node;

    Solution sol;
    sol.algorithm = Algorithm::Greedy;
    sol.seed = SeedSet{{}, inst.bikes_per_node};
    LoadVector loads{std::vector<double>(n, 0.0), inst.tau};
    double current = evaluate(inst.objective, loads.loads);

    std::vector<double> values(n);
    std::vector<std::vector<double>> scratch(threads);
    for (int iter = 0; iter < inst.k; ++iter) {
        detail::parallel_chunks(n, threads, [&](std::size_t begin, std::size_t end, unsigned w) {
            for (std::size_t u = begin; u < end; ++u) {
                if (sol.seed.contains(u)) continue;
                values[u] = evaluate_shifted(inst.objective, loads.loads,
                                             columns.column(u, scratch[w]), bikes);
            }
        });
        Best best;
        for (NodeIndex u = 0; u < n; ++u)
            if (!sol.seed.contains(u)) best.offer(values[u] - current, u);
        sol.evaluations += n - sol.seed.size();

        std::vector<double> buf;
        loads = linearity_decompose(loads, sol.seed, best.node, columns.column(best.node, buf));
        sol.seed = sol.seed.with(best.node);
        sol.gains.push_back(best.value);
        current = values[best.node];
        sol.trajectory.push_back(current);
    }
    finish(sol, inst, start);
    return sol;
}

Solution lazy_greedy_select(const ProblemInstance& inst, const SolverLimits& limits) {
    const auto start = Clock::now();
    inst.validate();
    const std::size_t n = inst.graph.node_count();
    const unsigned threads = resolve_threads(limits.threads);
    const ColumnProvider columns(inst.graph, inst.tau, limits.dense_threshold);
    const double bikes = inst.bikes_per_node;

    Solution sol;
    sol.algorithm = Algorithm::Lazy;
    sol.seed = SeedSet{{}, inst.bikes_per_node};
    LoadVector loads{std::vector<double>(n, 0.0), inst.tau};
    double current = evaluate(inst.objective, loads.loads);

    struct Entry {
        double gain;
        NodeIndex node;
        int fresh_at;  // iteration at which `gain` was computed
    };
    auto lower = [](const Entry& a, const Entry& b) {
        return a.gain != b.gain ? a.gain < b.gain : a.node > b.node;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(lower)> heap(lower);

    {
        std::vector<double> initial(n);
        std::vector<std::vector<double>> scratch(threads);
        detail::parallel_chunks(n, threads, [&](std::size_t begin, std::size_t end, unsigned w) {
            for (std::size_t u = begin; u < end; ++u)
                initial[u] = evaluate_shifted(inst.objective, loads.loads,
                                              columns.column(u, scratch[w]), bikes);
        });
        sol.evaluations += n;
        for (NodeIndex u = 0; u < n; ++u) heap.push({initial[u] - current, u, 0});
    }

    std::vector<double> buf;
    for (int iter = 0; iter < inst.k; ++iter) {
        for (;;) {
            Entry top = heap.top();
            heap.pop();
            if (top.fresh_at == iter) {
                loads = linearity_decompose(loads, sol.seed, top.node, columns.column(top.node, buf));
                sol.seed = sol.seed.with(top.node);
                sol.gains.push_back(top.gain);
                current = evaluate(inst.objective, loads.loads);
                sol.trajectory.push_back(current);
                break;
            }
            const double value =
                evaluate_shifted(inst.objective, loads.loads, columns.column(top.node, buf), bikes);
            ++sol.evaluations;
            heap.push({value - current, top.node, iter});
        }
    }
    finish(sol, inst, start);
    return sol;
}

Solution brute_force_select(const ProblemInstance& inst, const SolverLimits& limits) {
    const auto start = Clock::now();
    inst.validate();
    const std::size_t n = inst.graph.node_count();
    const std::size_t k = std::size_t(inst.k);
    const double subsets = subset_count(n, k);
    if (subsets > limits.brute_force_cap) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "brute force needs C(%zu, %zu) = %.3g spread evaluations, above the cap of %.3g",
                      n, k, subsets, limits.brute_force_cap);
        throw InfeasibleError(buf);
    }
    const unsigned threads = resolve_threads(limits.threads);
    const ColumnProvider columns(inst.graph, inst.tau, limits.dense_threshold);
    const double bikes = inst.bikes_per_node;

    // One task per first element; each keeps its lexicographically first best.
    struct TaskBest {
        double value = -std::numeric_limits<double>::infinity();
        std::vector<NodeIndex> seed;
        std::uint64_t evaluations = 0;
    };
    const std::size_t first_count = n - k + 1;
    std::vector<TaskBest> results(first_count);

    detail::parallel_for(first_count, threads, [&](std::size_t first, unsigned) {
        TaskBest& best = results[first];
        // partial[d]: loads of the first d chosen nodes.
        std::vector<std::vector<double>> partial(k, std::vector<double>(n, 0.0));
        std::vector<double> scratch;
        std::vector<NodeIndex> chosen(k);
        chosen[0] = first;

        auto push = [&](std::size_t depth, NodeIndex u) {
            const auto col = columns.column(u, scratch);
            auto& dst = partial[depth + 1];
            const auto& src = partial[depth];
            for (std::size_t v = 0; v < n; ++v) dst[v] = src[v] + bikes * col[v];
        };

        // Recursive enumeration; the last element is scored without copying.
        auto recurse = [&](auto&& self, std::size_t depth, NodeIndex from) -> void {
            if (depth + 1 == k) {
                for (NodeIndex u = from; u < n; ++u) {
                    const double value = evaluate_shifted(inst.objective, partial[depth],
                                                          columns.column(u, scratch), bikes);
                    ++best.evaluations;
                    if (value > best.value) {
                        best.value = value;
                        chosen[depth] = u;
                        best.seed = chosen;
                    }
                }
                return;
            }
            for (NodeIndex u = from; u + (k - depth) <= n; ++u) {
                chosen[depth] = u;
                push(depth, u);
                self(self, depth + 1, u + 1);
            }
        };

        if (k == 1) {
            const double value =
                evaluate_shifted(inst.objective, partial[0], columns.column(first, scratch), bikes);
            best = {value, {first}, 1};
            return;
        }
        push(0, first);
        recurse(recurse, 1, first + 1);
    });

    TaskBest overall;
    Solution sol;
    for (const TaskBest& r : results) {
        sol.evaluations += r.evaluations;
        if (r.value > overall.value) overall = r;
    }
    sol.algorithm = Algorithm::BruteForce;
    sol.seed = SeedSet::make(overall.seed, inst.bikes_per_node);
    finish(sol, inst, start);
    return sol;
}

Solution baseline_select(const ProblemInstance& inst, Baseline strategy, std::uint64_t rng_seed,
                         const SolverLimits&) {
    const auto start = Clock::now();
    inst.validate();
    const std::size_t n = inst.graph.node_count();
    std::vector<NodeIndex> order(n);
    std::iota(order.begin(), order.end(), NodeIndex{0});

    Solution sol;
    if (strategy == Baseline::Random) {
        sol.algorithm = Algorithm::Random;
        std::mt19937_64 rng(rng_seed);
        for (std::size_t i = 0; i < std::size_t(inst.k); ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, n - 1);
            std::swap(order[i], order[pick(rng)]);
        }
    } else {
        sol.algorithm = Algorithm::TopOutDegree;
        std::stable_sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) {
            return inst.graph.out_arcs(a).size() > inst.graph.out_arcs(b).size();
        });
    }
    order.resize(std::size_t(inst.k));
    sol.seed = SeedSet::make(order, inst.bikes_per_node);
    sol.evaluations = 1;
    finish(sol, inst, start);
    return sol;
}

Solution solve(const ProblemInstance& inst, Algorithm algorithm, const SolverLimits& limits,
               std::uint64_t rng_seed) {
    switch (algorithm) {
    case Algorithm::Greedy: return greedy_select(inst, limits);
    case Algorithm::Lazy: return lazy_greedy_select(inst, limits);
    case Algorithm::BruteForce: return brute_force_select(inst, limits);
    case Algorithm::Random: return baseline_select(inst, Baseline::Random, rng_seed, limits);
    case Algorithm::TopOutDegree: return baseline_select(inst, Baseline::TopOutDegree, rng_seed, limits);
    }
    throw ValidationError("unknown algorithm");
}

}  // namespace bikeflow
