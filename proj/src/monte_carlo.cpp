#include "bikeflow/monte_carlo.hpp"

#include "bikeflow/config.hpp"
#include "bikeflow/error.hpp"
#include "bikeflow/parallel.hpp"
#include "bikeflow/spread.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace bikeflow {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

// Cumulative out-distributions in CSR layout.
class Sampler {
  public:
    explicit Sampler(const MobilityGraph& g) : offsets_(g.node_count() + 1, 0) {
        for (NodeIndex u = 0; u < g.node_count(); ++u) {
            double acc = 0.0;
            for (const Arc& a : g.out_arcs(u)) {
                acc += a.probability;
                targets_.push_back(a.node);
                cumulative_.push_back(acc);
                probs_.push_back(a.probability);
            }
            offsets_[u + 1] = targets_.size();
        }
    }

    NodeIndex draw(NodeIndex u, std::mt19937_64& rng) const {
        const auto first = cumulative_.begin() + std::ptrdiff_t(offsets_[u]);
        const auto last = cumulative_.begin() + std::ptrdiff_t(offsets_[u + 1]);
        auto it = std::upper_bound(first, last, uniform01(rng));
        if (it == last) --it;  // rounding in the cumulative sum
        return targets_[std::size_t(it - cumulative_.begin())];
    }

    void scatter_multinomial(NodeIndex u, std::int64_t count, std::vector<std::int64_t>& into,
                             std::mt19937_64& rng) const {
        std::int64_t remaining = count;
        double mass_left = 1.0;
        for (std::size_t i = offsets_[u]; i < offsets_[u + 1] && remaining > 0; ++i) {
            std::int64_t x = remaining;
            if (i + 1 < offsets_[u + 1]) {
                const double p = std::clamp(probs_[i] / mass_left, 0.0, 1.0);
                x = std::binomial_distribution<std::int64_t>(remaining, p)(rng);
            }
            into[targets_[i]] += x;
            remaining -= x;
            mass_left -= probs_[i];
        }
    }

  private:
    std::vector<std::size_t> offsets_;
    std::vector<NodeIndex> targets_;
    std::vector<double> cumulative_;
    std::vector<double> probs_;
};

std::vector<std::int64_t> run_trial(const SeedSet& seed, const MobilityGraph& g, const Sampler& s,
                                    int tau, std::uint64_t stream_seed, SamplingMethod method) {
    const std::size_t n = g.node_count();
    std::vector<std::int64_t> counts(n, 0), next(n, 0);
    for (NodeIndex u : seed.nodes) counts.at(u) = seed.bikes_per_node;
    const std::int64_t total = std::int64_t(seed.nodes.size()) * seed.bikes_per_node;

    std::mt19937_64 rng(stream_seed);
    for (int t = 0; t < tau; ++t) {
        std::fill(next.begin(), next.end(), 0);
        for (NodeIndex u = 0; u < n; ++u) {
            if (counts[u] == 0) continue;
            if (method == SamplingMethod::PerBike) {
                for (std::int64_t b = 0; b < counts[u]; ++b) ++next[s.draw(u, rng)];
            } else {
                s.scatter_multinomial(u, counts[u], next, rng);
            }
        }
        counts.swap(next);
    }
    std::int64_t check = 0;
    for (auto c : counts) check += c;
    if (check != total) throw Error("simulation lost bikes: " + std::to_string(check) + " of " +
                                    std::to_string(total));
    return counts;
}

}  // namespace

std::uint64_t trial_stream_seed(std::uint64_t rng_seed, std::uint64_t trial) {
    return splitmix64(splitmix64(rng_seed) ^ splitmix64(trial + 0x632be59bd9b4e019ULL));
}

std::vector<std::int64_t> simulate_trial(const SeedSet& seed, const MobilityGraph& g, int tau,
                                         std::uint64_t stream_seed, SamplingMethod method) {
    if (tau < 0) throw ValidationError("number of steps must be non-negative");
    return run_trial(seed, g, Sampler(g), tau, stream_seed, method);
}

SimulationResult simulate(const SeedSet& seed, const MobilityGraph& g, int tau,
                          std::uint64_t trials, std::uint64_t rng_seed,
                          const SimulationOptions& options) {
    if (trials < 1) throw ValidationError("simulation needs at least one trial");
    if (tau < 0) throw ValidationError("number of steps must be non-negative");
    for (NodeIndex u : seed.nodes)
        if (u >= g.node_count()) throw ValidationError("seed node outside the graph");

    const std::size_t n = g.node_count();
    const Sampler sampler(g);
    const unsigned threads = resolve_threads(options.threads);

    // Integer accumulators make the merge exact and order-independent.
    std::vector<std::vector<std::int64_t>> sums(threads, std::vector<std::int64_t>(n, 0));
    std::vector<std::vector<std::int64_t>> squares(threads, std::vector<std::int64_t>(n, 0));
    std::vector<double> realized_spread(trials);

    detail::parallel_chunks(trials, threads, [&](std::size_t begin, std::size_t end, unsigned w) {
        std::vector<double> as_real(n);
        for (std::size_t t = begin; t < end; ++t) {
            const auto counts =
                run_trial(seed, g, sampler, tau, trial_stream_seed(rng_seed, t), options.method);
            for (std::size_t v = 0; v < n; ++v) {
                sums[w][v] += counts[v];
                squares[w][v] += counts[v] * counts[v];
                as_real[v] = double(counts[v]);
            }
            realized_spread[t] = s_spread(as_real);
        }
    });

    SimulationResult r;
    r.trials = trials;
    r.rng_seed = rng_seed;
    r.total_bikes = std::int64_t(seed.nodes.size()) * seed.bikes_per_node;
    r.mean_loads.assign(n, 0.0);
    r.std_loads.assign(n, 0.0);
    const auto T = std::int64_t(trials);
    for (std::size_t v = 0; v < n; ++v) {
        std::int64_t s = 0, sq = 0;
        for (unsigned w = 0; w < threads; ++w) {
            s += sums[w][v];
            sq += squares[w][v];
        }
        r.mean_loads[v] = double(s) / double(T);
        if (T > 1) {
            // T * sum(x^2) - (sum x)^2 is exact in integers.
            const double numer = double(T * sq - s * s);
            r.std_loads[v] = std::sqrt(std::max(0.0, numer / (double(T) * double(T - 1))));
        }
    }
    double acc = 0.0;
    for (double x : realized_spread) acc += x;
    r.mean_realized_sqrt_spread = acc / double(T);
    return r;
}

ComparisonReport compare(const SimulationResult& sim, const LoadVector& expected, double gamma) {
    const std::size_t n = sim.mean_loads.size();
    if (expected.size() != n || sim.std_loads.size() != n)
        throw ValidationError("simulation and expected loads differ in size");
    ComparisonReport rep;
    rep.gamma = gamma;
    rep.low_confidence = sim.trials < ComparisonReport::kMinConfidentTrials;
    rep.z_scores.resize(n);
    std::size_t within = 0;
    const double root_trials = std::sqrt(double(sim.trials));
    for (std::size_t v = 0; v < n; ++v) {
        const double diff = sim.mean_loads[v] - expected.loads[v];
        const double se = sim.std_loads[v] / root_trials;
        double z;
        if (se > 0.0)
            z = diff / se;
        else if (std::abs(diff) <= Tolerances::path_agreement)
            z = 0.0;
        else
            z = diff > 0 ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
        rep.z_scores[v] = z;
        rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(diff));
        rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
        within += std::abs(z) <= 4.0;
    }
    rep.fraction_within_4se = n ? double(within) / double(n) : 1.0;
    rep.sqrt_spread_of_mean = s_spread(sim.mean_loads);
    rep.sqrt_spread_of_expected = s_spread(expected.loads);
    rep.mean_realized_sqrt_spread = sim.mean_realized_sqrt_spread;
    rep.threshold_spread_of_mean = double(t_spread(sim.mean_loads, gamma));
    rep.threshold_spread_of_expected = double(t_spread(expected.loads, gamma));
    return rep;
}

}  // namespace bikeflow
