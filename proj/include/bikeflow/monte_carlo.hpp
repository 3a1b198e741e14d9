#pragma once

#include "bikeflow/diffusion.hpp"
#include "bikeflow/mobility_graph.hpp"

#include <cstdint>
#include <vector>

namespace bikeflow {

enum class SamplingMethod {
    PerBike,      // every bike draws its next node independently
    Multinomial,  // one multinomial draw per node via chained binomials
};

struct SimulationOptions {
    SamplingMethod method = SamplingMethod::PerBike;
    unsigned threads = 1;
};

struct SimulationResult {
    std::vector<double> mean_loads;
    std::vector<double> std_loads;  // sample standard deviation across trials
    std::uint64_t trials = 0;
    std::uint64_t rng_seed = 0;
    std::int64_t total_bikes = 0;
    // Mean over trials of the square-root spread of the realized loads.
    double mean_realized_sqrt_spread = 0.0;
};

// Seed of the RNG stream used by one trial.
std::uint64_t trial_stream_seed(std::uint64_t rng_seed, std::uint64_t trial);

// Integer bike counts per node after tau steps of one trial.
std::vector<std::int64_t> simulate_trial(const SeedSet& seed, const MobilityGraph& g, int tau,
                                         std::uint64_t stream_seed,
                                         SamplingMethod method = SamplingMethod::PerBike);

/// Moves k*L atomic bikes for tau steps, `trials` times. Each trial draws
/// from its own stream, so results do not depend on the thread count.
SimulationResult simulate(const SeedSet& seed, const MobilityGraph& g, int tau,
                          std::uint64_t trials, std::uint64_t rng_seed,
                          const SimulationOptions& options = {});

struct ComparisonReport {
    std::vector<double> z_scores;  // (mean - expected) / standard error
    double max_abs_deviation = 0.0;
    double max_abs_z = 0.0;
    double fraction_within_4se = 0.0;
    bool low_confidence = false;  // fewer than kMinConfidentTrials trials
    double gamma = 1.0;
    double sqrt_spread_of_mean = 0.0;
    double sqrt_spread_of_expected = 0.0;
    double mean_realized_sqrt_spread = 0.0;
    double threshold_spread_of_mean = 0.0;
    double threshold_spread_of_expected = 0.0;

    static constexpr std::uint64_t kMinConfidentTrials = 30;
};

/// z-scores use std/sqrt(trials); a zero standard error gives z = 0 when the
/// deviation is within Tolerances::path_agreement and +-inf otherwise.
ComparisonReport compare(const SimulationResult& sim, const LoadVector& expected, double gamma = 1.0);

}  // namespace bikeflow
