#pragma once

#include <cstddef>
#include <string_view>

namespace bikeflow {

inline constexpr std::string_view kVersion = "1.0.0";

// Numeric tolerances shared by every module.
struct Tolerances {
    // |sum_v p(u,v) - 1| allowed per node; smaller deviations are renormalized.
    static constexpr double unity = 1e-9;
    // Per-entry agreement between the two propagation paths.
    static constexpr double path_agreement = 1e-9;
    // Total-load drift allowed after long propagations.
    static constexpr double conservation = 1e-6;
    // Slack on the closed inequality load >= gamma.
    static constexpr double threshold_slack = 1e-9;
    // Slack on monotonicity / submodularity / approximation checks.
    static constexpr double order_slack = 1e-9;
};

struct SolverLimits {
    // Dense tau-step operator is used while n stays at or below this size.
    std::size_t dense_threshold = 5000;
    // Brute force refuses when C(n, k) exceeds this many subsets.
    double brute_force_cap = 1e7;
    // 0 means "use hardware concurrency".
    unsigned threads = 1;
};

// Resolves a thread-count hint; BIKEFLOW_THREADS overrides when set.
unsigned resolve_threads(unsigned hint);

}  // namespace bikeflow
