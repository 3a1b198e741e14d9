#pragma once

#include <optional>
#include <span>
#include <string>

namespace bikeflow {

/// Scoring rule for a load vector: count of nodes holding at least gamma
/// bikes (Threshold), or the sum of square roots of the loads (SquareRoot).
class SpreadObjective {
  public:
    enum class Kind { Threshold, SquareRoot };

    // Throws ValidationError unless gamma is given and positive exactly
    // when kind is Threshold.
    SpreadObjective(Kind kind, std::optional<double> gamma = std::nullopt);

    static SpreadObjective threshold(double gamma) { return {Kind::Threshold, gamma}; }
    static SpreadObjective square_root() { return {Kind::SquareRoot}; }
    // "threshold" or "sqrt".
    static SpreadObjective parse(const std::string& name, std::optional<double> gamma);

    Kind kind() const noexcept { return kind_; }
    double gamma() const;  // Threshold only
    std::string name() const;

    void validate() const;

  private:
    Kind kind_;
    std::optional<double> gamma_;
};

// Nodes with load >= gamma (minus Tolerances::threshold_slack).
std::size_t t_spread(std::span<const double> loads, double gamma);

// Sum of square roots. Throws ValidationError on a negative load.
double s_spread(std::span<const double> loads);

double evaluate(const SpreadObjective& objective, std::span<const double> loads);

// evaluate(objective, base + bikes * column) without materializing the sum.
// Bit-identical to evaluating the materialized vector.
double evaluate_shifted(const SpreadObjective& objective, std::span<const double> base,
                        std::span<const double> column, double bikes);

}  // namespace bikeflow
