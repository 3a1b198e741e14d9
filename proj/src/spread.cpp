#include "bikeflow/spread.hpp"

#include "bikeflow/config.hpp"
#include "bikeflow/error.hpp"

#include <cmath>

namespace bikeflow {

SpreadObjective::SpreadObjective(Kind kind, std::optional<double> gamma)
    : kind_(kind), gamma_(gamma) {
    validate();
}

void SpreadObjective::validate() const {
    switch (kind_) {
    case Kind::Threshold:
        if (!gamma_ || !(*gamma_ > 0.0) || !std::isfinite(*gamma_))
            throw ValidationError("threshold objective needs a positive gamma");
        return;
    case Kind::SquareRoot:
        if (gamma_) throw ValidationError("gamma applies only to the threshold objective");
        return;
    }
    throw ValidationError("unknown objective kind");
}

SpreadObjective SpreadObjective::parse(const std::string& name, std::optional<double> gamma) {
    if (name == "threshold") return threshold(gamma ? *gamma : -1.0);
    if (name == "sqrt") {
        if (gamma) throw ValidationError("--gamma is only valid with the threshold objective");
        return square_root();
    }
    throw ValidationError("unknown objective '" + name + "' (expected threshold or sqrt)");
}

double SpreadObjective::gamma() const {
    if (kind_ != Kind::Threshold) throw ValidationError("square-root objective has no gamma");
    return *gamma_;
}

std::string SpreadObjective::name() const {
    return kind_ == Kind::Threshold ? "threshold" : "sqrt";
}

std::size_t t_spread(std::span<const double> loads, double gamma) {
    const double cut = gamma - Tolerances::threshold_slack;
    std::size_t count = 0;
    for (double x : loads) count += x >= cut;
    return count;
}

double s_spread(std::span<const double> loads) {
    double sum = 0.0;
    for (double x : loads) {
        if (x < 0.0) throw ValidationError("negative load in square-root spread");
        sum += std::sqrt(x);
    }
    return sum;
}

double evaluate(const SpreadObjective& objective, std::span<const double> loads) {
    objective.validate();
    if (objective.kind() == SpreadObjective::Kind::Threshold)
        return double(t_spread(loads, objective.gamma()));
    return s_spread(loads);
}

double evaluate_shifted(const SpreadObjective& objective, std::span<const double> base,
                        std::span<const double> column, double bikes) {
    if (base.size() != column.size()) throw ValidationError("column and load vector sizes differ");
    const std::size_t n = base.size();
    if (objective.kind() == SpreadObjective::Kind::Threshold) {
        const double cut = objective.gamma() - Tolerances::threshold_slack;
        std::size_t count = 0;
        for (std::size_t v = 0; v < n; ++v) count += (base[v] + bikes * column[v]) >= cut;
        return double(count);
    }
    double sum = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        const double x = base[v] + bikes * column[v];
        if (x < 0.0) throw ValidationError("negative load in square-root spread");
        sum += std::sqrt(x);
    }
    return sum;
}

}  // namespace bikeflow
