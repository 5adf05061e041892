#include "cns/step_control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cns {

void StepRule::validate() const {
    if (!(safety > 0.0 && safety <= 1.0)) {
        throw ConfigError("safety factor must lie in (0, 1], got " + std::to_string(safety));
    }
    if (mode == StepMode::fixed && !(fixed_tau > 0.0)) {
        throw ConfigError("fixed step must be positive, got " + std::to_string(fixed_tau));
    }
}

double step_damping() noexcept { return std::exp(-2.0); }

Decomposed level_norm(const CoeffTable& table, std::size_t k) {
    const MPScalar* best = &table.x[k];
    if (mpfr_cmpabs(table.y[k].raw(), best->raw()) > 0) best = &table.y[k];
    if (mpfr_cmpabs(table.z[k].raw(), best->raw()) > 0) best = &table.z[k];
    Decomposed d = decompose(*best);
    d.mantissa = std::fabs(d.mantissa);
    return d;
}

double inverse_root(const Decomposed& norm, std::size_t k) noexcept {
    const double kd = static_cast<double>(k);
    return std::exp2(-static_cast<double>(norm.exponent) / kd) * std::pow(norm.mantissa, -1.0 / kd);
}

StepEstimate optimal_stepsize(const CoeffTable& table, const StepRule& rule) {
    if (rule.mode != StepMode::variable) {
        throw UsageError("optimal_stepsize called with a fixed-step rule");
    }
    const auto n = static_cast<std::size_t>(table.order());
    if (n < 2) {
        throw ConfigError("variable stepsize needs order >= 2");
    }
    const Decomposed prev = level_norm(table, n - 1);
    const Decomposed last = level_norm(table, n);
    const double scale = rule.safety * step_damping();
    const bool prev_zero = prev.mantissa == 0.0;
    const bool last_zero = last.mantissa == 0.0;
    if (prev_zero && last_zero) {
        return {0.0, StepStatus::fixed_point};
    }
    if (prev_zero) return {scale * inverse_root(last, n), StepStatus::single_term};
    if (last_zero) return {scale * inverse_root(prev, n - 1), StepStatus::single_term};
    return {scale * std::min(inverse_root(prev, n - 1), inverse_root(last, n)), StepStatus::ok};
}

double fixed_stepsize(const StepRule& rule) {
    if (rule.mode != StepMode::fixed) {
        throw UsageError("fixed_stepsize called with a variable-step rule");
    }
    return rule.fixed_tau;
}

}  // namespace cns
