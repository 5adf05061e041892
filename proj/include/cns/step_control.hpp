#pragma once

#include "cns/lorenz_taylor.hpp"

namespace cns {

enum class StepMode { variable, fixed };

inline constexpr double kSafetyFactor = 0.993;
inline constexpr double kDefaultFixedTau = 0.01;

struct StepRule {
    StepMode mode = StepMode::variable;
    double fixed_tau = kDefaultFixedTau;
    double safety = kSafetyFactor;

    /// Throws ConfigError unless safety in (0, 1] and fixed_tau > 0.
    void validate() const;

    [[nodiscard]] static StepRule variable() { return {}; }
    [[nodiscard]] static StepRule fixed(double tau) { return {StepMode::fixed, tau, kSafetyFactor}; }
};

/// 1/e^2, the damping applied on top of the safety factor.
[[nodiscard]] double step_damping() noexcept;

enum class StepStatus {
    ok,           // both trailing terms used
    single_term,  // one trailing norm was zero; the other alone set tau
    fixed_point,  // both trailing norms zero: series is constant
};

struct StepEstimate {
    double tau;  // 0 when status == fixed_point
    StepStatus status;
};

/// Infinity norm of coefficient level k, normalised into double range.
[[nodiscard]] Decomposed level_norm(const CoeffTable& table, std::size_t k);

/// (1/norm)^(1/k) evaluated as 2^(-e/k) * m^(-1/k).
[[nodiscard]] double inverse_root(const Decomposed& norm, std::size_t k) noexcept;

/// Stepsize from the last two Taylor terms:
///   tau = safety/e^2 * min((1/|X_{N-1}|)^(1/(N-1)), (1/|X_N|)^(1/N)).
/// Requires order >= 2 and a variable-mode rule.
[[nodiscard]] StepEstimate optimal_stepsize(const CoeffTable& table, const StepRule& rule);

/// Requires a fixed-mode rule.
[[nodiscard]] double fixed_stepsize(const StepRule& rule);

}  // namespace cns
