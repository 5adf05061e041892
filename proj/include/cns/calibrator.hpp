#pragma once

// Critical predictable time and (N, K) calibration.

#include "cns/integrator.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace cns {

inline constexpr int kRequiredDigits = 30;
inline constexpr int kTcKOffset = 20;

struct AgreementCriterion {
    int required_digits = kRequiredDigits;
    double grid = 1.0;

    void validate() const;
};

/// Number of matching significant digits between two points:
///   min_c floor(-log10(|a_c - b_c| / max(|a_c|, |b_c|, 1)))
/// clamped to [0, min precision]. Values within 1e-9 of an integer digit
/// count are taken at that integer.
[[nodiscard]] int digits_agreement(const Point3& a, const Point3& b);

struct TcResult {
    double tc = 0.0;         // last grid time that still agreed
    bool decoupled = false;  // false: agreed through the whole horizon
    std::optional<double> first_failure;
};

/// Called at every compared grid time with (t, digits); return false to stop.
using AgreementVisitor = std::function<bool(double, int)>;

/// Runs both configurations side by side on the comparison grid up to
/// `horizon`, calling `visit` after each grid comparison.
void lockstep_compare(const RunConfig& a, const RunConfig& b, double grid, double horizon,
                      const AgreementVisitor& visit);

/// Scans forward until the runs stop sharing `required_digits` digits.
/// The horizon is cfg_a.t_end. Throws UsageError if the ICs differ.
[[nodiscard]] TcResult measure_tc(const RunConfig& cfg_a, const RunConfig& cfg_b, const AgreementCriterion& crit);

struct TcFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<std::pair<double, double>> points;
    double residual = 0.0;  // root-mean-square residual

    [[nodiscard]] double at(double abscissa) const noexcept { return slope * abscissa + intercept; }
};

/// Ordinary least squares over >= 3 points. Throws ConfigError on too few
/// points or identical abscissae.
[[nodiscard]] TcFit fit_linear(std::vector<std::pair<double, double>> points);

struct OrderPrecision {
    int order;
    int digits;
};

/// K = ceil((1+r)(T - b_K)/a_K), N = ceil((1+r)(T - b_N)/a_N).
[[nodiscard]] OrderPrecision estimate_nk(double t_target, const TcFit& fit_n, const TcFit& fit_k, double reserve);

/// Partner order for a Tc-N pair: N + max(10, ceil(N/10)).
[[nodiscard]] int partner_order(int order) noexcept;

struct SweepPoint {
    int abscissa;  // N or K
    TcResult tc;
};

using SweepProgress = std::function<void(const SweepPoint&)>;

/// Tc for each K in `digits`, pairing K with K + 20 at the base order.
[[nodiscard]] std::vector<SweepPoint> sweep_tc_k(const RunConfig& base, const std::vector<int>& digits,
                                                 const AgreementCriterion& crit, const SweepProgress& progress = {});

/// Tc for each N in `orders`, pairing N with partner_order(N) at the base
/// precision.
[[nodiscard]] std::vector<SweepPoint> sweep_tc_n(const RunConfig& base, const std::vector<int>& orders,
                                                 const AgreementCriterion& crit, const SweepProgress& progress = {});

/// Fit over the sweep; points that never decoupled are excluded.
[[nodiscard]] TcFit fit_sweep(const std::vector<SweepPoint>& sweep);

}  // namespace cns
