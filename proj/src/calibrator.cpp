#include "cns/calibrator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cns {

void AgreementCriterion::validate() const {
    if (required_digits < 1) throw ConfigError("required digits must be >= 1");
    if (!(grid > 0.0)) throw ConfigError("comparison grid spacing must be > 0");
}

namespace {

// -log10 of a positive value, valid far outside double range.
double neg_log10(const MPScalar& v) {
    const Decomposed d = decompose(v);
    return -(std::log10(std::fabs(d.mantissa)) + static_cast<double>(d.exponent) * std::numbers::ln2 / std::numbers::ln10);
}

int component_digits(const MPScalar& a, const MPScalar& b, const PrecisionCtx& wide, int clamp) {
    const MPScalar aw = a.rebind(wide);
    const MPScalar bw = b.rebind(wide);
    MPScalar diff = abs(aw - bw);
    if (diff.is_zero()) return clamp;
    MPScalar scale(wide, 1L);
    if (mpfr_cmpabs(aw.raw(), scale.raw()) > 0) scale = abs(aw);
    if (mpfr_cmpabs(bw.raw(), scale.raw()) > 0) scale = abs(bw);
    mpfr_div(diff.raw(), diff.raw(), scale.raw(), MPFR_RNDN);
    const double m = std::floor(neg_log10(diff) + 1e-9);
    return static_cast<int>(std::clamp(m, 0.0, static_cast<double>(clamp)));
}

}  // namespace

int digits_agreement(const Point3& a, const Point3& b) {
    const int clamp = std::min(a.x.digits(), b.x.digits());
    const PrecisionCtx wide(std::max(a.x.digits(), b.x.digits()));
    return std::min({component_digits(a.x, b.x, wide, clamp), component_digits(a.y, b.y, wide, clamp),
                     component_digits(a.z, b.z, wide, clamp)});
}

void lockstep_compare(const RunConfig& a, const RunConfig& b, double grid, double horizon,
                      const AgreementVisitor& visit) {
    if (a.ic != b.ic) throw UsageError("paired runs must share initial conditions");
    if (!(grid > 0.0)) throw ConfigError("comparison grid spacing must be > 0");
    Integrator ia(a);
    Integrator ib(b);
    for (std::uint64_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * grid;
        if (t > horizon) break;
        MPScalar ta = ia.to_mp(grid);
        MPScalar tb = ib.to_mp(grid);
        mpfr_mul_ui(ta.raw(), ta.raw(), static_cast<unsigned long>(k), MPFR_RNDN);
        mpfr_mul_ui(tb.raw(), tb.raw(), static_cast<unsigned long>(k), MPFR_RNDN);
        const Point3 pa = ia.advance_to(ta);
        const Point3 pb = ib.advance_to(tb);
        if (!visit(t, digits_agreement(pa, pb))) break;
    }
}

TcResult measure_tc(const RunConfig& cfg_a, const RunConfig& cfg_b, const AgreementCriterion& crit) {
    crit.validate();
    TcResult r;
    lockstep_compare(cfg_a, cfg_b, crit.grid, cfg_a.t_end, [&](double t, int digits) {
        if (digits >= crit.required_digits) {
            r.tc = t;
            return true;
        }
        r.decoupled = true;
        r.first_failure = t;
        return false;
    });
    return r;
}

TcFit fit_linear(std::vector<std::pair<double, double>> points) {
    if (points.size() < 3) {
        throw ConfigError(fmt::format("a linear fit needs at least 3 points, got {}", points.size()));
    }
    const double n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [px, py] : points) {
        mx += px;
        my += py;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [px, py] : points) {
        sxx += (px - mx) * (px - mx);
        sxy += (px - mx) * (py - my);
    }
    if (sxx == 0.0) throw ConfigError("degenerate fit: all abscissae coincide");
    TcFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (const auto& [px, py] : points) {
        const double e = py - fit.at(px);
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / n);
    fit.points = std::move(points);
    return fit;
}

OrderPrecision estimate_nk(double t_target, const TcFit& fit_n, const TcFit& fit_k, double reserve) {
    if (!(reserve >= 0.0 && reserve <= 0.5)) {
        throw ConfigError(fmt::format("reserve must lie in [0, 0.5], got {}", reserve));
    }
    if (!(fit_n.slope > 0.0) || !(fit_k.slope > 0.0)) {
        throw ConfigError("Tc fits must have positive slope");
    }
    if (!(t_target > fit_n.intercept) || !(t_target > fit_k.intercept)) {
        throw ConfigError(fmt::format("target time {} is not above the fitted intercepts", t_target));
    }
    const double k = std::ceil((1.0 + reserve) * (t_target - fit_k.intercept) / fit_k.slope);
    const double n = std::ceil((1.0 + reserve) * (t_target - fit_n.intercept) / fit_n.slope);
    return {static_cast<int>(n), static_cast<int>(k)};
}

int partner_order(int order) noexcept { return order + std::max(10, (order + 9) / 10); }

std::vector<SweepPoint> sweep_tc_k(const RunConfig& base, const std::vector<int>& digits,
                                   const AgreementCriterion& crit, const SweepProgress& progress) {
    std::vector<SweepPoint> out;
    for (const int k : digits) {
        RunConfig a = base;
        a.digits = k;
        RunConfig b = base;
        b.digits = k + kTcKOffset;
        out.push_back({k, measure_tc(a, b, crit)});
        if (progress) progress(out.back());
    }
    return out;
}

std::vector<SweepPoint> sweep_tc_n(const RunConfig& base, const std::vector<int>& orders,
                                   const AgreementCriterion& crit, const SweepProgress& progress) {
    std::vector<SweepPoint> out;
    for (const int n : orders) {
        RunConfig a = base;
        a.order = n;
        RunConfig b = base;
        b.order = partner_order(n);
        out.push_back({n, measure_tc(a, b, crit)});
        if (progress) progress(out.back());
    }
    return out;
}

TcFit fit_sweep(const std::vector<SweepPoint>& sweep) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : sweep) {
        if (p.tc.decoupled) pts.emplace_back(p.abscissa, p.tc.tc);
    }
    return fit_linear(std::move(pts));
}

}  // namespace cns
