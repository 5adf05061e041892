#include "cns/step_control.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cns;

namespace {

CoeffTable tail_table(const PrecisionCtx& ctx, int order, const char* prev, const char* last) {
    CoeffTable t(ctx, order);
    t.x[order - 1] = parse(prev, ctx);
    t.y[order - 1] = -parse(prev, ctx);
    t.z[order] = parse(last, ctx);
    t.x[order] = div_uint(parse(last, ctx), 2);
    return t;
}

// Same formula evaluated entirely in multiple precision.
double mp_stepsize(const CoeffTable& t, double safety) {
    const int n = t.order();
    const PrecisionCtx wide(60);
    auto root = [&](int k) {
        MPScalar norm = abs(t.x[k]);
        for (const auto* v : {&t.y[k], &t.z[k]}) {
            if (mpfr_cmpabs(v->raw(), norm.raw()) > 0) norm = abs(*v);
        }
        MPScalar w = norm.rebind(wide);
        mpfr_ui_div(w.raw(), 1, w.raw(), MPFR_RNDN);
        mpfr_rootn_ui(w.raw(), w.raw(), static_cast<unsigned long>(k), MPFR_RNDN);
        return w;
    };
    MPScalar a = root(n - 1), b = root(n);
    MPScalar m = a < b ? a : b;
    MPScalar e2(wide, 2L);
    mpfr_exp(e2.raw(), e2.raw(), MPFR_RNDN);
    mpfr_div(m.raw(), m.raw(), e2.raw(), MPFR_RNDN);
    return m.to_double() * safety;
}

}  // namespace

TEST_CASE("unit trailing norms give safety / e^2") {
    const auto ctx = make_ctx(30);
    const auto t = tail_table(ctx, 12, "1", "1");
    const auto est = optimal_stepsize(t, StepRule::variable());
    CHECK(est.status == StepStatus::ok);
    CHECK(est.tau == doctest::Approx(0.134388).epsilon(1e-6));
    CHECK(est.tau == doctest::Approx(0.993 * std::exp(-2.0)).epsilon(1e-15));
}

TEST_CASE("stepsize is homogeneous of degree -1") {
    const auto ctx = make_ctx(40);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 60);
        CoeffTable t(ctx, n);
        t.x[n - 1] = parse(testing::random_decimal(rng, 40, 3), ctx);
        t.z[n] = parse(testing::random_decimal(rng, 40, 2), ctx);
        const double tau = optimal_stepsize(t, StepRule::variable()).tau;
        const double lambda = std::ldexp(1.0, static_cast<int>(rng() % 11) - 5) * 1.5;
        const MPScalar lam(ctx, lambda);
        CoeffTable s = t;
        for (int k = 0; k < n - 1; ++k) mpfr_mul(s.x[n - 1].raw(), s.x[n - 1].raw(), lam.raw(), MPFR_RNDN);
        for (int k = 0; k < n; ++k) mpfr_mul(s.z[n].raw(), s.z[n].raw(), lam.raw(), MPFR_RNDN);
        const double scaled = optimal_stepsize(s, StepRule::variable()).tau;
        CHECK(scaled * lambda == doctest::Approx(tau).epsilon(1e-13));
    }
}

TEST_CASE("double path agrees with a multiple-precision evaluation") {
    std::mt19937_64 rng(17);
    const auto ctx = make_ctx(30);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 3000 + static_cast<int>(rng() % 3000);
        CoeffTable t(ctx, n);
        for (int k : {n - 1, n}) {
            for (auto* v : {&t.x[k], &t.y[k], &t.z[k]}) {
                *v = parse(testing::random_decimal(rng, 30, 0), ctx);
                const long e = static_cast<long>(rng() % 2000001) - 1000000;
                mpfr_mul_2si(v->raw(), v->raw(), e, MPFR_RNDN);
            }
        }
        const double tau = optimal_stepsize(t, StepRule::variable()).tau;
        const double ref = mp_stepsize(t, kSafetyFactor);
        CHECK(tau > 0.0);
        CHECK(std::fabs(tau - ref) <= 1e-12 * ref);
    }
}

TEST_CASE("trailing term is damped geometrically on real tables") {
    const auto ctx = make_ctx(60);
    const auto params = LorenzParams::saltzman(ctx);
    std::mt19937_64 rng(23);
    for (const int n : {10, 40, 80}) {
        const auto t = serial::fill_table(testing::random_state(rng, ctx), params, n);
        const double tau = optimal_stepsize(t, StepRule::variable()).tau;
        CHECK(tau > 0.0);
        const Decomposed norm = level_norm(t, static_cast<std::size_t>(n));
        // log2(|X_N| tau^N) <= N log2(safety / e^2) + tiny slack
        const double lhs = std::log2(norm.mantissa) + static_cast<double>(norm.exponent) + n * std::log2(tau);
        CHECK(lhs <= n * std::log2(kSafetyFactor * step_damping()) + 1e-9);
    }
}

TEST_CASE("zero trailing norms") {
    const auto ctx = make_ctx(30);
    CoeffTable t(ctx, 6);
    t.x[5] = parse("4", ctx);
    auto est = optimal_stepsize(t, StepRule::variable());
    CHECK(est.status == StepStatus::single_term);
    CHECK(est.tau == doctest::Approx(kSafetyFactor * step_damping() * std::pow(0.25, 1.0 / 5)));

    CoeffTable u(ctx, 6);
    u.z[6] = parse("64", ctx);
    est = optimal_stepsize(u, StepRule::variable());
    CHECK(est.status == StepStatus::single_term);
    CHECK(est.tau == doctest::Approx(kSafetyFactor * step_damping() * 0.5));

    est = optimal_stepsize(CoeffTable(ctx, 6), StepRule::variable());
    CHECK(est.status == StepStatus::fixed_point);
}

TEST_CASE("fixed stepsize rule") {
    CHECK(fixed_stepsize(StepRule::fixed(kDefaultFixedTau)) == 0.01);
    CHECK(fixed_stepsize(StepRule::fixed(0.005)) == 0.005);
    CHECK_THROWS_AS(StepRule::fixed(0.0).validate(), ConfigError);
    CHECK_THROWS_AS(StepRule::fixed(-1.0).validate(), ConfigError);
    StepRule r = StepRule::variable();
    r.safety = 1.5;
    CHECK_THROWS_AS(r.validate(), ConfigError);
    r.safety = 1.0;
    CHECK_NOTHROW(r.validate());
    // variable mode ignores fixed_tau
    r.fixed_tau = -3.0;
    CHECK_NOTHROW(r.validate());
}

TEST_CASE("mode and order preconditions") {
    const auto ctx = make_ctx(20);
    CHECK_THROWS_AS((void)optimal_stepsize(CoeffTable(ctx, 1), StepRule::variable()), ConfigError);
    CHECK_THROWS_AS((void)optimal_stepsize(CoeffTable(ctx, 4), StepRule::fixed(0.01)), UsageError);
    CHECK_THROWS_AS((void)fixed_stepsize(StepRule::variable()), UsageError);
}
