#include "cns/mp_scalar.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cns;

TEST_CASE("make_ctx converts decimal digits to mantissa bits") {
    CHECK(make_ctx(16).mantissa_bits() == 54);
    CHECK(make_ctx(100).mantissa_bits() == 333);
    CHECK(make_ctx(4566).mantissa_bits() == 15168);
    CHECK(make_ctx(4566).decimal_digits() == 4566);
    CHECK_THROWS_AS((void)make_ctx(15), ConfigError);
    CHECK_THROWS_AS((void)make_ctx(0), ConfigError);
}

TEST_CASE("bits cover every decimal digit") {
    for (int k = 16; k < 2000; k += 37) {
        const auto bits = bits_for_digits(k);
        CHECK(static_cast<double>(bits - 1) < k * std::log2(10.0));
        CHECK(static_cast<double>(bits) >= k * std::log2(10.0));
    }
}

TEST_CASE("arithmetic basics") {
    const auto ctx = make_ctx(40);
    const MPScalar one(ctx, 1L), zero(ctx);
    CHECK((one + zero).identical(one));
    CHECK(arith(parse("-15.8", ctx), zero, ArithOp::mul).is_zero());
    CHECK(arith(one, one, ArithOp::sub).is_zero());

    // -15.8 * 35.64 = -563.112 up to the rounding of both operands.
    const MPScalar prod = parse("-15.8", ctx) * parse("35.64", ctx);
    CHECK(format(prod, 40) == "-5.63112e2");
}

TEST_CASE("context mismatch is a usage error") {
    const MPScalar a(make_ctx(20), 1L), b(make_ctx(21), 1L);
    CHECK_THROWS_AS((void)(a + b), UsageError);
    CHECK_THROWS_AS((void)arith(a, b, ArithOp::mul), UsageError);
}

TEST_CASE("division by an integer") {
    const auto ctx = make_ctx(32);
    const MPScalar x = parse("1.2345678901234567890123", ctx);
    CHECK(div_uint(x, 1).identical(x));
    CHECK(div_uint(MPScalar(ctx, 3L), 2).identical(parse("1.5", ctx)));
    CHECK(div_uint(parse("-16.8", ctx), 2).identical(parse("-8.4", ctx)));
    CHECK_THROWS_AS((void)div_uint(x, 0), std::domain_error);
}

TEST_CASE("decompose keeps the exponent exact") {
    const auto ctx = make_ctx(30);
    auto d = decompose(MPScalar(ctx, 1L));
    CHECK(d.mantissa == 0.5);
    CHECK(d.exponent == 1);
    d = decompose(MPScalar(ctx));
    CHECK(d.mantissa == 0.0);
    CHECK(d.exponent == 0);

    MPScalar big(ctx, 1L);
    mpfr_mul_2ui(big.raw(), big.raw(), 10000, MPFR_RNDN);
    d = decompose(big);
    CHECK(d.mantissa == 0.5);
    CHECK(d.exponent == 10001);

    SUBCASE("reconstruction within 2^-50") {
        std::mt19937_64 rng(7);
        for (int n = 0; n < 300; ++n) {
            const MPScalar a = parse(testing::random_decimal(rng, 30, static_cast<int>(rng() % 4001) - 2000), ctx);
            const Decomposed dd = decompose(a);
            CHECK(std::fabs(dd.mantissa) >= 0.5);
            CHECK(std::fabs(dd.mantissa) < 1.0);
            MPScalar back(ctx, dd.mantissa);
            mpfr_mul_2si(back.raw(), back.raw(), dd.exponent, MPFR_RNDN);
            MPScalar rel = abs(back - a);
            mpfr_div(rel.raw(), rel.raw(), abs(a).raw(), MPFR_RNDN);
            CHECK(rel.to_double() <= std::ldexp(1.0, -50));
        }
    }
}

TEST_CASE("text format") {
    const auto ctx = make_ctx(16);
    CHECK(format(parse("-15.8", ctx), 3) == "-1.58e1");
    CHECK(format(parse("-17.48", ctx), 4) == "-1.748e1");
    CHECK(format(MPScalar(ctx)) == "0e0");
    CHECK(format(MPScalar(ctx, 1L)) == "1e0");
    CHECK(format(parse("0.015", ctx), 2) == "1.5e-2");
    for (const char* ic : {"-15.8", "-17.48", "35.64"}) {
        const MPScalar v = parse(ic, ctx);
        CHECK(parse(format(v), ctx).identical(v));
    }
}

TEST_CASE("round trip is bit exact for random values") {
    std::mt19937_64 rng(2024);
    for (int n = 0; n < 400; ++n) {
        const int k = 16 + static_cast<int>(rng() % 300);
        const auto ctx = make_ctx(k);
        MPScalar a = parse(testing::random_decimal(rng, k + 10, static_cast<int>(rng() % 200) - 100), ctx);
        // Also exercise values whose binary expansion is not a short decimal.
        if (n % 2) a = div_uint(a, 3);
        const std::string text = format(a);
        CHECK_MESSAGE(parse(text, ctx).identical(a), text);
    }
}

TEST_CASE("malformed decimals are rejected") {
    const auto ctx = make_ctx(20);
    for (const char* bad : {"", "abc", "1.2.3", " 1", "1e", "--1", "nan", "inf", "-inf", "1,5"}) {
        CHECK_THROWS_AS((void)parse(bad, ctx), ParseError);
    }
}

TEST_CASE("single operations agree with a wider context to one ulp") {
    std::mt19937_64 rng(99);
    for (int n = 0; n < 200; ++n) {
        const int k = 16 + static_cast<int>(rng() % 80);
        const auto lo = make_ctx(k);
        const auto hi = make_ctx(2 * k + 20);
        const MPScalar a = parse(testing::random_decimal(rng, k, 2), lo);
        const MPScalar b = parse(testing::random_decimal(rng, k, 2), lo);
        for (const ArithOp op : {ArithOp::add, ArithOp::sub, ArithOp::mul}) {
            const MPScalar low = arith(a, b, op);
            const MPScalar high = arith(a.rebind(hi), b.rebind(hi), op).rebind(lo);
            if (low.identical(high)) continue;
            MPScalar next = low;
            mpfr_nextabove(next.raw());
            MPScalar prev = low;
            mpfr_nextbelow(prev.raw());
            CHECK((high.identical(next) || high.identical(prev)));
        }
    }
}

TEST_CASE("copies and moves keep precision and value") {
    const auto ctx = make_ctx(50);
    const MPScalar a = parse("3.14159265358979323846264338327950288419716939937510", ctx);
    MPScalar b = a;
    CHECK(b.identical(a));
    MPScalar c = std::move(b);
    CHECK(c.identical(a));
    MPScalar d(make_ctx(16));
    d = c;
    CHECK(d.identical(a));
    CHECK(d.digits() == 50);
}
