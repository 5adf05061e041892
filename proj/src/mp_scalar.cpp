#include "cns/mp_scalar.hpp"

#include <cctype>
#include <cstring>
#include <memory>
#include <utility>

namespace cns {

mpfr_prec_t bits_for_digits(int decimal_digits) {
    // K * log2(10) is irrational for K > 0, so 256 bits of log2(10) place
    // the ceiling correctly for any K representable in an int.
    mpfr_t l;
    mpfr_init2(l, 256);
    mpfr_set_ui(l, 10, MPFR_RNDN);
    mpfr_log2(l, l, MPFR_RNDN);
    mpfr_mul_si(l, l, decimal_digits, MPFR_RNDN);
    mpfr_ceil(l, l);
    const auto bits = static_cast<mpfr_prec_t>(mpfr_get_si(l, MPFR_RNDN));
    mpfr_clear(l);
    return bits;
}

PrecisionCtx::PrecisionCtx(int decimal_digits) : digits_(decimal_digits), bits_(0) {
    if (decimal_digits < kMinDecimalDigits) {
        throw ConfigError("precision must be at least " + std::to_string(kMinDecimalDigits) +
                          " decimal digits, got " + std::to_string(decimal_digits));
    }
    bits_ = bits_for_digits(decimal_digits);
}

PrecisionCtx make_ctx(int decimal_digits) { return PrecisionCtx(decimal_digits); }

MPScalar::MPScalar(const PrecisionCtx& ctx) : digits_(ctx.decimal_digits()) {
    mpfr_init2(v_, ctx.mantissa_bits());
    mpfr_set_zero(v_, 1);
}

MPScalar::MPScalar(const PrecisionCtx& ctx, long value) : digits_(ctx.decimal_digits()) {
    mpfr_init2(v_, ctx.mantissa_bits());
    mpfr_set_si(v_, value, MPFR_RNDN);
}

MPScalar::MPScalar(const PrecisionCtx& ctx, double value) : digits_(ctx.decimal_digits()) {
    mpfr_init2(v_, ctx.mantissa_bits());
    mpfr_set_d(v_, value, MPFR_RNDN);
    if (!is_finite()) {
        throw OverflowError("non-finite double cannot initialise an MPScalar");
    }
}

MPScalar::MPScalar(const MPScalar& other) : digits_(other.digits_) {
    mpfr_init2(v_, other.bits());
    mpfr_set(v_, other.v_, MPFR_RNDN);
}

MPScalar::MPScalar(MPScalar&& other) noexcept : digits_(other.digits_) {
    // Leave the source as a valid zero of the same precision.
    mpfr_init2(v_, other.bits());
    mpfr_swap(v_, other.v_);
    mpfr_set_zero(other.v_, 1);
}

MPScalar& MPScalar::operator=(const MPScalar& other) {
    if (this != &other) {
        if (bits() != other.bits()) {
            mpfr_set_prec(v_, other.bits());
        }
        mpfr_set(v_, other.v_, MPFR_RNDN);
        digits_ = other.digits_;
    }
    return *this;
}

MPScalar& MPScalar::operator=(MPScalar&& other) noexcept {
    if (this != &other) {
        mpfr_swap(v_, other.v_);
        std::swap(digits_, other.digits_);
    }
    return *this;
}

MPScalar::~MPScalar() { mpfr_clear(v_); }

MPScalar MPScalar::rebind(const PrecisionCtx& ctx) const {
    MPScalar out(ctx);
    mpfr_set(out.v_, v_, MPFR_RNDN);
    return out;
}

bool MPScalar::identical(const MPScalar& other) const noexcept {
    if (bits() != other.bits()) return false;
    if (mpfr_signbit(v_) != mpfr_signbit(other.v_)) return false;
    return mpfr_equal_p(v_, other.v_) != 0;
}

namespace {

void require_same_ctx(const MPScalar& a, const MPScalar& b) {
    if (a.digits() != b.digits()) {
        throw UsageError("precision context mismatch: " + std::to_string(a.digits()) + " vs " +
                         std::to_string(b.digits()) + " digits");
    }
}

void require_finite(const MPScalar& r) {
    if (!r.is_finite()) {
        throw OverflowError("multiple-precision result left the exponent range");
    }
}

}  // namespace

MPScalar arith(const MPScalar& a, const MPScalar& b, ArithOp op) {
    require_same_ctx(a, b);
    MPScalar r(a.ctx());
    switch (op) {
        case ArithOp::add: add_into(r, a, b); break;
        case ArithOp::sub: sub_into(r, a, b); break;
        case ArithOp::mul: mul_into(r, a, b); break;
    }
    require_finite(r);
    return r;
}

MPScalar operator+(const MPScalar& a, const MPScalar& b) { return arith(a, b, ArithOp::add); }
MPScalar operator-(const MPScalar& a, const MPScalar& b) { return arith(a, b, ArithOp::sub); }
MPScalar operator*(const MPScalar& a, const MPScalar& b) { return arith(a, b, ArithOp::mul); }

MPScalar operator-(const MPScalar& a) {
    MPScalar r(a.ctx());
    mpfr_neg(r.raw(), a.raw(), MPFR_RNDN);
    return r;
}

MPScalar& MPScalar::operator+=(const MPScalar& b) {
    require_same_ctx(*this, b);
    add_into(*this, *this, b);
    require_finite(*this);
    return *this;
}

std::partial_ordering operator<=>(const MPScalar& a, const MPScalar& b) {
    const int c = mpfr_cmp(a.v_, b.v_);
    if (c < 0) return std::partial_ordering::less;
    if (c > 0) return std::partial_ordering::greater;
    return std::partial_ordering::equivalent;
}

MPScalar div_uint(const MPScalar& a, unsigned long n) {
    if (n == 0) {
        throw std::domain_error("division by zero");
    }
    MPScalar r(a.ctx());
    div_uint_into(r, a, n);
    return r;
}

MPScalar abs(const MPScalar& a) {
    MPScalar r(a.ctx());
    mpfr_abs(r.raw(), a.raw(), MPFR_RNDN);
    return r;
}

Decomposed decompose(const MPScalar& a) noexcept {
    if (a.is_zero()) return {0.0, 0};
    long exp = 0;
    const double m = mpfr_get_d_2exp(&exp, a.raw(), MPFR_RNDN);
    return {m, exp};
}

std::string format(const MPScalar& a, int significant_digits) {
    if (a.is_zero()) {
        return mpfr_signbit(a.raw()) ? "-0e0" : "0e0";
    }
    if (significant_digits <= 0) {
        significant_digits = a.digits() + kGuardDigits;
    }
    mpfr_exp_t exp10 = 0;
    std::unique_ptr<char, void (*)(char*)> digits(
        mpfr_get_str(nullptr, &exp10, 10, static_cast<size_t>(significant_digits), a.raw(), MPFR_RNDN),
        mpfr_free_str);
    std::string_view d(digits.get());
    std::string out;
    if (!d.empty() && d.front() == '-') {
        out.push_back('-');
        d.remove_prefix(1);
    }
    while (d.size() > 1 && d.back() == '0') d.remove_suffix(1);
    out.push_back(d.front());
    if (d.size() > 1) {
        out.push_back('.');
        out.append(d.substr(1));
    }
    out.push_back('e');
    out.append(std::to_string(static_cast<long>(exp10) - 1));
    return out;
}

MPScalar parse(std::string_view text, const PrecisionCtx& ctx) {
    const std::string s(text);
    if (s.empty() || std::isspace(static_cast<unsigned char>(s.front()))) {
        throw ParseError("malformed decimal: '" + s + "'");
    }
    MPScalar r(ctx);
    char* end = nullptr;
    mpfr_strtofr(r.raw(), s.c_str(), &end, 10, MPFR_RNDN);
    if (end != s.c_str() + s.size() || end == s.c_str()) {
        throw ParseError("malformed decimal: '" + s + "'");
    }
    if (!r.is_finite()) {
        throw ParseError("non-finite decimal: '" + s + "'");
    }
    return r;
}

}  // namespace cns
