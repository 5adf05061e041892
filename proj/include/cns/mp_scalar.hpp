#pragma once

// Multiple-precision floating-point scalar backed by MPFR.
//
// Every value is bound to a PrecisionCtx (K exact decimal digits). Binary
// operations between values of different contexts are rejected. Rounding is
// round-to-nearest everywhere.

#include <mpfr.h>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cns {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UsageError : std::logic_error {
    using std::logic_error::logic_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OverflowError : std::overflow_error {
    using std::overflow_error::overflow_error;
};

inline constexpr int kMinDecimalDigits = 16;

class PrecisionCtx {
public:
    /// Throws ConfigError when `decimal_digits` < 16.
    explicit PrecisionCtx(int decimal_digits);

    [[nodiscard]] int decimal_digits() const noexcept { return digits_; }
    [[nodiscard]] mpfr_prec_t mantissa_bits() const noexcept { return bits_; }

    friend bool operator==(const PrecisionCtx&, const PrecisionCtx&) = default;

private:
    int digits_;
    mpfr_prec_t bits_;
};

[[nodiscard]] PrecisionCtx make_ctx(int decimal_digits);

/// ceil(digits * log2(10)), computed exactly with integer arithmetic.
[[nodiscard]] mpfr_prec_t bits_for_digits(int decimal_digits);

struct Decomposed {
    double mantissa;  // |mantissa| in [0.5, 1), or 0
    long exponent;
};

class MPScalar {
public:
    explicit MPScalar(const PrecisionCtx& ctx);
    MPScalar(const PrecisionCtx& ctx, long value);
    MPScalar(const PrecisionCtx& ctx, double value);

    MPScalar(const MPScalar& other);
    MPScalar(MPScalar&& other) noexcept;
    MPScalar& operator=(const MPScalar& other);
    MPScalar& operator=(MPScalar&& other) noexcept;
    ~MPScalar();

    [[nodiscard]] PrecisionCtx ctx() const { return PrecisionCtx(digits_); }
    [[nodiscard]] int digits() const noexcept { return digits_; }
    [[nodiscard]] mpfr_prec_t bits() const noexcept { return mpfr_get_prec(v_); }

    [[nodiscard]] bool is_zero() const noexcept { return mpfr_zero_p(v_) != 0; }
    [[nodiscard]] bool is_finite() const noexcept { return mpfr_number_p(v_) != 0; }
    [[nodiscard]] int sign() const noexcept { return mpfr_sgn(v_); }
    [[nodiscard]] double to_double() const noexcept { return mpfr_get_d(v_, MPFR_RNDN); }

    /// Same value re-rounded into another context (exact when widening).
    [[nodiscard]] MPScalar rebind(const PrecisionCtx& ctx) const;

    /// Bit-exact equality: same precision, same sign, same value.
    [[nodiscard]] bool identical(const MPScalar& other) const noexcept;

    [[nodiscard]] mpfr_ptr raw() noexcept { return v_; }
    [[nodiscard]] mpfr_srcptr raw() const noexcept { return v_; }

    friend MPScalar operator+(const MPScalar& a, const MPScalar& b);
    friend MPScalar operator-(const MPScalar& a, const MPScalar& b);
    friend MPScalar operator*(const MPScalar& a, const MPScalar& b);
    friend MPScalar operator-(const MPScalar& a);
    MPScalar& operator+=(const MPScalar& b);

    friend bool operator==(const MPScalar& a, const MPScalar& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
    friend std::partial_ordering operator<=>(const MPScalar& a, const MPScalar& b);

private:
    mpfr_t v_;
    int digits_;
};

enum class ArithOp { add, sub, mul };

/// Checked binary arithmetic; throws UsageError on context mismatch.
[[nodiscard]] MPScalar arith(const MPScalar& a, const MPScalar& b, ArithOp op);

/// Correctly rounded a / n; throws std::domain_error when n == 0.
[[nodiscard]] MPScalar div_uint(const MPScalar& a, unsigned long n);

[[nodiscard]] MPScalar abs(const MPScalar& a);

/// a = mantissa * 2^exponent with the exponent kept as an exact integer.
[[nodiscard]] Decomposed decompose(const MPScalar& a) noexcept;

// Unchecked in-place kernels for hot loops. Callers guarantee matching
// contexts; `out` may alias an operand.
inline void mul_into(MPScalar& out, const MPScalar& a, const MPScalar& b) noexcept {
    mpfr_mul(out.raw(), a.raw(), b.raw(), MPFR_RNDN);
}
inline void add_into(MPScalar& out, const MPScalar& a, const MPScalar& b) noexcept {
    mpfr_add(out.raw(), a.raw(), b.raw(), MPFR_RNDN);
}
inline void sub_into(MPScalar& out, const MPScalar& a, const MPScalar& b) noexcept {
    mpfr_sub(out.raw(), a.raw(), b.raw(), MPFR_RNDN);
}
inline void div_uint_into(MPScalar& out, const MPScalar& a, unsigned long n) noexcept {
    mpfr_div_ui(out.raw(), a.raw(), n, MPFR_RNDN);
}
inline void assign(MPScalar& out, const MPScalar& a) noexcept { mpfr_set(out.raw(), a.raw(), MPFR_RNDN); }

/// Exact decimal text "[-]d.ddd…e<exp>" with `significant_digits` digits
/// (trailing zeros dropped). 0 means ctx digits + 5 guard digits, which
/// round-trips bit-exactly.
[[nodiscard]] std::string format(const MPScalar& a, int significant_digits = 0);

/// Parses a decimal string into `ctx`, correctly rounded. Throws ParseError
/// on malformed or non-finite input.
[[nodiscard]] MPScalar parse(std::string_view text, const PrecisionCtx& ctx);

inline constexpr int kGuardDigits = 5;

}  // namespace cns
