#pragma once

// Lorenz system Taylor recurrence, single-threaded reference.
//
//   x' = sigma (y - x),  y' = R x - y - x z,  z' = x y - b z
//
// Coefficient slot i holds the i-th derivative divided by i!. The level-i
// recurrence needs the two Cauchy products sum_j x_{i-j} y_j and
// sum_j x_{i-j} z_j; they are summed per block and combined with the
// canonical tree from block_plan.hpp, so this reference and the parallel
// engine agree bit for bit.

#include "cns/block_plan.hpp"
#include "cns/mp_scalar.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cns {

struct LorenzParams {
    MPScalar sigma;
    MPScalar R;
    MPScalar b;

    /// sigma = 10, R = 28, b = 8/3 (rounded in-context).
    [[nodiscard]] static LorenzParams saltzman(const PrecisionCtx& ctx);
};

struct Point3 {
    MPScalar x;
    MPScalar y;
    MPScalar z;
};

struct LorenzState {
    MPScalar t;
    MPScalar x;
    MPScalar y;
    MPScalar z;

    [[nodiscard]] static LorenzState at_rest(const PrecisionCtx& ctx);
    [[nodiscard]] int digits() const noexcept { return x.digits(); }
};

/// Initial condition used by the long-horizon reference runs.
inline constexpr const char* kBenchmarkIcX = "-15.8";
inline constexpr const char* kBenchmarkIcY = "-17.48";
inline constexpr const char* kBenchmarkIcZ = "35.64";

[[nodiscard]] LorenzState benchmark_state(const PrecisionCtx& ctx);

class CoeffTable {
public:
    CoeffTable(const PrecisionCtx& ctx, int order);

    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] PrecisionCtx ctx() const { return x.front().ctx(); }

    /// Writes the state into slot 0.
    void set_origin(const LorenzState& s);

    std::vector<MPScalar> x;
    std::vector<MPScalar> y;
    std::vector<MPScalar> z;

private:
    int order_;
};

struct ConvSums {
    MPScalar xy;  // sum_j x_{i-j} y_j
    MPScalar xz;  // sum_j x_{i-j} z_j
};

// Multiplication inventory. Per level i: 2(i+1) convolution products plus
// sigma*(..), R*x_i and b*z_i. A Horner evaluation costs N per component.
[[nodiscard]] constexpr std::uint64_t fill_mul_count(int order) noexcept {
    const auto n = static_cast<std::uint64_t>(order);
    return n * (n + 1) + 3 * n;
}
[[nodiscard]] constexpr std::uint64_t horner_mul_count(int order) noexcept {
    return 3 * static_cast<std::uint64_t>(order);
}
[[nodiscard]] constexpr std::uint64_t step_mul_count(int order) noexcept {
    return fill_mul_count(order) + horner_mul_count(order);
}

// Recurrence pieces shared by the serial and parallel fills. Each is a fixed
// sequence of correctly rounded operations.
namespace terms {

/// x_{i+1} = sigma (y_i - x_i) / (i+1)
inline void x_next(MPScalar& out, MPScalar& scratch, const LorenzParams& p, const MPScalar& xi, const MPScalar& yi,
                   std::size_t i) noexcept {
    sub_into(scratch, yi, xi);
    mul_into(out, p.sigma, scratch);
    div_uint_into(out, out, i + 1);
}

/// R x_i - y_i
inline void rx_minus_y(MPScalar& out, const LorenzParams& p, const MPScalar& xi, const MPScalar& yi) noexcept {
    mul_into(out, p.R, xi);
    sub_into(out, out, yi);
}

/// b z_i
inline void b_z(MPScalar& out, const LorenzParams& p, const MPScalar& zi) noexcept { mul_into(out, p.b, zi); }

/// y_{i+1} = (R x_i - y_i - S_xz) / (i+1)
inline void y_next(MPScalar& out, const MPScalar& rxy, const MPScalar& s_xz, std::size_t i) noexcept {
    sub_into(out, rxy, s_xz);
    div_uint_into(out, out, i + 1);
}

/// z_{i+1} = (S_xy - b z_i) / (i+1)
inline void z_next(MPScalar& out, const MPScalar& s_xy, const MPScalar& bz, std::size_t i) noexcept {
    sub_into(out, s_xy, bz);
    div_uint_into(out, out, i + 1);
}

/// Left-to-right partial of both products over j in [begin, end).
inline void block_partial(MPScalar& acc_xy, MPScalar& acc_xz, MPScalar& tempv, const CoeffTable& t, std::size_t i,
                          std::size_t begin, std::size_t end) noexcept {
    mul_into(acc_xy, t.x[i - begin], t.y[begin]);
    mul_into(acc_xz, t.x[i - begin], t.z[begin]);
    for (std::size_t j = begin + 1; j < end; ++j) {
        mul_into(tempv, t.x[i - j], t.y[j]);
        add_into(acc_xy, acc_xy, tempv);
        mul_into(tempv, t.x[i - j], t.z[j]);
        add_into(acc_xz, acc_xz, tempv);
    }
}

}  // namespace terms

namespace serial {

/// Both level-i convolution sums, block-ordered. Requires slots 0..i filled.
[[nodiscard]] ConvSums conv_pair(const CoeffTable& table, std::size_t i, std::size_t block_size = kDefaultBlockSize);

/// (x_{i+1}, y_{i+1}, z_{i+1}) from slots 0..i. Throws std::out_of_range when
/// i >= order.
[[nodiscard]] Point3 next_coeff(const CoeffTable& table, std::size_t i, const LorenzParams& params,
                                std::size_t block_size = kDefaultBlockSize);

/// Fills slots 1..order of a table whose slot 0 is already set.
void fill_levels(CoeffTable& table, const LorenzParams& params, std::size_t block_size = kDefaultBlockSize);

/// Throws ConfigError when order < 1.
[[nodiscard]] CoeffTable fill_table(const LorenzState& state, const LorenzParams& params, int order,
                                    std::size_t block_size = kDefaultBlockSize);

}  // namespace serial

/// sum_i X_i theta^i per component by Horner's rule.
[[nodiscard]] Point3 horner_eval(const CoeffTable& table, const MPScalar& theta);

/// In-place variant reusing `out`; used on the hot path.
void horner_eval_into(Point3& out, const CoeffTable& table, const MPScalar& theta) noexcept;

/// One Taylor step of size tau from `state` using the serial fill.
/// Throws ConfigError for tau <= 0.
[[nodiscard]] LorenzState advance(const LorenzState& state, const LorenzParams& params, int order,
                                  const MPScalar& tau, std::size_t block_size = kDefaultBlockSize);

}  // namespace cns
