#include "cns/lorenz_taylor.hpp"

#include <stdexcept>
#include <string>

namespace cns {

LorenzParams LorenzParams::saltzman(const PrecisionCtx& ctx) {
    return {MPScalar(ctx, 10L), MPScalar(ctx, 28L), div_uint(MPScalar(ctx, 8L), 3)};
}

LorenzState LorenzState::at_rest(const PrecisionCtx& ctx) {
    return {MPScalar(ctx), MPScalar(ctx), MPScalar(ctx), MPScalar(ctx)};
}

LorenzState benchmark_state(const PrecisionCtx& ctx) {
    return {MPScalar(ctx), parse(kBenchmarkIcX, ctx), parse(kBenchmarkIcY, ctx), parse(kBenchmarkIcZ, ctx)};
}

CoeffTable::CoeffTable(const PrecisionCtx& ctx, int order) : order_(order) {
    if (order < 1) {
        throw ConfigError("Taylor order must be >= 1, got " + std::to_string(order));
    }
    const auto len = static_cast<std::size_t>(order) + 1;
    x.assign(len, MPScalar(ctx));
    y.assign(len, MPScalar(ctx));
    z.assign(len, MPScalar(ctx));
}

void CoeffTable::set_origin(const LorenzState& s) {
    assign(x[0], s.x);
    assign(y[0], s.y);
    assign(z[0], s.z);
}

namespace serial {

ConvSums conv_pair(const CoeffTable& table, std::size_t i, std::size_t block_size) {
    const auto ctx = table.ctx();
    const std::size_t nb = block_count(i, block_size);
    std::vector<MPScalar> sxy(nb, MPScalar(ctx));
    std::vector<MPScalar> sxz(nb, MPScalar(ctx));
    MPScalar tempv(ctx);
    for (std::size_t id = 0; id < nb; ++id) {
        const Block blk = block_at(i, block_size, id);
        terms::block_partial(sxy[id], sxz[id], tempv, table, i, blk.begin, blk.end);
    }
    return {tree_reduce(sxy), tree_reduce(sxz)};
}

Point3 next_coeff(const CoeffTable& table, std::size_t i, const LorenzParams& params, std::size_t block_size) {
    if (i >= static_cast<std::size_t>(table.order())) {
        throw std::out_of_range("coefficient level " + std::to_string(i) + " outside order " +
                                std::to_string(table.order()));
    }
    const auto ctx = table.ctx();
    const ConvSums s = conv_pair(table, i, block_size);
    MPScalar scratch(ctx), rxy(ctx), bz(ctx);
    Point3 out{MPScalar(ctx), MPScalar(ctx), MPScalar(ctx)};
    terms::x_next(out.x, scratch, params, table.x[i], table.y[i], i);
    terms::rx_minus_y(rxy, params, table.x[i], table.y[i]);
    terms::b_z(bz, params, table.z[i]);
    terms::y_next(out.y, rxy, s.xz, i);
    terms::z_next(out.z, s.xy, bz, i);
    return out;
}

void fill_levels(CoeffTable& table, const LorenzParams& params, std::size_t block_size) {
    const auto n = static_cast<std::size_t>(table.order());
    for (std::size_t i = 0; i < n; ++i) {
        Point3 c = next_coeff(table, i, params, block_size);
        table.x[i + 1] = std::move(c.x);
        table.y[i + 1] = std::move(c.y);
        table.z[i + 1] = std::move(c.z);
    }
}

CoeffTable fill_table(const LorenzState& state, const LorenzParams& params, int order, std::size_t block_size) {
    CoeffTable table(state.x.ctx(), order);
    table.set_origin(state);
    fill_levels(table, params, block_size);
    return table;
}

}  // namespace serial

void horner_eval_into(Point3& out, const CoeffTable& table, const MPScalar& theta) noexcept {
    const auto n = static_cast<std::size_t>(table.order());
    auto one = [&](MPScalar& acc, const std::vector<MPScalar>& c) {
        assign(acc, c[n]);
        for (std::size_t k = n; k-- > 0;) {
            mul_into(acc, acc, theta);
            add_into(acc, acc, c[k]);
        }
    };
    one(out.x, table.x);
    one(out.y, table.y);
    one(out.z, table.z);
}

Point3 horner_eval(const CoeffTable& table, const MPScalar& theta) {
    const auto ctx = table.ctx();
    if (theta.digits() != ctx.decimal_digits()) {
        throw UsageError("horner_eval: theta context differs from table context");
    }
    Point3 out{MPScalar(ctx), MPScalar(ctx), MPScalar(ctx)};
    horner_eval_into(out, table, theta);
    return out;
}

LorenzState advance(const LorenzState& state, const LorenzParams& params, int order, const MPScalar& tau,
                    std::size_t block_size) {
    if (tau.sign() <= 0) {
        throw ConfigError("step size must be positive");
    }
    const CoeffTable table = serial::fill_table(state, params, order, block_size);
    Point3 p = horner_eval(table, tau);
    return {state.t + tau, std::move(p.x), std::move(p.y), std::move(p.z)};
}

}  // namespace cns
