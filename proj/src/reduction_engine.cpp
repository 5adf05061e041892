#include "cns/reduction_engine.hpp"

#include <omp.h>

#include <algorithm>
#include <numeric>

namespace cns {

std::vector<MPScalar> group_allreduce(std::span<const MPScalar> group_partials) {
    std::vector<MPScalar> work(group_partials.begin(), group_partials.end());
    const MPScalar global = tree_reduce(work);
    return std::vector<MPScalar>(group_partials.size(), global);
}

ReductionEngine::ReductionEngine(const PrecisionCtx& ctx, WorkerLayout layout)
    : ctx_(ctx),
      layout_(make_layout(layout.workers, layout.group_size, layout.block_size)),
      rxy_{MPScalar(ctx)},
      bz_{MPScalar(ctx)} {
    tempv_.assign(static_cast<std::size_t>(layout_.workers), Padded<MPScalar>{MPScalar(ctx)});
    muls_.assign(static_cast<std::size_t>(layout_.workers), Padded<std::uint64_t>{0});
}

void ReductionEngine::reserve(std::size_t max_level) {
    const std::size_t slots =
        std::max(next_pow2(block_count(max_level, layout_.block_size)),
                 next_pow2(static_cast<std::size_t>(layout_.group_count())));
    if (sum_xy_.size() < slots) {
        sum_xy_.resize(slots, Padded<MPScalar>{MPScalar(ctx_)});
        sum_xz_.resize(slots, Padded<MPScalar>{MPScalar(ctx_)});
    }
}

namespace {

MPScalar& slot_value(Padded<MPScalar>& p) { return p.v; }

// Worker that takes in-advance task k (0: x_{i+1}, 1: R x_i - y_i, 2: b z_i).
int task_owner(int k, int team) { return ((team - 1 - k) % team + team) % team; }

}  // namespace

void ReductionEngine::level(int tid, int team, CoeffTable& table, const LorenzParams* params, std::size_t i,
                            Finish finish) {
    const WorkerLayout lay =
        team == layout_.workers ? layout_ : make_layout(team, layout_.group_size, layout_.block_size);
    const std::size_t bsize = lay.block_size;
    const std::size_t nb = block_count(i, bsize);
    const auto groups = static_cast<std::size_t>(lay.group_count());
    const std::size_t q = next_pow2(groups);
    const std::size_t p = std::max(next_pow2(nb), q);
    const std::size_t chunk = p / q;
    const int g = lay.group_of(tid);
    const int members = lay.group_members(g);
    const int local = tid - g * lay.group_size;
    MPScalar& tmp = tempv_[static_cast<std::size_t>(tid)].v;
    std::uint64_t& muls = muls_[static_cast<std::size_t>(tid)].v;

    if (finish == Finish::coefficients) {
        if (tid == task_owner(0, team)) {
            terms::x_next(table.x[i + 1], tmp, *params, table.x[i], table.y[i], i);
            ++muls;
        }
        if (tid == task_owner(1, team)) {
            terms::rx_minus_y(rxy_.v, *params, table.x[i], table.y[i]);
            ++muls;
        }
        if (tid == task_owner(2, team)) {
            terms::b_z(bz_.v, *params, table.z[i]);
            ++muls;
        }
    }

    // Group g owns chunks g, g + groups, ... of the q aligned subtrees.
    const auto stride_g = static_cast<std::size_t>(groups);
    for (std::size_t c = static_cast<std::size_t>(g); c < q; c += stride_g) {
        const std::size_t lo = c * chunk;
        const std::size_t hi = std::min(lo + chunk, nb);
        for (std::size_t s = lo + static_cast<std::size_t>(local); s < hi; s += static_cast<std::size_t>(members)) {
            const Block blk = block_at(i, bsize, s);
            terms::block_partial(sum_xy_[s].v, sum_xz_[s].v, tmp, table, i, blk.begin, blk.end);
            muls += 2 * (blk.end - blk.begin);
        }
    }
#pragma omp barrier

    const int xz_local = members > 1 ? 1 : 0;
    for (std::size_t c = static_cast<std::size_t>(g); c < q; c += stride_g) {
        const std::size_t lo = c * chunk;
        if (lo >= nb) break;
        if (local == 0) tree_reduce_range(sum_xy_, slot_value, lo, chunk, nb);
        if (local == xz_local) tree_reduce_range(sum_xz_, slot_value, lo, chunk, nb);
    }
    int xy_owner = 0;
    int xz_owner = lay.group_members(0) > 1 ? 1 : 0;
    if (groups > 1) {
#pragma omp barrier
        xz_owner = lay.group_size;  // leader of group 1
        if (tid == xy_owner) tree_reduce_range(sum_xy_, slot_value, 0, p, nb, chunk);
        if (tid == xz_owner) tree_reduce_range(sum_xz_, slot_value, 0, p, nb, chunk);
    }

    if (finish == Finish::coefficients) {
        if (tid == xz_owner) terms::y_next(table.y[i + 1], rxy_.v, sum_xz_[0].v, i);
        if (tid == xy_owner) terms::z_next(table.z[i + 1], sum_xy_[0].v, bz_.v, i);
    }
#pragma omp barrier
}

void ReductionEngine::run(CoeffTable& table, const LorenzParams* params, std::size_t first_level,
                          std::size_t last_level, Finish finish) {
    if (table.ctx() != ctx_) {
        throw UsageError("coefficient table precision differs from engine precision");
    }
    reserve(last_level);
    for (auto& m : muls_) m.v = 0;
    omp_set_dynamic(0);
#pragma omp parallel num_threads(layout_.workers)
    {
        const int tid = omp_get_thread_num();
        const int team = omp_get_num_threads();
        for (std::size_t i = first_level; i <= last_level; ++i) {
            level(tid, team, table, params, i, finish);
        }
    }
}

std::uint64_t ReductionEngine::fill_levels(CoeffTable& table, const LorenzParams& params) {
    run(table, &params, 0, static_cast<std::size_t>(table.order()) - 1, Finish::coefficients);
    return std::accumulate(muls_.begin(), muls_.end(), std::uint64_t{0},
                           [](std::uint64_t acc, const auto& m) { return acc + m.v; });
}

void ReductionEngine::step_coefficients(CoeffTable& table, std::size_t i, const LorenzParams& params) {
    if (i >= static_cast<std::size_t>(table.order())) {
        throw std::out_of_range("coefficient level outside table order");
    }
    run(table, &params, i, i, Finish::coefficients);
}

ConvSums ReductionEngine::conv_pair(const CoeffTable& table, std::size_t i) {
    if (i > static_cast<std::size_t>(table.order())) {
        throw std::out_of_range("coefficient level outside table order");
    }
    // sums_only never writes into the table.
    run(const_cast<CoeffTable&>(table), nullptr, i, i, Finish::sums_only);
    return {sum_xy_[0].v, sum_xz_[0].v};
}

}  // namespace cns
