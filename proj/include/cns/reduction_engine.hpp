#pragma once

// OpenMP fill of the Lorenz coefficient table.
//
// One parallel region spans all levels of a table. Per level i:
//   1. the three cheap terms (x_{i+1}, R x_i - y_i, b z_i) are taken by the
//      highest-numbered workers, which are also the last to receive blocks;
//      every worker then sums the convolution blocks of its group's chunk;
//   2. inside each group two members fold the chunk's subtree, one per sum;
//   3. with several groups, the leaders of groups 0 and 1 finish the tree
//      across group roots (the in-process stand-in for an allreduce);
//   4. whoever produced S_xz finalises y_{i+1}, whoever produced S_xy
//      finalises z_{i+1}; a barrier closes the level.
// Block partials are stored in a power-of-two slot array split evenly across
// groups, so groups own aligned subtrees of the canonical tree and the result
// is independent of worker and group counts.

#include "cns/block_plan.hpp"
#include "cns/lorenz_taylor.hpp"

#include <cstdint>
#include <vector>

namespace cns {

inline constexpr std::size_t kCacheLine = 64;

template <typename T>
struct alignas(kCacheLine) Padded {
    T v;
};

/// Global sum of per-group partials (ascending group id), replicated once per
/// group as every leader would hold it after an allreduce.
[[nodiscard]] std::vector<MPScalar> group_allreduce(std::span<const MPScalar> group_partials);

class ReductionEngine {
public:
    ReductionEngine(const PrecisionCtx& ctx, WorkerLayout layout);

    [[nodiscard]] const WorkerLayout& layout() const noexcept { return layout_; }
    [[nodiscard]] PrecisionCtx ctx() const { return ctx_; }

    /// Fills slots 1..order of `table` (slot 0 set). Returns the number of
    /// multiplications performed.
    std::uint64_t fill_levels(CoeffTable& table, const LorenzParams& params);

    /// Fills slot i + 1 from slots 0..i.
    void step_coefficients(CoeffTable& table, std::size_t i, const LorenzParams& params);

    /// Both level-i convolution sums.
    [[nodiscard]] ConvSums conv_pair(const CoeffTable& table, std::size_t i);

private:
    enum class Finish { sums_only, coefficients };

    void run(CoeffTable& table, const LorenzParams* params, std::size_t first_level, std::size_t last_level,
             Finish finish);
    void level(int tid, int team, CoeffTable& table, const LorenzParams* params, std::size_t i, Finish finish);
    void reserve(std::size_t max_level);

    PrecisionCtx ctx_;
    WorkerLayout layout_;
    std::vector<Padded<MPScalar>> sum_xy_;
    std::vector<Padded<MPScalar>> sum_xz_;
    std::vector<Padded<MPScalar>> tempv_;
    std::vector<Padded<std::uint64_t>> muls_;
    Padded<MPScalar> rxy_;
    Padded<MPScalar> bz_;
};

}  // namespace cns
