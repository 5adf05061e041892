#pragma once

// Block partition and canonical combination tree for the convolution sums.
//
// The j-range 0..i of a level-i convolution is cut into blocks of at most
// `block_size` indices. Each block is summed left to right, then the block
// partials are combined by a stride-doubling tree: at stride s = 1, 2, 4, ...
// slot k (k % 2s == 0) absorbs slot k + s when k + s < count. The tree shape
// depends only on the block count, so every worker topology produces the same
// bits.

#include "cns/mp_scalar.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace cns {

inline constexpr std::size_t kDefaultBlockSize = 32;

struct WorkerLayout {
    int workers = 1;
    int group_size = 1;  // workers per emulated node
    std::size_t block_size = kDefaultBlockSize;

    [[nodiscard]] int group_count() const noexcept { return (workers + group_size - 1) / group_size; }
    [[nodiscard]] int group_of(int worker) const noexcept { return worker / group_size; }
    [[nodiscard]] int group_members(int group) const noexcept {
        const int rest = workers - group * group_size;
        return rest < group_size ? rest : group_size;
    }
};

/// Throws ConfigError for non-positive fields. group_size > workers is
/// clamped to workers.
[[nodiscard]] WorkerLayout make_layout(int workers, int group_size, std::size_t block_size);

struct Block {
    std::size_t id;
    std::size_t begin;  // first j
    std::size_t end;    // one past last j
};

[[nodiscard]] constexpr std::size_t block_count(std::size_t i, std::size_t block_size) noexcept {
    return (i + block_size) / block_size;
}

[[nodiscard]] constexpr std::size_t next_pow2(std::size_t n) noexcept {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

[[nodiscard]] std::vector<Block> plan_blocks(std::size_t i, const WorkerLayout& layout);

[[nodiscard]] constexpr Block block_at(std::size_t i, std::size_t block_size, std::size_t id) noexcept {
    const std::size_t begin = id * block_size;
    const std::size_t end = begin + block_size < i + 1 ? begin + block_size : i + 1;
    return {id, begin, end};
}

/// Canonical tree levels with stride in [first_stride, span_len) over
/// slots[first, first + span_len), restricted to indices below `count`. The
/// subtree root is left in slots[first]. Requires span_len a power of two,
/// first % span_len == 0, and all strides below first_stride already applied.
template <typename Slots, typename Get>
void tree_reduce_range(Slots& slots, Get get, std::size_t first, std::size_t span_len, std::size_t count,
                       std::size_t first_stride = 1) {
    for (std::size_t stride = first_stride; stride < span_len; stride <<= 1) {
        for (std::size_t k = first; k < first + span_len; k += 2 * stride) {
            if (k + stride < count) {
                add_into(get(slots[k]), get(slots[k]), get(slots[k + stride]));
            }
        }
    }
}

/// Full canonical tree over `values`; returns the root (values[0] on exit).
MPScalar& tree_reduce(std::span<MPScalar> values);

}  // namespace cns
