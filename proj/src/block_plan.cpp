#include "cns/block_plan.hpp"

#include <string>

namespace cns {

WorkerLayout make_layout(int workers, int group_size, std::size_t block_size) {
    if (workers < 1) throw ConfigError("worker count must be >= 1, got " + std::to_string(workers));
    if (group_size < 1) throw ConfigError("group size must be >= 1, got " + std::to_string(group_size));
    if (block_size < 1) throw ConfigError("block size must be >= 1");
    return {workers, group_size > workers ? workers : group_size, block_size};
}

std::vector<Block> plan_blocks(std::size_t i, const WorkerLayout& layout) {
    const std::size_t n = block_count(i, layout.block_size);
    std::vector<Block> blocks;
    blocks.reserve(n);
    for (std::size_t id = 0; id < n; ++id) {
        blocks.push_back(block_at(i, layout.block_size, id));
    }
    return blocks;
}

MPScalar& tree_reduce(std::span<MPScalar> values) {
    if (values.empty()) throw UsageError("tree_reduce over an empty range");
    tree_reduce_range(values, [](MPScalar& v) -> MPScalar& { return v; }, 0, next_pow2(values.size()),
                      values.size());
    return values[0];
}

}  // namespace cns
