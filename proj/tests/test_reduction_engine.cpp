#include "cns/reduction_engine.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace cns;

namespace {

bool same_table(const CoeffTable& a, const CoeffTable& b) {
    if (a.order() != b.order()) return false;
    for (int i = 0; i <= a.order(); ++i) {
        if (!a.x[i].identical(b.x[i]) || !a.y[i].identical(b.y[i]) || !a.z[i].identical(b.z[i])) return false;
    }
    return true;
}

CoeffTable parallel_table(const LorenzState& s, const LorenzParams& p, int order, WorkerLayout layout,
                          std::uint64_t* muls = nullptr) {
    CoeffTable t(s.x.ctx(), order);
    t.set_origin(s);
    ReductionEngine engine(s.x.ctx(), layout);
    const auto m = engine.fill_levels(t, p);
    if (muls) *muls = m;
    return t;
}

}  // namespace

TEST_CASE("plan_blocks") {
    auto blocks = plan_blocks(5, make_layout(4, 4, 2));
    REQUIRE(blocks.size() == 3);
    CHECK((blocks[0].begin == 0 && blocks[0].end == 2));
    CHECK((blocks[1].begin == 2 && blocks[1].end == 4));
    CHECK((blocks[2].begin == 4 && blocks[2].end == 6));

    for (const std::size_t b : {std::size_t{1}, std::size_t{7}, std::size_t{1000}}) {
        blocks = plan_blocks(0, make_layout(1, 1, b));
        REQUIRE(blocks.size() == 1);
        CHECK((blocks[0].begin == 0 && blocks[0].end == 1));
    }

    blocks = plan_blocks(10000, make_layout(3, 1, 64));
    CHECK(blocks.size() == 157);
    CHECK(blocks.back().end - blocks.back().begin == 17);

    // The partition never depends on the worker topology.
    for (const int w : {1, 2, 3, 8}) {
        for (const int g : {1, 2, w}) {
            const auto other = plan_blocks(10000, make_layout(w, g, 64));
            REQUIRE(other.size() == blocks.size());
            for (std::size_t k = 0; k < other.size(); ++k) {
                CHECK(other[k].begin == blocks[k].begin);
                CHECK(other[k].end == blocks[k].end);
            }
        }
    }
}

TEST_CASE("layout validation") {
    CHECK_THROWS_AS((void)make_layout(0, 1, 4), ConfigError);
    CHECK_THROWS_AS((void)make_layout(2, 0, 4), ConfigError);
    CHECK_THROWS_AS((void)make_layout(2, 1, 0), ConfigError);
    CHECK(make_layout(3, 8, 4).group_size == 3);
    const auto l = make_layout(7, 3, 4);
    CHECK(l.group_count() == 3);
    CHECK(l.group_members(2) == 1);
}

TEST_CASE("conv_pair at level zero") {
    const auto ctx = make_ctx(40);
    CoeffTable t(ctx, 4);
    t.set_origin(benchmark_state(ctx));
    ReductionEngine engine(ctx, make_layout(4, 2, 8));
    const ConvSums s = engine.conv_pair(t, 0);
    CHECK(s.xy.identical(t.x[0] * t.y[0]));
    CHECK(s.xz.identical(t.x[0] * t.z[0]));
    CHECK(format(s.xy, 40) == "2.76184e2");
    CHECK(format(s.xz, 40) == "-5.63112e2");
}

TEST_CASE("conv_pair matches the sequential oracle for any worker count") {
    std::mt19937_64 rng(42);
    const auto ctx = make_ctx(64);
    const auto params = LorenzParams::saltzman(ctx);
    const auto table = serial::fill_table(testing::random_state(rng, ctx), params, 60, 4);
    const auto xy = testing::conv_oracle(table.x, table.y, 50, 4);
    const auto xz = testing::conv_oracle(table.x, table.z, 50, 4);
    for (const int w : {1, 2, 3, 4, 8}) {
        for (const int g : {1, 2, 3, w}) {
            ReductionEngine engine(ctx, make_layout(w, g, 4));
            const ConvSums s = engine.conv_pair(table, 50);
            CAPTURE(w);
            CAPTURE(g);
            CHECK(s.xy.identical(xy));
            CHECK(s.xz.identical(xz));
        }
    }
}

TEST_CASE("step_coefficients fills one level") {
    const auto ctx = make_ctx(30);
    const auto params = LorenzParams::saltzman(ctx);
    CoeffTable t(ctx, 3);
    t.set_origin(benchmark_state(ctx));
    ReductionEngine engine(ctx, make_layout(3, 3, 2));
    engine.step_coefficients(t, 0, params);
    const Point3 ref = serial::next_coeff(t, 0, params, 2);
    CHECK(t.x[1].identical(ref.x));
    CHECK(t.y[1].identical(ref.y));
    CHECK(t.z[1].identical(ref.z));
    CHECK(format(t.y[1], 30) == "1.38192e2");
    CHECK_THROWS_AS(engine.step_coefficients(t, 3, params), std::out_of_range);
}

TEST_CASE("parallel fill equals the serial fill bit for bit") {
    std::mt19937_64 rng(1234);
    const auto ctx = make_ctx(80);
    const auto params = LorenzParams::saltzman(ctx);
    for (const std::size_t b : {std::size_t{1}, std::size_t{7}, kDefaultBlockSize}) {
        const auto s = testing::random_state(rng, ctx);
        const auto reference = serial::fill_table(s, params, 200, b);
        for (const int w : {1, 2, 3, 4, 8}) {
            for (const int g : {1, 2, 3, w}) {
                std::uint64_t muls = 0;
                const auto t = parallel_table(s, params, 200, make_layout(w, g, b), &muls);
                CAPTURE(b);
                CAPTURE(w);
                CAPTURE(g);
                CHECK(same_table(t, reference));
                CHECK(muls == fill_mul_count(200));
            }
        }
    }
}

TEST_CASE("equilibrium stays at zero for any worker count") {
    const auto ctx = make_ctx(20);
    const auto params = LorenzParams::saltzman(ctx);
    for (const int w : {1, 2, 5}) {
        const auto t = parallel_table(LorenzState::at_rest(ctx), params, 40, make_layout(w, 2, 4));
        for (int i = 0; i <= 40; ++i) {
            CHECK(t.x[i].is_zero());
            CHECK(t.y[i].is_zero());
            CHECK(t.z[i].is_zero());
        }
    }
}

TEST_CASE("group_allreduce") {
    const auto ctx = make_ctx(30);
    std::mt19937_64 rng(8);
    std::vector<MPScalar> p;
    for (int k = 0; k < 4; ++k) p.push_back(parse(testing::random_decimal(rng, 30, 2), ctx));

    const auto single = group_allreduce(std::span<const MPScalar>(p.data(), 1));
    REQUIRE(single.size() == 1);
    CHECK(single[0].identical(p[0]));

    const auto four = group_allreduce(p);
    REQUIRE(four.size() == 4);
    const MPScalar expected = (p[0] + p[1]) + (p[2] + p[3]);
    for (const auto& v : four) CHECK(v.identical(expected));

    std::vector<MPScalar> three(p.begin(), p.begin() + 3);
    CHECK(group_allreduce(three)[2].identical((p[0] + p[1]) + p[2]));
}

TEST_CASE("one worker per group reproduces the single-group reduction") {
    std::mt19937_64 rng(77);
    const auto ctx = make_ctx(50);
    const auto params = LorenzParams::saltzman(ctx);
    const auto s = testing::random_state(rng, ctx);
    const auto flat = parallel_table(s, params, 150, make_layout(6, 6, 5));
    const auto split = parallel_table(s, params, 150, make_layout(6, 1, 5));
    CHECK(same_table(flat, split));
}

TEST_CASE("engine rejects a table of another precision") {
    ReductionEngine engine(make_ctx(30), make_layout(2, 2, 4));
    CoeffTable t(make_ctx(31), 4);
    CHECK_THROWS_AS((void)engine.fill_levels(t, LorenzParams::saltzman(make_ctx(31))), UsageError);
}
