#pragma once

// Run configuration, the stepping integrator with dense output, and exact
// checkpoints.

#include "cns/lorenz_taylor.hpp"
#include "cns/reduction_engine.hpp"
#include "cns/step_control.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace cns {

inline constexpr int kDefaultOutputDigits = 60;

struct RunConfig {
    int order = 0;
    int digits = 0;
    StepRule step = StepRule::variable();
    double t_end = 0.0;
    std::array<std::string, 3> ic{kBenchmarkIcX, kBenchmarkIcY, kBenchmarkIcZ};
    double out_every = 1.0;
    WorkerLayout layout = default_layout();
    std::uint64_t checkpoint_every = 0;  // accepted steps; 0 disables
    int output_digits = kDefaultOutputDigits;

    /// All available cores in one group, default block size.
    [[nodiscard]] static WorkerLayout default_layout();

    /// Throws ConfigError on any invalid field, ParseError on a bad IC.
    void validate() const;

    /// Fields that determine the computed bits, one `key=value` per entry.
    /// Worker topology, horizon and checkpoint cadence are excluded.
    [[nodiscard]] std::string canonical() const;

    /// FNV-1a 64 of canonical().
    [[nodiscard]] std::uint64_t digest() const;

    /// Human-readable dump of every field, for output headers.
    [[nodiscard]] std::string describe() const;
};

struct Counters {
    std::uint64_t steps = 0;
    std::uint64_t multiplications = 0;  // accepted steps only: fill + Horner advance
    double tau_sum = 0.0;

    [[nodiscard]] double average_tau() const noexcept {
        return steps == 0 ? 0.0 : tau_sum / static_cast<double>(steps);
    }
};

struct Checkpoint {
    std::uint64_t digest = 0;
    std::string config;
    Counters counters;
    std::uint64_t next_output = 0;
    int digits = 0;
    std::string t, x, y, z;  // exact decimals

    void write(std::ostream& out) const;
    void save(const std::string& path) const;
    /// Throws ParseError on a malformed file.
    [[nodiscard]] static Checkpoint read(std::istream& in);
    [[nodiscard]] static Checkpoint load(const std::string& path);
};

class Integrator {
public:
    explicit Integrator(const RunConfig& cfg);

    /// Resumes from `ckpt`; throws UsageError if its digest does not match.
    Integrator(const RunConfig& cfg, const Checkpoint& ckpt);

    [[nodiscard]] const PrecisionCtx& ctx() const noexcept { return ctx_; }
    [[nodiscard]] const RunConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const LorenzState& state() const noexcept { return state_; }
    [[nodiscard]] const Counters& counters() const noexcept { return counters_; }

    /// t_k = k * out_every, rounded in the working context.
    [[nodiscard]] MPScalar grid_time(std::uint64_t k) const;
    [[nodiscard]] MPScalar to_mp(double v) const { return MPScalar(ctx_, v); }

    /// True when the current step ends strictly before `target`.
    [[nodiscard]] bool needs_step_before(const MPScalar& target);

    /// Accepts one step. Throws OverflowError if the state leaves range.
    void take_step();

    /// Dense output at `target` inside the current step.
    [[nodiscard]] Point3 dense(const MPScalar& target);

    /// Steps as needed, then dense output at `target`.
    [[nodiscard]] Point3 advance_to(const MPScalar& target);

    /// Stepsize of the current (prepared) step; 0 at a fixed point.
    [[nodiscard]] double current_tau();

    [[nodiscard]] Checkpoint checkpoint(std::uint64_t next_output) const;

private:
    void prepare();

    RunConfig cfg_;
    PrecisionCtx ctx_;
    LorenzParams params_;
    LorenzState state_;
    CoeffTable table_;
    ReductionEngine engine_;
    Counters counters_;
    bool prepared_ = false;
    StepEstimate step_{0.0, StepStatus::ok};
    MPScalar tau_mp_;
    MPScalar theta_;
    Point3 scratch_;
};

}  // namespace cns
