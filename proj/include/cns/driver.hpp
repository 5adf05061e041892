#pragma once

// Top-level runs behind the command-line tool: trajectory integration with
// checkpoint/resume, verification pairs, timing and work comparisons.

#include "cns/calibrator.hpp"
#include "cns/integrator.hpp"

#include <atomic>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cns {

using RowSink = std::function<void(const MPScalar& t, const Point3& p)>;

struct RunOptions {
    std::optional<Checkpoint> resume;
    std::string checkpoint_path;  // empty: never write checkpoints
    std::uint64_t max_steps = 0;  // stop after this many steps in this session; 0 = unlimited
    const std::atomic<bool>* interrupt = nullptr;
};

struct RunResult {
    bool completed = false;
    std::optional<Point3> final_state;  // dense output at t_end when completed
    Counters counters;
    double wall_seconds = 0.0;
    std::uint64_t rows = 0;
    std::uint64_t next_output = 0;
};

/// Emits every grid point t_k = k * out_every <= t_end through `sink`, then
/// the state at t_end. Writes a checkpoint every cfg.checkpoint_every steps
/// and whenever the run stops early.
RunResult run_integration(const RunConfig& cfg, const RowSink& sink, const RunOptions& opts = {});

struct VerifyReport {
    bool pass = true;
    int required_digits = kRequiredDigits;
    int min_digits = 0;
    std::optional<double> first_failure;
    std::vector<std::pair<double, int>> agreement;  // (t, digits) per grid time
};

/// Compares two runs on main's output grid up to main's t_end.
[[nodiscard]] VerifyReport verify_pair(const RunConfig& cfg_main, const RunConfig& cfg_check,
                                       int required_digits = kRequiredDigits);

struct BenchRow {
    int workers = 1;
    int steps = 0;
    double seconds_per_step = 0.0;
    double fill_seconds = 0.0;    // coefficient table, per step
    double serial_seconds = 0.0;  // stepsize and Horner, per step
    double speedup = 1.0;
    double efficiency = 1.0;
};

/// Times `steps` accepted steps per worker count (one group per run).
/// Speedup is relative to a single worker, which is always measured.
[[nodiscard]] std::vector<BenchRow> bench(const RunConfig& cfg, const std::vector<int>& worker_counts, int steps);

struct WorkComparison {
    Counters variable;
    Counters fixed;
    int order_variable = 0;
    int order_fixed = 0;

    [[nodiscard]] double ratio() const noexcept {
        return static_cast<double>(variable.multiplications) / static_cast<double>(fixed.multiplications);
    }
    [[nodiscard]] double per_step_ratio() const noexcept {
        return static_cast<double>(step_mul_count(order_variable)) / static_cast<double>(step_mul_count(order_fixed));
    }
};

/// Multiplication totals for both step modes over [0, horizon].
[[nodiscard]] WorkComparison compare_work(const RunConfig& cfg_variable, const RunConfig& cfg_fixed, double horizon);

}  // namespace cns
