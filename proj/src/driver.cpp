#include "cns/driver.hpp"

#include <algorithm>
#include <chrono>

namespace cns {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

RunResult run_integration(const RunConfig& cfg, const RowSink& sink, const RunOptions& opts) {
    const auto start = Clock::now();
    Integrator integ = opts.resume ? Integrator(cfg, *opts.resume) : Integrator(cfg);
    RunResult result;
    result.next_output = opts.resume ? opts.resume->next_output : 0;
    std::uint64_t session_steps = 0;

    auto save = [&](std::uint64_t next_output) {
        if (!opts.checkpoint_path.empty()) integ.checkpoint(next_output).save(opts.checkpoint_path);
    };
    // Steps until `target` lies in the current step; false if stopped early.
    auto reach = [&](const MPScalar& target) {
        while (integ.needs_step_before(target)) {
            integ.take_step();
            ++session_steps;
            const bool stop = (opts.max_steps != 0 && session_steps >= opts.max_steps) ||
                              (opts.interrupt != nullptr && opts.interrupt->load());
            if (stop || (cfg.checkpoint_every != 0 && integ.counters().steps % cfg.checkpoint_every == 0)) {
                save(result.next_output);
            }
            if (stop) return false;
        }
        return true;
    };

    const MPScalar t_end = integ.to_mp(cfg.t_end);
    for (;; ++result.next_output) {
        const MPScalar t = integ.grid_time(result.next_output);
        if (t > t_end) break;
        if (!reach(t)) {
            result.counters = integ.counters();
            result.wall_seconds = seconds_since(start);
            return result;
        }
        sink(t, integ.dense(t));
        ++result.rows;
    }
    if (!reach(t_end)) {
        result.counters = integ.counters();
        result.wall_seconds = seconds_since(start);
        return result;
    }
    result.final_state = integ.dense(t_end);
    result.completed = true;
    result.counters = integ.counters();
    result.wall_seconds = seconds_since(start);
    return result;
}

VerifyReport verify_pair(const RunConfig& cfg_main, const RunConfig& cfg_check, int required_digits) {
    VerifyReport rep;
    rep.required_digits = required_digits;
    rep.min_digits = std::min(cfg_main.digits, cfg_check.digits);
    lockstep_compare(cfg_main, cfg_check, cfg_main.out_every, cfg_main.t_end, [&](double t, int digits) {
        rep.agreement.emplace_back(t, digits);
        rep.min_digits = std::min(rep.min_digits, digits);
        if (digits < required_digits && !rep.first_failure) {
            rep.first_failure = t;
            rep.pass = false;
        }
        return true;
    });
    return rep;
}

std::vector<BenchRow> bench(const RunConfig& cfg, const std::vector<int>& worker_counts, int steps) {
    if (steps < 1) throw ConfigError("bench needs at least one step");
    std::vector<int> counts = worker_counts;
    if (std::find(counts.begin(), counts.end(), 1) == counts.end()) counts.insert(counts.begin(), 1);

    std::vector<BenchRow> rows;
    double serial = 0.0;
    for (const int w : counts) {
        RunConfig c = cfg;
        c.layout = make_layout(w, w, cfg.layout.block_size);
        Integrator integ(c);
        BenchRow row;
        for (int s = 0; s < steps; ++s) {
            // current_tau() fills the table and sizes the step; take_step() is Horner.
            const auto start = Clock::now();
            (void)integ.current_tau();
            const auto filled = Clock::now();
            integ.take_step();
            row.fill_seconds += std::chrono::duration<double>(filled - start).count();
            row.serial_seconds += seconds_since(filled);
        }
        row.workers = w;
        row.steps = steps;
        row.fill_seconds /= steps;
        row.serial_seconds /= steps;
        row.seconds_per_step = row.fill_seconds + row.serial_seconds;
        if (w == 1) serial = row.seconds_per_step;
        rows.push_back(row);
    }
    for (auto& row : rows) {
        row.speedup = serial / row.seconds_per_step;
        row.efficiency = row.speedup / row.workers;
    }
    return rows;
}

WorkComparison compare_work(const RunConfig& cfg_variable, const RunConfig& cfg_fixed, double horizon) {
    if (cfg_variable.step.mode != StepMode::variable || cfg_fixed.step.mode != StepMode::fixed) {
        throw UsageError("compare_work expects one variable-step and one fixed-step configuration");
    }
    WorkComparison w;
    w.order_variable = cfg_variable.order;
    w.order_fixed = cfg_fixed.order;
    {
        Integrator iv(cfg_variable);
        (void)iv.advance_to(iv.to_mp(horizon));
        w.variable = iv.counters();
    }
    {
        Integrator ifx(cfg_fixed);
        (void)ifx.advance_to(ifx.to_mp(horizon));
        w.fixed = ifx.counters();
    }
    return w;
}

}  // namespace cns
