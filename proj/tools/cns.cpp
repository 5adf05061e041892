// cns: multiple-precision Taylor integration of the Lorenz system.
//
//   cns integrate   --order N --digits K [--step variable|fixed:TAU] --t-end T ...
//   cns verify      --order N --digits K --check-order N2 --check-digits K2 --t-end T
//   cns calibrate-n --orders 40,60,80 --digits K --t-end H
//   cns calibrate-k --digits-list 60,80,100 --order N --t-end H
//   cns estimate    --target T --fit-n SLOPE,INTERCEPT --fit-k SLOPE,INTERCEPT --reserve 0.05
//   cns bench       --order N --digits K --workers-list 1,2,4 --steps 20

#include "cns/driver.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

struct CommonArgs {
    int order = 0;
    int digits = 0;
    std::string step = "variable";
    double t_end = 0.0;
    std::string ic = std::string(cns::kBenchmarkIcX) + "," + cns::kBenchmarkIcY + "," + cns::kBenchmarkIcZ;
    double out_every = 1.0;
    int workers = 0;
    int group_size = 0;
    std::size_t block_size = cns::kDefaultBlockSize;
    std::uint64_t checkpoint_every = 0;
};

void add_common(CLI::App* app, CommonArgs& a, bool need_order, bool need_digits) {
    auto* o = app->add_option("--order", a.order, "Taylor order N");
    auto* d = app->add_option("--digits", a.digits, "precision K in decimal digits");
    if (need_order) o->required();
    if (need_digits) d->required();
    app->add_option("--step", a.step, "variable | fixed:TAU")->capture_default_str();
    app->add_option("--t-end", a.t_end, "integration horizon (time units)");
    app->add_option("--ic", a.ic, "initial condition x,y,z as exact decimals")->capture_default_str();
    app->add_option("--out-every", a.out_every, "output grid spacing")->capture_default_str();
    app->add_option("--workers", a.workers, "worker threads (default: all cores)");
    app->add_option("--group-size", a.group_size, "workers per group (default: all workers)");
    app->add_option("--block-size", a.block_size, "convolution indices per reduction block")->capture_default_str();
    app->add_option("--checkpoint-every", a.checkpoint_every, "steps between checkpoints (0: off)");
}

cns::StepRule parse_step(const std::string& s) {
    if (s == "variable") return cns::StepRule::variable();
    if (s == "fixed") return cns::StepRule::fixed(cns::kDefaultFixedTau);
    if (s.rfind("fixed:", 0) == 0) {
        std::size_t used = 0;
        const std::string num = s.substr(6);
        double tau = 0.0;
        try {
            tau = std::stod(num, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != num.size()) throw cns::ConfigError("bad fixed step '" + s + "'");
        return cns::StepRule::fixed(tau);
    }
    throw cns::ConfigError("--step must be 'variable' or 'fixed:TAU', got '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

cns::RunConfig to_config(const CommonArgs& a) {
    cns::RunConfig c;
    c.order = a.order;
    c.digits = a.digits;
    c.step = parse_step(a.step);
    c.t_end = a.t_end;
    const auto parts = split(a.ic, ',');
    if (parts.size() != 3) throw cns::ConfigError("--ic needs three comma-separated values");
    c.ic = {parts[0], parts[1], parts[2]};
    c.out_every = a.out_every;
    const auto defaults = cns::RunConfig::default_layout();
    const int w = a.workers > 0 ? a.workers : defaults.workers;
    c.layout = cns::make_layout(w, a.group_size > 0 ? a.group_size : w, a.block_size);
    c.checkpoint_every = a.checkpoint_every;
    return c;
}

cns::TcFit parse_fit(const std::string& s) {
    const auto parts = split(s, ',');
    if (parts.size() != 2) throw cns::ConfigError("fit must be SLOPE,INTERCEPT, got '" + s + "'");
    cns::TcFit f;
    f.slope = std::stod(parts[0]);
    f.intercept = std::stod(parts[1]);
    return f;
}

void print_header(std::ostream& out, const cns::RunConfig& cfg) {
    std::istringstream lines(cfg.describe());
    for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
}

void print_fit(std::ostream& out, const char* what, const cns::TcFit& fit) {
    fmt::print(out, "# fit {}: Tc = {:.4f} * x + {:.4f}  (rms residual {:.4f}, {} points)\n", what, fit.slope,
               fit.intercept, fit.residual, fit.points.size());
}

void print_sweep(std::ostream& out, const char* abscissa, const std::vector<cns::SweepPoint>& sweep) {
    fmt::print(out, "{},tc,decoupled\n", abscissa);
    for (const auto& p : sweep) fmt::print(out, "{},{},{}\n", p.abscissa, p.tc.tc, p.tc.decoupled ? 1 : 0);
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (const auto& p : split(s, ',')) out.push_back(std::stoi(p));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiple-precision Taylor integration of the Lorenz system with parallel coefficient reduction"};
    app.set_config("--config", "", "read options from an INI/TOML file");
    app.require_subcommand(1);

    // integrate
    CommonArgs integ_args;
    std::string out_path, checkpoint_file = "cns.ckpt", resume_path;
    int output_digits = cns::kDefaultOutputDigits;
    bool full_digits = false;
    std::uint64_t max_steps = 0;
    auto* integrate = app.add_subcommand("integrate", "integrate a trajectory and emit it on the output grid");
    add_common(integrate, integ_args, true, true);
    integrate->add_option("--out", out_path, "trajectory CSV (default: stdout)");
    integrate->add_option("--output-digits", output_digits, "significant digits per value")->capture_default_str();
    integrate->add_flag("--full-digits", full_digits, "print every value with all K digits");
    integrate->add_option("--checkpoint-file", checkpoint_file, "checkpoint path")->capture_default_str();
    integrate->add_option("--resume", resume_path, "resume from a checkpoint file");
    integrate->add_option("--max-steps", max_steps, "stop (and checkpoint) after this many steps");

    // verify
    CommonArgs ver_args;
    int check_order = 0, check_digits = 0, required = cns::kRequiredDigits;
    auto* verify = app.add_subcommand("verify", "run a main/check pair and compare them on the output grid");
    add_common(verify, ver_args, true, true);
    verify->add_option("--check-order", check_order, "order of the verification run")->required();
    verify->add_option("--check-digits", check_digits, "precision of the verification run")->required();
    verify->add_option("--required-digits", required, "digits that must agree")->capture_default_str();

    // calibrate-n / calibrate-k
    CommonArgs cal_n_args, cal_k_args;
    std::string orders_list, digits_list;
    int cal_required = cns::kRequiredDigits;
    double cal_grid = 1.0;
    auto* cal_n = app.add_subcommand("calibrate-n", "Tc versus order at fixed precision");
    add_common(cal_n, cal_n_args, false, true);
    cal_n->add_option("--orders", orders_list, "comma-separated orders")->required();
    auto* cal_k = app.add_subcommand("calibrate-k", "Tc versus precision at fixed order");
    add_common(cal_k, cal_k_args, true, false);
    cal_k->add_option("--digits-list", digits_list, "comma-separated precisions")->required();
    for (auto* sub : {cal_n, cal_k}) {
        sub->add_option("--required-digits", cal_required, "decoupling threshold")->capture_default_str();
        sub->add_option("--grid", cal_grid, "comparison grid spacing")->capture_default_str();
    }

    // estimate
    double target = 0.0;
    std::string fit_n_str, fit_k_str, reserves = "0.05,0.10";
    auto* estimate = app.add_subcommand("estimate", "order and precision needed for a target horizon");
    estimate->add_option("--target", target, "target time")->required();
    estimate->add_option("--fit-n", fit_n_str, "Tc-N fit as SLOPE,INTERCEPT")->required();
    estimate->add_option("--fit-k", fit_k_str, "Tc-K fit as SLOPE,INTERCEPT")->required();
    estimate->add_option("--reserve", reserves, "comma-separated reserve fractions")->capture_default_str();

    // bench
    CommonArgs bench_args;
    std::string workers_list = "1,2,4";
    int bench_steps = 20;
    int fixed_order = 0;
    double work_horizon = 0.0;
    auto* bench = app.add_subcommand("bench", "per-step timing across worker counts; optional work comparison");
    add_common(bench, bench_args, true, true);
    bench->add_option("--workers-list", workers_list, "comma-separated worker counts")->capture_default_str();
    bench->add_option("--steps", bench_steps, "timed steps per worker count")->capture_default_str();
    bench->add_option("--fixed-order", fixed_order, "with --work-horizon: order of the fixed-step run");
    bench->add_option("--work-horizon", work_horizon, "compare variable vs fixed(0.01) multiplications up to here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (integrate->parsed()) {
            cns::RunConfig cfg = to_config(integ_args);
            cfg.output_digits = full_digits ? cfg.digits + cns::kGuardDigits : output_digits;
            cns::RunOptions opts;
            opts.checkpoint_path = checkpoint_file;
            opts.max_steps = max_steps;
            opts.interrupt = &g_interrupted;
            if (!resume_path.empty()) opts.resume = cns::Checkpoint::load(resume_path);
            std::signal(SIGINT, on_sigint);

            std::ofstream file;
            std::ostream* out = &std::cout;
            if (!out_path.empty()) {
                file.open(out_path, opts.resume ? std::ios::app : std::ios::trunc);
                if (!file) throw std::runtime_error("cannot open " + out_path);
                out = &file;
            }
            std::ostream& summary = out_path.empty() ? std::cerr : std::cout;
            if (!opts.resume) {
                print_header(*out, cfg);
                *out << "t,x,y,z\n";
            }
            const int nd = std::min(cfg.output_digits, cfg.digits + cns::kGuardDigits);
            const auto result = cns::run_integration(
                cfg,
                [&](const cns::MPScalar& t, const cns::Point3& p) {
                    *out << cns::format(t, nd) << ',' << cns::format(p.x, nd) << ',' << cns::format(p.y, nd) << ','
                         << cns::format(p.z, nd) << '\n';
                },
                opts);
            out->flush();
            if (result.completed) {
                fmt::print(summary, "final t = {}\n", cfg.t_end);
                fmt::print(summary, "final x = {}\n", cns::format(result.final_state->x, cfg.digits));
                fmt::print(summary, "final y = {}\n", cns::format(result.final_state->y, cfg.digits));
                fmt::print(summary, "final z = {}\n", cns::format(result.final_state->z, cfg.digits));
            } else {
                fmt::print(summary, "stopped early; checkpoint written to {}\n", checkpoint_file);
            }
            fmt::print(summary, "steps = {}\nmultiplications = {}\naverage tau = {:.6g}\nwall seconds = {:.3f}\n",
                       result.counters.steps, result.counters.multiplications, result.counters.average_tau(),
                       result.wall_seconds);
            return result.completed ? 0 : 3;
        }
        if (verify->parsed()) {
            const cns::RunConfig main_cfg = to_config(ver_args);
            cns::RunConfig check_cfg = main_cfg;
            check_cfg.order = check_order;
            check_cfg.digits = check_digits;
            print_header(std::cout, main_cfg);
            fmt::print("# check order = {}, check digits = {}\n", check_order, check_digits);
            const auto rep = cns::verify_pair(main_cfg, check_cfg, required);
            fmt::print("t,digits\n");
            for (const auto& [t, d] : rep.agreement) fmt::print("{},{}\n", t, d);
            if (rep.pass) {
                fmt::print("# PASS: >= {} digits at every grid time (minimum {})\n", required, rep.min_digits);
                return 0;
            }
            fmt::print("# FAIL: first grid time below {} digits is t = {}\n", required, *rep.first_failure);
            return 1;
        }
        if (cal_n->parsed() || cal_k->parsed()) {
            const bool by_n = cal_n->parsed();
            cns::RunConfig base = to_config(by_n ? cal_n_args : cal_k_args);
            const cns::AgreementCriterion crit{cal_required, cal_grid};
            const auto values = parse_int_list(by_n ? orders_list : digits_list);
            if (!by_n) base.digits = values.front();
            print_header(std::cout, base);
            auto progress = [](const cns::SweepPoint& p) {
                fmt::print(stderr, "  {} -> Tc = {}{}\n", p.abscissa, p.tc.tc, p.tc.decoupled ? "" : " (horizon)");
            };
            const auto sweep = by_n ? cns::sweep_tc_n(base, values, crit, progress)
                                    : cns::sweep_tc_k(base, values, crit, progress);
            print_sweep(std::cout, by_n ? "order" : "digits", sweep);
            try {
                print_fit(std::cout, by_n ? "Tc-N" : "Tc-K", cns::fit_sweep(sweep));
            } catch (const cns::ConfigError& e) {
                fmt::print("# no fit: {}\n", e.what());
            }
            return 0;
        }
        if (estimate->parsed()) {
            const auto fn = parse_fit(fit_n_str);
            const auto fk = parse_fit(fit_k_str);
            fmt::print("reserve,order,digits\n");
            for (const auto& r : split(reserves, ',')) {
                const auto est = cns::estimate_nk(target, fn, fk, std::stod(r));
                fmt::print("{},{},{}\n", r, est.order, est.digits);
            }
            return 0;
        }
        if (bench->parsed()) {
            const cns::RunConfig cfg = to_config(bench_args);
            print_header(std::cout, cfg);
            const auto rows = cns::bench(cfg, parse_int_list(workers_list), bench_steps);
            fmt::print("workers,steps,seconds_per_step,fill_seconds,serial_seconds,speedup,efficiency\n");
            for (const auto& r : rows) {
                fmt::print("{},{},{:.6f},{:.6f},{:.6f},{:.3f},{:.3f}\n", r.workers, r.steps, r.seconds_per_step,
                           r.fill_seconds, r.serial_seconds, r.speedup, r.efficiency);
            }
            if (work_horizon > 0.0) {
                if (fixed_order < 1) throw cns::ConfigError("--work-horizon needs --fixed-order");
                cns::RunConfig var_cfg = cfg;
                var_cfg.step = cns::StepRule::variable();
                cns::RunConfig fix_cfg = cfg;
                fix_cfg.order = fixed_order;
                fix_cfg.step = cns::StepRule::fixed(cns::kDefaultFixedTau);
                const auto w = cns::compare_work(var_cfg, fix_cfg, work_horizon);
                fmt::print("# work over [0, {}]\n", work_horizon);
                fmt::print("mode,order,steps,multiplications,average_tau\n");
                fmt::print("variable,{},{},{},{:.6g}\n", w.order_variable, w.variable.steps,
                           w.variable.multiplications, w.variable.average_tau());
                fmt::print("fixed,{},{},{},{:.6g}\n", w.order_fixed, w.fixed.steps, w.fixed.multiplications,
                           w.fixed.average_tau());
                fmt::print("# variable/fixed multiplications = {:.4f}, per-step work ratio = {:.4f}\n", w.ratio(),
                           w.per_step_ratio());
            }
            return 0;
        }
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 0;
}
