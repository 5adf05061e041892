#include "cns/integrator.hpp"

#include <fmt/format.h>
#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace cns {

WorkerLayout RunConfig::default_layout() {
    const int cores = omp_get_num_procs();
    return {cores, cores, kDefaultBlockSize};
}

void RunConfig::validate() const {
    const PrecisionCtx ctx(digits);
    if (order < 1) throw ConfigError(fmt::format("order must be >= 1, got {}", order));
    if (step.mode == StepMode::variable && order < 2) {
        throw ConfigError("variable stepsize needs order >= 2");
    }
    step.validate();
    if (!(t_end >= 0.0)) throw ConfigError(fmt::format("t_end must be >= 0, got {}", t_end));
    if (!(out_every > 0.0)) throw ConfigError(fmt::format("output spacing must be > 0, got {}", out_every));
    if (output_digits < 1) throw ConfigError("output digits must be >= 1");
    (void)make_layout(layout.workers, layout.group_size, layout.block_size);
    for (const auto& c : ic) (void)parse(c, ctx);
}

std::string RunConfig::canonical() const {
    return fmt::format("order={};digits={};step={};tau={};safety={};ic={},{},{};out_every={};block={}", order,
                       digits, step.mode == StepMode::variable ? "variable" : "fixed",
                       step.mode == StepMode::fixed ? step.fixed_tau : 0.0, step.safety, ic[0], ic[1], ic[2],
                       out_every, layout.block_size);
}

std::uint64_t RunConfig::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : canonical()) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string RunConfig::describe() const {
    std::string s;
    s += fmt::format("order = {}\n", order);
    s += fmt::format("digits = {}\n", digits);
    s += fmt::format("step = {}\n", step.mode == StepMode::variable ? "variable" : fmt::format("fixed:{}", step.fixed_tau));
    s += fmt::format("safety = {}\n", step.safety);
    s += fmt::format("t_end = {}\n", t_end);
    s += fmt::format("ic = {},{},{}\n", ic[0], ic[1], ic[2]);
    s += fmt::format("out_every = {}\n", out_every);
    s += fmt::format("workers = {}\n", layout.workers);
    s += fmt::format("group_size = {}\n", layout.group_size);
    s += fmt::format("block_size = {}\n", layout.block_size);
    s += fmt::format("checkpoint_every = {}\n", checkpoint_every);
    s += fmt::format("output_digits = {}\n", output_digits);
    s += fmt::format("digest = {:016x}\n", digest());
    return s;
}

void Checkpoint::write(std::ostream& out) const {
    out << fmt::format("digest {:016x}\n", digest);
    out << "config " << config << '\n';
    out << "digits " << digits << '\n';
    out << "steps " << counters.steps << '\n';
    out << "multiplications " << counters.multiplications << '\n';
    out << fmt::format("tau_sum {:a}\n", counters.tau_sum);
    out << "next_output " << next_output << '\n';
    out << "t " << t << '\n';
    out << "x " << x << '\n';
    out << "y " << y << '\n';
    out << "z " << z << '\n';
}

void Checkpoint::save(const std::string& path) const {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write checkpoint " + tmp);
        write(f);
        if (!f.flush()) throw std::runtime_error("cannot write checkpoint " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw std::runtime_error("cannot move checkpoint into place at " + path);
    }
}

Checkpoint Checkpoint::read(std::istream& in) {
    Checkpoint c;
    auto expect = [&](const char* key) {
        std::string line;
        if (!std::getline(in, line)) throw ParseError(fmt::format("checkpoint truncated before '{}'", key));
        const std::string prefix = std::string(key) + ' ';
        if (line.rfind(prefix, 0) != 0) throw ParseError(fmt::format("checkpoint: expected '{}' line", key));
        return line.substr(prefix.size());
    };
    auto to_u64 = [](const std::string& s, int base) {
        char* end = nullptr;
        const auto v = std::strtoull(s.c_str(), &end, base);
        if (s.empty() || *end != '\0') throw ParseError("checkpoint: bad integer '" + s + "'");
        return static_cast<std::uint64_t>(v);
    };
    c.digest = to_u64(expect("digest"), 16);
    c.config = expect("config");
    c.digits = static_cast<int>(to_u64(expect("digits"), 10));
    c.counters.steps = to_u64(expect("steps"), 10);
    c.counters.multiplications = to_u64(expect("multiplications"), 10);
    {
        const std::string s = expect("tau_sum");
        char* end = nullptr;
        c.counters.tau_sum = std::strtod(s.c_str(), &end);
        if (s.empty() || *end != '\0') throw ParseError("checkpoint: bad tau_sum '" + s + "'");
    }
    c.next_output = to_u64(expect("next_output"), 10);
    c.t = expect("t");
    c.x = expect("x");
    c.y = expect("y");
    c.z = expect("z");
    return c;
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open checkpoint " + path);
    return read(f);
}

namespace {

LorenzState initial_state(const RunConfig& cfg, const PrecisionCtx& ctx) {
    return {MPScalar(ctx), parse(cfg.ic[0], ctx), parse(cfg.ic[1], ctx), parse(cfg.ic[2], ctx)};
}

const RunConfig& validated(const RunConfig& cfg) {
    cfg.validate();
    return cfg;
}

}  // namespace

Integrator::Integrator(const RunConfig& cfg)
    : cfg_(validated(cfg)),
      ctx_(cfg.digits),
      params_(LorenzParams::saltzman(ctx_)),
      state_(initial_state(cfg, ctx_)),
      table_(ctx_, cfg.order),
      engine_(ctx_, cfg.layout),
      tau_mp_(ctx_),
      theta_(ctx_),
      scratch_{MPScalar(ctx_), MPScalar(ctx_), MPScalar(ctx_)} {}

Integrator::Integrator(const RunConfig& cfg, const Checkpoint& ckpt) : Integrator(cfg) {
    if (ckpt.digest != cfg.digest() || ckpt.digits != cfg.digits) {
        throw UsageError(fmt::format("checkpoint digest {:016x} does not match configuration digest {:016x}",
                                     ckpt.digest, cfg.digest()));
    }
    state_ = {parse(ckpt.t, ctx_), parse(ckpt.x, ctx_), parse(ckpt.y, ctx_), parse(ckpt.z, ctx_)};
    counters_ = ckpt.counters;
}

MPScalar Integrator::grid_time(std::uint64_t k) const {
    MPScalar t(ctx_, cfg_.out_every);
    mpfr_mul_ui(t.raw(), t.raw(), static_cast<unsigned long>(k), MPFR_RNDN);
    return t;
}

void Integrator::prepare() {
    if (prepared_) return;
    table_.set_origin(state_);
    (void)engine_.fill_levels(table_, params_);
    if (cfg_.step.mode == StepMode::fixed) {
        step_ = {fixed_stepsize(cfg_.step), StepStatus::ok};
    } else {
        step_ = optimal_stepsize(table_, cfg_.step);
    }
    if (step_.status != StepStatus::fixed_point) {
        mpfr_set_d(tau_mp_.raw(), step_.tau, MPFR_RNDN);
    }
    prepared_ = true;
}

double Integrator::current_tau() {
    prepare();
    return step_.status == StepStatus::fixed_point ? 0.0 : step_.tau;
}

bool Integrator::needs_step_before(const MPScalar& target) {
    prepare();
    if (step_.status == StepStatus::fixed_point) return false;
    add_into(theta_, state_.t, tau_mp_);
    return theta_ < target;
}

void Integrator::take_step() {
    prepare();
    if (step_.status == StepStatus::fixed_point) {
        throw UsageError("take_step at a fixed point");
    }
    horner_eval_into(scratch_, table_, tau_mp_);
    if (!scratch_.x.is_finite() || !scratch_.y.is_finite() || !scratch_.z.is_finite()) {
        throw OverflowError("state left the representable range");
    }
    std::swap(state_.x, scratch_.x);
    std::swap(state_.y, scratch_.y);
    std::swap(state_.z, scratch_.z);
    add_into(state_.t, state_.t, tau_mp_);
    ++counters_.steps;
    counters_.multiplications += step_mul_count(cfg_.order);
    counters_.tau_sum += step_.tau;
    prepared_ = false;
}

Point3 Integrator::dense(const MPScalar& target) {
    prepare();
    if (target < state_.t) {
        throw UsageError("dense output requested before the current step");
    }
    sub_into(theta_, target, state_.t);
    Point3 out{MPScalar(ctx_), MPScalar(ctx_), MPScalar(ctx_)};
    horner_eval_into(out, table_, theta_);
    return out;
}

Point3 Integrator::advance_to(const MPScalar& target) {
    while (needs_step_before(target)) take_step();
    return dense(target);
}

Checkpoint Integrator::checkpoint(std::uint64_t next_output) const {
    Checkpoint c;
    c.digest = cfg_.digest();
    c.config = cfg_.canonical();
    c.digits = cfg_.digits;
    c.counters = counters_;
    c.next_output = next_output;
    c.t = format(state_.t);
    c.x = format(state_.x);
    c.y = format(state_.y);
    c.z = format(state_.z);
    return c;
}

}  // namespace cns
