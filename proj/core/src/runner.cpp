#include "rsvgd/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "json.hpp"
#include "rsvgd/error.hpp"
#include "rsvgd/log.hpp"

namespace rsvgd {
namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string num(double v) { return strprintf("%.17g", v); }

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

Target build_target(const RunConfig& cfg) {
    if (cfg.target.family == "gaussian") {
        return Target::gaussian(cfg.target.means.front(), cfg.target.covariances.front(), cfg.target.v_offset);
    }
    return Target::mixture(cfg.target.means, cfg.target.covariances, cfg.target.weights, cfg.target.v_offset);
}

Kernel build_kernel(const KernelConfig& k, double lengthscale) {
    switch (kernel_family_from_string(k.family)) {
        case KernelFamily::gaussian_rbf: return Kernel::gaussian_rbf(lengthscale);
        case KernelFamily::imq: return Kernel::imq(lengthscale, k.beta);
        case KernelFamily::rational_quadratic: return Kernel::rational_quadratic(lengthscale, k.alpha_rq);
    }
    throw ConfigError("unknown kernel family");
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t w1_seed(const RunConfig& cfg) { return cfg.w1.seed ? *cfg.w1.seed : splitmix64(cfg.seed ^ 0x77317731ULL); }

DiagnosticsOptions diag_options(const RunConfig& cfg) {
    DiagnosticsOptions o;
    o.compute_c_star = cfg.diagnostics_c_star;
    o.compute_w1 = cfg.w1.enabled.value_or(false);
    o.w1_method = cfg.w1.method == "exact_1d" ? W1Method::exact_1d : W1Method::sliced;
    o.w1_target_samples = cfg.w1.target_samples;
    o.w1_slices = cfg.w1.slices;
    o.w1_seed = w1_seed(cfg);
    return o;
}

std::size_t snapshot_budget(const RunConfig& cfg, std::size_t N) {
    return std::max<std::size_t>(1, std::min(cfg.annealed.max_snapshots, cfg.annealed.max_points / std::max<std::size_t>(N, 1)));
}

DiagnosticsReport annealed_report(const RunConfig& cfg, const RunSetup& s, const WeightedEmpiricalMeasure& m, double nu) {
    DiagnosticsReport r;
    r.nu = nu;
    r.ksd2 = ksd_squared(s.kernel, s.target, m);
    r.i_nu_stein = reg_stein_fisher_linear(s.kernel, s.target, m, nu);
    r.v_average = m.weights.dot(s.target.potential_rows(m.positions));
    const DiagnosticsOptions o = diag_options(cfg);
    if (o.compute_w1) {
        r.w1_to_target = w1_distance(m, s.target, o.w1_method, o.w1_target_samples, o.w1_slices, o.w1_seed);
    }
    return r;
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

std::string snapshot_csv(const Matrix& X) {
    std::string out;
    for (Eigen::Index a = 0; a < X.cols(); ++a) out += (a ? ",x_" : "x_") + std::to_string(a + 1);
    out += '\n';
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index a = 0; a < X.cols(); ++a) {
            if (a) out += ',';
            out += num(X(i, a));
        }
        out += '\n';
    }
    return out;
}

ojson report_json(const DiagnosticsReport& r, bool with_c_star) {
    ojson j;
    j["ksd2"] = r.ksd2;
    j["i_nu_stein"] = r.i_nu_stein;
    if (with_c_star) {
        j["c_star"] = r.c_star;
        j["c_star_bound"] = r.c_star_bound;
    }
    j["v_average"] = r.v_average;
    j["nu"] = r.nu;
    j["w1"] = r.w1_to_target ? ojson(*r.w1_to_target) : ojson(nullptr);
    return j;
}

ojson schedule_json(const Schedule& s, const ScheduleConstants& c) {
    ojson j;
    j["kind"] = s.kind;
    j["T"] = s.T;
    j["T_formula"] = s.T_real;
    j["theta"] = s.theta;
    j["c_h"] = s.c_h;
    if (s.kind == "corollary9_2") {
        j["c"] = s.c;
        j["c_nu"] = s.c_nu;
    }
    if (s.kind == "corollary9_1" || s.kind == "corollary9_2") j["rate_exponent"] = s.rate_exponent;
    if (s.T > 100000) {
        j["compressed"] = true;
        j["h_first"] = s.h_at(1);
        j["h_last"] = s.h_at(s.T);
        j["nu_first"] = s.nu_at(1);
        j["nu_last"] = s.nu_at(s.T);
        j["C_1"] = s.C.empty() ? schedule_cn(c, s.nu_at(1), 0.0) : s.C.front();
        j["C_T"] = s.C.size() >= s.T ? s.C[s.T - 1] : schedule_cn(c, s.nu_at(s.T), s.cumulative(s.T - 1));
        return j;
    }
    ojson hs = ojson::array();
    ojson nus = ojson::array();
    ojson cs = ojson::array();
    double S = 0.0;
    for (std::size_t n = 1; n <= s.T; ++n) {
        const double h = s.h_at(n);
        const double nu = s.nu_at(n);
        hs.push_back(h);
        nus.push_back(nu);
        cs.push_back(s.C.size() >= n ? s.C[n - 1] : schedule_cn(c, nu, S));
        S += h / nu;
    }
    j["h"] = hs;
    j["nu"] = nus;
    j["C_n"] = cs;
    return j;
}

ojson constants_json(const RunResult& r) {
    ojson j;
    j["lengthscale"] = r.lengthscale;
    j["kernel_bound_B"] = r.kernel_bound;
    j["C_V"] = r.constants.C_V;
    j["C_V_empirical"] = r.constants.C_V_empirical;
    j["A"] = r.constants.A;
    j["alpha"] = r.constants.alpha;
    j["c_star"] = r.constants.c_star;
    j["c_star_grid_sup"] = r.constants.c_star_raw;
    j["c_star_margin"] = r.constants.c_star_margin;
    j["c_star_grid"] = r.constants.c_star_grid;
    j["C_pi"] = r.constants.C_pi ? ojson(*r.constants.C_pi) : ojson(nullptr);
    j["v_offset"] = r.constants.v_offset;
    j["M_proxy"] = r.schedule_constants.M_proxy;
    j["K"] = r.schedule_constants.K;
    return j;
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t N, std::size_t replicate) {
    return seed ^ splitmix64(splitmix64(static_cast<std::uint64_t>(N)) ^ static_cast<std::uint64_t>(replicate));
}

RunSetup prepare_run(const RunConfig& cfg) {
    Target target = build_target(cfg);
    if (static_cast<std::size_t>(target.dim()) != cfg.d) throw ConfigError("target dimension does not match d");
    InitSpec init;
    init.mean = *cfg.init.mean;
    init.covariance = *cfg.init.covariance;
    init.restrict_K = cfg.init.restrict_K;
    ParticleState state = initialize_particles(static_cast<Eigen::Index>(cfg.N), static_cast<Eigen::Index>(cfg.d), init,
                                               target, cfg.seed);
    const double ell = cfg.kernel.lengthscale ? *cfg.kernel.lengthscale : median_pairwise_distance(state.positions);
    Kernel kernel = build_kernel(cfg.kernel, ell);

    CStarGridOptions grid;
    grid.points = cfg.c_star_grid.points;
    grid.half_width_sds = cfg.c_star_grid.half_width_sds;
    grid.margin = cfg.c_star_grid.margin;
    TargetConstants constants = derive_constants(target, kernel, grid);

    ScheduleConstants sc;
    sc.A = constants.A;
    sc.alpha = constants.alpha;
    sc.B = kernel.bound();
    sc.C_V = constants.C_V;
    if (cfg.schedule.m_proxy) {
        sc.M_proxy = *cfg.schedule.m_proxy;
    } else if (cfg.schedule.kind == "constant") {
        // Constant schedules never evaluate C_n; an overflowing default is recorded as NaN.
        const double m = 10.0 * (1.0 + std::exp(constants.C_V * constants.A * constants.A));
        sc.M_proxy = std::isfinite(m) ? m : std::numeric_limits<double>::quiet_NaN();
    } else {
        sc.M_proxy = default_m_proxy(constants.C_V, constants.A);
    }
    sc.K = cfg.schedule.K ? *cfg.schedule.K
                          : (cfg.init.restrict_K ? *cfg.init.restrict_K : v_average(target, state.positions));
    sc.N = cfg.N;
    sc.d = cfg.d;
    return RunSetup{std::move(target), std::move(kernel), std::move(state), constants, sc};
}

Schedule resolve_schedule(const RunConfig& cfg, const RunSetup& setup) {
    const ScheduleConfig& s = cfg.schedule;
    Schedule sched;
    if (s.kind == "constant") {
        if (!s.h) throw ConfigError("constant schedule needs schedule.h");
        if (!s.T) throw ConfigError("constant schedule needs schedule.T");
        const double nu = s.nu.set() ? s.nu.resolve(cfg.N) : 1.0;
        return constant_schedule(*s.h, nu, *s.T);
    }
    if (s.kind == "theorem7") {
        if (!s.T) throw ConfigError("theorem7 schedule needs schedule.T");
        std::vector<double> nu;
        if (s.nu.set()) nu.push_back(s.nu.resolve(cfg.N));
        return theorem7_schedule(setup.schedule_constants, s.theta.value_or(1.0), *s.T, nu);
    }
    if (s.kind == "corollary9_1") {
        sched = corollary9_regime1(setup.schedule_constants);
    } else {
        if (!s.c) throw ConfigError("corollary9_2 schedule needs schedule.c");
        sched = corollary9_regime2(setup.schedule_constants, *s.c, s.c_nu);
    }
    if (s.T) return sched.truncated(*s.T);
    if (sched.T > 10000000) {
        throw ConfigError(strprintf("schedule length %.3g exceeds 1e7 steps; set schedule.T to run a prefix", sched.T_real));
    }
    return sched;
}

RunResult run_discrete(const RunConfig& cfg, bool record_trace) {
    const Stopwatch clock;
    const RunSetup setup = prepare_run(cfg);
    RunResult res;
    res.mode = RunMode::discrete;
    res.schedule = resolve_schedule(cfg, setup);
    res.constants = setup.constants;
    res.schedule_constants = setup.schedule_constants;
    res.lengthscale = setup.kernel.lengthscale();
    res.kernel_bound = setup.kernel.bound();
    const Schedule& sched = res.schedule;
    const std::size_t T = sched.T;
    const DiagnosticsOptions opts = diag_options(cfg);
    const double base_nu = T > 0 ? sched.nu_at(T) : (cfg.schedule.nu.set() ? cfg.schedule.nu.resolve(cfg.N) : 1.0);
    res.nu = base_nu;

    auto record = [&](const ParticleState& st) {
        TraceRecord row;
        row.step = st.step;
        row.time = st.time;
        if (st.step < T) row.h = sched.h_at(st.step + 1);
        row.nu = st.step < T ? sched.nu_at(st.step + 1) : base_nu;
        row.diagnostics = evaluate_diagnostics(setup.kernel, setup.target, setup.constants, st.positions, row.nu, opts);
        if (cfg.record_wallclock) row.wallclock_ms = clock.ms();
        res.trace.push_back(std::move(row));
    };

    const std::size_t budget = snapshot_budget(cfg, cfg.N);
    const std::size_t stride = T == 0 ? 1 : std::max<std::size_t>(1, (T + budget - 1) / budget);
    bool all_regularized = T > 0;
    for (std::size_t n = 1; n <= T && all_regularized; ++n) all_regularized = sched.nu_at(n) < 1.0;
    std::vector<double> snap_weights;

    ParticleState state = setup.init;
    state.step = 0;
    state.time = 0.0;
    try {
        for (std::size_t n = 0; n <= T; ++n) {
            if (record_trace && (n % cfg.diagnostics_every == 0 || n == T)) record(state);
            if (n == T) break;
            // state n carries the weight of step n + 1
            const double h = sched.h_at(n + 1);
            const double nu = sched.nu_at(n + 1);
            const double w = all_regularized ? h / (1.0 - nu) : 1.0;
            if (n % stride == 0) {
                res.snapshots.push_back({state.time, n, state.positions});
                snap_weights.push_back(w);
            } else {
                snap_weights.back() += w;
            }
            state = rsvgd_step(setup.kernel, setup.target, state, h, nu);
            if (state.positions.cwiseAbs().maxCoeff() > kDivergenceThreshold) {
                throw DivergenceError(strprintf("particles diverged at step %zu", state.step), state.time, state.step);
            }
            res.last_valid_step = state.step;
        }
    } catch (const NumericalError& e) {
        res.ok = false;
        res.error = e.what();
        res.final_state = state;
        log_warning(std::string("discrete run stopped: ") + e.what());
        return res;
    }
    res.final_state = state;
    if (T == 0) {
        res.snapshots.push_back({0.0, 0, state.positions});
        snap_weights.push_back(1.0);
    }
    res.annealed = annealed_measure(res.snapshots, AnnealMode::discrete_weighted, snap_weights);
    res.annealed_diagnostics = annealed_report(cfg, setup, res.annealed, base_nu);
    return res;
}

RunResult run_continuous(const RunConfig& cfg, bool record_trace) {
    const Stopwatch clock;
    const RunSetup setup = prepare_run(cfg);
    RunResult res;
    res.mode = RunMode::continuous;
    res.constants = setup.constants;
    res.schedule_constants = setup.schedule_constants;
    res.lengthscale = setup.kernel.lengthscale();
    res.kernel_bound = setup.kernel.bound();
    const double nu = cfg.continuous.nu.resolve(cfg.N);
    if (!(nu < 1.0)) throw ConfigError("continuous mode needs nu < 1");
    res.nu = nu;
    const double T = cfg.continuous.horizon ? *cfg.continuous.horizon : corollary5_horizon(static_cast<double>(cfg.N), nu);
    res.horizon = T;
    const double dt = std::min(cfg.continuous.dt, T);
    const Integrator method = integrator_from_string(cfg.continuous.method);
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(T / dt - 1e-9)));
    const std::size_t budget = std::max<std::size_t>(2, snapshot_budget(cfg, cfg.N));
    const std::size_t stride = std::max<std::size_t>(1, (steps + budget - 2) / (budget - 1));
    const DiagnosticsOptions opts = diag_options(cfg);

    StepObserver observer;
    if (record_trace) {
        observer = [&](const ParticleState& st) {
            if (st.step % cfg.diagnostics_every != 0 && st.step != steps) return;
            TraceRecord row;
            row.step = st.step;
            row.time = st.time;
            row.h = dt;
            row.nu = nu;
            row.diagnostics = evaluate_diagnostics(setup.kernel, setup.target, setup.constants, st.positions, nu, opts);
            if (cfg.record_wallclock) row.wallclock_ms = clock.ms();
            res.trace.push_back(std::move(row));
            res.last_valid_step = st.step;
        };
    }
    try {
        Trajectory traj = integrate(setup.kernel, setup.target, setup.init, nu, T, dt, method, stride, observer);
        res.final_state = std::move(traj.final_state);
        res.snapshots = std::move(traj.snapshots);
        res.last_valid_step = res.final_state.step;
    } catch (const NumericalError& e) {
        res.ok = false;
        res.error = e.what();
        log_warning(std::string("continuous run stopped: ") + e.what());
        return res;
    }
    res.annealed = annealed_measure(res.snapshots, AnnealMode::continuous_trapezoid);
    res.annealed_diagnostics = annealed_report(cfg, setup, res.annealed, nu);
    return res;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InputError("slope fit needs at least two points");
    const auto n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw InputError("log-log fit needs positive data");
        sx += std::log(x[i]);
        sy += std::log(y[i]);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    if (sxx <= 0.0) throw InputError("slope fit needs distinct x values");
    return sxy / sxx;
}

SweepResult run_sweep(const RunConfig& cfg) {
    if (cfg.sweep.N_list.size() < 3) throw ConfigError("sweep needs at least 3 values of N");
    struct Job {
        std::size_t N;
        std::size_t rep;
        bool ok = false;
        double i_nu = 0.0;
        double ksd2 = 0.0;
        std::string error;
    };
    std::vector<Job> jobs;
    for (std::size_t N : cfg.sweep.N_list) {
        for (std::size_t r = 0; r < cfg.sweep.replicates; ++r) jobs.push_back(Job{N, r, false, 0.0, 0.0, {}});
    }
    std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.N != b.N ? a.N < b.N : a.rep < b.rep; });

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
            Job& job = jobs[k];
            RunConfig sub = cfg;
            sub.mode = cfg.sweep.mode == "discrete" ? RunMode::discrete : RunMode::continuous;
            sub.N = job.N;
            sub.seed = replicate_seed(cfg.seed, job.N, job.rep);
            try {
                const RunResult r = sub.mode == RunMode::discrete ? run_discrete(sub, false) : run_continuous(sub, false);
                if (!r.ok) {
                    job.error = r.error;
                } else {
                    job.ok = true;
                    job.i_nu = r.annealed_diagnostics.i_nu_stein;
                    job.ksd2 = r.annealed_diagnostics.ksd2;
                }
            } catch (const std::exception& e) {
                job.error = e.what();
            }
        }
    };
    std::size_t threads = cfg.sweep.threads ? cfg.sweep.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, jobs.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    SweepResult out;
    std::vector<double> xs, ys;
    for (std::size_t N : cfg.sweep.N_list) {
        RateRow row;
        row.N = N;
        std::vector<double> vals;
        double ksum = 0.0;
        for (const Job& j : jobs) {
            if (j.N != N) continue;
            if (!j.ok) {
                out.failures.push_back({j.N, j.rep, j.error});
                continue;
            }
            vals.push_back(j.i_nu);
            ksum += j.ksd2;
        }
        row.replicates = vals.size();
        if (!vals.empty()) {
            double s = 0.0;
            for (double v : vals) s += v;
            row.mean_i_nu_stein = s / static_cast<double>(vals.size());
            row.mean_ksd2 = ksum / static_cast<double>(vals.size());
            if (vals.size() >= 2) {
                double ss = 0.0;
                for (double v : vals) ss += (v - row.mean_i_nu_stein) * (v - row.mean_i_nu_stein);
                row.stderr_i_nu_stein = std::sqrt(ss / static_cast<double>(vals.size() - 1) / static_cast<double>(vals.size()));
            }
            xs.push_back(static_cast<double>(N));
            ys.push_back(row.mean_i_nu_stein);
        }
        out.rows.push_back(row);
    }
    for (const auto& f : out.failures) {
        log_warning(strprintf("sweep replicate N=%zu rep=%zu failed: %s", f.N, f.replicate, f.error.c_str()));
    }
    if (xs.size() >= 2) {
        out.slope = fit_loglog_slope(xs, ys);
    } else {
        log_warning("sweep: fewer than two surviving N values; slope not fitted");
    }
    return out;
}

std::string format_trace_csv(const std::vector<TraceRecord>& trace) {
    std::string out = kTraceHeader;
    out += '\n';
    for (const auto& r : trace) {
        const DiagnosticsReport& d = r.diagnostics;
        out += std::to_string(r.step) + ',' + num(r.time) + ',' + opt_num(r.h) + ',' + num(r.nu) + ',' + num(d.ksd2) +
               ',' + num(d.i_nu_stein) + ',' + num(d.c_star) + ',' + num(d.c_star_bound) + ',' + num(d.v_average) +
               ',' + opt_num(d.w1_to_target) + ',' + opt_num(r.wallclock_ms) + '\n';
    }
    return out;
}

std::string format_rates_csv(const SweepResult& result) {
    std::string out = kRatesHeader;
    out += '\n';
    for (const auto& r : result.rows) {
        out += std::to_string(r.N) + ',' + std::to_string(r.replicates) + ',' +
               (r.replicates ? num(r.mean_i_nu_stein) : std::string()) + ',' +
               (r.replicates ? num(r.mean_ksd2) : std::string()) + ',' + opt_num(r.stderr_i_nu_stein) + '\n';
    }
    return out;
}

void write_run_outputs(const RunConfig& cfg, const RunResult& res, const std::string& dir) {
    fs::create_directories(dir);
    const fs::path root(dir);
    write_file(root / "trace.csv", format_trace_csv(res.trace));

    ojson summary;
    summary["mode"] = to_string(res.mode);
    summary["status"] = res.ok ? "ok" : "diverged";
    if (!res.ok) {
        summary["error"] = res.error;
        summary["last_valid_step"] = res.last_valid_step;
    }
    summary["N"] = cfg.N;
    summary["d"] = cfg.d;
    summary["seed"] = cfg.seed;
    summary["constants"] = constants_json(res);
    if (res.mode == RunMode::continuous) summary["horizon"] = res.horizon;
    if (!res.trace.empty()) summary["final"] = report_json(res.trace.back().diagnostics, cfg.diagnostics_c_star);
    if (res.ok) {
        summary["annealed"] = report_json(res.annealed_diagnostics, false);
        summary["annealed"]["snapshots"] = res.snapshots.size();
        summary["annealed"]["points"] = res.annealed.size();
    }
    if (cfg.w1.enabled.value_or(false)) {
        summary["w1_note"] = cfg.w1.method == "exact_1d" ? "exact 1-D W1 against i.i.d. target samples"
                                                          : "sliced W1 against i.i.d. target samples (sample-level proxy)";
    }
    write_file(root / "summary.json", summary.dump(2) + "\n");

    ojson resolved = ojson::parse(config_to_json(cfg));
    ojson extra;
    extra["lengthscale"] = res.lengthscale;
    extra["constants"] = constants_json(res);
    if (res.mode == RunMode::discrete) {
        extra["resolved_schedule"] = schedule_json(res.schedule, res.schedule_constants);
    } else {
        extra["nu"] = res.nu;
        extra["horizon"] = res.horizon;
    }
    resolved["resolved"] = extra;
    write_file(root / "config_resolved.json", resolved.dump(2) + "\n");

    if (cfg.write_snapshots) {
        for (const auto& s : res.snapshots) {
            const std::string name = res.mode == RunMode::discrete ? strprintf("snap_discrete_%zu.csv", s.step)
                                                                   : strprintf("snap_continuous_%.6f.csv", s.time);
            write_file(root / name, snapshot_csv(s.positions));
        }
    }
}

void write_sweep_outputs(const RunConfig& cfg, const SweepResult& result, const std::string& dir) {
    fs::create_directories(dir);
    const fs::path root(dir);
    write_file(root / "rates.csv", format_rates_csv(result));
    ojson summary;
    summary["mode"] = "sweep";
    summary["replicate_mode"] = cfg.sweep.mode;
    summary["slope"] = result.slope ? ojson(*result.slope) : ojson(nullptr);
    summary["reference_slope"] = -2.0 / 3.0;
    ojson failures = ojson::array();
    for (const auto& f : result.failures) failures.push_back({{"N", f.N}, {"replicate", f.replicate}, {"error", f.error}});
    summary["failures"] = failures;
    write_file(root / "summary.json", summary.dump(2) + "\n");
    write_file(root / "config_resolved.json", config_to_json(cfg) + "\n");
}

}  // namespace rsvgd
