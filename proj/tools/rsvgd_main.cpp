#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rsvgd/config.hpp"
#include "rsvgd/error.hpp"
#include "rsvgd/log.hpp"
#include "rsvgd/runner.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
};

rsvgd::RunConfig load_with_overrides(const Overrides& o) {
    rsvgd::RunConfig cfg = rsvgd::load_config(o.config_path);
    if (!o.output_dir.empty()) cfg.output_dir = o.output_dir;
    if (o.seed) cfg.seed = *o.seed;
    return cfg;
}

int cmd_run(const Overrides& o) {
    const rsvgd::RunConfig cfg = load_with_overrides(o);
    if (cfg.mode == rsvgd::RunMode::sweep) {
        rsvgd::log_warning("config mode is sweep; use `rsvgd sweep`");
        return 2;
    }
    const rsvgd::RunResult result =
        cfg.mode == rsvgd::RunMode::continuous ? rsvgd::run_continuous(cfg) : rsvgd::run_discrete(cfg);
    rsvgd::write_run_outputs(cfg, result, cfg.output_dir);
    if (!result.ok) {
        std::fprintf(stderr, "run failed at step %zu: %s\n", result.last_valid_step, result.error.c_str());
        return 3;
    }
    if (!result.trace.empty()) {
        const rsvgd::TraceRecord& last = result.trace.back();
        std::printf("steps=%zu ksd2=%.6g i_nu_stein=%.6g output=%s\n", last.step, last.diagnostics.ksd2,
                    last.diagnostics.i_nu_stein, cfg.output_dir.c_str());
    }
    return 0;
}

int cmd_sweep(const Overrides& o) {
    rsvgd::RunConfig cfg = load_with_overrides(o);
    if (cfg.mode != rsvgd::RunMode::sweep) throw rsvgd::ConfigError("sweep requires \"mode\": \"sweep\"");
    const rsvgd::SweepResult result = rsvgd::run_sweep(cfg);
    rsvgd::write_sweep_outputs(cfg, result, cfg.output_dir);
    std::fputs(rsvgd::format_rates_csv(result).c_str(), stdout);
    if (result.slope) std::printf("slope=%.6g\n", *result.slope);
    std::printf("failures=%zu output=%s\n", result.failures.size(), cfg.output_dir.c_str());
    return result.failures.empty() ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regularized SVGD sampler and diagnostics"};
    app.require_subcommand(1);

    std::string level = "warning";
    app.add_option("--log-level", level, "debug, info, warning, error or silent")
        ->check(CLI::IsMember({"debug", "info", "warning", "error", "silent"}));

    Overrides o;
    std::uint64_t seed = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", o.config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--output-dir", o.output_dir, "override output_dir");
        sub->add_option("--seed", seed, "override seed");
    };

    CLI::App* run = app.add_subcommand("run", "single discrete or continuous run");
    add_common(run);
    CLI::App* sweep = app.add_subcommand("sweep", "particle-count sweep with replicates");
    add_common(sweep);
    CLI::App* check = app.add_subcommand("check", "run the built-in invariant suite");
    bool verbose = false;
    check->add_flag("-v,--verbose", verbose, "print passing checks too");

    CLI11_PARSE(app, argc, argv);

    if (level == "debug") rsvgd::set_log_level(rsvgd::LogLevel::debug);
    else if (level == "info") rsvgd::set_log_level(rsvgd::LogLevel::info);
    else if (level == "error") rsvgd::set_log_level(rsvgd::LogLevel::error);
    else if (level == "silent") rsvgd::set_log_level(rsvgd::LogLevel::silent);

    try {
        if (run->parsed() || sweep->parsed()) {
            CLI::App* sub = run->parsed() ? run : sweep;
            if (sub->count("--seed") > 0) o.seed = seed;
            return run->parsed() ? cmd_run(o) : cmd_sweep(o);
        }
        return rsvgd::run_self_check(verbose) == 0 ? 0 : 1;
    } catch (const rsvgd::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 70;
    }
}
