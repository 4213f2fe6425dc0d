#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rsvgd/config.hpp"
#include "rsvgd/diagnostics.hpp"
#include "rsvgd/engine.hpp"
#include "rsvgd/kernels.hpp"
#include "rsvgd/schedules.hpp"
#include "rsvgd/targets.hpp"

namespace rsvgd {

// One diagnostics row. In discrete mode h and nu are those of the step leaving
// the recorded state (empty h on the last row); in continuous mode h is dt.
struct TraceRecord {
    std::size_t step = 0;
    double time = 0.0;
    std::optional<double> h;
    double nu = 1.0;
    DiagnosticsReport diagnostics;
    std::optional<double> wallclock_ms;
};

inline constexpr const char* kTraceHeader =
    "step,time,h,nu,ksd2,i_nu_stein,c_star,c_star_bound,v_average,w1,wallclock_ms";
inline constexpr const char* kRatesHeader = "N,replicates,mean_i_nu_stein,mean_ksd2,stderr_i_nu_stein";

struct RunResult {
    RunMode mode = RunMode::discrete;
    std::vector<TraceRecord> trace;
    ParticleState final_state;
    WeightedEmpiricalMeasure annealed;
    DiagnosticsReport annealed_diagnostics;  // ksd2, i_nu_stein, v_average and optional w1
    std::vector<Snapshot> snapshots;
    Schedule schedule;  // discrete mode
    TargetConstants constants;
    ScheduleConstants schedule_constants;
    double lengthscale = 0.0;
    double kernel_bound = 0.0;
    double nu = 1.0;        // regularizer of the annealed diagnostics
    double horizon = 0.0;   // continuous mode
    bool ok = true;
    std::string error;      // set when the run diverged or failed mid-way
    std::size_t last_valid_step = 0;
};

// Objects built from a configuration before any dynamics run.
struct RunSetup {
    Target target;
    Kernel kernel;
    ParticleState init;
    TargetConstants constants;
    ScheduleConstants schedule_constants;
};

RunSetup prepare_run(const RunConfig& config);

// The configured discrete schedule, resolved against the setup constants.
Schedule resolve_schedule(const RunConfig& config, const RunSetup& setup);

RunResult run_discrete(const RunConfig& config, bool record_trace = true);
RunResult run_continuous(const RunConfig& config, bool record_trace = true);

struct RateRow {
    std::size_t N = 0;
    std::size_t replicates = 0;  // successful replicates
    double mean_i_nu_stein = 0.0;
    double mean_ksd2 = 0.0;
    std::optional<double> stderr_i_nu_stein;
};

struct SweepFailure {
    std::size_t N;
    std::size_t replicate;
    std::string error;
};

struct SweepResult {
    std::vector<RateRow> rows;
    std::optional<double> slope;
    std::vector<SweepFailure> failures;
};

SweepResult run_sweep(const RunConfig& config);

// Seed of replicate r at particle count N: seed XOR splitmix64(N, r).
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t N, std::size_t replicate);

// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

std::string format_trace_csv(const std::vector<TraceRecord>& trace);
std::string format_rates_csv(const SweepResult& result);

// Writes trace.csv, summary.json, config_resolved.json and optional snapshots.
void write_run_outputs(const RunConfig& config, const RunResult& result, const std::string& dir);
// Writes rates.csv, summary.json and config_resolved.json.
void write_sweep_outputs(const RunConfig& config, const SweepResult& result, const std::string& dir);

// Invariant self-check used by `rsvgd check`; returns the number of failures.
int run_self_check(bool verbose);

}  // namespace rsvgd
