#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rsvgd/types.hpp"

namespace rsvgd {

enum class RunMode { discrete, continuous, sweep };

std::string to_string(RunMode mode);

// A regularizer given either as a number or as the rule nu = 1 - 1/N.
struct NuSpec {
    std::optional<double> value;
    bool one_minus_inv_n = false;

    bool set() const { return value.has_value() || one_minus_inv_n; }
    double resolve(std::size_t N) const;
};

struct KernelConfig {
    std::string family = "gaussian_rbf";
    std::optional<double> lengthscale;  // absent: median heuristic at initialization
    double beta = 0.5;
    double alpha_rq = 1.0;
};

struct TargetConfig {
    std::string family = "gaussian";
    std::vector<Vector> means;
    std::vector<Matrix> covariances;
    std::vector<double> weights;
    double v_offset = 1.0;
};

struct InitConfig {
    std::optional<Vector> mean;
    std::optional<Matrix> covariance;
    std::optional<double> restrict_K;
};

struct ScheduleConfig {
    std::string kind = "constant";  // theorem7 | corollary9_1 | corollary9_2 | constant
    std::optional<double> h;
    NuSpec nu;
    std::optional<std::size_t> T;  // steps to run (defaults to the schedule's own T)
    std::optional<double> theta;
    std::optional<double> c;
    double c_nu = 0.5;
    std::optional<double> m_proxy;
    std::optional<double> K;  // sublevel constant; defaults to restrict_K, else the initial V-average
};

struct ContinuousConfig {
    double dt = 0.05;
    std::string method = "rk4";
    NuSpec nu;                       // default 1 - 1/N
    std::optional<double> horizon;  // default (1 - nu)^{-1/3} N^{2/3}
};

struct SweepConfig {
    std::vector<std::size_t> N_list;
    std::size_t replicates = 1;
    std::string mode = "continuous";  // mode of each replicate run
    std::size_t threads = 0;          // 0: hardware concurrency
};

struct W1Config {
    std::optional<bool> enabled;  // default: d == 1
    std::string method = "exact_1d";
    std::size_t target_samples = 10000;
    std::size_t slices = 64;
    std::optional<std::uint64_t> seed;  // default: derived from the run seed
};

struct AnnealedConfig {
    std::size_t max_snapshots = 200;
    std::size_t max_points = 2000;
};

struct CStarGridConfig {
    std::size_t points = 100000;
    double half_width_sds = 10.0;
    double margin = 1.05;
};

struct RunConfig {
    RunMode mode = RunMode::discrete;
    KernelConfig kernel;
    TargetConfig target;
    std::size_t N = 0;
    std::size_t d = 0;
    std::uint64_t seed = 0;
    InitConfig init;
    ScheduleConfig schedule;
    ContinuousConfig continuous;
    std::size_t diagnostics_every = 1;
    bool diagnostics_c_star = true;
    SweepConfig sweep;
    W1Config w1;
    AnnealedConfig annealed;
    CStarGridConfig c_star_grid;
    bool write_snapshots = false;
    bool record_wallclock = false;
    std::string output_dir = "rsvgd_out";
};

// Parses a JSON run configuration. Unknown keys, wrong types and out-of-range
// values raise ConfigError naming the offending key path.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// JSON echo of a configuration with every default filled in.
std::string config_to_json(const RunConfig& config);

}  // namespace rsvgd
