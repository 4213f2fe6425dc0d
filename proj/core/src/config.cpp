#include "rsvgd/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rsvgd/error.hpp"
#include "rsvgd/log.hpp"

namespace rsvgd {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw ConfigError("config key '" + path + "' must be an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ConfigError("unknown config key '" + (path.empty() ? it.key() : path + "." + it.key()) + "'");
        }
    }
}

double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError("config key '" + path + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("config key '" + path + "' must be finite");
    return x;
}

double get_positive(const json& v, const std::string& path) {
    const double x = get_number(v, path);
    if (!(x > 0.0)) throw ConfigError("config key '" + path + "' must be positive");
    return x;
}

std::size_t get_count(const json& v, const std::string& path, std::size_t min_value) {
    if (!v.is_number_integer() && !(v.is_number() && std::floor(v.get<double>()) == v.get<double>())) {
        throw ConfigError("config key '" + path + "' must be an integer");
    }
    const double x = v.get<double>();
    if (x < static_cast<double>(min_value)) {
        throw ConfigError(strprintf("config key '%s' must be >= %zu", path.c_str(), min_value));
    }
    return static_cast<std::size_t>(x);
}

bool get_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) throw ConfigError("config key '" + path + "' must be a boolean");
    return v.get<bool>();
}

std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError("config key '" + path + "' must be a string");
    return v.get<std::string>();
}

Vector get_vector(const json& v, const std::string& path) {
    if (v.is_number()) {
        Vector out(1);
        out(0) = get_number(v, path);
        return out;
    }
    if (!v.is_array() || v.empty()) throw ConfigError("config key '" + path + "' must be a nonempty number array");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = get_number(v[i], path);
    return out;
}

// Accepts a scalar (times identity when d is known), a flat list (diagonal) or a nested list.
Matrix get_matrix(const json& v, const std::string& path, std::size_t d) {
    if (v.is_number()) {
        const double s = get_number(v, path);
        if (d == 0) throw ConfigError("config key '" + path + "': scalar covariance needs d");
        return s * Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    }
    if (!v.is_array() || v.empty()) throw ConfigError("config key '" + path + "' must be a matrix");
    if (!v[0].is_array()) {
        const Vector diag = get_vector(v, path);
        return diag.asDiagonal();
    }
    const auto n = static_cast<Eigen::Index>(v.size());
    Matrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const json& row = v[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
            throw ConfigError("config key '" + path + "' must be a square matrix");
        }
        for (Eigen::Index j = 0; j < n; ++j) out(i, j) = get_number(row[static_cast<std::size_t>(j)], path);
    }
    return out;
}

// A null value means "use the default", which lets the resolved echo be parsed back.
void drop_nulls(json& v) {
    if (!v.is_object()) return;
    for (auto it = v.begin(); it != v.end();) {
        if (it->is_null()) {
            it = v.erase(it);
        } else {
            drop_nulls(*it);
            ++it;
        }
    }
}

NuSpec get_nu(const json& v, const std::string& path) {
    NuSpec nu;
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s != "1-1/N") throw ConfigError("config key '" + path + "' must be a number or \"1-1/N\"");
        nu.one_minus_inv_n = true;
        return nu;
    }
    const double x = get_number(v, path);
    if (!(x > 0.0 && x <= 1.0)) throw ConfigError("config key '" + path + "' must lie in (0, 1]");
    nu.value = x;
    return nu;
}

ojson nu_to_json(const NuSpec& nu) {
    if (nu.one_minus_inv_n) return "1-1/N";
    if (nu.value) return *nu.value;
    return nullptr;
}

ojson vector_to_json(const Vector& v) {
    ojson a = ojson::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

ojson matrix_to_json(const Matrix& m) {
    ojson a = ojson::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ojson row = ojson::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        a.push_back(row);
    }
    return a;
}

template <class T>
ojson opt(const std::optional<T>& v) {
    if (v) return ojson(*v);
    return nullptr;
}

}  // namespace

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::discrete: return "discrete";
        case RunMode::continuous: return "continuous";
        case RunMode::sweep: return "sweep";
    }
    return "unknown";
}

double NuSpec::resolve(std::size_t N) const {
    if (one_minus_inv_n) {
        if (N < 2) throw ConfigError("nu = 1 - 1/N needs N >= 2");
        return 1.0 - 1.0 / static_cast<double>(N);
    }
    if (value) return *value;
    throw ConfigError("nu is not set");
}

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    drop_nulls(root);
    allow_keys(root, "",
               {"mode", "kernel", "target", "N", "d", "seed", "init", "schedule", "continuous", "diagnostics_every",
                "diagnostics_c_star", "sweep", "w1", "annealed", "c_star_grid", "write_snapshots", "record_wallclock",
                "output_dir"});
    RunConfig cfg;

    if (root.contains("mode")) {
        const std::string m = get_string(root["mode"], "mode");
        if (m == "discrete") cfg.mode = RunMode::discrete;
        else if (m == "continuous") cfg.mode = RunMode::continuous;
        else if (m == "sweep") cfg.mode = RunMode::sweep;
        else throw ConfigError("config key 'mode' must be discrete, continuous or sweep");
    }
    if (root.contains("N")) cfg.N = get_count(root["N"], "N", 1);
    if (root.contains("d")) cfg.d = get_count(root["d"], "d", 1);
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned() && !(root["seed"].is_number_integer() && root["seed"].get<long long>() >= 0)) {
            throw ConfigError("config key 'seed' must be a nonnegative integer");
        }
        cfg.seed = root["seed"].get<std::uint64_t>();
    }

    if (root.contains("kernel")) {
        const json& k = root["kernel"];
        allow_keys(k, "kernel", {"family", "lengthscale", "beta", "alpha_rq"});
        if (k.contains("family")) cfg.kernel.family = get_string(k["family"], "kernel.family");
        if (k.contains("lengthscale") && !k["lengthscale"].is_null()) {
            if (k["lengthscale"].is_string()) {
                if (k["lengthscale"].get<std::string>() != "median") {
                    throw ConfigError("config key 'kernel.lengthscale' must be a number or \"median\"");
                }
            } else {
                cfg.kernel.lengthscale = get_positive(k["lengthscale"], "kernel.lengthscale");
            }
        }
        if (k.contains("beta")) cfg.kernel.beta = get_positive(k["beta"], "kernel.beta");
        if (k.contains("alpha_rq")) cfg.kernel.alpha_rq = get_positive(k["alpha_rq"], "kernel.alpha_rq");
    }

    if (root.contains("target")) {
        const json& t = root["target"];
        allow_keys(t, "target", {"family", "means", "covariances", "weights", "v_offset"});
        if (t.contains("family")) cfg.target.family = get_string(t["family"], "target.family");
        if (t.contains("means")) {
            const json& ms = t["means"];
            if (!ms.is_array() || ms.empty()) throw ConfigError("config key 'target.means' must be a nonempty array");
            if (ms[0].is_array()) {
                for (const auto& m : ms) cfg.target.means.push_back(get_vector(m, "target.means"));
            } else {
                cfg.target.means.push_back(get_vector(ms, "target.means"));
            }
        }
        const std::size_t dim = cfg.d ? cfg.d
                                      : (cfg.target.means.empty() ? 0
                                                                  : static_cast<std::size_t>(cfg.target.means[0].size()));
        if (t.contains("covariances")) {
            const json& cs = t["covariances"];
            const bool list_of_matrices = cs.is_array() && !cs.empty() && cs[0].is_array() && !cs[0].empty() &&
                                          cs[0][0].is_array();
            if (list_of_matrices) {
                for (const auto& c : cs) cfg.target.covariances.push_back(get_matrix(c, "target.covariances", dim));
            } else {
                cfg.target.covariances.push_back(get_matrix(cs, "target.covariances", dim));
            }
        }
        if (t.contains("weights")) {
            const Vector w = get_vector(t["weights"], "target.weights");
            cfg.target.weights.assign(w.data(), w.data() + w.size());
        }
        if (t.contains("v_offset")) cfg.target.v_offset = get_positive(t["v_offset"], "target.v_offset");
    }

    if (cfg.d == 0) {
        if (cfg.target.means.empty()) throw ConfigError("config needs 'd' or target.means");
        cfg.d = static_cast<std::size_t>(cfg.target.means[0].size());
    }
    const auto D = static_cast<Eigen::Index>(cfg.d);
    if (cfg.target.means.empty()) cfg.target.means.push_back(Vector::Zero(D));
    if (cfg.target.covariances.empty()) cfg.target.covariances.push_back(Matrix::Identity(D, D));
    if (cfg.target.weights.empty()) {
        cfg.target.weights.assign(cfg.target.means.size(), 1.0 / static_cast<double>(cfg.target.means.size()));
    }
    for (const auto& m : cfg.target.means) {
        if (m.size() != D) throw ConfigError("config key 'target.means' does not match d");
    }
    if (cfg.target.family != "gaussian" && cfg.target.family != "gaussian_mixture") {
        throw ConfigError("config key 'target.family' must be gaussian or gaussian_mixture");
    }
    if (cfg.target.family == "gaussian" && cfg.target.means.size() != 1) {
        throw ConfigError("gaussian target takes exactly one mean; use gaussian_mixture");
    }

    if (root.contains("init")) {
        const json& in = root["init"];
        allow_keys(in, "init", {"mean", "covariance", "restrict_K"});
        if (in.contains("mean")) cfg.init.mean = get_vector(in["mean"], "init.mean");
        if (in.contains("covariance")) cfg.init.covariance = get_matrix(in["covariance"], "init.covariance", cfg.d);
        if (in.contains("restrict_K") && !in["restrict_K"].is_null()) {
            cfg.init.restrict_K = get_positive(in["restrict_K"], "init.restrict_K");
        }
    }
    if (!cfg.init.mean) cfg.init.mean = Vector::Zero(D);
    if (!cfg.init.covariance) cfg.init.covariance = Matrix::Identity(D, D);

    if (root.contains("schedule")) {
        const json& s = root["schedule"];
        allow_keys(s, "schedule", {"kind", "h", "nu", "T", "theta", "c", "c_nu", "m_proxy", "K"});
        if (s.contains("kind")) cfg.schedule.kind = get_string(s["kind"], "schedule.kind");
        if (s.contains("h")) cfg.schedule.h = get_positive(s["h"], "schedule.h");
        if (s.contains("nu")) cfg.schedule.nu = get_nu(s["nu"], "schedule.nu");
        if (s.contains("T")) cfg.schedule.T = get_count(s["T"], "schedule.T", 0);
        if (s.contains("theta")) cfg.schedule.theta = get_positive(s["theta"], "schedule.theta");
        if (s.contains("c")) cfg.schedule.c = get_number(s["c"], "schedule.c");
        if (s.contains("c_nu")) cfg.schedule.c_nu = get_positive(s["c_nu"], "schedule.c_nu");
        if (s.contains("m_proxy")) cfg.schedule.m_proxy = get_positive(s["m_proxy"], "schedule.m_proxy");
        if (s.contains("K")) cfg.schedule.K = get_positive(s["K"], "schedule.K");
    }
    {
        const std::string& k = cfg.schedule.kind;
        if (k != "theorem7" && k != "corollary9_1" && k != "corollary9_2" && k != "constant") {
            throw ConfigError("config key 'schedule.kind' must be theorem7, corollary9_1, corollary9_2 or constant");
        }
    }

    if (root.contains("continuous")) {
        const json& c = root["continuous"];
        allow_keys(c, "continuous", {"dt", "method", "nu", "horizon"});
        if (c.contains("dt")) cfg.continuous.dt = get_positive(c["dt"], "continuous.dt");
        if (c.contains("method")) cfg.continuous.method = get_string(c["method"], "continuous.method");
        if (c.contains("nu")) cfg.continuous.nu = get_nu(c["nu"], "continuous.nu");
        if (c.contains("horizon")) cfg.continuous.horizon = get_positive(c["horizon"], "continuous.horizon");
    }
    if (cfg.continuous.method != "euler" && cfg.continuous.method != "rk4") {
        throw ConfigError("config key 'continuous.method' must be euler or rk4");
    }
    if (!cfg.continuous.nu.set()) cfg.continuous.nu.one_minus_inv_n = true;

    if (root.contains("diagnostics_every")) {
        cfg.diagnostics_every = get_count(root["diagnostics_every"], "diagnostics_every", 1);
    }
    if (root.contains("diagnostics_c_star")) {
        cfg.diagnostics_c_star = get_bool(root["diagnostics_c_star"], "diagnostics_c_star");
    }

    if (root.contains("sweep")) {
        const json& s = root["sweep"];
        allow_keys(s, "sweep", {"N_list", "replicates", "mode", "threads"});
        if (s.contains("N_list")) {
            if (!s["N_list"].is_array()) throw ConfigError("config key 'sweep.N_list' must be an array");
            for (const auto& n : s["N_list"]) cfg.sweep.N_list.push_back(get_count(n, "sweep.N_list", 1));
        }
        if (s.contains("replicates")) cfg.sweep.replicates = get_count(s["replicates"], "sweep.replicates", 1);
        if (s.contains("mode")) cfg.sweep.mode = get_string(s["mode"], "sweep.mode");
        if (s.contains("threads")) cfg.sweep.threads = get_count(s["threads"], "sweep.threads", 0);
    }
    if (cfg.sweep.mode != "continuous" && cfg.sweep.mode != "discrete") {
        throw ConfigError("config key 'sweep.mode' must be continuous or discrete");
    }

    if (root.contains("w1")) {
        const json& w = root["w1"];
        allow_keys(w, "w1", {"enabled", "method", "target_samples", "slices", "seed"});
        if (w.contains("enabled")) cfg.w1.enabled = get_bool(w["enabled"], "w1.enabled");
        if (w.contains("method")) cfg.w1.method = get_string(w["method"], "w1.method");
        if (w.contains("target_samples")) cfg.w1.target_samples = get_count(w["target_samples"], "w1.target_samples", 1);
        if (w.contains("slices")) cfg.w1.slices = get_count(w["slices"], "w1.slices", 1);
        if (w.contains("seed")) cfg.w1.seed = static_cast<std::uint64_t>(get_count(w["seed"], "w1.seed", 0));
    }
    if (cfg.w1.method != "exact_1d" && cfg.w1.method != "sliced") {
        throw ConfigError("config key 'w1.method' must be exact_1d or sliced");
    }
    if (!cfg.w1.enabled) cfg.w1.enabled = cfg.d == 1;
    if (cfg.d != 1 && cfg.w1.method == "exact_1d" && *cfg.w1.enabled) cfg.w1.method = "sliced";

    if (root.contains("annealed")) {
        const json& a = root["annealed"];
        allow_keys(a, "annealed", {"max_snapshots", "max_points"});
        if (a.contains("max_snapshots")) cfg.annealed.max_snapshots = get_count(a["max_snapshots"], "annealed.max_snapshots", 1);
        if (a.contains("max_points")) cfg.annealed.max_points = get_count(a["max_points"], "annealed.max_points", 1);
    }
    if (root.contains("c_star_grid")) {
        const json& g = root["c_star_grid"];
        allow_keys(g, "c_star_grid", {"points", "half_width_sds", "margin"});
        if (g.contains("points")) cfg.c_star_grid.points = get_count(g["points"], "c_star_grid.points", 2);
        if (g.contains("half_width_sds")) cfg.c_star_grid.half_width_sds = get_positive(g["half_width_sds"], "c_star_grid.half_width_sds");
        if (g.contains("margin")) cfg.c_star_grid.margin = get_positive(g["margin"], "c_star_grid.margin");
    }
    if (root.contains("write_snapshots")) cfg.write_snapshots = get_bool(root["write_snapshots"], "write_snapshots");
    if (root.contains("record_wallclock")) cfg.record_wallclock = get_bool(root["record_wallclock"], "record_wallclock");
    if (root.contains("output_dir")) cfg.output_dir = get_string(root["output_dir"], "output_dir");

    if (cfg.mode == RunMode::sweep) {
        if (cfg.sweep.N_list.size() < 3) throw ConfigError("sweep mode needs at least 3 values in sweep.N_list");
        if (cfg.N == 0) cfg.N = cfg.sweep.N_list.front();
    }
    if (cfg.N == 0) throw ConfigError("config needs 'N'");
    auto guard = [&](std::size_t N) {
        if (static_cast<double>(N) * static_cast<double>(cfg.d) > 1e6) {
            throw ConfigError("N * d exceeds the 1e6 desk-scale guard");
        }
    };
    guard(cfg.N);
    for (std::size_t n : cfg.sweep.N_list) guard(n);
    if (cfg.init.mean->size() != D) throw ConfigError("config key 'init.mean' does not match d");
    if (cfg.init.covariance->rows() != D) throw ConfigError("config key 'init.covariance' does not match d");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& c) {
    ojson j;
    j["mode"] = to_string(c.mode);
    j["N"] = c.N;
    j["d"] = c.d;
    j["seed"] = c.seed;
    j["kernel"] = {{"family", c.kernel.family},
                   {"lengthscale", c.kernel.lengthscale ? ojson(*c.kernel.lengthscale) : ojson("median")},
                   {"beta", c.kernel.beta},
                   {"alpha_rq", c.kernel.alpha_rq}};
    ojson means = ojson::array();
    for (const auto& m : c.target.means) means.push_back(vector_to_json(m));
    ojson covs = ojson::array();
    for (const auto& m : c.target.covariances) covs.push_back(matrix_to_json(m));
    j["target"] = {{"family", c.target.family},
                   {"means", means},
                   {"covariances", covs},
                   {"weights", c.target.weights},
                   {"v_offset", c.target.v_offset}};
    j["init"] = {{"mean", vector_to_json(*c.init.mean)},
                 {"covariance", matrix_to_json(*c.init.covariance)},
                 {"restrict_K", opt(c.init.restrict_K)}};
    j["schedule"] = {{"kind", c.schedule.kind},
                     {"h", opt(c.schedule.h)},
                     {"nu", nu_to_json(c.schedule.nu)},
                     {"T", opt(c.schedule.T)},
                     {"theta", opt(c.schedule.theta)},
                     {"c", opt(c.schedule.c)},
                     {"c_nu", c.schedule.c_nu},
                     {"m_proxy", opt(c.schedule.m_proxy)},
                     {"K", opt(c.schedule.K)}};
    j["continuous"] = {{"dt", c.continuous.dt},
                       {"method", c.continuous.method},
                       {"nu", nu_to_json(c.continuous.nu)},
                       {"horizon", opt(c.continuous.horizon)}};
    j["diagnostics_every"] = c.diagnostics_every;
    j["diagnostics_c_star"] = c.diagnostics_c_star;
    j["sweep"] = {{"N_list", c.sweep.N_list},
                  {"replicates", c.sweep.replicates},
                  {"mode", c.sweep.mode},
                  {"threads", c.sweep.threads}};
    j["w1"] = {{"enabled", opt(c.w1.enabled)},
               {"method", c.w1.method},
               {"target_samples", c.w1.target_samples},
               {"slices", c.w1.slices},
               {"seed", opt(c.w1.seed)}};
    j["annealed"] = {{"max_snapshots", c.annealed.max_snapshots}, {"max_points", c.annealed.max_points}};
    j["c_star_grid"] = {{"points", c.c_star_grid.points},
                        {"half_width_sds", c.c_star_grid.half_width_sds},
                        {"margin", c.c_star_grid.margin}};
    j["write_snapshots"] = c.write_snapshots;
    j["record_wallclock"] = c.record_wallclock;
    j["output_dir"] = c.output_dir;
    return j.dump(2);
}

}  // namespace rsvgd
