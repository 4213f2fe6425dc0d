#include "rsvgd/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsvgd/error.hpp"
#include "rsvgd/log.hpp"

namespace rsvgd {
namespace {

constexpr double kRelTol = 1e-12;
constexpr double kThetaFloor = 1e-6;
constexpr std::size_t kExplicitCheckLimit = 1000000;

const char* const kScale = "h/nu <= (theta/2) C_n^-1/2";
const char* const kCumulative = "h/nu <= 1/(16 (1-alpha)^2 C_V A^2 B^2 sum_{l<n} h_l/nu_l)";
const char* const kParticles = "h/nu <= N/(C_V B nu + 8 B d (1-nu)^2 nu^-2)";
const char* const kKernel = "h/nu <= 1/B";

double cap_cumulative(const ScheduleConstants& c, double S) {
    if (S <= 0.0) return std::numeric_limits<double>::infinity();
    const double oa = 1.0 - c.alpha;
    return 1.0 / (16.0 * oa * oa * c.C_V * c.A * c.A * c.B * c.B * S);
}

double cap_particles(const ScheduleConstants& c, double nu) {
    const auto N = static_cast<double>(c.N);
    const auto d = static_cast<double>(c.d);
    return N / (c.C_V * c.B * nu + 8.0 * c.B * d * (1.0 - nu) * (1.0 - nu) / (nu * nu));
}

double cap_kernel(const ScheduleConstants& c) { return 1.0 / c.B; }

// Appends violations at step n; returns the name of the first binding constraint or nullptr.
const char* check_step(const ScheduleConstants& c, double theta, std::size_t n, double h, double nu, double S,
                       std::vector<ScheduleViolation>* out) {
    const char* first = nullptr;
    auto report = [&](const char* name, double lhs, double rhs) {
        if (!(lhs <= rhs * (1.0 + kRelTol))) {
            if (!first) first = name;
            if (out) out->push_back({n, name, lhs, rhs});
        }
    };
    if (!(nu > 0.0 && nu <= 1.0)) {
        if (out) out->push_back({n, "0 < nu <= 1", nu, 1.0});
        return "0 < nu <= 1";
    }
    if (!(h > 0.0 && std::isfinite(h))) {
        if (out) out->push_back({n, "h > 0", h, 0.0});
        return "h > 0";
    }
    const double r = h / nu;
    report(kScale, r, 0.5 * theta / std::sqrt(schedule_cn(c, nu, S)));
    report(kCumulative, r, cap_cumulative(c, S));
    report(kParticles, r, cap_particles(c, nu));
    report(kKernel, r, cap_kernel(c));
    return first;
}

void check_n(std::size_t N) {
    if (N < 2) throw InputError("corollary 9 schedules need N >= 2");
}

// Every cap is nonincreasing in n for constant (h, nu), so n = 1 and n = T decide feasibility.
bool constant_feasible(const Schedule& s, const ScheduleConstants& c) {
    if (s.T == 0) return true;
    const double r = s.h_const / s.nu_const;
    return !check_step(c, s.theta, 1, s.h_const, s.nu_const, 0.0, nullptr) &&
           !check_step(c, s.theta, s.T, s.h_const, s.nu_const, static_cast<double>(s.T - 1) * r, nullptr);
}

// Largest c_h = 2^-k with the schedule feasible for N in {2, 4, ..., 2^20} and the requested N.
template <class Build>
double pin_constant(const ScheduleConstants& base, Build build) {
    std::vector<std::size_t> grid;
    for (int j = 1; j <= 20; ++j) grid.push_back(std::size_t{1} << j);
    if (std::find(grid.begin(), grid.end(), base.N) == grid.end()) grid.push_back(base.N);
    for (int k = 0; k <= 400; ++k) {
        const double c_h = std::ldexp(1.0, -k);
        bool ok = true;
        for (std::size_t Nv : grid) {
            ScheduleConstants c = base;
            c.N = Nv;
            if (!constant_feasible(build(c, c_h), c)) {
                ok = false;
                break;
            }
        }
        if (ok) return c_h;
    }
    throw InfeasibleError("no power-of-two step constant down to 2^-400 satisfies the step-size caps", kScale);
}

std::size_t ceil_count(double x) {
    if (!(x < 1.8e19)) return std::numeric_limits<std::size_t>::max();
    return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

}  // namespace

void ScheduleConstants::validate() const {
    auto pos = [](double v, const char* name) {
        if (!(std::isfinite(v) && v > 0.0)) throw InputError(std::string("schedule constant ") + name + " must be positive");
    };
    pos(A, "A");
    pos(B, "B");
    pos(C_V, "C_V");
    pos(M_proxy, "M_proxy");
    if (!(std::isfinite(K) && K >= 0.0)) throw InputError("schedule constant K must be nonnegative");
    if (!(alpha >= 0.0 && alpha <= 0.5)) throw InputError("alpha must lie in [0, 1/2]");
    if (N < 1 || d < 1) throw InputError("schedule needs N >= 1 and d >= 1");
}

double default_m_proxy(double C_V, double A) {
    const double m = 10.0 * (1.0 + std::exp(C_V * A * A));
    if (!std::isfinite(m)) throw ConfigError("default M_proxy overflows; set schedule.m_proxy explicitly");
    return m;
}

double schedule_cn(const ScheduleConstants& c, double nu, double S) {
    const auto N = static_cast<double>(c.N);
    const auto d = static_cast<double>(c.d);
    const double a = c.alpha;
    const double nu4 = std::pow(nu, -4.0);
    const double B4 = std::pow(c.B, 4.0);
    const double first = nu4 * c.A * c.A * B4 * N * d * std::pow(c.M_proxy, 2.0 * a) *
                         std::pow(std::pow(d, 1.0 / (1.0 - a)) + c.K, 2.0 * a) *
                         std::pow(std::max(S, 1.0), 2.0 * a / (1.0 - a));
    const double second = nu4 * B4 * N * d * d + c.B * c.B * c.C_V * c.C_V * d;
    return 18.0 * std::max(first, second);
}

double Schedule::h_at(std::size_t n) const {
    if (n < 1 || n > T) throw InputError("schedule index out of range");
    return constant ? h_const : h[n - 1];
}

double Schedule::nu_at(std::size_t n) const {
    if (n < 1 || n > T) throw InputError("schedule index out of range");
    return constant ? nu_const : nu[n - 1];
}

double Schedule::cumulative(std::size_t n) const {
    if (n > T) throw InputError("schedule index out of range");
    if (constant) return static_cast<double>(n) * (h_const / nu_const);
    double s = 0.0;
    for (std::size_t l = 0; l < n; ++l) s += h[l] / nu[l];
    return s;
}

Schedule Schedule::truncated(std::size_t steps) const {
    Schedule s = *this;
    s.T = std::min(T, steps);
    if (!constant) {
        s.h.resize(s.T);
        s.nu.resize(s.T);
        if (s.C.size() > s.T) s.C.resize(s.T);
    }
    return s;
}

ScheduleCheck verify_schedule(const Schedule& schedule, const ScheduleConstants& constants) {
    constants.validate();
    ScheduleCheck result;
    if (schedule.T == 0) return result;
    if (!schedule.constant && (schedule.h.size() < schedule.T || schedule.nu.size() < schedule.T)) {
        throw InputError("schedule arrays shorter than T");
    }
    if (!schedule.constant || schedule.T <= kExplicitCheckLimit) {
        double S = 0.0;
        for (std::size_t n = 1; n <= schedule.T; ++n) {
            const double h = schedule.h_at(n);
            const double nu = schedule.nu_at(n);
            check_step(constants, schedule.theta, n, h, nu, S, &result.violations);
            S += h / nu;
            ++result.steps_checked;
        }
    } else {
        const double r = schedule.h_const / schedule.nu_const;
        std::vector<std::size_t> ns{1, schedule.T};
        const double logT = std::log(static_cast<double>(schedule.T));
        for (int k = 1; k < 256; ++k) {
            const auto n = static_cast<std::size_t>(std::exp(logT * k / 256.0));
            if (n > 1 && n < schedule.T) ns.push_back(n);
        }
        std::sort(ns.begin(), ns.end());
        ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
        for (std::size_t n : ns) {
            check_step(constants, schedule.theta, n, schedule.h_const, schedule.nu_const,
                       static_cast<double>(n - 1) * r, &result.violations);
            ++result.steps_checked;
        }
    }
    result.ok = result.violations.empty();
    return result;
}

Schedule theorem7_schedule(const ScheduleConstants& constants, double theta, std::size_t T,
                           const std::vector<double>& nu_in) {
    constants.validate();
    if (!(theta > 0.0 && theta <= 1.0)) throw InputError("theta must lie in (0, 1]");
    if (!nu_in.empty() && nu_in.size() != 1 && nu_in.size() != T) {
        throw InputError("nu must be a single value or one value per step");
    }
    std::vector<double> nu(T);
    for (std::size_t n = 0; n < T; ++n) {
        nu[n] = nu_in.empty() ? 1.0 - 1.0 / static_cast<double>(constants.N)
                              : (nu_in.size() == 1 ? nu_in[0] : nu_in[n]);
        if (!(nu[n] > 0.0 && nu[n] <= 1.0)) throw InputError("nu_n must lie in (0, 1]");
    }

    const double theta_start = theta;
    while (true) {
        Schedule s;
        s.kind = "theorem7";
        s.T = T;
        s.T_real = static_cast<double>(T);
        s.theta = theta;
        s.nu = nu;
        s.h.resize(T);
        s.C.resize(T);
        double S = 0.0;
        const char* binding = nullptr;
        for (std::size_t n = 1; n <= T && !binding; ++n) {
            const double nun = nu[n - 1];
            const double Cn = schedule_cn(constants, nun, S);
            const double h = nun * 0.5 * theta / std::sqrt(Cn);
            s.C[n - 1] = Cn;
            s.h[n - 1] = h;
            binding = check_step(constants, theta, n, h, nun, S, nullptr);
            S += h / nun;
        }
        if (!binding) {
            if (theta < theta_start) {
                log_info(strprintf("theorem7 schedule: theta reduced from %g to %g", theta_start, theta));
            }
            return s;
        }
        theta *= 0.5;
        if (theta < kThetaFloor) {
            throw InfeasibleError(strprintf("no feasible theta >= 1e-6 for T=%zu; binding constraint: %s", T, binding),
                                  binding);
        }
    }
}

Schedule constant_schedule(double h, double nu, std::size_t T) {
    if (!(h > 0.0 && std::isfinite(h))) throw InputError("constant schedule needs h > 0");
    if (!(nu > 0.0 && nu <= 1.0)) throw InputError("constant schedule needs nu in (0, 1]");
    Schedule s;
    s.kind = "constant";
    s.constant = true;
    s.h_const = h;
    s.nu_const = nu;
    s.T = T;
    s.T_real = static_cast<double>(T);
    s.theta = 1.0;
    return s;
}

namespace {

Schedule regime1_with(const ScheduleConstants& c, double c_h) {
    const auto N = static_cast<double>(c.N);
    const auto d = static_cast<double>(c.d);
    const double a = c.alpha;
    Schedule s;
    s.kind = "corollary9_1";
    s.constant = true;
    s.nu_const = 1.0 - 1.0 / N;
    s.T_real = std::pow(N, 2.0 / (1.0 - a));
    s.T = ceil_count(s.T_real);
    s.theta = std::pow(N, -(1.0 + a) / (2.0 * (1.0 - a)));
    const double dterm = std::pow(d, (1.0 + a) / (2.0 * (1.0 - a))) + d + std::pow(c.K, a) * std::sqrt(d);
    s.h_const = c_h * std::pow(dterm, -(1.0 - a)) * std::pow(N, -(1.0 + a) / (1.0 - a));
    s.c_h = c_h;
    s.rate_exponent = 1.0;
    return s;
}

Schedule regime2_with(const ScheduleConstants& c, double c_h, double cexp, double c_nu) {
    const auto N = static_cast<double>(c.N);
    const auto d = static_cast<double>(c.d);
    const double a = c.alpha;
    const double m = std::max(0.0, 0.5 - 2.0 * cexp);
    Schedule s;
    s.kind = "corollary9_2";
    s.constant = true;
    s.nu_const = c_nu * std::pow(N, -cexp);
    s.T_real = std::pow(N, 1.5 + m);
    s.T = ceil_count(s.T_real);
    s.theta = std::pow(N, -m);
    s.h_const = c_h * std::pow(d, -(1.0 - a) / 2.0) *
                std::pow(std::pow(d, 1.0 / (1.0 - a)) + c.K, -a * (1.0 - a)) *
                std::pow(N, 1.0 - a - cexp * (3.0 - 2.0 * a) - 1.5 - m);
    s.c_h = c_h;
    s.c_nu = c_nu;
    s.c = cexp;
    s.rate_exponent = 1.0 - a - cexp * (3.0 - 2.0 * a);
    return s;
}

}  // namespace

Schedule corollary9_regime1(const ScheduleConstants& constants) {
    constants.validate();
    check_n(constants.N);
    const double c_h = pin_constant(constants, [](const ScheduleConstants& c, double ch) { return regime1_with(c, ch); });
    log_info(strprintf("corollary9_1: pinned step constant c_h = %g", c_h));
    return regime1_with(constants, c_h);
}

Schedule corollary9_regime2(const ScheduleConstants& constants, double cexp, double c_nu) {
    constants.validate();
    check_n(constants.N);
    const double a = constants.alpha;
    const double upper = (1.0 - a) / (3.0 - 2.0 * a);
    if (!(cexp >= 0.0 && cexp < upper)) {
        throw InputError(strprintf("regime 2 exponent c=%g must satisfy 0 <= c < (1-alpha)/(3-2alpha) = %g", cexp, upper));
    }
    if (!(c_nu > 0.0 && c_nu <= 1.0)) throw InputError("c_nu must lie in (0, 1]");
    const double c_h = pin_constant(
        constants, [&](const ScheduleConstants& c, double ch) { return regime2_with(c, ch, cexp, c_nu); });
    log_info(strprintf("corollary9_2: pinned step constant c_h = %g", c_h));
    return regime2_with(constants, c_h, cexp, c_nu);
}

double corollary5_horizon(double N, double nu) {
    if (!(N >= 1.0)) throw InputError("horizon needs N >= 1");
    if (!(nu > 0.0 && nu < 1.0)) throw InputError("horizon needs nu in (0, 1); it diverges at nu = 1");
    return std::pow(1.0 - nu, -1.0 / 3.0) * std::pow(N, 2.0 / 3.0);
}

}  // namespace rsvgd
