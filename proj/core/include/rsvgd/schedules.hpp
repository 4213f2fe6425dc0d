#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace rsvgd {

struct ScheduleConstants {
    double A = 0.0;
    double alpha = 0.5;
    double B = 0.0;
    double C_V = 0.0;
    double M_proxy = 0.0;
    double K = 0.0;
    std::size_t N = 0;
    std::size_t d = 0;

    void validate() const;
};

// 10 (1 + exp(C_V A^2)); throws ConfigError on overflow.
double default_m_proxy(double C_V, double A);

// C_n for a given nu_n and cumulative sum S = sum_{l<n} h_l / nu_l.
double schedule_cn(const ScheduleConstants& c, double nu, double cumulative);

// Step sizes and regularizers for n = 1..T. Constant schedules are stored
// compactly (T may be astronomically large); the others keep per-step arrays.
struct Schedule {
    std::string kind;
    std::size_t T = 0;
    double theta = 1.0;
    bool constant = false;
    double h_const = 0.0;
    double nu_const = 1.0;
    std::vector<double> h;
    std::vector<double> nu;
    std::vector<double> C;  // C_n history (theorem7 only)

    double T_real = 0.0;         // T before rounding or truncation to run length
    double c_h = 1.0;            // pinned hidden constant of the step-size formula
    double c_nu = 0.0;           // regime 2 regularizer constant
    double c = 0.0;              // regime 2 exponent
    double rate_exponent = 0.0;  // predicted N exponent of the bound (corollary 9)

    double h_at(std::size_t n) const;   // 1-based
    double nu_at(std::size_t n) const;  // 1-based
    // sum_{l <= n} h_l / nu_l
    double cumulative(std::size_t n) const;
    // Same schedule restricted to its first `steps` steps.
    Schedule truncated(std::size_t steps) const;
};

struct ScheduleViolation {
    std::size_t n;
    std::string constraint;
    double lhs;
    double rhs;
};

struct ScheduleCheck {
    bool ok = true;
    std::vector<ScheduleViolation> violations;
    std::size_t steps_checked = 0;
};

// Re-evaluates every step-size inequality. Constant schedules with T > 1e6 are
// checked at n = 1, n = T and 256 log-spaced interior steps: every cap is
// nonincreasing in n when h and nu are constant.
ScheduleCheck verify_schedule(const Schedule& schedule, const ScheduleConstants& constants);

// Sequential construction h_n = nu_n (theta/2) C_n^{-1/2}; theta halves until
// every cap holds, InfeasibleError below 1e-6. `nu` may hold one value (used for
// every n) or T values; empty means nu = 1 - 1/N.
Schedule theorem7_schedule(const ScheduleConstants& constants, double theta, std::size_t T,
                           const std::vector<double>& nu = {});

Schedule corollary9_regime1(const ScheduleConstants& constants);
Schedule corollary9_regime2(const ScheduleConstants& constants, double c, double c_nu = 0.5);

Schedule constant_schedule(double h, double nu, std::size_t T);

// (1 - nu)^{-1/3} N^{2/3}
double corollary5_horizon(double N, double nu);

}  // namespace rsvgd
