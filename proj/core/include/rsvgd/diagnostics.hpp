#pragma once

#include <optional>

#include "rsvgd/kernels.hpp"
#include "rsvgd/targets.hpp"
#include "rsvgd/types.hpp"

namespace rsvgd {

// Kernel Stein discrepancy as the double sum of the Langevin Stein kernel
//   kappa(x,y) = gV(x).gV(y) k - gV(x).grad_2 k - gV(y).grad_1 k + div_1.div_2 k.
double ksd_squared(const Kernel& kernel, const Target& target, const WeightedEmpiricalMeasure& measure);

// Regularized Stein Fisher information through the resolvent solve and the
// divergence identity.
double reg_stein_fisher_linear(const Kernel& kernel, const Target& target, const WeightedEmpiricalMeasure& measure,
                               double nu);

struct SpectralFisher {
    double value = 0.0;
    double ksd2 = 0.0;
    double lambda_max = 0.0;  // top eigenvalue of diag(sqrt w) K diag(sqrt w)
    double clipped = 0.0;
};

// Same quantity through the eigendecomposition of the weighted Gram operator:
//   I = KSD^2 / nu - ((1 - nu) / nu) sum_m |b_m|^2 / ((1 - nu) lambda_m + nu),
// with b = U^T diag(sqrt w) h and h the Stein force evaluated at the support.
SpectralFisher reg_stein_fisher_spectral_details(const Kernel& kernel, const Target& target,
                                                 const WeightedEmpiricalMeasure& measure, double nu);
double reg_stein_fisher_spectral(const Kernel& kernel, const Target& target, const WeightedEmpiricalMeasure& measure,
                                 double nu);

// Self-interaction coefficient of a uniform particle configuration.
double c_star(const Kernel& kernel, const Target& target, const Matrix& particles, double nu);

double c_star_beta1(double B, double C_V, double nu);
double c_star_beta2(double B, double nu);

// c* d + (1 - nu) (beta1 d + beta2 sqrt(d) Y),  Y = (1/N) sum |grad V(x^i)|.
double c_star_bound(const Kernel& kernel, const Target& target, const TargetConstants& constants,
                    const Matrix& particles, double nu);

enum class W1Method { exact_1d, sliced };

// 1-D Wasserstein-1 distance between two weighted point sets.
double w1_exact_1d(const Vector& a, const Vector& wa, const Vector& b, const Vector& wb);

// W1 between two weighted measures: exact for d = 1, sliced over random
// directions otherwise (or when forced).
double w1_between(const WeightedEmpiricalMeasure& p, const WeightedEmpiricalMeasure& q, W1Method method,
                  std::size_t n_slices, std::uint64_t seed);

// W1 against i.i.d. target samples drawn with `seed`.
double w1_distance(const WeightedEmpiricalMeasure& measure, const Target& target, W1Method method,
                   std::size_t n_target_samples, std::size_t n_slices, std::uint64_t seed);

double v_average(const Target& target, const Matrix& particles);

struct DiagnosticsReport {
    double ksd2 = 0.0;
    double i_nu_stein = 0.0;
    double c_star = 0.0;
    double c_star_bound = 0.0;
    double v_average = 0.0;
    double nu = 1.0;
    std::optional<double> w1_to_target;
};

struct DiagnosticsOptions {
    bool compute_c_star = true;
    bool compute_w1 = false;
    W1Method w1_method = W1Method::exact_1d;
    std::size_t w1_target_samples = 10000;
    std::size_t w1_slices = 64;
    std::uint64_t w1_seed = 0;
};

// All per-configuration diagnostics for a uniform particle set.
DiagnosticsReport evaluate_diagnostics(const Kernel& kernel, const Target& target, const TargetConstants& constants,
                                       const Matrix& particles, double nu, const DiagnosticsOptions& options = {});

}  // namespace rsvgd
