#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rsvgd/kernels.hpp"
#include "rsvgd/regsolve.hpp"
#include "rsvgd/targets.hpp"
#include "rsvgd/types.hpp"

namespace rsvgd {

inline constexpr double kDivergenceThreshold = 1e12;

// Row i: (1/N) sum_j [ k(x^i, x^j) grad V(x^j) - grad_2 k(x^i, x^j) ].
Matrix stein_force(const Kernel& kernel, const Target& target, const Matrix& particles);

// Same force, also returning the Gram matrix from the same pairwise pass.
Matrix stein_force(const Kernel& kernel, const Target& target, const Matrix& particles, Matrix& gram);

// X - h * (((1 - nu)/N) K + nu I)^{-1} force.
ParticleState rsvgd_step(const Kernel& kernel, const Target& target, const ParticleState& state, double h,
                         double nu);
ParticleState svgd_step(const Kernel& kernel, const Target& target, const ParticleState& state, double h);

// Velocity of the interacting ODE: -(((1 - nu)/N) K + nu I)^{-1} force.
Matrix rsvgf_rhs(const Kernel& kernel, const Target& target, const Matrix& particles, double nu);

enum class Integrator { euler, rk4 };

std::string to_string(Integrator method);
Integrator integrator_from_string(const std::string& name);

struct Snapshot {
    double time = 0.0;
    std::size_t step = 0;
    Matrix positions;
};

struct Trajectory {
    ParticleState final_state;
    std::vector<Snapshot> snapshots;
};

// Called with the state after each accepted step (and once with the initial state).
using StepObserver = std::function<void(const ParticleState&)>;

// Fixed-step integration of the R-SVGF system over [0, T]. The final step is
// shortened when T is not a multiple of dt. Snapshots are taken at t = 0, at
// every `snapshot_stride` steps and at t = T. Throws DivergenceError when any
// coordinate exceeds 1e12 in magnitude.
Trajectory integrate(const Kernel& kernel, const Target& target, const ParticleState& init, double nu,
                     double T, double dt, Integrator method, std::size_t snapshot_stride,
                     const StepObserver& observer = {});

enum class AnnealMode { continuous_trapezoid, discrete_weighted };

// Pools snapshots into one weighted measure. Each snapshot's particles share its
// weight equally; snapshot weights are trapezoid time weights or the supplied
// discrete weights, normalised to one.
WeightedEmpiricalMeasure annealed_measure(const std::vector<Snapshot>& snapshots, AnnealMode mode,
                                          const std::vector<double>& discrete_weights = {});

struct InitSpec {
    Vector mean;        // empty means zero
    Matrix covariance;  // empty means identity
    std::optional<double> restrict_K;
};

// i.i.d. gaussian particles; with restrict_K the whole configuration is redrawn
// until (1/N) sum V(x^i) <= K (at most 1e4 rejections).
ParticleState initialize_particles(Eigen::Index N, Eigen::Index d, const InitSpec& init, const Target& target,
                                   std::uint64_t seed);

}  // namespace rsvgd
