#include "rsvgd/engine.hpp"

#include <cmath>
#include <random>

#include "rsvgd/error.hpp"
#include "rsvgd/log.hpp"

namespace rsvgd {

WeightedEmpiricalMeasure WeightedEmpiricalMeasure::uniform(const Matrix& positions) {
    WeightedEmpiricalMeasure m;
    m.positions = positions;
    m.weights = Vector::Constant(positions.rows(), 1.0 / static_cast<double>(positions.rows()));
    return m;
}

bool WeightedEmpiricalMeasure::is_uniform() const {
    if (weights.size() == 0) return true;
    return (weights.array() == weights(0)).all();
}

void WeightedEmpiricalMeasure::validate() const {
    if (positions.rows() < 1) throw InputError("empirical measure is empty");
    if (weights.size() != positions.rows()) throw InputError("weight count does not match particle count");
    if (!positions.allFinite()) throw InputError("empirical measure has non-finite positions");
    if (!weights.allFinite() || (weights.array() < 0.0).any()) throw InputError("weights must be nonnegative");
    if (std::abs(weights.sum() - 1.0) > 1e-12) {
        throw InputError(strprintf("weights sum to %.17g, not 1", weights.sum()));
    }
}

namespace {

void check_particles(const Target& target, const Matrix& X) {
    if (X.rows() < 1) throw InputError("particle set is empty");
    if (X.cols() != target.dim()) {
        throw InputError(strprintf("particles have dimension %ld, target has %ld", static_cast<long>(X.cols()),
                                   static_cast<long>(target.dim())));
    }
    if (!X.allFinite()) throw InputError("particles contain non-finite coordinates");
}

Matrix force_impl(const Kernel& kernel, const Target& target, const Matrix& X, Matrix* gram) {
    check_particles(target, X);
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const Matrix Xt = X.transpose();
    const Matrix Gt = target.grad_rows(X).transpose();
    Matrix acc = Matrix::Zero(d, n);
    if (gram) gram->resize(n, n);
    const double k0 = kernel.profile(0.0).f;
    // Each unordered pair is visited once; row i still accumulates j in ascending order.
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* xi = Xt.col(i).data();
        const double* gi = Gt.col(i).data();
        double* ai = acc.col(i).data();
        for (Eigen::Index a = 0; a < d; ++a) ai[a] += k0 * gi[a];
        if (gram) (*gram)(i, i) = k0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double* xj = Xt.col(j).data();
            const double* gj = Gt.col(j).data();
            double* aj = acc.col(j).data();
            double s = 0.0;
            for (Eigen::Index a = 0; a < d; ++a) {
                const double r = xi[a] - xj[a];
                s += r * r;
            }
            const RadialProfile p = kernel.profile(s);
            const double two_df = 2.0 * p.df;
            for (Eigen::Index a = 0; a < d; ++a) {
                const double r = xi[a] - xj[a];
                ai[a] += p.f * gj[a] + two_df * r;
                aj[a] += p.f * gi[a] - two_df * r;
            }
            if (gram) {
                (*gram)(i, j) = p.f;
                (*gram)(j, i) = p.f;
            }
        }
    }
    Matrix force = acc.transpose() / static_cast<double>(n);
    if (!force.allFinite()) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!force.row(i).allFinite()) {
                throw NumericalError(strprintf("non-finite Stein force at particle %ld", static_cast<long>(i)));
            }
        }
    }
    return force;
}

Matrix preconditioned_direction(const Kernel& kernel, const Target& target, const Matrix& X, double nu) {
    if (!(nu > 0.0 && nu <= 1.0)) throw InputError(strprintf("nu must lie in (0, 1], got %g", nu));
    if (nu == 1.0) return force_impl(kernel, target, X, nullptr);
    Matrix K;
    Matrix force = force_impl(kernel, target, X, &K);
    GramSystem sys(std::move(K), nu);
    return sys.solve(force);
}

void check_step(double h) {
    if (!(std::isfinite(h) && h > 0.0)) throw InputError(strprintf("step size must be positive, got %g", h));
}

ParticleState advance(const ParticleState& state, const Matrix& direction, double h) {
    ParticleState next;
    next.positions = state.positions - h * direction;
    if (!next.positions.allFinite()) throw NumericalError("step produced non-finite particles");
    next.step = state.step + 1;
    next.time = state.time + h;
    next.seed = state.seed;
    return next;
}

bool diverged(const Matrix& X) {
    return !X.allFinite() || X.cwiseAbs().maxCoeff() > kDivergenceThreshold;
}

}  // namespace

Matrix stein_force(const Kernel& kernel, const Target& target, const Matrix& particles) {
    return force_impl(kernel, target, particles, nullptr);
}

Matrix stein_force(const Kernel& kernel, const Target& target, const Matrix& particles, Matrix& gram) {
    return force_impl(kernel, target, particles, &gram);
}

ParticleState rsvgd_step(const Kernel& kernel, const Target& target, const ParticleState& state, double h,
                         double nu) {
    check_step(h);
    return advance(state, preconditioned_direction(kernel, target, state.positions, nu), h);
}

ParticleState svgd_step(const Kernel& kernel, const Target& target, const ParticleState& state, double h) {
    check_step(h);
    return advance(state, force_impl(kernel, target, state.positions, nullptr), h);
}

Matrix rsvgf_rhs(const Kernel& kernel, const Target& target, const Matrix& particles, double nu) {
    return -preconditioned_direction(kernel, target, particles, nu);
}

std::string to_string(Integrator method) { return method == Integrator::euler ? "euler" : "rk4"; }

Integrator integrator_from_string(const std::string& name) {
    if (name == "euler") return Integrator::euler;
    if (name == "rk4") return Integrator::rk4;
    throw ConfigError("unknown integrator '" + name + "' (expected euler or rk4)");
}

Trajectory integrate(const Kernel& kernel, const Target& target, const ParticleState& init, double nu, double T,
                     double dt, Integrator method, std::size_t snapshot_stride, const StepObserver& observer) {
    if (!(std::isfinite(T) && T > 0.0)) throw InputError("integration horizon must be positive");
    if (!(std::isfinite(dt) && dt > 0.0) || dt > T) throw InputError("time step must satisfy 0 < dt <= T");
    if (snapshot_stride == 0) throw InputError("snapshot stride must be positive");
    check_particles(target, init.positions);

    auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
    if (steps == 0) steps = 1;

    Trajectory traj;
    ParticleState state = init;
    state.time = 0.0;
    state.step = 0;
    traj.snapshots.push_back({0.0, 0, state.positions});
    if (observer) observer(state);

    auto rhs = [&](const Matrix& X) { return rsvgf_rhs(kernel, target, X, nu); };

    for (std::size_t n = 1; n <= steps; ++n) {
        const double t0 = static_cast<double>(n - 1) * dt;
        const double h = n == steps ? T - t0 : dt;
        const Matrix& X = state.positions;
        Matrix next;
        if (method == Integrator::euler) {
            next = X + h * rhs(X);
        } else {
            const Matrix k1 = rhs(X);
            const Matrix k2 = rhs(X + (0.5 * h) * k1);
            const Matrix k3 = rhs(X + (0.5 * h) * k2);
            const Matrix k4 = rhs(X + h * k3);
            next = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (diverged(next)) {
            throw DivergenceError(strprintf("particles diverged at t=%.6g (step %zu)", t0 + h, n), t0 + h, n);
        }
        state.positions = std::move(next);
        state.step = n;
        state.time = n == steps ? T : static_cast<double>(n) * dt;
        if (observer) observer(state);
        if (n % snapshot_stride == 0 || n == steps) {
            traj.snapshots.push_back({state.time, n, state.positions});
        }
    }
    traj.final_state = state;
    return traj;
}

WeightedEmpiricalMeasure annealed_measure(const std::vector<Snapshot>& snapshots, AnnealMode mode,
                                          const std::vector<double>& discrete_weights) {
    if (snapshots.empty()) throw InputError("annealed measure needs at least one snapshot");
    const std::size_t m = snapshots.size();
    std::vector<double> sw(m, 0.0);
    if (mode == AnnealMode::continuous_trapezoid) {
        if (m == 1) {
            sw[0] = 1.0;
        } else {
            for (std::size_t k = 0; k + 1 < m; ++k) {
                const double len = snapshots[k + 1].time - snapshots[k].time;
                if (len < 0.0) throw InputError("snapshot times must be nondecreasing");
                sw[k] += 0.5 * len;
                sw[k + 1] += 0.5 * len;
            }
        }
    } else {
        if (discrete_weights.size() != m) throw InputError("need one discrete weight per snapshot");
        for (std::size_t k = 0; k < m; ++k) {
            if (!(std::isfinite(discrete_weights[k]) && discrete_weights[k] >= 0.0)) {
                throw InputError("discrete snapshot weights must be nonnegative");
            }
            sw[k] = discrete_weights[k];
        }
    }
    double total = 0.0;
    for (double w : sw) total += w;
    if (!(total > 0.0)) {
        for (double& w : sw) w = 1.0;
        total = static_cast<double>(m);
    }

    const Eigen::Index d = snapshots.front().positions.cols();
    Eigen::Index rows = 0;
    for (const auto& s : snapshots) {
        if (s.positions.cols() != d || s.positions.rows() < 1) throw InputError("snapshots have inconsistent shapes");
        rows += s.positions.rows();
    }
    WeightedEmpiricalMeasure out;
    out.positions.resize(rows, d);
    out.weights.resize(rows);
    Eigen::Index at = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const Eigen::Index n = snapshots[k].positions.rows();
        out.positions.middleRows(at, n) = snapshots[k].positions;
        out.weights.segment(at, n).setConstant(sw[k] / total / static_cast<double>(n));
        at += n;
    }
    // absorb the rounding residue so the simplex check holds to 1e-12
    out.weights /= out.weights.sum();
    return out;
}

ParticleState initialize_particles(Eigen::Index N, Eigen::Index d, const InitSpec& init, const Target& target,
                                   std::uint64_t seed) {
    if (N < 1 || d < 1) throw ConfigError("N and d must be positive");
    if (d != target.dim()) throw ConfigError("init dimension does not match target");
    const Vector mean = init.mean.size() == 0 ? Vector::Zero(d) : init.mean;
    const Matrix cov = init.covariance.size() == 0 ? Matrix::Identity(d, d) : init.covariance;
    if (mean.size() != d) throw ConfigError("init mean has wrong dimension");
    if (cov.rows() != d || cov.cols() != d) throw ConfigError("init covariance has wrong shape");
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) throw ConfigError("init covariance is not positive definite");
    const Matrix L = llt.matrixL();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix Z(N, d);
    ParticleState state;
    state.seed = seed;
    for (int attempt = 0; attempt <= 10000; ++attempt) {
        for (Eigen::Index i = 0; i < N; ++i) {
            for (Eigen::Index a = 0; a < d; ++a) Z(i, a) = normal(rng);
        }
        state.positions = (Z * L.transpose()).rowwise() + mean.transpose();
        if (!init.restrict_K) return state;
        const double vbar = target.potential_rows(state.positions).mean();
        if (vbar <= *init.restrict_K) {
            if (attempt > 0) log_info(strprintf("restricted initialization accepted after %d rejections", attempt));
            return state;
        }
    }
    throw ConfigError(strprintf("restricted initialization: no configuration with mean V <= %g after 1e4 rejections",
                                *init.restrict_K));
}

}  // namespace rsvgd
