#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "rsvgd/diagnostics.hpp"
#include "rsvgd/engine.hpp"
#include "rsvgd/error.hpp"
#include "rsvgd/log.hpp"
#include "rsvgd/runner.hpp"
#include "rsvgd/schedules.hpp"

namespace rsvgd {
namespace {

struct Tally {
    bool verbose;
    int failures = 0;

    void report(const std::string& name, bool ok, const std::string& detail) {
        if (!ok) ++failures;
        if (verbose || !ok) std::printf("%s  %-44s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    }
};

Matrix random_points(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d, double scale) {
    std::normal_distribution<double> g(0.0, scale);
    Matrix X(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index a = 0; a < d; ++a) X(i, a) = g(rng);
    return X;
}

}  // namespace

int run_self_check(bool verbose) {
    Tally t{verbose};
    std::mt19937_64 rng(20240601);
    const Kernel kernels[] = {Kernel::gaussian_rbf(1.3), Kernel::imq(0.8, 0.5), Kernel::rational_quadratic(1.1, 2.0)};

    // kernel gradient and cross-divergence against central differences
    {
        double worst = 0.0;
        const double eps = 1e-5;
        for (const Kernel& k : kernels) {
            for (int trial = 0; trial < 50; ++trial) {
                const Matrix P = random_points(rng, 2, 3, 1.0);
                const Vector x = P.row(0).transpose();
                const Vector y = P.row(1).transpose();
                const Vector g2 = k.grad2(x, y);
                double cross = 0.0;
                for (int a = 0; a < 3; ++a) {
                    Vector yp = y, ym = y, xp = x, xm = x;
                    yp(a) += eps;
                    ym(a) -= eps;
                    xp(a) += eps;
                    xm(a) -= eps;
                    const double fd = (k.value(x, yp) - k.value(x, ym)) / (2 * eps);
                    worst = std::max(worst, std::abs(fd - g2(a)) / (1e-8 + std::abs(g2(a))));
                    cross += (k.grad2(xp, y)(a) - k.grad2(xm, y)(a)) / (2 * eps);
                }
                const double cd = k.cross_div(x, y);
                worst = std::max(worst, std::abs(cross - cd) / (1e-8 + std::abs(cd)));
            }
        }
        t.report("kernel derivatives vs finite differences", worst < 1e-5, strprintf("max rel err %.2e", worst));
    }

    const Target target = Target::gaussian(Vector::Zero(2), Matrix::Identity(2, 2));
    const Kernel rbf = Kernel::gaussian_rbf(1.0);

    // R-SVGD reduces to SVGD at nu = 1
    {
        ParticleState s;
        s.positions = random_points(rng, 20, 2, 2.0);
        const Matrix a = rsvgd_step(rbf, target, s, 0.05, 1.0).positions;
        const Matrix b = svgd_step(rbf, target, s, 0.05).positions;
        t.report("nu = 1 reduction (bitwise)", a == b, "");
    }

    // dual-route agreement, sandwich and Appendix-D bound
    {
        double worst = 0.0;
        bool sandwich = true;
        for (int trial = 0; trial < 20; ++trial) {
            WeightedEmpiricalMeasure m;
            m.positions = random_points(rng, 15, 2, 1.5);
            m.weights = Vector::Random(15).cwiseAbs() + Vector::Constant(15, 0.05);
            m.weights /= m.weights.sum();
            for (double nu : {0.01, 0.3, 0.9, 1.0}) {
                const double lin = reg_stein_fisher_linear(rbf, target, m, nu);
                const SpectralFisher sp = reg_stein_fisher_spectral_details(rbf, target, m, nu);
                worst = std::max(worst, std::abs(lin - sp.value) / (1.0 + std::abs(lin)));
                const double tol = 1e-9 * (1.0 + sp.ksd2);
                sandwich = sandwich && nu * sp.value <= sp.ksd2 + tol &&
                           sp.ksd2 <= ((1.0 - nu) * sp.lambda_max + nu) * sp.value + tol &&
                           sp.ksd2 <= (rbf.bound() + 1.0) * sp.value + tol;
            }
        }
        t.report("I_nu_Stein linear vs spectral", worst < 1e-8, strprintf("max rel diff %.2e", worst));
        t.report("spectral sandwich and (B+1) bound", sandwich, "");
    }

    // SVGD self-interaction closed form
    {
        const Matrix X = random_points(rng, 5, 2, 1.0);
        const double c = c_star(rbf, target, X, 1.0);
        t.report("C* at nu = 1 equals d/l^2 + d", std::abs(c - 4.0) < 1e-10, strprintf("C* = %.12g", c));
    }

    // schedule constructors pass their own verification
    {
        bool ok = true;
        for (std::size_t N : {16u, 64u}) {
            ScheduleConstants sc{std::sqrt(2.0), 0.5, 1.0, 1.0, default_m_proxy(1.0, std::sqrt(2.0)), 1.5, N, 2};
            ok = ok && verify_schedule(corollary9_regime1(sc), sc).ok;
            ok = ok && verify_schedule(corollary9_regime2(sc, 0.1), sc).ok;
            ok = ok && verify_schedule(theorem7_schedule(sc, 1.0, 200), sc).ok;
        }
        t.report("schedule constructors feasible", ok, "");
    }

    // Euler consistency between the step and the integrator
    {
        ParticleState s;
        s.positions = random_points(rng, 8, 2, 1.0);
        const Matrix a = rsvgd_step(rbf, target, s, 0.01, 0.6).positions;
        const Matrix b = integrate(rbf, target, s, 0.6, 0.01, 0.01, Integrator::euler, 1).final_state.positions;
        t.report("Euler step consistency", (a - b).cwiseAbs().maxCoeff() < 1e-14, "");
    }

    std::printf("%d check(s) failed\n", t.failures);
    return t.failures;
}

}  // namespace rsvgd
