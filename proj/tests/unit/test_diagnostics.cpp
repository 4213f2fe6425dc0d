#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rsvgd/diagnostics.hpp"
#include "rsvgd/error.hpp"

using namespace rsvgd;

namespace {

Target standard(Eigen::Index d) { return Target::gaussian(Vector::Zero(d), Matrix::Identity(d, d)); }

WeightedEmpiricalMeasure weighted(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d, double scale) {
    WeightedEmpiricalMeasure m;
    m.positions = oracle::gaussian_cloud(rng, n, d, scale);
    m.weights = oracle::random_simplex(rng, n);
    return m;
}

Target skewed_mixture() {
    Matrix S(2, 2);
    S << 1.2, -0.4, -0.4, 0.9;
    return Target::mixture({Vector::Zero(2), Vector::Constant(2, 1.5)}, {S}, {0.6, 0.4}, 0.5);
}

}  // namespace

TEST(Ksd, SingleParticleAtMode) {
    for (double l : {0.5, 1.0, 2.0}) {
        const Kernel k = Kernel::gaussian_rbf(l);
        const double v = ksd_squared(k, standard(3), WeightedEmpiricalMeasure::uniform(Matrix::Zero(1, 3)));
        EXPECT_NEAR(v, 3.0 / (l * l), 1e-14);
    }
}

TEST(Ksd, MatchesDoubleLoop) {
    std::mt19937_64 rng(31);
    const Target t = skewed_mixture();
    for (const Kernel& k : {Kernel::gaussian_rbf(0.9), Kernel::imq(1.0, 0.5), Kernel::rational_quadratic(1.3, 2.0)}) {
        const WeightedEmpiricalMeasure u = WeightedEmpiricalMeasure::uniform(oracle::gaussian_cloud(rng, 20, 2, 1.5));
        const double a = ksd_squared(k, t, u);
        EXPECT_NEAR(a, oracle::ksd2(k, t, u.positions, u.weights), 1e-12 * (1 + a));
        EXPECT_GE(a, -1e-10);
        const WeightedEmpiricalMeasure w = weighted(rng, 20, 2, 1.5);
        const double b = ksd_squared(k, t, w);
        EXPECT_NEAR(b, oracle::ksd2(k, t, w.positions, w.weights), 1e-12 * (1 + b));
    }
}

TEST(Fisher, RoutesAgreeWithResolventOracle) {
    std::mt19937_64 rng(32);
    const Target t = skewed_mixture();
    const Kernel k = Kernel::gaussian_rbf(1.1);
    for (int rep = 0; rep < 10; ++rep) {
        const WeightedEmpiricalMeasure m = rep % 2 ? weighted(rng, 20, 2, 1.3)
                                                   : WeightedEmpiricalMeasure::uniform(oracle::gaussian_cloud(rng, 20, 2, 1.3));
        for (double nu : {1e-2, 0.3, 0.9, 1.0}) {
            const double lin = reg_stein_fisher_linear(k, t, m, nu);
            const double spec = reg_stein_fisher_spectral(k, t, m, nu);
            const double ref = oracle::i_nu_stein(k, t, m.positions, m.weights, nu);
            EXPECT_LE(oracle::rel_err(lin, spec), 1e-8);
            EXPECT_LE(oracle::rel_err(lin, ref), 1e-8);
        }
        const double ksd = ksd_squared(k, t, m);
        EXPECT_NEAR(reg_stein_fisher_linear(k, t, m, 1.0), ksd, 1e-10 * (1 + ksd));
        EXPECT_NEAR(reg_stein_fisher_spectral(k, t, m, 1.0), ksd, 1e-10 * (1 + ksd));
    }
}

TEST(Fisher, SingleParticleAtMode) {
    const Kernel k = Kernel::gaussian_rbf(0.8);
    const WeightedEmpiricalMeasure m = WeightedEmpiricalMeasure::uniform(Matrix::Zero(1, 2));
    for (double nu : {0.1, 0.5, 1.0}) {
        const double expect = 2.0 / (nu * 0.64);
        EXPECT_NEAR(reg_stein_fisher_linear(k, standard(2), m, nu), expect, 1e-12 * expect);
        EXPECT_NEAR(reg_stein_fisher_spectral(k, standard(2), m, nu), expect, 1e-12 * expect);
    }
}

// All particles at one point x: I = k0 |g|^2 / ((1-nu) k0 + nu) + div1.div2 k(x,x) / nu.
TEST(Fisher, RankOneClosedForm) {
    const Kernel k = Kernel::imq(1.3, 0.5);
    const Target t = standard(2);
    Matrix X(5, 2);
    X.rowwise() = Eigen::RowVector2d(0.8, -1.1);
    const WeightedEmpiricalMeasure m = WeightedEmpiricalMeasure::uniform(X);
    const double k0 = k.diag_value();
    const double g2 = t.grad(X.row(0).transpose()).squaredNorm();
    for (double nu : {0.05, 0.4, 0.8}) {
        const double expect = k0 * g2 / ((1 - nu) * k0 + nu) + k.diag_cross_div(2) / nu;
        const SpectralFisher s = reg_stein_fisher_spectral_details(k, t, m, nu);
        EXPECT_NEAR(s.value, expect, 1e-10 * expect);
        EXPECT_NEAR(reg_stein_fisher_linear(k, t, m, nu), expect, 1e-10 * expect);
        EXPECT_NEAR(s.lambda_max, k0, 1e-12);
    }
}

TEST(Fisher, SpectralSandwich) {
    std::mt19937_64 rng(33);
    const Target t = standard(3);
    const Kernel k = Kernel::rational_quadratic(1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const WeightedEmpiricalMeasure m = weighted(rng, 15, 3, 2.0);
        for (double nu : {1e-2, 0.3, 0.9}) {
            const SpectralFisher s = reg_stein_fisher_spectral_details(k, t, m, nu);
            const double tol = 1e-9 * s.ksd2;
            EXPECT_LE(nu * s.value, s.ksd2 + tol);
            EXPECT_LE(s.ksd2, ((1 - nu) * s.lambda_max + nu) * s.value + tol);
            EXPECT_LE(s.ksd2, (k.bound() + 1) * s.value + tol);
        }
    }
}

// I(t mu + (1-t) rho) <= t I(mu) + (1-t) I(rho) for measures on a common support.
TEST(Fisher, ConvexInTheMeasure) {
    std::mt19937_64 rng(34);
    const Target t = skewed_mixture();
    const Kernel k = Kernel::gaussian_rbf(1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix X = oracle::gaussian_cloud(rng, 12, 2, 1.5);
        WeightedEmpiricalMeasure a{X, oracle::random_simplex(rng, 12)};
        WeightedEmpiricalMeasure b{X, oracle::random_simplex(rng, 12)};
        const double s = u(rng);
        WeightedEmpiricalMeasure mix{X, s * a.weights + (1 - s) * b.weights};
        for (double nu : {0.05, 0.5}) {
            const double lhs = reg_stein_fisher_linear(k, t, mix, nu);
            const double rhs = s * reg_stein_fisher_linear(k, t, a, nu) + (1 - s) * reg_stein_fisher_linear(k, t, b, nu);
            EXPECT_GE(rhs - lhs, -1e-9);
        }
    }
}

TEST(CStar, SvgdLimitClosedForm) {
    std::mt19937_64 rng(35);
    for (double l : {0.6, 1.0, 1.7})
        for (Eigen::Index d : {1, 2, 3}) {
            const Matrix X = oracle::gaussian_cloud(rng, 7, d, 2.0);
            const double expect = static_cast<double>(d) / (l * l) + static_cast<double>(d);
            EXPECT_NEAR(c_star(Kernel::gaussian_rbf(l), standard(d), X, 1.0), expect, 1e-12 * expect);
        }
}

TEST(CStar, MatchesIndexLoops) {
    std::mt19937_64 rng(36);
    const Kernel kernels[] = {Kernel::gaussian_rbf(1.0), Kernel::imq(0.9, 0.5)};
    for (const Kernel& k : kernels)
        for (Eigen::Index n : {1, 2, 4, 6})
            for (Eigen::Index d : {1, 2, 3}) {
                Matrix S = oracle::random_spd(rng, d);
                const Target t = Target::gaussian(oracle::gaussian_cloud(rng, d, 1).col(0), S);
                const Matrix X = oracle::gaussian_cloud(rng, n, d, 1.2);
                for (double nu : {0.3, 0.7, 1.0}) {
                    const double a = c_star(k, t, X, nu);
                    const double b = oracle::c_star_loops(k, t, X, nu);
                    EXPECT_NEAR(a, b, 1e-10 * (1 + std::abs(b))) << "n=" << n << " d=" << d << " nu=" << nu;
                }
            }
}

// The coefficient equals the self-driven part of each particle's drift divergence.
TEST(CStar, MatchesDriftDivergenceDefinition) {
    std::mt19937_64 rng(37);
    const Target t = skewed_mixture();
    for (const Kernel& k : {Kernel::gaussian_rbf(1.1), Kernel::rational_quadratic(1.0, 1.5)})
        for (double nu : {0.2, 0.6, 1.0}) {
            const Matrix X = oracle::gaussian_cloud(rng, 5, 2, 1.2);
            const double a = c_star(k, t, X, nu);
            const double b = oracle::c_star_definition(k, t, X, nu);
            EXPECT_NEAR(a, b, 1e-6 * (1 + std::abs(b))) << "nu=" << nu;
        }
}

TEST(CStar, BoundHolds) {
    std::mt19937_64 rng(38);
    const Target t = standard(2);
    const Kernel k = Kernel::gaussian_rbf(1.0);
    const TargetConstants tc = derive_constants(t, k);
    for (int rep = 0; rep < 30; ++rep) {
        const Matrix X = oracle::gaussian_cloud(rng, 8, 2, 2.0);
        for (double nu : {0.3, 0.7}) EXPECT_LE(c_star(k, t, X, nu), c_star_bound(k, t, tc, X, nu) + 1e-9);
        EXPECT_NEAR(c_star_bound(k, t, tc, X, 1.0), tc.c_star * 2.0, 1e-14);
    }
    for (double nu : {0.01, 0.4, 1.0}) EXPECT_NEAR(c_star_beta1(1.7, 2.5, nu) - c_star_beta2(1.7, nu), 1.7 * 2.5, 1e-9);
}

TEST(W1, Trivial) {
    std::mt19937_64 rng(39);
    const Matrix X = oracle::gaussian_cloud(rng, 50, 1);
    const WeightedEmpiricalMeasure m = WeightedEmpiricalMeasure::uniform(X);
    EXPECT_NEAR(w1_between(m, m, W1Method::exact_1d, 0, 0), 0.0, 1e-15);
    Vector a(1), b(1), one = Vector::Ones(1);
    a << -0.4;
    b << 1.9;
    EXPECT_NEAR(w1_exact_1d(a, one, b, one), 2.3, 1e-15);
}

TEST(W1, ExactOneDimensionalAgainstQuantiles) {
    // Equal-size uniform sets: W1 is the mean gap between sorted samples.
    std::mt19937_64 rng(40);
    Vector a = oracle::gaussian_cloud(rng, 64, 1).col(0);
    Vector b = oracle::gaussian_cloud(rng, 64, 1, 1.0, 0.5).col(0);
    const Vector w = Vector::Constant(64, 1.0 / 64);
    const double got = w1_exact_1d(a, w, b, w);
    std::sort(a.data(), a.data() + a.size());
    std::sort(b.data(), b.data() + b.size());
    EXPECT_NEAR(got, (a - b).cwiseAbs().mean(), 1e-13);
}

TEST(W1, TranslatedGaussians) {
    std::mt19937_64 rng(41);
    const Target shifted = Target::gaussian(Vector::Constant(1, 2.0), Matrix::Identity(1, 1));
    const WeightedEmpiricalMeasure m = WeightedEmpiricalMeasure::uniform(oracle::gaussian_cloud(rng, 100, 1));
    const double w = w1_distance(m, shifted, W1Method::exact_1d, 10000, 0, 17);
    EXPECT_NEAR(w, 2.0, 0.3);

    const Target shifted2 = Target::gaussian(Vector::Constant(2, 2.0), Matrix::Identity(2, 2));
    const WeightedEmpiricalMeasure m2 = WeightedEmpiricalMeasure::uniform(oracle::gaussian_cloud(rng, 400, 2));
    const double sliced = w1_distance(m2, shifted2, W1Method::sliced, 4000, 128, 17);
    // mean over directions of |theta . (2,2)| = 2 sqrt(2) * 2/pi
    EXPECT_NEAR(sliced, 4.0 * std::sqrt(2.0) / M_PI, 0.2);
}

TEST(VAverage, Values) {
    std::mt19937_64 rng(42);
    const Target t = skewed_mixture();
    const Matrix X = oracle::gaussian_cloud(rng, 13, 2);
    double mean = 0.0;
    for (Eigen::Index i = 0; i < 13; ++i) mean += t.potential(X.row(i).transpose()) / 13.0;
    EXPECT_NEAR(v_average(t, X), mean, 1e-13);
    EXPECT_NEAR(v_average(t, X.topRows(1)), t.potential(X.row(0).transpose()), 1e-15);
    EXPECT_DOUBLE_EQ(v_average(standard(2), Matrix::Zero(4, 2)), 1.0);
}

TEST(Report, AgreesWithIndividualDiagnostics) {
    std::mt19937_64 rng(43);
    const Target t = standard(1);
    const Kernel k = Kernel::gaussian_rbf(1.0);
    const TargetConstants tc = derive_constants(t, k);
    const Matrix X = oracle::gaussian_cloud(rng, 30, 1);
    DiagnosticsOptions opt;
    opt.compute_w1 = true;
    opt.w1_seed = 9;
    const DiagnosticsReport r = evaluate_diagnostics(k, t, tc, X, 0.6, opt);
    const WeightedEmpiricalMeasure m = WeightedEmpiricalMeasure::uniform(X);
    EXPECT_NEAR(r.ksd2, ksd_squared(k, t, m), 1e-14);
    EXPECT_NEAR(r.i_nu_stein, reg_stein_fisher_linear(k, t, m, 0.6), 1e-10);
    EXPECT_NEAR(r.c_star, c_star(k, t, X, 0.6), 1e-12);
    EXPECT_NEAR(r.c_star_bound, c_star_bound(k, t, tc, X, 0.6), 1e-12);
    ASSERT_TRUE(r.w1_to_target.has_value());
    EXPECT_NEAR(*r.w1_to_target, w1_distance(m, t, W1Method::exact_1d, 10000, 64, 9), 1e-15);
}

TEST(Diagnostics, RejectBadInput) {
    const Kernel k = Kernel::gaussian_rbf(1.0);
    WeightedEmpiricalMeasure m = WeightedEmpiricalMeasure::uniform(Matrix::Zero(3, 2));
    EXPECT_THROW(reg_stein_fisher_linear(k, standard(2), m, 0.0), InputError);
    m.weights(0) = 0.9;
    EXPECT_THROW(ksd_squared(k, standard(2), m), InputError);
    EXPECT_THROW(c_star(k, standard(3), Matrix::Zero(3, 2), 0.5), InputError);
}
