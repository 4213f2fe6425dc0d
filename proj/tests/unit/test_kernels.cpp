#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rsvgd/error.hpp"
#include "rsvgd/kernels.hpp"

using namespace rsvgd;

namespace {

std::vector<Kernel> families() {
    return {Kernel::gaussian_rbf(1.3), Kernel::imq(0.8, 0.5), Kernel::imq(1.5, 1.2),
            Kernel::rational_quadratic(1.1, 2.0)};
}

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

}  // namespace

TEST(Kernel, CoincidenceValues) {
    const Vector x = vec({0.4, -1.0});
    EXPECT_EQ(Kernel::gaussian_rbf(1.0).value(x, x), 1.0);
    EXPECT_EQ(Kernel::imq(1.0, 0.5).value(x, x), 1.0);
    for (const Kernel& k : families()) EXPECT_TRUE(k.grad2(x, x).isZero(0.0));
}

TEST(Kernel, RbfScalarValue) {
    const Vector x = vec({0.0});
    const Vector y = vec({1.3});
    EXPECT_NEAR(Kernel::gaussian_rbf(1.0).value(x, y), std::exp(-1.69 / 2.0), 1e-16);
}

// Values from symbolic differentiation at x = (0.3,-0.7,1.1), y = (-0.2,0.4,0.5):
// k, grad_2 k, div_1.div_2 k, Lap_2 k, d^2k/dx_0 dy_1.
TEST(Kernel, FrozenSymbolicValues) {
    const Vector x = vec({0.3, -0.7, 1.1});
    const Vector y = vec({-0.2, 0.4, 0.5});
    struct Row {
        Kernel k;
        double v[7];
    };
    const Row rows[] = {
        {Kernel::gaussian_rbf(1.3),
         {0.58364547814357403663, 0.17267617696555444871, -0.37988758932421978716, 0.20721141235866533845,
          0.66413914217520941811, -0.66413914217520941811, 0.11239277790657390153}},
        {Kernel::imq(0.8, 0.5),
         {0.63757671306333829001, 0.12958876281775168496, -0.28509527819905370691, 0.15550651538130202195,
          0.20228489805697823994, -0.20228489805697823994, 0.17383858426771567495}},
        {Kernel::rational_quadratic(1.1, 2.0),
         {0.52813173533894254615, 0.15859811872040316701, -0.34891586118488696743, 0.19031774246448380041,
          0.43150118786992573367, -0.43150118786992573367, 0.15716930684003917452}},
    };
    for (const Row& r : rows) {
        SCOPED_TRACE(to_string(r.k.family()));
        EXPECT_NEAR(r.k.value(x, y), r.v[0], 1e-14);
        const Vector g2 = r.k.grad2(x, y);
        for (int a = 0; a < 3; ++a) EXPECT_NEAR(g2(a), r.v[1 + a], 1e-14);
        EXPECT_NEAR(r.k.cross_div(x, y), r.v[4], 1e-14);
        EXPECT_NEAR(r.k.laplacian2(x, y), r.v[5], 1e-14);
        EXPECT_NEAR(r.k.hessian12(x, y)(0, 1), r.v[6], 1e-14);
    }
}

TEST(Kernel, RbfGrad2ClosedForm) {
    std::mt19937_64 rng(1);
    for (double l : {0.5, 1.0, 2.5}) {
        const Kernel k = Kernel::gaussian_rbf(l);
        for (int t = 0; t < 20; ++t) {
            const Matrix P = oracle::gaussian_cloud(rng, 2, 3);
            const Vector x = P.row(0).transpose(), y = P.row(1).transpose();
            const Vector expect = (x - y) / (l * l) * k.value(x, y);
            EXPECT_LE((k.grad2(x, y) - expect).cwiseAbs().maxCoeff(), 1e-15);
        }
    }
}

TEST(Kernel, CoincidenceDerivatives) {
    for (double l : {0.7, 1.0, 3.0}) {
        const Kernel k = Kernel::gaussian_rbf(l);
        for (Eigen::Index d : {1, 2, 5}) {
            const Vector x = Vector::LinSpaced(d, -1.0, 1.0);
            EXPECT_NEAR(k.cross_div(x, x), static_cast<double>(d) / (l * l), 1e-14);
            EXPECT_NEAR(k.laplacian2(x, x), -static_cast<double>(d) / (l * l), 1e-14);
            EXPECT_NEAR(k.diag_cross_div(d), static_cast<double>(d) / (l * l), 1e-14);
            EXPECT_NEAR(k.diag_laplacian2(d), -static_cast<double>(d) / (l * l), 1e-14);
        }
    }
    // imq: 2 beta d c^{-2 beta - 2}
    for (double c : {0.5, 1.0, 2.0})
        for (double beta : {0.5, 1.0}) {
            const Kernel k = Kernel::imq(c, beta);
            const Vector x = Vector::Constant(3, 0.2);
            EXPECT_NEAR(k.cross_div(x, x), 2 * beta * 3 * std::pow(c, -2 * beta - 2), 1e-13);
        }
}

TEST(Kernel, LaplacianScalesWithLengthscale) {
    const Vector x = vec({0.3, 0.1});
    const double a = Kernel::gaussian_rbf(0.9).laplacian2(x, x);
    const double b = Kernel::gaussian_rbf(1.8).laplacian2(x, x);
    EXPECT_NEAR(a / b, 4.0, 1e-14);
}

TEST(Kernel, Symmetry) {
    std::mt19937_64 rng(2);
    for (const Kernel& k : families()) {
        for (int t = 0; t < 50; ++t) {
            const Matrix P = oracle::gaussian_cloud(rng, 2, 3);
            const Vector x = P.row(0).transpose(), y = P.row(1).transpose();
            EXPECT_LE((k.grad1(x, y) - k.grad2(y, x)).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_EQ(k.value(x, y), k.value(y, x));
            EXPECT_LE((k.hessian12(x, y) + k.hessian11(x, y)).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(Kernel, FiniteDifferences) {
    std::mt19937_64 rng(3);
    for (const Kernel& k : families()) {
        SCOPED_TRACE(to_string(k.family()));
        for (int t = 0; t < 200; ++t) {
            const Matrix P = oracle::gaussian_cloud(rng, 2, 3);
            const Vector x = P.row(0).transpose(), y = P.row(1).transpose();
            auto of_y = [&](const Vector& v) { return k.value(x, v); };
            auto of_x = [&](const Vector& v) { return k.value(v, y); };
            auto g2_of_x = [&](const Vector& v) -> Vector { return k.grad2(v, y); };
            auto g1_of_x = [&](const Vector& v) -> Vector { return k.grad1(v, y); };

            const Vector g1 = k.grad1(x, y), g2 = k.grad2(x, y);
            const Vector fd1 = oracle::fd_gradient(of_x, x), fd2 = oracle::fd_gradient(of_y, y);
            for (int a = 0; a < 3; ++a) {
                EXPECT_LE(std::abs(fd1(a) - g1(a)), 1e-5 * std::max(1e-3, std::abs(g1(a))));
                EXPECT_LE(std::abs(fd2(a) - g2(a)), 1e-5 * std::max(1e-3, std::abs(g2(a))));
            }
            const Matrix H12 = oracle::fd_jacobian(g2_of_x, x);  // d/dx_b of dk/dy_a
            const Matrix H11 = oracle::fd_jacobian(g1_of_x, x);
            const double scale = std::max(1e-3, k.hessian11(x, y).cwiseAbs().maxCoeff());
            EXPECT_LE((H12.transpose() - k.hessian12(x, y)).cwiseAbs().maxCoeff(), 1e-5 * scale);
            EXPECT_LE((H11 - k.hessian11(x, y)).cwiseAbs().maxCoeff(), 1e-5 * scale);
            const double cd = k.cross_div(x, y);
            EXPECT_LE(std::abs(H12.trace() - cd), 1e-5 * std::max(1e-3, std::abs(cd)));
            const double lap = k.laplacian2(x, y);
            EXPECT_LE(std::abs(oracle::fd_laplacian(of_y, y) - lap), 1e-5 * std::max(1e-2, std::abs(lap)));
        }
    }
}

// B dominates |k| and all first and second partials; checked against a dense
// radial grid of the closed-form partials.
TEST(Kernel, BoundIsTheSupremum) {
    for (const Kernel& k : families()) {
        SCOPED_TRACE(to_string(k.family()));
        double sup = 0.0;
        for (int i = 0; i <= 400000; ++i) {
            const double t = 20.0 * k.lengthscale() * i / 400000.0;
            const RadialProfile p = k.profile(t * t);
            sup = std::max({sup, std::abs(p.f), 2 * std::abs(p.df) * t, 2 * std::abs(p.df),
                            std::abs(2 * p.df + 4 * p.d2f * t * t)});
        }
        EXPECT_GE(k.bound(), sup * (1 - 1e-12));
        EXPECT_LE(k.bound(), sup * (1 + 1e-6));
    }
    EXPECT_NEAR(Kernel::gaussian_rbf(0.5).bound(), 4.0, 1e-15);
    EXPECT_NEAR(Kernel::gaussian_rbf(2.0).bound(), 1.0, 1e-15);
}

TEST(Kernel, MedianHeuristic) {
    Matrix X(3, 1);
    X << 0.0, 1.0, 3.0;  // distances 1, 2, 3
    EXPECT_DOUBLE_EQ(median_pairwise_distance(X), 2.0);
    EXPECT_DOUBLE_EQ(median_pairwise_distance(Matrix::Zero(1, 2)), 1.0);
    EXPECT_DOUBLE_EQ(median_pairwise_distance(Matrix::Zero(4, 2)), 1.0);
}

TEST(Kernel, FamilyNames) {
    EXPECT_EQ(kernel_family_from_string("gaussian_rbf"), KernelFamily::gaussian_rbf);
    EXPECT_EQ(kernel_family_from_string("imq"), KernelFamily::imq);
    EXPECT_EQ(kernel_family_from_string("rational_quadratic"), KernelFamily::rational_quadratic);
    EXPECT_THROW(kernel_family_from_string("matern"), ConfigError);
}

TEST(Kernel, RejectsBadInput) {
    const Kernel k = Kernel::gaussian_rbf(1.0);
    EXPECT_THROW(k.value(Vector::Zero(2), Vector::Zero(3)), InputError);
    Vector bad = Vector::Zero(2);
    bad(1) = std::nan("");
    EXPECT_THROW(k.grad2(bad, Vector::Zero(2)), InputError);
    EXPECT_THROW(Kernel::gaussian_rbf(0.0), Error);
    EXPECT_THROW(Kernel::imq(1.0, -0.5), Error);
}
