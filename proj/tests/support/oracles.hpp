#pragma once

// Reference implementations used only by the tests. They are written for
// clarity: explicit loops, dense inverses and finite differences.

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "rsvgd/kernels.hpp"
#include "rsvgd/targets.hpp"
#include "rsvgd/types.hpp"

namespace oracle {

using rsvgd::Kernel;
using rsvgd::Matrix;
using rsvgd::Target;
using rsvgd::Vector;

inline double rel_err(double a, double b, double floor = 1e-12) {
    return std::abs(a - b) / std::max(floor, std::max(std::abs(a), std::abs(b)));
}

inline Matrix gaussian_cloud(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d, double scale = 1.0,
                             double shift = 0.0) {
    std::normal_distribution<double> g(shift, scale);
    Matrix X(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index a = 0; a < d; ++a) X(i, a) = g(rng);
    return X;
}

inline Vector random_simplex(std::mt19937_64& rng, Eigen::Index n) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = u(rng);
    return w / w.sum();
}

inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index d, double floor = 0.3) {
    const Matrix A = gaussian_cloud(rng, d, d, 0.6);
    return A * A.transpose() + floor * Matrix::Identity(d, d);
}

// Central differences.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double eps = 1e-5) {
    Vector g(x.size());
    for (Eigen::Index a = 0; a < x.size(); ++a) {
        Vector p = x, m = x;
        p(a) += eps;
        m(a) -= eps;
        g(a) = (f(p) - f(m)) / (2 * eps);
    }
    return g;
}

inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double eps = 1e-5) {
    const Vector f0 = f(x);
    Matrix J(f0.size(), x.size());
    for (Eigen::Index a = 0; a < x.size(); ++a) {
        Vector p = x, m = x;
        p(a) += eps;
        m(a) -= eps;
        J.col(a) = (f(p) - f(m)) / (2 * eps);
    }
    return J;
}

// Second differences of a scalar function along each axis, summed.
inline double fd_laplacian(const std::function<double(const Vector&)>& f, const Vector& x, double eps = 1e-4) {
    double acc = 0.0;
    const double f0 = f(x);
    for (Eigen::Index a = 0; a < x.size(); ++a) {
        Vector p = x, m = x;
        p(a) += eps;
        m(a) -= eps;
        acc += (f(p) - 2 * f0 + f(m)) / (eps * eps);
    }
    return acc;
}

// (1/N) sum_j [ k(x^i,x^j) grad V(x^j) - grad_2 k(x^i,x^j) ], one row at a time.
inline Matrix stein_force(const Kernel& k, const Target& t, const Matrix& X) {
    const Eigen::Index n = X.rows();
    Matrix F = Matrix::Zero(n, X.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const Vector xi = X.row(i).transpose();
            const Vector xj = X.row(j).transpose();
            F.row(i) += (k.value(xi, xj) * t.grad(xj) - k.grad2(xi, xj)).transpose();
        }
    }
    return F / static_cast<double>(n);
}

inline Matrix gram(const Kernel& k, const Matrix& X) {
    Matrix K(X.rows(), X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.rows(); ++j) K(i, j) = k.value(X.row(i).transpose(), X.row(j).transpose());
    return K;
}

inline Matrix resolvent_inverse(const Matrix& K, double nu) {
    const auto n = static_cast<double>(K.rows());
    return ((1.0 - nu) / n * K + nu * Matrix::Identity(K.rows(), K.rows())).inverse();
}

// Langevin Stein kernel with V = -log pi.
inline double stein_kernel(const Kernel& k, const Target& t, const Vector& x, const Vector& y) {
    const Vector gx = t.grad(x);
    const Vector gy = t.grad(y);
    return gx.dot(gy) * k.value(x, y) - gx.dot(k.grad2(x, y)) - gy.dot(k.grad1(x, y)) + k.cross_div(x, y);
}

inline double ksd2(const Kernel& k, const Target& t, const Matrix& X, const Vector& w) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.rows(); ++j)
            acc += w(i) * w(j) * stein_kernel(k, t, X.row(i).transpose(), X.row(j).transpose());
    return acc;
}

// Regularized Stein Fisher information from the RKHS resolvent. With
// g(z) = sum_j w_j [grad_2 k(z,x^j) - k(z,x^j) grad V(x^j)], the solution of
// ((1-nu) S + nu) f = g has values c = ((1-nu) K W + nu I)^{-1} g(X) on the
// support, and I = (|g|_H^2 - (1-nu) sum_j w_j c_j . g(x^j)) / nu.
inline double i_nu_stein(const Kernel& k, const Target& t, const Matrix& X, const Vector& w, double nu) {
    const Eigen::Index n = X.rows();
    Matrix g = Matrix::Zero(n, X.cols());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const Vector xi = X.row(i).transpose();
            const Vector xj = X.row(j).transpose();
            g.row(i) += w(j) * (k.grad2(xi, xj) - k.value(xi, xj) * t.grad(xj)).transpose();
        }
    const Matrix K = gram(k, X);
    const Matrix A = (1.0 - nu) * K * w.asDiagonal() + nu * Matrix::Identity(n, n);
    const Matrix c = A.inverse() * g;
    double cross = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) cross += w(j) * c.row(j).dot(g.row(j));
    return (ksd2(k, t, X, w) - (1.0 - nu) * cross) / nu;
}

// Self-interaction coefficient written index by index.
inline double c_star_loops(const Kernel& k, const Target& t, const Matrix& X, double nu) {
    const Eigen::Index n = X.rows();
    const auto N = static_cast<double>(n);
    const Matrix Kn = resolvent_inverse(gram(k, X), nu);
    auto x = [&](Eigen::Index i) -> Vector { return X.row(i).transpose(); };
    auto psi = [&](Eigen::Index a, Eigen::Index b) -> Vector {
        return k.grad2(x(a), x(b)) - k.value(x(a), x(b)) * t.grad(x(b));
    };

    double s1 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            s1 += Kn(i, j) * (k.laplacian2(x(j), x(i)) - k.grad1(x(i), x(j)).dot(t.grad(x(i))) -
                              k.value(x(j), x(i)) * t.laplacian(x(i)));

    double s2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index l = 0; l < n; ++l)
                s2 += k.value(x(i), x(l)) * Kn(l, i) *
                      (k.cross_div(x(i), x(j)) - k.grad1(x(i), x(j)).dot(t.grad(x(j))));

    double s3 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index kk = 0; kk < n; ++kk)
                for (Eigen::Index l = 0; l < n; ++l)
                    s3 += Kn(i, j) * Kn(i, kk) * k.grad1(x(i), x(j)).dot(psi(kk, l));

    double s4 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index kk = 0; kk < n; ++kk)
                for (Eigen::Index l = 0; l < n; ++l)
                    for (Eigen::Index r = 0; r < n; ++r)
                        s4 += Kn(r, i) * Kn(j, kk) * k.value(x(i), x(r)) * k.grad1(x(i), x(j)).dot(psi(kk, l));

    return -s1 / N + (1.0 - nu) / nu / (N * N) * s2 + (1.0 - nu) / (N * N) * s3 -
           (1.0 - nu) * (1.0 - nu) / nu / (N * N * N) * s4;
}

// Preconditioned drift phi = (((1-nu)/N) K + nu I)^{-1} F of every particle.
inline Matrix drift(const Kernel& k, const Target& t, const Matrix& X, double nu) {
    return resolvent_inverse(gram(k, X), nu) * stein_force(k, t, X);
}

// The same drift extended to a free point z with the particles held fixed:
// phi(z) = (F(z) - ((1-nu)/N) sum_j k(z,x^j) phi_j) / nu.
inline Vector drift_at(const Kernel& k, const Target& t, const Matrix& X, const Matrix& phi, double nu,
                       const Vector& z) {
    const Eigen::Index n = X.rows();
    const auto N = static_cast<double>(n);
    Vector F = Vector::Zero(z.size());
    Vector S = Vector::Zero(z.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        const Vector xj = X.row(j).transpose();
        F += k.value(z, xj) * t.grad(xj) - k.grad2(z, xj);
        S += k.value(z, xj) * phi.row(j).transpose();
    }
    return (F / N - (1.0 - nu) / N * S) / nu;
}

// Self-interaction from its meaning: the divergence of each particle's drift in
// its own coordinates minus the divergence of the frozen-particle drift field,
// summed over particles.
inline double c_star_definition(const Kernel& k, const Target& t, const Matrix& X, double nu, double eps = 1e-5) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const Matrix phi = drift(k, t, X, nu);
    double total = 0.0;
    double frozen = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index a = 0; a < d; ++a) {
            Matrix Xp = X, Xm = X;
            Xp(i, a) += eps;
            Xm(i, a) -= eps;
            total += (drift(k, t, Xp, nu)(i, a) - drift(k, t, Xm, nu)(i, a)) / (2 * eps);
            Vector zp = X.row(i).transpose(), zm = zp;
            zp(a) += eps;
            zm(a) -= eps;
            frozen += (drift_at(k, t, X, phi, nu, zp)(a) - drift_at(k, t, X, phi, nu, zm)(a)) / (2 * eps);
        }
    }
    return total - frozen;
}

}  // namespace oracle
