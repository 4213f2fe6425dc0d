#pragma once

#include <string>

#include "rsvgd/types.hpp"

namespace rsvgd {

enum class KernelFamily { gaussian_rbf, imq, rational_quadratic };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

// Radial profile f and its first two derivatives in s = |x - y|^2.
struct RadialProfile {
    double f;
    double df;
    double d2f;
};

// Translation-invariant radial kernel k(x, y) = f(|x - y|^2).
//
//   gaussian_rbf:       f(s) = exp(-s / (2 l^2))
//   imq:                f(s) = (l^2 + s)^(-beta)             (l plays the role of c)
//   rational_quadratic: f(s) = (1 + s / (2 alpha l^2))^(-alpha)
//
// The bound B dominates |k| and every first and second partial derivative.
class Kernel {
public:
    static Kernel gaussian_rbf(double lengthscale);
    static Kernel imq(double c, double beta = 0.5);
    static Kernel rational_quadratic(double lengthscale, double alpha);

    KernelFamily family() const { return family_; }
    double lengthscale() const { return lengthscale_; }
    double beta() const { return beta_; }
    double alpha_rq() const { return alpha_; }
    double bound() const { return bound_; }

    RadialProfile profile(double s) const;

    double value(const VectorRef& x, const VectorRef& y) const;
    Vector grad1(const VectorRef& x, const VectorRef& y) const;
    Vector grad2(const VectorRef& x, const VectorRef& y) const;
    // trace of d^2 k / dx dy
    double cross_div(const VectorRef& x, const VectorRef& y) const;
    // Laplacian in the second argument
    double laplacian2(const VectorRef& x, const VectorRef& y) const;
    // d^2 k / dx_a dx_b; equals d^2 k / dy_a dy_b for radial kernels
    Matrix hessian11(const VectorRef& x, const VectorRef& y) const;
    // d^2 k / dx_a dy_b
    Matrix hessian12(const VectorRef& x, const VectorRef& y) const;

    // Closed-form coincidence values k(x,x), div1.div2 k(x,x), Lap2 k(x,x).
    double diag_value() const { return profile(0.0).f; }
    double diag_cross_div(Eigen::Index d) const;
    double diag_laplacian2(Eigen::Index d) const;

private:
    Kernel(KernelFamily family, double lengthscale, double beta, double alpha);
    void check_pair(const VectorRef& x, const VectorRef& y) const;

    KernelFamily family_;
    double lengthscale_;
    double beta_;
    double alpha_;
    double bound_;
    // cached profile constants
    double c2_;
    double inv_scale_;
};

// Median of pairwise Euclidean distances between rows; 1 when fewer than two
// distinct particles exist.
double median_pairwise_distance(const Matrix& particles);

}  // namespace rsvgd
