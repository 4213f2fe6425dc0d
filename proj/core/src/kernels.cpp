#include "rsvgd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rsvgd/error.hpp"
#include "rsvgd/log.hpp"

namespace rsvgd {
namespace {

void require_positive(double v, const char* what) {
    if (!(std::isfinite(v) && v > 0.0)) {
        throw InputError(std::string("kernel parameter ") + what + " must be positive and finite");
    }
}

// sup of |k| and every first and second partial for f(s) = (c^2 + s)^(-beta).
double imq_bound(double c, double beta) {
    const double c2 = c * c;
    const double value_max = std::pow(c2, -beta);
    const double t2 = c2 / (2.0 * beta + 1.0);
    const double grad_max = 2.0 * beta * std::sqrt(t2) * std::pow(c2 + t2, -beta - 1.0);
    const double hess_at_zero = 2.0 * beta * std::pow(c2, -beta - 1.0);
    // positive lobe of the diagonal second partial, maximised at v = u / c^2
    const double v = 2.0 * (beta + 2.0) / (2.0 * beta + 1.0);
    const double lobe = std::pow(v, -beta - 2.0) *
                        (2.0 * beta * (2.0 * beta + 1.0) * v - 4.0 * beta * (beta + 1.0)) *
                        std::pow(c2, -beta - 1.0);
    return std::max({value_max, grad_max, hess_at_zero, lobe});
}

}  // namespace

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::gaussian_rbf: return "gaussian_rbf";
        case KernelFamily::imq: return "imq";
        case KernelFamily::rational_quadratic: return "rational_quadratic";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "gaussian_rbf" || name == "rbf") return KernelFamily::gaussian_rbf;
    if (name == "imq") return KernelFamily::imq;
    if (name == "rational_quadratic" || name == "rq") return KernelFamily::rational_quadratic;
    throw ConfigError("unknown kernel family '" + name + "'");
}

Kernel::Kernel(KernelFamily family, double lengthscale, double beta, double alpha)
    : family_(family), lengthscale_(lengthscale), beta_(beta), alpha_(alpha) {
    require_positive(lengthscale, "lengthscale");
    switch (family) {
        case KernelFamily::gaussian_rbf: {
            const double l = lengthscale;
            c2_ = 0.0;
            inv_scale_ = 1.0 / (2.0 * l * l);
            bound_ = std::max({1.0, std::exp(-0.5) / l, 1.0 / (l * l)});
            break;
        }
        case KernelFamily::imq:
            require_positive(beta, "beta");
            c2_ = lengthscale * lengthscale;
            inv_scale_ = 1.0;
            bound_ = imq_bound(lengthscale, beta);
            break;
        case KernelFamily::rational_quadratic: {
            require_positive(alpha, "alpha_rq");
            const double c2 = 2.0 * alpha * lengthscale * lengthscale;
            c2_ = 1.0;
            inv_scale_ = 1.0 / c2;
            // an imq with c^2 = 2 alpha l^2 and beta = alpha, rescaled by c^(2 alpha)
            bound_ = std::pow(c2, alpha) * imq_bound(std::sqrt(c2), alpha);
            break;
        }
    }
}

Kernel Kernel::gaussian_rbf(double lengthscale) {
    return Kernel(KernelFamily::gaussian_rbf, lengthscale, 0.0, 0.0);
}

Kernel Kernel::imq(double c, double beta) { return Kernel(KernelFamily::imq, c, beta, 0.0); }

Kernel Kernel::rational_quadratic(double lengthscale, double alpha) {
    return Kernel(KernelFamily::rational_quadratic, lengthscale, 0.0, alpha);
}

RadialProfile Kernel::profile(double s) const {
    switch (family_) {
        case KernelFamily::gaussian_rbf: {
            const double f = std::exp(-s * inv_scale_);
            return {f, -inv_scale_ * f, inv_scale_ * inv_scale_ * f};
        }
        case KernelFamily::imq: {
            const double u = c2_ + s;
            const double f = std::pow(u, -beta_);
            return {f, -beta_ * f / u, beta_ * (beta_ + 1.0) * f / (u * u)};
        }
        case KernelFamily::rational_quadratic: {
            const double u = 1.0 + s * inv_scale_;
            const double f = std::pow(u, -alpha_);
            const double g = inv_scale_ / u;
            return {f, -alpha_ * g * f, alpha_ * (alpha_ + 1.0) * g * g * f};
        }
    }
    return {0.0, 0.0, 0.0};
}

void Kernel::check_pair(const VectorRef& x, const VectorRef& y) const {
    if (x.size() != y.size()) {
        throw InputError(strprintf("kernel arguments have dimensions %ld and %ld", static_cast<long>(x.size()), static_cast<long>(y.size())));
    }
    if (!x.allFinite() || !y.allFinite()) throw InputError("kernel evaluated at non-finite point");
}

double Kernel::value(const VectorRef& x, const VectorRef& y) const {
    check_pair(x, y);
    return profile((x - y).squaredNorm()).f;
}

Vector Kernel::grad1(const VectorRef& x, const VectorRef& y) const {
    check_pair(x, y);
    const Vector r = x - y;
    return 2.0 * profile(r.squaredNorm()).df * r;
}

Vector Kernel::grad2(const VectorRef& x, const VectorRef& y) const {
    check_pair(x, y);
    const Vector r = x - y;
    return -2.0 * profile(r.squaredNorm()).df * r;
}

double Kernel::cross_div(const VectorRef& x, const VectorRef& y) const {
    check_pair(x, y);
    const double s = (x - y).squaredNorm();
    const RadialProfile p = profile(s);
    return -(2.0 * static_cast<double>(x.size()) * p.df + 4.0 * p.d2f * s);
}

double Kernel::laplacian2(const VectorRef& x, const VectorRef& y) const {
    check_pair(x, y);
    const double s = (x - y).squaredNorm();
    const RadialProfile p = profile(s);
    return 2.0 * static_cast<double>(x.size()) * p.df + 4.0 * p.d2f * s;
}

Matrix Kernel::hessian11(const VectorRef& x, const VectorRef& y) const {
    check_pair(x, y);
    const Vector r = x - y;
    const RadialProfile p = profile(r.squaredNorm());
    Matrix h = 4.0 * p.d2f * (r * r.transpose());
    h.diagonal().array() += 2.0 * p.df;
    return h;
}

Matrix Kernel::hessian12(const VectorRef& x, const VectorRef& y) const { return -hessian11(x, y); }

double Kernel::diag_cross_div(Eigen::Index d) const {
    return -2.0 * static_cast<double>(d) * profile(0.0).df;
}

double Kernel::diag_laplacian2(Eigen::Index d) const {
    return 2.0 * static_cast<double>(d) * profile(0.0).df;
}

double median_pairwise_distance(const Matrix& particles) {
    const Eigen::Index n = particles.rows();
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            dist.push_back((particles.row(i) - particles.row(j)).norm());
        }
    }
    if (dist.empty()) return 1.0;
    const std::size_t m = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(m), dist.end());
    double med = dist[m];
    if (dist.size() % 2 == 0) {
        const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(m));
        med = 0.5 * (med + lower);
    }
    return med > 0.0 ? med : 1.0;
}

}  // namespace rsvgd
