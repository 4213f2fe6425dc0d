#include "rsvgd/targets.hpp"

#include <algorithm>
#include <cmath>

#include "rsvgd/error.hpp"
#include "rsvgd/log.hpp"

namespace rsvgd {
namespace {

void check_spd(const Matrix& cov, Eigen::Index d, const char* what) {
    if (cov.rows() != d || cov.cols() != d) {
        throw ConfigError(strprintf("%s must be %ldx%ld", what, static_cast<long>(d), static_cast<long>(d)));
    }
    if (!cov.allFinite()) throw ConfigError(std::string(what) + " has non-finite entries");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + cov.cwiseAbs().maxCoeff())) {
        throw ConfigError(std::string(what) + " is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
        throw ConfigError(std::string(what) + " is not symmetric positive definite");
    }
}

}  // namespace

std::string to_string(TargetFamily family) {
    return family == TargetFamily::gaussian ? "gaussian" : "gaussian_mixture";
}

Target Target::gaussian(const Vector& mean, const Matrix& covariance, double v_offset) {
    Target t = mixture({mean}, {covariance}, {1.0}, v_offset);
    t.family_ = TargetFamily::gaussian;
    return t;
}

Target Target::mixture(const std::vector<Vector>& means, const std::vector<Matrix>& covariances,
                       const std::vector<double>& weights, double v_offset) {
    if (means.empty()) throw ConfigError("target needs at least one mean");
    const Eigen::Index d = means.front().size();
    if (d < 1) throw ConfigError("target dimension must be positive");
    if (covariances.size() != means.size() && covariances.size() != 1) {
        throw ConfigError("target needs one covariance per component or a single shared covariance");
    }
    if (weights.size() != means.size()) throw ConfigError("target needs one weight per component");
    if (!(std::isfinite(v_offset) && v_offset > 0.0)) {
        throw ConfigError("v_offset must be positive so that inf V > 0");
    }

    Target t;
    t.family_ = means.size() == 1 ? TargetFamily::gaussian : TargetFamily::gaussian_mixture;
    t.means_.resize(static_cast<Eigen::Index>(means.size()), d);
    for (std::size_t k = 0; k < means.size(); ++k) {
        if (means[k].size() != d) throw ConfigError("target means have inconsistent dimensions");
        if (!means[k].allFinite()) throw ConfigError("target mean has non-finite entries");
        t.means_.row(static_cast<Eigen::Index>(k)) = means[k].transpose();
    }
    for (std::size_t k = 0; k < covariances.size(); ++k) check_spd(covariances[k], d, "target covariance");
    for (std::size_t k = 1; k < covariances.size(); ++k) {
        if ((covariances[k] - covariances[0]).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + covariances[0].cwiseAbs().maxCoeff())) {
            throw ConfigError(
                "mixture components must share one covariance: unequal covariances give an unbounded Hessian");
        }
    }

    double wsum = 0.0;
    for (double w : weights) {
        if (!(std::isfinite(w) && w > 0.0)) throw ConfigError("mixture weights must be positive");
        wsum += w;
    }
    t.weights_.resize(static_cast<Eigen::Index>(weights.size()));
    for (std::size_t k = 0; k < weights.size(); ++k) t.weights_(static_cast<Eigen::Index>(k)) = weights[k] / wsum;
    t.log_weights_ = t.weights_.array().log();

    t.covariance_ = covariances.front();
    t.precision_ = t.covariance_.inverse();
    t.precision_ = 0.5 * (t.precision_ + t.precision_.transpose()).eval();
    t.cov_cholesky_ = t.covariance_.llt().matrixL();
    Eigen::SelfAdjointEigenSolver<Matrix> es(t.covariance_, Eigen::EigenvaluesOnly);
    t.cov_lambda_max_ = es.eigenvalues().maxCoeff();
    t.lambda_max_ = 1.0 / es.eigenvalues().minCoeff();
    t.v_offset_ = v_offset;

    double sep = 0.0;
    for (Eigen::Index a = 0; a < t.means_.rows(); ++a) {
        for (Eigen::Index b = a + 1; b < t.means_.rows(); ++b) {
            sep = std::max(sep, (t.means_.row(a) - t.means_.row(b)).norm());
        }
    }
    t.separation_ = sep;
    return t;
}

void Target::check_point(const VectorRef& x) const {
    if (x.size() != dim()) {
        throw InputError(strprintf("point has dimension %ld, target has %ld", static_cast<long>(x.size()),
                                   static_cast<long>(dim())));
    }
    if (!x.allFinite()) throw InputError("target evaluated at non-finite point");
}

double Target::responsibilities(const VectorRef& x, Vector& r) const {
    const Eigen::Index m = components();
    r.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const Vector diff = x - means_.row(k).transpose();
        r(k) = log_weights_(k) - 0.5 * diff.dot(precision_ * diff);
    }
    const double mx = r.maxCoeff();
    double total = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        r(k) = std::exp(r(k) - mx);
        total += r(k);
    }
    r /= total;
    return mx + std::log(total);
}

double Target::potential(const VectorRef& x) const {
    check_point(x);
    Vector r;
    return -responsibilities(x, r) + v_offset_;
}

Vector Target::grad(const VectorRef& x) const {
    check_point(x);
    if (components() == 1) return precision_ * (x - means_.row(0).transpose());
    Vector r;
    responsibilities(x, r);
    const Vector mbar = means_.transpose() * r;
    return precision_ * (x - mbar);
}

Matrix Target::hessian(const VectorRef& x) const {
    check_point(x);
    if (components() == 1) return precision_;
    Vector r;
    responsibilities(x, r);
    const Vector mbar = means_.transpose() * r;
    Matrix cov = Matrix::Zero(dim(), dim());
    for (Eigen::Index k = 0; k < components(); ++k) {
        const Vector c = means_.row(k).transpose() - mbar;
        cov.noalias() += r(k) * c * c.transpose();
    }
    return precision_ - precision_ * cov * precision_;
}

double Target::laplacian(const VectorRef& x) const { return hessian(x).trace(); }

Vector Target::potential_rows(const Matrix& X) const {
    Vector out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = potential(X.row(i).transpose());
    return out;
}

Matrix Target::grad_rows(const Matrix& X) const {
    if (X.cols() != dim()) throw InputError("particle dimension does not match target");
    if (components() == 1) {
        Matrix centred = X.rowwise() - means_.row(0);
        return centred * precision_;  // P symmetric
    }
    Matrix G(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) G.row(i) = grad(X.row(i).transpose()).transpose();
    return G;
}

Vector Target::laplacian_rows(const Matrix& X) const {
    if (X.cols() != dim()) throw InputError("particle dimension does not match target");
    if (components() == 1) return Vector::Constant(X.rows(), precision_.trace());
    Vector out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = laplacian(X.row(i).transpose());
    return out;
}

Matrix Target::sample(Eigen::Index n, std::mt19937_64& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix out(n, dim());
    Vector z(dim());
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index comp = 0;
        if (components() > 1) {
            double u = unif(rng);
            while (comp + 1 < components() && u > weights_(comp)) {
                u -= weights_(comp);
                ++comp;
            }
        }
        for (Eigen::Index a = 0; a < dim(); ++a) z(a) = normal(rng);
        out.row(i) = means_.row(comp) + (cov_cholesky_ * z).transpose();
    }
    return out;
}

TargetConstants derive_constants(const Target& target, const Kernel& kernel, const CStarGridOptions& grid) {
    const Eigen::Index d = target.dim();
    const double lam = target.precision_lambda_max();
    const double sep = target.max_mean_separation();

    TargetConstants c;
    c.C_V = lam + sep * sep * lam * lam / 4.0;
    c.alpha = 0.5;
    c.A = std::sqrt(2.0 * lam) + lam * sep / std::sqrt(target.v_offset());
    c.v_offset = target.v_offset();
    c.c_star_margin = grid.margin;
    if (target.components() == 1) c.C_pi = target.covariance_lambda_max();

    // Box: component means +- half_width standard deviations along the widest axis.
    const double half = grid.half_width_sds * std::sqrt(target.covariance_lambda_max());
    const Vector lo = target.means().colwise().minCoeff().transpose().array() - half;
    const Vector hi = target.means().colwise().maxCoeff().transpose().array() + half;

    const double lap_k = kernel.diag_laplacian2(d);
    const double k0 = kernel.diag_value();
    // The diagonal grad1 k(z,z) vanishes for translation-invariant kernels.
    auto diag_term = [&](const Vector& z) {
        return std::abs(lap_k - k0 * target.laplacian(z)) / static_cast<double>(d);
    };

    double sup = 0.0;
    double cv_emp = 0.0;
    const std::size_t hess_every = std::max<std::size_t>(1, grid.points / 2000);
    std::size_t visited = 0;
    auto visit = [&](const Vector& z) {
        sup = std::max(sup, diag_term(z));
        if (visited % hess_every == 0) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(target.hessian(z), Eigen::EigenvaluesOnly);
            cv_emp = std::max(cv_emp, es.eigenvalues().cwiseAbs().maxCoeff());
        }
        ++visited;
    };

    if (d <= 3) {
        const auto per_axis = static_cast<std::size_t>(
            std::max(2.0, std::floor(std::pow(static_cast<double>(grid.points), 1.0 / static_cast<double>(d)) + 1e-9)));
        std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
        Vector z(d);
        std::size_t total = 1;
        for (Eigen::Index a = 0; a < d; ++a) total *= per_axis;
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t rem = flat;
            for (Eigen::Index a = 0; a < d; ++a) {
                const std::size_t ia = rem % per_axis;
                rem /= per_axis;
                z(a) = lo(a) + (hi(a) - lo(a)) * static_cast<double>(ia) / static_cast<double>(per_axis - 1);
            }
            visit(z);
        }
        c.c_star_grid = strprintf("tensor grid %zu^%ld on box [%g,%g]^d", per_axis, static_cast<long>(d),
                                  lo.minCoeff(), hi.maxCoeff());
    } else {
        std::mt19937_64 rng(grid.seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Vector z(d);
        for (std::size_t p = 0; p < grid.points; ++p) {
            for (Eigen::Index a = 0; a < d; ++a) z(a) = lo(a) + (hi(a) - lo(a)) * unif(rng);
            visit(z);
        }
        c.c_star_grid = strprintf("%zu uniform random points (seed %llu) on box [%g,%g]^d", grid.points,
                                  static_cast<unsigned long long>(grid.seed), lo.minCoeff(), hi.maxCoeff());
    }
    c.c_star_raw = sup;
    c.c_star = sup * grid.margin;
    c.C_V_empirical = cv_emp;
    log_info(strprintf("c* grid sup %.6g (margin %.3g) over %s; C_V analytic %.6g, empirical %.6g", sup,
                       grid.margin, c.c_star_grid.c_str(), c.C_V, cv_emp));
    return c;
}

}  // namespace rsvgd
