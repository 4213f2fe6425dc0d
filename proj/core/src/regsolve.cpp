#include "rsvgd/regsolve.hpp"

#include <cmath>

#include "rsvgd/error.hpp"
#include "rsvgd/log.hpp"

namespace rsvgd {

Matrix build_gram(const Kernel& kernel, const Matrix& particles) {
    const Eigen::Index n = particles.rows();
    if (n < 1) throw InputError("Gram matrix needs at least one particle");
    const Matrix Xt = particles.transpose();
    Matrix K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!Xt.col(i).allFinite()) {
            throw NumericalError(strprintf("non-finite Gram entry at (%ld, %ld): particle %ld is not finite",
                                           static_cast<long>(i), static_cast<long>(i), static_cast<long>(i)));
        }
        K(i, i) = kernel.profile(0.0).f;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = kernel.profile((Xt.col(i) - Xt.col(j)).squaredNorm()).f;
            if (!std::isfinite(v)) {
                throw NumericalError(strprintf("non-finite Gram entry at (%ld, %ld)", static_cast<long>(i),
                                               static_cast<long>(j)));
            }
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    if (!K.diagonal().allFinite()) throw NumericalError("non-finite Gram diagonal");
    return K;
}

GramSystem::GramSystem(Matrix K, double nu)
    : K_(std::move(K)), nu_(nu), uniform_(true) {
    if (K_.rows() != K_.cols() || K_.rows() < 1) throw InputError("Gram matrix must be square and nonempty");
    w_ = Vector::Constant(K_.rows(), 1.0 / static_cast<double>(K_.rows()));
    factor();
}

GramSystem::GramSystem(Matrix K, Vector weights, double nu)
    : K_(std::move(K)), w_(std::move(weights)), nu_(nu), uniform_(false) {
    if (K_.rows() != K_.cols() || K_.rows() < 1) throw InputError("Gram matrix must be square and nonempty");
    if (w_.size() != K_.rows()) throw InputError("weight vector length does not match Gram matrix");
    if ((w_.array() < 0.0).any() || !w_.allFinite()) throw InputError("weights must be nonnegative and finite");
    factor();
}

GramSystem GramSystem::build(const Kernel& kernel, const Matrix& particles, double nu) {
    return GramSystem(build_gram(kernel, particles), nu);
}

GramSystem GramSystem::build(const Kernel& kernel, const WeightedEmpiricalMeasure& measure, double nu) {
    measure.validate();
    return GramSystem(build_gram(kernel, measure.positions), measure.weights, nu);
}

void GramSystem::factor() {
    if (!(nu_ > 0.0 && nu_ <= 1.0)) throw InputError(strprintf("nu must lie in (0, 1], got %g", nu_));
    if (nu_ == 1.0) return;
    const Eigen::Index n = K_.rows();
    if (uniform_) {
        Matrix A = ((1.0 - nu_) / static_cast<double>(n)) * K_;
        A.diagonal().array() += nu_;
        auto llt = std::make_shared<Eigen::LLT<Matrix>>(A);
        double jitter = 1e-12;
        while (llt->info() != Eigen::Success) {
            if (jitter > 1e-6 * (1.0 + 1e-9)) {
                throw NumericalError("Cholesky factorization failed after jitter escalation to 1e-6");
            }
            Matrix Aj = A;
            Aj.diagonal().array() += jitter;
            llt = std::make_shared<Eigen::LLT<Matrix>>(Aj);
            jitter_ = jitter;
            log_warning(strprintf("resolvent Cholesky needed jitter %g (N=%ld, nu=%g)", jitter, static_cast<long>(n), nu_));
            jitter *= 10.0;
        }
        llt_ = std::move(llt);
    } else {
        Matrix A = (1.0 - nu_) * (K_ * w_.asDiagonal());
        A.diagonal().array() += nu_;
        lu_ = std::make_shared<Eigen::PartialPivLU<Matrix>>(A);
    }
}

Matrix GramSystem::apply(const Matrix& x) const {
    if (x.rows() != K_.rows()) throw InputError("operand row count does not match Gram system");
    if (uniform_) return ((1.0 - nu_) / static_cast<double>(K_.rows())) * (K_ * x) + nu_ * x;
    return (1.0 - nu_) * (K_ * (w_.asDiagonal() * x)) + nu_ * x;
}

Matrix GramSystem::solve(const Matrix& rhs) const {
    if (rhs.rows() != K_.rows()) throw InputError("right-hand side row count does not match Gram system");
    if (!rhs.allFinite()) throw InputError("right-hand side has non-finite entries");
    if (nu_ == 1.0) return rhs;
    Matrix out = uniform_ ? Matrix(llt_->solve(rhs)) : Matrix(lu_->solve(rhs));
    if (!out.allFinite()) throw NumericalError("resolvent solve produced non-finite values");
    return out;
}

Matrix solve_regularized(const GramSystem& sys, const Matrix& rhs) { return sys.solve(rhs); }

Spectrum spectral_decomposition(const GramSystem& sys) {
    const Vector sw = sys.weights().array().sqrt();
    const Matrix M = sw.asDiagonal() * sys.K() * sw.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
    Spectrum s;
    s.eigenvalues = es.eigenvalues();
    s.eigenvectors = es.eigenvectors();
    for (Eigen::Index m = 0; m < s.eigenvalues.size(); ++m) {
        if (s.eigenvalues(m) < 0.0) {
            s.clipped += -s.eigenvalues(m);
            s.eigenvalues(m) = 0.0;
        }
    }
    if (s.clipped > 0.0) log_debug(strprintf("spectral clip removed %.3e of negative eigenvalue mass", s.clipped));
    return s;
}

}  // namespace rsvgd
