#pragma once

#include <memory>

#include "rsvgd/kernels.hpp"
#include "rsvgd/types.hpp"

namespace rsvgd {

// Gram matrix with K_ij = k(x^i, x^j). Throws NumericalError naming the first
// non-finite entry.
Matrix build_gram(const Kernel& kernel, const Matrix& particles);

// The resolvent system (1 - nu) K diag(w) + nu I. With uniform weights this is
// ((1 - nu) / N) K + nu I, factored by Cholesky (jitter escalation 1e-12 .. 1e-6
// if the factorization fails); weighted systems use partial-pivot LU.
class GramSystem {
public:
    GramSystem(Matrix K, double nu);
    GramSystem(Matrix K, Vector weights, double nu);

    static GramSystem build(const Kernel& kernel, const Matrix& particles, double nu);
    static GramSystem build(const Kernel& kernel, const WeightedEmpiricalMeasure& measure, double nu);

    const Matrix& K() const { return K_; }
    const Vector& weights() const { return w_; }
    double nu() const { return nu_; }
    bool uniform() const { return uniform_; }
    Eigen::Index size() const { return K_.rows(); }
    double jitter() const { return jitter_; }

    // Forward operator applied to an N x d matrix.
    Matrix apply(const Matrix& x) const;
    // Solves operator * X = rhs. At nu = 1 the rhs is returned unchanged.
    Matrix solve(const Matrix& rhs) const;

private:
    void factor();

    Matrix K_;
    Vector w_;
    double nu_;
    bool uniform_;
    double jitter_ = 0.0;
    std::shared_ptr<const Eigen::LLT<Matrix>> llt_;
    std::shared_ptr<const Eigen::PartialPivLU<Matrix>> lu_;
};

Matrix solve_regularized(const GramSystem& sys, const Matrix& rhs);

// Eigenpairs of diag(sqrt w) K diag(sqrt w) (K / N for uniform weights),
// eigenvalues ascending and clipped at zero.
struct Spectrum {
    Vector eigenvalues;
    Matrix eigenvectors;
    double clipped = 0.0;  // total magnitude removed by clipping
};

Spectrum spectral_decomposition(const GramSystem& sys);

}  // namespace rsvgd
