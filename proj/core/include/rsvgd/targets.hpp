#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rsvgd/kernels.hpp"
#include "rsvgd/types.hpp"

namespace rsvgd {

enum class TargetFamily { gaussian, gaussian_mixture };

std::string to_string(TargetFamily family);

// Gaussian or finite gaussian mixture with a shared covariance, stored as
//   V(x) = -log sum_k w_k exp(-(x - m_k)^T P (x - m_k) / 2) + v_offset,  P = Sigma^{-1}.
// With one component this is the quadratic potential (x - m)^T P (x - m) / 2 + v_offset.
// v_offset > 0 keeps inf V > 0.
class Target {
public:
    static Target gaussian(const Vector& mean, const Matrix& covariance, double v_offset = 1.0);
    static Target mixture(const std::vector<Vector>& means, const std::vector<Matrix>& covariances,
                          const std::vector<double>& weights, double v_offset = 1.0);

    TargetFamily family() const { return family_; }
    Eigen::Index dim() const { return precision_.rows(); }
    Eigen::Index components() const { return means_.rows(); }
    const Matrix& means() const { return means_; }  // components x d
    const Vector& weights() const { return weights_; }
    const Matrix& covariance() const { return covariance_; }
    const Matrix& precision() const { return precision_; }
    double v_offset() const { return v_offset_; }
    double precision_lambda_max() const { return lambda_max_; }
    double covariance_lambda_max() const { return cov_lambda_max_; }
    double max_mean_separation() const { return separation_; }

    double potential(const VectorRef& x) const;
    Vector grad(const VectorRef& x) const;
    Matrix hessian(const VectorRef& x) const;
    double laplacian(const VectorRef& x) const;

    // Row-wise evaluations over a particle matrix (rows are points).
    Vector potential_rows(const Matrix& X) const;
    Matrix grad_rows(const Matrix& X) const;
    Vector laplacian_rows(const Matrix& X) const;

    Matrix sample(Eigen::Index n, std::mt19937_64& rng) const;

private:
    Target() = default;
    void check_point(const VectorRef& x) const;
    // component responsibilities and the log-sum-exp value at x
    double responsibilities(const VectorRef& x, Vector& r) const;

    TargetFamily family_ = TargetFamily::gaussian;
    Matrix means_;
    Vector weights_;
    Vector log_weights_;
    Matrix covariance_;
    Matrix precision_;
    Matrix cov_cholesky_;
    double v_offset_ = 1.0;
    double lambda_max_ = 0.0;
    double cov_lambda_max_ = 0.0;
    double separation_ = 0.0;
};

struct CStarGridOptions {
    std::size_t points = 100000;
    double half_width_sds = 10.0;
    double margin = 1.05;
    std::uint64_t seed = 0x5eed;
};

struct TargetConstants {
    double C_V = 0.0;            // analytic Hessian operator-norm bound
    double C_V_empirical = 0.0;  // max observed on the c* grid (sanity)
    double A = 0.0;
    double alpha = 0.5;
    double c_star_raw = 0.0;     // grid sup
    double c_star = 0.0;         // grid sup times margin
    double c_star_margin = 1.05;
    std::string c_star_grid;     // description of the grid used
    std::optional<double> C_pi;
    double v_offset = 0.0;
};

// Constants of the target (and, for c*, of the target-kernel pair).
TargetConstants derive_constants(const Target& target, const Kernel& kernel,
                                 const CStarGridOptions& grid = {});

}  // namespace rsvgd
