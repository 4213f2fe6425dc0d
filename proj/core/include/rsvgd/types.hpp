#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace rsvgd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;
using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;

// Particle configuration. Rows of `positions` are particles.
struct ParticleState {
    Matrix positions;
    std::size_t step = 0;
    double time = 0.0;
    std::uint64_t seed = 0;

    Eigen::Index size() const { return positions.rows(); }
    Eigen::Index dim() const { return positions.cols(); }
};

// Particles with simplex weights; the carrier for annealed measures.
struct WeightedEmpiricalMeasure {
    Matrix positions;
    Vector weights;

    static WeightedEmpiricalMeasure uniform(const Matrix& positions);

    Eigen::Index size() const { return positions.rows(); }
    Eigen::Index dim() const { return positions.cols(); }
    bool is_uniform() const;

    // Throws InputError unless weights are a nonnegative simplex vector
    // (sum within 1e-12) and all positions are finite.
    void validate() const;
};

}  // namespace rsvgd
