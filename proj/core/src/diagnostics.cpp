#include "rsvgd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "rsvgd/error.hpp"
#include "rsvgd/log.hpp"
#include "rsvgd/regsolve.hpp"

namespace rsvgd {
namespace {

void check_nu(double nu) {
    if (!(nu > 0.0 && nu <= 1.0)) throw InputError(strprintf("nu must lie in (0, 1], got %g", nu));
}

void check_measure(const Target& target, const WeightedEmpiricalMeasure& m) {
    m.validate();
    if (m.dim() != target.dim()) throw InputError("measure dimension does not match target");
}

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericalError(std::string(what) + " is not finite");
}

// One pass over pairs: Gram matrix, weighted Stein force h and the KSD^2 double sum.
struct SteinPass {
    Matrix K;
    Matrix h;  // N x d
    Matrix G;  // grad V rows
    double ksd2 = 0.0;
};

SteinPass stein_pass(const Kernel& kernel, const Target& target, const Matrix& X, const Vector& w) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const auto dd = static_cast<double>(d);
    SteinPass out;
    out.G = target.grad_rows(X);
    const Matrix Xt = X.transpose();
    const Matrix Gt = out.G.transpose();
    Matrix ht = Matrix::Zero(d, n);
    out.K.resize(n, n);
    const RadialProfile p0 = kernel.profile(0.0);
    double ksd = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* xi = Xt.col(i).data();
        const double* gi = Gt.col(i).data();
        double* hi = ht.col(i).data();
        out.K(i, i) = p0.f;
        const double gii = Gt.col(i).squaredNorm();
        for (Eigen::Index a = 0; a < d; ++a) hi[a] += w(i) * p0.f * gi[a];
        ksd += w(i) * w(i) * (p0.f * gii - 2.0 * dd * p0.df);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double* xj = Xt.col(j).data();
            const double* gj = Gt.col(j).data();
            double* hj = ht.col(j).data();
            double s = 0.0;
            double rgi = 0.0;
            double rgj = 0.0;
            double gij = 0.0;
            for (Eigen::Index a = 0; a < d; ++a) {
                const double r = xi[a] - xj[a];
                s += r * r;
                rgi += r * gi[a];
                rgj += r * gj[a];
                gij += gi[a] * gj[a];
            }
            const RadialProfile p = kernel.profile(s);
            out.K(i, j) = p.f;
            out.K(j, i) = p.f;
            const double two_df = 2.0 * p.df;
            for (Eigen::Index a = 0; a < d; ++a) {
                const double r = xi[a] - xj[a];
                hi[a] += w(j) * (p.f * gj[a] + two_df * r);
                hj[a] += w(i) * (p.f * gi[a] - two_df * r);
            }
            const double kappa = p.f * gij + two_df * (rgi - rgj) - 2.0 * dd * p.df - 4.0 * p.d2f * s;
            ksd += 2.0 * w(i) * w(j) * kappa;
        }
    }
    out.h = ht.transpose();
    out.ksd2 = ksd;
    return out;
}

}  // namespace

double ksd_squared(const Kernel& kernel, const Target& target, const WeightedEmpiricalMeasure& measure) {
    check_measure(target, measure);
    const double v = stein_pass(kernel, target, measure.positions, measure.weights).ksd2;
    check_finite(v, "KSD^2");
    return v;
}

double reg_stein_fisher_linear(const Kernel& kernel, const Target& target, const WeightedEmpiricalMeasure& measure,
                               double nu) {
    check_nu(nu);
    check_measure(target, measure);
    const Matrix& X = measure.positions;
    const Vector& w = measure.weights;
    SteinPass pass = stein_pass(kernel, target, X, w);
    if (nu == 1.0) {
        check_finite(pass.ksd2, "I_nu_Stein");
        return pass.ksd2;
    }
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const auto dd = static_cast<double>(d);

    const GramSystem sys(std::move(pass.K), w, nu);
    const Matrix phi = sys.solve(pass.h);

    // div phi(x^i) = (1/nu) sum_j w_j [ -div1.div2 k + grad1 k . (gV_j - (1 - nu) phi_j) ]
    const Matrix Xt = X.transpose();
    const Matrix Ut = (pass.G - (1.0 - nu) * phi).transpose();
    const RadialProfile p0 = kernel.profile(0.0);
    Vector div = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* xi = Xt.col(i).data();
        div(i) += w(i) * (2.0 * dd * p0.df);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double* xj = Xt.col(j).data();
            const double* uj = Ut.col(j).data();
            const double* ui = Ut.col(i).data();
            double s = 0.0;
            double rui = 0.0;
            double ruj = 0.0;
            for (Eigen::Index a = 0; a < d; ++a) {
                const double r = xi[a] - xj[a];
                s += r * r;
                ruj += r * uj[a];
                rui += r * ui[a];
            }
            const RadialProfile p = kernel.profile(s);
            const double neg_cross = 2.0 * dd * p.df + 4.0 * p.d2f * s;
            div(i) += w(j) * (neg_cross + 2.0 * p.df * ruj);
            div(j) += w(i) * (neg_cross - 2.0 * p.df * rui);
        }
    }
    div /= nu;
    double value = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        value += w(i) * (-div(i) + pass.G.row(i).dot(phi.row(i)));
    }
    check_finite(value, "I_nu_Stein");
    return value;
}

SpectralFisher reg_stein_fisher_spectral_details(const Kernel& kernel, const Target& target,
                                                 const WeightedEmpiricalMeasure& measure, double nu) {
    check_nu(nu);
    check_measure(target, measure);
    const Vector& w = measure.weights;
    SteinPass pass = stein_pass(kernel, target, measure.positions, w);
    const GramSystem sys(std::move(pass.K), w, 1.0);
    const Spectrum spec = spectral_decomposition(sys);

    SpectralFisher out;
    out.ksd2 = pass.ksd2;
    out.lambda_max = spec.eigenvalues.size() ? spec.eigenvalues.maxCoeff() : 0.0;
    out.clipped = spec.clipped;
    if (nu == 1.0) {
        out.value = pass.ksd2;
    } else {
        const Vector sw = w.array().sqrt();
        const Matrix b = spec.eigenvectors.transpose() * (sw.asDiagonal() * pass.h);
        double contraction = 0.0;
        for (Eigen::Index m = 0; m < b.rows(); ++m) {
            contraction += b.row(m).squaredNorm() / ((1.0 - nu) * spec.eigenvalues(m) + nu);
        }
        out.value = pass.ksd2 / nu - ((1.0 - nu) / nu) * contraction;
    }
    check_finite(out.value, "I_nu_Stein");
    return out;
}

double reg_stein_fisher_spectral(const Kernel& kernel, const Target& target, const WeightedEmpiricalMeasure& measure,
                                 double nu) {
    return reg_stein_fisher_spectral_details(kernel, target, measure, nu).value;
}

double c_star(const Kernel& kernel, const Target& target, const Matrix& particles, double nu) {
    check_nu(nu);
    const WeightedEmpiricalMeasure m = WeightedEmpiricalMeasure::uniform(particles);
    check_measure(target, m);
    const Eigen::Index n = particles.rows();
    const Eigen::Index d = particles.cols();
    const auto N = static_cast<double>(n);
    const auto dd = static_cast<double>(d);

    const Matrix G = target.grad_rows(particles);
    const Vector lapV = target.laplacian_rows(particles);
    const Matrix K = build_gram(kernel, particles);

    Matrix Knu;
    if (nu == 1.0) {
        Knu = Matrix::Identity(n, n);
    } else {
        const GramSystem sys(K, nu);
        Knu = sys.solve(Matrix::Identity(n, n));
        Knu = 0.5 * (Knu + Knu.transpose()).eval();
    }

    // Pairwise quantities, stored row-major over i for the later sums.
    // A_ij = Lap2 k(x^j,x^i) - grad1 k(x^i,x^j).gV_i - k_ij LapV_i
    // b_ij = div1.div2 k(x^i,x^j) - grad1 k(x^i,x^j).gV_j
    double t1 = 0.0;
    Vector bsum = Vector::Zero(n);
    Matrix psi = Matrix::Zero(n, d);  // sum_l grad2 k(x^k,x^l) - k gV_l
    Matrix q = Matrix::Zero(n, d);    // sum_j Knu_ij grad1 k(x^i,x^j)
    std::vector<double> df_cache(static_cast<std::size_t>(n * n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const Vector r = (particles.row(i) - particles.row(j)).transpose();
            const double s = r.squaredNorm();
            const RadialProfile p = kernel.profile(s);
            df_cache[static_cast<std::size_t>(i * n + j)] = p.df;
            const double lap2 = 2.0 * dd * p.df + 4.0 * p.d2f * s;
            const double g1_dot_gi = 2.0 * p.df * r.dot(G.row(i));
            const double g1_dot_gj = 2.0 * p.df * r.dot(G.row(j));
            const double A = lap2 - g1_dot_gi - p.f * lapV(i);
            t1 += Knu(i, j) * A;
            bsum(i) += -lap2 - g1_dot_gj;
            psi.row(i) += (-2.0 * p.df) * r.transpose() - p.f * G.row(j);
            q.row(i) += Knu(i, j) * (2.0 * p.df) * r.transpose();
        }
    }
    t1 = -t1 / N;
    if (nu == 1.0) return t1;

    const Matrix P = Knu * psi;
    const Vector kkd = K.cwiseProduct(Knu.transpose()).rowwise().sum();  // (K Knu)_ii

    double t2 = 0.0;
    double t3 = 0.0;
    double t4 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        t2 += kkd(i) * bsum(i);
        t3 += q.row(i).dot(P.row(i));
        double inner = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double df = df_cache[static_cast<std::size_t>(i * n + j)];
            inner += 2.0 * df * (particles.row(i) - particles.row(j)).dot(P.row(j));
        }
        t4 += kkd(i) * inner;
    }
    t2 *= (1.0 - nu) / (nu * N * N);
    t3 *= (1.0 - nu) / (N * N);
    t4 *= -(1.0 - nu) * (1.0 - nu) / (nu * N * N * N);
    const double value = t1 + t2 + t3 + t4;
    check_finite(value, "C*");
    return value;
}

double c_star_beta1(double B, double C_V, double nu) {
    return B * (1.0 + C_V) + 2.0 * B * B / (nu * nu) + (B * B * B / (nu * nu * nu)) * (1.0 - nu);
}

double c_star_beta2(double B, double nu) {
    return B + 2.0 * B * B / (nu * nu) + (B * B * B / (nu * nu * nu)) * (1.0 - nu);
}

double c_star_bound(const Kernel& kernel, const Target& target, const TargetConstants& constants,
                    const Matrix& particles, double nu) {
    check_nu(nu);
    if (particles.rows() < 1 || particles.cols() != target.dim()) throw InputError("bad particle matrix");
    const auto dd = static_cast<double>(particles.cols());
    const double B = kernel.bound();
    const double Y = target.grad_rows(particles).rowwise().norm().mean();
    return constants.c_star * dd +
           (1.0 - nu) * (c_star_beta1(B, constants.C_V, nu) * dd + c_star_beta2(B, nu) * std::sqrt(dd) * Y);
}

double w1_exact_1d(const Vector& a, const Vector& wa, const Vector& b, const Vector& wb) {
    if (a.size() == 0 || b.size() == 0) throw InputError("W1 needs two nonempty measures");
    if (a.size() != wa.size() || b.size() != wb.size()) throw InputError("W1 weight/support size mismatch");
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(static_cast<std::size_t>(a.size() + b.size()));
    const double sa = wa.sum();
    const double sb = wb.sum();
    for (Eigen::Index i = 0; i < a.size(); ++i) atoms.emplace_back(a(i), wa(i) / sa);
    for (Eigen::Index i = 0; i < b.size(); ++i) atoms.emplace_back(b(i), -wb(i) / sb);
    std::stable_sort(atoms.begin(), atoms.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    double cdf_diff = 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < atoms.size(); ++k) {
        cdf_diff += atoms[k].second;
        total += std::abs(cdf_diff) * (atoms[k + 1].first - atoms[k].first);
    }
    return total;
}

double w1_between(const WeightedEmpiricalMeasure& p, const WeightedEmpiricalMeasure& q, W1Method method,
                  std::size_t n_slices, std::uint64_t seed) {
    if (p.size() == 0 || q.size() == 0) throw InputError("W1 needs two nonempty measures");
    if (p.dim() != q.dim()) throw InputError("W1 measures have different dimensions");
    const Eigen::Index d = p.dim();
    if (method == W1Method::exact_1d) {
        if (d != 1) throw InputError("exact 1-D W1 requires d = 1");
        return w1_exact_1d(p.positions.col(0), p.weights, q.positions.col(0), q.weights);
    }
    if (n_slices == 0) throw InputError("sliced W1 needs at least one slice");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double total = 0.0;
    Vector dir(d);
    for (std::size_t s = 0; s < n_slices; ++s) {
        for (Eigen::Index a = 0; a < d; ++a) dir(a) = normal(rng);
        dir.normalize();
        total += w1_exact_1d(p.positions * dir, p.weights, q.positions * dir, q.weights);
    }
    return total / static_cast<double>(n_slices);
}

double w1_distance(const WeightedEmpiricalMeasure& measure, const Target& target, W1Method method,
                   std::size_t n_target_samples, std::size_t n_slices, std::uint64_t seed) {
    if (measure.size() == 0) throw InputError("W1 of an empty measure");
    if (n_target_samples == 0) throw InputError("W1 needs target samples");
    std::mt19937_64 rng(seed);
    const WeightedEmpiricalMeasure samples =
        WeightedEmpiricalMeasure::uniform(target.sample(static_cast<Eigen::Index>(n_target_samples), rng));
    return w1_between(measure, samples, method, n_slices, seed ^ 0x9e3779b97f4a7c15ULL);
}

double v_average(const Target& target, const Matrix& particles) {
    if (particles.rows() < 1) throw InputError("V-average of an empty particle set");
    return target.potential_rows(particles).mean();
}

DiagnosticsReport evaluate_diagnostics(const Kernel& kernel, const Target& target, const TargetConstants& constants,
                                       const Matrix& particles, double nu, const DiagnosticsOptions& options) {
    const WeightedEmpiricalMeasure m = WeightedEmpiricalMeasure::uniform(particles);
    DiagnosticsReport r;
    r.nu = nu;
    r.ksd2 = ksd_squared(kernel, target, m);
    r.i_nu_stein = reg_stein_fisher_linear(kernel, target, m, nu);
    if (options.compute_c_star) {
        r.c_star = c_star(kernel, target, particles, nu);
        r.c_star_bound = c_star_bound(kernel, target, constants, particles, nu);
    }
    r.v_average = v_average(target, particles);
    if (options.compute_w1) {
        r.w1_to_target = w1_distance(m, target, options.w1_method, options.w1_target_samples, options.w1_slices,
                                     options.w1_seed);
    }
    return r;
}

}  // namespace rsvgd
