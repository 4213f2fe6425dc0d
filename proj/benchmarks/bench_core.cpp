#include <random>

#include <benchmark/benchmark.h>

#include "rsvgd/diagnostics.hpp"
#include "rsvgd/engine.hpp"

using namespace rsvgd;

namespace {

Matrix cloud(Eigen::Index n, Eigen::Index d) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 1.5);
    Matrix X(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) X(i, j) = g(rng);
    return X;
}

const Target& target(Eigen::Index d) {
    static thread_local Target t = Target::gaussian(Vector::Zero(1), Matrix::Identity(1, 1));
    if (t.dim() != d) t = Target::gaussian(Vector::Zero(d), Matrix::Identity(d, d));
    return t;
}

void BM_SteinForce(benchmark::State& st) {
    const Eigen::Index n = st.range(0), d = st.range(1);
    const Matrix X = cloud(n, d);
    const Kernel k = Kernel::gaussian_rbf(1.0);
    for (auto _ : st) benchmark::DoNotOptimize(stein_force(k, target(d), X));
    st.SetComplexityN(n);
}
BENCHMARK(BM_SteinForce)->ArgsProduct({{50, 100, 200, 400}, {2, 10}})->Complexity();

void BM_RsvgdStep(benchmark::State& st) {
    const Eigen::Index n = st.range(0), d = st.range(1);
    ParticleState s;
    s.positions = cloud(n, d);
    const Kernel k = Kernel::gaussian_rbf(1.0);
    const double nu = 1.0 - 1.0 / static_cast<double>(n);
    for (auto _ : st) benchmark::DoNotOptimize(rsvgd_step(k, target(d), s, 1e-3, nu));
    st.SetComplexityN(n);
}
BENCHMARK(BM_RsvgdStep)->ArgsProduct({{50, 100, 200, 400}, {2, 10}})->Complexity();

void BM_CStar(benchmark::State& st) {
    const Eigen::Index n = st.range(0);
    const Matrix X = cloud(n, 3);
    const Kernel k = Kernel::imq(1.0, 0.5);
    for (auto _ : st) benchmark::DoNotOptimize(c_star(k, target(3), X, 0.7));
}
BENCHMARK(BM_CStar)->Arg(25)->Arg(50)->Arg(100)->Arg(200);

void BM_FisherLinear(benchmark::State& st) {
    const Eigen::Index n = st.range(0);
    const WeightedEmpiricalMeasure m{cloud(n, 2), Vector::Constant(n, 1.0 / static_cast<double>(n))};
    const Kernel k = Kernel::gaussian_rbf(1.0);
    for (auto _ : st) benchmark::DoNotOptimize(reg_stein_fisher_linear(k, target(2), m, 0.1));
}
BENCHMARK(BM_FisherLinear)->Arg(50)->Arg(200)->Arg(800);

void BM_FisherSpectral(benchmark::State& st) {
    const Eigen::Index n = st.range(0);
    const WeightedEmpiricalMeasure m{cloud(n, 2), Vector::Constant(n, 1.0 / static_cast<double>(n))};
    const Kernel k = Kernel::gaussian_rbf(1.0);
    for (auto _ : st) benchmark::DoNotOptimize(reg_stein_fisher_spectral(k, target(2), m, 0.1));
}
BENCHMARK(BM_FisherSpectral)->Arg(50)->Arg(200)->Arg(800);

}  // namespace

BENCHMARK_MAIN();
