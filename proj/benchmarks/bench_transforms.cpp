#include <benchmark/benchmark.h>

#include "wishart/transforms.hpp"

namespace {

wishart::ModelParams diagonal_model(int n) {
    Eigen::VectorXd a(n);
    Eigen::VectorXd q(n);
    for (int j = 0; j < n; ++j) {
        a[j] = -0.5 - 0.1 * j;
        q[j] = 1.0 / (1.0 + j);
    }
    return wishart::ModelParams(n, 2.0, wishart::GeneratorSpec::diagonal(a),
                                wishart::PsdOperator::from_diagonal(q));
}

void bench_laplace_closed(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const wishart::ModelParams p = diagonal_model(n);
    const wishart::InitialState x0(wishart::PsdOperator::identity(n), n);
    const wishart::PsdOperator u(0.3 * Eigen::MatrixXd::Identity(n, n));
    for (auto _ : state) {
        benchmark::DoNotOptimize(wishart::laplace_closed(p, x0, u, 0.8));
    }
}
BENCHMARK(bench_laplace_closed)->Arg(8)->Arg(16)->Arg(32);

void bench_fourier_trace_cf(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const wishart::ModelParams p = diagonal_model(n);
    const wishart::InitialState x0(wishart::PsdOperator::identity(n), n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(wishart::fourier_trace_cf(p, x0, 0.4, 0.8));
    }
}
BENCHMARK(bench_fourier_trace_cf)->Arg(4)->Arg(8);

} // namespace
