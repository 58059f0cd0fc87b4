#include <benchmark/benchmark.h>

#include "wishart/operators.hpp"

namespace {

wishart::PsdOperator random_psd(int n, unsigned seed) {
    std::srand(seed);
    Eigen::MatrixXd y = Eigen::MatrixXd::Random(n, n);
    return wishart::PsdOperator::from_gram(y);
}

void bench_psd_sqrt(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const wishart::PsdOperator m = random_psd(n, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(wishart::psd_sqrt(m));
    }
}
BENCHMARK(bench_psd_sqrt)->Arg(8)->Arg(16)->Arg(32);

void bench_semigroup_dense(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::srand(11);
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n) - 2.0 * Eigen::MatrixXd::Identity(n, n);
    const wishart::GeneratorSpec gen = wishart::GeneratorSpec::dense(a);
    for (auto _ : state) {
        benchmark::DoNotOptimize(wishart::semigroup_apply(gen, 0.7));
    }
}
BENCHMARK(bench_semigroup_dense)->Arg(8)->Arg(16)->Arg(32);

} // namespace

BENCHMARK_MAIN();
