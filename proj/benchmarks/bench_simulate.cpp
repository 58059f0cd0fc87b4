#include <benchmark/benchmark.h>

#include "wishart/simulate.hpp"

namespace {

wishart::SimPlan make_plan(int n, std::int64_t paths, wishart::Scheme scheme) {
    Eigen::VectorXd a(n);
    Eigen::VectorXd q(n);
    for (int j = 0; j < n; ++j) {
        a[j] = -1.0 - 0.05 * j;
        q[j] = 1.0;
    }
    wishart::ModelParams params(n, 2.0, wishart::GeneratorSpec::diagonal(a),
                                wishart::PsdOperator::from_diagonal(q));
    wishart::InitialState x0(wishart::PsdOperator::zero(n), 0);
    return wishart::SimPlan(std::move(params), std::move(x0), {0.0, 0.5, 1.0}, paths, 99,
                            scheme);
}

void bench_exact_diagonal(benchmark::State& state) {
    const wishart::SimPlan plan = make_plan(16, state.range(0), wishart::Scheme::ExactDiagonal);
    for (auto _ : state) {
        benchmark::DoNotOptimize(wishart::simulate(plan));
    }
}
BENCHMARK(bench_exact_diagonal)->Arg(1000)->Arg(10000);

void bench_euler_ou(benchmark::State& state) {
    const wishart::SimPlan plan = make_plan(8, state.range(0), wishart::Scheme::EulerOU);
    for (auto _ : state) {
        benchmark::DoNotOptimize(wishart::simulate(plan));
    }
}
BENCHMARK(bench_euler_ou)->Arg(100);

} // namespace
