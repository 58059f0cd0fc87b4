#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "test_helpers.hpp"
#include "wishart/validate.hpp"

using namespace wishart;

namespace {

SimPlan mild_plan(std::int64_t n_paths, std::uint64_t seed, Scheme scheme,
                  std::vector<double> grid = {0.0, 0.4}) {
    ModelParams p = testutil::mild_model(3, 2.0);
    InitialState x0(testutil::random_psd_rank(3, 2, 5, 0.5), 2);
    return SimPlan(std::move(p), std::move(x0), std::move(grid), n_paths, seed, scheme);
}

} // namespace

TEST_CASE("empirical_transform equals a hand-rolled path loop") {
    const SimPlan plan = mild_plan(400, 7, Scheme::EulerOU);
    const WishartPathSample sample = simulate(plan);
    const double t = 0.4;
    const SelfAdjointOperator u(testutil::random_psd(3, 9, 0.4).matrix());
    const SelfAdjointOperator v(testutil::random_psd(3, 11, 0.3).matrix());
    const TestFunctional f(u, v, TransformRegime::MixedSmallT);

    const EmpiricalTransform got = empirical_transform(sample, f, t);

    std::complex<double> sum = 0.0;
    const int ti = sample.time_index_of(t);
    for (std::int64_t path = 0; path < plan.n_paths; ++path) {
        const Eigen::MatrixXd x = sample.state_matrix(path, ti);
        const double tr_u = (u.matrix() * x).trace();
        const double tr_v = (v.matrix() * x).trace();
        sum += std::exp(std::complex<double>(-tr_u, tr_v));
    }
    REQUIRE(std::abs(got.mean - sum / double(plan.n_paths)) < 1e-13);
    REQUIRE(got.n_paths == plan.n_paths);
    REQUIRE(got.std_error ==
            doctest::Approx(std::hypot(got.std_error_re, got.std_error_im)));
    REQUIRE(got.std_error > 0.0);
}

TEST_CASE("transform_check passes on an exact sampler at honest tolerances") {
    const SimPlan plan = mild_plan(20000, 13, Scheme::ExactDiagonal);
    const WishartPathSample sample = simulate(plan);
    Eigen::VectorXd ud(3);
    ud << 0.6, 0.3, 0.1;
    const TestFunctional f = TestFunctional::laplace(PsdOperator::from_diagonal(ud));
    const ComparisonReport report = transform_check(sample, f, 0.4, "laplace-diag");
    REQUIRE(report.pass);
    REQUIRE(std::abs(report.z_score) <= kZMax);
    REQUIRE(report.quantity == "laplace-diag");
    REQUIRE(report.n_paths == plan.n_paths);
    REQUIRE(std::abs(report.closed_form.imag()) == 0.0);
}

TEST_CASE("transform_check flags a corrupted sample") {
    const SimPlan plan = mild_plan(2000, 17, Scheme::ExactDiagonal);
    WishartPathSample sample = simulate(plan);
    // shift every terminal state far from the law
    const int ti = 1;
    for (std::int64_t path = 0; path < plan.n_paths; ++path) {
        double* slot = sample.slot(path, ti);
        for (int k = 0; k < sample.slot_size(); ++k) slot[k] *= 3.0;
    }
    const TestFunctional f =
        TestFunctional::laplace(PsdOperator(SelfAdjointOperator(3, 0.5)));
    const ComparisonReport report = transform_check(sample, f, 0.4, "corrupted");
    REQUIRE_FALSE(report.pass);
    REQUIRE(std::abs(report.z_score) > kZMax);
}

TEST_CASE("transform_family_check counts marginal probes") {
    const SimPlan plan = mild_plan(20000, 19, Scheme::ExactDiagonal);
    const WishartPathSample sample = simulate(plan);
    std::vector<std::pair<TestFunctional, double>> probes;
    for (double scale : {0.2, 0.5, 1.0}) {
        probes.emplace_back(
            TestFunctional::laplace(PsdOperator(SelfAdjointOperator(3, scale))), 0.4);
    }
    Eigen::VectorXd vd(3);
    vd << 0.4, 0.2, 0.1;
    probes.emplace_back(
        TestFunctional::fourier(SelfAdjointOperator::from_diagonal(vd)), 0.4);

    const FamilyCheck fam = transform_family_check(sample, probes);
    REQUIRE(fam.reports.size() == 4);
    REQUIRE(fam.pass);
    REQUIRE(fam.n_above_three <= 2);
    for (const auto& r : fam.reports) REQUIRE(std::abs(r.z_score) <= kZMax);
}

TEST_CASE("moment_check matches the trace mean of the exact sampler") {
    const SimPlan plan = mild_plan(20000, 23, Scheme::ExactDiagonal);
    const WishartPathSample sample = simulate(plan);
    const ComparisonReport report = moment_check(sample, 0.4);
    REQUIRE(report.pass);
    REQUIRE(report.quantity == "trace-mean");
    // the closed form itself: trace of the propagated x0 plus alpha trace Q_t
    const ModelParams& p = sample.plan().params;
    const Eigen::MatrixXd et = semigroup_apply(p.generator, 0.4);
    const double want =
        (et.transpose() * sample.plan().x0.x0.matrix() * et).trace() +
        p.alpha * integrated_covariance(p, 0.4).qt.matrix().trace();
    REQUIRE(report.closed_form.real() == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("rank_histogram: OU sample rank is capped by alpha") {
    const SimPlan plan = mild_plan(300, 29, Scheme::ExactDiagonal, {0.0, 0.2, 0.4});
    const WishartPathSample sample = simulate(plan);
    const RankHistogram hist = rank_histogram(sample);
    REQUIRE(hist.tol == 1e-8);
    REQUIRE(hist.violations(2) == 0);
    // rank 2 should dominate at positive times, so a rank-1 cap must fail
    REQUIRE(hist.violations(1) > 0);
    // t = 0 bucket is the deterministic rank-2 start
    const auto& at0 = hist.counts.at(0.0);
    REQUIRE(at0.at(2) == 300);
}

TEST_CASE("rank_histogram: zero start has rank zero at t = 0") {
    ModelParams p = testutil::mild_model(3, 2.0);
    InitialState zero(PsdOperator::zero(3), 0);
    const SimPlan plan(p, zero, {0.0, 0.3}, 50, 31, Scheme::ExactDiagonal);
    const RankHistogram hist = rank_histogram(simulate(plan));
    REQUIRE(hist.counts.at(0.0).at(0) == 50);
    REQUIRE(hist.violations(2) == 0);
}

TEST_CASE("cross_validate_schemes: exact vs Euler agree, guards misuse") {
    const SimPlan exact = mild_plan(8000, 37, Scheme::ExactDiagonal);
    const SimPlan euler = mild_plan(8000, 41, Scheme::EulerOU);
    const PsdOperator u(SelfAdjointOperator(3, 0.4));
    const ComparisonReport report = cross_validate_schemes(exact, euler, u, 0.4);
    REQUIRE(report.pass);
    REQUIRE(report.quantity == "exact-diagonal-vs-euler-ou");
    REQUIRE(report.n_paths == 16000);

    ModelParams other = testutil::mild_model(3, 3.0);
    InitialState x0_other(PsdOperator::zero(3), 0);
    const SimPlan mismatched(other, x0_other, {0.0, 0.4}, 100, 43, Scheme::EulerOU);
    REQUIRE_THROWS_AS(cross_validate_schemes(exact, mismatched, u, 0.4),
                      IncompatiblePlans);
}

TEST_CASE("comparison exports: CSV schema and JSON payload") {
    const SimPlan plan = mild_plan(500, 47, Scheme::ExactDiagonal);
    const WishartPathSample sample = simulate(plan);
    const TestFunctional f =
        TestFunctional::laplace(PsdOperator(SelfAdjointOperator(3, 0.3)));
    std::vector<ComparisonReport> reports{transform_check(sample, f, 0.4, "probe")};

    const std::string path = "/tmp/wishart_test_comparisons.csv";
    export_comparisons_csv(reports, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    REQUIRE(header ==
            "quantity,closed_re,closed_im,empirical_re,empirical_im,std_error,z,n_paths,pass");
    std::remove(path.c_str());

    const std::string js = comparisons_to_json(reports);
    REQUIRE(js.find("\"quantity\"") != std::string::npos);
    REQUIRE(js.find("\"probe\"") != std::string::npos);
}
