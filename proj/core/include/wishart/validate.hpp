#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "wishart/simulate.hpp"
#include "wishart/transforms.hpp"

namespace wishart {

// Monte Carlo mean of exp(-Tr((u - iv) X_t)) over a stored sample. The
// quoted std_error is the root-sum-square of the per-component standard
// errors, which are kept for componentwise z-tests.
struct EmpiricalTransform {
    std::complex<double> mean;
    double std_error = 0.0;
    double std_error_re = 0.0;
    double std_error_im = 0.0;
    std::int64_t n_paths = 0;
};
EmpiricalTransform empirical_transform(const WishartPathSample& sample,
                                       const TestFunctional& f, double t);

constexpr double kZMax = 4.0;

// One closed-form-vs-sample comparison; pass means |z| <= kZMax.
struct ComparisonReport {
    std::string quantity;
    std::complex<double> closed_form;
    std::complex<double> empirical_mean;
    double std_error = 0.0;
    double z_score = 0.0;
    std::int64_t n_paths = 0;
    bool pass = false;
};

// z-test of the sample against the matching closed-form transform value;
// z_score is the worst componentwise statistic.
ComparisonReport transform_check(const WishartPathSample& sample, const TestFunctional& f,
                                 double t, const std::string& quantity);

// Battery of probes with the family-wise guard: fails when any |z| > kZMax
// or more than two probes land above |z| = 3.
struct FamilyCheck {
    std::vector<ComparisonReport> reports;
    int n_above_three = 0;
    bool pass = false;
};
FamilyCheck transform_family_check(const WishartPathSample& sample,
                                   const std::vector<std::pair<TestFunctional, double>>& probes);

// E[trace X_t] against trace(e^{tA} x0 e^{tA*}) + alpha trace(Q_t).
ComparisonReport moment_check(const WishartPathSample& sample, double t);

// Per grid time, histogram of the numerical rank over paths.
struct RankHistogram {
    std::map<double, std::map<int, std::int64_t>> counts;
    double tol = 0.0;

    // paths whose rank exceeds the cap, summed over all grid times
    std::int64_t violations(int rank_cap) const;
};
RankHistogram rank_histogram(const WishartPathSample& sample, double tol = 1e-8);

// Empirical means of exp(-trace(u X_t)) under both plans with a pooled
// z-statistic; pass iff |z| <= kZMax. Plans must share model and x0.
ComparisonReport cross_validate_schemes(const SimPlan& plan_a, const SimPlan& plan_b,
                                        const PsdOperator& u, double t);

void export_comparisons_csv(const std::vector<ComparisonReport>& reports,
                            const std::string& path);
std::string comparisons_to_json(const std::vector<ComparisonReport>& reports);

} // namespace wishart
