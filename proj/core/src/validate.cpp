#include "wishart/validate.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "wishart/serialize.hpp"

namespace wishart {

namespace {

double component_z(double diff, double se) {
    if (diff == 0.0) return 0.0;
    if (se <= 0.0) return std::numeric_limits<double>::infinity();
    return diff / se;
}

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    const double scale = std::max(1.0, std::max(a.cwiseAbs().maxCoeff(),
                                                b.cwiseAbs().maxCoeff()));
    return (a - b).cwiseAbs().maxCoeff() <= 1e-14 * scale;
}

struct MeanAccumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::int64_t n = 0;

    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++n;
    }
    double mean() const { return n > 0 ? sum / n : 0.0; }
    double std_error() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1));
        return std::sqrt(var / n);
    }
};

} // namespace

EmpiricalTransform empirical_transform(const WishartPathSample& sample,
                                       const TestFunctional& f, double t) {
    const int ti = sample.time_index_of(t);
    const Eigen::MatrixXd& u = f.u.matrix();
    const Eigen::MatrixXd& v = f.v.matrix();
    const bool u_zero = u.cwiseAbs().maxCoeff() == 0.0;
    const bool v_zero = v.cwiseAbs().maxCoeff() == 0.0;

    MeanAccumulator re;
    MeanAccumulator im;
    for (std::int64_t p = 0; p < sample.plan().n_paths; ++p) {
        const double tr_u = u_zero ? 0.0 : sample.trace_product(p, ti, u);
        const double tr_v = v_zero ? 0.0 : sample.trace_product(p, ti, v);
        const std::complex<double> value = std::exp(std::complex<double>(-tr_u, tr_v));
        re.add(value.real());
        im.add(value.imag());
    }

    EmpiricalTransform out;
    out.mean = {re.mean(), im.mean()};
    out.std_error_re = re.std_error();
    out.std_error_im = im.std_error();
    out.std_error = std::hypot(out.std_error_re, out.std_error_im);
    out.n_paths = sample.plan().n_paths;
    return out;
}

ComparisonReport transform_check(const WishartPathSample& sample, const TestFunctional& f,
                                 double t, const std::string& quantity) {
    const TransformResult closed =
        evaluate(sample.plan().params, sample.plan().x0, f, t);
    const EmpiricalTransform emp = empirical_transform(sample, f, t);

    const double z_re = component_z(emp.mean.real() - closed.value.real(), emp.std_error_re);
    const double z_im = component_z(emp.mean.imag() - closed.value.imag(), emp.std_error_im);
    ComparisonReport report;
    report.quantity = quantity;
    report.closed_form = closed.value;
    report.empirical_mean = emp.mean;
    report.std_error = emp.std_error;
    report.z_score = std::abs(z_re) >= std::abs(z_im) ? z_re : z_im;
    report.n_paths = emp.n_paths;
    report.pass = std::abs(z_re) <= kZMax && std::abs(z_im) <= kZMax;
    return report;
}

FamilyCheck transform_family_check(
    const WishartPathSample& sample,
    const std::vector<std::pair<TestFunctional, double>>& probes) {
    FamilyCheck check;
    check.pass = true;
    int index = 0;
    for (const auto& [functional, t] : probes) {
        ComparisonReport report =
            transform_check(sample, functional, t, "probe-" + std::to_string(index++));
        if (std::abs(report.z_score) > 3.0) ++check.n_above_three;
        check.pass = check.pass && report.pass;
        check.reports.push_back(std::move(report));
    }
    if (check.n_above_three > 2) check.pass = false;
    return check;
}

ComparisonReport moment_check(const WishartPathSample& sample, double t) {
    const int ti = sample.time_index_of(t);
    const ModelParams& p = sample.plan().params;

    const Eigen::MatrixXd et = semigroup_apply(p.generator, t);
    const double deterministic =
        (et.transpose() * sample.plan().x0.x0.matrix() * et).trace();
    const double closed =
        deterministic + p.alpha * integrated_covariance(p, t).qt.matrix().trace();

    MeanAccumulator acc;
    for (std::int64_t path = 0; path < sample.plan().n_paths; ++path) {
        acc.add(sample.trace_state(path, ti));
    }

    ComparisonReport report;
    report.quantity = "trace-mean";
    report.closed_form = closed;
    report.empirical_mean = acc.mean();
    report.std_error = acc.std_error();
    report.z_score = component_z(acc.mean() - closed, acc.std_error());
    report.n_paths = acc.n;
    report.pass = std::abs(report.z_score) <= kZMax;
    return report;
}

std::int64_t RankHistogram::violations(int rank_cap) const {
    std::int64_t total = 0;
    for (const auto& [t, by_rank] : counts) {
        for (const auto& [rank, n] : by_rank) {
            if (rank > rank_cap) total += n;
        }
    }
    return total;
}

RankHistogram rank_histogram(const WishartPathSample& sample, double tol) {
    RankHistogram hist;
    hist.tol = tol;
    const int n_times = static_cast<int>(sample.plan().t_grid.size());
    for (std::int64_t p = 0; p < sample.plan().n_paths; ++p) {
        for (int k = 0; k < n_times; ++k) {
            const Eigen::VectorXd eigs = sample.state_eigenvalues(p, k);
            const double top = eigs.size() > 0 ? eigs[0] : 0.0;
            int rank = 0;
            if (top > 0.0) {
                const double cut = tol * top;
                for (int i = 0; i < eigs.size(); ++i) {
                    if (eigs[i] > cut) ++rank;
                }
            }
            ++hist.counts[sample.plan().t_grid[k]][rank];
        }
    }
    return hist;
}

ComparisonReport cross_validate_schemes(const SimPlan& plan_a, const SimPlan& plan_b,
                                        const PsdOperator& u, double t) {
    if (plan_a.params.dim != plan_b.params.dim ||
        plan_a.params.alpha != plan_b.params.alpha ||
        !same_matrix(plan_a.params.generator.matrix(), plan_b.params.generator.matrix()) ||
        !same_matrix(plan_a.params.q.matrix(), plan_b.params.q.matrix()) ||
        !same_matrix(plan_a.x0.x0.matrix(), plan_b.x0.x0.matrix())) {
        throw IncompatiblePlans("cross_validate_schemes: plans disagree on model or x0");
    }

    const TestFunctional f = TestFunctional::laplace(u);
    const WishartPathSample sample_a = simulate(plan_a);
    const WishartPathSample sample_b = simulate(plan_b);
    const EmpiricalTransform emp_a = empirical_transform(sample_a, f, t);
    const EmpiricalTransform emp_b = empirical_transform(sample_b, f, t);

    const double pooled_se = std::hypot(emp_a.std_error_re, emp_b.std_error_re);
    ComparisonReport report;
    report.quantity = std::string(scheme_name(plan_a.scheme)) + "-vs-" +
                      scheme_name(plan_b.scheme);
    report.closed_form = emp_a.mean;
    report.empirical_mean = emp_b.mean;
    report.std_error = pooled_se;
    report.z_score = component_z(emp_b.mean.real() - emp_a.mean.real(), pooled_se);
    report.n_paths = emp_a.n_paths + emp_b.n_paths;
    report.pass = std::abs(report.z_score) <= kZMax;
    return report;
}

void export_comparisons_csv(const std::vector<ComparisonReport>& reports,
                            const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(reports.size());
    for (const auto& r : reports) {
        rows.push_back({r.quantity, format_double(r.closed_form.real()),
                        format_double(r.closed_form.imag()),
                        format_double(r.empirical_mean.real()),
                        format_double(r.empirical_mean.imag()), format_double(r.std_error),
                        format_double(r.z_score), std::to_string(r.n_paths),
                        r.pass ? "1" : "0"});
    }
    write_csv(path,
              "quantity,closed_re,closed_im,empirical_re,empirical_im,std_error,z,"
              "n_paths,pass",
              rows);
}

std::string comparisons_to_json(const std::vector<ComparisonReport>& reports) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : reports) {
        out.push_back({{"quantity", r.quantity},
                       {"closed_re", r.closed_form.real()},
                       {"closed_im", r.closed_form.imag()},
                       {"empirical_re", r.empirical_mean.real()},
                       {"empirical_im", r.empirical_mean.imag()},
                       {"std_error", r.std_error},
                       {"z", r.z_score},
                       {"n_paths", r.n_paths},
                       {"pass", r.pass}});
    }
    return out.dump(2);
}

} // namespace wishart
