#include "wishart/riccati.hpp"

#include <Eigen/LU>
#include <cmath>

#include "json.hpp"
#include "wishart/quadrature.hpp"
#include "wishart/serialize.hpp"

namespace wishart {

namespace {

// trace norm of a (not necessarily symmetric) product, via singular values
double trace_norm(const Eigen::MatrixXd& m) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues().sum();
}

} // namespace

PsdOperator psi_laplace(const ModelParams& p, const PsdOperator& b, double t) {
    if (t < 0.0) throw NegativeTime("psi_laplace: t = " + std::to_string(t));
    if (b.dim() != p.dim) throw DimMismatch("psi_laplace: b has dim " + std::to_string(b.dim()));
    const int n = p.dim;
    const Eigen::MatrixXd root = psd_sqrt(b).matrix();
    const Eigen::MatrixXd qt = integrated_covariance(p, t).qt.matrix();
    const Eigen::MatrixXd resolvent =
        Eigen::MatrixXd::Identity(n, n) + 2.0 * root * qt * root;
    const Eigen::MatrixXd et = semigroup_apply(p.generator, t);
    Eigen::MatrixXd core = root * resolvent.ldlt().solve(root);
    Eigen::MatrixXd psi = et * core * et.transpose();
    psi = 0.5 * (psi + psi.transpose());

    const double b_norm = operator_norm(b.matrix());
    const double et_norm = operator_norm(et);
    if (operator_norm(psi) > b_norm * et_norm * et_norm + 1e-10) {
        throw Error("psi_laplace: operator norm bound violated");
    }
    const Eigen::MatrixXd et_rootq = et * psd_sqrt(p.q).matrix();
    if (trace_norm(psi * p.q.matrix()) > b_norm * et_rootq.squaredNorm() + 1e-10) {
        throw Error("psi_laplace: trace norm bound violated");
    }
    return PsdOperator(psi);
}

ComplexOperator psi_fourier(const ModelParams& p, const SelfAdjointOperator& v, double t) {
    if (t < 0.0) throw NegativeTime("psi_fourier: t = " + std::to_string(t));
    if (v.dim() != p.dim) throw DimMismatch("psi_fourier: v has dim " + std::to_string(v.dim()));
    const int n = p.dim;
    EigenDecomposition eig = eigen_decompose(v.matrix());
    const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
    double sign = 1.0;
    if (eig.values.minCoeff() >= -kPsdTol * scale) {
        sign = 1.0;
    } else if (eig.values.maxCoeff() <= kPsdTol * scale) {
        sign = -1.0;
    } else {
        throw NotSignDefinite("psi_fourier: v is indefinite");
    }
    const Eigen::MatrixXd root = psd_sqrt(PsdOperator(sign * v.matrix())).matrix();
    const Eigen::MatrixXd qt = integrated_covariance(p, t).qt.matrix();
    Eigen::MatrixXcd resolvent = (2.0 * root * qt * root).cast<std::complex<double>>();
    resolvent += std::complex<double>(0.0, sign) * Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd rootc = root.cast<std::complex<double>>();
    const Eigen::MatrixXd et = semigroup_apply(p.generator, t);
    const Eigen::MatrixXcd etc = et.cast<std::complex<double>>();
    Eigen::MatrixXcd core = rootc * resolvent.partialPivLu().solve(rootc);
    return ComplexOperator(etc * core * etc.transpose());
}

ComplexOperator psi_diagonal(const ModelParams& p, const Eigen::VectorXcd& b_diag, double t) {
    if (!p.jointly_diagonal()) throw NotJointlyDiagonal("psi_diagonal");
    if (b_diag.size() != p.dim) {
        throw DimMismatch("psi_diagonal: b has " + std::to_string(b_diag.size()) + " modes");
    }
    if (t < 0.0) throw NegativeTime("psi_diagonal: t = " + std::to_string(t));
    Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(p.dim, p.dim);
    for (int j = 0; j < p.dim; ++j) {
        const double a = p.generator.spectrum()[j];
        const double qt = diagonal_qt_entry(p.q(j, j), a, t);
        const std::complex<double> b = b_diag[j];
        psi(j, j) = b * std::exp(2.0 * a * t) / (1.0 + 2.0 * b * qt);
    }
    return ComplexOperator(psi);
}

Eigen::MatrixXcd riccati_rhs(const ModelParams& p, const Eigen::MatrixXcd& psi) {
    const Eigen::MatrixXcd a = p.generator.matrix().cast<std::complex<double>>();
    const Eigen::MatrixXcd q = p.q.matrix().cast<std::complex<double>>();
    // transpose without conjugation
    const Eigen::MatrixXcd sym = psi + psi.transpose();
    return -0.5 * sym * q * sym + a * psi + psi * a.transpose();
}

const Eigen::MatrixXcd& RiccatiSolution::at(double t) const {
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (std::abs(t_grid[i] - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
            return psi_values[i];
        }
    }
    throw TimeNotOnGrid("riccati solution has no value at t = " + std::to_string(t));
}

RiccatiSolution riccati_integrate(const ModelParams& p, const ComplexOperator& b, double t,
                                  int steps) {
    if (steps < 1) throw Error("riccati_integrate: steps must be >= 1");
    if (t < 0.0) throw NegativeTime("riccati_integrate: t = " + std::to_string(t));
    if (b.dim() != p.dim) throw DimMismatch("riccati_integrate: b has dim " +
                                            std::to_string(b.dim()));
    RiccatiSolution sol;
    sol.initial = b.matrix();
    sol.method = RiccatiMethod::NumericODE;
    sol.t_grid.reserve(steps + 1);
    sol.psi_values.reserve(steps + 1);

    const double h = t / steps;
    Eigen::MatrixXcd psi = b.matrix();
    sol.t_grid.push_back(0.0);
    sol.psi_values.push_back(psi);
    for (int k = 0; k < steps; ++k) {
        const Eigen::MatrixXcd k1 = riccati_rhs(p, psi);
        const Eigen::MatrixXcd k2 = riccati_rhs(p, psi + 0.5 * h * k1);
        const Eigen::MatrixXcd k3 = riccati_rhs(p, psi + 0.5 * h * k2);
        const Eigen::MatrixXcd k4 = riccati_rhs(p, psi + h * k3);
        psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!psi.allFinite() || psi.norm() > 1e12) {
            throw StepOverflow("riccati_integrate: blow-up near t = " +
                               std::to_string((k + 1) * h));
        }
        sol.t_grid.push_back((k + 1) * h);
        sol.psi_values.push_back(psi);
    }
    return sol;
}

double riccati_residual(const ModelParams& p, const PsiFamily& psi_fn,
                        const Eigen::MatrixXcd& b, double t, double h) {
    if (!(h > 0.0) || !(t > h)) throw Error("riccati_residual: requires t > h > 0");
    const Eigen::MatrixXcd ahead = psi_fn(t + h, b);
    const Eigen::MatrixXcd behind = psi_fn(t - h, b);
    const Eigen::MatrixXcd derivative = (ahead - behind) / (2.0 * h);
    return (derivative - riccati_rhs(p, psi_fn(t, b))).norm();
}

double flow_check(const ModelParams& p, const PsdOperator& u, double s, double t) {
    const PsdOperator inner = psi_laplace(p, u, t);
    const PsdOperator composed = psi_laplace(p, inner, s);
    const PsdOperator direct = psi_laplace(p, u, s + t);
    return (composed.matrix() - direct.matrix()).norm();
}

std::complex<double> phi_of(const ModelParams& p, const RiccatiSolution& psi_path) {
    const std::size_t n_points = psi_path.t_grid.size();
    if (n_points != psi_path.psi_values.size()) {
        throw Error("phi_of: grid and value counts differ");
    }
    if (n_points < 2 || p.alpha == 0.0) return {0.0, 0.0};

    std::vector<std::complex<double>> f(n_points);
    const Eigen::MatrixXcd q = p.q.matrix().cast<std::complex<double>>();
    for (std::size_t i = 0; i < n_points; ++i) {
        f[i] = (psi_path.psi_values[i] * q).trace();
    }

    const std::size_t intervals = n_points - 1;
    const double h = psi_path.t_grid[1] - psi_path.t_grid[0];
    bool uniform = true;
    for (std::size_t i = 1; i < intervals; ++i) {
        const double step = psi_path.t_grid[i + 1] - psi_path.t_grid[i];
        if (std::abs(step - h) > 1e-12 * std::max(1.0, std::abs(h))) {
            uniform = false;
            break;
        }
    }

    std::complex<double> integral = 0.0;
    if (!uniform || intervals == 1) {
        for (std::size_t i = 0; i < intervals; ++i) {
            integral += 0.5 * (psi_path.t_grid[i + 1] - psi_path.t_grid[i]) * (f[i] + f[i + 1]);
        }
    } else {
        // composite Simpson; odd interval counts close with a 3/8 panel
        std::size_t simpson_end = intervals % 2 == 0 ? intervals : intervals - 3;
        for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
            integral += (h / 3.0) * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
        }
        if (intervals % 2 != 0) {
            const std::size_t i = simpson_end;
            integral += (3.0 * h / 8.0) * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
        }
    }
    return p.alpha * integral;
}

namespace {

const char* method_name(RiccatiMethod m) {
    switch (m) {
    case RiccatiMethod::ExplicitLaplace: return "ExplicitLaplace";
    case RiccatiMethod::ExplicitFourier: return "ExplicitFourier";
    case RiccatiMethod::ExplicitDiagonal: return "ExplicitDiagonal";
    case RiccatiMethod::NumericODE: return "NumericODE";
    }
    return "NumericODE";
}

} // namespace

void export_riccati_csv(const RiccatiSolution& sol, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < sol.t_grid.size(); ++k) {
        const Eigen::MatrixXcd& psi = sol.psi_values[k];
        for (Eigen::Index i = 0; i < psi.rows(); ++i) {
            for (Eigen::Index j = 0; j < psi.cols(); ++j) {
                rows.push_back({format_double(sol.t_grid[k]), std::to_string(i),
                                std::to_string(j), format_double(psi(i, j).real()),
                                format_double(psi(i, j).imag())});
            }
        }
    }
    write_csv(path, "t,i,j,re,im", rows);
}

std::string riccati_to_json(const RiccatiSolution& sol) {
    nlohmann::json j;
    j["method"] = method_name(sol.method);
    j["t_grid"] = sol.t_grid;
    j["initial"] = nlohmann::json::parse(to_json(ComplexOperator(sol.initial)));
    nlohmann::json values = nlohmann::json::array();
    for (const auto& psi : sol.psi_values) {
        values.push_back(nlohmann::json::parse(to_json(ComplexOperator(psi))));
    }
    j["psi_values"] = values;
    return j.dump();
}

} // namespace wishart
