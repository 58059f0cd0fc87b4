#include "wishart/operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "json.hpp"

namespace wishart {

namespace {

void require_square(const Eigen::MatrixXd& m, const char* who) {
    if (m.rows() != m.cols()) {
        throw DimMismatch(std::string(who) + ": matrix is " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()));
    }
}

} // namespace

EigenDecomposition eigen_decompose(const Eigen::MatrixXd& symmetric) {
    require_square(symmetric, "eigen_decompose");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
    if (solver.info() != Eigen::Success) {
        throw Error("eigen_decompose: solver failed to converge");
    }
    return EigenDecomposition{solver.eigenvalues(), solver.eigenvectors()};
}

SelfAdjointOperator::SelfAdjointOperator(const Eigen::MatrixXd& entries) {
    require_square(entries, "SelfAdjointOperator");
    m_ = 0.5 * (entries + entries.transpose());
}

SelfAdjointOperator::SelfAdjointOperator(int dim, double diagonal_value) {
    if (dim <= 0) throw DimMismatch("SelfAdjointOperator: dim must be positive");
    m_ = diagonal_value * Eigen::MatrixXd::Identity(dim, dim);
}

SelfAdjointOperator SelfAdjointOperator::zero(int dim) { return SelfAdjointOperator(dim, 0.0); }

SelfAdjointOperator SelfAdjointOperator::identity(int dim) {
    return SelfAdjointOperator(dim, 1.0);
}

SelfAdjointOperator SelfAdjointOperator::from_diagonal(const Eigen::VectorXd& d) {
    return SelfAdjointOperator(Eigen::MatrixXd(d.asDiagonal()));
}

PsdOperator::PsdOperator(const Eigen::MatrixXd& entries) : SelfAdjointOperator(entries) {
    EigenDecomposition eig = eigen_decompose(m_);
    const double scale = std::max(1.0, std::abs(eig.values.cwiseAbs().maxCoeff()));
    const double lowest = eig.values.minCoeff();
    if (lowest < -kPsdTol * scale) {
        throw NonPsdInput("eigenvalue " + std::to_string(lowest) + " below -tol*" +
                          std::to_string(scale));
    }
    if (lowest < 0.0) {
        Eigen::VectorXd clamped = eig.values.cwiseMax(0.0);
        m_ = eig.vectors * clamped.asDiagonal() * eig.vectors.transpose();
        m_ = 0.5 * (m_ + m_.transpose());
    }
}

PsdOperator::PsdOperator(const SelfAdjointOperator& op) : PsdOperator(op.matrix()) {}

PsdOperator::PsdOperator(const Eigen::MatrixXd& entries, gram_tag)
    : SelfAdjointOperator(entries) {}

PsdOperator PsdOperator::zero(int dim) {
    return PsdOperator(Eigen::MatrixXd::Zero(dim, dim), gram_tag{});
}

PsdOperator PsdOperator::identity(int dim) {
    return PsdOperator(Eigen::MatrixXd::Identity(dim, dim), gram_tag{});
}

PsdOperator PsdOperator::from_diagonal(const Eigen::VectorXd& d) {
    if (d.minCoeff() < 0.0) {
        return PsdOperator(Eigen::MatrixXd(d.asDiagonal()));
    }
    return PsdOperator(Eigen::MatrixXd(d.asDiagonal()), gram_tag{});
}

PsdOperator PsdOperator::from_gram(const Eigen::MatrixXd& y) {
    return PsdOperator(y.transpose() * y, gram_tag{});
}

ComplexOperator::ComplexOperator(const Eigen::MatrixXcd& entries) : m_(entries) {
    if (m_.rows() != m_.cols()) {
        throw DimMismatch("ComplexOperator: matrix is " + std::to_string(m_.rows()) + "x" +
                          std::to_string(m_.cols()));
    }
}

ComplexOperator::ComplexOperator(const SelfAdjointOperator& real_part,
                                 const SelfAdjointOperator& imag_part) {
    if (real_part.dim() != imag_part.dim()) {
        throw DimMismatch("ComplexOperator: real and imaginary parts differ in size");
    }
    m_ = real_part.matrix().cast<std::complex<double>>() -
         std::complex<double>(0.0, 1.0) * imag_part.matrix().cast<std::complex<double>>();
}

ComplexOperator ComplexOperator::zero(int dim) {
    return ComplexOperator(Eigen::MatrixXcd::Zero(dim, dim));
}

GeneratorSpec GeneratorSpec::diagonal(const Eigen::VectorXd& spectrum) {
    if (spectrum.size() == 0) throw DimMismatch("GeneratorSpec: empty spectrum");
    GeneratorSpec g;
    g.diagonal_ = true;
    g.spectrum_ = spectrum;
    g.matrix_ = spectrum.asDiagonal();
    return g;
}

GeneratorSpec GeneratorSpec::dense(const Eigen::MatrixXd& matrix) {
    require_square(matrix, "GeneratorSpec");
    GeneratorSpec g;
    g.diagonal_ = false;
    g.matrix_ = matrix;
    return g;
}

int GeneratorSpec::dim() const { return static_cast<int>(matrix_.rows()); }

const Eigen::VectorXd& GeneratorSpec::spectrum() const {
    if (!diagonal_) throw Error("GeneratorSpec: dense generator has no stored spectrum");
    return spectrum_;
}

const Eigen::MatrixXd& GeneratorSpec::matrix() const { return matrix_; }

double GeneratorSpec::infinity_norm() const {
    return matrix_.cwiseAbs().rowwise().sum().maxCoeff();
}

double GeneratorSpec::spectral_abscissa() const {
    if (diagonal_) return spectrum_.maxCoeff();
    Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix_, false);
    return solver.eigenvalues().real().maxCoeff();
}

PsdOperator psd_sqrt(const PsdOperator& m) {
    EigenDecomposition eig = eigen_decompose(m.matrix());
    Eigen::VectorXd quarter = eig.values.cwiseMax(0.0).cwiseSqrt().cwiseSqrt();
    Eigen::MatrixXd y = quarter.asDiagonal() * eig.vectors.transpose();
    PsdOperator r = PsdOperator::from_gram(y);
    const double defect = (r.matrix() * r.matrix() - m.matrix()).norm();
    if (defect > kSqrtTol * std::max(1.0, m.matrix().norm())) {
        throw Error("psd_sqrt: reconstruction defect " + std::to_string(defect));
    }
    return r;
}

double det_one_plus(const SelfAdjointOperator& b) {
    EigenDecomposition eig = eigen_decompose(b.matrix());
    double log_det = 0.0;
    for (int i = 0; i < eig.values.size(); ++i) {
        if (eig.values[i] <= -1.0 + kDetTol) {
            throw SingularDeterminant("eigenvalue " + std::to_string(eig.values[i]) +
                                      " reaches -1");
        }
        log_det += std::log1p(eig.values[i]);
    }
    return std::exp(log_det);
}

int rank_eps(const SelfAdjointOperator& m, double tol) {
    if (tol <= 0.0) throw Error("rank_eps: tolerance must be positive");
    EigenDecomposition eig = eigen_decompose(m.matrix());
    const double cutoff = tol * std::max(1.0, eig.values.cwiseAbs().maxCoeff());
    int rank = 0;
    for (int i = 0; i < eig.values.size(); ++i) {
        if (std::abs(eig.values[i]) > cutoff) ++rank;
    }
    return rank;
}

Eigen::MatrixXd semigroup_apply(const GeneratorSpec& a, double t) {
    if (a.is_diagonal()) {
        return Eigen::MatrixXd((t * a.spectrum().array()).exp().matrix().asDiagonal());
    }
    return (t * a.matrix()).exp();
}

double schatten_norm(const SelfAdjointOperator& m, double p) {
    if (std::isnan(p) || p < 1.0) {
        throw InvalidOrder("schatten_norm: p = " + std::to_string(p));
    }
    EigenDecomposition eig = eigen_decompose(m.matrix());
    Eigen::VectorXd mags = eig.values.cwiseAbs();
    if (std::isinf(p)) return mags.maxCoeff();
    if (p == 1.0) return mags.sum();
    if (p == 2.0) return std::sqrt(mags.squaredNorm());
    return std::pow(mags.array().pow(p).sum(), 1.0 / p);
}

double operator_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

double simple_inverse_identity_check(const PsdOperator& a, const PsdOperator& b) {
    if (a.dim() != b.dim()) throw DimMismatch("simple_inverse_identity_check");
    const int n = a.dim();
    const Eigen::MatrixXd root = psd_sqrt(a).matrix();
    const Eigen::MatrixXd inner = root * b.matrix() * root;
    const Eigen::MatrixXd iba = Eigen::MatrixXd::Identity(n, n) + b.matrix() * a.matrix();

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(iba);
    const Eigen::MatrixXd left = a.matrix() * lu.inverse();
    const Eigen::MatrixXd right =
        root * (Eigen::MatrixXd::Identity(n, n) + inner).ldlt().solve(root);
    const double residual = (left - right).norm();

    const double det_left = lu.determinant();
    const double det_right = det_one_plus(SelfAdjointOperator(inner));
    const double det_gap = std::abs(det_left - det_right) / std::max(1.0, std::abs(det_right));
    return std::max(residual, det_gap);
}

namespace {

nlohmann::json operator_payload(const Eigen::MatrixXcd& m, bool complex_entries) {
    nlohmann::json j;
    j["dim"] = m.rows();
    std::vector<double> entries;
    entries.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            entries.push_back(m(i, k).real());
        }
    }
    j["entries"] = entries;
    j["complex"] = complex_entries;
    if (complex_entries) {
        std::vector<double> imag;
        imag.reserve(static_cast<std::size_t>(m.size()));
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index k = 0; k < m.cols(); ++k) {
                imag.push_back(m(i, k).imag());
            }
        }
        j["entries_imag"] = imag;
    }
    return j;
}

Eigen::MatrixXd entries_to_matrix(const nlohmann::json& j, const char* key) {
    const int dim = j.at("dim").get<int>();
    if (dim <= 0) throw ConfigParseError("operator dim must be positive");
    const auto& entries = j.at(key);
    if (!entries.is_array() || static_cast<int>(entries.size()) != dim * dim) {
        throw ConfigParseError(std::string("operator field '") + key + "' must hold dim^2 numbers");
    }
    Eigen::MatrixXd m(dim, dim);
    int pos = 0;
    for (int i = 0; i < dim; ++i) {
        for (int k = 0; k < dim; ++k) {
            m(i, k) = entries.at(pos++).get<double>();
        }
    }
    return m;
}

} // namespace

std::string to_json(const SelfAdjointOperator& op) {
    return operator_payload(op.matrix().cast<std::complex<double>>(), false).dump();
}

std::string to_json(const ComplexOperator& op) {
    return operator_payload(op.matrix(), true).dump();
}

SelfAdjointOperator self_adjoint_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParseError(e.what());
    }
    try {
        if (j.value("complex", false)) {
            throw ConfigParseError("expected a real operator");
        }
        return SelfAdjointOperator(entries_to_matrix(j, "entries"));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParseError(e.what());
    }
}

ComplexOperator complex_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParseError(e.what());
    }
    try {
        Eigen::MatrixXd re = entries_to_matrix(j, "entries");
        if (!j.value("complex", false)) {
            return ComplexOperator(re.cast<std::complex<double>>());
        }
        Eigen::MatrixXd im = entries_to_matrix(j, "entries_imag");
        return ComplexOperator(re.cast<std::complex<double>>() +
                               std::complex<double>(0.0, 1.0) *
                                   im.cast<std::complex<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParseError(e.what());
    }
}

} // namespace wishart
