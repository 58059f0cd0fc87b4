#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "wishart/errors.hpp"

namespace wishart {

// Tolerances shared by the spectral routines. All spectral operations go
// through one eigendecomposition helper so that sqrt / det / rank / norms
// are mutually consistent.
inline constexpr double kPsdTol = 1e-10;  // relative PSD slack on construction
inline constexpr double kSqrtTol = 1e-10; // Frobenius reconstruction tolerance
inline constexpr double kDetTol = 1e-12;  // singularity guard for det(I + b)
inline constexpr double kExpTol = 1e-12;  // backward error target of expm

class SelfAdjointOperator;
class PsdOperator;

// Canonical spectral routine: every eigenvalue-based operation in the
// library uses this decomposition (Eigen's self-adjoint solver, ascending
// eigenvalues).
struct EigenDecomposition {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // columns match values
};
EigenDecomposition eigen_decompose(const Eigen::MatrixXd& symmetric);

// Real symmetric N x N compression of a self-adjoint operator onto the
// first N vectors of a fixed orthonormal basis. Entries are exactly
// symmetric: the constructor stores (m + m^T)/2.
class SelfAdjointOperator {
public:
    explicit SelfAdjointOperator(const Eigen::MatrixXd& entries);
    SelfAdjointOperator(int dim, double diagonal_value); // diagonal_value * I

    static SelfAdjointOperator zero(int dim);
    static SelfAdjointOperator identity(int dim);
    static SelfAdjointOperator from_diagonal(const Eigen::VectorXd& d);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& matrix() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

protected:
    Eigen::MatrixXd m_;
};

// Positive semidefinite operator. Construction clamps small negative
// eigenvalues (within kPsdTol relative slack) to zero and rejects anything
// more negative with NonPsdInput.
class PsdOperator : public SelfAdjointOperator {
public:
    explicit PsdOperator(const Eigen::MatrixXd& entries);
    explicit PsdOperator(const SelfAdjointOperator& op);

    static PsdOperator zero(int dim);
    static PsdOperator identity(int dim);
    static PsdOperator from_diagonal(const Eigen::VectorXd& d);
    // Gram construction y^T y; PSD by construction, no spectral clamping.
    static PsdOperator from_gram(const Eigen::MatrixXd& y);

private:
    struct gram_tag {};
    PsdOperator(const Eigen::MatrixXd& entries, gram_tag);
};

// Complex N x N operator; houses elements of S(H) + i S(H) such as the
// transform argument u - iv and complex Riccati states. No symmetry is
// imposed, but building one as u - iv from self-adjoint parts yields a
// complex-symmetric matrix (C^T = C).
class ComplexOperator {
public:
    explicit ComplexOperator(const Eigen::MatrixXcd& entries);
    ComplexOperator(const SelfAdjointOperator& real_part,
                    const SelfAdjointOperator& imag_part); // real - i*imag

    static ComplexOperator zero(int dim);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXcd& matrix() const { return m_; }

private:
    Eigen::MatrixXcd m_;
};

// The semigroup generator A: either a diagonal spectrum (a_j) or a dense,
// not necessarily symmetric, real matrix.
class GeneratorSpec {
public:
    static GeneratorSpec diagonal(const Eigen::VectorXd& spectrum);
    static GeneratorSpec dense(const Eigen::MatrixXd& matrix);

    bool is_diagonal() const { return diagonal_; }
    int dim() const;
    const Eigen::VectorXd& spectrum() const; // diagonal variant only
    const Eigen::MatrixXd& matrix() const;   // dense N x N view (both variants)
    double infinity_norm() const;
    // largest real part of the spectrum (exact for diagonal, eigenvalue
    // estimate for dense)
    double spectral_abscissa() const;

private:
    GeneratorSpec() = default;
    bool diagonal_ = true;
    Eigen::VectorXd spectrum_;
    Eigen::MatrixXd matrix_;
};

// ---------------------------------------------------------------------------
// operations

// Symmetric PSD square root via eigendecomposition, negative eigenvalues
// clamped to zero. r satisfies ||r*r - m||_F <= kSqrtTol * ||m||_F.
PsdOperator psd_sqrt(const PsdOperator& m);

// det(I + b) = prod(1 + lambda_k), evaluated as exp(sum log1p(lambda_k)).
// Throws SingularDeterminant if some eigenvalue is <= -1 + kDetTol.
double det_one_plus(const SelfAdjointOperator& b);

// Number of eigenvalues with |lambda| > tol * max(1, ||m||).
int rank_eps(const SelfAdjointOperator& m, double tol);

// e^{tA}: elementwise exponential of the spectrum for diagonal generators,
// scaling-and-squaring (Pade class) for dense ones.
Eigen::MatrixXd semigroup_apply(const GeneratorSpec& a, double t);

// Schatten p-norm (sum |lambda|^p)^(1/p); p = infinity gives the operator
// norm. Throws InvalidOrder for p < 1.
double schatten_norm(const SelfAdjointOperator& m, double p);
double operator_norm(const Eigen::MatrixXd& m); // largest singular value

// Residual of the identity A(I+BA)^{-1} = sqrt(A)(I + sqrt(A) B sqrt(A))^{-1} sqrt(A),
// combined with the relative gap between det(I+BA) and det(I + sqrt(A) B sqrt(A)).
// Returns the larger of the Frobenius residual and the determinant gap, so a
// small return value certifies both statements.
double simple_inverse_identity_check(const PsdOperator& a, const PsdOperator& b);

// ---------------------------------------------------------------------------
// serialization (JSON object {"dim", "entries", "complex", "entries_imag"})

std::string to_json(const SelfAdjointOperator& op);
std::string to_json(const ComplexOperator& op);
SelfAdjointOperator self_adjoint_from_json(const std::string& text);
ComplexOperator complex_from_json(const std::string& text);

} // namespace wishart
