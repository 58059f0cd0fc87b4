#pragma once

#include <string>

#include "wishart/operators.hpp"

namespace wishart {

// Parameters (alpha, A, Q, N) of one Wishart model
// dX = (alpha Q + X A + A* X) dt + sqrt(X) dW sqrt(Q) + sqrt(Q) dW* sqrt(X).
// alpha is stored as a real and gated to integers only where a simulation
// construction requires it, so transform formulas stay evaluable at
// non-integer alpha.
struct ModelParams {
    int dim;
    double alpha;
    GeneratorSpec generator;
    PsdOperator q;
    std::string label;

    ModelParams(int dim_, double alpha_, GeneratorSpec generator_, PsdOperator q_,
                std::string label_ = "");

    // true when the generator is diagonal and Q is diagonal in the same basis
    bool jointly_diagonal() const;
};

// Initial state x0 with a declared rank bound (rank_eps(x0, kPsdTol) must
// not exceed it).
struct InitialState {
    PsdOperator x0;
    int declared_rank;

    InitialState(PsdOperator x0_, int declared_rank_);
};

// Q_t = int_0^t e^{sA*} Q e^{sA} ds.
struct IntegratedCovariance {
    double t;
    PsdOperator qt;
};

struct AdmissibilityReport {
    bool q_injective;
    bool alpha_integer;
    bool rank_ok;
    bool admissible_for_simulation;
};

// Closed form per diagonal mode when the model is jointly diagonal,
// adaptive quadrature of the matrix integrand otherwise (result symmetrized
// and PSD-clamped). Throws NegativeTime for t < 0.
IntegratedCovariance integrated_covariance(const ModelParams& p, double t);

// trace(Q_t); finite at every truncation level, reported so users can watch
// growth in N.
double integrability_value(const ModelParams& p, double t);

// Admissibility per the existence characterization: simulation needs
// alpha integer and rank(x0) <= alpha; strict mode additionally demands Q
// injective (which makes the rank statement sharp).
AdmissibilityReport validate_parameters(const ModelParams& p, const InitialState& x0,
                                        bool strict = false);

// Measurable factorization: returns the alpha x N matrix y0 whose rows are
// sqrt(lambda_k) h_k^T over the top-alpha eigenpairs, eigenvalues sorted
// decreasing, ties broken by the lexicographic sign convention (first
// nonzero eigenvector component positive). y0^T y0 reconstructs x0.
Eigen::MatrixXd factor_initial(const InitialState& x0, int alpha);

// Scalar helper for the diagonal closed form: integral of q e^{2as} over
// [0, t], with the a -> 0 branch evaluated via expm1.
double diagonal_qt_entry(double q, double a, double t);

// Parse a model from its JSON configuration object:
// {"dim", "alpha", "generator": {"type": "diagonal"|"dense", "values": ...},
//  "q": operator-object | {"type": "diagonal", "values": ...} | {"type": "identity"},
//  "label"}.
ModelParams model_from_json(const std::string& text);
std::string to_json(const ModelParams& p);

} // namespace wishart
