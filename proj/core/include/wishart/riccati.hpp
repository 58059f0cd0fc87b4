#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "wishart/model.hpp"

namespace wishart {

// Solution family psi(t, u) of the operator Riccati equation
//   d psi / dt = -(1/2) (psi + psi^T) Q (psi + psi^T) + A psi + psi A*,
//   psi(0, u) = u,
// where ^T transposes without conjugating. The explicit forms below cover
// the PSD, sign-definite imaginary, and jointly diagonal regimes; the RK4
// integrator is the independent cross-check for everything else.

// psi(t, B) = e^{tA} sqrt(B) (I + 2 sqrt(B) Q_t sqrt(B))^{-1} sqrt(B) e^{tA*}
// for PSD B. Post-checked against the norm bounds
//   ||psi|| <= ||B|| ||e^{tA}||^2,  ||psi Q||_1 <= ||B|| ||e^{tA} sqrt(Q)||_2^2.
PsdOperator psi_laplace(const ModelParams& p, const PsdOperator& b, double t);

// psi(t, -iv) for sign-definite v:
//   e^{tA} sqrt(|v|) (i sign(v) I + 2 sqrt(|v|) Q_t sqrt(|v|))^{-1} sqrt(|v|) e^{tA*}.
// Real part PSD, imaginary part self-adjoint; NotSignDefinite when neither
// v nor -v is PSD.
ComplexOperator psi_fourier(const ModelParams& p, const SelfAdjointOperator& v, double t);

// Jointly diagonal models evolve each mode independently:
//   psi_n(t) = b_n e^{2 a_n t} / (1 + 2 b_n qt_n),
// qt_n the scalar integrated covariance, evaluated with expm1 so the
// a_n -> 0 branch degrades to b_n / (1 + 2 b_n q_n t). Valid for Re b_n >= 0;
// NotJointlyDiagonal unless the model is diagonal.
ComplexOperator psi_diagonal(const ModelParams& p, const Eigen::VectorXcd& b_diag, double t);

// Right-hand side of the flow equation at a given state.
Eigen::MatrixXcd riccati_rhs(const ModelParams& p, const Eigen::MatrixXcd& psi);

enum class RiccatiMethod { ExplicitLaplace, ExplicitFourier, ExplicitDiagonal, NumericODE };

struct RiccatiSolution {
    std::vector<double> t_grid;
    std::vector<Eigen::MatrixXcd> psi_values;
    Eigen::MatrixXcd initial;
    RiccatiMethod method = RiccatiMethod::NumericODE;

    const Eigen::MatrixXcd& at(double t) const; // TimeNotOnGrid on a miss
};

// Classical RK4 with `steps` uniform steps on [0, t]; StepOverflow once an
// iterate norm passes 1e12 (finite-time blow-up guard for initial values
// outside the globally solvable regimes).
RiccatiSolution riccati_integrate(const ModelParams& p, const ComplexOperator& b, double t,
                                  int steps);

// Solution family evaluated at (time, initial value).
using PsiFamily = std::function<Eigen::MatrixXcd(double, const Eigen::MatrixXcd&)>;

// Central-difference defect of a candidate solution family at (t, b):
//   || (psi(t+h, b) - psi(t-h, b)) / (2h) - rhs(psi(t, b)) ||_F.
// Second order in h; the explicit families stay below c h^2 + 1e-9.
double riccati_residual(const ModelParams& p, const PsiFamily& psi_fn,
                        const Eigen::MatrixXcd& b, double t, double h);

// Semiflow defect || psi(s, psi(t, u)) - psi(s + t, u) ||_F for the explicit
// PSD family; contract <= 1e-10 (1 + ||u||).
double flow_check(const ModelParams& p, const PsdOperator& u, double s, double t);

// alpha * int_0^t trace(psi(s) Q) ds along the solution grid (composite
// Simpson on uniform grids, trapezoid otherwise); for real PSD paths this
// reproduces (alpha/2) log det(I + 2 sqrt(B) Q_t sqrt(B)).
std::complex<double> phi_of(const ModelParams& p, const RiccatiSolution& psi_path);

// CSV rows t,i,j,re,im over the grid, and a JSON rendering with the same
// payload plus the method tag.
void export_riccati_csv(const RiccatiSolution& sol, const std::string& path);
std::string riccati_to_json(const RiccatiSolution& sol);

} // namespace wishart
