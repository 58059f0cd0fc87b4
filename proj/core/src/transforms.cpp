#include "wishart/transforms.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>

#include "wishart/quadrature.hpp"
#include "wishart/riccati.hpp"
#include "wishart/serialize.hpp"

namespace wishart {

namespace {

using Complex = std::complex<double>;
constexpr Complex kImag{0.0, 1.0};

double complex_operator_norm(const Eigen::MatrixXcd& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues()(0);
}

double complex_condition(const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    const double smallest = svd.singularValues()(svd.singularValues().size() - 1);
    if (smallest == 0.0) return std::numeric_limits<double>::infinity();
    return svd.singularValues()(0) / smallest;
}

bool is_zero_operator(const SelfAdjointOperator& op) {
    return op.matrix().cwiseAbs().maxCoeff() == 0.0;
}

bool is_psd_within_tol(const SelfAdjointOperator& op) {
    EigenDecomposition eig = eigen_decompose(op.matrix());
    const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
    return eig.values.minCoeff() >= -kPsdTol * scale;
}

bool is_diagonal_within_tol(const Eigen::MatrixXd& m) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    Eigen::MatrixXd off = m;
    off.diagonal().setZero();
    return off.cwiseAbs().maxCoeff() <= 1e-14 * scale;
}

void require_integer_alpha(double alpha, const char* who) {
    if (std::abs(alpha - std::round(alpha)) > 1e-12) {
        throw NonIntegerAlpha(std::string(who) + ": alpha = " + std::to_string(alpha));
    }
}

// d/ds Q_s = e^{sA*} Q e^{sA}
Eigen::MatrixXd covariance_rate(const ModelParams& p, double s) {
    const Eigen::MatrixXd es = semigroup_apply(p.generator, s);
    return es.transpose() * p.q.matrix() * es;
}

} // namespace

const char* regime_name(TransformRegime r) {
    switch (r) {
    case TransformRegime::LaplacePos: return "LaplacePos";
    case TransformRegime::FourierSigned: return "FourierSigned";
    case TransformRegime::JointlyDiagonal: return "JointlyDiagonal";
    case TransformRegime::MixedSmallT: return "MixedSmallT";
    case TransformRegime::ExtendedNegative: return "ExtendedNegative";
    }
    return "MixedSmallT";
}

TestFunctional::TestFunctional(SelfAdjointOperator u_, SelfAdjointOperator v_,
                               TransformRegime regime_)
    : u(std::move(u_)), v(std::move(v_)), regime(regime_) {
    if (u.dim() != v.dim()) throw DimMismatch("TestFunctional: u and v differ in size");
    switch (regime) {
    case TransformRegime::LaplacePos:
        if (!is_zero_operator(v)) throw Error("TestFunctional: LaplacePos requires v = 0");
        if (!is_psd_within_tol(u)) throw NonPsdInput("TestFunctional: LaplacePos requires PSD u");
        break;
    case TransformRegime::FourierSigned:
        if (!is_zero_operator(u)) throw Error("TestFunctional: FourierSigned requires u = 0");
        if (!is_psd_within_tol(v) && !is_psd_within_tol(SelfAdjointOperator(-v.matrix()))) {
            throw NotSignDefinite("TestFunctional: FourierSigned requires v or -v PSD");
        }
        break;
    case TransformRegime::JointlyDiagonal:
        if (!is_diagonal_within_tol(u.matrix()) || !is_diagonal_within_tol(v.matrix())) {
            throw NotJointlyDiagonal("TestFunctional: JointlyDiagonal requires diagonal u and v");
        }
        if (u.matrix().diagonal().minCoeff() < -kPsdTol) {
            throw NonPsdInput("TestFunctional: JointlyDiagonal requires u >= 0");
        }
        break;
    case TransformRegime::ExtendedNegative:
        if (!is_zero_operator(v)) throw Error("TestFunctional: ExtendedNegative requires v = 0");
        if (!is_psd_within_tol(SelfAdjointOperator(-u.matrix()))) {
            throw NonPsdInput("TestFunctional: ExtendedNegative requires -u PSD");
        }
        break;
    case TransformRegime::MixedSmallT:
        break;
    }
}

TestFunctional TestFunctional::laplace(const PsdOperator& u) {
    return TestFunctional(u, SelfAdjointOperator::zero(u.dim()), TransformRegime::LaplacePos);
}

TestFunctional TestFunctional::fourier(const SelfAdjointOperator& v) {
    return TestFunctional(SelfAdjointOperator::zero(v.dim()), v,
                          TransformRegime::FourierSigned);
}

TransformResult laplace_closed(const ModelParams& p, const InitialState& x0,
                               const PsdOperator& u, double t) {
    if (t < 0.0) throw NegativeTime("laplace_closed: t = " + std::to_string(t));
    if (u.dim() != p.dim || x0.x0.dim() != p.dim) throw DimMismatch("laplace_closed");
    const int n = p.dim;

    const Eigen::MatrixXd root = psd_sqrt(u).matrix();
    const Eigen::MatrixXd qt = integrated_covariance(p, t).qt.matrix();
    const Eigen::MatrixXd inner = root * qt * root;
    EigenDecomposition inner_eig = eigen_decompose(inner);

    double log_det = 0.0;
    for (int i = 0; i < n; ++i) {
        log_det += std::log1p(2.0 * std::max(0.0, inner_eig.values[i]));
    }

    const Eigen::MatrixXd resolvent = Eigen::MatrixXd::Identity(n, n) + 2.0 * inner;
    const Eigen::MatrixXd et = semigroup_apply(p.generator, t);
    const Eigen::MatrixXd psi = et * (root * resolvent.ldlt().solve(root)) * et.transpose();
    const double trace_term = (psi * x0.x0.matrix()).trace();

    TransformResult result;
    result.regime = TransformRegime::LaplacePos;
    result.psi_trace_term = trace_term;
    result.phi_term = 0.5 * p.alpha * log_det;
    result.value = std::exp(-trace_term - 0.5 * p.alpha * log_det);
    const double lo = 1.0 + 2.0 * std::max(0.0, inner_eig.values.minCoeff());
    const double hi = 1.0 + 2.0 * std::max(0.0, inner_eig.values.maxCoeff());
    result.diagnostics.resolvent_condition = hi / lo;
    return result;
}

TransformResult laplace_extended(const ModelParams& p, const InitialState& x0,
                                 const SelfAdjointOperator& u, double t) {
    if (t < 0.0) throw NegativeTime("laplace_extended: t = " + std::to_string(t));
    if (u.dim() != p.dim || x0.x0.dim() != p.dim) throw DimMismatch("laplace_extended");
    require_integer_alpha(p.alpha, "laplace_extended");
    if (!is_psd_within_tol(SelfAdjointOperator(-u.matrix()))) {
        throw NonPsdInput("laplace_extended: -u must be PSD");
    }
    const int n = p.dim;
    const PsdOperator c(-u.matrix());
    const Eigen::MatrixXd qt = integrated_covariance(p, t).qt.matrix();

    const double u_norm = operator_norm(u.matrix());
    const double qt_norm = operator_norm(qt);
    TransformDiagnostics diagnostics;
    diagnostics.ball_margin = 0.5 - u_norm * qt_norm;
    // the weaker bound ||u|| <= ||Q_t|| / 2 as stated alongside the proof
    diagnostics.alt_ball_margin = 0.5 * qt_norm - u_norm;
    if (diagnostics.ball_margin <= 0.0) {
        throw BallConditionViolated("laplace_extended: ||u|| ||Q_t|| = " +
                                    std::to_string(u_norm * qt_norm));
    }

    const Eigen::MatrixXd root = psd_sqrt(c).matrix();
    const Eigen::MatrixXd inner = root * qt * root;
    EigenDecomposition inner_eig = eigen_decompose(inner);
    double log_det = 0.0;
    for (int i = 0; i < n; ++i) {
        const double shifted = -2.0 * inner_eig.values[i];
        if (shifted <= -1.0 + kDetTol) {
            throw SingularDeterminant("laplace_extended: resolvent eigenvalue at " +
                                      std::to_string(shifted));
        }
        log_det += std::log1p(shifted);
    }

    const Eigen::MatrixXd resolvent = Eigen::MatrixXd::Identity(n, n) - 2.0 * inner;
    const Eigen::MatrixXd et = semigroup_apply(p.generator, t);
    const Eigen::MatrixXd psi = et * (root * resolvent.ldlt().solve(root)) * et.transpose();
    // sign(u) = -1 flips the trace term relative to the PSD regime
    const double trace_term = -(psi * x0.x0.matrix()).trace();

    TransformResult result;
    result.regime = TransformRegime::ExtendedNegative;
    result.psi_trace_term = trace_term;
    result.phi_term = 0.5 * p.alpha * log_det;
    result.value = std::exp(-trace_term - 0.5 * p.alpha * log_det);
    const double lo = 1.0 - 2.0 * inner_eig.values.maxCoeff();
    const double hi = 1.0 - 2.0 * std::min(0.0, inner_eig.values.minCoeff());
    result.diagnostics = diagnostics;
    result.diagnostics.resolvent_condition = hi / lo;
    return result;
}

TransformResult fourier_trace_cf_detail(const ModelParams& p, const InitialState& x0,
                                        double r, double t) {
    if (t < 0.0) throw NegativeTime("fourier_trace_cf: t = " + std::to_string(t));
    if (x0.x0.dim() != p.dim) throw DimMismatch("fourier_trace_cf");
    const int n = p.dim;

    TransformResult result;
    result.regime = TransformRegime::FourierSigned;
    if (r == 0.0) {
        result.value = 1.0;
        result.diagnostics.resolvent_condition = 1.0;
        return result;
    }

    const auto resolvent_at = [&](double s) -> Eigen::MatrixXcd {
        const Eigen::MatrixXd qs = integrated_covariance(p, s).qt.matrix();
        return kImag * Eigen::MatrixXcd::Identity(n, n) +
               2.0 * r * qs.cast<Complex>();
    };

    const Eigen::MatrixXcd m_t = resolvent_at(t);
    const Eigen::MatrixXd et = semigroup_apply(p.generator, t);
    const Eigen::MatrixXcd psi =
        r * et.cast<Complex>() * m_t.partialPivLu().solve(et.transpose().cast<Complex>());
    const Complex trace_term = (psi * x0.x0.matrix().cast<Complex>()).trace();

    Complex phi = 0.0;
    if (p.alpha > 0.0) {
        phi = p.alpha * integrate(
                            [&](double s) -> Complex {
                                const Eigen::MatrixXcd m = resolvent_at(s);
                                const Eigen::MatrixXcd rate =
                                    covariance_rate(p, s).cast<Complex>();
                                return r * m.partialPivLu().solve(rate).trace();
                            },
                            0.0, t);
    }

    result.psi_trace_term = trace_term;
    result.phi_term = phi;
    result.value = std::exp(-trace_term - phi);
    result.diagnostics.resolvent_condition = complex_condition(m_t);
    return result;
}

std::complex<double> fourier_trace_cf(const ModelParams& p, const InitialState& x0, double r,
                                      double t) {
    return fourier_trace_cf_detail(p, x0, r, t).value;
}

BallConstants ball_constants(const GeneratorSpec& a, double t) {
    BallConstants c;
    c.omega = a.spectral_abscissa();
    if (a.is_diagonal()) {
        c.m = 1.0;
        return c;
    }
    c.m = 1.0;
    const int grid = 64;
    for (int k = 0; k <= grid; ++k) {
        const double s = t * k / grid;
        const double bound = operator_norm(semigroup_apply(a, s)) * std::exp(-c.omega * s);
        c.m = std::max(c.m, bound);
    }
    return c;
}

double BallConstants::radius(double q_norm, double t) const {
    if (q_norm <= 0.0 || t <= 0.0) return std::numeric_limits<double>::infinity();
    const double growth =
        omega == 0.0 ? 2.0 * t : std::abs(std::expm1(2.0 * omega * t)) / std::abs(omega);
    return 1.0 / (m * m * growth * q_norm);
}

TransformResult mixed_transform(const ModelParams& p, const InitialState& x0,
                                const SelfAdjointOperator& u, const SelfAdjointOperator& v,
                                double t) {
    if (t < 0.0) throw NegativeTime("mixed_transform: t = " + std::to_string(t));
    if (u.dim() != p.dim || v.dim() != p.dim || x0.x0.dim() != p.dim) {
        throw DimMismatch("mixed_transform");
    }
    require_integer_alpha(p.alpha, "mixed_transform");
    const int n = p.dim;

    const double argument_norm = std::sqrt(std::pow(operator_norm(u.matrix()), 2) +
                                           std::pow(operator_norm(v.matrix()), 2));
    const BallConstants constants = ball_constants(p.generator, t);
    const double radius = constants.radius(operator_norm(p.q.matrix()), t);
    TransformDiagnostics diagnostics;
    diagnostics.ball_margin = radius - argument_norm;
    diagnostics.alt_ball_margin = diagnostics.ball_margin;
    if (!(argument_norm < radius)) {
        throw BallConditionViolated("mixed_transform: argument norm " +
                                    std::to_string(argument_norm) + " outside radius " +
                                    std::to_string(radius));
    }

    const Eigen::MatrixXcd w = u.matrix().cast<Complex>() - kImag * v.matrix().cast<Complex>();
    const auto resolvent_at = [&](double s) -> Eigen::MatrixXcd {
        const Eigen::MatrixXd qs = integrated_covariance(p, s).qt.matrix();
        return Eigen::MatrixXcd::Identity(n, n) + 2.0 * w * qs.cast<Complex>();
    };

    const Eigen::MatrixXcd m_t = resolvent_at(t);
    const Eigen::MatrixXd et = semigroup_apply(p.generator, t);
    const Eigen::MatrixXcd psi = et.cast<Complex>() *
                                 m_t.partialPivLu().solve(w * et.transpose().cast<Complex>());
    const Complex trace_term = (psi * x0.x0.matrix().cast<Complex>()).trace();

    Complex phi = 0.0;
    if (p.alpha > 0.0) {
        phi = p.alpha * integrate(
                            [&](double s) -> Complex {
                                const Eigen::MatrixXcd m = resolvent_at(s);
                                const Eigen::MatrixXcd rate =
                                    covariance_rate(p, s).cast<Complex>();
                                return m.partialPivLu().solve(w * rate).trace();
                            },
                            0.0, t);
    }

    // Neumann cross-check of the final-time inverse
    const Eigen::MatrixXcd qt = integrated_covariance(p, t).qt.matrix().cast<Complex>();
    const Eigen::MatrixXcd step = -2.0 * w * qt;
    const double ratio = complex_operator_norm(step);
    Eigen::MatrixXcd series = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(n, n);
    constexpr int kNeumannMax = 64;
    if (ratio < 1.0) {
        double tail = ratio / (1.0 - ratio);
        for (int k = 1; k <= kNeumannMax && tail >= 1e-12; ++k) {
            power = power * step;
            series += power;
            tail *= ratio;
        }
        diagnostics.neumann_gap = (series - m_t.partialPivLu().inverse()).norm();
    } else {
        diagnostics.neumann_gap = std::numeric_limits<double>::infinity();
    }
    diagnostics.resolvent_condition = complex_condition(m_t);

    TransformResult result;
    result.regime = TransformRegime::MixedSmallT;
    result.psi_trace_term = trace_term;
    result.phi_term = phi;
    result.value = std::exp(-trace_term - phi);
    result.diagnostics = diagnostics;
    return result;
}

namespace {

TransformResult fourier_signed(const ModelParams& p, const InitialState& x0,
                               const SelfAdjointOperator& v, double t) {
    TransformResult result;
    result.regime = TransformRegime::FourierSigned;
    if (is_zero_operator(v)) {
        result.value = 1.0;
        result.diagnostics.resolvent_condition = 1.0;
        return result;
    }

    EigenDecomposition eig = eigen_decompose(v.matrix());
    const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
    double sign;
    if (eig.values.minCoeff() >= -kPsdTol * scale) {
        sign = 1.0;
    } else if (eig.values.maxCoeff() <= kPsdTol * scale) {
        sign = -1.0;
    } else {
        throw NotSignDefinite("fourier evaluation: v is indefinite");
    }
    const int n = p.dim;
    const Eigen::MatrixXd root = psd_sqrt(PsdOperator(sign * v.matrix())).matrix();
    const Eigen::MatrixXcd rootc = root.cast<Complex>();

    const auto resolvent_at = [&](double s) -> Eigen::MatrixXcd {
        const Eigen::MatrixXd qs = integrated_covariance(p, s).qt.matrix();
        return Complex(0.0, sign) * Eigen::MatrixXcd::Identity(n, n) +
               2.0 * (root * qs * root).cast<Complex>();
    };

    const ComplexOperator psi = psi_fourier(p, v, t);
    const Complex trace_term = (psi.matrix() * x0.x0.matrix().cast<Complex>()).trace();

    Complex phi = 0.0;
    if (p.alpha > 0.0) {
        phi = p.alpha * integrate(
                            [&](double s) -> Complex {
                                const Eigen::MatrixXcd m = resolvent_at(s);
                                const Eigen::MatrixXcd rate =
                                    (root * covariance_rate(p, s) * root).cast<Complex>();
                                return m.partialPivLu().solve(rate).trace();
                            },
                            0.0, t);
    }

    result.psi_trace_term = trace_term;
    result.phi_term = phi;
    result.value = std::exp(-trace_term - phi);
    result.diagnostics.resolvent_condition = complex_condition(resolvent_at(t));
    return result;
}

TransformResult jointly_diagonal_transform(const ModelParams& p, const InitialState& x0,
                                           const SelfAdjointOperator& u,
                                           const SelfAdjointOperator& v, double t) {
    if (!p.jointly_diagonal()) {
        throw NotJointlyDiagonal("jointly diagonal evaluation needs a diagonal model");
    }
    Eigen::VectorXcd b(p.dim);
    for (int j = 0; j < p.dim; ++j) b[j] = Complex(u(j, j), -v(j, j));

    const ComplexOperator psi_t = psi_diagonal(p, b, t);
    const Complex trace_term =
        (psi_t.matrix() * x0.x0.matrix().cast<Complex>()).trace();

    Complex phi = 0.0;
    if (p.alpha > 0.0) {
        const Eigen::VectorXcd modes = integrate(
            [&](double s) -> Eigen::VectorXcd {
                return psi_diagonal(p, b, s).matrix().diagonal();
            },
            0.0, t);
        for (int j = 0; j < p.dim; ++j) phi += p.alpha * p.q(j, j) * modes[j];
    }

    TransformResult result;
    result.regime = TransformRegime::JointlyDiagonal;
    result.psi_trace_term = trace_term;
    result.phi_term = phi;
    result.value = std::exp(-trace_term - phi);
    double condition = 1.0;
    for (int j = 0; j < p.dim; ++j) {
        const double qt = diagonal_qt_entry(p.q(j, j), p.generator.spectrum()[j], t);
        condition = std::max(condition, std::abs(1.0 + 2.0 * b[j] * qt));
    }
    result.diagnostics.resolvent_condition = condition;
    return result;
}

} // namespace

TransformResult evaluate(const ModelParams& p, const InitialState& x0, const TestFunctional& f,
                         double t) {
    switch (f.regime) {
    case TransformRegime::LaplacePos:
        return laplace_closed(p, x0, PsdOperator(f.u), t);
    case TransformRegime::FourierSigned:
        return fourier_signed(p, x0, f.v, t);
    case TransformRegime::JointlyDiagonal:
        return jointly_diagonal_transform(p, x0, f.u, f.v, t);
    case TransformRegime::MixedSmallT:
        return mixed_transform(p, x0, f.u, f.v, t);
    case TransformRegime::ExtendedNegative:
        return laplace_extended(p, x0, f.u, t);
    }
    throw Error("evaluate: unknown regime");
}

double projected_laplace(const ModelParams& p, const InitialState& x0, const PsdOperator& u,
                         const Eigen::MatrixXd& basis, double t) {
    if (t < 0.0) throw NegativeTime("projected_laplace: t = " + std::to_string(t));
    const int k = static_cast<int>(basis.cols());
    if (basis.rows() != p.dim || u.dim() != k) throw DimMismatch("projected_laplace");
    const Eigen::MatrixXd gram = basis.transpose() * basis;
    if ((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-12) {
        throw NonOrthonormalBasis("projected_laplace: basis columns are not orthonormal");
    }

    const Eigen::MatrixXd qt = integrated_covariance(p, t).qt.matrix();
    const Eigen::MatrixXd et = semigroup_apply(p.generator, t);
    const Eigen::MatrixXd compressed_qt = basis.transpose() * qt * basis;
    const Eigen::MatrixXd compressed_mean =
        basis.transpose() * et.transpose() * x0.x0.matrix() * et * basis;

    const Eigen::MatrixXd iqu =
        Eigen::MatrixXd::Identity(k, k) + 2.0 * compressed_qt * u.matrix();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(iqu);
    const double det = lu.determinant();
    if (det <= 0.0) throw SingularDeterminant("projected_laplace: det(I + 2 P*QtP u) <= 0");
    const double trace_term = (compressed_mean * u.matrix() * lu.inverse()).trace();
    const double value = std::pow(det, -0.5 * p.alpha) * std::exp(-trace_term);

    // consistency with the ambient closed form on the embedded operator
    const PsdOperator embedded(basis * u.matrix() * basis.transpose());
    const double ambient = laplace_closed(p, x0, embedded, t).value.real();
    if (std::abs(value - ambient) > 1e-10 * std::max(1.0, std::abs(ambient))) {
        throw Error("projected_laplace: compressed and ambient evaluations disagree by " +
                    std::to_string(std::abs(value - ambient)));
    }
    return value;
}

FiniteRankTransform finite_rank_example_transform(
    const ModelParams& p, const Eigen::VectorXd& x_weights, const Eigen::MatrixXd& h_vectors,
    const Eigen::VectorXd& u_weights, const Eigen::MatrixXd& g_vectors, double t) {
    if (t < 0.0) throw NegativeTime("finite_rank_example_transform: t = " + std::to_string(t));
    const int n = static_cast<int>(x_weights.size());
    const int m = static_cast<int>(u_weights.size());
    if (h_vectors.rows() != p.dim || h_vectors.cols() != n || g_vectors.rows() != p.dim ||
        g_vectors.cols() != m) {
        throw DimMismatch("finite_rank_example_transform");
    }
    for (const auto* frame : {&h_vectors, &g_vectors}) {
        const Eigen::MatrixXd gram = frame->transpose() * (*frame);
        if ((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() >
            1e-12) {
            throw NonOrthonormalBasis("finite_rank_example_transform: system not orthonormal");
        }
    }
    if (x_weights.minCoeff() < 0.0 || u_weights.minCoeff() < 0.0) {
        throw NonPsdInput("finite_rank_example_transform: weights must be >= 0");
    }
    require_integer_alpha(p.alpha, "finite_rank_example_transform");

    const Eigen::VectorXd root_u = u_weights.cwiseSqrt();
    const auto qhat_at = [&](double s) -> Eigen::MatrixXd {
        const Eigen::MatrixXd qs = integrated_covariance(p, s).qt.matrix();
        Eigen::MatrixXd qhat = g_vectors.transpose() * qs * g_vectors;
        return root_u.asDiagonal() * qhat * root_u.asDiagonal();
    };

    const Eigen::MatrixXd qhat = qhat_at(t);
    const Eigen::MatrixXd et = semigroup_apply(p.generator, t);
    // overlaps <h_i, e^{tA} g_j>, weighted by x and sqrt(u) on either side
    const Eigen::MatrixXd overlap = h_vectors.transpose() * et * g_vectors;
    const Eigen::MatrixXd weighted = root_u.asDiagonal() *
                                     (overlap.transpose() * x_weights.asDiagonal() * overlap) *
                                     root_u.asDiagonal();

    FiniteRankTransform result;
    {
        const Eigen::MatrixXd r = Eigen::MatrixXd::Identity(m, m) + 2.0 * qhat;
        const double det = det_one_plus(SelfAdjointOperator(2.0 * qhat));
        const double trace_term = r.ldlt().solve(weighted).trace();
        result.laplace = std::pow(det, -0.5 * p.alpha) * std::exp(-trace_term);
    }
    {
        const Eigen::MatrixXcd r =
            kImag * Eigen::MatrixXcd::Identity(m, m) + 2.0 * qhat.cast<Complex>();
        const Complex trace_term = r.partialPivLu().solve(weighted.cast<Complex>()).trace();
        const Complex phi = p.alpha * integrate(
                                          [&](double s) -> Complex {
                                              const Eigen::MatrixXcd ms =
                                                  kImag * Eigen::MatrixXcd::Identity(m, m) +
                                                  2.0 * qhat_at(s).cast<Complex>();
                                              const Eigen::MatrixXd es =
                                                  semigroup_apply(p.generator, s) * g_vectors;
                                              Eigen::MatrixXd rate =
                                                  es.transpose() * p.q.matrix() * es;
                                              rate = root_u.asDiagonal() * rate *
                                                     root_u.asDiagonal();
                                              return ms.partialPivLu()
                                                  .solve(rate.cast<Complex>())
                                                  .trace();
                                          },
                                          0.0, t);
        result.fourier = std::exp(-trace_term - phi);
    }
    return result;
}

double gaussian_norm_oracle(const Eigen::VectorXd& q_spectrum, const Eigen::VectorXd& mu,
                            double a) {
    if (q_spectrum.size() != mu.size()) throw DimMismatch("gaussian_norm_oracle");
    if (q_spectrum.size() > 0 && q_spectrum.minCoeff() < 0.0) {
        throw NonPsdInput("gaussian_norm_oracle: variances must be >= 0");
    }
    double log_value = 0.0;
    for (int k = 0; k < q_spectrum.size(); ++k) {
        const double denom = 1.0 + 2.0 * a * q_spectrum[k];
        if (denom <= 0.0) {
            throw InvalidShift("gaussian_norm_oracle: 1 + 2 a q = " + std::to_string(denom));
        }
        log_value += -0.5 * std::log(denom) - a * mu[k] * mu[k] / denom;
    }
    return std::exp(log_value);
}

void export_transforms_csv(const std::vector<TransformCsvRow>& rows, const std::string& path) {
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    for (const auto& row : rows) {
        const TransformResult& r = row.result;
        cells.push_back({regime_name(r.regime), format_double(row.t), row.functional_id,
                         format_double(r.value.real()), format_double(r.value.imag()),
                         format_double(r.psi_trace_term.real()),
                         format_double(r.psi_trace_term.imag()),
                         format_double(r.phi_term.real()), format_double(r.phi_term.imag()),
                         format_double(r.diagnostics.ball_margin)});
    }
    write_csv(path,
              "regime,t,functional_id,value_re,value_im,psi_trace_re,psi_trace_im,phi_re,"
              "phi_im,ball_margin",
              cells);
}

} // namespace wishart
