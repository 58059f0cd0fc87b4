#include "doctest.h"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>

#include "test_helpers.hpp"
#include "wishart/transforms.hpp"

using namespace wishart;

namespace {

// scalar model dX = (alpha q + 2 a X) dt + 2 sqrt(q X) dB, closed Laplace
// transform (1 + 2 u q_t)^{-alpha/2} exp(-u e^{2at} x0 / (1 + 2 u q_t))
double scalar_laplace(double alpha, double a, double q, double x0, double u, double t) {
    const double qt = diagonal_qt_entry(q, a, t);
    const double growth = std::exp(2.0 * a * t);
    return std::pow(1.0 + 2.0 * u * qt, -0.5 * alpha) *
           std::exp(-u * growth * x0 / (1.0 + 2.0 * u * qt));
}

ModelParams scalar_model(double alpha, double a, double q) {
    Eigen::VectorXd av(1), qv(1);
    av << a;
    qv << q;
    return ModelParams(1, alpha, GeneratorSpec::diagonal(av), PsdOperator::from_diagonal(qv));
}

InitialState scalar_state(double x0) {
    Eigen::VectorXd v(1);
    v << x0;
    return InitialState(PsdOperator::from_diagonal(v), x0 > 0.0 ? 1 : 0);
}

} // namespace

TEST_CASE("TestFunctional constructors enforce their regimes") {
    const PsdOperator u = testutil::random_psd(3, 2);
    const SelfAdjointOperator indefinite =
        SelfAdjointOperator::from_diagonal((Eigen::VectorXd(3) << 1.0, -1.0, 0.5).finished());

    REQUIRE(TestFunctional::laplace(u).regime == TransformRegime::LaplacePos);
    REQUIRE(TestFunctional::fourier(SelfAdjointOperator(u.matrix())).regime ==
            TransformRegime::FourierSigned);
    REQUIRE(TestFunctional::fourier(SelfAdjointOperator(-u.matrix())).regime ==
            TransformRegime::FourierSigned);
    REQUIRE_THROWS_AS(TestFunctional::fourier(indefinite), NotSignDefinite);

    REQUIRE_THROWS_AS(TestFunctional(indefinite, SelfAdjointOperator::zero(3),
                                     TransformRegime::LaplacePos),
                      NonPsdInput);
    REQUIRE_THROWS_AS(TestFunctional(u, SelfAdjointOperator::zero(3),
                                     TransformRegime::ExtendedNegative),
                      NonPsdInput);
    REQUIRE_THROWS_AS(TestFunctional(SelfAdjointOperator::zero(3), u,
                                     TransformRegime::JointlyDiagonal),
                      NotJointlyDiagonal);
    REQUIRE_THROWS_AS(TestFunctional(u, SelfAdjointOperator::zero(3),
                                     TransformRegime::FourierSigned),
                      Error);
}

TEST_CASE("laplace_closed matches the scalar closed form") {
    const double alpha = 1.5, a = -0.8, q = 0.9, x0 = 0.6;
    const ModelParams p = scalar_model(alpha, a, q);
    const InitialState state = scalar_state(x0);
    for (double u : {0.0, 0.3, 2.0}) {
        for (double t : {0.05, 0.4, 1.5}) {
            const TransformResult got =
                laplace_closed(p, state, PsdOperator(SelfAdjointOperator(1, u)), t);
            REQUIRE(got.value.imag() == 0.0);
            REQUIRE(got.value.real() ==
                    doctest::Approx(scalar_laplace(alpha, a, q, x0, u, t)).epsilon(1e-12));
        }
    }
}

TEST_CASE("laplace_closed basics: range, t = 0 reduction, monotonicity") {
    const ModelParams p = testutil::mild_model(5, 2.0);
    const InitialState x0(testutil::random_psd_rank(5, 2, 3, 0.8), 2);
    const PsdOperator u1 = testutil::random_psd(5, 5, 0.6);
    const PsdOperator u2(u1.matrix() + 0.4 * Eigen::MatrixXd::Identity(5, 5));

    const TransformResult r1 = laplace_closed(p, x0, u1, 0.7);
    REQUIRE(r1.value.real() > 0.0);
    REQUIRE(r1.value.real() <= 1.0);
    REQUIRE(r1.value.imag() == 0.0);

    // at t = 0 the law is the point mass at x0
    const TransformResult at0 = laplace_closed(p, x0, u1, 0.0);
    REQUIRE(std::abs(at0.value.real() -
                     std::exp(-(u1.matrix() * x0.x0.matrix()).trace())) < 1e-12);

    // adding a PSD increment to u can only shrink the transform
    const TransformResult r2 = laplace_closed(p, x0, u2, 0.7);
    REQUIRE(r2.value.real() < r1.value.real());

    // psi-trace term is log-affine in x0: doubling x0 doubles it
    const InitialState x0_doubled(PsdOperator(2.0 * x0.x0.matrix()), 2);
    const TransformResult rd = laplace_closed(p, x0_doubled, u1, 0.7);
    REQUIRE(std::abs(rd.psi_trace_term - 2.0 * r1.psi_trace_term) <
            1e-10 * std::abs(r1.psi_trace_term));
    // and the phi term does not involve x0
    REQUIRE(std::abs(rd.phi_term - r1.phi_term) < 1e-12 * (1.0 + std::abs(r1.phi_term)));
}

TEST_CASE("laplace_closed determinant identity: phi equals the log-det form") {
    const ModelParams p = testutil::mild_model(6, 2.3);
    const InitialState x0(PsdOperator::zero(6), 0);
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const PsdOperator u = testutil::random_psd(6, seed, 1.2);
        const double t = 0.1 + 0.2 * static_cast<double>(seed);
        const TransformResult r = laplace_closed(p, x0, u, t);
        // with x0 = 0 the whole value is exp(-phi)
        REQUIRE(std::abs(r.value.real() - std::exp(-r.phi_term.real())) <
                1e-12 * r.value.real());
        const PsdOperator qt = integrated_covariance(p, t).qt;
        const Eigen::MatrixXd ru = psd_sqrt(u).matrix();
        const double det =
            det_one_plus(SelfAdjointOperator(2.0 * ru * qt.matrix() * ru));
        REQUIRE(std::abs(r.phi_term.real() - 0.5 * p.alpha * std::log(det)) < 1e-10);
    }
}

TEST_CASE("laplace_extended matches the scalar form and guards its ball") {
    const double alpha = 2.0, a = -0.9, q = 0.8, x0 = 0.5;
    const ModelParams p = scalar_model(alpha, a, q);
    const InitialState state = scalar_state(x0);
    const double t = 0.6;
    const double qt = diagonal_qt_entry(q, a, t);

    const double c = 0.25 / qt; // well inside ||u|| qt < 1/2
    const TransformResult got =
        laplace_extended(p, state, SelfAdjointOperator(1, -c), t);
    const double expected = std::pow(1.0 - 2.0 * c * qt, -0.5 * alpha) *
                            std::exp(c * std::exp(2.0 * a * t) * x0 / (1.0 - 2.0 * c * qt));
    REQUIRE(got.value.real() == doctest::Approx(expected).epsilon(1e-12));
    REQUIRE(got.value.real() >= 1.0);
    REQUIRE(got.diagnostics.ball_margin > 0.0);

    // outside the ball
    REQUIRE_THROWS_AS(
        laplace_extended(p, state, SelfAdjointOperator(1, -0.51 / qt), t),
        BallConditionViolated);
    // non-integer alpha
    const ModelParams frac = scalar_model(1.5, a, q);
    REQUIRE_THROWS_AS(laplace_extended(frac, state, SelfAdjointOperator(1, -c), t),
                      NonIntegerAlpha);
    // positive-definite u is the wrong regime here
    REQUIRE_THROWS_AS(laplace_extended(p, state, SelfAdjointOperator(1, 0.1), t),
                      NonPsdInput);
}

TEST_CASE("laplace_extended continues laplace_closed across u = 0") {
    // both forms evaluated at u -> 0 limit hit exp(0) = 1
    const ModelParams p = testutil::mild_model(4, 2.0);
    const InitialState x0(testutil::random_psd_rank(4, 2, 9, 0.5), 2);
    const double t = 0.4;
    const TransformResult pos =
        laplace_closed(p, x0, PsdOperator(SelfAdjointOperator(4, 1e-9)), t);
    const TransformResult neg =
        laplace_extended(p, x0, SelfAdjointOperator(4, -1e-9), t);
    REQUIRE(std::abs(pos.value.real() - 1.0) < 1e-7);
    REQUIRE(std::abs(neg.value.real() - 1.0) < 1e-7);
    REQUIRE(std::abs(pos.value.real() + neg.value.real() - 2.0) < 1e-14);
}

TEST_CASE("fourier_trace_cf symmetry, normalization and dispatch agreement") {
    const ModelParams p = testutil::mild_model(4, 2.0);
    const InitialState x0(testutil::random_psd_rank(4, 2, 11, 0.7), 2);
    const double t = 0.5;

    REQUIRE(fourier_trace_cf(p, x0, 0.0, t) == std::complex<double>(1.0, 0.0));

    for (double r : {0.4, 1.7}) {
        const std::complex<double> plus = fourier_trace_cf(p, x0, r, t);
        const std::complex<double> minus = fourier_trace_cf(p, x0, -r, t);
        REQUIRE(std::abs(plus - std::conj(minus)) < 1e-12);
        REQUIRE(std::abs(plus) <= 1.0 + 1e-12);

        // the generic signed-Fourier regime must agree on v = r I
        const TransformResult generic = evaluate(
            p, x0, TestFunctional::fourier(SelfAdjointOperator(4, r)), t);
        REQUIRE(std::abs(plus - generic.value) < 1e-10);
    }
}

TEST_CASE("fourier_trace_cf at t = 0 is the deterministic phase") {
    const ModelParams p = testutil::mild_model(3, 2.0);
    const InitialState x0(testutil::random_psd_rank(3, 2, 13, 0.6), 2);
    const double r = 0.8;
    const std::complex<double> got = fourier_trace_cf(p, x0, r, 0.0);
    const std::complex<double> exact =
        std::exp(std::complex<double>(0.0, r * x0.x0.matrix().trace()));
    REQUIRE(std::abs(got - exact) < 1e-12);
}

TEST_CASE("jointly diagonal regime agrees with the generic forms") {
    const ModelParams p = testutil::mild_model(4, 2.0);
    Eigen::VectorXd xd(4);
    xd << 0.5, 0.2, 0.0, 0.0;
    const InitialState x0(PsdOperator::from_diagonal(xd), 2);
    const double t = 0.45;
    Eigen::VectorXd ud(4), vd(4);
    ud << 0.7, 0.3, 0.1, 0.0;
    vd << 0.2, -0.4, 0.0, 0.3;

    // u-only diagonal probe vs laplace_closed
    const TestFunctional lap(SelfAdjointOperator::from_diagonal(ud),
                             SelfAdjointOperator::zero(4), TransformRegime::JointlyDiagonal);
    const TransformResult diag_lap = evaluate(p, x0, lap, t);
    const TransformResult dense_lap =
        laplace_closed(p, x0, PsdOperator::from_diagonal(ud), t);
    REQUIRE(std::abs(diag_lap.value - dense_lap.value) < 1e-11);

    // v-only diagonal probe vs the signed Fourier evaluator
    const TestFunctional fou(SelfAdjointOperator::zero(4),
                             SelfAdjointOperator::from_diagonal(vd.cwiseAbs()),
                             TransformRegime::JointlyDiagonal);
    const TransformResult diag_fou = evaluate(p, x0, fou, t);
    const TransformResult dense_fou = evaluate(
        p, x0, TestFunctional::fourier(SelfAdjointOperator::from_diagonal(vd.cwiseAbs())), t);
    REQUIRE(std::abs(diag_fou.value - dense_fou.value) < 1e-9);

    // mixed diagonal probe vs the small-t evaluator (scaled into its ball)
    const TestFunctional mix(SelfAdjointOperator::from_diagonal(0.2 * ud),
                             SelfAdjointOperator::from_diagonal(0.2 * vd),
                             TransformRegime::JointlyDiagonal);
    const TransformResult diag_mix = evaluate(p, x0, mix, t);
    const TransformResult dense_mix =
        mixed_transform(p, x0, SelfAdjointOperator::from_diagonal(0.2 * ud),
                        SelfAdjointOperator::from_diagonal(0.2 * vd), t);
    REQUIRE(std::abs(diag_mix.value - dense_mix.value) < 1e-9);
}

TEST_CASE("mixed_transform limits: pure Laplace and pure Fourier") {
    const ModelParams p = testutil::mild_model(4, 2.0);
    const InitialState x0(testutil::random_psd_rank(4, 2, 15, 0.5), 2);
    const double t = 0.3;
    const SelfAdjointOperator small_u(
        0.15 * testutil::random_psd(4, 19).matrix());
    const SelfAdjointOperator small_v(
        0.15 * testutil::random_psd(4, 23).matrix());

    const TransformResult mixed_u =
        mixed_transform(p, x0, small_u, SelfAdjointOperator::zero(4), t);
    const TransformResult pure_u = laplace_closed(p, x0, PsdOperator(small_u), t);
    REQUIRE(std::abs(mixed_u.value - pure_u.value) < 1e-10);

    const TransformResult mixed_v =
        mixed_transform(p, x0, SelfAdjointOperator::zero(4), small_v, t);
    const TransformResult pure_v =
        evaluate(p, x0, TestFunctional::fourier(small_v), t);
    REQUIRE(std::abs(mixed_v.value - pure_v.value) < 1e-9);

    REQUIRE(mixed_u.diagnostics.neumann_gap < 1e-10);
    REQUIRE(mixed_u.diagnostics.ball_margin > 0.0);
}

TEST_CASE("mixed_transform enforces the ball and integer alpha") {
    const ModelParams p = testutil::mild_model(4, 2.0);
    const InitialState x0(PsdOperator::zero(4), 0);
    const double t = 0.5;
    const BallConstants ball = ball_constants(p.generator, t);
    const double q_norm = operator_norm(p.q.matrix());
    const double radius = ball.radius(q_norm, t);
    REQUIRE(radius > 0.0);

    const SelfAdjointOperator too_big(4, 1.5 * radius);
    REQUIRE_THROWS_AS(mixed_transform(p, x0, too_big, SelfAdjointOperator::zero(4), t),
                      BallConditionViolated);

    const ModelParams frac = testutil::mild_model(4, 1.5);
    const SelfAdjointOperator ok(4, 0.2 * radius);
    REQUIRE_THROWS_AS(mixed_transform(frac, x0, ok, SelfAdjointOperator::zero(4), t),
                      NonIntegerAlpha);
}

TEST_CASE("extended regime agrees with mixed_transform on shared ground") {
    const ModelParams p = testutil::mild_model(3, 2.0);
    const InitialState x0(testutil::random_psd_rank(3, 2, 25, 0.4), 2);
    const double t = 0.25;
    const SelfAdjointOperator neg_u(3, -0.08);
    const TransformResult ext = laplace_extended(p, x0, neg_u, t);
    const TransformResult mix =
        mixed_transform(p, x0, neg_u, SelfAdjointOperator::zero(3), t);
    REQUIRE(std::abs(ext.value - mix.value) < 1e-10 * std::abs(ext.value));
}

TEST_CASE("ball_constants: diagonal recipe and the flat-generator radius") {
    Eigen::VectorXd a(3);
    a << -0.2, -1.0, -0.5;
    const BallConstants ball = ball_constants(GeneratorSpec::diagonal(a), 0.7);
    REQUIRE(ball.m == 1.0);
    REQUIRE(ball.omega == -0.2);

    const BallConstants flat =
        ball_constants(GeneratorSpec::diagonal(Eigen::VectorXd::Zero(2)), 0.7);
    REQUIRE(flat.omega == 0.0);
    // omega = 0 collapses the growth factor to 2t
    REQUIRE(flat.radius(0.5, 0.7) == doctest::Approx(1.0 / (2.0 * 0.7 * 0.5)));

    const ModelParams dense = testutil::dense_model(4, 2.0, 27);
    const BallConstants db = ball_constants(dense.generator, 0.5);
    REQUIRE(db.m >= 1.0 - 1e-12);
    REQUIRE(db.radius(1.0, 0.5) > 0.0);
}

TEST_CASE("evaluate dispatches every regime to its closed form") {
    const ModelParams p = testutil::mild_model(3, 2.0);
    const InitialState x0(testutil::random_psd_rank(3, 2, 29, 0.5), 2);
    const double t = 0.35;

    const PsdOperator u = testutil::random_psd(3, 31, 0.4);
    REQUIRE(evaluate(p, x0, TestFunctional::laplace(u), t).value ==
            laplace_closed(p, x0, u, t).value);

    const TestFunctional ext(SelfAdjointOperator(3, -0.05), SelfAdjointOperator::zero(3),
                             TransformRegime::ExtendedNegative);
    REQUIRE(evaluate(p, x0, ext, t).value ==
            laplace_extended(p, x0, SelfAdjointOperator(3, -0.05), t).value);

    const TestFunctional mix(SelfAdjointOperator(3, 0.1), SelfAdjointOperator(3, 0.1),
                             TransformRegime::MixedSmallT);
    REQUIRE(evaluate(p, x0, mix, t).value ==
            mixed_transform(p, x0, SelfAdjointOperator(3, 0.1), SelfAdjointOperator(3, 0.1), t)
                .value);
}

TEST_CASE("projected_laplace: full basis recovers the ambient transform") {
    const ModelParams p = testutil::mild_model(4, 2.0);
    const InitialState x0(testutil::random_psd_rank(4, 2, 35, 0.6), 2);
    const PsdOperator u = testutil::random_psd(4, 37, 0.5);
    const double t = 0.4;
    const double ambient = laplace_closed(p, x0, u, t).value.real();
    const double projected =
        projected_laplace(p, x0, u, Eigen::MatrixXd::Identity(4, 4), t);
    REQUIRE(std::abs(projected - ambient) < 1e-12);
}

TEST_CASE("projected_laplace: coordinate compression and basis guard") {
    const ModelParams p = testutil::mild_model(5, 2.0);
    const InitialState x0(testutil::random_psd_rank(5, 2, 39, 0.6), 2);
    const double t = 0.3;
    // first two coordinate directions
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(5, 2);
    basis(0, 0) = 1.0;
    basis(1, 1) = 1.0;
    const PsdOperator u_small = testutil::random_psd(2, 41, 0.7);
    const double got = projected_laplace(p, x0, u_small, basis, t);
    // embedding the compressed functional into the ambient space must agree
    Eigen::MatrixXd embedded = Eigen::MatrixXd::Zero(5, 5);
    embedded.topLeftCorner(2, 2) = u_small.matrix();
    const double ambient = laplace_closed(p, x0, PsdOperator(embedded), t).value.real();
    REQUIRE(std::abs(got - ambient) < 1e-10);

    Eigen::MatrixXd skewed = basis;
    skewed(2, 1) = 0.4;
    REQUIRE_THROWS_AS(projected_laplace(p, x0, u_small, skewed, t), NonOrthonormalBasis);
}

TEST_CASE("finite_rank_example_transform: degenerate and embedded cases") {
    const ModelParams p = testutil::mild_model(4, 2.0);
    const double t = 0.5;

    // zero weight on u kills the exponent entirely
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(4, 1);
    h(0, 0) = 1.0;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 1);
    g(1, 0) = 1.0;
    Eigen::VectorXd xw(1), uw(1);
    xw << 0.7;
    uw << 0.0;
    const FiniteRankTransform trivial =
        finite_rank_example_transform(p, xw, h, uw, g, t);
    REQUIRE(trivial.laplace == doctest::Approx(1.0));
    REQUIRE(std::abs(trivial.fourier - std::complex<double>(1.0, 0.0)) < 1e-12);

    // rank-2 u, rank-1 x0 against the dense closed form
    Eigen::MatrixXd g2 = Eigen::MatrixXd::Zero(4, 2);
    g2(0, 0) = 1.0;
    g2(2, 1) = 1.0;
    Eigen::VectorXd uw2(2);
    uw2 << 0.8, 0.3;
    const InitialState x0(
        PsdOperator(0.7 * h.col(0) * h.col(0).transpose()), 1);
    const FiniteRankTransform fr =
        finite_rank_example_transform(p, xw, h, uw2, g2, t);
    Eigen::MatrixXd u_dense =
        g2 * uw2.asDiagonal() * g2.transpose();
    const double dense = laplace_closed(p, x0, PsdOperator(u_dense), t).value.real();
    REQUIRE(std::abs(fr.laplace - dense) < 1e-9);

    // the Fourier variant matches the signed evaluator on the embedded v
    const TransformResult signed_v = evaluate(
        p, x0, TestFunctional::fourier(SelfAdjointOperator(u_dense)), t);
    REQUIRE(std::abs(fr.fourier - signed_v.value) < 1e-9);

    // guards
    REQUIRE_THROWS_AS(
        finite_rank_example_transform(p, xw, h, -uw2, g2, t), NonPsdInput);
    Eigen::MatrixXd bad = g2;
    bad(1, 1) = 0.9;
    REQUIRE_THROWS_AS(
        finite_rank_example_transform(p, xw, h, uw2, bad, t), NonOrthonormalBasis);
    const ModelParams frac = testutil::mild_model(4, 1.5);
    REQUIRE_THROWS_AS(
        finite_rank_example_transform(frac, xw, h, uw2, g2, t), NonIntegerAlpha);
}

TEST_CASE("gaussian_norm_oracle: closed form, limits and guards") {
    Eigen::VectorXd q(3), mu(3);
    q << 0.5, 1.0, 0.25;
    mu << 0.3, -0.2, 0.0;

    // a = 0 integrates to one
    REQUIRE(gaussian_norm_oracle(q, mu, 0.0) == 1.0);

    // single mode, mu = 0: (1 + 2 a q)^{-1/2}
    Eigen::VectorXd q1(1), mu1(1);
    q1 << 0.8;
    mu1 << 0.0;
    REQUIRE(gaussian_norm_oracle(q1, mu1, 0.7) ==
            doctest::Approx(1.0 / std::sqrt(1.0 + 2.0 * 0.7 * 0.8)).epsilon(1e-14));

    // negative shift inside the validity window still works
    REQUIRE(gaussian_norm_oracle(q1, mu1, -0.5) ==
            doctest::Approx(1.0 / std::sqrt(1.0 - 2.0 * 0.5 * 0.8)).epsilon(1e-14));
    // and beyond it throws
    REQUIRE_THROWS_AS(gaussian_norm_oracle(q1, mu1, -0.7), InvalidShift);
    REQUIRE_THROWS_AS(gaussian_norm_oracle(q, mu1, 0.1), DimMismatch);

    // Monte Carlo cross-check
    PhiloxStream rng(101, 0);
    const double a = 0.6;
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double z = mu[k] + std::sqrt(q[k]) * rng.next_normal();
            s += z * z;
        }
        const double w = std::exp(-a * s);
        sum += w;
        sumsq += w * w;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    REQUIRE(std::abs(mean - gaussian_norm_oracle(q, mu, a)) <= 4.0 * se);
}

TEST_CASE("transform CSV export writes the advertised schema") {
    const ModelParams p = testutil::mild_model(3, 2.0);
    const InitialState x0(testutil::random_psd_rank(3, 2, 43, 0.5), 2);
    std::vector<TransformCsvRow> rows;
    rows.push_back(TransformCsvRow{
        "probe-a", 0.4, laplace_closed(p, x0, testutil::random_psd(3, 45, 0.3), 0.4)});
    const std::string path = "/tmp/wishart_test_transforms.csv";
    export_transforms_csv(rows, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    REQUIRE(header ==
            "regime,t,functional_id,value_re,value_im,psi_trace_re,psi_trace_im,phi_re,"
            "phi_im,ball_margin");
    std::string line;
    std::getline(in, line);
    REQUIRE(line.substr(0, line.find(',')) == "LaplacePos");
    std::remove(path.c_str());
}
