#include "doctest.h"

#include <cmath>

#include "test_helpers.hpp"
#include "wishart/model.hpp"

using namespace wishart;

TEST_CASE("diagonal_qt_entry closed form and a -> 0 branch") {
    // a = 0 integrates q ds exactly
    REQUIRE(diagonal_qt_entry(0.7, 0.0, 2.5) == 0.7 * 2.5);
    // q = 1, a = -1, t = 1: (1 - e^{-2}) / 2
    REQUIRE(diagonal_qt_entry(1.0, -1.0, 1.0) ==
            doctest::Approx(0.43233235838169365).epsilon(1e-15));
    // continuity across the branch
    REQUIRE(diagonal_qt_entry(1.0, 1e-14, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
    // growth case
    REQUIRE(diagonal_qt_entry(2.0, 0.5, 1.0) ==
            doctest::Approx(2.0 * std::expm1(1.0)).epsilon(1e-14));
}

TEST_CASE("integrated_covariance: diagonal closed form vs forced quadrature") {
    Eigen::VectorXd a(4);
    a << -1.0, -0.25, 0.0, 0.5;
    Eigen::VectorXd q(4);
    q << 1.0, 0.5, 0.25, 0.125;
    const ModelParams diag(4, 2.0, GeneratorSpec::diagonal(a), PsdOperator::from_diagonal(q));
    // same model with a dense generator view, which disables the closed form
    const ModelParams dense(4, 2.0, GeneratorSpec::dense(Eigen::MatrixXd(a.asDiagonal())),
                            PsdOperator::from_diagonal(q));
    for (double t : {0.0, 0.3, 1.0}) {
        const Eigen::MatrixXd lhs = integrated_covariance(diag, t).qt.matrix();
        const Eigen::MatrixXd rhs = integrated_covariance(dense, t).qt.matrix();
        REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
    }
    REQUIRE_THROWS_AS(integrated_covariance(diag, -0.1), NegativeTime);
}

TEST_CASE("integrated_covariance composes over time splits") {
    const ModelParams p = testutil::dense_model(5, 2.0, 19);
    const double s = 0.4;
    const double t = 0.7;
    const Eigen::MatrixXd qs = integrated_covariance(p, s).qt.matrix();
    const Eigen::MatrixXd qt = integrated_covariance(p, t).qt.matrix();
    const Eigen::MatrixXd qst = integrated_covariance(p, s + t).qt.matrix();
    const Eigen::MatrixXd es = semigroup_apply(p.generator, s);
    const Eigen::MatrixXd composed = qs + es.transpose() * qt * es;
    REQUIRE((qst - composed).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("integrability_value equals trace of the integrated covariance") {
    const ModelParams p = testutil::dirichlet_model(6, 2.0);
    const double t = 0.5;
    REQUIRE(integrability_value(p, t) ==
            doctest::Approx(integrated_covariance(p, t).qt.matrix().trace()));
    // trace grows with the truncation level for this coefficient family
    const ModelParams wider = testutil::dirichlet_model(12, 2.0);
    REQUIRE(integrability_value(wider, t) > integrability_value(p, t));
}

TEST_CASE("jointly_diagonal detection") {
    Eigen::VectorXd a(3);
    a << -1.0, -2.0, -3.0;
    REQUIRE(ModelParams(3, 2.0, GeneratorSpec::diagonal(a), PsdOperator::identity(3))
                .jointly_diagonal());
    REQUIRE_FALSE(ModelParams(3, 2.0, GeneratorSpec::dense(Eigen::MatrixXd(a.asDiagonal())),
                              PsdOperator::identity(3))
                      .jointly_diagonal());
    Eigen::MatrixXd qm = Eigen::MatrixXd::Identity(3, 3);
    qm(0, 1) = qm(1, 0) = 0.2;
    REQUIRE_FALSE(ModelParams(3, 2.0, GeneratorSpec::diagonal(a), PsdOperator(qm))
                      .jointly_diagonal());
}

TEST_CASE("ModelParams rejects inconsistent shapes and negative alpha") {
    Eigen::VectorXd a(3);
    a << -1.0, -2.0, -3.0;
    REQUIRE_THROWS_AS(
        ModelParams(4, 2.0, GeneratorSpec::diagonal(a), PsdOperator::identity(4)),
        DimMismatch);
    REQUIRE_THROWS_AS(
        ModelParams(3, -1.0, GeneratorSpec::diagonal(a), PsdOperator::identity(3)), Error);
}

TEST_CASE("validate_parameters gates alpha and rank") {
    const ModelParams p = testutil::mild_model(4, 2.0);
    const InitialState x0(testutil::random_psd_rank(4, 2, 7), 2);

    AdmissibilityReport ok = validate_parameters(p, x0);
    REQUIRE(ok.alpha_integer);
    REQUIRE(ok.rank_ok);
    REQUIRE(ok.admissible_for_simulation);
    REQUIRE(ok.q_injective);

    const ModelParams frac = testutil::mild_model(4, 1.5);
    AdmissibilityReport bad = validate_parameters(frac, x0);
    REQUIRE_FALSE(bad.alpha_integer);
    REQUIRE_FALSE(bad.admissible_for_simulation);

    const ModelParams low = testutil::mild_model(4, 1.0);
    AdmissibilityReport rank_fail = validate_parameters(low, x0);
    REQUIRE(rank_fail.alpha_integer);
    REQUIRE_FALSE(rank_fail.rank_ok);
    REQUIRE_FALSE(rank_fail.admissible_for_simulation);

    // strict mode also demands an injective Q
    Eigen::VectorXd q(4);
    q << 1.0, 1.0, 1.0, 0.0;
    const ModelParams degenerate(4, 2.0, p.generator, PsdOperator::from_diagonal(q));
    AdmissibilityReport strict = validate_parameters(degenerate, x0, true);
    REQUIRE_FALSE(strict.q_injective);
    REQUIRE_FALSE(strict.admissible_for_simulation);
    REQUIRE(validate_parameters(degenerate, x0, false).admissible_for_simulation);
}

TEST_CASE("factor_initial reconstructs and fixes the sign") {
    const PsdOperator x0 = testutil::random_psd_rank(6, 2, 29);
    const InitialState state(x0, 2);
    const Eigen::MatrixXd y0 = factor_initial(state, 3);
    REQUIRE(y0.rows() == 3);
    REQUIRE(y0.cols() == 6);
    REQUIRE((y0.transpose() * y0 - x0.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    // rank 2 < alpha 3: last row stays zero
    REQUIRE(y0.row(2).cwiseAbs().maxCoeff() == 0.0);
    // sign convention: first nonzero entry of every populated row is positive
    for (int r = 0; r < 2; ++r) {
        for (int i = 0; i < 6; ++i) {
            if (std::abs(y0(r, i)) > 1e-12) {
                REQUIRE(y0(r, i) > 0.0);
                break;
            }
        }
    }
    REQUIRE_THROWS_AS(factor_initial(state, 1), RankExceedsAlpha);
}

TEST_CASE("InitialState enforces the declared rank") {
    const PsdOperator x0 = testutil::random_psd_rank(4, 3, 31);
    REQUIRE_THROWS_AS(InitialState(x0, 2), RankExceedsAlpha);
    REQUIRE_NOTHROW(InitialState(x0, 3));
    REQUIRE_NOTHROW(InitialState(PsdOperator::zero(4), 0));
    REQUIRE_THROWS_AS(InitialState(x0, -1), Error);
}

TEST_CASE("model JSON round trip and shorthand forms") {
    const ModelParams p = testutil::dirichlet_model(3, 2.0);
    const ModelParams back = model_from_json(to_json(p));
    REQUIRE(back.dim == p.dim);
    REQUIRE(back.alpha == p.alpha);
    REQUIRE(back.label == p.label);
    REQUIRE((back.generator.matrix() - p.generator.matrix()).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((back.q.matrix() - p.q.matrix()).cwiseAbs().maxCoeff() == 0.0);

    const ModelParams ident = model_from_json(
        R"({"dim": 2, "alpha": 1.0,
            "generator": {"type": "diagonal", "values": [-1.0, -2.0]},
            "q": {"type": "identity"}})");
    REQUIRE(ident.jointly_diagonal());
    REQUIRE((ident.q.matrix() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);

    REQUIRE_THROWS_AS(model_from_json("{"), ConfigParseError);
    REQUIRE_THROWS_AS(model_from_json(R"({"dim": 2, "alpha": 1.0})"), ConfigParseError);
    REQUIRE_THROWS_AS(model_from_json(
                          R"({"dim": 2, "alpha": 1.0,
                              "generator": {"type": "spiral", "values": [1, 2]},
                              "q": {"type": "identity"}})"),
                      ConfigParseError);
}
