#include "wishart/model.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"
#include "wishart/quadrature.hpp"

namespace wishart {

ModelParams::ModelParams(int dim_, double alpha_, GeneratorSpec generator_, PsdOperator q_,
                         std::string label_)
    : dim(dim_), alpha(alpha_), generator(std::move(generator_)), q(std::move(q_)),
      label(std::move(label_)) {
    if (dim <= 0) throw DimMismatch("ModelParams: dim must be positive");
    if (generator.dim() != dim || q.dim() != dim) {
        throw DimMismatch("ModelParams: generator is " + std::to_string(generator.dim()) +
                          ", q is " + std::to_string(q.dim()) + ", dim is " +
                          std::to_string(dim));
    }
    if (!(alpha >= 0.0)) throw Error("ModelParams: alpha must be >= 0");
}

bool ModelParams::jointly_diagonal() const {
    if (!generator.is_diagonal()) return false;
    const Eigen::MatrixXd& m = q.matrix();
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    Eigen::MatrixXd off = m;
    off.diagonal().setZero();
    return off.cwiseAbs().maxCoeff() <= 1e-14 * scale;
}

InitialState::InitialState(PsdOperator x0_, int declared_rank_)
    : x0(std::move(x0_)), declared_rank(declared_rank_) {
    if (declared_rank < 0) throw Error("InitialState: declared rank must be >= 0");
    const int r = rank_eps(x0, kPsdTol);
    if (r > declared_rank) {
        throw RankExceedsAlpha("InitialState: numerical rank " + std::to_string(r) +
                               " exceeds declared rank " + std::to_string(declared_rank));
    }
}

double diagonal_qt_entry(double q, double a, double t) {
    if (a == 0.0) return q * t;
    // q (e^{2at} - 1) / (2a), kept accurate near a = 0 by expm1
    return q * std::expm1(2.0 * a * t) / (2.0 * a);
}

IntegratedCovariance integrated_covariance(const ModelParams& p, double t) {
    if (t < 0.0) throw NegativeTime("integrated_covariance: t = " + std::to_string(t));
    if (p.jointly_diagonal()) {
        Eigen::VectorXd d(p.dim);
        for (int j = 0; j < p.dim; ++j) {
            d[j] = diagonal_qt_entry(p.q(j, j), p.generator.spectrum()[j], t);
        }
        return IntegratedCovariance{t, PsdOperator::from_diagonal(d)};
    }
    Eigen::MatrixXd accum = integrate(
        [&](double s) -> Eigen::MatrixXd {
            Eigen::MatrixXd es = semigroup_apply(p.generator, s);
            return es.transpose() * p.q.matrix() * es;
        },
        0.0, t);
    accum = 0.5 * (accum + accum.transpose());
    EigenDecomposition eig = eigen_decompose(accum);
    Eigen::MatrixXd clamped = eig.vectors * eig.values.cwiseMax(0.0).asDiagonal() *
                              eig.vectors.transpose();
    return IntegratedCovariance{t, PsdOperator(clamped)};
}

double integrability_value(const ModelParams& p, double t) {
    return integrated_covariance(p, t).qt.matrix().trace();
}

AdmissibilityReport validate_parameters(const ModelParams& p, const InitialState& x0,
                                        bool strict) {
    AdmissibilityReport report;
    report.q_injective = rank_eps(p.q, kPsdTol) == p.dim;
    const double rounded = std::round(p.alpha);
    report.alpha_integer = std::abs(p.alpha - rounded) <= 1e-12;
    report.rank_ok = rank_eps(x0.x0, kPsdTol) <= static_cast<int>(rounded);
    report.admissible_for_simulation =
        report.alpha_integer && report.rank_ok && (!strict || report.q_injective);
    return report;
}

Eigen::MatrixXd factor_initial(const InitialState& x0, int alpha) {
    const int n = x0.x0.dim();
    const int rank = rank_eps(x0.x0, kPsdTol);
    if (rank > alpha) {
        throw RankExceedsAlpha("factor_initial: rank " + std::to_string(rank) + " > alpha " +
                               std::to_string(alpha));
    }
    EigenDecomposition eig = eigen_decompose(x0.x0.matrix());
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(alpha, n);
    const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
    for (int row = 0; row < std::min(alpha, n); ++row) {
        // eigenvalues ascending; walk from the top
        const int idx = n - 1 - row;
        const double lambda = eig.values[idx];
        if (lambda <= kPsdTol * scale) break;
        Eigen::VectorXd v = eig.vectors.col(idx);
        for (int i = 0; i < n; ++i) {
            if (std::abs(v[i]) > 1e-12) {
                if (v[i] < 0.0) v = -v;
                break;
            }
        }
        y.row(row) = std::sqrt(lambda) * v.transpose();
    }
    return y;
}

namespace {

PsdOperator q_from_json(const nlohmann::json& j, int dim) {
    if (j.is_object() && j.contains("type")) {
        const std::string type = j.at("type").get<std::string>();
        if (type == "identity") return PsdOperator::identity(dim);
        if (type == "diagonal") {
            const auto& values = j.at("values");
            if (!values.is_array() || static_cast<int>(values.size()) != dim) {
                throw ConfigParseError("q.values must hold dim numbers");
            }
            Eigen::VectorXd d(dim);
            for (int i = 0; i < dim; ++i) d[i] = values.at(i).get<double>();
            if (d.minCoeff() < 0.0) throw NonPsdInput("q diagonal has a negative entry");
            return PsdOperator::from_diagonal(d);
        }
        if (type != "dense") throw ConfigParseError("unknown q.type '" + type + "'");
    }
    return PsdOperator(self_adjoint_from_json(j.dump()));
}

GeneratorSpec generator_from_json(const nlohmann::json& j, int dim) {
    const std::string type = j.at("type").get<std::string>();
    const auto& values = j.at("values");
    if (type == "diagonal") {
        if (!values.is_array() || static_cast<int>(values.size()) != dim) {
            throw ConfigParseError("generator.values must hold dim numbers");
        }
        Eigen::VectorXd d(dim);
        for (int i = 0; i < dim; ++i) d[i] = values.at(i).get<double>();
        return GeneratorSpec::diagonal(d);
    }
    if (type == "dense") {
        if (!values.is_array() || static_cast<int>(values.size()) != dim * dim) {
            throw ConfigParseError("generator.values must hold dim^2 numbers");
        }
        Eigen::MatrixXd m(dim, dim);
        int pos = 0;
        for (int i = 0; i < dim; ++i) {
            for (int k = 0; k < dim; ++k) m(i, k) = values.at(pos++).get<double>();
        }
        return GeneratorSpec::dense(m);
    }
    throw ConfigParseError("unknown generator.type '" + type + "'");
}

} // namespace

ModelParams model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParseError(e.what());
    }
    try {
        const int dim = j.at("dim").get<int>();
        if (dim <= 0) throw ConfigParseError("dim must be positive");
        const double alpha = j.at("alpha").get<double>();
        GeneratorSpec generator = generator_from_json(j.at("generator"), dim);
        PsdOperator q = q_from_json(j.at("q"), dim);
        return ModelParams(dim, alpha, std::move(generator), std::move(q),
                           j.value("label", std::string()));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParseError(e.what());
    }
}

std::string to_json(const ModelParams& p) {
    nlohmann::json j;
    j["dim"] = p.dim;
    j["alpha"] = p.alpha;
    nlohmann::json gen;
    if (p.generator.is_diagonal()) {
        gen["type"] = "diagonal";
        std::vector<double> values(p.generator.spectrum().data(),
                                   p.generator.spectrum().data() + p.dim);
        gen["values"] = values;
    } else {
        gen["type"] = "dense";
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(p.dim) * p.dim);
        for (int i = 0; i < p.dim; ++i) {
            for (int k = 0; k < p.dim; ++k) values.push_back(p.generator.matrix()(i, k));
        }
        gen["values"] = values;
    }
    j["generator"] = gen;
    j["q"] = nlohmann::json::parse(to_json(static_cast<const SelfAdjointOperator&>(p.q)));
    j["label"] = p.label;
    return j.dump();
}

} // namespace wishart
