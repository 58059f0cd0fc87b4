#pragma once

#include <cstdint>

#include "wishart/model.hpp"
#include "wishart/rng.hpp"

namespace testutil {

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
    wishart::PhiloxStream rng(seed, 0);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = rng.next_normal();
    }
    return m;
}

inline Eigen::VectorXd random_vector(int n, std::uint64_t seed) {
    return random_matrix(n, 1, seed).col(0);
}

inline wishart::PsdOperator random_psd(int n, std::uint64_t seed, double scale = 1.0) {
    const Eigen::MatrixXd y = random_matrix(n, n, seed);
    return wishart::PsdOperator(scale / n * (y.transpose() * y));
}

inline wishart::PsdOperator random_psd_rank(int n, int rank, std::uint64_t seed,
                                            double scale = 1.0) {
    const Eigen::MatrixXd y = random_matrix(rank, n, seed);
    return wishart::PsdOperator(scale / n * (y.transpose() * y));
}

// Dirichlet-type spectrum a_j = -scale * j^2 pi^2 with q_j = j^{-2}
inline wishart::ModelParams dirichlet_model(int n, double alpha, double scale = 0.1) {
    Eigen::VectorXd a(n);
    Eigen::VectorXd q(n);
    const double pi2 = 9.869604401089358;
    for (int j = 1; j <= n; ++j) {
        a[j - 1] = -scale * j * j * pi2;
        q[j - 1] = 1.0 / (static_cast<double>(j) * j);
    }
    return wishart::ModelParams(n, alpha, wishart::GeneratorSpec::diagonal(a),
                                wishart::PsdOperator::from_diagonal(q), "dirichlet");
}

// slowly decaying diagonal model, comfortable for quadrature and ODE work
inline wishart::ModelParams mild_model(int n, double alpha) {
    Eigen::VectorXd a(n);
    Eigen::VectorXd q(n);
    for (int j = 0; j < n; ++j) {
        a[j] = -0.4 - 0.07 * j;
        q[j] = 1.0 / (1.0 + 0.3 * j);
    }
    return wishart::ModelParams(n, alpha, wishart::GeneratorSpec::diagonal(a),
                                wishart::PsdOperator::from_diagonal(q), "mild");
}

// dense non-normal generator with negative spectral abscissa
inline wishart::ModelParams dense_model(int n, double alpha, std::uint64_t seed) {
    Eigen::MatrixXd a = 0.3 * random_matrix(n, n, seed);
    a -= (wishart::operator_norm(a) + 0.4) * Eigen::MatrixXd::Identity(n, n);
    const wishart::PsdOperator q = random_psd(n, seed + 1);
    return wishart::ModelParams(n, alpha, wishart::GeneratorSpec::dense(a),
                                wishart::PsdOperator(q.matrix() +
                                                     0.1 * Eigen::MatrixXd::Identity(n, n)),
                                "dense");
}

} // namespace testutil
