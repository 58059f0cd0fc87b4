#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>

namespace wishart {

// Adaptive Gauss-Legendre quadrature on [a, b], bisecting until the
// difference between one panel and its two halves drops below an absolute
// tolerance (default 1e-11, at most 20 bisection levels). Works for scalar,
// complex and Eigen-matrix integrands; the error is measured entrywise.

inline constexpr double kQuadTol = 1e-11;
inline constexpr int kQuadMaxDepth = 20;

namespace detail {

// 15-point Gauss-Legendre rule on [-1, 1]; nodes computed once by Newton
// iteration on the Legendre polynomial (machine accurate, avoids a
// transcribed table).
struct GaussLegendre15 {
    double node[15];
    double weight[15];
    GaussLegendre15() {
        const int n = 15;
        for (int i = 0; i < n; ++i) {
            // Chebyshev initial guess
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                // evaluate P_n and P_n' by recurrence
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = pk;
                }
                double dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1.0);
            node[n - 1 - i] = x;
            weight[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

inline const GaussLegendre15& gl15() {
    static const GaussLegendre15 rule;
    return rule;
}

inline double error_norm(double v) { return std::abs(v); }
inline double error_norm(const std::complex<double>& v) { return std::abs(v); }
template <typename Derived>
double error_norm(const Eigen::MatrixBase<Derived>& v) {
    return v.cwiseAbs().maxCoeff();
}

template <typename F>
auto gl15_panel(F&& f, double a, double b) {
    const auto& rule = gl15();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    auto acc = f(mid + half * rule.node[0]);
    acc *= rule.weight[0];
    for (int i = 1; i < 15; ++i) {
        auto term = f(mid + half * rule.node[i]);
        term *= rule.weight[i];
        acc += term;
    }
    acc *= half;
    return acc;
}

template <typename F, typename V>
V adaptive_panel(F&& f, double a, double b, const V& whole, double tol, int depth) {
    const double mid = 0.5 * (a + b);
    V left = gl15_panel(f, a, mid);
    V right = gl15_panel(f, mid, b);
    V refined = left;
    refined += right;
    V gap = refined;
    gap -= whole;
    if (error_norm(gap) <= tol || depth >= kQuadMaxDepth) {
        return refined;
    }
    V l = adaptive_panel(f, a, mid, left, 0.5 * tol, depth + 1);
    V r = adaptive_panel(f, mid, b, right, 0.5 * tol, depth + 1);
    l += r;
    return l;
}

} // namespace detail

// F maps double -> double / complex<double> / Eigen matrix (a type supporting
// +=, -= and *= double).
template <typename F>
auto integrate(F&& f, double a, double b, double abs_tol = kQuadTol) {
    using V = decltype(detail::gl15_panel(f, a, b));
    if (a == b) {
        V v = f(a);
        v *= 0.0;
        return v;
    }
    V whole = detail::gl15_panel(f, a, b);
    return detail::adaptive_panel(f, a, b, whole, abs_tol, 0);
}

} // namespace wishart
