#include "wishart/metric.hpp"

#include <cmath>

#include "wishart/serialize.hpp"
#include "wishart/transforms.hpp"

namespace wishart {

ConePoint::ConePoint(PsdOperator a_, double x_) : a(std::move(a_)), x(x_) {
    if (x < -kPsdTol) throw Error("ConePoint: escape mass must be >= 0");
    if (x < 0.0) x = 0.0;
}

TestPair::TestPair(SelfAdjointOperator b_, double y_) : b(std::move(b_)), y(y_) {}

double pairing(const ConePoint& p, const TestPair& q) {
    return pairing(p.a, p.x, q);
}

double pairing(const SelfAdjointOperator& a, double x, const TestPair& q) {
    if (a.dim() != q.b.dim()) throw DimMismatch("pairing");
    return (q.b.matrix() * a.matrix()).trace() + (a.matrix().trace() + x) * q.y;
}

bool cone_membership(const SelfAdjointOperator& a, double x, double tol) {
    if (x < -tol) return false;
    EigenDecomposition eig = eigen_decompose(a.matrix());
    const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
    return eig.values.minCoeff() >= -tol * scale;
}

TestFamily canonical_test_family(int dim, int depth) {
    if (dim < 1) throw DimMismatch("canonical_test_family: dim must be >= 1");
    if (depth < 1) throw EmptyFamily("canonical_test_family: depth must be >= 1");

    std::vector<Eigen::MatrixXd> basis;
    for (int i = 0; i < dim; ++i) {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(dim, dim);
        e(i, i) = 1.0;
        basis.push_back(e);
    }
    for (int i = 0; i < dim; ++i) {
        for (int j = i + 1; j < dim; ++j) {
            Eigen::MatrixXd e = Eigen::MatrixXd::Zero(dim, dim);
            e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
            basis.push_back(e);
        }
    }
    const double ys[3] = {0.0, 1.0, -1.0};

    TestFamily fam;
    fam.pairs.emplace_back(SelfAdjointOperator::zero(dim), 1.0);
    std::size_t slot = 0;
    while (static_cast<int>(fam.pairs.size()) < depth) {
        const Eigen::MatrixXd& b = basis[(slot / 3) % basis.size()];
        fam.pairs.emplace_back(SelfAdjointOperator(b), ys[slot % 3]);
        ++slot;
    }
    return fam;
}

int separation_depth(int dim) {
    if (dim < 1) throw DimMismatch("separation_depth: dim must be >= 1");
    return 3 * dim * (dim + 1) / 2 + 1;
}

double wstar_distance(const ConePoint& p1, const ConePoint& p2, const TestFamily& fam) {
    if (fam.pairs.empty()) throw EmptyFamily("wstar_distance");
    if (p1.a.dim() != p2.a.dim()) throw DimMismatch("wstar_distance");

    const SelfAdjointOperator gap(p1.a.matrix() - p2.a.matrix());
    const double x_gap = p1.x - p2.x;
    double d = 0.0;
    double weight = 0.5;
    for (const TestPair& pair : fam.pairs) {
        d += weight * std::min(std::abs(pairing(gap, x_gap, pair)), 1.0);
        weight *= 0.5;
    }
    return d;
}

std::vector<double> feller_decay_probe(const ModelParams& p, const PsdOperator& v, double w,
                                       double t, const PsdOperator& x_base,
                                       const std::vector<double>& scales) {
    EigenDecomposition v_eig = eigen_decompose(v.matrix());
    if (!(v_eig.values.minCoeff() > 0.0) || !(w > 0.0)) {
        throw NotStrictlyPositive("feller_decay_probe: needs min eig(v) > 0 and w > 0");
    }
    for (std::size_t k = 1; k < scales.size(); ++k) {
        if (!(scales[k] > scales[k - 1])) {
            throw GridNotIncreasing("feller_decay_probe: scales must increase");
        }
    }
    if (!scales.empty() && scales.front() < 0.0) {
        throw GridNotIncreasing("feller_decay_probe: scales must be >= 0");
    }

    const PsdOperator shifted(v.matrix() +
                              w * Eigen::MatrixXd::Identity(p.dim, p.dim));
    std::vector<double> values;
    values.reserve(scales.size());
    for (double scale : scales) {
        const InitialState x0(PsdOperator(scale * x_base.matrix()), p.dim);
        const TransformResult r = laplace_closed(p, x0, shifted, t);
        values.push_back(std::exp(-scale * w) * r.value.real());
    }
    return values;
}

void export_metric_csv(const std::vector<std::pair<std::string, double>>& rows,
                       const std::string& path) {
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    for (const auto& [label, value] : rows) {
        cells.push_back({label, format_double(value)});
    }
    write_csv(path, "label,value", cells);
}

} // namespace wishart
