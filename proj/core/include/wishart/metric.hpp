#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wishart/model.hpp"

namespace wishart {

// Point of the extended state cone: a PSD trace-class part plus a
// nonnegative coordinate carrying mass escaping to infinity.
struct ConePoint {
    PsdOperator a;
    double x;
    ConePoint(PsdOperator a_, double x_);
};

// Test observable (b, y): compact self-adjoint b against the operator part,
// scalar y against total mass.
struct TestPair {
    SelfAdjointOperator b;
    double y;
    TestPair(SelfAdjointOperator b_, double y_);
};

// pairing((a, x), (b, y)) = trace(b a) + (trace(a) + x) y. The signed
// overload evaluates differences of cone points.
double pairing(const ConePoint& p, const TestPair& q);
double pairing(const SelfAdjointOperator& a, double x, const TestPair& q);

// Extended-cone membership: operator part PSD and x >= -tol.
bool cone_membership(const SelfAdjointOperator& a, double x, double tol = kPsdTol);

// Ordered test pairs; position k (1-indexed) carries weight 2^{-k}. The
// first element is always (0, 1).
struct TestFamily {
    std::vector<TestPair> pairs;
};

// Deterministic enumeration: (0, 1), then each symmetric basis matrix
// (E_ii in index order, then (E_ij + E_ji)/sqrt(2) for i < j) paired with
// y in {0, 1, -1}, cycled until `depth` pairs exist.
TestFamily canonical_test_family(int dim, int depth);

// Depth at which the canonical family separates S(R^dim) x R:
// 3 dim (dim + 1) / 2 + 1.
int separation_depth(int dim);

// d(p1, p2) = sum_k 2^{-k} min(|pairing(p1 - p2, f_k)|, 1), k from 1,
// capped before weighting. EmptyFamily on an empty family; a pseudometric
// at any finite depth, a metric from separation_depth(dim) on.
double wstar_distance(const ConePoint& p1, const ConePoint& p2, const TestFamily& fam);

// Transition-semigroup image of the test function exp(-pairing(., (v, w)))
// along the ramp (scale * x_base, scale): returns
//   exp(-scale * w) * laplace value at x0 = scale * x_base with operator v + w I
// per scale. Strictly decreasing to zero as the ramp runs to infinity.
// NotStrictlyPositive unless min eig(v) > 0 and w > 0; GridNotIncreasing
// unless scales increase.
std::vector<double> feller_decay_probe(const ModelParams& p, const PsdOperator& v, double w,
                                       double t, const PsdOperator& x_base,
                                       const std::vector<double>& scales);

// CSV rows label,value for family diagnostics and distance sweeps.
void export_metric_csv(const std::vector<std::pair<std::string, double>>& rows,
                       const std::string& path);

} // namespace wishart
