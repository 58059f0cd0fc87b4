#include "wishart/simulate.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "wishart/rng.hpp"
#include "wishart/serialize.hpp"

namespace wishart {

namespace {

std::atomic<int> g_thread_count{1};
std::atomic<double> g_substep_cap{1e-3};

using RowMajorMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MutableRowMajorMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void fill_normals(PhiloxStream& rng, Eigen::MatrixXd& g) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.next_normal();
    }
}

int substep_count(double delta, double a_norm) {
    const double dt_max = g_substep_cap.load() / std::max(1.0, a_norm);
    return std::max(1, static_cast<int>(std::ceil(delta / dt_max)));
}

} // namespace

const char* scheme_name(Scheme s) {
    switch (s) {
    case Scheme::ExactDiagonal: return "exact-diagonal";
    case Scheme::EulerOU: return "euler-ou";
    case Scheme::EulerDirect: return "euler-direct";
    }
    return "euler-ou";
}

SimPlan::SimPlan(ModelParams params_, InitialState x0_, std::vector<double> t_grid_,
                 std::int64_t n_paths_, std::uint64_t seed_, Scheme scheme_)
    : params(std::move(params_)), x0(std::move(x0_)), t_grid(std::move(t_grid_)),
      n_paths(n_paths_), seed(seed_), scheme(scheme_) {
    if (x0.x0.dim() != params.dim) throw DimMismatch("SimPlan: x0 does not match the model");
    if (t_grid.empty() || t_grid.front() != 0.0) {
        throw GridNotIncreasing("SimPlan: grid must start at t = 0");
    }
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        if (!(t_grid[k] > t_grid[k - 1])) {
            throw GridNotIncreasing("SimPlan: grid not strictly increasing at index " +
                                    std::to_string(k));
        }
    }
    if (n_paths < 1) throw Error("SimPlan: n_paths must be >= 1");
    if (scheme == Scheme::ExactDiagonal && !params.jointly_diagonal()) {
        throw NotJointlyDiagonal("SimPlan: exact-diagonal needs a jointly diagonal model");
    }
    if (scheme != Scheme::EulerDirect) {
        const AdmissibilityReport report = validate_parameters(params, x0);
        if (!report.admissible_for_simulation) {
            throw InadmissibleParameters(
                "SimPlan: factor schemes need integer alpha and rank(x0) <= alpha");
        }
    }
}

WishartPathSample::WishartPathSample(SimPlan plan, int y_rows, bool stores_y)
    : plan_(std::move(plan)), y_rows_(y_rows), stores_y_(stores_y) {
    const int n = plan_.params.dim;
    slot_size_ = stores_y_ ? y_rows_ * n : n * n;
    buffer_.assign(static_cast<std::size_t>(plan_.n_paths) * plan_.t_grid.size() *
                       static_cast<std::size_t>(slot_size_),
                   0.0);
}

double* WishartPathSample::slot(std::int64_t path, int time_index) {
    const std::size_t idx =
        (static_cast<std::size_t>(path) * plan_.t_grid.size() + time_index) *
        static_cast<std::size_t>(slot_size_);
    return buffer_.data() + idx;
}

const double* WishartPathSample::slot(std::int64_t path, int time_index) const {
    return const_cast<WishartPathSample*>(this)->slot(path, time_index);
}

Eigen::MatrixXd WishartPathSample::state_matrix(std::int64_t path, int time_index) const {
    const int n = plan_.params.dim;
    if (stores_y_) {
        RowMajorMap y(slot(path, time_index), y_rows_, n);
        return y.transpose() * y;
    }
    RowMajorMap x(slot(path, time_index), n, n);
    return x;
}

PsdOperator WishartPathSample::state_at(std::int64_t path, int time_index) const {
    const int n = plan_.params.dim;
    if (stores_y_) {
        RowMajorMap y(slot(path, time_index), y_rows_, n);
        return PsdOperator::from_gram(y);
    }
    return PsdOperator(state_matrix(path, time_index));
}

Eigen::MatrixXd WishartPathSample::y_state_at(std::int64_t path, int time_index) const {
    if (!stores_y_) throw Error("WishartPathSample: the direct scheme stores no factors");
    RowMajorMap y(slot(path, time_index), y_rows_, plan_.params.dim);
    return y;
}

double WishartPathSample::trace_product(std::int64_t path, int time_index,
                                        const Eigen::MatrixXd& m) const {
    const int n = plan_.params.dim;
    if (m.rows() != n || m.cols() != n) throw DimMismatch("trace_product");
    if (stores_y_) {
        RowMajorMap y(slot(path, time_index), y_rows_, n);
        return (y * m).cwiseProduct(y).sum();
    }
    RowMajorMap x(slot(path, time_index), n, n);
    return (m * x).trace();
}

double WishartPathSample::trace_state(std::int64_t path, int time_index) const {
    const int n = plan_.params.dim;
    if (stores_y_) {
        RowMajorMap y(slot(path, time_index), y_rows_, n);
        return y.squaredNorm();
    }
    RowMajorMap x(slot(path, time_index), n, n);
    return x.trace();
}

Eigen::VectorXd WishartPathSample::state_eigenvalues(std::int64_t path, int time_index) const {
    const int n = plan_.params.dim;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    if (stores_y_) {
        RowMajorMap y(slot(path, time_index), y_rows_, n);
        const Eigen::MatrixXd gram = y * y.transpose(); // shares the nonzero spectrum with X
        EigenDecomposition eig = eigen_decompose(gram);
        const int k = std::min(n, y_rows_);
        for (int i = 0; i < k; ++i) out[i] = std::max(0.0, eig.values[y_rows_ - 1 - i]);
        return out;
    }
    EigenDecomposition eig = eigen_decompose(state_matrix(path, time_index));
    for (int i = 0; i < n; ++i) out[i] = eig.values[n - 1 - i];
    return out;
}

int WishartPathSample::time_index_of(double t) const {
    for (std::size_t k = 0; k < plan_.t_grid.size(); ++k) {
        if (std::abs(plan_.t_grid[k] - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
            return static_cast<int>(k);
        }
    }
    throw TimeNotOnGrid("time_index_of: t = " + std::to_string(t));
}

void WishartPathSample::export_csv(const std::string& path) const {
    const int n = plan_.params.dim;
    std::vector<std::vector<std::string>> rows;
    rows.reserve(static_cast<std::size_t>(plan_.n_paths) * plan_.t_grid.size() * n * n);
    for (std::int64_t p = 0; p < plan_.n_paths; ++p) {
        for (std::size_t k = 0; k < plan_.t_grid.size(); ++k) {
            const Eigen::MatrixXd x = state_matrix(p, static_cast<int>(k));
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    rows.push_back({std::to_string(p), format_double(plan_.t_grid[k]),
                                    std::to_string(i), std::to_string(j),
                                    format_double(x(i, j))});
                }
            }
        }
    }
    write_csv(path, "path,t,i,j,value", rows);
}

void WishartPathSample::export_binary(const std::string& data_path,
                                      const std::string& sidecar_path) const {
    {
        std::ofstream out(data_path, std::ios::binary);
        if (!out) throw Error("export_binary: cannot open " + data_path);
        out.write(reinterpret_cast<const char*>(buffer_.data()),
                  static_cast<std::streamsize>(buffer_.size() * sizeof(double)));
    }
    nlohmann::json sidecar;
    sidecar["n_paths"] = plan_.n_paths;
    sidecar["t_grid"] = plan_.t_grid;
    sidecar["dim"] = plan_.params.dim;
    sidecar["slot_size"] = slot_size_;
    sidecar["stores_y"] = stores_y_;
    sidecar["y_rows"] = y_rows_;
    sidecar["seed"] = plan_.seed;
    sidecar["scheme"] = scheme_name(plan_.scheme);
    write_text_file(sidecar_path, sidecar.dump(2) + "\n");
}

namespace {

void run_exact_diagonal(const SimPlan& plan, WishartPathSample& sample, std::int64_t lo,
                        std::int64_t hi) {
    const int n = plan.params.dim;
    const int rows = static_cast<int>(std::lround(plan.params.alpha));
    const Eigen::VectorXd& a = plan.params.generator.spectrum();
    const Eigen::MatrixXd y0 = factor_initial(plan.x0, rows);
    const int n_times = static_cast<int>(plan.t_grid.size());

    // per-interval decay and innovation scale, shared across paths
    Eigen::MatrixXd decay(n_times - 1, n);
    Eigen::MatrixXd sdev(n_times - 1, n);
    for (int k = 0; k + 1 < n_times; ++k) {
        const double delta = plan.t_grid[k + 1] - plan.t_grid[k];
        for (int j = 0; j < n; ++j) {
            decay(k, j) = std::exp(a[j] * delta);
            sdev(k, j) = std::sqrt(diagonal_qt_entry(plan.params.q(j, j), a[j], delta));
        }
    }

    for (std::int64_t p = lo; p < hi; ++p) {
        PhiloxStream rng = stream(plan.seed, static_cast<std::uint64_t>(p));
        Eigen::MatrixXd y = y0;
        MutableRowMajorMap(sample.slot(p, 0), rows, n) = y;
        for (int k = 0; k + 1 < n_times; ++k) {
            for (int i = 0; i < rows; ++i) {
                for (int j = 0; j < n; ++j) {
                    y(i, j) = y(i, j) * decay(k, j) + sdev(k, j) * rng.next_normal();
                }
            }
            MutableRowMajorMap(sample.slot(p, k + 1), rows, n) = y;
        }
    }
}

void run_euler_ou(const SimPlan& plan, WishartPathSample& sample, std::int64_t lo,
                  std::int64_t hi) {
    const int n = plan.params.dim;
    const int rows = static_cast<int>(std::lround(plan.params.alpha));
    const Eigen::MatrixXd a = plan.params.generator.matrix();
    const Eigen::MatrixXd root_q = psd_sqrt(plan.params.q).matrix();
    const Eigen::MatrixXd y0 = factor_initial(plan.x0, rows);
    const int n_times = static_cast<int>(plan.t_grid.size());
    const double a_norm = plan.params.generator.infinity_norm();

    struct Interval {
        Eigen::MatrixXd lin;
        double sqrt_h;
        int substeps;
    };
    std::vector<Interval> intervals;
    for (int k = 0; k + 1 < n_times; ++k) {
        const double delta = plan.t_grid[k + 1] - plan.t_grid[k];
        const int m = substep_count(delta, a_norm);
        const double h = delta / m;
        intervals.push_back(
            {Eigen::MatrixXd::Identity(n, n) + h * a, std::sqrt(h), m});
    }

    Eigen::MatrixXd g(rows, n);
    for (std::int64_t p = lo; p < hi; ++p) {
        PhiloxStream rng = stream(plan.seed, static_cast<std::uint64_t>(p));
        Eigen::MatrixXd y = y0;
        MutableRowMajorMap(sample.slot(p, 0), rows, n) = y;
        for (int k = 0; k + 1 < n_times; ++k) {
            const Interval& iv = intervals[k];
            for (int s = 0; s < iv.substeps; ++s) {
                fill_normals(rng, g);
                y = y * iv.lin + iv.sqrt_h * (g * root_q);
            }
            MutableRowMajorMap(sample.slot(p, k + 1), rows, n) = y;
        }
    }
}

void run_euler_direct(const SimPlan& plan, WishartPathSample& sample, std::int64_t lo,
                      std::int64_t hi) {
    const int n = plan.params.dim;
    const Eigen::MatrixXd a = plan.params.generator.matrix();
    const Eigen::MatrixXd q = plan.params.q.matrix();
    const Eigen::MatrixXd root_q = psd_sqrt(plan.params.q).matrix();
    const int n_times = static_cast<int>(plan.t_grid.size());
    const double a_norm = plan.params.generator.infinity_norm();
    const double alpha = plan.params.alpha;

    Eigen::MatrixXd g(n, n);
    for (std::int64_t p = lo; p < hi; ++p) {
        PhiloxStream rng = stream(plan.seed, static_cast<std::uint64_t>(p));
        EigenDecomposition eig = eigen_decompose(plan.x0.x0.matrix());
        Eigen::MatrixXd x = eig.vectors * eig.values.cwiseMax(0.0).asDiagonal() *
                            eig.vectors.transpose();
        MutableRowMajorMap(sample.slot(p, 0), n, n) = x;
        for (int k = 0; k + 1 < n_times; ++k) {
            const double delta = plan.t_grid[k + 1] - plan.t_grid[k];
            const int m = substep_count(delta, a_norm);
            const double h = delta / m;
            const double sqrt_h = std::sqrt(h);
            for (int s = 0; s < m; ++s) {
                const Eigen::MatrixXd root_x = eig.vectors *
                                               eig.values.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                                               eig.vectors.transpose();
                fill_normals(rng, g);
                const Eigen::MatrixXd noise = root_x * g * root_q;
                x += h * (alpha * q + x * a + a.transpose() * x) +
                     sqrt_h * (noise + noise.transpose());
                eig = eigen_decompose(0.5 * (x + x.transpose()));
                x = eig.vectors * eig.values.cwiseMax(0.0).asDiagonal() *
                    eig.vectors.transpose();
            }
            MutableRowMajorMap(sample.slot(p, k + 1), n, n) = x;
        }
    }
}

} // namespace

WishartPathSample simulate(const SimPlan& plan) {
    const bool stores_y = plan.scheme != Scheme::EulerDirect;
    const int y_rows =
        stores_y ? static_cast<int>(std::lround(plan.params.alpha)) : plan.params.dim;
    WishartPathSample sample(plan, y_rows, stores_y);

    const auto run_range = [&](std::int64_t lo, std::int64_t hi) {
        switch (plan.scheme) {
        case Scheme::ExactDiagonal: run_exact_diagonal(plan, sample, lo, hi); break;
        case Scheme::EulerOU: run_euler_ou(plan, sample, lo, hi); break;
        case Scheme::EulerDirect: run_euler_direct(plan, sample, lo, hi); break;
        }
    };

    int workers = thread_count();
    if (workers == 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers <= 0) workers = 1;
    }
    workers = static_cast<int>(
        std::min<std::int64_t>(workers, std::max<std::int64_t>(1, plan.n_paths)));

    if (workers <= 1) {
        run_range(0, plan.n_paths);
        return sample;
    }

    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const std::int64_t chunk = (plan.n_paths + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = w * chunk;
        const std::int64_t hi = std::min<std::int64_t>(plan.n_paths, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                run_range(lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> guard(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return sample;
}

void set_thread_count(int n) {
    if (n < 0) throw Error("set_thread_count: negative count");
    g_thread_count.store(n);
}

int thread_count() { return g_thread_count.load(); }

void set_euler_substep_cap(double cap) {
    if (!(cap > 0.0)) throw Error("set_euler_substep_cap: cap must be > 0");
    g_substep_cap.store(cap);
}

double euler_substep_cap() { return g_substep_cap.load(); }

} // namespace wishart
