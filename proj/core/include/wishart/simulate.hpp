#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wishart/model.hpp"

namespace wishart {

enum class Scheme {
    ExactDiagonal, // exact Gaussian recursion per coordinate (jointly diagonal models)
    EulerOU,       // Euler-Maruyama on the matrix OU process Y
    EulerDirect,   // Euler on X itself with PSD projection each step
};

const char* scheme_name(Scheme s);

struct SimPlan {
    ModelParams params;
    InitialState x0;
    std::vector<double> t_grid; // strictly increasing, starts at 0
    std::int64_t n_paths;
    std::uint64_t seed;
    Scheme scheme;

    SimPlan(ModelParams params_, InitialState x0_, std::vector<double> t_grid_,
            std::int64_t n_paths_, std::uint64_t seed_, Scheme scheme_);
};

// Simulated trajectories. OU schemes store the alpha x N factor Y per
// (path, grid time) and expose X = Y^T Y; EulerDirect stores X directly.
// Storage is one flat row-major buffer to keep 1e5-path samples compact.
class WishartPathSample {
public:
    WishartPathSample(SimPlan plan, int y_rows, bool stores_y);

    const SimPlan& plan() const { return plan_; }
    bool has_y_states() const { return stores_y_; }
    int factor_rows() const { return y_rows_; }

    // X at (path, grid index); PSD by construction for OU schemes.
    PsdOperator state_at(std::int64_t path, int time_index) const;
    Eigen::MatrixXd state_matrix(std::int64_t path, int time_index) const;
    // Y at (path, grid index); only for OU schemes.
    Eigen::MatrixXd y_state_at(std::int64_t path, int time_index) const;

    // trace(m . X) without materializing X
    double trace_product(std::int64_t path, int time_index, const Eigen::MatrixXd& m) const;
    double trace_state(std::int64_t path, int time_index) const;
    // eigenvalues of X (descending); cheap for OU schemes where the nonzero
    // spectrum lives on the alpha x alpha Gram matrix Y Y^T
    Eigen::VectorXd state_eigenvalues(std::int64_t path, int time_index) const;

    int time_index_of(double t) const; // throws TimeNotOnGrid

    // raw slot access for the simulator
    double* slot(std::int64_t path, int time_index);
    const double* slot(std::int64_t path, int time_index) const;
    int slot_size() const { return slot_size_; }

    void export_csv(const std::string& path) const;
    // row-major binary dump plus JSON sidecar describing shape and seed
    void export_binary(const std::string& data_path, const std::string& sidecar_path) const;

private:
    SimPlan plan_;
    int y_rows_;
    bool stores_y_;
    int slot_size_;
    std::vector<double> buffer_;
};

// Simulate the plan. OU schemes require admissible parameters (alpha
// integer, rank(x0) <= alpha); EulerDirect runs for any alpha >= 0.
// Per-path randomness comes from stream(seed, path_index), so results are
// independent of execution order and thread count.
WishartPathSample simulate(const SimPlan& plan);

// Thread count used by the path loop: 0 = hardware concurrency, 1 = serial.
void set_thread_count(int n);
int thread_count();

// Substep ceiling for the Euler schemes: step size is capped at
// cap / max(1, ||A||_inf). Default 1e-3; halve it to expose discretization
// bias against the statistical error.
void set_euler_substep_cap(double cap);
double euler_substep_cap();

} // namespace wishart
