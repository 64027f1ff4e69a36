#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "novelty/grid.hpp"

namespace novelty {

// Continuous-time linear system dx/dt = A(t) x + B(t) u.
//
// Three representations share one value type:
//   * time_invariant: constant (A, B);
//   * analytic: closures evaluated exactly at any t (including RK4 stage times);
//   * tabulated: matrices on a uniform grid, piecewise-linear in t.
// Systems are immutable after construction and cheap to copy, so one instance
// can be shared across concurrent evaluations.
class LtvSystem {
public:
    using MatrixFn = std::function<Eigen::MatrixXd(double)>;

    static LtvSystem time_invariant(Eigen::MatrixXd A, Eigen::MatrixXd B);
    static LtvSystem analytic(Eigen::Index n, Eigen::Index m, MatrixFn A, MatrixFn B);
    static LtvSystem tabulated(const Grid& table_grid, std::vector<Eigen::MatrixXd> A,
                               std::vector<Eigen::MatrixXd> B);

    Eigen::Index n() const noexcept;
    Eigen::Index m() const noexcept;

    Eigen::MatrixXd A(double t) const;
    Eigen::MatrixXd B(double t) const;

    bool is_time_invariant() const noexcept;

    // Last time at which A and B are defined (infinity for closures and LTI).
    double covered_until() const noexcept;

    // System seen from t0: A'(t) = A(t + t0). Nonzero initial times are only
    // handled this way; every operation integrates from t = 0.
    LtvSystem shifted(double t0) const;

private:
    struct Model;
    LtvSystem(std::shared_ptr<const Model> model, double offset);

    std::shared_ptr<const Model> model_;
    double offset_ = 0.0;
};

// Discrete-time system x(k+1) = A(k) x(k) + B(k) u(k), k = 0..p-1.
class DtSystem {
public:
    DtSystem(std::vector<Eigen::MatrixXd> A, std::vector<Eigen::MatrixXd> B);
    static DtSystem time_invariant(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int steps);

    Eigen::Index n() const noexcept { return n_; }
    Eigen::Index m() const noexcept { return m_; }
    int steps() const noexcept { return static_cast<int>(A_.size()); }

    const Eigen::MatrixXd& A(int k) const;
    const Eigen::MatrixXd& B(int k) const;

private:
    std::vector<Eigen::MatrixXd> A_;
    std::vector<Eigen::MatrixXd> B_;
    Eigen::Index n_ = 0;
    Eigen::Index m_ = 0;
};

}  // namespace novelty
