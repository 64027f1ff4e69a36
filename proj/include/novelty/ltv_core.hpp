#pragma once

#include <functional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "novelty/control_signal.hpp"
#include "novelty/grid.hpp"
#include "novelty/ltv_system.hpp"

namespace novelty {

struct GramianOptions {
    double condition_cap = 1e12;
};

// Symmetric PSD controllability gramian together with its LDLT factorization.
// W^-1 is never formed; use solve() and the quadratic-form helpers.
class GramianResult {
public:
    explicit GramianResult(Eigen::MatrixXd W, const GramianOptions& options = {});

    const Eigen::MatrixXd& matrix() const noexcept { return W_; }
    Eigen::Index dim() const noexcept { return W_.rows(); }

    // Ratio of the largest to smallest LDLT pivot magnitude.
    double condition_estimate() const noexcept { return condition_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
    double quadratic_form(const Eigen::VectorXd& b) const;  // b' W^-1 b
    double bilinear_form(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

private:
    Eigen::MatrixXd W_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
    double condition_ = 0.0;
};

// Φ(t1, t0) by fixed-step RK4 with step at most grid.step().
Eigen::MatrixXd state_transition(const LtvSystem& system, double t0, double t1, const Grid& grid);

// Visits Φ(T, t_i) for i = N, N-1, ..., 0, integrating dΨ/dt = -Ψ A(t)
// backward from Ψ(T) = I with RK4 on the grid.
using AdjointVisitor = std::function<void(int node, const Eigen::MatrixXd& transition)>;
void sweep_adjoint(const LtvSystem& system, const Grid& grid, const AdjointVisitor& visit);

// {Φ(T, t_i)} for every node, index i.
std::vector<Eigen::MatrixXd> adjoint_transition_profile(const LtvSystem& system, const Grid& grid);

// W = ∫ Φ(T,t) B B' Φ'(T,t) dt over [0, T = grid.horizon()], Simpson rule.
GramianResult controllability_gramian(const LtvSystem& system, const Grid& grid,
                                      const GramianOptions& options = {});

// State samples x(t_i) as columns of an n × (N+1) matrix. RK4 midpoint
// stages read the input by cubic interpolation of the neighbouring samples.
Eigen::MatrixXd propagate(const LtvSystem& system, const Eigen::VectorXd& x0,
                          const ControlSignal& u, const Grid& grid);

// A(k1-1) ··· A(k0), identity for k0 == k1.
Eigen::MatrixXd dt_transition(const DtSystem& system, int k0, int k1);

// Σ_k G(k) G(k)' with G(k) = Φ(p, k+1) B(k).
GramianResult dt_gramian(const DtSystem& system, const GramianOptions& options = {});

// Zero-order-hold discretization on p equal steps of [0, T]; each step is
// integrated on `substeps` RK4/Simpson subintervals.
DtSystem zoh_discretize(const LtvSystem& system, double horizon, int steps, int substeps = 16);

}  // namespace novelty
