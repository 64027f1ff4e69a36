#pragma once

#include <functional>

#include <Eigen/Core>

#include "novelty/grid.hpp"

namespace novelty {

// Vector-valued input sampled at every node of a Grid. Column i of samples()
// is u(t_i); values between nodes are piecewise-linear.
class ControlSignal {
public:
    ControlSignal(Grid grid, Eigen::MatrixXd samples);

    static ControlSignal zeros(const Grid& grid, Eigen::Index dim);
    static ControlSignal from_function(const Grid& grid, Eigen::Index dim,
                                       const std::function<Eigen::VectorXd(double)>& f);

    const Grid& grid() const noexcept { return grid_; }
    Eigen::Index dim() const noexcept { return samples_.rows(); }
    const Eigen::MatrixXd& samples() const noexcept { return samples_; }
    Eigen::VectorXd sample(int i) const { return samples_.col(i); }

    Eigen::VectorXd at(double t) const;

    // Average per-time energy (1/T) ∫ ||u||² dt, Simpson rule.
    double energy() const;

    // (1/T) ∫ u dt, Simpson rule.
    Eigen::VectorXd mean() const;

    ControlSignal scaled(double factor) const;

private:
    Grid grid_;
    Eigen::MatrixXd samples_;
};

// Simpson inner product ∫ a(t)'b(t) dt; throws ShapeError on mismatched grids.
double inner_product(const ControlSignal& a, const ControlSignal& b);

}  // namespace novelty
