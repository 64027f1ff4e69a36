#include "novelty/control_signal.hpp"

#include <algorithm>
#include <cmath>

#include "novelty/errors.hpp"

namespace novelty {

ControlSignal::ControlSignal(Grid grid, Eigen::MatrixXd samples)
    : grid_(grid), samples_(std::move(samples)) {
    if (samples_.cols() != grid_.nodes()) {
        throw ShapeError("control signal has " + std::to_string(samples_.cols()) +
                         " samples, grid has " + std::to_string(grid_.nodes()) + " nodes");
    }
    if (samples_.rows() < 1) {
        throw ShapeError("control signal dimension must be >= 1");
    }
    if (!samples_.allFinite()) {
        throw SpecificationError("control signal contains non-finite samples");
    }
}

ControlSignal ControlSignal::zeros(const Grid& grid, Eigen::Index dim) {
    return ControlSignal(grid, Eigen::MatrixXd::Zero(dim, grid.nodes()));
}

ControlSignal ControlSignal::from_function(const Grid& grid, Eigen::Index dim,
                                           const std::function<Eigen::VectorXd(double)>& f) {
    Eigen::MatrixXd samples(dim, grid.nodes());
    for (int i = 0; i < grid.nodes(); ++i) {
        Eigen::VectorXd value = f(grid.time(i));
        if (value.size() != dim) {
            throw ShapeError("signal function returned a vector of the wrong size");
        }
        samples.col(i) = value;
    }
    return ControlSignal(grid, std::move(samples));
}

Eigen::VectorXd ControlSignal::at(double t) const {
    const double T = grid_.horizon();
    if (t < 0.0 || t > T * (1.0 + 1e-12)) {
        throw RangeError("signal evaluated outside [0, T]");
    }
    const double pos = std::clamp(t / grid_.step(), 0.0, static_cast<double>(grid_.intervals()));
    const int i = std::min(static_cast<int>(pos), grid_.intervals() - 1);
    const double frac = pos - i;
    return (1.0 - frac) * samples_.col(i) + frac * samples_.col(i + 1);
}

double ControlSignal::energy() const {
    const Eigen::VectorXd w = simpson_weights(grid_);
    return samples_.colwise().squaredNorm().dot(w.transpose()) / grid_.horizon();
}

Eigen::VectorXd ControlSignal::mean() const {
    return samples_ * simpson_weights(grid_) / grid_.horizon();
}

ControlSignal ControlSignal::scaled(double factor) const {
    return ControlSignal(grid_, samples_ * factor);
}

double inner_product(const ControlSignal& a, const ControlSignal& b) {
    if (!(a.grid() == b.grid()) || a.dim() != b.dim()) {
        throw ShapeError("inner product of signals on different grids or dimensions");
    }
    const Eigen::VectorXd w = simpson_weights(a.grid());
    return (a.samples().cwiseProduct(b.samples())).colwise().sum().dot(w.transpose());
}

}  // namespace novelty
