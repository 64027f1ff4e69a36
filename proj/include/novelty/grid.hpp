#pragma once

#include <Eigen/Core>

namespace novelty {

// Uniform time grid on [0, T] with an even number of subintervals, so that
// composite Simpson quadrature applies to every node-sampled integrand.
// Times are in milliseconds.
class Grid {
public:
    static constexpr int kDefaultIntervals = 1000;

    Grid(double horizon, int intervals = kDefaultIntervals);

    double horizon() const noexcept { return horizon_; }
    int intervals() const noexcept { return intervals_; }
    int nodes() const noexcept { return intervals_ + 1; }
    double step() const noexcept { return horizon_ / intervals_; }

    // t_i = i h, with t_N returned as exactly T.
    double time(int i) const noexcept {
        return i == intervals_ ? horizon_ : i * step();
    }

    bool operator==(const Grid& other) const noexcept {
        return horizon_ == other.horizon_ && intervals_ == other.intervals_;
    }

private:
    double horizon_;
    int intervals_;
};

// Composite Simpson weights (h/3)[1 4 2 4 ... 2 4 1]; every quadrature in the
// library goes through these so constraint checks match solver arithmetic.
Eigen::VectorXd simpson_weights(const Grid& grid);

}  // namespace novelty
