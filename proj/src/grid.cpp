#include "novelty/grid.hpp"

#include <cmath>
#include <string>

#include "novelty/errors.hpp"

namespace novelty {

Grid::Grid(double horizon, int intervals) : horizon_(horizon), intervals_(intervals) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw SpecificationError("grid horizon must be positive and finite");
    }
    if (intervals < 2 || intervals % 2 != 0) {
        throw SpecificationError("grid needs an even number of subintervals >= 2, got " +
                                 std::to_string(intervals));
    }
}

Eigen::VectorXd simpson_weights(const Grid& grid) {
    const int N = grid.intervals();
    const double h = grid.step();
    Eigen::VectorXd w(N + 1);
    for (int i = 0; i <= N; ++i) {
        if (i == 0 || i == N) {
            w[i] = h / 3.0;
        } else {
            w[i] = (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
        }
    }
    return w;
}

}  // namespace novelty
