#include "novelty/ltv_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "novelty/errors.hpp"

namespace novelty {
namespace {

constexpr double kTimeSlack = 1e-12;

void require_span(const LtvSystem& system, const Grid& grid, double t0, double t1) {
    const double T = grid.horizon();
    if (!(t0 >= -kTimeSlack * T) || !(t1 <= T * (1.0 + kTimeSlack)) || !(t0 <= t1)) {
        throw RangeError("transition requested on [" + std::to_string(t0) + ", " +
                         std::to_string(t1) + "], grid covers [0, " + std::to_string(T) + "]");
    }
    if (system.covered_until() < t1 * (1.0 - kTimeSlack)) {
        throw RangeError("system table ends at t = " + std::to_string(system.covered_until()) +
                         " before the requested horizon " + std::to_string(t1));
    }
}

void check_finite(const Eigen::MatrixXd& M, double t, const char* what) {
    if (!M.allFinite()) {
        throw IntegrationError(std::string("non-finite ") + what + " during integration", t);
    }
}

// One RK4 step of dX/dt = A X is X <- P(hA) X with the degree-4 Taylor polynomial.
Eigen::MatrixXd rk4_step_matrix(const Eigen::MatrixXd& A, double h) {
    const Eigen::Index n = A.rows();
    const Eigen::MatrixXd hA = h * A;
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= 4; ++k) {
        term = term * hA / static_cast<double>(k);
        P += term;
    }
    return P;
}

// Input at the midpoint of [t_i, t_i+1] by cubic interpolation through the
// four nearest samples (one-sided at the ends), so RK4 keeps its order for
// smooth inputs. Falls back to the linear midpoint when N < 3.
Eigen::VectorXd midpoint_input(const Eigen::MatrixXd& U, int i) {
    const int N = static_cast<int>(U.cols()) - 1;
    if (N < 3) {
        return 0.5 * (U.col(i) + U.col(i + 1));
    }
    if (i == 0) {
        return (5.0 * U.col(0) + 15.0 * U.col(1) - 5.0 * U.col(2) + U.col(3)) / 16.0;
    }
    if (i == N - 1) {
        return (5.0 * U.col(N) + 15.0 * U.col(N - 1) - 5.0 * U.col(N - 2) + U.col(N - 3)) / 16.0;
    }
    return (-U.col(i - 1) + 9.0 * U.col(i) + 9.0 * U.col(i + 1) - U.col(i + 2)) / 16.0;
}

}  // namespace

GramianResult::GramianResult(Eigen::MatrixXd W, const GramianOptions& options) : W_(std::move(W)) {
    if (W_.rows() != W_.cols() || W_.rows() < 1) {
        throw ShapeError("gramian must be a nonempty square matrix");
    }
    if (!W_.allFinite()) {
        throw IllConditionedGramian("gramian has non-finite entries",
                                    std::numeric_limits<double>::infinity());
    }
    W_ = 0.5 * (W_ + W_.transpose()).eval();
    ldlt_.compute(W_);
    const Eigen::Index n = W_.rows();
    const Eigen::VectorXd pivots = ldlt_.vectorD();
    const double trace = W_.trace();
    const double floor = -1e-10 * std::abs(trace) / static_cast<double>(n);
    if (ldlt_.info() != Eigen::Success || pivots.minCoeff() < floor) {
        throw IllConditionedGramian("gramian is not positive semidefinite",
                                    std::numeric_limits<double>::infinity());
    }
    const double largest = pivots.cwiseAbs().maxCoeff();
    const double smallest = pivots.minCoeff();
    condition_ = smallest > 0.0 ? largest / smallest : std::numeric_limits<double>::infinity();
    if (!(condition_ <= options.condition_cap)) {
        throw IllConditionedGramian("gramian condition estimate " + std::to_string(condition_) +
                                        " exceeds cap " + std::to_string(options.condition_cap) +
                                        " (system is nearly uncontrollable on this horizon)",
                                    condition_);
    }
}

Eigen::VectorXd GramianResult::solve(const Eigen::VectorXd& b) const {
    if (b.size() != W_.rows()) {
        throw ShapeError("right-hand side does not match gramian dimension");
    }
    return ldlt_.solve(b);
}

Eigen::MatrixXd GramianResult::solve(const Eigen::MatrixXd& b) const {
    if (b.rows() != W_.rows()) {
        throw ShapeError("right-hand side does not match gramian dimension");
    }
    return ldlt_.solve(b);
}

double GramianResult::quadratic_form(const Eigen::VectorXd& b) const { return b.dot(solve(b)); }

double GramianResult::bilinear_form(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return a.dot(solve(b));
}

Eigen::MatrixXd state_transition(const LtvSystem& system, double t0, double t1, const Grid& grid) {
    require_span(system, grid, t0, t1);
    const Eigen::Index n = system.n();
    Eigen::MatrixXd Phi = Eigen::MatrixXd::Identity(n, n);
    if (t1 == t0) {
        return Phi;
    }
    const int steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / grid.step() - 1e-9)));
    const double h = (t1 - t0) / steps;

    if (system.is_time_invariant()) {
        const Eigen::MatrixXd P = rk4_step_matrix(system.A(0.0), h);
        for (int j = 0; j < steps; ++j) {
            Phi = P * Phi;
            check_finite(Phi, t0 + (j + 1) * h, "transition matrix");
        }
        return Phi;
    }

    for (int j = 0; j < steps; ++j) {
        const double t = t0 + j * h;
        const double t_end = (j + 1 == steps) ? t1 : t + h;
        const Eigen::MatrixXd A0 = system.A(t);
        const Eigen::MatrixXd Am = system.A(t + 0.5 * h);
        const Eigen::MatrixXd A1 = system.A(t_end);
        const Eigen::MatrixXd k1 = A0 * Phi;
        const Eigen::MatrixXd k2 = Am * (Phi + 0.5 * h * k1);
        const Eigen::MatrixXd k3 = Am * (Phi + 0.5 * h * k2);
        const Eigen::MatrixXd k4 = A1 * (Phi + h * k3);
        Phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_finite(Phi, t_end, "transition matrix");
    }
    return Phi;
}

void sweep_adjoint(const LtvSystem& system, const Grid& grid, const AdjointVisitor& visit) {
    require_span(system, grid, 0.0, grid.horizon());
    const int N = grid.intervals();
    const double h = grid.step();
    const Eigen::Index n = system.n();
    Eigen::MatrixXd Psi = Eigen::MatrixXd::Identity(n, n);
    visit(N, Psi);

    if (system.is_time_invariant()) {
        const Eigen::MatrixXd P = rk4_step_matrix(system.A(0.0), h);
        for (int i = N; i > 0; --i) {
            Psi = (Psi * P).eval();
            check_finite(Psi, grid.time(i - 1), "adjoint transition");
            visit(i - 1, Psi);
        }
        return;
    }

    // dΨ/dt = -Ψ A(t), stepped from t_i down to t_{i-1}.
    for (int i = N; i > 0; --i) {
        const double t = grid.time(i);
        const double t_prev = grid.time(i - 1);
        const Eigen::MatrixXd A0 = system.A(t);
        const Eigen::MatrixXd Am = system.A(t - 0.5 * h);
        const Eigen::MatrixXd A1 = system.A(t_prev);
        const Eigen::MatrixXd k1 = -Psi * A0;
        const Eigen::MatrixXd k2 = -(Psi - 0.5 * h * k1) * Am;
        const Eigen::MatrixXd k3 = -(Psi - 0.5 * h * k2) * Am;
        const Eigen::MatrixXd k4 = -(Psi - h * k3) * A1;
        Psi -= (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_finite(Psi, t_prev, "adjoint transition");
        visit(i - 1, Psi);
    }
}

std::vector<Eigen::MatrixXd> adjoint_transition_profile(const LtvSystem& system, const Grid& grid) {
    std::vector<Eigen::MatrixXd> profile(static_cast<std::size_t>(grid.nodes()));
    sweep_adjoint(system, grid, [&](int i, const Eigen::MatrixXd& Psi) {
        profile[static_cast<std::size_t>(i)] = Psi;
    });
    return profile;
}

GramianResult controllability_gramian(const LtvSystem& system, const Grid& grid,
                                      const GramianOptions& options) {
    const Eigen::VectorXd w = simpson_weights(grid);
    const Eigen::Index n = system.n();
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    const bool lti = system.is_time_invariant();
    const Eigen::MatrixXd B_const = lti ? system.B(0.0) : Eigen::MatrixXd();
    sweep_adjoint(system, grid, [&](int i, const Eigen::MatrixXd& Psi) {
        const Eigen::MatrixXd G = Psi * (lti ? B_const : system.B(grid.time(i)));
        W.selfadjointView<Eigen::Lower>().rankUpdate(G, w[i]);
    });
    W.triangularView<Eigen::StrictlyUpper>() = W.transpose();
    return GramianResult(std::move(W), options);
}

Eigen::MatrixXd propagate(const LtvSystem& system, const Eigen::VectorXd& x0,
                          const ControlSignal& u, const Grid& grid) {
    if (!(u.grid() == grid)) {
        throw ShapeError("control signal is sampled on a different grid");
    }
    if (u.dim() != system.m() || x0.size() != system.n()) {
        throw ShapeError("state or input dimension does not match the system");
    }
    require_span(system, grid, 0.0, grid.horizon());
    const int N = grid.intervals();
    const double h = grid.step();
    Eigen::MatrixXd X(system.n(), N + 1);
    X.col(0) = x0;
    Eigen::VectorXd x = x0;
    const Eigen::MatrixXd& U = u.samples();
    for (int i = 0; i < N; ++i) {
        const double t = grid.time(i);
        const double t1 = grid.time(i + 1);
        const double tm = t + 0.5 * h;
        const Eigen::VectorXd u0 = u.samples().col(i);
        const Eigen::VectorXd u1 = u.samples().col(i + 1);
        const Eigen::VectorXd um = midpoint_input(U, i);
        const Eigen::MatrixXd Am = system.A(tm);
        const Eigen::MatrixXd Bm = system.B(tm);
        const Eigen::VectorXd k1 = system.A(t) * x + system.B(t) * u0;
        const Eigen::VectorXd k2 = Am * (x + 0.5 * h * k1) + Bm * um;
        const Eigen::VectorXd k3 = Am * (x + 0.5 * h * k2) + Bm * um;
        const Eigen::VectorXd k4 = system.A(t1) * (x + h * k3) + system.B(t1) * u1;
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_finite(x, t1, "state");
        X.col(i + 1) = x;
    }
    return X;
}

Eigen::MatrixXd dt_transition(const DtSystem& system, int k0, int k1) {
    if (k0 < 0 || k1 > system.steps() || k0 > k1) {
        throw RangeError("dt_transition needs 0 <= k0 <= k1 <= p, got k0 = " + std::to_string(k0) +
                         ", k1 = " + std::to_string(k1) + ", p = " + std::to_string(system.steps()));
    }
    Eigen::MatrixXd Phi = Eigen::MatrixXd::Identity(system.n(), system.n());
    for (int k = k0; k < k1; ++k) {
        Phi = (system.A(k) * Phi).eval();
    }
    return Phi;
}

GramianResult dt_gramian(const DtSystem& system, const GramianOptions& options) {
    const Eigen::Index n = system.n();
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd tail = Eigen::MatrixXd::Identity(n, n);  // Φ(p, k+1)
    for (int k = system.steps() - 1; k >= 0; --k) {
        const Eigen::MatrixXd G = tail * system.B(k);
        W.noalias() += G * G.transpose();
        tail = (tail * system.A(k)).eval();
    }
    return GramianResult(std::move(W), options);
}

DtSystem zoh_discretize(const LtvSystem& system, double horizon, int steps, int substeps) {
    if (steps < 1) {
        throw SpecificationError("zero-order hold needs p >= 1");
    }
    if (substeps < 2 || substeps % 2 != 0) {
        throw SpecificationError("zero-order hold needs an even substep count");
    }
    const double h = horizon / steps;
    std::vector<Eigen::MatrixXd> Ad;
    std::vector<Eigen::MatrixXd> Bd;
    Ad.reserve(static_cast<std::size_t>(steps));
    Bd.reserve(static_cast<std::size_t>(steps));
    const Grid local(h, substeps);
    const Eigen::VectorXd w = simpson_weights(local);
    for (int k = 0; k < steps; ++k) {
        const LtvSystem piece = system.shifted(k * h);
        Eigen::MatrixXd integral = Eigen::MatrixXd::Zero(system.n(), system.m());
        Eigen::MatrixXd transition;
        sweep_adjoint(piece, local, [&](int i, const Eigen::MatrixXd& Psi) {
            integral.noalias() += w[i] * Psi * piece.B(local.time(i));
            if (i == 0) {
                transition = Psi;
            }
        });
        Ad.push_back(std::move(transition));
        Bd.push_back(std::move(integral));
    }
    return DtSystem(std::move(Ad), std::move(Bd));
}

}  // namespace novelty
