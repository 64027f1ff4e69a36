#include "novelty/novelty_dt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>

#include "novelty/errors.hpp"

namespace novelty {
namespace {

std::string fmt(double x) { return std::to_string(x); }

// Columns k*m .. k*m+m-1 hold G(k) = Φ(p, k+1) B(k).
Eigen::MatrixXd input_map(const DtSystem& system) {
    const Eigen::Index n = system.n();
    const Eigen::Index m = system.m();
    const int p = system.steps();
    Eigen::MatrixXd M(n, m * p);
    Eigen::MatrixXd tail = Eigen::MatrixXd::Identity(n, n);
    for (int k = p - 1; k >= 0; --k) {
        M.middleCols(k * m, m) = tail * system.B(k);
        tail = (tail * system.A(k)).eval();
    }
    return M;
}

Eigen::Map<const Eigen::VectorXd> flat(const Eigen::MatrixXd& samples) {
    return Eigen::Map<const Eigen::VectorXd>(samples.data(), samples.size());
}

void check_inputs(const DtSystem& system, const DtTransferSpec& spec, const DtControlSequence& v,
                  double energy_tol) {
    spec.validate(system.n());
    if (v.dim() != system.m() || v.steps() != system.steps()) {
        throw ShapeError("prior sequence is " + std::to_string(v.dim()) + "x" +
                         std::to_string(v.steps()) + ", expected " + std::to_string(system.m()) +
                         "x" + std::to_string(system.steps()));
    }
    if (std::abs(v.energy() - spec.gamma_v) > energy_tol * spec.gamma_v) {
        throw SpecificationError("prior sequence energy " + fmt(v.energy()) +
                                 " differs from γv = " + fmt(spec.gamma_v));
    }
}

FeasibilityReport dt_report(double e_prior, double e_next, const DtTransferSpec& spec, int p,
                            double rel_tol) {
    FeasibilityReport report;
    report.e_prior = e_prior;
    report.e_next = e_next;
    report.margin_prior = p * spec.gamma_v - e_prior;
    report.margin_next = p * spec.gamma_u - e_next;
    report.tolerance = rel_tol * p * std::max(spec.gamma_v, spec.gamma_u);
    report.feasible = report.margin_prior > report.tolerance && report.margin_next > report.tolerance;
    return report;
}

}  // namespace

DtControlSequence::DtControlSequence(Eigen::MatrixXd samples) : samples_(std::move(samples)) {
    if (samples_.rows() < 1 || samples_.cols() < 1) {
        throw ShapeError("control sequence needs m >= 1 and p >= 1");
    }
    if (!samples_.allFinite()) {
        throw SpecificationError("control sequence contains non-finite entries");
    }
}

double DtControlSequence::energy() const { return samples_.squaredNorm() / steps(); }

void DtTransferSpec::validate(Eigen::Index n) const {
    if (!(gamma_v > 0.0) || !std::isfinite(gamma_v)) {
        throw SpecificationError("γv must be positive, got " + fmt(gamma_v));
    }
    if (!(gamma_u > 0.0) || !std::isfinite(gamma_u)) {
        throw SpecificationError("γu must be positive, got " + fmt(gamma_u));
    }
    if (x_0.size() != n || x_f.size() != n || (x_r && x_r->size() != n)) {
        throw ShapeError("endpoint dimension does not match state dimension " + std::to_string(n));
    }
    if (!x_0.allFinite() || !x_f.allFinite() || (x_r && !x_r->allFinite())) {
        throw SpecificationError("endpoints contain non-finite entries");
    }
}

double novelty_of_dt(const DtControlSequence& v, const DtControlSequence& u, double gamma_v,
                     double gamma_u) {
    if (v.dim() != u.dim() || v.steps() != u.steps()) {
        throw ShapeError("novelty of sequences with different shapes");
    }
    if (!(gamma_v > 0.0) || !(gamma_u > 0.0)) {
        throw SpecificationError("novelty normalization needs γv, γu > 0");
    }
    return flat(v.samples()).dot(flat(u.samples())) / (v.steps() * std::sqrt(gamma_v * gamma_u));
}

KktResiduals kkt_residuals(const DtSystem& system, const DtTransferSpec& spec,
                           const DtControlSequence& v, const DtSolution& solution) {
    const int p = system.steps();
    const Eigen::MatrixXd M = input_map(system);
    const double root = std::sqrt(spec.gamma_v * spec.gamma_u);
    const Eigen::VectorXd grad = -flat(v.samples()) / (p * root) +
                                 (2.0 * solution.gamma / p) * flat(solution.u.samples()) +
                                 M.transpose() * solution.delta;
    Eigen::VectorXd x = spec.x_0;
    for (int k = 0; k < p; ++k) {
        x = system.A(k) * x + system.B(k) * solution.u.samples().col(k);
    }
    const Eigen::VectorXd free = dt_transition(system, 0, p) * spec.x_0;
    const double scale = std::max({spec.x_f.norm(), free.norm(), 1e-300});
    KktResiduals out;
    out.stationarity = grad.cwiseAbs().maxCoeff();
    out.slackness = std::abs(solution.gamma * (solution.u.energy() - spec.gamma_u));
    out.endpoint = (x - spec.x_f).norm() / scale;
    out.energy = std::abs(solution.u.energy() - spec.gamma_u) / spec.gamma_u;
    return out;
}

DtSolution min_novelty_control_dt(const DtSystem& system, const DtTransferSpec& spec,
                                  const DtControlSequence& v, const DtOptions& options) {
    check_inputs(system, spec, v, options.prior_energy_tol);
    const int p = system.steps();
    const Eigen::Index m = system.m();
    const Eigen::MatrixXd M = input_map(system);
    const GramianResult gramian(M * M.transpose(), options.gramian);
    const Eigen::VectorXd s = M * flat(v.samples());
    const Eigen::VectorXd r = spec.x_f - dt_transition(system, 0, p) * spec.x_0;
    const FeasibilityReport report = dt_report(gramian.quadratic_form(s),
                                               gramian.quadratic_form(r), spec, p,
                                               options.feasibility_tol);
    const double root = std::sqrt(spec.gamma_v * spec.gamma_u);
    const Eigen::VectorXd Winv_r = gramian.solve(r);
    const double sr = s.dot(Winv_r);

    Eigen::VectorXd u;
    double gamma = 0.0;
    double J = 0.0;
    const bool fully_constrained = m * p == system.n();
    if (fully_constrained) {
        // G is square and invertible: the endpoint alone fixes u.
        if (std::abs(report.margin_next) > report.tolerance) {
            throw InfeasibleTransfer(report);
        }
        u = M.transpose() * Winv_r;
        gamma = 1.0 / (2.0 * root);
        J = sr / (p * root);
    } else {
        if (!(report.margin_next > report.tolerance)) {
            throw InfeasibleTransfer(report);
        }
        if (!(report.margin_prior > report.tolerance)) {
            throw DegenerateSolution(
                "prior sequence lies in the range of the input map; every admissible input has "
                "the same novelty (energy multiplier γ -> 0)");
        }
        const double c = std::sqrt(report.margin_next / report.margin_prior);
        u = c * flat(v.samples()) + M.transpose() * gramian.solve(Eigen::VectorXd(r - c * s));
        gamma = 1.0 / (2.0 * c * root);
        J = (sr + std::sqrt(report.margin_prior * report.margin_next)) / (p * root);
    }
    // Stationarity: c_vec = (2γ/p) u + M'δ, solved in the least-squares sense.
    const Eigen::VectorXd residual = flat(v.samples()) / (p * root) - (2.0 * gamma / p) * u;
    const Eigen::VectorXd delta = gramian.solve(Eigen::VectorXd(M * residual));

    DtSolution out{DtControlSequence(Eigen::Map<const Eigen::MatrixXd>(u.data(), m, p)),
                   gamma,
                   delta,
                   J,
                   false,
                   report,
                   s,
                   r};
    out.relaxation_tight = std::abs(out.u.energy() - spec.gamma_u) <= 1e-8 * spec.gamma_u;
    return out;
}

DtSolution qp_oracle_dt(const DtSystem& system, const DtTransferSpec& spec,
                        const DtControlSequence& v, const OracleOptions& options) {
    check_inputs(system, spec, v, 1e-8);
    const int p = system.steps();
    const Eigen::Index m = system.m();
    const Eigen::Index n = system.n();
    const Eigen::MatrixXd M = input_map(system);
    const Eigen::VectorXd r = spec.x_f - dt_transition(system, 0, p) * spec.x_0;
    const double root = std::sqrt(spec.gamma_v * spec.gamma_u);
    const Eigen::VectorXd c = flat(v.samples()) / (p * root);
    const double R = std::sqrt(p * spec.gamma_u);

    // Orthonormal basis of range(M') for projections onto {y : M y = r}.
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(M.transpose());
    const Eigen::MatrixXd upper = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    const Eigen::VectorXd diag = upper.diagonal().cwiseAbs();
    if (M.cols() < n || !(diag.minCoeff() > 1e-12 * diag.maxCoeff())) {
        throw ConvergenceError("input map is rank deficient; no feasible transfer",
                               std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::infinity());
    }
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(M.cols(), n);
    const auto min_norm = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd {
        const Eigen::VectorXd coeffs =
            upper.triangularView<Eigen::Upper>().transpose().solve(b);
        return Q * coeffs;
    };
    const Eigen::VectorXd centre = min_norm(r);
    const double rho2 = R * R - centre.squaredNorm();
    if (rho2 < -1e-12 * R * R) {
        throw ConvergenceError("energy budget below the minimum transfer energy (infeasible)",
                               centre.norm() - R, std::numeric_limits<double>::infinity());
    }
    const double rho = std::sqrt(std::max(rho2, 0.0));

    // Affine set ∩ ball is a ball of radius rho around `centre` inside the affine set.
    const auto project = [&](const Eigen::VectorXd& q) -> Eigen::VectorXd {
        const Eigen::VectorXd d = q - Q * (Q.transpose() * q);
        const double len = d.norm();
        return len > rho ? Eigen::VectorXd(centre + d * (rho / len)) : Eigen::VectorXd(centre + d);
    };

    const double cnorm = c.norm();
    const double t = options.step * R / std::max(cnorm, 1e-300);
    Eigen::MatrixXd dual_basis(M.cols(), n + 1);
    dual_basis.leftCols(n) = M.transpose();
    Eigen::VectorXd y = project(Eigen::VectorXd::Zero(M.cols()));
    double gap = std::numeric_limits<double>::infinity();
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(n + 1);
    for (int it = 0; it < options.max_iterations; ++it) {
        const Eigen::VectorXd next = project(y + t * c);
        const double change = (next - y).norm();
        y = next;
        dual_basis.col(n) = y;
        coeffs = dual_basis.colPivHouseholderQr().solve(c);
        const Eigen::VectorXd delta = coeffs.head(n);
        gap = R * (c - M.transpose() * delta).norm() + delta.dot(r) - c.dot(y);
        if (std::abs(gap) <= options.gap_tolerance && change <= 1e-13 * R) {
            const double gamma = 0.5 * p * coeffs[n];
            DtSolution out{DtControlSequence(Eigen::Map<const Eigen::MatrixXd>(y.data(), m, p)),
                           gamma,
                           delta,
                           c.dot(y),
                           false,
                           dt_report(min_norm(M * flat(v.samples())).squaredNorm(),
                                     centre.squaredNorm(), spec, p, 1e-9),
                           M * flat(v.samples()),
                           r};
            out.relaxation_tight =
                std::abs(out.u.energy() - spec.gamma_u) <= 1e-6 * spec.gamma_u;
            return out;
        }
    }
    throw ConvergenceError("projected gradient hit the iteration cap",
                           (M * y - r).norm(), gap);
}

DtControlSequence zoh_average(const ControlSignal& v, int steps) {
    if (steps < 1) {
        throw SpecificationError("zero-order hold needs p >= 1");
    }
    const Grid& grid = v.grid();
    const Eigen::MatrixXd& U = v.samples();
    const int N = grid.intervals();
    const double h = grid.step();
    Eigen::MatrixXd cumulative(U.rows(), N + 1);
    cumulative.col(0).setZero();
    for (int i = 0; i < N; ++i) {
        cumulative.col(i + 1) = cumulative.col(i) + 0.5 * h * (U.col(i) + U.col(i + 1));
    }
    // ∫_0^t v by exact integration of the linear pieces.
    const auto integral = [&](double t) -> Eigen::VectorXd {
        const int i = std::clamp(static_cast<int>(t / h), 0, N - 1);
        const double dt = t - grid.time(i);
        return cumulative.col(i) + 0.5 * dt * (U.col(i) + v.at(t));
    };
    const double T = grid.horizon();
    Eigen::MatrixXd out(U.rows(), steps);
    Eigen::VectorXd previous = Eigen::VectorXd::Zero(U.rows());
    for (int k = 0; k < steps; ++k) {
        const double b = (k + 1 == steps) ? T : T * (k + 1) / steps;
        const Eigen::VectorXd current = integral(b);
        out.col(k) = (current - previous) / (T / steps);
        previous = current;
    }
    return DtControlSequence(std::move(out));
}

std::vector<ConsistencyRow> ct_dt_consistency(const LtvSystem& system, const TransferSpec& spec,
                                              const ControlSignal& v, const Grid& grid,
                                              const std::vector<int>& steps,
                                              const SolverOptions& options) {
    const double J_ct = min_novelty_control(system, spec, v, grid, options).J;
    DtTransferSpec dspec;
    dspec.x_0 = spec.x_0;
    dspec.x_f = spec.x_f;
    dspec.gamma_v = spec.gamma_v;
    dspec.gamma_u = spec.gamma_u;
    std::vector<ConsistencyRow> table;
    table.reserve(steps.size());
    for (const int p : steps) {
        const DtSystem discrete = zoh_discretize(system, spec.horizon, p);
        const DtControlSequence averaged = zoh_average(v, p);
        const double scale = std::sqrt(spec.gamma_v / averaged.energy());
        const DtControlSequence prior(averaged.samples() * scale);
        DtOptions dopts;
        dopts.gramian = options.gramian;
        dopts.feasibility_tol = options.feasibility_tol;
        const double J_dt = min_novelty_control_dt(discrete, dspec, prior, dopts).J;
        table.push_back(ConsistencyRow{p, J_dt, J_ct, std::abs(J_dt - J_ct)});
    }
    return table;
}

}  // namespace novelty
