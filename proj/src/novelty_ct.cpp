#include "novelty/novelty_ct.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace novelty {
namespace {

std::string fmt(double x) { return std::to_string(x); }

struct Sweep {
    Eigen::MatrixXd W;
    Eigen::MatrixXd free_transition;
    Eigen::MatrixXd input_integral;
    Eigen::VectorXd s;  // zero unless a prior signal was supplied
};

void require_grid_match(const ControlSignal& v, const Grid& grid, const LtvSystem& system) {
    if (!(v.grid() == grid)) {
        throw ShapeError("prior input is sampled on a different grid than the solver");
    }
    if (v.dim() != system.m()) {
        throw ShapeError("prior input dimension " + std::to_string(v.dim()) +
                         " does not match system input dimension " + std::to_string(system.m()));
    }
}

Sweep sweep_transfer(const LtvSystem& system, const Grid& grid, const ControlSignal* v) {
    const Eigen::VectorXd w = simpson_weights(grid);
    const Eigen::Index n = system.n();
    const bool lti = system.is_time_invariant();
    const Eigen::MatrixXd B_const = lti ? system.B(0.0) : Eigen::MatrixXd();
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd integral = Eigen::MatrixXd::Zero(n, system.m());
    Eigen::MatrixXd phi0;
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    sweep_adjoint(system, grid, [&](int i, const Eigen::MatrixXd& Psi) {
        const Eigen::MatrixXd G = Psi * (lti ? B_const : system.B(grid.time(i)));
        W.selfadjointView<Eigen::Lower>().rankUpdate(G, w[i]);
        integral.noalias() += w[i] * G;
        if (v) {
            s.noalias() += w[i] * (G * v->samples().col(i));
        }
        if (i == 0) {
            phi0 = Psi;
        }
    });
    W.triangularView<Eigen::StrictlyUpper>() = W.transpose();
    return Sweep{std::move(W), std::move(phi0), std::move(integral), std::move(s)};
}

TransferKernel to_kernel(Sweep& sweep, const GramianOptions& options) {
    return TransferKernel{GramianResult(std::move(sweep.W), options),
                          std::move(sweep.free_transition), std::move(sweep.input_integral)};
}

// u(t_i) = kappa * prior_i + G_i' z, with prior either the sampled v or a constant.
ControlSignal assemble(const LtvSystem& system, const Grid& grid, double kappa,
                       const ControlSignal* v, const Eigen::VectorXd& constant,
                       const Eigen::VectorXd& z) {
    Eigen::MatrixXd U(system.m(), grid.nodes());
    const bool lti = system.is_time_invariant();
    const Eigen::MatrixXd Bt = lti ? Eigen::MatrixXd(system.B(0.0).transpose()) : Eigen::MatrixXd();
    sweep_adjoint(system, grid, [&](int i, const Eigen::MatrixXd& Psi) {
        const Eigen::VectorXd y = Psi.transpose() * z;
        U.col(i) = (lti ? Bt : Eigen::MatrixXd(system.B(grid.time(i)).transpose())) * y;
        U.col(i) += kappa * (v ? Eigen::VectorXd(v->samples().col(i)) : constant);
    });
    return ControlSignal(grid, std::move(U));
}

void require_prior_energy(double energy, double gamma_v, double tol) {
    if (std::abs(energy - gamma_v) > tol * gamma_v) {
        throw SpecificationError("prior input energy " + fmt(energy) + " differs from γv = " +
                                 fmt(gamma_v) +
                                 "; rescale it (see constant_prior / sinusoid_prior)");
    }
}

double feasibility_tolerance(const TransferSpec& spec, double rel) {
    return rel * std::max(spec.gamma_v * spec.horizon, spec.gamma_u * spec.horizon);
}

FeasibilityReport make_report(double e_prior, double e_next, double budget_prior,
                              double budget_next, double tolerance) {
    FeasibilityReport report;
    report.e_prior = e_prior;
    report.e_next = e_next;
    report.margin_prior = budget_prior - e_prior;
    report.margin_next = budget_next - e_next;
    report.tolerance = tolerance;
    report.feasible = report.margin_prior > tolerance && report.margin_next > tolerance;
    return report;
}

// Shared closed form: kappa = sqrt(margin_next / margin_prior), u = kappa prior + G' W^-1 (r - kappa s).
struct ClosedForm {
    double kappa;
    Eigen::VectorXd z;
    Eigen::VectorXd lambda0;
};

ClosedForm closed_form(const FeasibilityReport& report, const Eigen::VectorXd& s,
                       const Eigen::VectorXd& r, const TransferKernel& kernel, double T) {
    const double kappa = std::sqrt(report.margin_next / report.margin_prior);
    const Eigen::VectorXd z = kernel.gramian.solve(Eigen::VectorXd(r - kappa * s));
    // λ(0) = -(2μ/T) Φ'(T,0) z; the 2μ factor is applied by the caller.
    return ClosedForm{kappa, z, kernel.free_transition.transpose() * z * (-1.0 / T)};
}

}  // namespace

void TransferSpec::validate(Eigen::Index n) const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw SpecificationError("horizon T must be positive, got " + fmt(horizon));
    }
    if (!(gamma_v > 0.0) || !std::isfinite(gamma_v)) {
        throw SpecificationError("γv must be positive, got " + fmt(gamma_v));
    }
    if (!(gamma_u > 0.0) || !std::isfinite(gamma_u)) {
        throw SpecificationError("γu must be positive, got " + fmt(gamma_u));
    }
    if (prior_horizon && !(*prior_horizon > 0.0)) {
        throw SpecificationError("prior horizon T* must be positive");
    }
    if (x_0.size() != n || x_f.size() != n || (x_r && x_r->size() != n)) {
        throw ShapeError("endpoint dimension does not match state dimension " + std::to_string(n));
    }
    if (!x_0.allFinite() || !x_f.allFinite() || (x_r && !x_r->allFinite())) {
        throw SpecificationError("endpoints contain non-finite entries");
    }
}

InfeasibleTransfer::InfeasibleTransfer(const FeasibilityReport& report)
    : Error("transfer infeasible: margin_prior = " + fmt(report.margin_prior) +
            ", margin_next = " + fmt(report.margin_next) + " (tolerance " +
            fmt(report.tolerance) + ")"),
      report_(report) {}

std::string to_string(Variant variant) {
    switch (variant) {
        case Variant::InnerProduct: return "inner-product";
        case Variant::Euclidean: return "euclidean";
        case Variant::Average: return "average";
    }
    return "unknown";
}

TransferKernel build_transfer_kernel(const LtvSystem& system, const Grid& grid,
                                     const GramianOptions& options) {
    Sweep sweep = sweep_transfer(system, grid, nullptr);
    return to_kernel(sweep, options);
}

double novelty_of(const ControlSignal& v, const ControlSignal& u, double gamma_v, double gamma_u) {
    if (!(gamma_v > 0.0) || !(gamma_u > 0.0)) {
        throw SpecificationError("novelty normalization needs γv, γu > 0");
    }
    return inner_product(v, u) / (v.grid().horizon() * std::sqrt(gamma_v * gamma_u));
}

TransferVectors transfer_vectors(const LtvSystem& system, const TransferSpec& spec,
                                 const ControlSignal& v, const Grid& grid) {
    spec.validate(system.n());
    require_grid_match(v, grid, system);
    Sweep sweep = sweep_transfer(system, grid, &v);
    return TransferVectors{std::move(sweep.s), spec.x_f - sweep.free_transition * spec.x_0};
}

TransferVectors transfer_vectors(const LtvSystem& system, const TransferSpec& spec,
                                 const Grid& grid) {
    spec.validate(system.n());
    if (!spec.x_r) {
        throw SpecificationError("s needs either a prior input or x_r");
    }
    const Eigen::MatrixXd Phi = state_transition(system, 0.0, grid.horizon(), grid);
    return TransferVectors{spec.x_0 - Phi * *spec.x_r, spec.x_f - Phi * spec.x_0};
}

FeasibilityReport check_existence(const TransferSpec& spec, const Eigen::VectorXd& s,
                                  const Eigen::VectorXd& r, const GramianResult& gramian,
                                  double tolerance) {
    const double T = spec.horizon;
    return make_report(gramian.quadratic_form(s), gramian.quadratic_form(r), spec.gamma_v * T,
                       spec.gamma_u * T, feasibility_tolerance(spec, tolerance));
}

double optimal_novelty(const FeasibilityReport& report, const Eigen::VectorXd& s,
                       const Eigen::VectorXd& r, const GramianResult& gramian,
                       const TransferSpec& spec) {
    if (!report.feasible) {
        throw InfeasibleTransfer(report);
    }
    const double sr = gramian.bilinear_form(s, r);
    return (sr + std::sqrt(report.margin_prior * report.margin_next)) /
           (spec.horizon * std::sqrt(spec.gamma_v * spec.gamma_u));
}

NoveltySolution min_novelty_control(const LtvSystem& system, const TransferSpec& spec,
                                    const ControlSignal& v, const Grid& grid,
                                    const SolverOptions& options) {
    spec.validate(system.n());
    require_grid_match(v, grid, system);
    if (grid.horizon() != spec.horizon) {
        throw ShapeError("grid horizon differs from the transfer horizon");
    }
    require_prior_energy(v.energy(), spec.gamma_v, options.prior_energy_tol);

    Sweep sweep = sweep_transfer(system, grid, &v);
    const TransferKernel kernel = to_kernel(sweep, options.gramian);
    const Eigen::VectorXd r = spec.x_f - kernel.free_transition * spec.x_0;
    const FeasibilityReport report =
        check_existence(spec, sweep.s, r, kernel.gramian, options.feasibility_tol);
    if (!report.feasible) {
        throw InfeasibleTransfer(report);
    }

    const double T = spec.horizon;
    const double root = std::sqrt(spec.gamma_v * spec.gamma_u);
    const ClosedForm cf = closed_form(report, sweep.s, r, kernel, T);
    const double mu = 1.0 / (2.0 * cf.kappa * root);
    const double sr = kernel.gramian.bilinear_form(sweep.s, r);
    // J = sr/(T√) + (1/(2μγu)) (1 - e_prior/(γv T)), the expression in μ.
    const double J = sr / (T * root) + (1.0 - report.e_prior / (spec.gamma_v * T)) /
                                           (2.0 * mu * spec.gamma_u);

    NoveltySolution out{assemble(system, grid, cf.kappa, &v, Eigen::VectorXd(), cf.z),
                        mu,
                        J,
                        report,
                        sweep.s,
                        r,
                        Variant::InnerProduct,
                        {}};
    out.diagnostics.kappa = cf.kappa;
    out.diagnostics.lambda0 = cf.lambda0 * (2.0 * mu);
    out.diagnostics.condition_estimate = kernel.gramian.condition_estimate();
    return out;
}

NoveltySolution euclidean_min_control(const LtvSystem& system, const TransferSpec& spec,
                                      const ControlSignal& v, const Grid& grid,
                                      const SolverOptions& options) {
    NoveltySolution base = min_novelty_control(system, spec, v, grid, options);
    const FeasibilityReport& report = base.feasibility;
    const double T = spec.horizon;
    const double mu_e = -1.0 + std::sqrt(report.margin_prior / report.margin_next);
    if (!(1.0 + mu_e > 1e-300)) {
        throw DegenerateSolution("euclidean multiplier reached -1");
    }
    const double sr = base.J * T * std::sqrt(spec.gamma_v * spec.gamma_u) -
                      std::sqrt(report.margin_prior * report.margin_next);
    const double J1 = spec.gamma_u + spec.gamma_v - 2.0 * sr / T +
                      (2.0 * spec.gamma_v / (1.0 + mu_e)) *
                          (report.e_prior / (spec.gamma_v * T) - 1.0);
    base.mu = mu_e;
    base.J = J1;
    base.variant = Variant::Euclidean;
    return base;
}

NoveltySolution average_novelty_control(const LtvSystem& system, const TransferSpec& spec,
                                        const ControlSignal& v_prior, const Grid& grid,
                                        const SolverOptions& options) {
    spec.validate(system.n());
    if (v_prior.dim() != system.m()) {
        throw ShapeError("prior input dimension does not match system input dimension");
    }
    if (grid.horizon() != spec.horizon) {
        throw ShapeError("grid horizon differs from the transfer horizon");
    }
    const double T_star = v_prior.grid().horizon();
    if (spec.prior_horizon && std::abs(*spec.prior_horizon - T_star) > 1e-12 * T_star) {
        throw ShapeError("prior input horizon " + fmt(T_star) + " differs from T* = " +
                         fmt(*spec.prior_horizon));
    }
    require_prior_energy(v_prior.energy(), spec.gamma_v, options.prior_energy_tol);

    const Eigen::VectorXd v_av = v_prior.mean();
    const double gamma_av = v_av.squaredNorm();
    if (!(gamma_av > 1e-12 * spec.gamma_v)) {
        throw DegenerateSolution(
            "prior input has zero mean; the average novelty is identically zero on the "
            "feasible set");
    }

    Sweep sweep = sweep_transfer(system, grid, nullptr);
    const TransferKernel kernel = to_kernel(sweep, options.gramian);
    const Eigen::VectorXd s = kernel.input_integral * v_av;
    const Eigen::VectorXd r = spec.x_f - kernel.free_transition * spec.x_0;
    const double T = spec.horizon;
    const FeasibilityReport report =
        make_report(kernel.gramian.quadratic_form(s), kernel.gramian.quadratic_form(r),
                    gamma_av * T, spec.gamma_u * T, feasibility_tolerance(spec, options.feasibility_tol));
    if (!(report.margin_next > report.tolerance)) {
        throw InfeasibleTransfer(report);
    }
    if (!(report.margin_prior > report.tolerance)) {
        // v_av lies in the range of B'Φ'(T,·), so ∫ v_av'u = y'r for every admissible u.
        throw DegenerateSolution(
            "averaged prior is reachable as a minimum-energy input; the average novelty is "
            "constant on the feasible set");
    }

    const double root = std::sqrt(spec.gamma_v * spec.gamma_u);
    const ClosedForm cf = closed_form(report, s, r, kernel, T);
    const double mu = 1.0 / (2.0 * cf.kappa * root);
    const double sr = kernel.gramian.bilinear_form(s, r);
    const double J2 = (sr + cf.kappa * report.margin_prior) / (T * root);

    NoveltySolution out{assemble(system, grid, cf.kappa, nullptr, v_av, cf.z),
                        mu,
                        J2,
                        report,
                        s,
                        r,
                        Variant::Average,
                        {}};
    out.diagnostics.kappa = cf.kappa;
    out.diagnostics.lambda0 = cf.lambda0 * (2.0 * mu);
    out.diagnostics.condition_estimate = kernel.gramian.condition_estimate();
    return out;
}

MinEnergyControl min_energy_control(const LtvSystem& system, const TransferSpec& spec,
                                    const Grid& grid, const SolverOptions& options) {
    spec.validate(system.n());
    if (grid.horizon() != spec.horizon) {
        throw ShapeError("grid horizon differs from the transfer horizon");
    }
    const TransferKernel kernel = build_transfer_kernel(system, grid, options.gramian);
    const Eigen::VectorXd r = spec.x_f - kernel.free_transition * spec.x_0;
    const Eigen::VectorXd z = kernel.gramian.solve(r);
    return MinEnergyControl{assemble(system, grid, 0.0, nullptr, Eigen::VectorXd::Zero(system.m()), z),
                            r.dot(z) / spec.horizon, r};
}

MinEnergyNovelty min_energy_novelty(const TransferSpec& spec, const Eigen::VectorXd& s,
                                    const Eigen::VectorXd& r, const GramianResult& gramian) {
    const double T = spec.horizon;
    const double sr = gramian.bilinear_form(s, r);
    const double e_next = gramian.quadratic_form(r);
    MinEnergyNovelty out;
    out.budget = sr / (T * std::sqrt(spec.gamma_v * spec.gamma_u));
    out.own_energy = e_next > 0.0 ? sr / std::sqrt(spec.gamma_v * T * e_next) : 0.0;
    return out;
}

ControlSignal constant_prior(const Grid& grid, const Eigen::VectorXd& direction, double gamma_v) {
    const double norm = direction.norm();
    if (!(norm > 0.0) || !(gamma_v > 0.0)) {
        throw SpecificationError("constant prior needs a nonzero direction and γv > 0");
    }
    const Eigen::VectorXd value = direction * (std::sqrt(gamma_v) / norm);
    return ControlSignal(grid, value.replicate(1, grid.nodes()));
}

ControlSignal sinusoid_prior(const Grid& grid, const Eigen::VectorXd& mean,
                             const Eigen::VectorXd& direction, double gamma_v, int cycles) {
    if (mean.size() != direction.size()) {
        throw ShapeError("sinusoid prior mean and direction differ in size");
    }
    const double dnorm = direction.norm();
    const double spare = gamma_v - mean.squaredNorm();
    if (!(dnorm > 0.0) || !(spare > 0.0) || cycles < 1) {
        throw SpecificationError("sinusoid prior needs a nonzero direction, γv > ||mean||² and cycles >= 1");
    }
    const Eigen::VectorXd w = simpson_weights(grid);
    const double T = grid.horizon();
    Eigen::VectorXd wave(grid.nodes());
    for (int i = 0; i < grid.nodes(); ++i) {
        wave[i] = std::sin(2.0 * M_PI * cycles * grid.time(i) / T);
    }
    wave.array() -= w.dot(wave) / T;
    const double power = w.dot(wave.cwiseProduct(wave)) / T;
    if (!(power > 0.0)) {
        throw SpecificationError("grid too coarse to resolve the requested sinusoid");
    }
    const Eigen::VectorXd amplitude = direction * (std::sqrt(spare / power) / dnorm);
    Eigen::MatrixXd samples = mean.replicate(1, grid.nodes()) + amplitude * wave.transpose();
    return ControlSignal(grid, std::move(samples));
}

}  // namespace novelty
