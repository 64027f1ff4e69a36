#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "novelty/control_signal.hpp"
#include "novelty/errors.hpp"
#include "novelty/grid.hpp"
#include "novelty/ltv_core.hpp"
#include "novelty/ltv_system.hpp"

namespace novelty {

// Two-leg transfer x_r -> x_0 (prior input v) then x_0 -> x_f (new input u),
// both legs of length T, with average per-time energies γv and γu.
struct TransferSpec {
    std::optional<Eigen::VectorXd> x_r;
    Eigen::VectorXd x_0;
    Eigen::VectorXd x_f;
    double horizon = 0.0;
    double gamma_v = 0.0;
    double gamma_u = 0.0;
    std::optional<double> prior_horizon;  // T*, average-novelty variant only

    // Throws SpecificationError / ShapeError when invalid for state dimension n.
    void validate(Eigen::Index n) const;
};

struct FeasibilityReport {
    double e_prior = 0.0;       // s' W^-1 s
    double e_next = 0.0;        // r' W^-1 r
    double margin_prior = 0.0;  // γv T - e_prior
    double margin_next = 0.0;   // γu T - e_next
    double tolerance = 0.0;
    bool feasible = false;
};

class InfeasibleTransfer : public Error {
public:
    explicit InfeasibleTransfer(const FeasibilityReport& report);
    const FeasibilityReport& report() const noexcept { return report_; }

private:
    FeasibilityReport report_;
};

struct SolverOptions {
    GramianOptions gramian;
    double feasibility_tol = 1e-9;   // relative to max(γv T, γu T)
    double prior_energy_tol = 1e-8;  // relative mismatch allowed between v.energy() and γv
};

enum class Variant { InnerProduct, Euclidean, Average };
std::string to_string(Variant variant);

struct NoveltyDiagnostics {
    Eigen::VectorXd lambda0;  // costate at t = 0
    double kappa = 0.0;       // weight of v in u
    double condition_estimate = 0.0;
};

struct NoveltySolution {
    ControlSignal u;
    double mu = 0.0;
    double J = 0.0;  // J for inner-product, J1 for euclidean, J2 for average
    FeasibilityReport feasibility;
    Eigen::VectorXd s;
    Eigen::VectorXd r;
    Variant variant = Variant::InnerProduct;
    NoveltyDiagnostics diagnostics;
};

struct TransferVectors {
    Eigen::VectorXd s;
    Eigen::VectorXd r;
};

// One adjoint sweep's worth of transfer data for a fixed (system, grid).
struct TransferKernel {
    GramianResult gramian;
    Eigen::MatrixXd free_transition;  // Φ(T, 0)
    Eigen::MatrixXd input_integral;   // ∫ Φ(T,t) B(t) dt
};

TransferKernel build_transfer_kernel(const LtvSystem& system, const Grid& grid,
                                     const GramianOptions& options = {});

// (1/(T √(γv γu))) ∫ v'u dt.
double novelty_of(const ControlSignal& v, const ControlSignal& u, double gamma_v, double gamma_u);

// s = ∫ Φ(T,t) B(t) v(t) dt; r = x_f - Φ(T,0) x_0.
TransferVectors transfer_vectors(const LtvSystem& system, const TransferSpec& spec,
                                 const ControlSignal& v, const Grid& grid);
// s = x_0 - Φ(T,0) x_r; needs spec.x_r.
TransferVectors transfer_vectors(const LtvSystem& system, const TransferSpec& spec,
                                 const Grid& grid);

FeasibilityReport check_existence(const TransferSpec& spec, const Eigen::VectorXd& s,
                                  const Eigen::VectorXd& r, const GramianResult& gramian,
                                  double tolerance = 1e-9);

NoveltySolution min_novelty_control(const LtvSystem& system, const TransferSpec& spec,
                                    const ControlSignal& v, const Grid& grid,
                                    const SolverOptions& options = {});

NoveltySolution euclidean_min_control(const LtvSystem& system, const TransferSpec& spec,
                                      const ControlSignal& v, const Grid& grid,
                                      const SolverOptions& options = {});

// v_prior lives on its own grid over [0, T*]; only its mean enters.
NoveltySolution average_novelty_control(const LtvSystem& system, const TransferSpec& spec,
                                        const ControlSignal& v_prior, const Grid& grid,
                                        const SolverOptions& options = {});

struct MinEnergyControl {
    ControlSignal u;
    double energy = 0.0;  // per-time, r' W^-1 r / T
    Eigen::VectorXd r;
};

MinEnergyControl min_energy_control(const LtvSystem& system, const TransferSpec& spec,
                                    const Grid& grid, const SolverOptions& options = {});

// Novelty of the minimum-energy input against v. The closed forms follow from
// s, r and the gramian alone.
struct MinEnergyNovelty {
    double own_energy = 0.0;  // normalized by the input's own energy e_next / T
    double budget = 0.0;      // normalized by γu
};
MinEnergyNovelty min_energy_novelty(const TransferSpec& spec, const Eigen::VectorXd& s,
                                    const Eigen::VectorXd& r, const GramianResult& gramian);

// Optimal J from the transfer data alone, without assembling u.
double optimal_novelty(const FeasibilityReport& report, const Eigen::VectorXd& s,
                       const Eigen::VectorXd& r, const GramianResult& gramian,
                       const TransferSpec& spec);

// Constant prior along `direction` (any nonzero m-vector) with energy γv.
ControlSignal constant_prior(const Grid& grid, const Eigen::VectorXd& direction, double gamma_v);

// mean + amplitude·(sin(2π k t / T) - c) with c removing the Simpson mean of
// the sinusoid, so that mean() and energy() hit `mean` and γv exactly.
// Requires γv > ||mean||².
ControlSignal sinusoid_prior(const Grid& grid, const Eigen::VectorXd& mean,
                             const Eigen::VectorXd& direction, double gamma_v, int cycles = 1);

}  // namespace novelty
