#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "novelty/control_signal.hpp"
#include "novelty/ltv_core.hpp"
#include "novelty/ltv_system.hpp"
#include "novelty/novelty_ct.hpp"

namespace novelty {

// u(k) for k = 0..p-1 stored as the columns of an m × p matrix. The prior
// input v(k - p) uses the same 0-based column index k.
class DtControlSequence {
public:
    explicit DtControlSequence(Eigen::MatrixXd samples);

    Eigen::Index dim() const noexcept { return samples_.rows(); }
    int steps() const noexcept { return static_cast<int>(samples_.cols()); }
    const Eigen::MatrixXd& samples() const noexcept { return samples_; }

    // (1/p) Σ ||u(k)||².
    double energy() const;

private:
    Eigen::MatrixXd samples_;
};

struct DtTransferSpec {
    std::optional<Eigen::VectorXd> x_r;
    Eigen::VectorXd x_0;
    Eigen::VectorXd x_f;
    double gamma_v = 0.0;
    double gamma_u = 0.0;

    void validate(Eigen::Index n) const;
};

struct DtSolution {
    DtControlSequence u;
    double gamma = 0.0;     // energy multiplier
    Eigen::VectorXd delta;  // endpoint multiplier
    double J = 0.0;
    bool relaxation_tight = false;
    FeasibilityReport feasibility;
    Eigen::VectorXd s;
    Eigen::VectorXd r;
};

struct DtOptions {
    GramianOptions gramian;
    double feasibility_tol = 1e-9;
    double prior_energy_tol = 1e-8;
};

// (1/(p √(γv γu))) Σ v(k)'u(k).
double novelty_of_dt(const DtControlSequence& v, const DtControlSequence& u, double gamma_v,
                     double gamma_u);

// KKT residuals of a candidate (u, γ, δ) against the relaxed problem.
struct KktResiduals {
    double stationarity = 0.0;  // max-abs entry of the gradient of the Lagrangian
    double slackness = 0.0;     // |γ (energy - γu)|
    double endpoint = 0.0;      // ||x(p) - x_f|| / max(||x_f||, ||Φ(p,0) x_0||, 1e-300)
    double energy = 0.0;        // |energy - γu| / γu
};

KktResiduals kkt_residuals(const DtSystem& system, const DtTransferSpec& spec,
                           const DtControlSequence& v, const DtSolution& solution);

// Closed-form minimizer of the discrete problem through its KKT system.
DtSolution min_novelty_control_dt(const DtSystem& system, const DtTransferSpec& spec,
                                  const DtControlSequence& v, const DtOptions& options = {});

struct OracleOptions {
    int max_iterations = 20000;
    double gap_tolerance = 1e-10;
    double step = 10.0;  // in units of R / ||c||
};

// Projected-gradient solve of the relaxed convex problem (energy as an
// inequality), with a duality-gap stopping rule. Independent of the closed form.
DtSolution qp_oracle_dt(const DtSystem& system, const DtTransferSpec& spec,
                        const DtControlSequence& v, const OracleOptions& options = {});

// Exact interval means of the piecewise-linear signal over p equal steps.
DtControlSequence zoh_average(const ControlSignal& v, int steps);

struct ConsistencyRow {
    int steps = 0;
    double J_dt = 0.0;
    double J_ct = 0.0;
    double error = 0.0;  // |J_dt - J_ct|
};

// Discretizes (system, v) by zero-order hold for each p, rescales the averaged
// prior to energy γv and compares the discrete optimum with the continuous one
// computed on `grid`.
std::vector<ConsistencyRow> ct_dt_consistency(const LtvSystem& system, const TransferSpec& spec,
                                              const ControlSignal& v, const Grid& grid,
                                              const std::vector<int>& steps,
                                              const SolverOptions& options = {});

}  // namespace novelty
