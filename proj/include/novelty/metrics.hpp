#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "novelty/control_signal.hpp"
#include "novelty/grid.hpp"
#include "novelty/ltv_system.hpp"
#include "novelty/networks.hpp"
#include "novelty/novelty_ct.hpp"
#include "novelty/rng.hpp"

namespace novelty {

enum class EndpointScheme { Sphere, Orthant };
std::string to_string(EndpointScheme scheme);
EndpointScheme endpoint_scheme_from_string(const std::string& name);

struct ExperimentProtocol {
    double horizon = 3.0;  // ms
    double gamma_v = 1.0;
    double gamma_u = 1.0;
    double epsilon = 0.7645;
    EndpointScheme endpoints = EndpointScheme::Sphere;
    int realizations = 100;
    std::uint64_t seed = 0;
    int intervals = 200;  // quadrature grid N
    GramianOptions gramian;
    double feasibility_tol = 1e-9;

    void validate() const;
};

// Single-network protocol: x_0, x_f on the unit sphere, constant prior.
ExperimentProtocol fig3_protocol();
// Graph-ensemble protocol: x_0 = 0, x_r and x_f on the nonnegative orthant.
ExperimentProtocol fig4_protocol();

struct Summary {
    double mean = 0.0;
    double std = 0.0;  // population
};

Summary summarize(const std::vector<double>& samples);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Unit vector a and a second unit vector b with a'b = epsilon. b is built from
// the normalized component of an independent draw orthogonal to a.
std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_endpoint_pair(Philox& rng, Eigen::Index n,
                                                                 double epsilon,
                                                                 EndpointScheme scheme);

// Runs task(i) for i in [0, count) on up to `jobs` threads and returns the
// results in index order. The first exception (by index) is rethrown.
template <typename T>
std::vector<T> run_indexed(int count, int jobs, const std::function<T(int)>& task);

// Per-realization stream purposes; the graph stream (3) is owned by networks.
enum class StreamPurpose : std::uint64_t { Network = 1, Weights = 2, Endpoints = 4 };
Philox realization_stream(std::uint64_t seed, int index, StreamPurpose purpose);

// ---- single-network ensemble ---------------------------------------------

struct Fig3Sample {
    int index = 0;
    bool feasible = false;
    std::string status;  // "ok", "infeasible", "ill-conditioned"
    double J_novelty = 0.0;
    double J_energy = 0.0;         // min-energy input, normalized by its own energy
    double J_energy_budget = 0.0;  // min-energy input, normalized by γu
    double margin_prior = 0.0;
    double margin_next = 0.0;
    double condition = 0.0;
};

struct Fig3Result {
    ExperimentProtocol protocol;
    RateNetConfig network;
    std::vector<Fig3Sample> samples;
    int n_feasible = 0;
    int n_infeasible = 0;
    int n_dominated = 0;  // feasible samples with J_novelty >= J_energy
    Summary gap;          // J_novelty - J_energy over feasible samples

    bool dominance_holds() const { return n_feasible > 0 && n_dominated == n_feasible; }
};

struct Fig3Instance {
    RateNetwork network;
    TransferSpec spec;
    ControlSignal prior;
};

// The network, endpoints and constant prior of realization `index`. The prior
// points along `prior_direction` (all-ones when empty).
Fig3Instance fig3_instance(const ExperimentProtocol& protocol, const RateNetConfig& network,
                           int index, const Eigen::VectorXd& prior_direction = {});

Fig3Result run_fig3(const ExperimentProtocol& protocol, const RateNetConfig& network,
                    const Eigen::VectorXd& prior_direction = {}, int jobs = 1);

// ---- graph ensembles over edge density -----------------------------------

struct Fig4Config {
    ExperimentProtocol protocol = fig4_protocol();
    int n = 100;
    std::vector<int> attachments{4, 8, 12, 16, 20, 24};  // BA m0; WS ring degree 2 m0
    std::vector<GraphFamily> families{GraphFamily::BarabasiAlbert, GraphFamily::WattsStrogatz};
    double rewiring = 0.1;
    BaSeedGraph ba_seed = BaSeedGraph::Clique;
    double tau_lo = 5.0;
    double tau_hi = 10.0;
    double weight_lo = 0.0;
    double weight_hi = 1.0;
    bool symmetric_weights = false;
    int max_resamples = 100;

    void validate() const;
    GraphEnsembleConfig ensemble(GraphFamily family, int attachment) const;
};

struct MetricRow {
    double eta = 0.0;
    GraphFamily family = GraphFamily::BarabasiAlbert;
    int parameter = 0;  // BA m0 or WS ring degree
    Summary J;
    Summary E;  // minimum transfer energy r' W^-1 r
    int n_feasible = 0;
    int n_infeasible = 0;       // includes the ill-conditioned and ungenerated ones
    int n_ill_conditioned = 0;
    int n_generation_failed = 0;
};

// One combined report: every row carries both the novelty and the energy
// statistics for its (family, η) condition.
struct MetricReport {
    ExperimentProtocol protocol;
    std::vector<MetricRow> rows;
};

struct Fig4Instance {
    Eigen::MatrixXd adjacency;
    Eigen::VectorXd tau;
    Eigen::MatrixXd W;  // weighted adjacency
    LtvSystem system;
    TransferSpec spec;  // x_r, x_0 = 0, x_f
};

Fig4Instance fig4_instance(const Fig4Config& config, GraphFamily family, int attachment,
                           int index);

MetricReport run_fig4(const Fig4Config& config, int jobs = 1);

struct TrendCheck {
    GraphFamily family = GraphFamily::BarabasiAlbert;
    double rho_J = 0.0;
    double rho_E = 0.0;
};

std::vector<TrendCheck> trend_checks(const MetricReport& report);
// WS mean J >= BA mean J and WS mean E <= BA mean E at every matched parameter.
bool family_separation(const MetricReport& report);

// ---- two-leg phase-plane demo ---------------------------------------------

struct Fig2Config {
    Eigen::MatrixXd A{{-0.5, 1.0}, {-1.0, -0.5}};
    Eigen::MatrixXd B{{1.0, 0.0, 0.5}, {0.0, 1.0, -0.5}};
    Eigen::VectorXd x_r{{1.0, 0.0}};
    Eigen::VectorXd x_f{{-0.5, 1.0}};
    double horizon = 2.0;
    double gamma_v = 1.0;
    double gamma_u = 1.5;
    int intervals = 400;
};

// Leg 1 drives x_r with a fixed smooth prior v and ends at x_0; leg 2 moves
// x_0 to x_f by the minimum-novelty input and by the minimum-energy input.
struct Fig2Result {
    Grid grid;  // one leg
    ControlSignal prior;
    ControlSignal u_novelty;
    ControlSignal u_energy;
    Eigen::MatrixXd leg1;             // n × (N+1)
    Eigen::MatrixXd leg2_novelty;     // n × (N+1)
    Eigen::MatrixXd leg2_energy;      // n × (N+1)
    double J_novelty = 0.0;
    double J_energy = 0.0;            // own-energy normalization
    double energy_novelty = 0.0;
    double energy_energy = 0.0;
    double endpoint_error_novelty = 0.0;
    double endpoint_error_energy = 0.0;
};

Fig2Result run_fig2(const Fig2Config& config);

}  // namespace novelty

#include "novelty/detail/run_indexed.hpp"
