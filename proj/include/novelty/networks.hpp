#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "novelty/ltv_system.hpp"
#include "novelty/rng.hpp"

namespace novelty {

// Linearized rate network S dx/dt = -x + W x + S u, i.e. A = S^-1(-I + W), B = S.
// W(i, j) is the weight from presynaptic neuron j onto neuron i; neurons
// 0..n_exc-1 are excitatory.
struct RateNetConfig {
    int n = 100;
    int n_exc = 80;
    double tau_lo = 5.0;  // ms
    double tau_hi = 10.0;
    double exc_lo = 0.0;
    double exc_hi = 1.0;
    double inh_lo = -1.0;
    double inh_hi = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct RateNetwork {
    Eigen::VectorXd tau;  // diagonal of S
    Eigen::MatrixXd W;
    LtvSystem system;
};

LtvSystem rate_system(const Eigen::VectorXd& tau, const Eigen::MatrixXd& W);

Eigen::VectorXd sample_time_constants(const RateNetConfig& config, Philox& rng);

// All-pairs weights with the sign of the presynaptic (column) neuron, zero diagonal.
Eigen::MatrixXd dense_weights(const RateNetConfig& config, Philox& rng);

// Time constants, then dense weights, both from `rng`.
RateNetwork build_rate_network(const RateNetConfig& config, Philox& rng);

enum class GraphFamily { BarabasiAlbert, WattsStrogatz };
enum class BaSeedGraph { Star, Clique };

std::string to_string(GraphFamily family);
GraphFamily graph_family_from_string(const std::string& name);

struct GraphEnsembleConfig {
    GraphFamily family = GraphFamily::BarabasiAlbert;
    int n = 100;
    // BA: edges per new node. Star seeding gives m0 (n - m0) edges; clique
    // seeding starts from K_{2 m0 + 1} and gives exactly n m0.
    int attachment = 4;
    BaSeedGraph ba_seed = BaSeedGraph::Star;
    int ring_degree = 8;  // WS, even
    double rewiring = 0.1;
    int realizations = 100;
    std::uint64_t seed = 0;
    bool require_full_rank = true;
    int max_resamples = 100;

    void validate() const;
};

// Symmetric 0/1 adjacency with zero diagonal, connected and (optionally)
// nonsingular. Realization `index` draws from its own stream, so any subset of
// an ensemble can be regenerated.
Eigen::MatrixXd sample_adjacency(const GraphEnsembleConfig& config, int index);

// Same, drawing from a caller-supplied generator.
Eigen::MatrixXd sample_adjacency(const GraphEnsembleConfig& config, Philox& rng);

// U(lo, hi) weight on every edge. A dense n×n block of draws is consumed in
// row-major order regardless of the adjacency, so two graphs sampled with
// the same stream share weights on common edges.
Eigen::MatrixXd weight_adjacency(const Eigen::MatrixXd& adjacency, Philox& rng, double lo = 0.0,
                                 double hi = 1.0, bool symmetric = false);

double edge_density(const Eigen::MatrixXd& adjacency);
int edge_count(const Eigen::MatrixXd& adjacency);
int max_degree(const Eigen::MatrixXd& adjacency);
bool is_connected(const Eigen::MatrixXd& adjacency);
bool is_full_rank(const Eigen::MatrixXd& adjacency, double threshold = 1e-10);

// "# n=<nodes>" header, then one "i j" line per undirected edge with i < j, 0-based.
void write_edge_list(std::ostream& out, const Eigen::MatrixXd& adjacency);
// Lines starting with '#' are comments; a "# n=<nodes>" header fixes the node
// count, otherwise `nodes` or the largest index + 1 is used.
Eigen::MatrixXd read_edge_list(std::istream& in, std::optional<int> nodes = std::nullopt);

}  // namespace novelty
