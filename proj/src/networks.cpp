#include "novelty/networks.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "novelty/errors.hpp"

namespace novelty {
namespace {

constexpr std::uint64_t kGraphPurpose = 3;

void add_edge(Eigen::MatrixXd& adj, int i, int j) {
    adj(i, j) = 1.0;
    adj(j, i) = 1.0;
}

Eigen::MatrixXd barabasi_albert(const GraphEnsembleConfig& c, Philox& rng) {
    const int n = c.n;
    const int m = c.attachment;
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
    std::vector<int> repeated;  // node i appears deg(i) times
    int first_new = 0;
    if (c.ba_seed == BaSeedGraph::Star) {
        for (int j = 1; j <= m; ++j) {
            add_edge(adj, 0, j);
            repeated.push_back(0);
            repeated.push_back(j);
        }
        first_new = m + 1;
    } else {
        const int size = 2 * m + 1;
        for (int i = 0; i < size; ++i) {
            for (int j = i + 1; j < size; ++j) {
                add_edge(adj, i, j);
                repeated.push_back(i);
                repeated.push_back(j);
            }
        }
        first_new = size;
    }
    std::vector<int> targets;
    for (int source = first_new; source < n; ++source) {
        targets.clear();
        while (static_cast<int>(targets.size()) < m) {
            const int pick = repeated[rng.below(repeated.size())];
            if (std::find(targets.begin(), targets.end(), pick) == targets.end()) {
                targets.push_back(pick);
            }
        }
        for (const int t : targets) {
            add_edge(adj, source, t);
            repeated.push_back(t);
            repeated.push_back(source);
        }
    }
    return adj;
}

Eigen::MatrixXd watts_strogatz(const GraphEnsembleConfig& c, Philox& rng) {
    const int n = c.n;
    const int half = c.ring_degree / 2;
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
    for (int u = 0; u < n; ++u) {
        for (int j = 1; j <= half; ++j) {
            add_edge(adj, u, (u + j) % n);
        }
    }
    if (c.rewiring <= 0.0) {
        return adj;
    }
    for (int j = 1; j <= half; ++j) {
        for (int u = 0; u < n; ++u) {
            const int v = (u + j) % n;
            if (adj(u, v) == 0.0 || rng.uniform() >= c.rewiring) {
                continue;
            }
            if (adj.row(u).sum() >= n - 1) {
                continue;
            }
            int w = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
            while (w == u || adj(u, w) != 0.0) {
                w = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
            }
            adj(u, v) = adj(v, u) = 0.0;
            add_edge(adj, u, w);
        }
    }
    return adj;
}

}  // namespace

void RateNetConfig::validate() const {
    if (n < 1 || n_exc < 0 || n_exc > n) {
        throw SpecificationError("rate network needs n >= 1 and 0 <= n_exc <= n");
    }
    if (!(tau_lo > 0.0) || !(tau_hi >= tau_lo)) {
        throw SpecificationError("time-constant range must be positive and ordered");
    }
    if (!(exc_hi >= exc_lo) || !(inh_hi >= inh_lo)) {
        throw SpecificationError("weight ranges must be ordered");
    }
}

LtvSystem rate_system(const Eigen::VectorXd& tau, const Eigen::MatrixXd& W) {
    const Eigen::Index n = tau.size();
    if (W.rows() != n || W.cols() != n) {
        throw ShapeError("weight matrix does not match the number of time constants");
    }
    if (!(tau.minCoeff() > 0.0)) {
        throw SpecificationError("time constants must be positive");
    }
    Eigen::MatrixXd A = W - Eigen::MatrixXd::Identity(n, n);
    A = tau.cwiseInverse().asDiagonal() * A;
    return LtvSystem::time_invariant(std::move(A), Eigen::MatrixXd(tau.asDiagonal()));
}

Eigen::VectorXd sample_time_constants(const RateNetConfig& config, Philox& rng) {
    config.validate();
    Eigen::VectorXd tau(config.n);
    for (int i = 0; i < config.n; ++i) {
        tau[i] = rng.uniform(config.tau_lo, config.tau_hi);
    }
    return tau;
}

Eigen::MatrixXd dense_weights(const RateNetConfig& config, Philox& rng) {
    config.validate();
    Eigen::MatrixXd W(config.n, config.n);
    for (int i = 0; i < config.n; ++i) {
        for (int j = 0; j < config.n; ++j) {
            const double value = j < config.n_exc ? rng.uniform(config.exc_lo, config.exc_hi)
                                                  : rng.uniform(config.inh_lo, config.inh_hi);
            W(i, j) = i == j ? 0.0 : value;
        }
    }
    return W;
}

RateNetwork build_rate_network(const RateNetConfig& config, Philox& rng) {
    Eigen::VectorXd tau = sample_time_constants(config, rng);
    Eigen::MatrixXd W = dense_weights(config, rng);
    LtvSystem system = rate_system(tau, W);
    return RateNetwork{std::move(tau), std::move(W), std::move(system)};
}

std::string to_string(GraphFamily family) {
    return family == GraphFamily::BarabasiAlbert ? "BA" : "WS";
}

GraphFamily graph_family_from_string(const std::string& name) {
    if (name == "BA") {
        return GraphFamily::BarabasiAlbert;
    }
    if (name == "WS") {
        return GraphFamily::WattsStrogatz;
    }
    throw UsageError("unknown graph family '" + name + "' (expected BA or WS)");
}

void GraphEnsembleConfig::validate() const {
    if (n < 2 || realizations < 1 || max_resamples < 1) {
        throw SpecificationError("graph ensemble needs n >= 2, realizations >= 1, max_resamples >= 1");
    }
    if (family == GraphFamily::BarabasiAlbert) {
        const int seed_size = ba_seed == BaSeedGraph::Star ? attachment + 1 : 2 * attachment + 1;
        if (attachment < 1 || seed_size > n) {
            throw SpecificationError("BA attachment count must satisfy 1 <= m0 and seed graph <= n");
        }
    } else {
        if (ring_degree < 2 || ring_degree % 2 != 0 || ring_degree >= n) {
            throw SpecificationError("WS ring degree must be even with 2 <= k < n");
        }
        if (!(rewiring >= 0.0 && rewiring <= 1.0)) {
            throw SpecificationError("WS rewiring probability must lie in [0, 1]");
        }
    }
}

Eigen::MatrixXd sample_adjacency(const GraphEnsembleConfig& config, int index) {
    const std::uint64_t param = config.family == GraphFamily::BarabasiAlbert
                                    ? static_cast<std::uint64_t>(config.attachment)
                                    : static_cast<std::uint64_t>(config.ring_degree);
    Philox rng(config.seed,
               Philox::stream_id({static_cast<std::uint64_t>(index), kGraphPurpose,
                                  static_cast<std::uint64_t>(config.family), param}));
    return sample_adjacency(config, rng);
}

Eigen::MatrixXd sample_adjacency(const GraphEnsembleConfig& config, Philox& rng) {
    config.validate();
    for (int attempt = 0; attempt < config.max_resamples; ++attempt) {
        Eigen::MatrixXd adj = config.family == GraphFamily::BarabasiAlbert
                                  ? barabasi_albert(config, rng)
                                  : watts_strogatz(config, rng);
        if (!is_connected(adj)) {
            continue;
        }
        if (config.require_full_rank && !is_full_rank(adj)) {
            continue;
        }
        return adj;
    }
    throw GenerationError("no connected" +
                          std::string(config.require_full_rank ? ", full-rank" : "") + " " +
                          to_string(config.family) + " graph within " +
                          std::to_string(config.max_resamples) + " samples");
}

Eigen::MatrixXd weight_adjacency(const Eigen::MatrixXd& adjacency, Philox& rng, double lo,
                                 double hi, bool symmetric) {
    const Eigen::Index n = adjacency.rows();
    if (adjacency.cols() != n) {
        throw ShapeError("adjacency must be square");
    }
    Eigen::MatrixXd W(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            W(i, j) = rng.uniform(lo, hi);
        }
    }
    if (symmetric) {
        W.triangularView<Eigen::StrictlyLower>() = W.transpose();
    }
    return W.cwiseProduct((adjacency.array() != 0.0).cast<double>().matrix());
}

int edge_count(const Eigen::MatrixXd& adjacency) {
    int count = 0;
    for (Eigen::Index i = 0; i < adjacency.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < adjacency.cols(); ++j) {
            count += adjacency(i, j) != 0.0 ? 1 : 0;
        }
    }
    return count;
}

double edge_density(const Eigen::MatrixXd& adjacency) {
    const double n = static_cast<double>(adjacency.rows());
    if (n < 2) {
        return 0.0;
    }
    return edge_count(adjacency) / (n * (n - 1) / 2.0);
}

int max_degree(const Eigen::MatrixXd& adjacency) {
    return static_cast<int>((adjacency.array() != 0.0).cast<int>().rowwise().sum().maxCoeff());
}

bool is_connected(const Eigen::MatrixXd& adjacency) {
    const Eigen::Index n = adjacency.rows();
    if (n == 0) {
        return true;
    }
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    Eigen::Index reached = 1;
    while (!stack.empty()) {
        const Eigen::Index u = stack.back();
        stack.pop_back();
        for (Eigen::Index v = 0; v < n; ++v) {
            if (adjacency(u, v) != 0.0 && !seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                ++reached;
                stack.push_back(v);
            }
        }
    }
    return reached == n;
}

bool is_full_rank(const Eigen::MatrixXd& adjacency, double threshold) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(adjacency);
    lu.setThreshold(threshold);
    return lu.rank() == adjacency.rows();
}

void write_edge_list(std::ostream& out, const Eigen::MatrixXd& adjacency) {
    out << "# n=" << adjacency.rows() << '\n';
    for (Eigen::Index i = 0; i < adjacency.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < adjacency.cols(); ++j) {
            if (adjacency(i, j) != 0.0) {
                out << i << ' ' << j << '\n';
            }
        }
    }
}

Eigen::MatrixXd read_edge_list(std::istream& in, std::optional<int> nodes) {
    std::vector<std::pair<int, int>> edges;
    std::string line;
    int largest = -1;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            if (line.rfind("# n=", 0) == 0) {
                nodes = std::stoi(line.substr(4));
            }
            continue;
        }
        std::istringstream fields(line);
        int i = -1;
        int j = -1;
        std::string extra;
        if (!(fields >> i >> j) || (fields >> extra) || i < 0 || j < 0 || i == j) {
            throw UsageError("edge list line " + std::to_string(line_no) + ": expected 'i j' with distinct nonnegative indices");
        }
        edges.emplace_back(i, j);
        largest = std::max({largest, i, j});
    }
    const int n = nodes ? *nodes : largest + 1;
    if (largest >= n) {
        throw UsageError("edge list references node " + std::to_string(largest) + " but n = " +
                         std::to_string(n));
    }
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [i, j] : edges) {
        add_edge(adj, i, j);
    }
    return adj;
}

}  // namespace novelty
