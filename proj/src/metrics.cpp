#include "novelty/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "novelty/errors.hpp"
#include "novelty/ltv_core.hpp"

namespace novelty {
namespace {

Eigen::VectorXd unit_draw(Philox& rng, Eigen::Index n, EndpointScheme scheme) {
    Eigen::VectorXd g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        g[i] = rng.normal();
    }
    if (scheme == EndpointScheme::Orthant) {
        g = g.cwiseAbs();
    }
    return g / g.norm();
}

std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> out(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) {
            ++j;
        }
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            out[order[k]] = avg;
        }
        i = j + 1;
    }
    return out;
}

Eigen::VectorXd sample_tau(Philox& rng, int n, double lo, double hi) {
    Eigen::VectorXd tau(n);
    for (int i = 0; i < n; ++i) {
        tau[i] = rng.uniform(lo, hi);
    }
    return tau;
}

struct Fig4Outcome {
    enum class Kind { Feasible, Infeasible, IllConditioned, GenerationFailed } kind = Kind::Feasible;
    double eta = 0.0;
    double J = 0.0;
    double E = 0.0;
};

}  // namespace

std::string to_string(EndpointScheme scheme) {
    return scheme == EndpointScheme::Sphere ? "sphere" : "orthant";
}

EndpointScheme endpoint_scheme_from_string(const std::string& name) {
    if (name == "sphere") {
        return EndpointScheme::Sphere;
    }
    if (name == "orthant") {
        return EndpointScheme::Orthant;
    }
    throw UsageError("unknown endpoint scheme '" + name + "' (expected sphere or orthant)");
}

void ExperimentProtocol::validate() const {
    if (!(horizon > 0.0) || !(gamma_v > 0.0) || !(gamma_u > 0.0)) {
        throw SpecificationError("protocol needs T, γv, γu > 0");
    }
    if (!(epsilon >= -1.0 && epsilon <= 1.0)) {
        throw SpecificationError("ε must lie in [-1, 1]");
    }
    if (realizations < 1) {
        throw SpecificationError("protocol needs at least one realization");
    }
    if (intervals < 2 || intervals % 2 != 0) {
        throw SpecificationError("quadrature grid needs an even N >= 2");
    }
}

ExperimentProtocol fig3_protocol() { return ExperimentProtocol{}; }

ExperimentProtocol fig4_protocol() {
    ExperimentProtocol p;
    p.horizon = 0.3;
    p.gamma_v = 300.0;
    p.gamma_u = 300.0;
    p.epsilon = 0.7358;
    p.endpoints = EndpointScheme::Orthant;
    p.realizations = 100;
    p.intervals = 60;
    return p;
}

Summary summarize(const std::vector<double>& samples) {
    if (samples.empty()) {
        throw UsageError("cannot summarize an empty sample");
    }
    const double n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double ss = 0.0;
    for (const double x : samples) {
        ss += (x - mean) * (x - mean);
    }
    return Summary{mean, std::sqrt(ss / n)};
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw UsageError("rank correlation needs two samples of equal length >= 2");
    }
    const std::vector<double> rx = ranks(x);
    const std::vector<double> ry = ranks(y);
    const Summary sx = summarize(rx);
    const Summary sy = summarize(ry);
    if (sx.std == 0.0 || sy.std == 0.0) {
        return 0.0;
    }
    double cov = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        cov += (rx[i] - sx.mean) * (ry[i] - sy.mean);
    }
    return cov / (static_cast<double>(rx.size()) * sx.std * sy.std);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_endpoint_pair(Philox& rng, Eigen::Index n,
                                                                 double epsilon,
                                                                 EndpointScheme scheme) {
    if (!(epsilon >= -1.0 && epsilon <= 1.0)) {
        throw SpecificationError("ε must lie in [-1, 1]");
    }
    const Eigen::VectorXd a = unit_draw(rng, n, scheme);
    if (n == 1) {
        if (std::abs(std::abs(epsilon) - 1.0) > 1e-12) {
            throw SpecificationError("a one-dimensional pair has a'b = ±1");
        }
        return {a, epsilon * a};
    }
    Eigen::VectorXd w;
    do {
        w = unit_draw(rng, n, scheme);
        w -= w.dot(a) * a;
    } while (w.norm() < 1e-8);
    w.normalize();
    return {a, epsilon * a + std::sqrt(std::max(0.0, 1.0 - epsilon * epsilon)) * w};
}

Philox realization_stream(std::uint64_t seed, int index, StreamPurpose purpose) {
    return Philox(seed, Philox::stream_id({static_cast<std::uint64_t>(index),
                                           static_cast<std::uint64_t>(purpose)}));
}

Fig3Instance fig3_instance(const ExperimentProtocol& protocol, const RateNetConfig& network,
                           int index, const Eigen::VectorXd& prior_direction) {
    protocol.validate();
    network.validate();
    Philox net_rng = realization_stream(protocol.seed, index, StreamPurpose::Network);
    RateNetwork net = build_rate_network(network, net_rng);
    Philox end_rng = realization_stream(protocol.seed, index, StreamPurpose::Endpoints);
    auto [x0, xf] = sample_endpoint_pair(end_rng, network.n, protocol.epsilon, protocol.endpoints);
    TransferSpec spec;
    spec.x_0 = std::move(x0);
    spec.x_f = std::move(xf);
    spec.horizon = protocol.horizon;
    spec.gamma_v = protocol.gamma_v;
    spec.gamma_u = protocol.gamma_u;
    const Grid grid(protocol.horizon, protocol.intervals);
    const Eigen::VectorXd direction =
        prior_direction.size() == 0 ? Eigen::VectorXd::Ones(network.n) : prior_direction;
    if (direction.size() != network.n) {
        throw ShapeError("prior direction does not match the network size");
    }
    ControlSignal prior = constant_prior(grid, direction, protocol.gamma_v);
    return Fig3Instance{std::move(net), std::move(spec), std::move(prior)};
}

Fig3Result run_fig3(const ExperimentProtocol& protocol, const RateNetConfig& network,
                    const Eigen::VectorXd& prior_direction, int jobs) {
    protocol.validate();
    network.validate();
    const Grid grid(protocol.horizon, protocol.intervals);
    const std::function<Fig3Sample(int)> task = [&](int index) {
        const Fig3Instance inst = fig3_instance(protocol, network, index, prior_direction);
        Fig3Sample out;
        out.index = index;
        try {
            const TransferKernel kernel =
                build_transfer_kernel(inst.network.system, grid, protocol.gramian);
            const Eigen::VectorXd s = kernel.input_integral * inst.prior.samples().col(0);
            const Eigen::VectorXd r = inst.spec.x_f - kernel.free_transition * inst.spec.x_0;
            const FeasibilityReport report =
                check_existence(inst.spec, s, r, kernel.gramian, protocol.feasibility_tol);
            out.margin_prior = report.margin_prior;
            out.margin_next = report.margin_next;
            out.condition = kernel.gramian.condition_estimate();
            if (!report.feasible) {
                out.status = "infeasible";
                return out;
            }
            out.feasible = true;
            out.status = "ok";
            out.J_novelty = optimal_novelty(report, s, r, kernel.gramian, inst.spec);
            const MinEnergyNovelty me = min_energy_novelty(inst.spec, s, r, kernel.gramian);
            out.J_energy = me.own_energy;
            out.J_energy_budget = me.budget;
        } catch (const IllConditionedGramian& e) {
            out.status = "ill-conditioned";
            out.condition = e.condition_estimate();
        }
        return out;
    };
    Fig3Result result;
    result.protocol = protocol;
    result.network = network;
    result.samples = run_indexed(protocol.realizations, jobs, task);
    std::vector<double> gaps;
    for (const Fig3Sample& s : result.samples) {
        if (!s.feasible) {
            ++result.n_infeasible;
            continue;
        }
        ++result.n_feasible;
        result.n_dominated += s.J_novelty >= s.J_energy ? 1 : 0;
        gaps.push_back(s.J_novelty - s.J_energy);
    }
    if (!gaps.empty()) {
        result.gap = summarize(gaps);
    }
    return result;
}

void Fig4Config::validate() const {
    protocol.validate();
    if (attachments.empty() || families.empty()) {
        throw SpecificationError("density sweep needs at least one attachment count and family");
    }
    if (!(tau_lo > 0.0) || !(tau_hi >= tau_lo) || !(weight_hi >= weight_lo)) {
        throw SpecificationError("time-constant and weight ranges must be ordered, τ > 0");
    }
    for (const int m : attachments) {
        for (const GraphFamily f : families) {
            ensemble(f, m).validate();
        }
    }
}

GraphEnsembleConfig Fig4Config::ensemble(GraphFamily family, int attachment) const {
    GraphEnsembleConfig g;
    g.family = family;
    g.n = n;
    g.attachment = attachment;
    g.ba_seed = ba_seed;
    g.ring_degree = 2 * attachment;
    g.rewiring = rewiring;
    g.realizations = protocol.realizations;
    g.seed = protocol.seed;
    g.require_full_rank = true;
    g.max_resamples = max_resamples;
    return g;
}

Fig4Instance fig4_instance(const Fig4Config& config, GraphFamily family, int attachment,
                           int index) {
    Eigen::MatrixXd adj = sample_adjacency(config.ensemble(family, attachment), index);
    Philox net_rng = realization_stream(config.protocol.seed, index, StreamPurpose::Network);
    Eigen::VectorXd tau = sample_tau(net_rng, config.n, config.tau_lo, config.tau_hi);
    Philox w_rng = realization_stream(config.protocol.seed, index, StreamPurpose::Weights);
    Eigen::MatrixXd W =
        weight_adjacency(adj, w_rng, config.weight_lo, config.weight_hi, config.symmetric_weights);
    Philox end_rng = realization_stream(config.protocol.seed, index, StreamPurpose::Endpoints);
    auto [xr, xf] =
        sample_endpoint_pair(end_rng, config.n, config.protocol.epsilon, config.protocol.endpoints);
    TransferSpec spec;
    spec.x_r = std::move(xr);
    spec.x_0 = Eigen::VectorXd::Zero(config.n);
    spec.x_f = std::move(xf);
    spec.horizon = config.protocol.horizon;
    spec.gamma_v = config.protocol.gamma_v;
    spec.gamma_u = config.protocol.gamma_u;
    LtvSystem system = rate_system(tau, W);
    return Fig4Instance{std::move(adj), tau, W, std::move(system), std::move(spec)};
}

MetricReport run_fig4(const Fig4Config& config, int jobs) {
    config.validate();
    const ExperimentProtocol& protocol = config.protocol;
    const Grid grid(protocol.horizon, protocol.intervals);
    MetricReport report;
    report.protocol = protocol;
    for (const int m : config.attachments) {
        for (const GraphFamily family : config.families) {
            const std::function<Fig4Outcome(int)> task = [&](int index) {
                Fig4Outcome out;
                try {
                    const Fig4Instance inst = fig4_instance(config, family, m, index);
                    out.eta = edge_density(inst.adjacency);
                    const TransferKernel kernel =
                        build_transfer_kernel(inst.system, grid, protocol.gramian);
                    const Eigen::VectorXd s = inst.spec.x_0 - kernel.free_transition * *inst.spec.x_r;
                    const Eigen::VectorXd r = inst.spec.x_f - kernel.free_transition * inst.spec.x_0;
                    const FeasibilityReport feas =
                        check_existence(inst.spec, s, r, kernel.gramian, protocol.feasibility_tol);
                    out.E = feas.e_next;
                    if (!feas.feasible) {
                        out.kind = Fig4Outcome::Kind::Infeasible;
                        return out;
                    }
                    out.J = optimal_novelty(feas, s, r, kernel.gramian, inst.spec);
                } catch (const GenerationError&) {
                    out.kind = Fig4Outcome::Kind::GenerationFailed;
                } catch (const IllConditionedGramian&) {
                    out.kind = Fig4Outcome::Kind::IllConditioned;
                }
                return out;
            };
            const std::vector<Fig4Outcome> outcomes =
                run_indexed(protocol.realizations, jobs, task);
            MetricRow row;
            row.family = family;
            row.parameter = family == GraphFamily::BarabasiAlbert ? m : 2 * m;
            std::vector<double> Js;
            std::vector<double> Es;
            std::vector<double> etas;
            for (const Fig4Outcome& o : outcomes) {
                switch (o.kind) {
                    case Fig4Outcome::Kind::Feasible:
                        ++row.n_feasible;
                        Js.push_back(o.J);
                        Es.push_back(o.E);
                        etas.push_back(o.eta);
                        break;
                    case Fig4Outcome::Kind::Infeasible:
                        ++row.n_infeasible;
                        etas.push_back(o.eta);
                        break;
                    case Fig4Outcome::Kind::IllConditioned:
                        ++row.n_infeasible;
                        ++row.n_ill_conditioned;
                        etas.push_back(o.eta);
                        break;
                    case Fig4Outcome::Kind::GenerationFailed:
                        ++row.n_infeasible;
                        ++row.n_generation_failed;
                        break;
                }
            }
            if (!etas.empty()) {
                row.eta = summarize(etas).mean;
            }
            if (!Js.empty()) {
                row.J = summarize(Js);
                row.E = summarize(Es);
            }
            report.rows.push_back(row);
        }
    }
    return report;
}

std::vector<TrendCheck> trend_checks(const MetricReport& report) {
    std::map<GraphFamily, std::vector<const MetricRow*>> by_family;
    for (const MetricRow& row : report.rows) {
        if (row.n_feasible > 0) {
            by_family[row.family].push_back(&row);
        }
    }
    std::vector<TrendCheck> out;
    for (const auto& [family, rows] : by_family) {
        TrendCheck check;
        check.family = family;
        if (rows.size() >= 2) {
            std::vector<double> eta, J, E;
            for (const MetricRow* row : rows) {
                eta.push_back(row->eta);
                J.push_back(row->J.mean);
                E.push_back(row->E.mean);
            }
            check.rho_J = spearman(J, eta);
            check.rho_E = spearman(E, eta);
        }
        out.push_back(check);
    }
    return out;
}

bool family_separation(const MetricReport& report) {
    std::map<int, std::pair<const MetricRow*, const MetricRow*>> matched;  // keyed by BA m0
    for (const MetricRow& row : report.rows) {
        if (row.family == GraphFamily::BarabasiAlbert) {
            matched[row.parameter].first = &row;
        } else {
            matched[row.parameter / 2].second = &row;
        }
    }
    bool any = false;
    for (const auto& [m, pair] : matched) {
        const auto [ba, ws] = pair;
        if (ba == nullptr || ws == nullptr) {
            continue;
        }
        if (ba->n_feasible == 0 || ws->n_feasible == 0) {
            return false;
        }
        any = true;
        if (ws->J.mean < ba->J.mean || ws->E.mean > ba->E.mean) {
            return false;
        }
    }
    return any;
}

Fig2Result run_fig2(const Fig2Config& config) {
    const LtvSystem system = LtvSystem::time_invariant(config.A, config.B);
    const Grid grid(config.horizon, config.intervals);
    const Eigen::Index m = config.B.cols();
    Eigen::VectorXd mean = Eigen::VectorXd::LinSpaced(m, 0.4, -0.4);
    Eigen::VectorXd direction = Eigen::VectorXd::Ones(m);
    direction[0] = -1.0;
    mean *= std::sqrt(0.25 * config.gamma_v) / std::max(mean.norm(), 1e-300);
    const ControlSignal prior = sinusoid_prior(grid, mean, direction, config.gamma_v);
    const Eigen::MatrixXd leg1 = propagate(system, config.x_r, prior, grid);

    TransferSpec spec;
    spec.x_r = config.x_r;
    spec.x_0 = leg1.col(grid.intervals());
    spec.x_f = config.x_f;
    spec.horizon = config.horizon;
    spec.gamma_v = config.gamma_v;
    spec.gamma_u = config.gamma_u;
    const NoveltySolution nov = min_novelty_control(system, spec, prior, grid);
    const MinEnergyControl me = min_energy_control(system, spec, grid);

    const Eigen::MatrixXd leg2_nov = propagate(system, spec.x_0, nov.u, grid);
    const Eigen::MatrixXd leg2_me = propagate(system, spec.x_0, me.u, grid);
    const double scale =
        std::max(spec.x_f.norm(), (state_transition(system, 0.0, config.horizon, grid) * spec.x_0).norm());
    const auto endpoint_error = [&](const Eigen::MatrixXd& X) {
        return (X.col(grid.intervals()) - spec.x_f).norm() / scale;
    };
    return Fig2Result{grid,
                      prior,
                      nov.u,
                      me.u,
                      leg1,
                      leg2_nov,
                      leg2_me,
                      nov.J,
                      novelty_of(prior, me.u, config.gamma_v, me.u.energy()),
                      nov.u.energy(),
                      me.u.energy(),
                      endpoint_error(leg2_nov),
                      endpoint_error(leg2_me)};
}

}  // namespace novelty
