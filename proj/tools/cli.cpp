#include "novelty/cli.hpp"

#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "CLI11.hpp"
#include "novelty/errors.hpp"
#include "novelty/io.hpp"
#include "novelty/ltv_core.hpp"
#include "novelty/metrics.hpp"
#include "novelty/networks.hpp"
#include "novelty/novelty_ct.hpp"
#include "novelty/novelty_dt.hpp"

namespace novelty {
namespace {

using io::Json;
using io::ObjectReader;
using io::format_number;

constexpr const char* kVersion = "1.0.0";
constexpr double kOracleTolerance = 1e-5;
constexpr double kTrendThreshold = -0.8;

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    bool oracle = false;
    bool full_scale = false;
};

Json provenance(const std::string& command, const Json& config) {
    Json p;
    p["tool"] = "novelty_cli";
    p["version"] = kVersion;
    p["command"] = command;
    p["config"] = config;
    return p;
}

Json read_config(const Options& o, bool required) {
    if (o.config.empty()) {
        if (required) {
            throw UsageError("--config is required for this command");
        }
        return Json::object();
    }
    return io::read_json_file(o.config);
}

Json feasibility_json(const FeasibilityReport& f) {
    Json j;
    j["e_prior"] = f.e_prior;
    j["e_next"] = f.e_next;
    j["margin_prior"] = f.margin_prior;
    j["margin_next"] = f.margin_next;
    j["tolerance"] = f.tolerance;
    j["feasible"] = f.feasible;
    return j;
}

std::string column(const std::string& base, Eigen::Index i) { return base + "_" + std::to_string(i + 1); }

// ---- config readers ---------------------------------------------------------

bool is_discrete_kind(const std::string& kind) {
    return kind == "dt_lti" || kind == "dt_tabulated" || kind == "zoh";
}

LtvSystem read_ct_system(ObjectReader& r, const std::string& kind) {
    if (kind == "lti") {
        const Eigen::MatrixXd A = r.matrix("A");
        const Eigen::MatrixXd B = r.matrix("B");
        return LtvSystem::time_invariant(A, B);
    }
    if (kind == "rate_network") {
        const Eigen::VectorXd tau = r.vector("tau");
        const Eigen::MatrixXd W = r.matrix("W");
        return rate_system(tau, W);
    }
    if (kind == "tabulated") {
        const double horizon = r.number("horizon");
        std::vector<Eigen::MatrixXd> A = r.matrices("A");
        std::vector<Eigen::MatrixXd> B = r.matrices("B");
        if (A.size() != B.size() || A.size() < 3) {
            throw UsageError(r.path() + ": A and B need the same number (odd, >= 3) of samples");
        }
        const Grid table(horizon, static_cast<int>(A.size()) - 1);
        return LtvSystem::tabulated(table, std::move(A), std::move(B));
    }
    throw UsageError(r.path() + ".kind '" + kind +
                     "' is not a continuous system (lti, rate_network, tabulated)");
}

LtvSystem read_ct_system(ObjectReader& r) { return read_ct_system(r, r.text("kind")); }

DtSystem read_dt_system(ObjectReader& r, const std::string& kind) {
    if (kind == "dt_lti") {
        const Eigen::MatrixXd A = r.matrix("A");
        const Eigen::MatrixXd B = r.matrix("B");
        const long long steps = r.integer("steps");
        if (steps < 1) {
            throw UsageError(r.path() + ".steps must be >= 1");
        }
        return DtSystem::time_invariant(A, B, static_cast<int>(steps));
    }
    if (kind == "dt_tabulated") {
        return DtSystem(r.matrices("A"), r.matrices("B"));
    }
    if (kind == "zoh") {
        ObjectReader inner = r.child("continuous");
        const LtvSystem sys = read_ct_system(inner);
        r.adopt("continuous", inner.finish());
        const double horizon = r.number("horizon");
        const long long steps = r.integer("steps");
        const long long substeps = r.integer("substeps", 16);
        if (steps < 1 || substeps < 2 || substeps % 2 != 0) {
            throw UsageError(r.path() + ": steps >= 1 and even substeps >= 2 required");
        }
        return zoh_discretize(sys, horizon, static_cast<int>(steps), static_cast<int>(substeps));
    }
    throw UsageError(r.path() + ".kind '" + kind +
                     "' is not a discrete system (dt_lti, dt_tabulated, zoh)");
}

TransferSpec read_transfer(ObjectReader& r) {
    TransferSpec spec;
    if (r.has("x_r")) {
        spec.x_r = r.vector("x_r");
    }
    spec.x_0 = r.vector("x_0");
    spec.x_f = r.vector("x_f");
    spec.horizon = r.number("horizon");
    spec.gamma_v = r.number("gamma_v");
    spec.gamma_u = r.number("gamma_u");
    if (r.has("prior_horizon")) {
        spec.prior_horizon = r.number("prior_horizon");
    }
    return spec;
}

DtTransferSpec read_dt_transfer(ObjectReader& r) {
    DtTransferSpec spec;
    if (r.has("x_r")) {
        spec.x_r = r.vector("x_r");
    }
    spec.x_0 = r.vector("x_0");
    spec.x_f = r.vector("x_f");
    spec.gamma_v = r.number("gamma_v");
    spec.gamma_u = r.number("gamma_u");
    return spec;
}

GramianOptions read_gramian_options(ObjectReader& r) {
    GramianOptions g;
    g.condition_cap = r.number("condition_cap", g.condition_cap);
    return g;
}

ControlSignal read_prior(ObjectReader& r, const Grid& grid, double gamma_v) {
    const std::string kind = r.text("kind");
    if (kind == "constant") {
        return constant_prior(grid, r.vector("direction"), gamma_v);
    }
    if (kind == "sinusoid") {
        const Eigen::VectorXd mean = r.vector("mean");
        const Eigen::VectorXd direction = r.vector("direction");
        const long long cycles = r.integer("cycles", 1);
        return sinusoid_prior(grid, mean, direction, gamma_v, static_cast<int>(cycles));
    }
    if (kind == "samples") {
        const Eigen::MatrixXd values = r.matrix("values");
        const bool rescale = r.flag("rescale", false);
        if (values.cols() != grid.nodes()) {
            throw UsageError(r.path() + ".values needs " + std::to_string(grid.nodes()) +
                             " columns (one per grid node), got " + std::to_string(values.cols()));
        }
        ControlSignal v(grid, values);
        if (rescale) {
            if (!(v.energy() > 0.0)) {
                throw UsageError(r.path() + ": cannot rescale a zero prior");
            }
            v = v.scaled(std::sqrt(gamma_v / v.energy()));
        }
        return v;
    }
    throw UsageError(r.path() + ".kind '" + kind + "' is not a prior kind (constant, sinusoid, samples)");
}

ExperimentProtocol read_protocol(ObjectReader& r, ExperimentProtocol p) {
    p.horizon = r.number("horizon", p.horizon);
    p.gamma_v = r.number("gamma_v", p.gamma_v);
    p.gamma_u = r.number("gamma_u", p.gamma_u);
    p.epsilon = r.number("epsilon", p.epsilon);
    p.endpoints = endpoint_scheme_from_string(r.text("endpoints", to_string(p.endpoints)));
    p.realizations = static_cast<int>(r.integer("realizations", p.realizations));
    p.seed = r.unsigned_integer("seed", p.seed);
    p.intervals = static_cast<int>(r.integer("intervals", p.intervals));
    p.gramian.condition_cap = r.number("condition_cap", p.gramian.condition_cap);
    p.feasibility_tol = r.number("feasibility_tol", p.feasibility_tol);
    return p;
}

// Command-line overrides land in both the protocol and its resolved record.
Json apply_overrides(ExperimentProtocol& p, Json resolved, const Options& o) {
    if (o.seed) {
        p.seed = *o.seed;
        resolved["seed"] = *o.seed;
    }
    if (o.full_scale) {
        p.realizations = 1000;
        resolved["realizations"] = 1000;
    }
    p.validate();
    return resolved;
}

RateNetConfig read_rate_config(ObjectReader& r) {
    RateNetConfig c;
    c.n = static_cast<int>(r.integer("n", c.n));
    c.n_exc = static_cast<int>(r.integer("n_exc", c.n_exc));
    c.tau_lo = r.number("tau_lo", c.tau_lo);
    c.tau_hi = r.number("tau_hi", c.tau_hi);
    c.exc_lo = r.number("exc_lo", c.exc_lo);
    c.exc_hi = r.number("exc_hi", c.exc_hi);
    c.inh_lo = r.number("inh_lo", c.inh_lo);
    c.inh_hi = r.number("inh_hi", c.inh_hi);
    c.validate();
    return c;
}

BaSeedGraph ba_seed_from_string(const std::string& name) {
    if (name == "clique") {
        return BaSeedGraph::Clique;
    }
    if (name == "star") {
        return BaSeedGraph::Star;
    }
    throw UsageError("unknown BA seed graph '" + name + "' (expected clique or star)");
}

// Graph fields shared by the density sweep and generate-network.
void read_graph_fields(ObjectReader& r, Fig4Config& c) {
    c.n = static_cast<int>(r.integer("n", c.n));
    c.rewiring = r.number("rewiring", c.rewiring);
    c.ba_seed = ba_seed_from_string(r.text("ba_seed", c.ba_seed == BaSeedGraph::Clique ? "clique" : "star"));
    c.tau_lo = r.number("tau_lo", c.tau_lo);
    c.tau_hi = r.number("tau_hi", c.tau_hi);
    c.weight_lo = r.number("weight_lo", c.weight_lo);
    c.weight_hi = r.number("weight_hi", c.weight_hi);
    c.symmetric_weights = r.flag("symmetric_weights", c.symmetric_weights);
    c.max_resamples = static_cast<int>(r.integer("max_resamples", c.max_resamples));
}

// ---- solve-ct -------------------------------------------------------------------

int cmd_solve_ct(const Options& o, std::ostream& out, std::ostream& err) {
    ObjectReader root(read_config(o, true), "config");
    ObjectReader sys_r = root.child("system");
    const LtvSystem system = read_ct_system(sys_r);
    root.adopt("system", sys_r.finish());
    ObjectReader tr = root.child("transfer");
    const TransferSpec spec = read_transfer(tr);
    root.adopt("transfer", tr.finish());
    const std::string variant = root.text("variant", "inner_product");
    if (variant != "inner_product" && variant != "euclidean" && variant != "average") {
        throw UsageError("variant must be inner_product, euclidean or average");
    }
    ObjectReader gr = root.child_or_empty("grid");
    const long long intervals = gr.integer("intervals", Grid::kDefaultIntervals);
    root.adopt("grid", gr.finish());
    ObjectReader sr = root.child_or_empty("solver");
    SolverOptions opts;
    opts.gramian = read_gramian_options(sr);
    opts.feasibility_tol = sr.number("feasibility_tol", opts.feasibility_tol);
    opts.prior_energy_tol = sr.number("prior_energy_tol", opts.prior_energy_tol);
    root.adopt("solver", sr.finish());

    spec.validate(system.n());
    const Grid grid(spec.horizon, static_cast<int>(intervals));
    ObjectReader pr = root.child("prior");
    const bool average = variant == "average";
    const double prior_T = average ? spec.prior_horizon.value_or(spec.horizon) : spec.horizon;
    const long long prior_N = pr.integer("intervals", intervals);
    const Grid prior_grid(prior_T, static_cast<int>(prior_N));
    const ControlSignal v = read_prior(pr, prior_grid, spec.gamma_v);
    root.adopt("prior", pr.finish());
    const Json resolved = root.finish();
    const Json prov = provenance("solve-ct", resolved);

    NoveltySolution sol = [&] {
        try {
            if (variant == "euclidean") {
                return euclidean_min_control(system, spec, v, grid, opts);
            }
            if (average) {
                return average_novelty_control(system, spec, v, grid, opts);
            }
            return min_novelty_control(system, spec, v, grid, opts);
        } catch (const InfeasibleTransfer& e) {
            io::OutputBundle bundle;
            Json j;
            j["provenance"] = prov;
            j["feasibility"] = feasibility_json(e.report());
            bundle.add_json("feasibility.json", j);
            bundle.commit(o.out);
            throw;
        }
    }();

    const Eigen::MatrixXd X = propagate(system, spec.x_0, sol.u, grid);
    const Eigen::VectorXd free = state_transition(system, 0.0, spec.horizon, grid) * spec.x_0;
    const double endpoint_error = (X.col(grid.intervals()) - spec.x_f).norm() /
                                  std::max({spec.x_f.norm(), free.norm(), 1e-300});

    Json j;
    j["provenance"] = prov;
    j["variant"] = variant;
    j["J"] = sol.J;
    j["mu"] = sol.mu;
    j["kappa"] = sol.diagnostics.kappa;
    j["energy"] = sol.u.energy();
    j["endpoint_error"] = endpoint_error;
    j["condition_estimate"] = sol.diagnostics.condition_estimate;
    j["feasibility"] = feasibility_json(sol.feasibility);
    j["s"] = io::to_json(sol.s);
    j["r"] = io::to_json(sol.r);
    j["lambda0"] = io::to_json(sol.diagnostics.lambda0);

    std::vector<std::string> cols{"t"};
    for (Eigen::Index i = 0; i < sol.u.dim(); ++i) {
        cols.push_back(column("u", i));
    }
    const bool with_prior = v.grid() == grid;
    if (with_prior) {
        for (Eigen::Index i = 0; i < v.dim(); ++i) {
            cols.push_back(column("v", i));
        }
    }
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        cols.push_back(column("x", i));
    }
    io::CsvTable table(prov, cols);
    for (int k = 0; k < grid.nodes(); ++k) {
        std::vector<double> row{grid.time(k)};
        for (Eigen::Index i = 0; i < sol.u.dim(); ++i) {
            row.push_back(sol.u.samples()(i, k));
        }
        if (with_prior) {
            for (Eigen::Index i = 0; i < v.dim(); ++i) {
                row.push_back(v.samples()(i, k));
            }
        }
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            row.push_back(X(i, k));
        }
        table.add_row(row);
    }
    io::OutputBundle bundle;
    bundle.add_json("solution.json", j);
    bundle.add("control.csv", table.str());
    bundle.commit(o.out);
    out << "solve-ct (" << variant << "): J = " << format_number(sol.J)
        << ", mu = " << format_number(sol.mu) << ", energy = " << format_number(sol.u.energy())
        << ", endpoint error = " << format_number(endpoint_error) << '\n';
    (void)err;
    return kExitOk;
}

// ---- solve-dt -------------------------------------------------------------------

int cmd_solve_dt(const Options& o, std::ostream& out, std::ostream& err) {
    ObjectReader root(read_config(o, true), "config");
    ObjectReader sys_r = root.child("system");
    const DtSystem system = read_dt_system(sys_r, sys_r.text("kind"));
    root.adopt("system", sys_r.finish());
    ObjectReader tr = root.child("transfer");
    const DtTransferSpec spec = read_dt_transfer(tr);
    root.adopt("transfer", tr.finish());
    ObjectReader pr = root.child("prior");
    const std::string prior_kind = pr.text("kind");
    Eigen::MatrixXd prior_values;
    if (prior_kind == "values") {
        prior_values = pr.matrix("values");
        if (pr.flag("rescale", false)) {
            const double energy = prior_values.squaredNorm() / prior_values.cols();
            if (!(energy > 0.0)) {
                throw UsageError("config.prior: cannot rescale a zero prior");
            }
            prior_values *= std::sqrt(spec.gamma_v / energy);
        }
    } else if (prior_kind == "constant") {
        const Eigen::VectorXd d = pr.vector("direction");
        if (!(d.norm() > 0.0)) {
            throw UsageError("config.prior.direction must be nonzero");
        }
        prior_values = (d * (std::sqrt(spec.gamma_v) / d.norm())).replicate(1, system.steps());
    } else {
        throw UsageError("config.prior.kind '" + prior_kind + "' is not values or constant");
    }
    root.adopt("prior", pr.finish());
    ObjectReader sr = root.child_or_empty("solver");
    DtOptions opts;
    opts.gramian = read_gramian_options(sr);
    opts.feasibility_tol = sr.number("feasibility_tol", opts.feasibility_tol);
    opts.prior_energy_tol = sr.number("prior_energy_tol", opts.prior_energy_tol);
    root.adopt("solver", sr.finish());
    ObjectReader orr = root.child_or_empty("oracle");
    OracleOptions oopts;
    oopts.max_iterations = static_cast<int>(orr.integer("max_iterations", oopts.max_iterations));
    oopts.gap_tolerance = orr.number("gap_tolerance", oopts.gap_tolerance);
    oopts.step = orr.number("step", oopts.step);
    root.adopt("oracle", orr.finish());
    Json resolved = root.finish();
    resolved["run_oracle"] = o.oracle;
    const Json prov = provenance("solve-dt", resolved);
    const DtControlSequence v(prior_values);

    DtSolution sol = [&] {
        try {
            return min_novelty_control_dt(system, spec, v, opts);
        } catch (const InfeasibleTransfer& e) {
            io::OutputBundle bundle;
            Json j;
            j["provenance"] = prov;
            j["feasibility"] = feasibility_json(e.report());
            bundle.add_json("feasibility.json", j);
            bundle.commit(o.out);
            throw;
        }
    }();
    const KktResiduals kkt = kkt_residuals(system, spec, v, sol);

    Json j;
    j["provenance"] = prov;
    j["J"] = sol.J;
    j["gamma"] = sol.gamma;
    j["delta"] = io::to_json(sol.delta);
    j["relaxation_tight"] = sol.relaxation_tight;
    j["energy"] = sol.u.energy();
    j["feasibility"] = feasibility_json(sol.feasibility);
    j["s"] = io::to_json(sol.s);
    j["r"] = io::to_json(sol.r);
    j["kkt"] = Json{{"stationarity", kkt.stationarity},
                    {"slackness", kkt.slackness},
                    {"endpoint", kkt.endpoint},
                    {"energy", kkt.energy}};

    int code = kExitOk;
    std::string oracle_line;
    if (o.oracle) {
        Json oj;
        try {
            const DtSolution ref = qp_oracle_dt(system, spec, v, oopts);
            const double diff = (ref.u.samples() - sol.u.samples()).cwiseAbs().maxCoeff();
            const bool agree = diff <= kOracleTolerance;
            oj["max_abs_difference"] = diff;
            oj["J"] = ref.J;
            oj["relaxation_tight"] = ref.relaxation_tight;
            oj["agree"] = agree;
            oracle_line = "oracle: max |u - u_oracle| = " + format_number(diff) +
                          (agree ? " (agree)" : " (DISAGREE)");
            code = agree ? kExitOk : kExitOracle;
        } catch (const ConvergenceError& e) {
            oj["error"] = e.what();
            oj["agree"] = false;
            oracle_line = std::string("oracle: failed: ") + e.what();
            code = kExitOracle;
        }
        oj["tolerance"] = kOracleTolerance;
        j["oracle"] = oj;
    }

    std::vector<std::string> cols{"k"};
    for (Eigen::Index i = 0; i < sol.u.dim(); ++i) {
        cols.push_back(column("u", i));
    }
    for (Eigen::Index i = 0; i < v.dim(); ++i) {
        cols.push_back(column("v", i));
    }
    io::CsvTable table(prov, cols);
    for (int k = 0; k < sol.u.steps(); ++k) {
        std::vector<std::string> row{std::to_string(k)};
        for (Eigen::Index i = 0; i < sol.u.dim(); ++i) {
            row.push_back(format_number(sol.u.samples()(i, k)));
        }
        for (Eigen::Index i = 0; i < v.dim(); ++i) {
            row.push_back(format_number(v.samples()(i, k)));
        }
        table.add_row(row);
    }
    io::OutputBundle bundle;
    bundle.add_json("solution.json", j);
    bundle.add("control.csv", table.str());
    bundle.commit(o.out);
    out << "solve-dt: J = " << format_number(sol.J) << ", gamma = " << format_number(sol.gamma)
        << ", energy = " << format_number(sol.u.energy()) << '\n';
    if (!oracle_line.empty()) {
        (code == kExitOk ? out : err) << oracle_line << '\n';
    }
    return code;
}

// ---- gramian ----------------------------------------------------------------------

int cmd_gramian(const Options& o, std::ostream& out, std::ostream&) {
    ObjectReader root(read_config(o, true), "config");
    ObjectReader sys_r = root.child("system");
    const std::string kind = sys_r.text("kind");
    ObjectReader sr = root.child_or_empty("solver");
    const GramianOptions gopts = read_gramian_options(sr);
    std::optional<GramianResult> W;
    Eigen::MatrixXd transition;
    if (is_discrete_kind(kind)) {
        const DtSystem system = read_dt_system(sys_r, kind);
        root.adopt("system", sys_r.finish());
        root.adopt("solver", sr.finish());
        W.emplace(dt_gramian(system, gopts));
        transition = dt_transition(system, 0, system.steps());
    } else {
        const LtvSystem system = read_ct_system(sys_r, kind);
        root.adopt("system", sys_r.finish());
        root.adopt("solver", sr.finish());
        const double horizon = root.number("horizon");
        ObjectReader gr = root.child_or_empty("grid");
        const long long intervals = gr.integer("intervals", Grid::kDefaultIntervals);
        root.adopt("grid", gr.finish());
        const Grid grid(horizon, static_cast<int>(intervals));
        const TransferKernel kernel = build_transfer_kernel(system, grid, gopts);
        W.emplace(kernel.gramian);
        transition = kernel.free_transition;
    }
    const Json prov = provenance("gramian", root.finish());
    const Eigen::VectorXd eig =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(W->matrix(), Eigen::EigenvaluesOnly).eigenvalues();

    Json j;
    j["provenance"] = prov;
    j["gramian"] = io::to_json(W->matrix());
    j["condition_estimate"] = W->condition_estimate();
    j["eigenvalues"] = io::to_json(eig);
    j["transition"] = io::to_json(transition);
    std::vector<std::string> cols;
    for (Eigen::Index i = 0; i < W->dim(); ++i) {
        cols.push_back(column("c", i));
    }
    io::CsvTable table(prov, cols);
    for (Eigen::Index i = 0; i < W->dim(); ++i) {
        std::vector<double> row;
        for (Eigen::Index k = 0; k < W->dim(); ++k) {
            row.push_back(W->matrix()(i, k));
        }
        table.add_row(row);
    }
    io::OutputBundle bundle;
    bundle.add_json("gramian.json", j);
    bundle.add("gramian.csv", table.str());
    bundle.commit(o.out);
    out << "gramian: n = " << W->dim() << ", condition estimate = "
        << format_number(W->condition_estimate()) << ", smallest eigenvalue = "
        << format_number(eig.minCoeff()) << '\n';
    return kExitOk;
}

// ---- experiments ------------------------------------------------------------------

int cmd_fig2(const Options& o, std::ostream& out) {
    ObjectReader root(read_config(o, false), "config");
    Fig2Config c;
    if (root.has("A")) c.A = root.matrix("A"); else root.adopt("A", io::to_json(c.A));
    if (root.has("B")) c.B = root.matrix("B"); else root.adopt("B", io::to_json(c.B));
    if (root.has("x_r")) c.x_r = root.vector("x_r"); else root.adopt("x_r", io::to_json(c.x_r));
    if (root.has("x_f")) c.x_f = root.vector("x_f"); else root.adopt("x_f", io::to_json(c.x_f));
    c.horizon = root.number("horizon", c.horizon);
    c.gamma_v = root.number("gamma_v", c.gamma_v);
    c.gamma_u = root.number("gamma_u", c.gamma_u);
    c.intervals = static_cast<int>(root.integer("intervals", c.intervals));
    const Json prov = provenance("experiment fig2", root.finish());
    const Fig2Result r = run_fig2(c);

    const Eigen::Index n = r.leg1.rows();
    const Eigen::Index m = r.prior.dim();
    const Grid& g = r.grid;
    std::vector<std::string> tcols{"t", "leg"};
    for (Eigen::Index i = 0; i < n; ++i) {
        tcols.push_back(column("x_novelty", i));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        tcols.push_back(column("x_energy", i));
    }
    std::vector<std::string> ucols{"t", "leg"};
    for (Eigen::Index i = 0; i < m; ++i) {
        ucols.push_back(column("u", i));
    }
    io::CsvTable traj(prov, tcols);
    io::CsvTable unov(prov, ucols);
    io::CsvTable uen(prov, ucols);
    for (int leg = 1; leg <= 2; ++leg) {
        for (int k = 0; k < g.nodes(); ++k) {
            const double t = (leg - 1) * g.horizon() + g.time(k);
            std::vector<double> row{t, static_cast<double>(leg)};
            for (Eigen::Index i = 0; i < n; ++i) {
                row.push_back(leg == 1 ? r.leg1(i, k) : r.leg2_novelty(i, k));
            }
            for (Eigen::Index i = 0; i < n; ++i) {
                row.push_back(leg == 1 ? r.leg1(i, k) : r.leg2_energy(i, k));
            }
            traj.add_row(row);
            std::vector<double> a{t, static_cast<double>(leg)};
            std::vector<double> b = a;
            for (Eigen::Index i = 0; i < m; ++i) {
                a.push_back(leg == 1 ? r.prior.samples()(i, k) : r.u_novelty.samples()(i, k));
                b.push_back(leg == 1 ? r.prior.samples()(i, k) : r.u_energy.samples()(i, k));
            }
            unov.add_row(a);
            uen.add_row(b);
        }
    }
    Json s;
    s["provenance"] = prov;
    s["J_novelty"] = r.J_novelty;
    s["J_energy"] = r.J_energy;
    s["energy_novelty"] = r.energy_novelty;
    s["energy_energy"] = r.energy_energy;
    s["endpoint_error_novelty"] = r.endpoint_error_novelty;
    s["endpoint_error_energy"] = r.endpoint_error_energy;
    io::OutputBundle bundle;
    bundle.add("fig2_trajectory.csv", traj.str());
    bundle.add("fig2_novelty_input.csv", unov.str());
    bundle.add("fig2_energy_input.csv", uen.str());
    bundle.add_json("fig2_summary.json", s);
    bundle.commit(o.out);
    out << "fig2: J(min-novelty) = " << format_number(r.J_novelty)
        << ", J(min-energy) = " << format_number(r.J_energy) << ", endpoint errors "
        << format_number(r.endpoint_error_novelty) << " / " << format_number(r.endpoint_error_energy)
        << '\n';
    return kExitOk;
}

int cmd_fig3(const Options& o, std::ostream& out) {
    ObjectReader root(read_config(o, false), "config");
    ObjectReader pr = root.child_or_empty("protocol");
    ExperimentProtocol p = read_protocol(pr, fig3_protocol());
    root.adopt("protocol", apply_overrides(p, pr.finish(), o));
    ObjectReader nr = root.child_or_empty("network");
    const RateNetConfig net = read_rate_config(nr);
    root.adopt("network", nr.finish());
    Eigen::VectorXd direction;
    if (root.has("prior_direction")) {
        direction = root.vector("prior_direction");
    } else {
        root.adopt("prior_direction", "ones");
    }
    const Json prov = provenance("experiment fig3", root.finish());
    const Fig3Result res = run_fig3(p, net, direction, o.jobs);

    io::CsvTable table(prov, {"index", "status", "J_novelty", "J_energy", "J_energy_budget",
                              "margin_prior", "margin_next", "condition"});
    for (const Fig3Sample& s : res.samples) {
        table.add_row({std::to_string(s.index), s.status, format_number(s.J_novelty),
                       format_number(s.J_energy), format_number(s.J_energy_budget),
                       format_number(s.margin_prior), format_number(s.margin_next),
                       format_number(s.condition)});
    }
    const bool pass = res.dominance_holds();
    Json j;
    j["provenance"] = prov;
    j["n_feasible"] = res.n_feasible;
    j["n_infeasible"] = res.n_infeasible;
    j["n_dominated"] = res.n_dominated;
    j["gap_mean"] = res.gap.mean;
    j["gap_std"] = res.gap.std;
    j["dominance"] = pass ? "PASS" : "FAIL";
    j["J_energy_normalization"] = "own energy; J_energy_budget uses gamma_u";
    io::OutputBundle bundle;
    bundle.add("fig3.csv", table.str());
    bundle.add_json("fig3_summary.json", j);
    bundle.commit(o.out);
    out << "fig3 dominance: " << (pass ? "PASS" : "FAIL") << " (" << res.n_dominated << "/"
        << res.n_feasible << " feasible realizations, " << res.n_infeasible
        << " infeasible, mean gap " << format_number(res.gap.mean) << ")\n";
    return kExitOk;
}

int cmd_fig4(const Options& o, std::ostream& out) {
    ObjectReader root(read_config(o, false), "config");
    Fig4Config c;
    ObjectReader pr = root.child_or_empty("protocol");
    c.protocol = read_protocol(pr, c.protocol);
    root.adopt("protocol", apply_overrides(c.protocol, pr.finish(), o));
    read_graph_fields(root, c);
    if (root.has("attachments")) {
        c.attachments.clear();
        for (const long long a : root.integers("attachments")) {
            c.attachments.push_back(static_cast<int>(a));
        }
    } else {
        root.adopt("attachments", c.attachments);
    }
    if (root.has("families")) {
        c.families.clear();
        for (const std::string& f : root.strings("families")) {
            c.families.push_back(graph_family_from_string(f));
        }
    } else {
        root.adopt("families", Json::array({"BA", "WS"}));
    }
    c.validate();
    const Json prov = provenance("experiment fig4", root.finish());
    const MetricReport report = run_fig4(c, o.jobs);

    io::CsvTable table(prov, {"eta", "family", "mean_J", "std_J", "mean_E", "std_E", "n_feasible",
                              "n_infeasible"});
    Json rows = Json::array();
    for (const MetricRow& r : report.rows) {
        table.add_row({format_number(r.eta), to_string(r.family), format_number(r.J.mean),
                       format_number(r.J.std), format_number(r.E.mean), format_number(r.E.std),
                       std::to_string(r.n_feasible), std::to_string(r.n_infeasible)});
        rows.push_back(Json{{"family", to_string(r.family)},
                            {"parameter", r.parameter},
                            {"eta", r.eta},
                            {"n_ill_conditioned", r.n_ill_conditioned},
                            {"n_generation_failed", r.n_generation_failed}});
    }
    Json trends = Json::array();
    std::ostringstream verdicts;
    for (const TrendCheck& t : trend_checks(report)) {
        const bool ok_J = t.rho_J <= kTrendThreshold;
        const bool ok_E = t.rho_E <= kTrendThreshold;
        trends.push_back(Json{{"family", to_string(t.family)},
                              {"rho_J", t.rho_J},
                              {"rho_E", t.rho_E},
                              {"J_decreasing", ok_J},
                              {"E_decreasing", ok_E}});
        verdicts << "fig4 " << to_string(t.family) << " trend: " << (ok_J && ok_E ? "PASS" : "FAIL")
                 << " (rho_J = " << format_number(t.rho_J) << ", rho_E = " << format_number(t.rho_E)
                 << ", threshold " << format_number(kTrendThreshold) << ")\n";
    }
    const bool both = c.families.size() == 2 && c.families[0] != c.families[1];
    Json j;
    j["provenance"] = prov;
    j["rows"] = rows;
    j["trends"] = trends;
    if (both) {
        const bool sep = family_separation(report);
        j["family_separation"] = sep;
        verdicts << "fig4 family separation: " << (sep ? "PASS" : "FAIL") << '\n';
    }
    io::OutputBundle bundle;
    bundle.add("fig4.csv", table.str());
    bundle.add_json("fig4_summary.json", j);
    bundle.commit(o.out);
    out << verdicts.str();
    return kExitOk;
}

// ---- generate-network ---------------------------------------------------------------

int cmd_generate_network(const Options& o, std::ostream& out) {
    ObjectReader root(read_config(o, true), "config");
    const std::string kind = root.text("kind");
    const int index = static_cast<int>(root.integer("index", 0));
    if (index < 0) {
        throw UsageError("config.index must be >= 0");
    }
    std::uint64_t seed = root.unsigned_integer("seed", 0);
    if (o.seed) {
        seed = *o.seed;
        root.adopt("seed", seed);
    }
    io::OutputBundle bundle;
    Json system;
    std::string summary;
    if (kind == "rate") {
        ObjectReader nr = root.child_or_empty("network");
        const RateNetConfig net = read_rate_config(nr);
        root.adopt("network", nr.finish());
        const Json prov = provenance("generate-network", root.finish());
        Philox rng = realization_stream(seed, index, StreamPurpose::Network);
        const RateNetwork rn = build_rate_network(net, rng);
        system = Json{{"kind", "rate_network"}, {"tau", io::to_json(rn.tau)}, {"W", io::to_json(rn.W)}};
        bundle.add_json("network.json", Json{{"provenance", prov}, {"system", system}});
        summary = "rate network: n = " + std::to_string(net.n);
    } else if (kind == "graph") {
        Fig4Config c;
        c.protocol.seed = seed;
        read_graph_fields(root, c);
        const GraphFamily family = graph_family_from_string(root.text("family"));
        const int attachment = static_cast<int>(root.integer("attachment"));
        c.attachments = {attachment};
        c.families = {family};
        c.validate();
        const Json prov = provenance("generate-network", root.finish());
        const Fig4Instance inst = fig4_instance(c, family, attachment, index);
        system = Json{{"kind", "rate_network"}, {"tau", io::to_json(inst.tau)}, {"W", io::to_json(inst.W)}};
        bundle.add_json("network.json", Json{{"provenance", prov}, {"system", system}});
        std::ostringstream edges;
        edges << "# provenance: " << prov.dump() << '\n';
        write_edge_list(edges, inst.adjacency);
        bundle.add("graph.edges", edges.str());
        summary = to_string(family) + " graph: n = " + std::to_string(inst.adjacency.rows()) +
                  ", edges = " + std::to_string(edge_count(inst.adjacency)) +
                  ", density = " + format_number(edge_density(inst.adjacency));
    } else {
        throw UsageError("config.kind must be rate or graph");
    }
    bundle.commit(o.out);
    out << "generate-network: " << summary << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Minimum-novelty control of linear time-varying systems", "novelty_cli"};
    app.require_subcommand(1);
    app.add_option("--config", o.config, "JSON configuration file");
    app.add_option("--out", o.out, "output directory")->capture_default_str();
    app.add_option("--seed", o.seed, "override the random seed");
    app.add_option("--jobs", o.jobs, "worker threads for ensembles")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.fallthrough();

    CLI::App* solve_ct = app.add_subcommand("solve-ct", "continuous-time minimum-novelty input");
    CLI::App* solve_dt = app.add_subcommand("solve-dt", "discrete-time minimum-novelty input");
    solve_dt->add_flag("--oracle", o.oracle, "cross-check against the iterative QP solver");
    CLI::App* gramian = app.add_subcommand("gramian", "controllability gramian of a system");
    CLI::App* generate = app.add_subcommand("generate-network", "sample a network realization");
    CLI::App* experiment = app.add_subcommand("experiment", "run an ensemble experiment");
    experiment->add_flag("--full-scale", o.full_scale, "1000 realizations");
    experiment->require_subcommand(1);
    experiment->fallthrough();
    CLI::App* fig2 = experiment->add_subcommand("fig2", "two-leg phase-plane demo");
    CLI::App* fig3 = experiment->add_subcommand("fig3", "single-network novelty dominance");
    CLI::App* fig4 = experiment->add_subcommand("fig4", "graph ensembles over edge density");
    for (CLI::App* sub : {solve_ct, solve_dt, gramian, generate, fig2, fig3, fig4}) {
        sub->fallthrough();
    }

    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) {
        args.emplace_back(argv[i]);
    }
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (solve_ct->parsed()) {
            return cmd_solve_ct(o, out, err);
        }
        if (solve_dt->parsed()) {
            return cmd_solve_dt(o, out, err);
        }
        if (gramian->parsed()) {
            return cmd_gramian(o, out, err);
        }
        if (generate->parsed()) {
            return cmd_generate_network(o, out);
        }
        if (fig2->parsed()) {
            return cmd_fig2(o, out);
        }
        if (fig3->parsed()) {
            return cmd_fig3(o, out);
        }
        if (fig4->parsed()) {
            return cmd_fig4(o, out);
        }
    } catch (const InfeasibleTransfer& e) {
        const FeasibilityReport& f = e.report();
        err << "infeasible transfer: margin_prior = " << format_number(f.margin_prior)
            << ", margin_next = " << format_number(f.margin_next) << '\n';
        return kExitInfeasible;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace novelty
