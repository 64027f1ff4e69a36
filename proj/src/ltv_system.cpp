#include "novelty/ltv_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>

#include "novelty/errors.hpp"

namespace novelty {
namespace {

struct Constant {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
};

struct Closure {
    LtvSystem::MatrixFn A;
    LtvSystem::MatrixFn B;
};

struct Table {
    Grid grid;
    std::vector<Eigen::MatrixXd> A;
    std::vector<Eigen::MatrixXd> B;
};

Eigen::MatrixXd interpolate(const Grid& grid, const std::vector<Eigen::MatrixXd>& values, double t) {
    const double T = grid.horizon();
    if (t < -1e-12 * T || t > T * (1.0 + 1e-12)) {
        throw RangeError("tabulated system evaluated at t = " + std::to_string(t) +
                         " outside [0, " + std::to_string(T) + "]");
    }
    const double pos = std::clamp(t / grid.step(), 0.0, static_cast<double>(grid.intervals()));
    const int i = std::min(static_cast<int>(pos), grid.intervals() - 1);
    const double frac = pos - i;
    if (frac == 0.0) {
        return values[i];
    }
    return (1.0 - frac) * values[i] + frac * values[i + 1];
}

void check_shape(const Eigen::MatrixXd& M, Eigen::Index rows, Eigen::Index cols, const char* name,
                 double t) {
    if (M.rows() != rows || M.cols() != cols) {
        throw ShapeError(std::string(name) + "(t) at t = " + std::to_string(t) + " is " +
                         std::to_string(M.rows()) + "x" + std::to_string(M.cols()) +
                         ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
}

}  // namespace

struct LtvSystem::Model {
    Eigen::Index n;
    Eigen::Index m;
    std::variant<Constant, Closure, Table> rep;
};

LtvSystem::LtvSystem(std::shared_ptr<const Model> model, double offset)
    : model_(std::move(model)), offset_(offset) {}

LtvSystem LtvSystem::time_invariant(Eigen::MatrixXd A, Eigen::MatrixXd B) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();
    if (n < 1 || m < 1) {
        throw ShapeError("system dimensions must be >= 1");
    }
    check_shape(A, n, n, "A", 0.0);
    check_shape(B, n, m, "B", 0.0);
    if (!A.allFinite() || !B.allFinite()) {
        throw SpecificationError("system matrices contain non-finite entries");
    }
    auto model = std::make_shared<Model>(Model{n, m, Constant{std::move(A), std::move(B)}});
    return LtvSystem(std::move(model), 0.0);
}

LtvSystem LtvSystem::analytic(Eigen::Index n, Eigen::Index m, MatrixFn A, MatrixFn B) {
    if (n < 1 || m < 1) {
        throw ShapeError("system dimensions must be >= 1");
    }
    if (!A || !B) {
        throw SpecificationError("analytic system needs both A(t) and B(t)");
    }
    check_shape(A(0.0), n, n, "A", 0.0);
    check_shape(B(0.0), n, m, "B", 0.0);
    auto model = std::make_shared<Model>(Model{n, m, Closure{std::move(A), std::move(B)}});
    return LtvSystem(std::move(model), 0.0);
}

LtvSystem LtvSystem::tabulated(const Grid& table_grid, std::vector<Eigen::MatrixXd> A,
                               std::vector<Eigen::MatrixXd> B) {
    const auto nodes = static_cast<std::size_t>(table_grid.nodes());
    if (A.size() != nodes || B.size() != nodes) {
        throw ShapeError("tabulated system needs one A and one B per grid node (" +
                         std::to_string(nodes) + ")");
    }
    const Eigen::Index n = A.front().rows();
    const Eigen::Index m = B.front().cols();
    if (n < 1 || m < 1) {
        throw ShapeError("system dimensions must be >= 1");
    }
    for (std::size_t i = 0; i < nodes; ++i) {
        check_shape(A[i], n, n, "A", table_grid.time(static_cast<int>(i)));
        check_shape(B[i], n, m, "B", table_grid.time(static_cast<int>(i)));
        if (!A[i].allFinite() || !B[i].allFinite()) {
            throw SpecificationError("tabulated system has non-finite entries at node " +
                                     std::to_string(i));
        }
    }
    auto model =
        std::make_shared<Model>(Model{n, m, Table{table_grid, std::move(A), std::move(B)}});
    return LtvSystem(std::move(model), 0.0);
}

Eigen::Index LtvSystem::n() const noexcept { return model_->n; }
Eigen::Index LtvSystem::m() const noexcept { return model_->m; }

Eigen::MatrixXd LtvSystem::A(double t) const {
    const double s = t + offset_;
    return std::visit(
        [&](const auto& rep) -> Eigen::MatrixXd {
            using R = std::decay_t<decltype(rep)>;
            if constexpr (std::is_same_v<R, Constant>) {
                return rep.A;
            } else if constexpr (std::is_same_v<R, Closure>) {
                Eigen::MatrixXd value = rep.A(s);
                check_shape(value, model_->n, model_->n, "A", s);
                return value;
            } else {
                return interpolate(rep.grid, rep.A, s);
            }
        },
        model_->rep);
}

Eigen::MatrixXd LtvSystem::B(double t) const {
    const double s = t + offset_;
    return std::visit(
        [&](const auto& rep) -> Eigen::MatrixXd {
            using R = std::decay_t<decltype(rep)>;
            if constexpr (std::is_same_v<R, Constant>) {
                return rep.B;
            } else if constexpr (std::is_same_v<R, Closure>) {
                Eigen::MatrixXd value = rep.B(s);
                check_shape(value, model_->n, model_->m, "B", s);
                return value;
            } else {
                return interpolate(rep.grid, rep.B, s);
            }
        },
        model_->rep);
}

bool LtvSystem::is_time_invariant() const noexcept {
    return std::holds_alternative<Constant>(model_->rep);
}

double LtvSystem::covered_until() const noexcept {
    if (const auto* table = std::get_if<Table>(&model_->rep)) {
        return table->grid.horizon() - offset_;
    }
    return std::numeric_limits<double>::infinity();
}

LtvSystem LtvSystem::shifted(double t0) const {
    if (!(t0 >= 0.0) || !std::isfinite(t0)) {
        throw RangeError("system shift must be a finite nonnegative time");
    }
    return LtvSystem(model_, offset_ + t0);
}

DtSystem::DtSystem(std::vector<Eigen::MatrixXd> A, std::vector<Eigen::MatrixXd> B)
    : A_(std::move(A)), B_(std::move(B)) {
    if (A_.empty()) {
        throw SpecificationError("discrete system needs at least one step");
    }
    if (A_.size() != B_.size()) {
        throw ShapeError("discrete system needs as many B(k) as A(k)");
    }
    n_ = A_.front().rows();
    m_ = B_.front().cols();
    if (n_ < 1 || m_ < 1) {
        throw ShapeError("system dimensions must be >= 1");
    }
    for (std::size_t k = 0; k < A_.size(); ++k) {
        check_shape(A_[k], n_, n_, "A", static_cast<double>(k));
        check_shape(B_[k], n_, m_, "B", static_cast<double>(k));
        if (!A_[k].allFinite() || !B_[k].allFinite()) {
            throw SpecificationError("discrete system has non-finite entries at step " +
                                     std::to_string(k));
        }
    }
}

DtSystem DtSystem::time_invariant(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int steps) {
    if (steps < 1) {
        throw SpecificationError("discrete horizon p must be >= 1");
    }
    return DtSystem(std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(steps), A),
                    std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(steps), B));
}

const Eigen::MatrixXd& DtSystem::A(int k) const {
    if (k < 0 || k >= steps()) {
        throw RangeError("step " + std::to_string(k) + " outside [0, " + std::to_string(steps()) +
                         ")");
    }
    return A_[static_cast<std::size_t>(k)];
}

const Eigen::MatrixXd& DtSystem::B(int k) const {
    if (k < 0 || k >= steps()) {
        throw RangeError("step " + std::to_string(k) + " outside [0, " + std::to_string(steps()) +
                         ")");
    }
    return B_[static_cast<std::size_t>(k)];
}

}  // namespace novelty
