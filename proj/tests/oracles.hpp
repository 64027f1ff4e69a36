#pragma once

// Test-only reference computations. Nothing here calls into the library's
// integrators or closed forms.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// exp(M) by scaling and squaring of a 20-term Taylor series.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& M) {
    const double norm = M.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    }
    const Eigen::MatrixXd S = M / std::ldexp(1.0, squarings);
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(M.rows(), M.cols());
    Eigen::MatrixXd term = result;
    for (int k = 1; k <= 20; ++k) {
        term = term * S / static_cast<double>(k);
        result += term;
    }
    for (int i = 0; i < squarings; ++i) {
        result = result * result;
    }
    return result;
}

// LTI gramian ∫_0^T e^{A s} B B' e^{A' s} ds from the block exponential
// exp([[-A, BB'], [0, A']] T) (Van Loan).
inline Eigen::MatrixXd lti_gramian(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double T) {
    const Eigen::Index n = A.rows();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    H.topLeftCorner(n, n) = -A;
    H.topRightCorner(n, n) = B * B.transpose();
    H.bottomRightCorner(n, n) = A.transpose();
    const Eigen::MatrixXd F = expm(H * T);
    return F.bottomRightCorner(n, n).transpose() * F.topRightCorner(n, n);
}

inline Eigen::MatrixXd random_stable(std::mt19937_64& gen, int n, double shift = 1.0) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            A(i, j) = nd(gen);
        }
    }
    const double spread = Eigen::EigenSolver<Eigen::MatrixXd>(A).eigenvalues().real().maxCoeff();
    return A - (spread + shift) * Eigen::MatrixXd::Identity(n, n);
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& gen, int rows, int cols) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            M(i, j) = nd(gen);
        }
    }
    return M;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& gen, int n) {
    return random_matrix(gen, n, 1);
}


inline Eigen::VectorXd simpson(int N, double T) {
    Eigen::VectorXd w(N + 1);
    const double h = T / N;
    for (int i = 0; i <= N; ++i) {
        w[i] = (i == 0 || i == N) ? h / 3.0 : (i % 2 == 1 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
    }
    return w;
}

// e^{A(T - t_i)} B at every node of an N-interval grid.
inline std::vector<Eigen::MatrixXd> lti_kernels(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                                double T, int N) {
    std::vector<Eigen::MatrixXd> G;
    for (int i = 0; i <= N; ++i) {
        G.push_back(expm(A * (T - T * i / N)) * B);
    }
    return G;
}

struct BruteForce {
    Eigen::MatrixXd u;  // m × (N+1)
    double J = -2.0;
    double kappa = 0.0;  // least-squares weight of v in u
    int candidates = 0;
};

// Maximizes (1/(T √(γv γu))) ∫ v'u subject to ∫ G u = r and (1/T)∫||u||² = γu
// on the Simpson-discretized problem. In Simpson-weighted coordinates the
// feasible set is a sphere inside an affine subspace; it is searched by
// projected gradient ascent from random starts and by plain random sampling.
inline BruteForce brute_force_novelty(const std::vector<Eigen::MatrixXd>& G, const Eigen::MatrixXd& v,
                                      const Eigen::VectorXd& r, double T, double gamma_v,
                                      double gamma_u, std::mt19937_64& gen, int starts = 20,
                                      int random_samples = 2000) {
    const int N = static_cast<int>(G.size()) - 1;
    const Eigen::Index n = G[0].rows();
    const Eigen::Index m = G[0].cols();
    const Eigen::Index K = m * (N + 1);
    const Eigen::VectorXd w = simpson(N, T);
    Eigen::MatrixXd M(n, K);
    Eigen::VectorXd c(K);
    const double norm = T * std::sqrt(gamma_v * gamma_u);
    for (int i = 0; i <= N; ++i) {
        M.middleCols(i * m, m) = std::sqrt(w[i]) * G[i];
        c.segment(i * m, m) = std::sqrt(w[i]) * v.col(i) / norm;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd centre = svd.solve(r);
    const Eigen::MatrixXd null = svd.matrixV().rightCols(K - svd.rank());
    const double rho2 = gamma_u * T - centre.squaredNorm();
    BruteForce best;
    if (rho2 < 0.0) {
        return best;
    }
    const double rho = std::sqrt(rho2);
    const Eigen::VectorXd g = null.transpose() * c;
    std::normal_distribution<double> nd(0.0, 1.0);
    const auto random_unit = [&]() {
        Eigen::VectorXd q(null.cols());
        for (Eigen::Index k = 0; k < q.size(); ++k) {
            q[k] = nd(gen);
        }
        return Eigen::VectorXd(q.normalized());
    };
    Eigen::VectorXd best_y;
    const auto consider = [&](const Eigen::VectorXd& q) {
        const Eigen::VectorXd y = centre + rho * null * q;
        const double J = c.dot(y);
        ++best.candidates;
        if (J > best.J) {
            best.J = J;
            best_y = y;
        }
    };
    for (int s = 0; s < starts; ++s) {
        Eigen::VectorXd q = random_unit();
        const double step = 0.5 / std::max(g.norm(), 1e-300);
        for (int it = 0; it < 500; ++it) {
            q = (q + step * g).normalized();
        }
        consider(q);
    }
    for (int s = 0; s < random_samples; ++s) {
        consider(random_unit());
    }
    best.u.resize(m, N + 1);
    for (int i = 0; i <= N; ++i) {
        best.u.col(i) = best_y.segment(i * m, m) / std::sqrt(w[i]);
    }
    // u = kappa v + G'z: fit in Simpson-weighted coordinates.
    Eigen::MatrixXd basis(K, n + 1);
    basis.leftCols(n) = M.transpose();
    basis.col(n) = c * norm;
    const Eigen::VectorXd coeff = basis.colPivHouseholderQr().solve(best_y);
    best.kappa = coeff[n];
    return best;
}

}  // namespace oracle
