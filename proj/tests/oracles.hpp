#pragma once

// Slow reference computations used only by the tests. They share no code
// paths with the library beyond the data types.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mfhier/hier_penalty.hpp"
#include "mfhier/mf_data.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Nested-group prox: 1/2 ||x - z||^2 + sum_p c_p ||x_{s_p}||, s_p the suffix
// starting at start[p]. Solved on the dual by cyclic block maximization over
// the balls ||u_p|| <= c_p, visiting levels outermost first (the opposite of
// the library's order), until the duality gap closes.

struct ProxOracle {
    std::vector<double> x;
    double gap = 0.0;
    int passes = 0;
};

inline double primal_value(const std::vector<double>& x, const std::vector<double>& z,
                           const std::vector<int>& start, const std::vector<double>& c) {
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) v += 0.5 * (x[i] - z[i]) * (x[i] - z[i]);
    for (std::size_t p = 0; p < start.size(); ++p) {
        double s = 0.0;
        for (std::size_t i = start[p]; i < x.size(); ++i) s += x[i] * x[i];
        v += c[p] * std::sqrt(s);
    }
    return v;
}

// Minimizes ||r - sum_p u_p|| over u_p supported on suffix start[p] with
// ||u_p|| <= c[p], for the listed levels only. Returns the optimal u's.
inline std::vector<std::vector<double>> ball_fit(const std::vector<double>& r, const std::vector<int>& start,
                                                 const std::vector<double>& c, const std::vector<int>& levels,
                                                 int max_passes = 200000) {
    const std::size_t n = r.size();
    std::vector<std::vector<double>> u(start.size(), std::vector<double>(n, 0.0));
    std::vector<double> res = r;  // r - sum u
    for (int pass = 0; pass < max_passes; ++pass) {
        double change = 0.0;
        for (int p : levels) {
            double norm = 0.0;
            std::vector<double> w(n, 0.0);
            for (std::size_t i = start[p]; i < n; ++i) {
                w[i] = res[i] + u[p][i];
                norm += w[i] * w[i];
            }
            norm = std::sqrt(norm);
            const double scale = norm > c[p] ? c[p] / norm : 1.0;
            for (std::size_t i = start[p]; i < n; ++i) {
                const double nu = w[i] * scale;
                change = std::max(change, std::abs(nu - u[p][i]));
                res[i] -= nu - u[p][i];
                u[p][i] = nu;
            }
        }
        if (change < 1e-15) break;
    }
    return u;
}

inline ProxOracle nested_prox(const std::vector<double>& z, const std::vector<int>& start,
                              const std::vector<double>& c) {
    std::vector<int> levels(start.size());
    std::iota(levels.begin(), levels.end(), 0);
    const auto u = ball_fit(z, start, c, levels);
    ProxOracle out;
    out.x = z;
    for (const auto& up : u)
        for (std::size_t i = 0; i < z.size(); ++i) out.x[i] -= up[i];
    // Dual value 1/2||z||^2 - 1/2||x||^2 with x = z - sum u.
    double zz = 0.0, xx = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        zz += z[i] * z[i];
        xx += out.x[i] * out.x[i];
    }
    out.gap = primal_value(out.x, z, start, c) - (0.5 * zz - 0.5 * xx);
    return out;
}

/// Distance from 0 to the subdifferential of the prox objective at x.
inline double prox_kkt_residual(const std::vector<double>& x, const std::vector<double>& z,
                                const std::vector<int>& start, const std::vector<double>& c) {
    const std::size_t n = x.size();
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = z[i] - x[i];
    std::vector<int> zero_levels;
    for (std::size_t p = 0; p < start.size(); ++p) {
        double norm = 0.0;
        for (std::size_t i = start[p]; i < n; ++i) norm += x[i] * x[i];
        norm = std::sqrt(norm);
        if (norm > 0.0) {
            for (std::size_t i = start[p]; i < n; ++i) r[i] -= c[p] * x[i] / norm;
        } else {
            zero_levels.push_back(static_cast<int>(p));
        }
    }
    const auto u = ball_fit(r, start, c, zero_levels);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = r[i];
        for (int p : zero_levels) v -= u[p][i];
        s += v * v;
    }
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Objective and solver oracle. The loss is formed from the raw Y and Z:
// 1/2 ||(Y - Z B') A'||_F^2.

inline double loss(const Eigen::MatrixXd& y, const Eigen::MatrixXd& z, const Eigen::MatrixXd& a,
                   const Eigen::MatrixXd& b) {
    return 0.5 * ((y - z * b.transpose()) * a.transpose()).squaredNorm();
}

inline double group_penalty(const Eigen::MatrixXd& b, const mfhier::NestedGroup& g) {
    double v = 0.0;
    for (int p = 0; p < g.chain.levels(); ++p) {
        double s = 0.0;
        for (int i = g.chain.level_start[p]; i < g.size(); ++i) {
            const double x = b(g.linear[i]);
            s += x * x;
        }
        v += g.chain.weight[p] * std::sqrt(s);
    }
    return v;
}

inline double penalty(const Eigen::MatrixXd& b, const mfhier::NestedGroupStructure& s) {
    double v = 0.0;
    for (const auto& g : s.groups) v += group_penalty(b, g);
    return v;
}

inline double objective(const Eigen::MatrixXd& y, const Eigen::MatrixXd& z, const Eigen::MatrixXd& a,
                        const mfhier::NestedGroupStructure& s, double lambda, const Eigen::MatrixXd& b) {
    return loss(y, z, a, b) + lambda * penalty(b, s);
}

/// Cyclic block coordinate descent: each group block is minimized to high
/// accuracy by plain proximal gradient steps (no momentum) whose prox is the
/// dual ball-fitting oracle above, with the group's own Lipschitz constant.
inline Eigen::MatrixXd block_descent(const Eigen::MatrixXd& y, const Eigen::MatrixXd& z, const Eigen::MatrixXd& a,
                                     const mfhier::NestedGroupStructure& s, double lambda, int outer = 2000,
                                     double tol = 1e-12) {
    const Eigen::Index k = y.cols();
    const Eigen::MatrixXd w = a.transpose() * a;
    const Eigen::MatrixXd zz = z.transpose() * z;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k, k);
    for (int it = 0; it < outer; ++it) {
        double change = 0.0;
        for (const auto& g : s.groups) {
            const auto& blk = g.block;
            const double lw = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(w.block(blk.row0, blk.row0, blk.rows, blk.rows))
                                  .eigenvalues()
                                  .maxCoeff();
            const double lz = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(zz.block(blk.col0, blk.col0, blk.cols, blk.cols))
                                  .eigenvalues()
                                  .maxCoeff();
            const double lip = lw * lz;
            if (!(lip > 0.0)) continue;
            const double step = 1.0 / lip;
            std::vector<double> c(g.chain.levels());
            std::vector<int> start(g.chain.level_start.begin(), g.chain.level_start.end());
            for (int p = 0; p < g.chain.levels(); ++p) c[p] = step * lambda * g.chain.weight[p];
            for (int inner = 0; inner < 20000; ++inner) {
                // Gradient of the loss: -W (Y - Z B')' Z.
                const Eigen::MatrixXd grad = -w * (y - z * b.transpose()).transpose() * z;
                std::vector<double> v(g.size());
                for (int i = 0; i < g.size(); ++i) v[i] = b(g.linear[i]) - step * grad(g.linear[i]);
                const auto next = nested_prox(v, start, c).x;
                double d = 0.0;
                for (int i = 0; i < g.size(); ++i) {
                    d = std::max(d, std::abs(next[i] - b(g.linear[i])));
                    b(g.linear[i]) = next[i];
                }
                change = std::max(change, d);
                if (d < tol) break;
            }
        }
        if (change < tol) break;
    }
    return b;
}

// ---------------------------------------------------------------------------
// GLS with the Kronecker objects formed explicitly.

struct Kronecker {
    Eigen::MatrixXd x;      // NK x K^2, I_K (x) Z
    Eigen::VectorXd y;      // vec(Y)
    Eigen::MatrixXd whiten; // (Sigma (x) I_N)^{-1/2}
};

inline Kronecker kronecker_gls(const Eigen::MatrixXd& y, const Eigen::MatrixXd& z, const Eigen::MatrixXd& sigma) {
    const Eigen::Index n = y.rows(), k = y.cols();
    Kronecker out;
    out.x = Eigen::MatrixXd::Zero(n * k, k * k);
    for (Eigen::Index e = 0; e < k; ++e) out.x.block(e * n, e * k, n, k) = z;
    out.y = Eigen::Map<const Eigen::VectorXd>(y.data(), n * k);
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n * k, n * k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) big.block(i * n, j * n, n, n) = sigma(i, j) * Eigen::MatrixXd::Identity(n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(big);
    out.whiten = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                 es.eigenvectors().transpose();
    return out;
}

/// beta = vec(B'): equation e occupies entries e*K .. e*K+K-1.
inline Eigen::VectorXd vec_rows(const Eigen::MatrixXd& b) {
    Eigen::MatrixXd bt = b.transpose();
    return Eigen::Map<const Eigen::VectorXd>(bt.data(), bt.size());
}

// ---------------------------------------------------------------------------
// Statistics.

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double n = static_cast<double>(a.size());
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        sa += a(i);
        sb += b(i);
        saa += a(i) * a(i);
        sbb += b(i) * b(i);
        sab += a(i) * b(i);
    }
    return (n * sab - sa * sb) / std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
}

/// PC1 scores of the correlation matrix, standardized, via the general
/// (non-symmetric) eigensolver. Sign is left arbitrary.
inline Eigen::VectorXd pc1(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows(), p = x.cols();
    Eigen::MatrixXd s(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double m = x.col(j).mean();
        double v = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) v += (x(i, j) - m) * (x(i, j) - m);
        s.col(j) = (x.col(j).array() - m) / std::sqrt(v / (n - 1));
    }
    Eigen::MatrixXd corr(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) corr(i, j) = pearson(x.col(i), x.col(j));
    Eigen::EigenSolver<Eigen::MatrixXd> es(corr);
    Eigen::Index top = 0;
    es.eigenvalues().real().maxCoeff(&top);
    const Eigen::VectorXd v = es.eigenvectors().col(top).real();
    Eigen::VectorXd scores = s * v;
    const double m = scores.mean();
    const double sd = std::sqrt((scores.array() - m).square().sum() / (n - 1));
    return (scores.array() - m) / sd;
}

inline double mse_loop(const std::vector<Eigen::MatrixXd>& est, const Eigen::MatrixXd& truth) {
    double total = 0.0;
    for (const auto& e : est) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < e.rows(); ++i)
            for (Eigen::Index j = 0; j < e.cols(); ++j) s += (e(i, j) - truth(i, j)) * (e(i, j) - truth(i, j));
        total += s / static_cast<double>(e.size());
    }
    return total / static_cast<double>(est.size());
}

inline double msfe_loop(const Eigen::MatrixXd& f, const Eigen::MatrixXd& a, int series) {
    double s = 0.0;
    for (Eigen::Index r = 0; r < f.rows(); ++r) s += (a(r, series) - f(r, series)) * (a(r, series) - f(r, series));
    return s / static_cast<double>(f.rows());
}

// ---------------------------------------------------------------------------
// Random instances.

struct RandomProblem {
    mfhier::FrequencyScheme scheme;
    mfhier::StackedPanel panel;
    mfhier::RegressionProblem problem;
};

/// Small random scheme with K <= max_k and a standardized panel of T rows
/// drawn from a stable VAR(1).
inline RandomProblem random_problem(std::mt19937_64& rng, int max_k, int t) {
    std::uniform_int_distribution<int> pick(0, 3);
    mfhier::FrequencyScheme scheme;
    for (;;) {
        switch (pick(rng)) {
            case 0: scheme = mfhier::FrequencyScheme(1, {{3, 1}}); break;
            case 1: scheme = mfhier::FrequencyScheme(2, {{3, 1}}); break;
            case 2: scheme = mfhier::FrequencyScheme(1, {{2, 1}, {3, 1}}); break;
            default: scheme = mfhier::FrequencyScheme(1, {{3, 2}}); break;
        }
        if (scheme.dimension() <= max_k) break;
    }
    const int k = scheme.dimension();
    std::normal_distribution<double> n01;
    Eigen::MatrixXd b(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) b(i, j) = n01(rng) * 0.3;
    const double rad = Eigen::EigenSolver<Eigen::MatrixXd>(b).eigenvalues().cwiseAbs().maxCoeff();
    if (rad > 0.8) b *= 0.8 / rad;
    Eigen::MatrixXd data(t, k);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(k);
    for (int s = -50; s < t; ++s) {
        Eigen::VectorXd e(k);
        for (int i = 0; i < k; ++i) e(i) = n01(rng);
        y = b * y + e;
        if (s >= 0) data.row(s) = y.transpose();
    }
    RandomProblem out;
    out.scheme = scheme;
    out.panel = mfhier::standardize(mfhier::make_panel(scheme, data), {0, t}).first;
    out.problem = mfhier::build_problem(out.panel);
    return out;
}

}  // namespace oracle
