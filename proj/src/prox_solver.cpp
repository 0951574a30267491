#include "mfhier/prox_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "mfhier/errors.hpp"

namespace mfhier {

void SolverConfig::validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("solver epsilon must be positive");
    if (max_iter < 1) throw ConfigError("solver max_iter must be >= 1");
    if (grid_len < 1) throw ConfigError("grid_len must be >= 1");
    if (!(grid_ratio > 0.0 && grid_ratio < 1.0)) throw ConfigError("grid_ratio must lie in (0, 1)");
}

double evaluate_penalty(const Eigen::MatrixXd& beta, const NestedGroupStructure& structure) {
    if (beta.rows() != structure.dimension || beta.cols() != structure.dimension)
        throw DimensionError("coefficient matrix does not match the group structure");
    const double* b = beta.data();
    double total = 0.0;
    for (const auto& g : structure.groups) {
        // Accumulate suffix sums of squares from the innermost level out.
        double tail = 0.0;
        int end = g.size();
        for (int p = g.chain.levels() - 1; p >= 0; --p) {
            for (int i = g.chain.level_start[p]; i < end; ++i) tail += b[g.linear[i]] * b[g.linear[i]];
            end = g.chain.level_start[p];
            total += g.chain.weight[p] * std::sqrt(tail);
        }
    }
    return total;
}

void hier_prox_inplace(std::span<double> z, double threshold, const NestedChain& chain) {
    const std::size_t n = z.size();
    for (int p = chain.levels() - 1; p >= 0; --p) {
        const std::size_t start = chain.level_start[p];
        double ss = 0.0;
        for (std::size_t i = start; i < n; ++i) ss += z[i] * z[i];
        const double norm = std::sqrt(ss);
        const double t = threshold * chain.weight[p];
        if (norm <= t) {
            std::fill(z.begin() + start, z.end(), 0.0);
        } else {
            const double scale = 1.0 - t / norm;
            for (std::size_t i = start; i < n; ++i) z[i] *= scale;
        }
    }
}

std::vector<double> hier_prox(std::span<const double> z, double threshold, const NestedChain& chain) {
    std::vector<double> out(z.begin(), z.end());
    hier_prox_inplace(out, threshold, chain);
    return out;
}

double group_zero_threshold(std::span<const double> u, const NestedChain& chain) {
    double norm = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
    if (norm == 0.0) return 0.0;
    std::vector<double> work(u.size());
    auto zeroes = [&](double t) {
        std::copy(u.begin(), u.end(), work.begin());
        hier_prox_inplace(work, t, chain);
        return std::all_of(work.begin(), work.end(), [](double v) { return v == 0.0; });
    };
    // Shrinking never increases the outer norm, so ||u|| / w_1 is always enough.
    double lo = 0.0, hi = norm / chain.weight[0];
    while (!zeroes(hi)) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        if (zeroes(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

LossModel::LossModel(const RegressionProblem& problem) {
    if (problem.y.rows() != problem.z.rows() || problem.y.cols() != problem.z.cols())
        throw DimensionError("Y and Z must both be N x K");
    szz_ = problem.z.transpose() * problem.z;
    syz_ = problem.y.transpose() * problem.z;
    syy_ = problem.y.transpose() * problem.y;
    double wmax = 1.0;
    if (problem.channel_mix) {
        const auto& a = *problem.channel_mix;
        if (a.rows() != szz_.rows() || a.cols() != szz_.rows()) throw DimensionError("channel mix must be K x K");
        w_ = a.transpose() * a;
        wsyz_ = *w_ * syz_;
        wmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(*w_, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    } else {
        wsyz_ = syz_;
    }
    const double zmax =
        szz_.size() == 0 ? 0.0
                         : Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(szz_, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    lipschitz_ = wmax * zmax;
}

double LossModel::value(const Eigen::MatrixXd& beta) const {
    const Eigen::MatrixXd bs = beta * szz_;
    if (!w_) return 0.5 * (syy_.trace() - 2.0 * syz_.cwiseProduct(beta).sum() + bs.cwiseProduct(beta).sum());
    // R'R = Syy - Syz B' - B Syz' + B Szz B'
    const Eigen::MatrixXd cross = syz_ * beta.transpose();
    const Eigen::MatrixXd rr = syy_ - cross - cross.transpose() + bs * beta.transpose();
    return 0.5 * w_->cwiseProduct(rr).sum();
}

Eigen::MatrixXd LossModel::gradient(const Eigen::MatrixXd& beta) const {
    Eigen::MatrixXd g = beta * szz_ - syz_;
    if (w_) g = *w_ * g;
    return g;
}

double objective(const LossModel& loss, const NestedGroupStructure& structure, double lambda,
                 const Eigen::MatrixXd& beta) {
    return loss.value(beta) + lambda * evaluate_penalty(beta, structure);
}

double objective(const RegressionProblem& problem, const NestedGroupStructure& structure, double lambda,
                 const Eigen::MatrixXd& beta) {
    return objective(LossModel(problem), structure, lambda, beta);
}

LambdaMax compute_lambda_max(const LossModel& loss, const NestedGroupStructure& structure) {
    if (structure.dimension != loss.dimension()) throw DimensionError("structure does not match the problem");
    const Eigen::MatrixXd& u = loss.weighted_cross();
    const double* data = u.data();
    double best = 0.0;
    std::vector<double> slice;
    for (const auto& g : structure.groups) {
        slice.resize(g.size());
        for (int i = 0; i < g.size(); ++i) slice[i] = data[g.linear[i]];
        best = std::max(best, group_zero_threshold(slice, g.chain));
    }
    if (best == 0.0) return {std::numeric_limits<double>::min(), true};
    // Margin so that rounding in the scaled prox step keeps the fit exactly zero.
    return {best * (1.0 + 1e-12), false};
}

LambdaMax compute_lambda_max(const RegressionProblem& problem, const NestedGroupStructure& structure) {
    if (problem.y.isZero(0.0) || problem.z.isZero(0.0))
        throw DegenerateError("lambda_max undefined: response or regressors are identically zero");
    return compute_lambda_max(LossModel(problem), structure);
}

std::vector<double> lambda_grid(double lambda_max, int length, double ratio) {
    if (length < 1) throw ConfigError("grid length must be >= 1");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("grid ratio must lie in (0, 1)");
    std::vector<double> grid(length);
    grid[0] = lambda_max;
    for (int k = 1; k < length; ++k)
        grid[k] = lambda_max * std::pow(ratio, static_cast<double>(k) / (length - 1));
    return grid;
}

FitResult fit(const LossModel& loss, const NestedGroupStructure& structure, double lambda,
              const Eigen::MatrixXd& warm_start, const SolverConfig& config) {
    config.validate();
    const int K = loss.dimension();
    if (structure.dimension != K) throw DimensionError("structure does not match the problem");
    if (warm_start.rows() != K || warm_start.cols() != K) throw DimensionError("warm start must be K x K");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    if (!(loss.lipschitz() > 0.0)) throw DegenerateError("regressor matrix is identically zero");

    const double step = 1.0 / loss.lipschitz();
    const double thresh = step * lambda;
    const Eigen::MatrixXd& szz = loss.gram();
    const Eigen::MatrixXd& wsyz = loss.weighted_cross();
    const auto& weight = loss.weight();

    Eigen::MatrixXd prev2 = warm_start;  // beta[r-2]
    Eigen::MatrixXd prev = warm_start;   // beta[r-1]
    Eigen::MatrixXd cur = warm_start;
    double obj_prev = objective(loss, structure, lambda, prev);

    int max_block = 0;
    for (const auto& g : structure.groups) max_block = std::max(max_block, g.size());
    std::vector<double> grad_buf(max_block), z(max_block), mixed_buf;
    if (weight) mixed_buf.resize(static_cast<std::size_t>(K) * K);

    FitResult res;
    int r = 3;  // momentum counter, reset on restart
    for (int iter = 1; iter <= config.max_iter; ++iter) {
        const double mom = static_cast<double>(r - 2) / (r + 1);
        cur = prev;
        double* cb = cur.data();
        const double* pb = prev.data();
        const double* p2 = prev2.data();

        for (std::size_t gi = 0; gi < structure.groups.size(); ++gi) {
            const auto& g = structure.groups[gi];
            const auto& blk = g.block;
            for (int i = 0; i < g.size(); ++i) {
                const int li = g.linear[i];
                cb[li] = pb[li] + mom * (pb[li] - p2[li]);
            }
            Eigen::Map<Eigen::MatrixXd> grad(grad_buf.data(), blk.rows, blk.cols);
            if (weight) {
                Eigen::Map<Eigen::MatrixXd> mixed(mixed_buf.data(), blk.rows, K);
                mixed.noalias() = weight->middleRows(blk.row0, blk.rows) * cur;
                grad.noalias() = mixed * szz.middleCols(blk.col0, blk.cols);
            } else {
                grad.noalias() = cur.middleRows(blk.row0, blk.rows) * szz.middleCols(blk.col0, blk.cols);
            }
            grad -= wsyz.block(blk.row0, blk.col0, blk.rows, blk.cols);

            for (int i = 0; i < g.size(); ++i) z[i] = cb[g.linear[i]] - step * grad_buf[g.local[i]];
            hier_prox_inplace(std::span<double>(z.data(), g.size()), thresh, g.chain);
            for (int i = 0; i < g.size(); ++i) {
                if (!std::isfinite(z[i]))
                    throw DivergenceError("non-finite coefficient at iteration " + std::to_string(iter) + ", group " +
                                          std::to_string(gi));
                cb[g.linear[i]] = z[i];
            }
        }

        const double obj = objective(loss, structure, lambda, cur);
        if (!std::isfinite(obj)) throw DivergenceError("non-finite objective at iteration " + std::to_string(iter));
        res.diagnostics.iterations = iter;
        if (obj > obj_prev + 1e-10 * std::max(1.0, std::abs(obj_prev)) && mom > 0.0) {
            // Reject the extrapolated sweep and restart the momentum sequence.
            prev2 = prev;
            r = 3;
            ++res.diagnostics.restarts;
            continue;
        }
        const double change = (cur - prev).cwiseAbs().maxCoeff();
        prev2 = std::move(prev);
        prev = cur;
        obj_prev = obj;
        ++r;
        if (change <= config.epsilon) {
            res.diagnostics.converged = true;
            break;
        }
    }
    res.coef = std::move(prev);
    res.diagnostics.objective = obj_prev;
    return res;
}

FitResult fit(const RegressionProblem& problem, const NestedGroupStructure& structure, double lambda,
              const Eigen::MatrixXd& warm_start, const SolverConfig& config) {
    return fit(LossModel(problem), structure, lambda, warm_start, config);
}

int HierFit::total_iterations() const {
    int total = 0;
    for (const auto& d : diagnostics) total += d.iterations;
    return total;
}

namespace {

HierFit run_path(const LossModel& loss, const NestedGroupStructure& structure, const SolverConfig& config,
                 bool warm) {
    config.validate();
    HierFit path;
    path.lambda_max = compute_lambda_max(loss, structure);
    path.lambdas = lambda_grid(path.lambda_max.value, config.grid_len, config.grid_ratio);
    const int K = loss.dimension();
    Eigen::MatrixXd start = Eigen::MatrixXd::Zero(K, K);
    for (double lambda : path.lambdas) {
        FitResult f = fit(loss, structure, lambda, start, config);
        if (warm) start = f.coef;
        path.coefs.push_back(std::move(f.coef));
        path.diagnostics.push_back(f.diagnostics);
    }
    return path;
}

}  // namespace

HierFit fit_path(const LossModel& loss, const NestedGroupStructure& structure, const SolverConfig& config) {
    return run_path(loss, structure, config, true);
}

HierFit fit_path(const RegressionProblem& problem, const NestedGroupStructure& structure,
                 const SolverConfig& config) {
    if (problem.y.isZero(0.0) || problem.z.isZero(0.0))
        throw DegenerateError("cannot fit a path: response or regressors are identically zero");
    return run_path(LossModel(problem), structure, config, true);
}

HierFit fit_path_cold(const RegressionProblem& problem, const NestedGroupStructure& structure,
                      const SolverConfig& config) {
    return run_path(LossModel(problem), structure, config, false);
}

bool satisfies_hierarchy(const Eigen::MatrixXd& beta, const NestedGroupStructure& structure) {
    const double* b = beta.data();
    for (const auto& g : structure.groups) {
        bool zero_seen = false;
        for (int p = 0; p < g.chain.levels(); ++p) {
            const int begin = g.chain.level_start[p];
            const int end = p + 1 < g.chain.levels() ? g.chain.level_start[p + 1] : g.size();
            bool ring_zero = true;
            for (int i = begin; i < end; ++i) ring_zero = ring_zero && b[g.linear[i]] == 0.0;
            if (zero_seen && !ring_zero) return false;
            zero_seen = zero_seen || ring_zero;
        }
    }
    return true;
}

}  // namespace mfhier
