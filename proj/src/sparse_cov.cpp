#include "mfhier/sparse_cov.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "mfhier/errors.hpp"

namespace mfhier {

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& residuals) {
    if (residuals.rows() == 0) throw InsufficientDataError("sample covariance of zero residual rows");
    Eigen::MatrixXd s = residuals.transpose() * residuals / static_cast<double>(residuals.rows());
    return 0.5 * (s + s.transpose());
}

BlockMask build_mask(const FrequencyScheme& scheme) {
    const int K = scheme.dimension();
    BlockMask mask = BlockMask::Constant(K, K, true);
    const int kl = scheme.low_count();
    mask.topLeftCorner(kl, kl).setConstant(false);
    for (const auto& v : scheme.variables())
        if (v.component >= 0) mask.block(v.first_column, v.first_column, v.ratio, v.ratio).setConstant(false);
    return mask;
}

namespace {

double soft(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

void check_inputs(const Eigen::MatrixXd& sample, double lambda_sigma, const BlockMask& mask) {
    if (sample.rows() != sample.cols()) throw DimensionError("covariance must be square");
    if (mask.rows() != sample.rows() || mask.cols() != sample.cols()) throw DimensionError("mask size mismatch");
    if (!(lambda_sigma >= 0.0)) throw ConfigError("lambda_sigma must be non-negative");
    if (!sample.isApprox(sample.transpose(), 1e-12) && (sample - sample.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError("sample covariance is not symmetric");
}

}  // namespace

Eigen::MatrixXd soft_threshold_masked(const Eigen::MatrixXd& sample, double lambda_sigma, const BlockMask& mask) {
    Eigen::MatrixXd out = sample;
    for (Eigen::Index j = 0; j < sample.cols(); ++j)
        for (Eigen::Index i = 0; i < sample.rows(); ++i)
            if (mask(i, j)) out(i, j) = soft(sample(i, j), lambda_sigma);
    return out;
}

double sparse_cov_objective(const Eigen::MatrixXd& sample, const Eigen::MatrixXd& sigma, double lambda_sigma,
                            const BlockMask& mask) {
    double l1 = 0.0;
    for (Eigen::Index j = 0; j < sigma.cols(); ++j)
        for (Eigen::Index i = 0; i < sigma.rows(); ++i)
            if (mask(i, j)) l1 += std::abs(sigma(i, j));
    return 0.5 * (sample - sigma).squaredNorm() + lambda_sigma * l1;
}

SparseCovEstimate sparse_cov(const Eigen::MatrixXd& sample, double lambda_sigma, const BlockMask& mask,
                             const CovConfig& config) {
    check_inputs(sample, lambda_sigma, mask);
    SparseCovEstimate est;
    est.sample = sample;
    est.lambda_sigma = lambda_sigma;
    est.regularized = soft_threshold_masked(sample, lambda_sigma, mask);
    est.min_eig = min_eigenvalue(est.regularized);
    if (est.min_eig >= config.delta) return est;

    // ADMM on Sigma (loss + l1) and Theta (Theta >= delta I), scaled dual U.
    const Eigen::Index K = sample.rows();
    const double rho = config.rho;
    Eigen::MatrixXd theta = est.regularized;
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(theta);
        theta = es.eigenvectors() * es.eigenvalues().cwiseMax(config.delta).asDiagonal() *
                es.eigenvectors().transpose();
    }
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(K, K);
    Eigen::MatrixXd sigma(K, K);
    double primal = 0.0, dual = 0.0;
    for (int it = 1; it <= config.max_iter; ++it) {
        for (Eigen::Index j = 0; j < K; ++j) {
            for (Eigen::Index i = 0; i < K; ++i) {
                const double target = (sample(i, j) + rho * (theta(i, j) - u(i, j))) / (1.0 + rho);
                sigma(i, j) = mask(i, j) ? soft(target, lambda_sigma / (1.0 + rho)) : target;
            }
        }
        Eigen::MatrixXd v = sigma + u;
        v = 0.5 * (v + v.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v);
        Eigen::MatrixXd theta_new =
            es.eigenvectors() * es.eigenvalues().cwiseMax(config.delta).asDiagonal() * es.eigenvectors().transpose();
        theta_new = 0.5 * (theta_new + theta_new.transpose());
        u += sigma - theta_new;
        primal = (sigma - theta_new).norm();
        dual = rho * (theta_new - theta).norm();
        theta = std::move(theta_new);
        if (primal < config.tol && dual < config.tol) {
            // The sparse iterate is returned once it also clears the floor.
            const double me = min_eigenvalue(sigma);
            if (me >= config.delta - 1e-8) {
                est.regularized = sigma;
                est.min_eig = me;
                est.method = CovMethod::Admm;
                est.admm_iterations = it;
                return est;
            }
        }
    }
    throw ConvergenceError("ADMM did not converge in " + std::to_string(config.max_iter) +
                           " iterations (primal residual " + std::to_string(primal) + ", dual residual " +
                           std::to_string(dual) + ")");
}

std::vector<double> lambda_sigma_grid(const Eigen::MatrixXd& sample, const BlockMask& mask, int length,
                                      double ratio) {
    double top = 0.0;
    for (Eigen::Index j = 0; j < sample.cols(); ++j)
        for (Eigen::Index i = 0; i < sample.rows(); ++i)
            if (mask(i, j)) top = std::max(top, std::abs(sample(i, j)));
    if (top == 0.0) return std::vector<double>(1, 0.0);
    return lambda_grid(top, length, ratio);
}

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& sigma, double delta) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    const double me = es.eigenvalues().minCoeff();
    if (me < delta)
        throw NotPositiveDefiniteError("covariance minimum eigenvalue " + std::to_string(me) + " is below " +
                                       std::to_string(delta));
    Eigen::MatrixXd a = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                        es.eigenvectors().transpose();
    return 0.5 * (a + a.transpose());
}

RegressionProblem gls_transform(const RegressionProblem& problem, const SparseCovEstimate& cov, double delta) {
    const int K = problem.dimension();
    if (cov.regularized.rows() != K) throw DimensionError("covariance does not match the problem");
    if (problem.channel_mix) throw ValidationError("problem is already GLS-transformed");
    RegressionProblem out = problem;
    const Eigen::MatrixXd& s = cov.regularized;
    // A diagonal covariance gives an exactly diagonal inverse square root.
    Eigen::MatrixXd off = s;
    off.diagonal().setZero();
    if (off.isZero(0.0)) {
        if (s.diagonal().minCoeff() < delta)
            throw NotPositiveDefiniteError("covariance minimum eigenvalue is below " + std::to_string(delta));
        out.channel_mix = Eigen::MatrixXd(s.diagonal().cwiseSqrt().cwiseInverse().asDiagonal());
    } else {
        out.channel_mix = inverse_sqrt(s, delta);
    }
    return out;
}

HierFit fit_gls(const RegressionProblem& problem, const NestedGroupStructure& structure,
                const SparseCovEstimate& cov, const SolverConfig& config) {
    return fit_path(gls_transform(problem, cov), structure, config);
}

Eigen::MatrixXd residuals(const RegressionProblem& problem, const Eigen::MatrixXd& coef) {
    return problem.y - problem.z * coef.transpose();
}

}  // namespace mfhier
