#pragma once

// Sparse estimation of the MF-VAR error covariance and the GLS refit built on it.

#include <vector>

#include <Eigen/Dense>

#include "mfhier/mf_data.hpp"
#include "mfhier/prox_solver.hpp"

namespace mfhier {

using BlockMask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class CovMethod { SoftThreshold, Admm };

struct SparseCovEstimate {
    Eigen::MatrixXd sample;
    Eigen::MatrixXd regularized;
    double lambda_sigma = 0.0;
    double min_eig = 0.0;
    CovMethod method = CovMethod::SoftThreshold;
    int admm_iterations = 0;
};

struct CovConfig {
    double delta = 1e-4;  // positive-definiteness floor
    double rho = 1.0;     // ADMM penalty parameter
    int max_iter = 5000;
    double tol = 1e-6;    // primal and dual residual tolerance
};

/// (1 / (T - lag)) sum_t u_t u_t' over the N = T - lag residual rows.
Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& residuals);

/// Penalized entries: everything outside the low-frequency block and the
/// per-variable diagonal blocks of the high-frequency part.
BlockMask build_mask(const FrequencyScheme& scheme);

/// argmin_{Sigma >= delta I} 1/2 ||S - Sigma||_F^2 + lambda ||mask o Sigma||_1.
/// Soft-thresholding solves it when the result clears the floor; otherwise ADMM.
SparseCovEstimate sparse_cov(const Eigen::MatrixXd& sample, double lambda_sigma, const BlockMask& mask,
                             const CovConfig& config = {});

/// Objective of the covariance problem; exported for diagnostics and tests.
double sparse_cov_objective(const Eigen::MatrixXd& sample, const Eigen::MatrixXd& sigma, double lambda_sigma,
                            const BlockMask& mask);

/// Masked soft-thresholding alone (the unconstrained solution).
Eigen::MatrixXd soft_threshold_masked(const Eigen::MatrixXd& sample, double lambda_sigma, const BlockMask& mask);

/// Decreasing log-spaced grid anchored at the largest masked |entry|.
std::vector<double> lambda_sigma_grid(const Eigen::MatrixXd& sample, const BlockMask& mask, int length = 10,
                                      double ratio = 0.01);

/// Symmetric inverse square root by eigendecomposition; throws if min eig < delta.
Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& sigma, double delta = 1e-4);

/// GLS transform: Y* = Y A' with A = Sigma^{-1/2}; (Sigma (x) I_N)^{-1/2} is
/// applied through the K channels instead of as an NK x NK matrix.
RegressionProblem gls_transform(const RegressionProblem& problem, const SparseCovEstimate& cov,
                                double delta = 1e-4);

HierFit fit_gls(const RegressionProblem& problem, const NestedGroupStructure& structure,
                const SparseCovEstimate& cov, const SolverConfig& config = {});

/// Residuals Y - Z B' of a fitted coefficient matrix.
Eigen::MatrixXd residuals(const RegressionProblem& problem, const Eigen::MatrixXd& coef);

}  // namespace mfhier
