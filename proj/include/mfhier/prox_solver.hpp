#pragma once

// Hierarchical group-lasso estimation of the lag-one MF-VAR by accelerated
// block proximal gradient with Gauss-Seidel sweeps over the groups.

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mfhier/hier_penalty.hpp"
#include "mfhier/mf_data.hpp"

namespace mfhier {

struct SolverConfig {
    double epsilon = 1e-4;  // stop when ||B[r] - B[r-1]||_inf <= epsilon
    int max_iter = 10000;
    int grid_len = 10;
    double grid_ratio = 0.01;  // lambda_min / lambda_max

    void validate() const;
};

/// Sum over groups and levels of w_p * ||beta restricted to s^(p)||_2.
double evaluate_penalty(const Eigen::MatrixXd& beta, const NestedGroupStructure& structure);

/// Proximal point of threshold * sum_p w_p ||x_{s^(p)}|| at z, with z given in
/// chain order. Soft-thresholds the subgroups from the innermost outwards.
std::vector<double> hier_prox(std::span<const double> z, double threshold, const NestedChain& chain);
void hier_prox_inplace(std::span<double> z, double threshold, const NestedChain& chain);

/// Smallest threshold for which hier_prox(u, threshold, chain) is all zero.
double group_zero_threshold(std::span<const double> u, const NestedChain& chain);

/// Gram-matrix form of 1/2 ||(Y - Z B') A'||_F^2 with W = A'A (W = I without
/// channel mixing). Gradient with respect to B is W (B Z'Z - Y'Z).
class LossModel {
public:
    explicit LossModel(const RegressionProblem& problem);

    int dimension() const { return static_cast<int>(szz_.rows()); }
    double value(const Eigen::MatrixXd& beta) const;
    Eigen::MatrixXd gradient(const Eigen::MatrixXd& beta) const;
    /// Largest eigenvalue of the loss Hessian, sigma_max(X*)^2.
    double lipschitz() const { return lipschitz_; }
    /// W Y'Z: the negated gradient at B = 0.
    const Eigen::MatrixXd& weighted_cross() const { return wsyz_; }
    const Eigen::MatrixXd& gram() const { return szz_; }
    const std::optional<Eigen::MatrixXd>& weight() const { return w_; }

private:
    Eigen::MatrixXd szz_, syz_, syy_, wsyz_;
    std::optional<Eigen::MatrixXd> w_;
    double lipschitz_ = 0.0;
};

double objective(const LossModel& loss, const NestedGroupStructure& structure, double lambda,
                 const Eigen::MatrixXd& beta);
double objective(const RegressionProblem& problem, const NestedGroupStructure& structure, double lambda,
                 const Eigen::MatrixXd& beta);

struct LambdaMax {
    double value = 0.0;
    bool degenerate = false;  // Z'Y = 0: value is the smallest positive double
};

/// Smallest lambda whose solution is B = 0: the largest per-group threshold
/// at which the nested prox zeroes the gradient block at B = 0.
LambdaMax compute_lambda_max(const RegressionProblem& problem, const NestedGroupStructure& structure);
LambdaMax compute_lambda_max(const LossModel& loss, const NestedGroupStructure& structure);

std::vector<double> lambda_grid(double lambda_max, int length, double ratio);

struct FitDiagnostics {
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    int restarts = 0;
};

struct FitResult {
    Eigen::MatrixXd coef;  // K x K, row i = equation of series i
    FitDiagnostics diagnostics;
};

FitResult fit(const RegressionProblem& problem, const NestedGroupStructure& structure, double lambda,
              const Eigen::MatrixXd& warm_start, const SolverConfig& config = {});
FitResult fit(const LossModel& loss, const NestedGroupStructure& structure, double lambda,
              const Eigen::MatrixXd& warm_start, const SolverConfig& config = {});

struct HierFit {
    std::vector<double> lambdas;  // decreasing
    std::vector<Eigen::MatrixXd> coefs;
    std::vector<FitDiagnostics> diagnostics;
    LambdaMax lambda_max;

    int size() const { return static_cast<int>(lambdas.size()); }
    int total_iterations() const;
};

/// Warm-started path over the log-spaced grid from lambda_max down to
/// lambda_max * grid_ratio, starting from B = 0.
HierFit fit_path(const RegressionProblem& problem, const NestedGroupStructure& structure,
                 const SolverConfig& config = {});
HierFit fit_path(const LossModel& loss, const NestedGroupStructure& structure, const SolverConfig& config = {});
/// Same grid, every fit started from zero; used to measure what warm starts buy.
HierFit fit_path_cold(const RegressionProblem& problem, const NestedGroupStructure& structure,
                      const SolverConfig& config = {});

/// True when zero at priority level p implies zero at all deeper levels, in every group.
bool satisfies_hierarchy(const Eigen::MatrixXd& beta, const NestedGroupStructure& structure);

}  // namespace mfhier
