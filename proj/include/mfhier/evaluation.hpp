#pragma once

// Simulation of MF-VAR data, estimation / selection / forecast metrics,
// benchmark estimators, rolling-window cross-validation and the three
// simulation designs.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mfhier/hier_penalty.hpp"
#include "mfhier/mf_data.hpp"
#include "mfhier/parallel.hpp"
#include "mfhier/prox_solver.hpp"
#include "mfhier/sparse_cov.hpp"

namespace mfhier {

// ---------------------------------------------------------------------------
// Simulation

struct SimConfig {
    FrequencyScheme scheme;
    Eigen::MatrixXd b_true;
    Eigen::MatrixXd sigma_true;
    int length = 125;  // T
    int burnin = 300;
    int reps = 100;
    std::uint64_t seed = 1;
    double sparsify_cut = 0.0;  // |b| < cut is set to zero before simulating

    void validate() const;
    /// b_true after the sparsify cut.
    Eigen::MatrixXd effective_b() const;
};

double spectral_radius(const Eigen::MatrixXd& b);

/// Draws burnin + T steps of y_t = B y_{t-1} + u_t, u_t ~ N(0, Sigma), from
/// y_0 = 0 and keeps the last T. Deterministic in (seed, rep).
StackedPanel simulate_var(const SimConfig& config, int rep);

// ---------------------------------------------------------------------------
// Metrics

struct SelectionMetrics {
    double mse = 0.0;
    double fpr = 0.0;  // FP / #(truly nonzero), FP = truly nonzero but estimated zero
    double fnr = 0.0;  // FN / #(truly zero),    FN = truly zero but estimated nonzero
    double mcc = 0.0;
};

struct ConfusionCounts {
    long tp = 0, tn = 0, fp = 0, fn = 0;
};

/// Cell-wise counts with nonzero as the positive class, FP/FN named as above.
ConfusionCounts confusion(const Eigen::Ref<const Eigen::MatrixXd>& estimate,
                          const Eigen::Ref<const Eigen::MatrixXd>& truth);
/// 0 when any factor of the denominator is 0.
double mcc(const ConfusionCounts& c);
SelectionMetrics selection_metrics(const Eigen::Ref<const Eigen::MatrixXd>& estimate,
                                   const Eigen::Ref<const Eigen::MatrixXd>& truth);

/// (1/R) sum_r (1/K^2) ||B_hat_r - B||_F^2
double mse(std::span<const Eigen::MatrixXd> estimates, const Eigen::MatrixXd& truth);

/// Per-series mean squared forecast error over the rows (reps or windows).
Eigen::VectorXd msfe(const Eigen::MatrixXd& forecasts, const Eigen::MatrixXd& actuals);
/// Mean over the listed series of the per-series MSFE.
double msfe(const Eigen::MatrixXd& forecasts, const Eigen::MatrixXd& actuals, std::span<const int> series);

struct Summary {
    double mean = 0.0;
    double se = 0.0;  // sample sd / sqrt(n)
};
Summary summarize(std::span<const double> values);

// ---------------------------------------------------------------------------
// Forecasts and benchmark estimators

/// B_hat * last_row in standardized space.
Eigen::VectorXd forecast_one_step(const Eigen::MatrixXd& coef, const Eigen::VectorXd& last_row);

struct BaselineForecast {
    double random_walk = 0.0;
    double ar1 = 0.0;
    double ar1_slope = 0.0;
};

/// RW: last value. AR(1): no-intercept least squares on (lag, value) pairs.
BaselineForecast baseline_forecasts(std::span<const double> history);

/// Per-equation normal equations, B = Y'Z (Z'Z)^{-1}; needs N >= K.
Eigen::MatrixXd fit_ols(const RegressionProblem& problem);
/// B = Y'Z (Z'Z + lambda I)^{-1}
Eigen::MatrixXd fit_ridge(const RegressionProblem& problem, double lambda);
/// 10 log-spaced points from 10 lambda_max(Z'Z) down to 1e-3 lambda_max(Z'Z).
std::vector<double> ridge_grid(const RegressionProblem& problem, int length = 10);
/// Lasso path: the hierarchical solver with 1x1 groups.
HierFit fit_lasso(const RegressionProblem& problem, const SolverConfig& config = {});

struct BenchmarkFits {
    Eigen::MatrixXd ols;  // empty when N < K
    std::vector<double> ridge_lambdas;
    std::vector<Eigen::MatrixXd> ridge;
    HierFit lasso;
};
BenchmarkFits benchmark_estimators(const RegressionProblem& problem, const SolverConfig& config = {});

// ---------------------------------------------------------------------------
// Rolling-window cross-validation

struct CvConfig {
    int window = 105;                // T1
    std::optional<int> target;       // score this series only; all K otherwise
    std::optional<int> last_origin;  // keep windows whose last in-sample row is <= this
    ExecPolicy exec;
};

struct CvWindow {
    int origin = 0;                // last in-sample row (0-based); the forecast is for origin + 1
    std::vector<double> lambdas;   // this window's own grid
    Eigen::MatrixXd forecasts;     // grid x K, original scale
    Eigen::VectorXd actual;        // row origin + 1
};

struct CvResult {
    std::vector<double> scores;  // per grid index: mean squared error over windows and scored series
    int selected = 0;            // argmin, smallest index on ties
    std::vector<CvWindow> windows;
};

/// Windows end at rows T1-1 .. T-2. Each standardizes and fits on its own
/// T1 rows only, forecasts the next row and destandardizes.
CvResult cv_rolling(const StackedPanel& panel, const NestedGroupStructure& structure,
                    const SolverConfig& solver, const CvConfig& config);

enum class ForecastSelection { PerWindow, Expanding };

struct ForecastConfig {
    int window = 105;
    int target = 0;
    ForecastSelection selection = ForecastSelection::PerWindow;
    bool include_ols = true;
    ExecPolicy exec;
};

struct ForecastTable {
    std::vector<std::string> methods;
    std::vector<int> origins;
    Eigen::MatrixXd forecasts;  // windows x methods, target series, original scale
    Eigen::VectorXd actual;     // windows
    std::vector<int> selected;  // grid index used by the hierarchical forecast per window

    Eigen::MatrixXd squared_errors() const;
    std::vector<Summary> msfe() const;
};

/// Rolling one-step forecasts of one series: hierarchical (lambda chosen per
/// window by its own target error, or by the mean error of earlier windows),
/// AR(1), RW and optionally OLS.
ForecastTable forecast_comparison(const StackedPanel& panel, const NestedGroupStructure& structure,
                                  const SolverConfig& solver, const ForecastConfig& config);

// ---------------------------------------------------------------------------
// Synthetic designs

enum class Estimator { Ols, Ridge, Lasso, Hierarchical };
std::string_view estimator_name(Estimator e);
inline constexpr Estimator all_estimators[] = {Estimator::Ols, Estimator::Ridge, Estimator::Lasso,
                                               Estimator::Hierarchical};

struct RecencyDgpOptions {
    double active_prob = 0.3;     // chance that a cross-variable group is nonzero
    double decay = 0.6;           // magnitude ratio between consecutive priority levels
    double target_radius = 0.7;   // spectral radius after rescaling
    double cut = 0.01;            // entries below this are zeroed after rescaling
};

/// Coefficients that follow the recency hierarchy: every active group is
/// nonzero exactly on its first q priority levels, q drawn per group. Own
/// lags are always active.
Eigen::MatrixXd make_recency_coefficients(const NestedGroupStructure& structure, std::uint64_t seed,
                                          const RecencyDgpOptions& options = {});

struct NowcastDgpOptions {
    double active_prob = 0.5;   // share of high-frequency cells covarying with the first series
    double min_corr = 0.2;
    double max_corr = 0.35;
    double within_corr = 0.3;   // correlation between adjacent periods of one variable
    double cut = 0.03;
};

/// Error covariance with unit variances, correlated within-variable blocks
/// and a planted sparse first row over the high-frequency columns.
Eigen::MatrixXd make_nowcast_covariance(const FrequencyScheme& scheme, std::uint64_t seed,
                                        const NowcastDgpOptions& options = {});

/// K = 22 analog of the empirical small system: 1 quarterly and 7 monthly series.
FrequencyScheme small_system_scheme();
SimConfig synthetic_config(const FrequencyScheme& scheme, std::uint64_t seed, int length, int reps);

/// Coefficients fitted on standardized data mapped back: D B_std D^{-1}.
Eigen::MatrixXd destandardize_coef(const Eigen::MatrixXd& coef_std, const Eigen::VectorXd& sd);

struct Design1Row {
    Estimator estimator = Estimator::Ols;
    std::vector<SelectionMetrics> best;            // per rep, at the MSE-minimizing grid point
    std::vector<int> best_index;                   // per rep
    std::vector<SelectionMetrics> grid_mean;       // per grid point, averaged over reps
};
struct Design1Report {
    int reps = 0;
    std::vector<Design1Row> rows;
};
Design1Report run_design1(const SimConfig& sim, const SolverConfig& solver, const ExecPolicy& exec = {});

struct Design2Row {
    Estimator estimator = Estimator::Ols;
    std::vector<SelectionMetrics> best;  // mse unused (NaN); first-row pattern metrics
    std::vector<std::pair<int, int>> best_cell;  // (beta index, sigma index) per rep
};
struct Design2Report {
    int reps = 0;
    std::vector<Design2Row> rows;
};
/// Covariance first-row recovery over a beta-grid x sigma-grid per rep; the
/// couple maximizing MCC is kept.
Design2Report run_design2(const SimConfig& sim, const SolverConfig& solver, const CovConfig& cov,
                          const ExecPolicy& exec = {}, int sigma_grid_len = 10, double sigma_grid_ratio = 0.01);

struct Design3Report {
    int reps = 0;
    Eigen::MatrixXd sq_err_plain;  // reps x K
    Eigen::MatrixXd sq_err_gls;    // reps x K
};
/// Fit on rows 1..T-1, forecast row T; plain hierarchical vs GLS refit.
Design3Report run_design3(const SimConfig& sim, const SolverConfig& solver, const CovConfig& cov,
                          const ExecPolicy& exec = {}, int sigma_grid_len = 10, double sigma_grid_ratio = 0.01);

/// First-row nonzero pattern of a covariance, restricted to penalized columns.
Eigen::VectorXd nowcast_row(const Eigen::MatrixXd& cov, const BlockMask& mask, int row = 0);

}  // namespace mfhier
