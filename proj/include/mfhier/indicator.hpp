#pragma once

// Nowcasting-variable selection from the sparse error covariance and the
// coincident indicator built from it.

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfhier/hier_penalty.hpp"
#include "mfhier/mf_data.hpp"
#include "mfhier/parallel.hpp"
#include "mfhier/prox_solver.hpp"
#include "mfhier/sparse_cov.hpp"

namespace mfhier {

struct NowcastEntry {
    std::string series_id;
    int within_index = 0;
    int column = 0;
    double covariance = 0.0;
};

struct NowcastSelection {
    std::vector<NowcastEntry> entries;
    int target_column = 0;
    double lambda_beta = 0.0;
    double lambda_sigma = 0.0;

    bool empty() const { return entries.empty(); }
    std::vector<int> columns() const;
};

/// High-frequency (variable, period) pairs whose covariance with the target's
/// row is nonzero in the regularized matrix.
NowcastSelection select_nowcasters(const SparseCovEstimate& cov, const StackedPanel& panel, int target_column);

struct Indicator {
    Eigen::VectorXd values;    // T, mean 0, variance 1
    Eigen::VectorXd loadings;  // on the standardized selected columns
    double explained = 0.0;    // share of the correlation matrix trace
};

/// First principal component of the correlation matrix of the selected
/// columns, standardized and oriented so that it correlates nonnegatively
/// with the target column.
Indicator coincident_indicator(const StackedPanel& panel, const NowcastSelection& selection);
Indicator coincident_indicator(const StackedPanel& panel, const std::vector<int>& columns, int target_column);

/// Pearson correlation.
double indicator_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct ReleaseEvent {
    std::string label;
    std::vector<std::pair<std::string, int>> members;  // (series id, within-period index)
};

struct ReleaseSchedule {
    std::vector<ReleaseEvent> events;
};

/// JSON: {"events": [{"label": "...", "members": [["PAYEMS", 1], ...]}, ...]}
ReleaseSchedule parse_release_schedule(const std::string& json_text);
ReleaseSchedule read_release_schedule(const std::string& path);

struct ReleasePoint {
    std::string label;
    bool skipped = false;   // nothing selected has been released yet
    int released = 0;       // selected pairs available after this event
    double correlation = 0.0;
};

/// Indicator correlation after each release, using the selected pairs
/// released so far. Throws if the schedule misses a selected pair.
std::vector<ReleasePoint> release_path(const StackedPanel& panel, const NowcastSelection& selection,
                                       const ReleaseSchedule& schedule);

struct TuneResult {
    int beta_index = 0;
    int sigma_index = 0;
    NowcastSelection selection;
    double correlation = 0.0;
    std::vector<double> lambda_beta;
    std::vector<std::vector<double>> lambda_sigma;  // per beta index
    Eigen::MatrixXd correlations;                   // beta x sigma, -inf for empty selections
    Eigen::MatrixXi sizes;                          // selected pairs per cell
};

/// Searches the lambda_beta x lambda_sigma grid for the couple maximizing the
/// indicator correlation; couples within 1e-6 of the best are broken by the
/// fewest selected pairs, then by grid order. `panel` is standardized. When
/// every couple selects nothing the result holds an empty selection and a NaN
/// correlation.
TuneResult tune_indicator(const StackedPanel& panel, const NestedGroupStructure& structure,
                          const SolverConfig& solver, const CovConfig& cov, int target_column,
                          int sigma_grid_len = 10, double sigma_grid_ratio = 0.01, const ExecPolicy& exec = {});

/// Baseline: PC1 over every high-frequency column.
Indicator all_variables_indicator(const StackedPanel& panel, int target_column);

}  // namespace mfhier
