#include "mfhier/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "mfhier/errors.hpp"

namespace mfhier {

ConfusionCounts confusion(const Eigen::Ref<const Eigen::MatrixXd>& estimate,
                          const Eigen::Ref<const Eigen::MatrixXd>& truth) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
        throw DimensionError("estimate and truth differ in shape");
    ConfusionCounts c;
    for (Eigen::Index j = 0; j < truth.cols(); ++j) {
        for (Eigen::Index i = 0; i < truth.rows(); ++i) {
            const bool t = truth(i, j) != 0.0;
            const bool e = estimate(i, j) != 0.0;
            if (t && e) ++c.tp;
            else if (!t && !e) ++c.tn;
            else if (t) ++c.fp;
            else ++c.fn;
        }
    }
    return c;
}

double mcc(const ConfusionCounts& c) {
    const double a = static_cast<double>(c.tp + c.fp), b = static_cast<double>(c.tp + c.fn);
    const double d = static_cast<double>(c.tn + c.fp), e = static_cast<double>(c.tn + c.fn);
    if (a == 0.0 || b == 0.0 || d == 0.0 || e == 0.0) return 0.0;
    const double num = static_cast<double>(c.tp) * c.tn - static_cast<double>(c.fp) * c.fn;
    return num / std::sqrt(a * b * d * e);
}

SelectionMetrics selection_metrics(const Eigen::Ref<const Eigen::MatrixXd>& estimate,
                                   const Eigen::Ref<const Eigen::MatrixXd>& truth) {
    const ConfusionCounts c = confusion(estimate, truth);
    SelectionMetrics m;
    m.mse = (estimate - truth).squaredNorm() / static_cast<double>(truth.size());
    const long nonzero = c.tp + c.fp, zero = c.tn + c.fn;
    m.fpr = nonzero ? static_cast<double>(c.fp) / nonzero : 0.0;
    m.fnr = zero ? static_cast<double>(c.fn) / zero : 0.0;
    m.mcc = mcc(c);
    return m;
}

double mse(std::span<const Eigen::MatrixXd> estimates, const Eigen::MatrixXd& truth) {
    if (estimates.empty()) throw ValidationError("mse needs at least one estimate");
    double total = 0.0;
    for (const auto& e : estimates) {
        if (e.rows() != truth.rows() || e.cols() != truth.cols())
            throw DimensionError("estimate and truth differ in shape");
        total += (e - truth).squaredNorm() / static_cast<double>(truth.size());
    }
    return total / static_cast<double>(estimates.size());
}

Eigen::VectorXd msfe(const Eigen::MatrixXd& forecasts, const Eigen::MatrixXd& actuals) {
    if (forecasts.rows() != actuals.rows() || forecasts.cols() != actuals.cols())
        throw DimensionError("forecasts and actuals differ in shape");
    if (forecasts.rows() == 0) throw ValidationError("msfe needs at least one forecast");
    return (forecasts - actuals).array().square().colwise().mean().transpose();
}

double msfe(const Eigen::MatrixXd& forecasts, const Eigen::MatrixXd& actuals, std::span<const int> series) {
    if (series.empty()) throw ValidationError("msfe needs at least one series");
    const Eigen::VectorXd per = msfe(forecasts, actuals);
    double total = 0.0;
    for (int s : series) {
        if (s < 0 || s >= per.size()) throw DimensionError("series index out of range");
        total += per(s);
    }
    return total / static_cast<double>(series.size());
}

Summary summarize(std::span<const double> values) {
    Summary s;
    if (values.empty()) return s;
    const double n = static_cast<double>(values.size());
    for (double v : values) s.mean += v;
    s.mean /= n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return s;
}

Eigen::VectorXd forecast_one_step(const Eigen::MatrixXd& coef, const Eigen::VectorXd& last_row) {
    if (coef.cols() != last_row.size()) throw DimensionError("coefficient matrix does not match the row");
    return coef * last_row;
}

BaselineForecast baseline_forecasts(std::span<const double> history) {
    if (history.empty()) throw InsufficientDataError("no history to forecast from");
    BaselineForecast f;
    f.random_walk = history.back();
    if (history.size() < 3) throw InsufficientDataError("AR(1) needs at least three observations");
    double num = 0.0, den = 0.0;
    for (std::size_t t = 1; t < history.size(); ++t) {
        num += history[t - 1] * history[t];
        den += history[t - 1] * history[t - 1];
    }
    f.ar1_slope = den > 0.0 ? num / den : 0.0;
    f.ar1 = f.ar1_slope * history.back();
    return f;
}

Eigen::MatrixXd fit_ols(const RegressionProblem& problem) {
    if (problem.samples() < problem.dimension())
        throw InsufficientDataError("OLS needs N >= K (N = " + std::to_string(problem.samples()) +
                                    ", K = " + std::to_string(problem.dimension()) + ")");
    const Eigen::MatrixXd szz = problem.z.transpose() * problem.z;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(szz);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0)
        throw DegenerateError("Z'Z is singular; OLS is not identified");
    const Eigen::MatrixXd syz = problem.transformed_response().transpose() * problem.z;
    // B Szz = Syz  <=>  Szz B' = Syz'
    return ldlt.solve(syz.transpose()).transpose();
}

Eigen::MatrixXd fit_ridge(const RegressionProblem& problem, double lambda) {
    if (!(lambda >= 0.0)) throw ConfigError("ridge lambda must be non-negative");
    Eigen::MatrixXd szz = problem.z.transpose() * problem.z;
    szz.diagonal().array() += lambda;
    const Eigen::MatrixXd syz = problem.transformed_response().transpose() * problem.z;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(szz);
    if (ldlt.info() != Eigen::Success) throw DegenerateError("ridge system is singular");
    return ldlt.solve(syz.transpose()).transpose();
}

std::vector<double> ridge_grid(const RegressionProblem& problem, int length) {
    const Eigen::MatrixXd szz = problem.z.transpose() * problem.z;
    const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(szz, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    if (!(top > 0.0)) throw DegenerateError("regressor matrix is identically zero");
    return lambda_grid(10.0 * top, length, 1e-4);
}

HierFit fit_lasso(const RegressionProblem& problem, const SolverConfig& config) {
    return fit_path(problem, NestedGroupStructure::singletons(problem.dimension()), config);
}

BenchmarkFits benchmark_estimators(const RegressionProblem& problem, const SolverConfig& config) {
    BenchmarkFits out;
    if (problem.samples() >= problem.dimension()) out.ols = fit_ols(problem);
    out.ridge_lambdas = ridge_grid(problem, config.grid_len);
    for (double l : out.ridge_lambdas) out.ridge.push_back(fit_ridge(problem, l));
    out.lasso = fit_lasso(problem, config);
    return out;
}

namespace {

CvWindow evaluate_window(const StackedPanel& panel, int origin, int window, const NestedGroupStructure& structure,
                         const SolverConfig& solver) {
    const RowRange range{origin - window + 1, origin + 1};
    const StandardizationStats stats = compute_stats(panel.data, range, &panel.columns);
    const Eigen::MatrixXd std_rows = stats.apply(panel.data.middleRows(range.begin, window));
    const HierFit path = fit_path(build_problem(std_rows), structure, solver);
    const Eigen::VectorXd last = std_rows.row(window - 1).transpose();

    CvWindow w;
    w.origin = origin;
    w.lambdas = path.lambdas;
    w.forecasts.resize(path.size(), panel.cols());
    for (int k = 0; k < path.size(); ++k)
        w.forecasts.row(k) = stats.invert_row(forecast_one_step(path.coefs[k], last)).transpose();
    w.actual = panel.data.row(origin + 1).transpose();
    return w;
}

std::vector<int> window_origins(int rows, int window, std::optional<int> last_origin) {
    if (window < 3) throw ConfigError("CV window must hold at least 3 rows");
    if (window >= rows)
        throw InsufficientDataError("CV window " + std::to_string(window) + " leaves no row to forecast in a panel of " +
                                    std::to_string(rows) + " rows");
    std::vector<int> origins;
    for (int t = window - 1; t <= rows - 2; ++t) {
        if (last_origin && t > *last_origin) break;
        origins.push_back(t);
    }
    if (origins.empty()) throw InsufficientDataError("no CV window ends at or before the requested origin");
    return origins;
}

}  // namespace

CvResult cv_rolling(const StackedPanel& panel, const NestedGroupStructure& structure, const SolverConfig& solver,
                    const CvConfig& config) {
    solver.validate();
    if (config.target && (*config.target < 0 || *config.target >= panel.cols()))
        throw ConfigError("CV target series out of range");
    const auto origins = window_origins(panel.rows(), config.window, config.last_origin);

    CvResult res;
    res.windows = map_indices<CvWindow>(
        static_cast<int>(origins.size()),
        [&](int i) { return evaluate_window(panel, origins[i], config.window, structure, solver); }, config.exec);

    const int grid = solver.grid_len;
    res.scores.assign(grid, 0.0);
    for (const auto& w : res.windows) {
        for (int k = 0; k < grid; ++k) {
            if (config.target) {
                const double e = w.forecasts(k, *config.target) - w.actual(*config.target);
                res.scores[k] += e * e;
            } else {
                res.scores[k] += (w.forecasts.row(k).transpose() - w.actual).squaredNorm() / panel.cols();
            }
        }
    }
    for (double& s : res.scores) s /= static_cast<double>(res.windows.size());
    res.selected = 0;
    for (int k = 1; k < grid; ++k)
        if (res.scores[k] < res.scores[res.selected]) res.selected = k;
    return res;
}

Eigen::MatrixXd ForecastTable::squared_errors() const {
    return (forecasts.colwise() - actual).array().square().matrix();
}

std::vector<Summary> ForecastTable::msfe() const {
    const Eigen::MatrixXd se = squared_errors();
    std::vector<Summary> out;
    for (Eigen::Index m = 0; m < se.cols(); ++m) {
        std::vector<double> v(se.col(m).data(), se.col(m).data() + se.rows());
        out.push_back(summarize(v));
    }
    return out;
}

ForecastTable forecast_comparison(const StackedPanel& panel, const NestedGroupStructure& structure,
                                  const SolverConfig& solver, const ForecastConfig& config) {
    if (config.target < 0 || config.target >= panel.cols()) throw ConfigError("forecast target out of range");
    CvConfig cv;
    cv.window = config.window;
    cv.target = config.target;
    cv.exec = config.exec;
    const CvResult res = cv_rolling(panel, structure, solver, cv);
    const int n = static_cast<int>(res.windows.size());
    const int tgt = config.target;

    ForecastTable table;
    table.methods = {"hierarchical", "ar1", "rw"};
    const bool ols = config.include_ols && config.window - 1 >= panel.cols();
    if (ols) table.methods.push_back("ols");
    table.forecasts.resize(n, static_cast<Eigen::Index>(table.methods.size()));
    table.actual.resize(n);

    Eigen::MatrixXd errors(n, solver.grid_len);  // target squared error per window and grid index
    for (int w = 0; w < n; ++w)
        for (int k = 0; k < solver.grid_len; ++k) {
            const double e = res.windows[w].forecasts(k, tgt) - res.windows[w].actual(tgt);
            errors(w, k) = e * e;
        }

    auto argmin = [](const Eigen::VectorXd& v) {
        int best = 0;
        for (int k = 1; k < v.size(); ++k)
            if (v(k) < v(best)) best = k;
        return best;
    };

    for (int w = 0; w < n; ++w) {
        const CvWindow& win = res.windows[w];
        table.origins.push_back(win.origin);
        table.actual(w) = win.actual(tgt);

        int k = 0;
        if (config.selection == ForecastSelection::PerWindow)
            k = argmin(errors.row(w).transpose());
        else if (w > 0)
            k = argmin(errors.topRows(w).colwise().mean().transpose());
        table.selected.push_back(k);
        table.forecasts(w, 0) = win.forecasts(k, tgt);

        const RowRange range{win.origin - config.window + 1, win.origin + 1};
        const StandardizationStats stats = compute_stats(panel.data, range, &panel.columns);
        const Eigen::MatrixXd std_rows = stats.apply(panel.data.middleRows(range.begin, config.window));
        std::vector<double> hist(config.window);
        for (int t = 0; t < config.window; ++t) hist[t] = std_rows(t, tgt);
        const BaselineForecast base = baseline_forecasts(hist);
        table.forecasts(w, 1) = base.ar1 * stats.sd(tgt) + stats.mean(tgt);
        table.forecasts(w, 2) = base.random_walk * stats.sd(tgt) + stats.mean(tgt);
        if (ols) {
            const Eigen::MatrixXd b = fit_ols(build_problem(std_rows));
            const Eigen::VectorXd f = forecast_one_step(b, std_rows.row(config.window - 1).transpose());
            table.forecasts(w, 3) = f(tgt) * stats.sd(tgt) + stats.mean(tgt);
        }
    }
    return table;
}

std::string_view estimator_name(Estimator e) {
    switch (e) {
        case Estimator::Ols: return "ols";
        case Estimator::Ridge: return "ridge";
        case Estimator::Lasso: return "lasso";
        case Estimator::Hierarchical: return "hierarchical";
    }
    return "?";
}

Eigen::MatrixXd destandardize_coef(const Eigen::MatrixXd& coef_std, const Eigen::VectorXd& sd) {
    return sd.asDiagonal() * coef_std * sd.cwiseInverse().asDiagonal();
}

Eigen::VectorXd nowcast_row(const Eigen::MatrixXd& cov, const BlockMask& mask, int row) {
    std::vector<double> vals;
    for (Eigen::Index c = 0; c < cov.cols(); ++c)
        if (mask(row, c)) vals.push_back(cov(row, c));
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace mfhier
