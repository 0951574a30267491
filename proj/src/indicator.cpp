#include "mfhier/indicator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>
#include "json.hpp"

#include "mfhier/errors.hpp"

namespace mfhier {

std::vector<int> NowcastSelection::columns() const {
    std::vector<int> out;
    for (const auto& e : entries) out.push_back(e.column);
    return out;
}

NowcastSelection select_nowcasters(const SparseCovEstimate& cov, const StackedPanel& panel, int target_column) {
    const Eigen::MatrixXd& s = cov.regularized;
    if (s.rows() != panel.cols()) throw DimensionError("covariance does not match the panel");
    if (target_column < 0 || target_column >= panel.cols()) throw ConfigError("target column out of range");
    if (panel.columns[target_column].within_index != 0)
        throw ConfigError("nowcast target must be a low-frequency column");
    NowcastSelection sel;
    sel.target_column = target_column;
    sel.lambda_sigma = cov.lambda_sigma;
    for (int c = 0; c < panel.cols(); ++c) {
        if (panel.columns[c].within_index == 0) continue;
        if (s(target_column, c) != 0.0)
            sel.entries.push_back({panel.columns[c].series_id, panel.columns[c].within_index, c, s(target_column, c)});
    }
    return sel;
}

namespace {

Eigen::VectorXd standardized(const Eigen::VectorXd& x, const std::string& what) {
    const Eigen::Index n = x.size();
    if (n < 2) throw InsufficientDataError("need at least two observations for " + what);
    const double mean = x.mean();
    const double sd = std::sqrt((x.array() - mean).square().sum() / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw DegenerateError("zero variance in " + what);
    return (x.array() - mean) / sd;
}

}  // namespace

double indicator_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw DimensionError("correlation of series with different lengths");
    if (a.size() < 2) throw InsufficientDataError("correlation needs at least two observations");
    const Eigen::ArrayXd da = a.array() - a.mean();
    const Eigen::ArrayXd db = b.array() - b.mean();
    const double den = std::sqrt((da * da).sum() * (db * db).sum());
    if (!(den > 0.0)) throw DegenerateError("correlation with a constant series");
    return std::clamp((da * db).sum() / den, -1.0, 1.0);
}

Indicator coincident_indicator(const StackedPanel& panel, const std::vector<int>& columns, int target_column) {
    if (columns.empty()) throw ValidationError("empty nowcast selection: no indicator can be built");
    const Eigen::Index T = panel.rows();
    Eigen::MatrixXd x(T, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t i = 0; i < columns.size(); ++i) {
        const int c = columns[i];
        if (c < 0 || c >= panel.cols()) throw DimensionError("selected column out of range");
        x.col(static_cast<Eigen::Index>(i)) = standardized(panel.data.col(c), panel.columns[c].name());
    }
    const Eigen::MatrixXd corr = x.transpose() * x / static_cast<double>(T - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
    const Eigen::Index top = corr.rows() - 1;  // eigenvalues ascend
    Indicator ind;
    ind.loadings = es.eigenvectors().col(top);
    ind.explained = es.eigenvalues()(top) / corr.trace();
    // Deterministic sign before orienting against the target.
    Eigen::Index arg = 0;
    ind.loadings.cwiseAbs().maxCoeff(&arg);
    if (ind.loadings(arg) < 0.0) ind.loadings = -ind.loadings;
    ind.values = standardized(x * ind.loadings, "the indicator");
    const double rho = indicator_correlation(ind.values, panel.data.col(target_column));
    if (rho < 0.0) {
        ind.values = -ind.values;
        ind.loadings = -ind.loadings;
    }
    return ind;
}

Indicator coincident_indicator(const StackedPanel& panel, const NowcastSelection& selection) {
    return coincident_indicator(panel, selection.columns(), selection.target_column);
}

ReleaseSchedule parse_release_schedule(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("release schedule is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("events") || !j["events"].is_array())
        throw ConfigError("release schedule needs an 'events' array");
    ReleaseSchedule s;
    for (const auto& ev : j["events"]) {
        ReleaseEvent e;
        e.label = ev.value("label", "event " + std::to_string(s.events.size() + 1));
        if (!ev.contains("members") || !ev["members"].is_array())
            throw ConfigError("release event '" + e.label + "' needs a 'members' array");
        for (const auto& m : ev["members"]) {
            if (m.is_array() && m.size() == 2 && m[0].is_string() && m[1].is_number_integer())
                e.members.emplace_back(m[0].get<std::string>(), m[1].get<int>());
            else if (m.is_object() && m.contains("id") && m.contains("period"))
                e.members.emplace_back(m["id"].get<std::string>(), m["period"].get<int>());
            else
                throw ConfigError("release event '" + e.label + "': members are [id, period] pairs");
        }
        s.events.push_back(std::move(e));
    }
    if (s.events.empty()) throw ConfigError("release schedule has no events");
    return s;
}

ReleaseSchedule read_release_schedule(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open release schedule '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_release_schedule(ss.str());
}

std::vector<ReleasePoint> release_path(const StackedPanel& panel, const NowcastSelection& selection,
                                       const ReleaseSchedule& schedule) {
    if (selection.empty()) throw ValidationError("empty nowcast selection: no release path");
    std::set<std::pair<std::string, int>> covered;
    for (const auto& ev : schedule.events)
        for (const auto& m : ev.members) covered.insert(m);
    for (const auto& e : selection.entries)
        if (!covered.count({e.series_id, e.within_index}))
            throw ValidationError("release schedule does not cover " + e.series_id + " j=" +
                                  std::to_string(e.within_index));

    const Eigen::VectorXd target = panel.data.col(selection.target_column);
    std::set<std::pair<std::string, int>> released;
    std::vector<ReleasePoint> out;
    for (const auto& ev : schedule.events) {
        for (const auto& m : ev.members) released.insert(m);
        // Keep the selection's column order so the last event repeats the full computation.
        std::vector<int> cols;
        for (const auto& e : selection.entries)
            if (released.count({e.series_id, e.within_index})) cols.push_back(e.column);
        ReleasePoint p;
        p.label = ev.label;
        p.released = static_cast<int>(cols.size());
        if (cols.empty()) {
            p.skipped = true;
            p.correlation = std::numeric_limits<double>::quiet_NaN();
        } else {
            p.correlation =
                indicator_correlation(coincident_indicator(panel, cols, selection.target_column).values, target);
        }
        out.push_back(std::move(p));
    }
    return out;
}

TuneResult tune_indicator(const StackedPanel& panel, const NestedGroupStructure& structure,
                          const SolverConfig& solver, const CovConfig& cov, int target_column, int sigma_grid_len,
                          double sigma_grid_ratio, const ExecPolicy& exec) {
    if (sigma_grid_len < 1) throw ConfigError("sigma grid must be non-empty");
    const RegressionProblem problem = build_problem(panel);
    const HierFit path = fit_path(problem, structure, solver);
    const BlockMask mask = build_mask(panel.scheme);
    const Eigen::VectorXd target = panel.data.col(target_column);

    TuneResult res;
    res.lambda_beta = path.lambdas;
    const int nb = path.size();
    std::vector<Eigen::MatrixXd> samples(nb);
    for (int b = 0; b < nb; ++b) {
        samples[b] = sample_cov(residuals(problem, path.coefs[b]));
        res.lambda_sigma.push_back(lambda_sigma_grid(samples[b], mask, sigma_grid_len, sigma_grid_ratio));
    }
    const int ns = sigma_grid_len;

    struct Cell {
        NowcastSelection selection;
        double correlation = -std::numeric_limits<double>::infinity();
    };
    const auto cells = map_indices<Cell>(
        nb * ns,
        [&](int i) {
            const int b = i / ns, s = i % ns;
            Cell cell;
            if (s >= static_cast<int>(res.lambda_sigma[b].size())) return cell;
            const SparseCovEstimate est = sparse_cov(samples[b], res.lambda_sigma[b][s], mask, cov);
            cell.selection = select_nowcasters(est, panel, target_column);
            cell.selection.lambda_beta = path.lambdas[b];
            if (!cell.selection.empty())
                cell.correlation = indicator_correlation(coincident_indicator(panel, cell.selection).values, target);
            return cell;
        },
        exec);

    res.correlations.resize(nb, ns);
    res.sizes.resize(nb, ns);
    double top = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < nb * ns; ++i) {
        res.correlations(i / ns, i % ns) = cells[i].correlation;
        res.sizes(i / ns, i % ns) = static_cast<int>(cells[i].selection.entries.size());
        top = std::max(top, cells[i].correlation);
    }
    if (!std::isfinite(top)) {
        // No couple selects anything: return the empty selection of the first cell.
        res.selection = cells[0].selection;
        res.correlation = std::numeric_limits<double>::quiet_NaN();
        return res;
    }
    int best = -1;
    for (int i = 0; i < nb * ns; ++i) {
        if (!(cells[i].correlation >= top - 1e-6)) continue;
        if (best < 0 || cells[i].selection.entries.size() < cells[best].selection.entries.size()) best = i;
    }
    res.beta_index = best / ns;
    res.sigma_index = best % ns;
    res.selection = cells[best].selection;
    res.correlation = cells[best].correlation;
    return res;
}

Indicator all_variables_indicator(const StackedPanel& panel, int target_column) {
    std::vector<int> cols;
    for (int c = 0; c < panel.cols(); ++c)
        if (panel.columns[c].within_index != 0) cols.push_back(c);
    return coincident_indicator(panel, cols, target_column);
}

}  // namespace mfhier
