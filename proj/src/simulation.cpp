#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mfhier/errors.hpp"
#include "mfhier/evaluation.hpp"

namespace mfhier {

namespace {

std::mt19937_64 rep_stream(std::uint64_t seed, std::uint64_t rep, std::uint32_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32), tag};
    return std::mt19937_64(seq);
}

constexpr std::uint32_t kTagSimulate = 0x51u;
constexpr std::uint32_t kTagCoef = 0xB0u;
constexpr std::uint32_t kTagCov = 0xC0u;

}  // namespace

double spectral_radius(const Eigen::MatrixXd& b) {
    if (b.size() == 0) return 0.0;
    return Eigen::EigenSolver<Eigen::MatrixXd>(b, false).eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd SimConfig::effective_b() const {
    if (sparsify_cut <= 0.0) return b_true;
    return b_true.unaryExpr([c = sparsify_cut](double v) { return std::abs(v) < c ? 0.0 : v; });
}

void SimConfig::validate() const {
    const Eigen::Index K = b_true.rows();
    if (K == 0 || b_true.cols() != K) throw DimensionError("B_true must be square and non-empty");
    if (sigma_true.rows() != K || sigma_true.cols() != K) throw DimensionError("Sigma_true must match B_true");
    if (scheme.dimension() != 0 && scheme.dimension() != K)
        throw DimensionError("scheme dimension does not match B_true");
    if ((sigma_true - sigma_true.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError("Sigma_true is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(sigma_true);
    if (llt.info() != Eigen::Success) throw NotPositiveDefiniteError("Sigma_true is not positive definite");
    const double rho = spectral_radius(effective_b());
    if (!(rho < 1.0)) throw ValidationError("B_true is not stable (spectral radius " + std::to_string(rho) + ")");
    if (length < 2) throw ConfigError("simulation length must be >= 2");
    if (burnin < 0) throw ConfigError("burn-in must be non-negative");
    if (reps < 1) throw ConfigError("reps must be >= 1");
}

StackedPanel simulate_var(const SimConfig& config, int rep) {
    config.validate();
    const Eigen::Index K = config.b_true.rows();
    const Eigen::MatrixXd b = config.effective_b();
    const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(config.sigma_true).matrixL();
    auto rng = rep_stream(config.seed, static_cast<std::uint64_t>(rep), kTagSimulate);
    std::normal_distribution<double> normal(0.0, 1.0);

    Eigen::MatrixXd data(config.length, K);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(K), e(K);
    for (int t = 0; t < config.burnin + config.length; ++t) {
        for (Eigen::Index k = 0; k < K; ++k) e(k) = normal(rng);
        y = b * y + l * e;
        if (t >= config.burnin) data.row(t - config.burnin) = y.transpose();
    }
    const FrequencyScheme scheme =
        config.scheme.dimension() != 0 ? config.scheme : FrequencyScheme(static_cast<int>(K), {});
    return make_panel(scheme, std::move(data));
}

Eigen::MatrixXd make_recency_coefficients(const NestedGroupStructure& structure, std::uint64_t seed,
                                          const RecencyDgpOptions& options) {
    const int K = structure.dimension;
    auto rng = rep_stream(seed, 0, kTagCoef);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(K, K);
    double* cells = b.data();
    for (const auto& g : structure.groups) {
        const bool own = g.block.dependent == g.block.regressor;
        const bool active = own || unit(rng) < options.active_prob;
        const int levels = g.chain.levels();
        const int depth = 1 + std::min(levels - 1, static_cast<int>(unit(rng) * levels));
        const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        if (!active) continue;
        for (int i = 0; i < g.size(); ++i) {
            if (g.priority[i] > depth) continue;
            const double mag = 0.3 + 0.7 * unit(rng);
            cells[g.linear[i]] = sign * mag * std::pow(options.decay, g.priority[i] - 1);
        }
    }
    const double rho = spectral_radius(b);
    if (rho > 0.0) b *= options.target_radius / rho;
    b = b.unaryExpr([c = options.cut](double v) { return std::abs(v) < c ? 0.0 : v; });
    return b;
}

Eigen::MatrixXd make_nowcast_covariance(const FrequencyScheme& scheme, std::uint64_t seed,
                                        const NowcastDgpOptions& options) {
    const int K = scheme.dimension();
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(K, K);
    for (const auto& v : scheme.variables()) {
        if (v.component < 0) continue;
        for (int i = 0; i < v.ratio; ++i)
            for (int j = 0; j < v.ratio; ++j)
                s(v.first_column + i, v.first_column + j) = std::pow(options.within_corr, std::abs(i - j));
    }
    const BlockMask mask = build_mask(scheme);
    auto rng = rep_stream(seed, 0, kTagCov);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd planted = Eigen::VectorXd::Zero(K);
    for (int c = 0; c < K; ++c) {
        const bool on = unit(rng) < options.active_prob;
        const double mag = options.min_corr + (options.max_corr - options.min_corr) * unit(rng);
        const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        if (mask(0, c) && on) planted(c) = sign * mag;
    }
    // Shrink the planted row until the matrix is comfortably positive definite.
    for (int it = 0; it < 200; ++it) {
        Eigen::MatrixXd trial = s;
        trial.row(0) += planted.transpose();
        trial.col(0) += planted;
        const double me = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(trial, Eigen::EigenvaluesOnly)
                              .eigenvalues()
                              .minCoeff();
        if (me >= 0.05) break;
        planted *= 0.95;
    }
    for (int c = 0; c < K; ++c)
        if (std::abs(planted(c)) < options.cut) planted(c) = 0.0;
    s.row(0) += planted.transpose();
    s.col(0) += planted;
    return s;
}

FrequencyScheme small_system_scheme() { return FrequencyScheme(1, {{3, 7}}); }

SimConfig synthetic_config(const FrequencyScheme& scheme, std::uint64_t seed, int length, int reps) {
    SimConfig cfg;
    cfg.scheme = scheme;
    cfg.b_true = make_recency_coefficients(build_structure(scheme), seed);
    cfg.sigma_true = make_nowcast_covariance(scheme, seed);
    cfg.length = length;
    cfg.reps = reps;
    cfg.seed = seed;
    cfg.sparsify_cut = 0.01;
    cfg.validate();
    return cfg;
}

namespace {

struct StdData {
    StandardizationStats stats;
    RegressionProblem problem;
};

StdData standardized_problem(const StackedPanel& panel, int rows) {
    StdData d;
    d.stats = compute_stats(panel.data, {0, rows}, &panel.columns);
    d.problem = build_problem(d.stats.apply(panel.data.topRows(rows)));
    return d;
}

// Coefficient paths (standardized scale) of every estimator on one problem.
std::vector<std::vector<Eigen::MatrixXd>> estimator_paths(const RegressionProblem& problem,
                                                          const NestedGroupStructure& structure,
                                                          const SolverConfig& solver) {
    std::vector<std::vector<Eigen::MatrixXd>> out(4);
    out[0].push_back(fit_ols(problem));
    for (double l : ridge_grid(problem, solver.grid_len)) out[1].push_back(fit_ridge(problem, l));
    out[2] = fit_lasso(problem, solver).coefs;
    out[3] = fit_path(problem, structure, solver).coefs;
    return out;
}

NestedGroupStructure structure_for(const SimConfig& sim) {
    const FrequencyScheme scheme = sim.scheme.dimension() != 0
                                       ? sim.scheme
                                       : FrequencyScheme(static_cast<int>(sim.b_true.rows()), {});
    return build_structure(scheme);
}

FrequencyScheme scheme_for(const SimConfig& sim) {
    return sim.scheme.dimension() != 0 ? sim.scheme : FrequencyScheme(static_cast<int>(sim.b_true.rows()), {});
}

struct CovPick {
    SelectionMetrics metrics;
    int index = 0;
    SparseCovEstimate estimate;
};

// Best first-row recovery over the sigma grid of one residual matrix.
CovPick best_cov(const Eigen::MatrixXd& resid, const BlockMask& mask, const Eigen::VectorXd& truth_row,
                 const CovConfig& cov, int grid_len, double grid_ratio) {
    const Eigen::MatrixXd sample = sample_cov(resid);
    const auto grid = lambda_sigma_grid(sample, mask, grid_len, grid_ratio);
    CovPick best;
    best.metrics.mcc = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < static_cast<int>(grid.size()); ++s) {
        SparseCovEstimate est = sparse_cov(sample, grid[s], mask, cov);
        SelectionMetrics m = selection_metrics(nowcast_row(est.regularized, mask), truth_row);
        m.mse = std::numeric_limits<double>::quiet_NaN();
        if (m.mcc > best.metrics.mcc) best = {m, s, std::move(est)};
    }
    return best;
}

}  // namespace

Design1Report run_design1(const SimConfig& sim, const SolverConfig& solver, const ExecPolicy& exec) {
    sim.validate();
    solver.validate();
    const NestedGroupStructure structure = structure_for(sim);
    const Eigen::MatrixXd truth = sim.effective_b();

    using RepMetrics = std::vector<std::vector<SelectionMetrics>>;  // estimator x grid
    const auto per_rep = map_indices<RepMetrics>(
        sim.reps,
        [&](int r) {
            const StackedPanel panel = simulate_var(sim, r);
            const StdData d = standardized_problem(panel, panel.rows());
            const auto paths = estimator_paths(d.problem, structure, solver);
            RepMetrics out(paths.size());
            for (std::size_t e = 0; e < paths.size(); ++e)
                for (const auto& c : paths[e])
                    out[e].push_back(selection_metrics(destandardize_coef(c, d.stats.sd), truth));
            return out;
        },
        exec);

    Design1Report rep;
    rep.reps = sim.reps;
    for (std::size_t e = 0; e < 4; ++e) {
        Design1Row row;
        row.estimator = all_estimators[e];
        const std::size_t grid = per_rep.front()[e].size();
        row.grid_mean.assign(grid, SelectionMetrics{});
        for (const auto& r : per_rep) {
            const auto& g = r[e];
            int best = 0;
            for (int k = 1; k < static_cast<int>(g.size()); ++k)
                if (g[k].mse < g[best].mse) best = k;
            row.best.push_back(g[best]);
            row.best_index.push_back(best);
            for (std::size_t k = 0; k < grid; ++k) {
                row.grid_mean[k].mse += g[k].mse / sim.reps;
                row.grid_mean[k].fpr += g[k].fpr / sim.reps;
                row.grid_mean[k].fnr += g[k].fnr / sim.reps;
                row.grid_mean[k].mcc += g[k].mcc / sim.reps;
            }
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

Design2Report run_design2(const SimConfig& sim, const SolverConfig& solver, const CovConfig& cov,
                          const ExecPolicy& exec, int sigma_grid_len, double sigma_grid_ratio) {
    sim.validate();
    solver.validate();
    const NestedGroupStructure structure = structure_for(sim);
    const BlockMask mask = build_mask(scheme_for(sim));
    const Eigen::VectorXd truth_row = nowcast_row(sim.sigma_true, mask);

    struct Pick {
        SelectionMetrics m;
        std::pair<int, int> cell;
    };
    const auto per_rep = map_indices<std::vector<Pick>>(
        sim.reps,
        [&](int r) {
            const StackedPanel panel = simulate_var(sim, r);
            const StdData d = standardized_problem(panel, panel.rows());
            const auto paths = estimator_paths(d.problem, structure, solver);
            std::vector<Pick> out;
            for (const auto& path : paths) {
                Pick best{{}, {0, 0}};
                best.m.mcc = -std::numeric_limits<double>::infinity();
                for (int k = 0; k < static_cast<int>(path.size()); ++k) {
                    CovPick p = best_cov(residuals(d.problem, path[k]), mask, truth_row, cov, sigma_grid_len,
                                         sigma_grid_ratio);
                    if (p.metrics.mcc > best.m.mcc) best = {p.metrics, {k, p.index}};
                }
                out.push_back(best);
            }
            return out;
        },
        exec);

    Design2Report rep;
    rep.reps = sim.reps;
    for (std::size_t e = 0; e < 4; ++e) {
        Design2Row row;
        row.estimator = all_estimators[e];
        for (const auto& r : per_rep) {
            row.best.push_back(r[e].m);
            row.best_cell.push_back(r[e].cell);
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

Design3Report run_design3(const SimConfig& sim, const SolverConfig& solver, const CovConfig& cov,
                          const ExecPolicy& exec, int sigma_grid_len, double sigma_grid_ratio) {
    sim.validate();
    solver.validate();
    if (sim.length < 4) throw ConfigError("design 3 needs T >= 4");
    const NestedGroupStructure structure = structure_for(sim);
    const BlockMask mask = build_mask(scheme_for(sim));
    const Eigen::VectorXd truth_row = nowcast_row(sim.sigma_true, mask);
    const int K = static_cast<int>(sim.b_true.rows());

    using Errors = std::pair<Eigen::VectorXd, Eigen::VectorXd>;
    const auto per_rep = map_indices<Errors>(
        sim.reps,
        [&](int r) {
            const StackedPanel panel = simulate_var(sim, r);
            const int fit_rows = panel.rows() - 1;
            const StdData d = standardized_problem(panel, fit_rows);
            const Eigen::VectorXd last = d.stats.apply(panel.data.row(fit_rows - 1)).transpose();
            const Eigen::VectorXd actual = panel.data.row(fit_rows).transpose();

            // Forecast errors (original scale) of each coefficient matrix on a path.
            auto best_on_path = [&](const std::vector<Eigen::MatrixXd>& coefs, int& index) {
                Eigen::VectorXd best_err;
                double best = std::numeric_limits<double>::infinity();
                for (int k = 0; k < static_cast<int>(coefs.size()); ++k) {
                    Eigen::VectorXd err = d.stats.invert_row(forecast_one_step(coefs[k], last)) - actual;
                    if (err(0) * err(0) < best) {
                        best = err(0) * err(0);
                        best_err = err;
                        index = k;
                    }
                }
                return best_err;
            };

            const HierFit plain = fit_path(d.problem, structure, solver);
            int k_plain = 0;
            const Eigen::VectorXd e_plain = best_on_path(plain.coefs, k_plain);

            CovPick pick = best_cov(residuals(d.problem, plain.coefs[k_plain]), mask, truth_row, cov,
                                    sigma_grid_len, sigma_grid_ratio);
            const HierFit gls = fit_gls(d.problem, structure, pick.estimate, solver);
            int k_gls = 0;
            const Eigen::VectorXd e_gls = best_on_path(gls.coefs, k_gls);
            return Errors{e_plain.array().square().matrix(), e_gls.array().square().matrix()};
        },
        exec);

    Design3Report rep;
    rep.reps = sim.reps;
    rep.sq_err_plain.resize(sim.reps, K);
    rep.sq_err_gls.resize(sim.reps, K);
    for (int r = 0; r < sim.reps; ++r) {
        rep.sq_err_plain.row(r) = per_rep[r].first.transpose();
        rep.sq_err_gls.row(r) = per_rep[r].second.transpose();
    }
    return rep;
}

}  // namespace mfhier
