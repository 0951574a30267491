// mfhier: batch front-end for the mixed-frequency hierarchical VAR toolkit.
// Every subcommand reads a JSON run config (plus flag overrides), writes its
// results as files in the output directory and finishes with manifest.json.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "mfhier/config.hpp"
#include "mfhier/csv_io.hpp"
#include "mfhier/errors.hpp"
#include "mfhier/evaluation.hpp"
#include "mfhier/indicator.hpp"
#include "mfhier/reporting.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mfhier;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Overrides {
    std::string config;
    std::string panel;
    std::vector<std::string> inputs;  // path:frequency
    std::string out;
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda;
    std::optional<int> design;
    std::optional<int> reps;
    std::optional<int> length;
    std::optional<int> window;
    std::string target;
    std::string selection;
    std::string schedule;
    std::string categories;
    std::string coef;
};

void log(const std::string& msg) { std::cerr << "[mfhier] " << msg << '\n'; }

RunConfig resolve_config(const Overrides& o) {
    RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
    if (!o.panel.empty()) c.panel = o.panel;
    for (const auto& spec : o.inputs) {
        InputSpec in;
        auto colon = spec.rfind(':');
        in.path = colon == std::string::npos ? spec : spec.substr(0, colon);
        in.frequency = colon == std::string::npos ? Frequency::Month : parse_frequency(spec.substr(colon + 1));
        c.inputs.push_back(in);
    }
    if (!o.out.empty()) c.output_dir = o.out;
    if (o.threads) c.threads = *o.threads;
    if (o.seed) c.seed = *o.seed;
    if (o.lambda) c.lambda = *o.lambda;
    if (o.design) c.design = *o.design;
    if (o.reps) c.reps = *o.reps;
    if (o.length) c.length = *o.length;
    if (o.window) c.cv_window = *o.window;
    if (!o.target.empty()) c.target = o.target;
    if (!o.selection.empty()) c.forecast_selection = o.selection;
    if (!o.schedule.empty()) c.schedule = o.schedule;
    if (!o.categories.empty()) c.categories = o.categories;
    if (!o.coef.empty()) c.coef = o.coef;
    c.validate();
    return c;
}

ExecPolicy exec_policy(const RunConfig& c) {
    ExecPolicy p;
    p.threads = c.threads > 0 ? c.threads : default_threads();
    omp_set_num_threads(p.threads);
    return p;
}

// ---------------------------------------------------------------------------
// Output bookkeeping

class Outputs {
public:
    explicit Outputs(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    void write(const std::string& name, const std::string& text) {
        write_text_file((fs::path(dir_) / name).string(), text);
        files_.push_back(name);
    }
    template <class F>
    void stream(const std::string& name, F&& body) {
        std::ostringstream ss;
        body(ss);
        write(name, ss.str());
    }
    void json_file(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    void manifest(const std::string& command, const RunConfig& cfg) {
        json m;
        m["command"] = command;
        m["config_hash"] = config_hash(cfg);
        m["config"] = json::parse(canonical_json(cfg));
        m["seed"] = cfg.seed;
        m["versions"] = {{"mfhier", kVersion},
                         {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                       "." + std::to_string(EIGEN_MINOR_VERSION)},
                         {"compiler", __VERSION__}};
        json files = json::array();
        std::sort(files_.begin(), files_.end());
        for (const auto& f : files_) {
            std::ifstream in(fs::path(dir_) / f, std::ios::binary);
            std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            std::uint64_t h = 14695981039346656037ull;
            for (unsigned char ch : bytes) {
                h ^= ch;
                h *= 1099511628211ull;
            }
            char buf[17];
            std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
            files.push_back({{"file", f}, {"bytes", bytes.size()}, {"fnv1a", buf}});
        }
        m["outputs"] = files;
        write_text_file((fs::path(dir_) / "manifest.json").string(), m.dump(2) + "\n");
    }

private:
    std::string dir_;
    std::vector<std::string> files_;
};

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::vector<std::string> column_names(const StackedPanel& p) {
    std::vector<std::string> names;
    for (const auto& c : p.columns) names.push_back(c.name());
    return names;
}

std::string row_label(const StackedPanel& p, int t) {
    if (p.low_frequency && t < static_cast<int>(p.periods.size())) return format_period(p.periods[t], *p.low_frequency);
    return std::to_string(t + 1);
}

// ---------------------------------------------------------------------------
// Shared pipeline steps

StackedPanel load_raw_panel(const RunConfig& c) {
    if (c.inputs.empty()) throw ConfigError("no input series: set 'inputs' in the config or pass --input");
    std::vector<RawSeries> series;
    for (const auto& in : c.inputs) {
        SeriesFileOptions opt;
        opt.frequency = in.frequency;
        opt.ids = in.ids;
        opt.tcodes = in.tcodes;
        for (auto& s : read_series_file(in.path, opt)) series.push_back(apply_tcode(s));
    }
    const FrequencyScheme scheme = infer_scheme(series, c.calendar);
    return stack_panel(series, scheme, c.calendar);
}

StackedPanel load_panel(const RunConfig& c) {
    if (!c.panel.empty()) return read_panel_file(c.panel);
    return load_raw_panel(c);
}

int target_column(const StackedPanel& p, const RunConfig& c) {
    if (c.target.empty()) {
        for (int k = 0; k < p.cols(); ++k)
            if (p.columns[k].within_index == 0) return k;
        return 0;
    }
    return p.column_index(c.target, 0);
}

struct Chosen {
    Eigen::MatrixXd coef;  // standardized scale
    double lambda = 0.0;
    std::optional<int> index;
    std::string rule;
};

// Coefficients of the full-sample standardized fit: a fixed lambda, or the
// grid index chosen by rolling CV on the raw panel.
Chosen choose_coef(const StackedPanel& raw, const StackedPanel& std_panel, const NestedGroupStructure& structure,
                   const RunConfig& c, const ExecPolicy& exec, HierFit* path_out = nullptr,
                   CvResult* cv_out = nullptr) {
    const RegressionProblem problem = build_problem(std_panel);
    Chosen ch;
    if (c.lambda) {
        const FitResult f = fit(problem, structure, *c.lambda, Eigen::MatrixXd::Zero(raw.cols(), raw.cols()), c.solver);
        ch.coef = f.coef;
        ch.lambda = *c.lambda;
        ch.rule = "fixed";
        if (path_out) *path_out = fit_path(problem, structure, c.solver);
        return ch;
    }
    HierFit path = fit_path(problem, structure, c.solver);
    CvConfig cv;
    cv.window = c.cv_window;
    if (!c.target.empty()) cv.target = target_column(raw, c);
    cv.exec = exec;
    log("rolling CV over " + std::to_string(raw.rows() - c.cv_window) + " windows");
    CvResult res = cv_rolling(raw, structure, c.solver, cv);
    ch.index = res.selected;
    ch.coef = path.coefs[res.selected];
    ch.lambda = path.lambdas[res.selected];
    ch.rule = "cv";
    if (path_out) *path_out = std::move(path);
    if (cv_out) *cv_out = std::move(res);
    return ch;
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_transform(const RunConfig& c) {
    const StackedPanel panel = load_raw_panel(c);
    Outputs out(c.output_dir);
    out.stream("panel.csv", [&](std::ostream& os) { write_panel_csv(os, panel); });
    json scheme;
    scheme["K"] = panel.scheme.dimension();
    scheme["low_count"] = panel.scheme.low_count();
    scheme["components"] = json::array();
    for (const auto& comp : panel.scheme.components())
        scheme["components"].push_back({{"ratio", comp.ratio}, {"count", comp.count}});
    scheme["rows"] = panel.rows();
    scheme["columns"] = column_names(panel);
    if (panel.low_frequency && !panel.periods.empty()) {
        scheme["first_period"] = row_label(panel, 0);
        scheme["last_period"] = row_label(panel, panel.rows() - 1);
    }
    out.json_file("scheme.json", scheme);
    out.manifest("transform", c);
    log("panel " + std::to_string(panel.rows()) + " x " + std::to_string(panel.cols()) + " written");
}

void cmd_fit(const RunConfig& c) {
    const ExecPolicy exec = exec_policy(c);
    const StackedPanel raw = load_panel(c);
    const auto [std_panel, stats] = standardize(raw, {0, raw.rows()});
    const NestedGroupStructure structure = build_structure(raw.scheme, c.policies);

    HierFit path;
    CvResult cv;
    const Chosen ch = choose_coef(raw, std_panel, structure, c, exec, &path, &cv);
    const auto names = column_names(raw);

    Outputs out(c.output_dir);
    out.stream("lambdas.csv", [&](std::ostream& os) {
        os << "index,lambda,objective,iterations,converged,restarts,nonzeros" << (cv.scores.empty() ? "" : ",cv_score")
           << '\n';
        for (int k = 0; k < path.size(); ++k) {
            const auto& d = path.diagnostics[k];
            os << k << ',' << format_number(path.lambdas[k]) << ',' << format_number(d.objective) << ','
               << d.iterations << ',' << (d.converged ? 1 : 0) << ',' << d.restarts << ','
               << (path.coefs[k].array() != 0.0).count();
            if (!cv.scores.empty()) os << ',' << format_number(cv.scores[k]);
            os << '\n';
        }
    });
    for (int k = 0; k < path.size(); ++k)
        out.stream("path/coef_" + std::to_string(k) + ".csv",
                   [&](std::ostream& os) { write_matrix_csv(os, path.coefs[k], names); });
    out.stream("coef.csv", [&](std::ostream& os) { write_matrix_csv(os, ch.coef, names); });
    out.stream("coef_original_scale.csv",
               [&](std::ostream& os) { write_matrix_csv(os, destandardize_coef(ch.coef, stats.sd), names); });
    if (!cv.windows.empty()) {
        out.stream("cv_windows.csv", [&](std::ostream& os) {
            os << "origin,index,lambda,sq_error\n";
            for (const auto& w : cv.windows)
                for (int k = 0; k < static_cast<int>(w.lambdas.size()); ++k) {
                    double e = 0.0;
                    if (!c.target.empty()) {
                        const int t = target_column(raw, c);
                        e = std::pow(w.forecasts(k, t) - w.actual(t), 2);
                    } else {
                        e = (w.forecasts.row(k).transpose() - w.actual).squaredNorm() / raw.cols();
                    }
                    os << row_label(raw, w.origin) << ',' << k << ',' << format_number(w.lambdas[k]) << ','
                       << format_number(e) << '\n';
                }
        });
    }
    json d;
    d["K"] = raw.cols();
    d["rows"] = raw.rows();
    d["lambda_max"] = path.lambda_max.value;
    d["lambda_max_degenerate"] = path.lambda_max.degenerate;
    d["selection_rule"] = ch.rule;
    d["selected_lambda"] = ch.lambda;
    d["selected_index"] = ch.index ? json(*ch.index) : json(nullptr);
    d["selected_nonzeros"] = (ch.coef.array() != 0.0).count();
    d["hierarchy_ok"] = satisfies_hierarchy(ch.coef, structure);
    d["total_iterations"] = path.total_iterations();
    if (!cv.windows.empty()) d["cv_windows"] = cv.windows.size();
    out.json_file("diagnostics.json", d);
    out.manifest("fit", c);
    log("fit done: lambda " + format_number(ch.lambda) + " (" + ch.rule + ")");
}

void cmd_cov(const RunConfig& c) {
    const ExecPolicy exec = exec_policy(c);
    const StackedPanel raw = load_panel(c);
    const auto [std_panel, stats] = standardize(raw, {0, raw.rows()});
    const NestedGroupStructure structure = build_structure(raw.scheme, c.policies);
    const Chosen ch = choose_coef(raw, std_panel, structure, c, exec);
    const RegressionProblem problem = build_problem(std_panel);
    const Eigen::MatrixXd sample = sample_cov(residuals(problem, ch.coef));
    const BlockMask mask = build_mask(raw.scheme);
    const auto grid = lambda_sigma_grid(sample, mask, c.sigma_grid_len, c.sigma_grid_ratio);
    const auto names = column_names(raw);
    const int tgt = target_column(raw, c);

    Outputs out(c.output_dir);
    out.stream("sample_cov.csv", [&](std::ostream& os) { write_matrix_csv(os, sample, names); });
    out.stream("cov_grid.csv", [&](std::ostream& os) {
        os << "index,lambda_sigma,method,admm_iterations,min_eig,penalized_nonzeros,nowcast_pairs\n";
        for (int s = 0; s < static_cast<int>(grid.size()); ++s) {
            const SparseCovEstimate est = sparse_cov(sample, grid[s], mask, c.cov);
            long nz = 0;
            for (Eigen::Index j = 0; j < sample.cols(); ++j)
                for (Eigen::Index i = 0; i < sample.rows(); ++i) nz += mask(i, j) && est.regularized(i, j) != 0.0;
            const auto sel = select_nowcasters(est, raw, tgt);
            os << s << ',' << format_number(grid[s]) << ','
               << (est.method == CovMethod::Admm ? "admm" : "soft_threshold") << ',' << est.admm_iterations << ','
               << format_number(est.min_eig) << ',' << nz << ',' << sel.entries.size() << '\n';
            out.stream("cov/cov_" + std::to_string(s) + ".csv",
                       [&](std::ostream& o2) { write_matrix_csv(o2, est.regularized, names); });
        }
    });
    json d;
    d["lambda_beta"] = ch.lambda;
    d["lambda_beta_rule"] = ch.rule;
    d["residual_rows"] = problem.samples();
    out.json_file("cov_summary.json", d);
    out.manifest("cov", c);
    log("covariance grid of " + std::to_string(grid.size()) + " points written");
}

void cmd_nowcast(const RunConfig& c) {
    const ExecPolicy exec = exec_policy(c);
    const StackedPanel raw = load_panel(c);
    const auto [std_panel, stats] = standardize(raw, {0, raw.rows()});
    const NestedGroupStructure structure = build_structure(raw.scheme, c.policies);
    const int tgt = target_column(raw, c);
    const TuneResult tr =
        tune_indicator(std_panel, structure, c.solver, c.cov, tgt, c.sigma_grid_len, c.sigma_grid_ratio, exec);

    Outputs out(c.output_dir);
    out.stream("selection.csv", [&](std::ostream& os) {
        os << "series,period,column,covariance\n";
        for (const auto& e : tr.selection.entries)
            os << e.series_id << ',' << e.within_index << ',' << raw.columns[e.column].name() << ','
               << format_number(e.covariance) << '\n';
    });
    out.stream("grid.csv", [&](std::ostream& os) {
        os << "beta_index,lambda_beta,sigma_index,lambda_sigma,selected,correlation\n";
        for (int b = 0; b < tr.correlations.rows(); ++b)
            for (int s = 0; s < tr.correlations.cols(); ++s) {
                const bool has = s < static_cast<int>(tr.lambda_sigma[b].size());
                os << b << ',' << format_number(tr.lambda_beta[b]) << ',' << s << ','
                   << (has ? format_number(tr.lambda_sigma[b][s]) : "") << ',' << tr.sizes(b, s) << ','
                   << (std::isfinite(tr.correlations(b, s)) ? format_number(tr.correlations(b, s)) : "") << '\n';
            }
    });

    json summary;
    summary["target"] = raw.columns[tgt].name();
    summary["selection_empty"] = tr.selection.empty();
    const Indicator base = all_variables_indicator(std_panel, tgt);
    const double base_corr = indicator_correlation(base.values, std_panel.data.col(tgt));
    summary["all_variables_correlation"] = base_corr;
    if (tr.selection.empty()) {
        // Sentinel: header-only selection.csv, no indicator or release path.
        summary["correlation"] = nullptr;
        log("no couple selects a nowcasting relation; empty selection written");
    } else {
        summary["correlation"] = tr.correlation;
        summary["lambda_beta"] = tr.lambda_beta[tr.beta_index];
        summary["lambda_sigma"] = tr.lambda_sigma[tr.beta_index][tr.sigma_index];
        summary["beta_index"] = tr.beta_index;
        summary["sigma_index"] = tr.sigma_index;
        summary["selected_pairs"] = tr.selection.entries.size();
        const Indicator ind = coincident_indicator(std_panel, tr.selection);
        summary["explained_share"] = ind.explained;
        out.stream("indicator.csv", [&](std::ostream& os) {
            os << "period,target,indicator\n";
            for (int t = 0; t < raw.rows(); ++t)
                os << row_label(raw, t) << ',' << format_number(std_panel.data(t, tgt)) << ','
                   << format_number(ind.values(t)) << '\n';
        });
        if (!c.schedule.empty()) {
            const auto path = release_path(std_panel, tr.selection, read_release_schedule(c.schedule));
            out.stream("release_path.csv", [&](std::ostream& os) {
                os << "event,released,skipped,correlation\n";
                for (const auto& p : path)
                    os << p.label << ',' << p.released << ',' << (p.skipped ? 1 : 0) << ','
                       << (p.skipped ? "" : format_number(p.correlation)) << '\n';
            });
        }
    }
    out.json_file("summary.json", summary);
    out.manifest("nowcast", c);
}

void cmd_forecast(const RunConfig& c) {
    const ExecPolicy exec = exec_policy(c);
    const StackedPanel raw = load_panel(c);
    const NestedGroupStructure structure = build_structure(raw.scheme, c.policies);
    ForecastConfig fc;
    fc.window = c.cv_window;
    fc.target = target_column(raw, c);
    fc.selection = c.forecast_selection == "expanding" ? ForecastSelection::Expanding : ForecastSelection::PerWindow;
    fc.exec = exec;
    log("rolling forecasts over " + std::to_string(raw.rows() - c.cv_window) + " windows");
    const ForecastTable table = forecast_comparison(raw, structure, c.solver, fc);

    Outputs out(c.output_dir);
    out.stream("forecasts.csv", [&](std::ostream& os) {
        os << "period,actual";
        for (const auto& m : table.methods) os << ',' << m;
        os << ",lambda_index\n";
        for (int w = 0; w < table.forecasts.rows(); ++w) {
            os << row_label(raw, table.origins[w] + 1) << ',' << format_number(table.actual(w));
            for (int m = 0; m < table.forecasts.cols(); ++m) os << ',' << format_number(table.forecasts(w, m));
            os << ',' << table.selected[w] << '\n';
        }
    });
    const auto msfe = table.msfe();
    out.stream("msfe.csv", [&](std::ostream& os) {
        os << "method,msfe,se,windows\n";
        for (std::size_t m = 0; m < table.methods.size(); ++m)
            os << table.methods[m] << ',' << format_number(msfe[m].mean) << ',' << format_number(msfe[m].se) << ','
               << table.forecasts.rows() << '\n';
    });
    out.manifest("forecast", c);
    for (std::size_t m = 0; m < table.methods.size(); ++m)
        log(table.methods[m] + " MSFE " + format_number(msfe[m].mean));
}

void cmd_network(const RunConfig& c) {
    const ExecPolicy exec = exec_policy(c);
    const StackedPanel raw = load_panel(c);
    Eigen::MatrixXd coef;
    if (!c.coef.empty()) {
        coef = read_matrix_file(c.coef, true);
        if (coef.rows() != raw.cols() || coef.cols() != raw.cols())
            throw DimensionError("coefficient file is not " + std::to_string(raw.cols()) + " x " +
                                 std::to_string(raw.cols()));
    } else {
        const auto [std_panel, stats] = standardize(raw, {0, raw.rows()});
        coef = choose_coef(raw, std_panel, build_structure(raw.scheme, c.policies), c, exec).coef;
    }
    const EdgeList edges = edge_list(coef);
    Outputs out(c.output_dir);
    out.stream("edges.csv", [&](std::ostream& os) { write_edges_csv(os, edges, raw); });
    out.stream("adjacency.csv", [&](std::ostream& os) { write_adjacency_csv(os, coef, raw); });
    out.stream("network.dot", [&](std::ostream& os) { write_dot(os, edges, raw); });
    if (!c.categories.empty()) {
        const CategoryTable table = category_degrees(edges, raw, read_category_map(c.categories));
        out.stream("category_degrees.csv", [&](std::ostream& os) { write_category_table_csv(os, table); });
    }
    out.manifest("network", c);
    log(std::to_string(edges.edges.size()) + " edges written");
}

json summary_json(std::span<const SelectionMetrics> v, bool with_mse) {
    std::vector<double> mse, fpr, fnr, mc;
    for (const auto& m : v) {
        mse.push_back(m.mse);
        fpr.push_back(m.fpr);
        fnr.push_back(m.fnr);
        mc.push_back(m.mcc);
    }
    auto pair = [](std::span<const double> x) {
        const Summary s = summarize(x);
        return json{{"mean", number(s.mean)}, {"se", number(s.se)}};
    };
    json j;
    if (with_mse) j["mse"] = pair(mse);
    j["fpr"] = pair(fpr);
    j["fnr"] = pair(fnr);
    j["mcc"] = pair(mc);
    return j;
}

void cmd_simulate(const RunConfig& c) {
    const ExecPolicy exec = exec_policy(c);
    const FrequencyScheme scheme = small_system_scheme();
    const int length = c.length ? c.length : (c.design == 3 ? 105 : 125);
    const SimConfig sim = synthetic_config(scheme, c.seed, length, c.reps);
    const StackedPanel labels = make_panel(scheme, Eigen::MatrixXd::Zero(1, scheme.dimension()));
    const auto names = column_names(labels);

    Outputs out(c.output_dir);
    out.stream("b_true.csv", [&](std::ostream& os) { write_matrix_csv(os, sim.effective_b(), names); });
    out.stream("sigma_true.csv", [&](std::ostream& os) { write_matrix_csv(os, sim.sigma_true, names); });
    json summary;
    summary["design"] = c.design;
    summary["reps"] = c.reps;
    summary["K"] = scheme.dimension();
    summary["T"] = length;
    summary["spectral_radius"] = spectral_radius(sim.effective_b());
    log("design " + std::to_string(c.design) + ", " + std::to_string(c.reps) + " replications");

    if (c.design == 1) {
        const Design1Report rep = run_design1(sim, c.solver, exec);
        out.stream("per_rep.csv", [&](std::ostream& os) {
            os << "rep,estimator,grid_index,mse,fpr,fnr,mcc\n";
            for (const auto& row : rep.rows)
                for (int r = 0; r < rep.reps; ++r) {
                    const auto& m = row.best[r];
                    os << r << ',' << estimator_name(row.estimator) << ',' << row.best_index[r] << ','
                       << format_number(m.mse) << ',' << format_number(m.fpr) << ',' << format_number(m.fnr) << ','
                       << format_number(m.mcc) << '\n';
                }
        });
        out.stream("grid.csv", [&](std::ostream& os) {
            os << "estimator,grid_index,mse,fpr,fnr,mcc\n";
            for (const auto& row : rep.rows)
                for (std::size_t k = 0; k < row.grid_mean.size(); ++k) {
                    const auto& m = row.grid_mean[k];
                    os << estimator_name(row.estimator) << ',' << k << ',' << format_number(m.mse) << ','
                       << format_number(m.fpr) << ',' << format_number(m.fnr) << ',' << format_number(m.mcc) << '\n';
                }
        });
        for (const auto& row : rep.rows) summary["estimators"][std::string(estimator_name(row.estimator))] =
            summary_json(row.best, true);
    } else if (c.design == 2) {
        const Design2Report rep = run_design2(sim, c.solver, c.cov, exec, c.sigma_grid_len, c.sigma_grid_ratio);
        out.stream("per_rep.csv", [&](std::ostream& os) {
            os << "rep,estimator,beta_index,sigma_index,fpr,fnr,mcc\n";
            for (const auto& row : rep.rows)
                for (int r = 0; r < rep.reps; ++r) {
                    const auto& m = row.best[r];
                    os << r << ',' << estimator_name(row.estimator) << ',' << row.best_cell[r].first << ','
                       << row.best_cell[r].second << ',' << format_number(m.fpr) << ',' << format_number(m.fnr)
                       << ',' << format_number(m.mcc) << '\n';
                }
        });
        for (const auto& row : rep.rows) summary["estimators"][std::string(estimator_name(row.estimator))] =
            summary_json(row.best, false);
    } else {
        const Design3Report rep = run_design3(sim, c.solver, c.cov, exec, c.sigma_grid_len, c.sigma_grid_ratio);
        out.stream("msfe.csv", [&](std::ostream& os) {
            os << "series,msfe_plain,se_plain,msfe_gls,se_gls\n";
            for (int k = 0; k < scheme.dimension(); ++k) {
                std::vector<double> p(rep.sq_err_plain.col(k).data(), rep.sq_err_plain.col(k).data() + rep.reps);
                std::vector<double> g(rep.sq_err_gls.col(k).data(), rep.sq_err_gls.col(k).data() + rep.reps);
                const Summary sp = summarize(p), sg = summarize(g);
                os << names[k] << ',' << format_number(sp.mean) << ',' << format_number(sp.se) << ','
                   << format_number(sg.mean) << ',' << format_number(sg.se) << '\n';
            }
        });
        std::vector<double> p(rep.sq_err_plain.col(0).data(), rep.sq_err_plain.col(0).data() + rep.reps);
        std::vector<double> g(rep.sq_err_gls.col(0).data(), rep.sq_err_gls.col(0).data() + rep.reps);
        const Summary sp = summarize(p), sg = summarize(g);
        summary["first_series"] = {{"plain", {{"msfe", sp.mean}, {"se", sp.se}}},
                                   {"gls", {{"msfe", sg.mean}, {"se", sg.se}}}};
    }
    out.json_file("summary.json", summary);
    out.manifest("simulate", c);
}

int report(const std::string& kind, const std::string& cls, const std::string& message, int code) {
    json e{{"error", kind}, {"class", cls}, {"message", message}, {"exit_code", code}};
    std::cerr << e.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed-frequency VAR with hierarchical group-lasso priorities"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", kVersion);

    Overrides o;
    std::optional<int> env_threads;
    if (const char* env = std::getenv("MFHIER_THREADS")) env_threads = std::atoi(env);

    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", o.config, "JSON run config")->check(CLI::ExistingFile);
        sub->add_option("-o,--out", o.out, "Output directory (overrides output_dir)");
        sub->add_option("--threads", o.threads, "Worker threads (default: MFHIER_THREADS or all cores)");
        sub->add_option("--panel", o.panel, "Stacked panel CSV written by `transform`");
        sub->add_option("--input", o.inputs, "Raw series file as PATH[:frequency]; repeatable");
        sub->add_option("--target", o.target, "Target series id");
        sub->add_option("--seed", o.seed, "Random seed");
    };

    auto* transform = app.add_subcommand("transform", "Apply T-codes, align calendars and write the stacked panel");
    auto* fit_cmd = app.add_subcommand("fit", "Fit the coefficient path and select lambda");
    auto* cov = app.add_subcommand("cov", "Sparse residual covariance over the lambda_sigma grid");
    auto* nowcast = app.add_subcommand("nowcast", "Select nowcasting pairs and build the coincident indicator");
    auto* forecast = app.add_subcommand("forecast", "Rolling one-step MSFE: hierarchical vs AR(1), RW and OLS");
    auto* network = app.add_subcommand("network", "Granger network and category degree exports");
    auto* simulate = app.add_subcommand("simulate", "Run a synthetic simulation design");
    for (auto* s : {transform, fit_cmd, cov, nowcast, forecast, network, simulate}) common(s);
    for (auto* s : {fit_cmd, cov, network}) s->add_option("--lambda", o.lambda, "Fixed lambda; skips CV");
    for (auto* s : {fit_cmd, cov, network, forecast}) s->add_option("--window", o.window, "Rolling window T1");
    forecast->add_option("--selection", o.selection, "per_window or expanding")
        ->check(CLI::IsMember({"per_window", "expanding"}));
    nowcast->add_option("--schedule", o.schedule, "Release schedule JSON")->check(CLI::ExistingFile);
    network->add_option("--categories", o.categories, "Category map CSV")->check(CLI::ExistingFile);
    network->add_option("--coef", o.coef, "Coefficient CSV (skips fitting)")->check(CLI::ExistingFile);
    simulate->add_option("--design", o.design, "Design 1, 2 or 3")->check(CLI::Range(1, 3));
    simulate->add_option("--reps", o.reps, "Replications")->check(CLI::PositiveNumber);
    simulate->add_option("--length", o.length, "Series length T");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report("usage", "validation", e.what(), 1);
    }

    try {
        if (!o.threads && env_threads && *env_threads > 0) o.threads = env_threads;
        const RunConfig cfg = resolve_config(o);
        if (*transform) cmd_transform(cfg);
        else if (*fit_cmd) cmd_fit(cfg);
        else if (*cov) cmd_cov(cfg);
        else if (*nowcast) cmd_nowcast(cfg);
        else if (*forecast) cmd_forecast(cfg);
        else if (*network) cmd_network(cfg);
        else if (*simulate) cmd_simulate(cfg);
    } catch (const Error& e) {
        const bool numerical = e.error_class() == ErrorClass::Numerical;
        return report(e.kind(), numerical ? "numerical" : "validation", e.what(), numerical ? 2 : 1);
    } catch (const json::exception& e) {
        return report("config", "validation", e.what(), 1);
    } catch (const fs::filesystem_error& e) {
        return report("io", "validation", e.what(), 1);
    }
    return 0;
}
