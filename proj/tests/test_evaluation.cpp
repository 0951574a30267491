#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"

#include "mfhier/errors.hpp"
#include "mfhier/evaluation.hpp"
#include "oracles.hpp"

using namespace mfhier;

namespace {

double lag1_autocorr(const Eigen::VectorXd& x) {
    const Eigen::ArrayXd d = x.array() - x.mean();
    double num = 0.0;
    for (Eigen::Index t = 1; t < d.size(); ++t) num += d(t) * d(t - 1);
    return num / d.square().sum();
}

SimConfig diag_sim(double b, int length) {
    SimConfig c;
    c.scheme = FrequencyScheme(1, {{3, 1}});
    c.b_true = b * Eigen::MatrixXd::Identity(4, 4);
    c.sigma_true = Eigen::MatrixXd::Identity(4, 4);
    c.length = length;
    c.reps = 1;
    c.seed = 17;
    return c;
}

}  // namespace

TEST_CASE("simulate_var: white noise and AR(1) autocorrelation") {
    const StackedPanel noise = simulate_var(diag_sim(0.0, 10000), 0);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(lag1_autocorr(noise.data.col(k))) < 0.03);
    const StackedPanel ar = simulate_var(diag_sim(0.5, 10000), 0);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(lag1_autocorr(ar.data.col(k)) - 0.5) < 0.02);
}

TEST_CASE("simulate_var is deterministic in (seed, rep)") {
    const SimConfig c = diag_sim(0.5, 50);
    CHECK(simulate_var(c, 3).data == simulate_var(c, 3).data);
    CHECK(simulate_var(c, 3).data != simulate_var(c, 4).data);
    SimConfig other = c;
    other.seed = 18;
    CHECK(simulate_var(c, 3).data != simulate_var(other, 3).data);
}

TEST_CASE("simulate_var rejects unstable or invalid configs") {
    CHECK_THROWS_AS(simulate_var(diag_sim(1.0, 20), 0), ValidationError);
    SimConfig c = diag_sim(0.5, 20);
    c.sigma_true(0, 0) = -1.0;
    CHECK_THROWS_AS(simulate_var(c, 0), NotPositiveDefiniteError);
}

TEST_CASE("sparsify cut zeroes small coefficients before simulating") {
    SimConfig c = diag_sim(0.5, 20);
    c.b_true(0, 1) = 0.005;
    c.sparsify_cut = 0.01;
    CHECK(c.effective_b()(0, 1) == 0.0);
    CHECK(c.effective_b()(0, 0) == 0.5);
}

TEST_CASE("mse: examples and loop oracle") {
    const Eigen::Matrix2d truth = Eigen::Matrix2d::Identity();
    std::vector<Eigen::MatrixXd> exact = {truth};
    CHECK(mse(exact, truth) == 0.0);
    Eigen::MatrixXd off = truth;
    off(0, 1) = 1.0;
    std::vector<Eigen::MatrixXd> one = {off};
    CHECK(mse(one, truth) == doctest::Approx(0.25));

    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd t(5, 5);
    for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = n01(rng);
    std::vector<Eigen::MatrixXd> est(7, Eigen::MatrixXd(5, 5));
    for (auto& e : est)
        for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = n01(rng);
    CHECK(mse(est, t) == doctest::Approx(oracle::mse_loop(est, t)).epsilon(1e-13));
}

TEST_CASE("selection metrics") {
    Eigen::MatrixXd truth(1, 7), est(1, 7);
    // Truly nonzero: cells 0..2; estimated nonzero: 0, 1, 3.
    truth << 1, 1, 1, 0, 0, 0, 0;
    est << 2, 3, 0, 4, 0, 0, 0;
    const ConfusionCounts c = confusion(est, truth);
    CHECK(c.tp == 2);
    CHECK(c.tn == 3);
    CHECK(c.fp == 1);  // truly nonzero, estimated zero
    CHECK(c.fn == 1);  // truly zero, estimated nonzero
    CHECK(mcc(c) == doctest::Approx(5.0 / 12.0));
    const SelectionMetrics m = selection_metrics(est, truth);
    CHECK(m.fpr == doctest::Approx(1.0 / 3.0));
    CHECK(m.fnr == doctest::Approx(1.0 / 4.0));

    const SelectionMetrics perfect = selection_metrics(truth, truth);
    CHECK(perfect.mcc == doctest::Approx(1.0));
    CHECK(perfect.fpr == 0.0);
    CHECK(perfect.fnr == 0.0);
    CHECK(perfect.mse == 0.0);

    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 3);
    CHECK(selection_metrics(zero, zero).mcc == 0.0);
}

TEST_CASE("selection metrics are invariant to a joint permutation of cells") {
    std::mt19937_64 rng(8);
    std::bernoulli_distribution coin(0.4);
    Eigen::MatrixXd truth(1, 30), est(1, 30);
    for (int i = 0; i < 30; ++i) {
        truth(i) = coin(rng) ? 1.0 : 0.0;
        est(i) = coin(rng) ? 0.5 : 0.0;
    }
    std::vector<int> perm(30);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd pt(1, 30), pe(1, 30);
    for (int i = 0; i < 30; ++i) {
        pt(i) = truth(perm[i]);
        pe(i) = est(perm[i]);
    }
    const auto a = selection_metrics(est, truth), b = selection_metrics(pe, pt);
    CHECK(a.mcc == b.mcc);
    CHECK(a.fpr == b.fpr);
    CHECK(a.fnr == b.fnr);
    CHECK(a.mcc >= -1.0);
    CHECK(a.mcc <= 1.0);
}

TEST_CASE("msfe: examples and loop oracle") {
    Eigen::MatrixXd a(1, 1), f(1, 1);
    a << 1.0;
    f << 1.0;
    CHECK(msfe(f, a)(0) == 0.0);
    f << 0.5;
    CHECK(msfe(f, a)(0) == doctest::Approx(0.25));

    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd fa(12, 4), aa(12, 4);
    for (Eigen::Index i = 0; i < fa.size(); ++i) {
        fa(i) = n01(rng);
        aa(i) = n01(rng);
    }
    const Eigen::VectorXd per = msfe(fa, aa);
    for (int k = 0; k < 4; ++k) CHECK(per(k) == doctest::Approx(oracle::msfe_loop(fa, aa, k)).epsilon(1e-13));
    const std::vector<int> sel = {1, 3};
    CHECK(msfe(fa, aa, sel) ==
          doctest::Approx(0.5 * (oracle::msfe_loop(fa, aa, 1) + oracle::msfe_loop(fa, aa, 3))).epsilon(1e-13));
}

TEST_CASE("summaries") {
    const std::vector<double> v = {1, 2, 3, 4};
    const Summary s = summarize(v);
    CHECK(s.mean == 2.5);
    CHECK(s.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("forecast_one_step") {
    const Eigen::Vector3d last(1, -2, 3);
    CHECK(forecast_one_step(Eigen::Matrix3d::Identity(), last) == last);
    CHECK(forecast_one_step(Eigen::Matrix3d::Zero(), last).isZero(0.0));
    Eigen::Matrix3d b;
    b << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    const Eigen::VectorXd f = forecast_one_step(b, last);
    for (int i = 0; i < 3; ++i) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j) s += b(i, j) * last(j);
        CHECK(f(i) == s);
    }
}

TEST_CASE("baseline forecasts") {
    const std::vector<double> flat = {2, 2, 2, 2};
    CHECK(baseline_forecasts(flat).random_walk == 2.0);
    const std::vector<double> up = {1, 2, 3};
    CHECK(baseline_forecasts(up).random_walk == 3.0);
    // (1*2 + 2*3) / (1 + 4)
    CHECK(baseline_forecasts(up).ar1_slope == doctest::Approx(8.0 / 5.0));

    std::mt19937_64 rng(12);
    std::normal_distribution<double> n01;
    std::vector<double> ar(20000);
    double y = 0.0;
    for (auto& v : ar) v = y = 0.6 * y + n01(rng);
    CHECK(std::abs(baseline_forecasts(ar).ar1_slope - 0.6) < 0.05);
    const std::vector<double> two = {1, 2};
    CHECK_THROWS_AS(baseline_forecasts(two), InsufficientDataError);
}

TEST_CASE("benchmark estimators") {
    std::mt19937_64 rng(13);
    const auto rp = oracle::random_problem(rng, 4, 30);
    CHECK((fit_ridge(rp.problem, 0.0) - fit_ols(rp.problem)).cwiseAbs().maxCoeff() < 1e-10);

    // Closed form (Z'Z + l I)^{-1} Z'y per equation on a 3 x 3 instance.
    RegressionProblem p;
    p.z = Eigen::MatrixXd(3, 3);
    p.y = Eigen::MatrixXd(3, 3);
    p.z << 1, 2, 0, 0, 1, 1, 1, 0, 1;
    p.y << 1, 0, 2, 3, 1, 0, 0, 1, 1;
    const double l = 0.7;
    const Eigen::MatrixXd inv = (p.z.transpose() * p.z + l * Eigen::Matrix3d::Identity()).inverse();
    const Eigen::MatrixXd r = fit_ridge(p, l);
    for (int e = 0; e < 3; ++e) {
        const Eigen::VectorXd be = inv * p.z.transpose() * p.y.col(e);
        CHECK((r.row(e).transpose() - be).cwiseAbs().maxCoeff() < 1e-12);
    }

    const HierFit lasso = fit_lasso(rp.problem);
    CHECK(lasso.coefs.front().isZero(0.0));
    const int k = rp.scheme.dimension();
    CHECK(fit(rp.problem, NestedGroupStructure::singletons(k), 1e6, Eigen::MatrixXd::Zero(k, k)).coef.isZero(0.0));

    const BenchmarkFits all = benchmark_estimators(rp.problem);
    CHECK(all.ridge.size() == 10);
    CHECK(all.lasso.size() == 10);
    CHECK(all.ols.rows() == k);

    RegressionProblem wide;
    wide.z = Eigen::MatrixXd::Ones(2, 3);
    wide.y = Eigen::MatrixXd::Ones(2, 3);
    CHECK_THROWS(fit_ols(wide));
}

TEST_CASE("cv_rolling: flat error surface selects the first grid index") {
    // 1, 0, -1, 0, ... : every window has mean zero and Z'Y = 0, so every
    // fit is zero and every lambda forecasts the same value.
    Eigen::MatrixXd d(12, 1);
    const double cycle[] = {1, 0, -1, 0};
    for (int t = 0; t < 12; ++t) d(t, 0) = cycle[t % 4];
    const StackedPanel p = make_panel(FrequencyScheme(1, {}), d);
    CvConfig cfg;
    cfg.window = 8;
    const CvResult r = cv_rolling(p, build_structure(p.scheme), {}, cfg);
    CHECK(r.windows.size() == 4);
    for (double s : r.scores) CHECK(s == r.scores[0]);
    CHECK(r.selected == 0);
}

TEST_CASE("cv_rolling: single window and argmin property") {
    const SimConfig sim = synthetic_config(small_system_scheme(), 5, 60, 1);
    const StackedPanel p = simulate_var(sim, 0);
    const auto s = build_structure(sim.scheme);
    CvConfig one;
    one.window = 59;
    const CvResult r1 = cv_rolling(p, s, {}, one);
    CHECK(r1.windows.size() == 1);
    CHECK(r1.windows[0].origin == 58);

    CvConfig cfg;
    cfg.window = 50;
    const CvResult r = cv_rolling(p, s, {}, cfg);
    CHECK(r.windows.size() == 10);
    for (double v : r.scores) CHECK(r.scores[r.selected] <= v);
    CHECK(r.scores[r.selected] <= r.scores.front());
    CHECK(r.scores[r.selected] <= r.scores.back());

    CvConfig big;
    big.window = 60;
    CHECK_THROWS_AS(cv_rolling(p, s, {}, big), InsufficientDataError);
}

TEST_CASE("cv_rolling uses no rows after each window's forecast row") {
    const SimConfig sim = synthetic_config(small_system_scheme(), 6, 70, 1);
    const StackedPanel p = simulate_var(sim, 0);
    const auto s = build_structure(sim.scheme);
    CvConfig cfg;
    cfg.window = 55;
    cfg.last_origin = 62;
    const CvResult base = cv_rolling(p, s, {}, cfg);

    StackedPanel bad = p;
    bad.data.bottomRows(p.rows() - 64).setConstant(1e6);  // rows after the last forecast row
    const CvResult corrupted = cv_rolling(bad, s, {}, cfg);
    CHECK(corrupted.scores == base.scores);
    CHECK(corrupted.selected == base.selected);

    // Each window's forecasts depend on rows <= origin only.
    CvConfig all;
    all.window = 55;
    const CvResult full = cv_rolling(p, s, {}, all);
    StackedPanel future = p;
    future.data.row(60).setConstant(-50.0);
    const CvResult moved = cv_rolling(future, s, {}, all);
    for (std::size_t w = 0; w < full.windows.size(); ++w)
        if (full.windows[w].origin < 60) CHECK(moved.windows[w].forecasts == full.windows[w].forecasts);
}

TEST_CASE("forecast comparison table") {
    const SimConfig sim = synthetic_config(small_system_scheme(), 7, 70, 1);
    const StackedPanel p = simulate_var(sim, 0);
    ForecastConfig cfg;
    cfg.window = 60;
    const ForecastTable t = forecast_comparison(p, build_structure(sim.scheme), {}, cfg);
    CHECK(t.methods == std::vector<std::string>{"hierarchical", "ar1", "rw", "ols"});
    CHECK(t.forecasts.rows() == 10);
    CHECK(t.selected.size() == 10);
    CHECK(t.actual(0) == p.data(60, 0));
    const auto m = t.msfe();
    CHECK(m.size() == 4);
    for (const auto& s : m) CHECK(s.mean >= 0.0);

    ForecastConfig ex = cfg;
    ex.selection = ForecastSelection::Expanding;
    ex.include_ols = false;
    const ForecastTable e = forecast_comparison(p, build_structure(sim.scheme), {}, ex);
    CHECK(e.methods.size() == 3);
    CHECK(e.selected[0] == 0);
    CHECK(e.forecasts.col(1) == t.forecasts.col(1));
}

TEST_CASE("synthetic designs follow their stated structure") {
    const FrequencyScheme scheme = small_system_scheme();
    CHECK(scheme.dimension() == 22);
    const auto s = build_structure(scheme);
    const Eigen::MatrixXd b = make_recency_coefficients(s, 4);
    CHECK(satisfies_hierarchy(b, s));
    CHECK(spectral_radius(b) <= 0.7 + 1e-9);
    CHECK((b.array() != 0.0).count() > 0);
    for (Eigen::Index i = 0; i < b.size(); ++i)
        if (b(i) != 0.0) CHECK(std::abs(b(i)) >= 0.01);

    const Eigen::MatrixXd sig = make_nowcast_covariance(scheme, 4);
    CHECK(sig == sig.transpose());
    CHECK((sig.diagonal().array() == 1.0).all());
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sig).eigenvalues().minCoeff() > 0.0);
    const Eigen::VectorXd row = nowcast_row(sig, build_mask(scheme));
    CHECK(row.size() == 21);
    CHECK((row.array() != 0.0).count() > 0);
    CHECK((row.array() == 0.0).count() > 0);
}

TEST_CASE("destandardize_coef maps a standardized fit back") {
    // y_t = B y_{t-1} in original units equals D B_std D^{-1}.
    Eigen::Matrix2d bstd;
    bstd << 0.5, 0.2, -0.1, 0.3;
    const Eigen::Vector2d sd(2.0, 0.5);
    const Eigen::MatrixXd b = destandardize_coef(bstd, sd);
    const Eigen::Vector2d x(1.0, -3.0);
    const Eigen::Vector2d via_std = sd.asDiagonal() * (bstd * sd.cwiseInverse().asDiagonal() * x);
    CHECK((b * x - via_std).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("design reports have the expected shape") {
    SimConfig sim = synthetic_config(small_system_scheme(), 9, 80, 3);
    const Design1Report d1 = run_design1(sim, {});
    CHECK(d1.reps == 3);
    CHECK(d1.rows.size() == 4);
    for (const auto& row : d1.rows) {
        CHECK(row.best.size() == 3);
        CHECK(row.grid_mean.size() == (row.estimator == Estimator::Ols ? 1u : 10u));
    }
    const Design2Report d2 = run_design2(sim, {}, {}, {}, 4);
    for (const auto& row : d2.rows)
        for (const auto& m : row.best) {
            CHECK(std::isnan(m.mse));
            CHECK(m.mcc >= -1.0);
        }
    const Design3Report d3 = run_design3(sim, {}, {}, {}, 4);
    CHECK(d3.sq_err_plain.rows() == 3);
    CHECK(d3.sq_err_gls.cols() == 22);
    CHECK((d3.sq_err_plain.array() >= 0.0).all());
}
