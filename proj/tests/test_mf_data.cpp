#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

#include "mfhier/errors.hpp"
#include "mfhier/mf_data.hpp"

using namespace mfhier;

namespace {

RawSeries series(const std::string& id, Frequency f, int tcode, std::vector<Date> stamps, std::vector<double> values) {
    RawSeries s;
    s.id = id;
    s.frequency = f;
    s.tcode = tcode;
    s.stamps = std::move(stamps);
    s.values = std::move(values);
    return s;
}

std::vector<Date> months(int year, int first, int n) {
    std::vector<Date> out;
    for (int i = 0; i < n; ++i) out.push_back({year + (first - 1 + i) / 12, (first - 1 + i) % 12 + 1, 1});
    return out;
}

std::vector<Date> quarters(int year, int n) {
    std::vector<Date> out;
    for (int i = 0; i < n; ++i) out.push_back({year + i / 4, 3 * (i % 4) + 1, 1});
    return out;
}

RawSeries coded(int tcode, std::vector<double> values) {
    const int n = static_cast<int>(values.size());
    return series("X", Frequency::Month, tcode, months(2000, 1, n), std::move(values));
}

}  // namespace

TEST_CASE("scheme dimension is k_L + sum m_i k_i") {
    CHECK(FrequencyScheme(1, {{3, 7}}).dimension() == 22);
    CHECK(FrequencyScheme(2, {{3, 3}, {12, 4}}).dimension() == 2 + 9 + 48);
    CHECK(FrequencyScheme(1, {}).dimension() == 1);
    CHECK_THROWS_AS(FrequencyScheme(0, {{3, 1}}), ValidationError);
    CHECK_THROWS_AS(FrequencyScheme(1, {{12, 1}, {3, 1}}), ValidationError);
    CHECK_THROWS_AS(FrequencyScheme(1, {{1, 1}}), ValidationError);
    CHECK_THROWS_AS(FrequencyScheme(1, {{3, 0}}), ValidationError);
}

TEST_CASE("apply_tcode: six codes against hand-computed sequences") {
    const double e = std::exp(1.0);
    auto values = [](const RawSeries& s) { return s.values; };

    CHECK(values(apply_tcode(coded(1, {2, 5, 7}))) == std::vector<double>{2, 5, 7});
    CHECK(values(apply_tcode(coded(2, {2, 5, 7}))) == std::vector<double>{3, 2});
    CHECK(values(apply_tcode(coded(3, {2, 5, 7, 11}))) == std::vector<double>{-1, 2});

    auto near = [](const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (std::abs(a[i] - b[i]) > 1e-12) return false;
        return true;
    };
    CHECK(near(values(apply_tcode(coded(4, {1, e, e * e}))), {0, 1, 2}));
    CHECK(near(values(apply_tcode(coded(5, {1, e, std::pow(e, 3)}))), {1, 2}));
    CHECK(near(values(apply_tcode(coded(6, {1, e, std::pow(e, 3), std::pow(e, 6)}))), {1, 1}));
}

TEST_CASE("apply_tcode drops leading stamps and rejects bad input") {
    const RawSeries out = apply_tcode(coded(3, {1, 2, 4, 8}));
    CHECK(out.stamps.front() == Date{2000, 3, 1});
    CHECK_THROWS_AS(apply_tcode(coded(5, {1, 0, 2})), DomainError);
    CHECK_THROWS_AS(apply_tcode(coded(4, {1, -2})), DomainError);
    CHECK_THROWS_AS(apply_tcode(coded(7, {1, 2})), ValidationError);
    CHECK_THROWS_AS(apply_tcode(coded(3, {1, 2})), InsufficientDataError);
}

TEST_CASE("apply_tcode length shrinks by the differencing order") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int code = 1; code <= 6; ++code) {
        for (int n = 3; n < 12; ++n) {
            std::vector<double> v(n);
            for (auto& x : v) x = u(rng);
            const auto out = apply_tcode(coded(code, v));
            CHECK(out.size() == v.size() - diff_order(code));
            CHECK(out.stamps.size() == out.values.size());
        }
    }
}

TEST_CASE("stack_panel: quarter plus month, newest month first") {
    Calendar cal;
    std::vector<RawSeries> s = {series("GDP", Frequency::Quarter, 1, quarters(2001, 2), {10, 20}),
                                series("IP", Frequency::Month, 1, months(2001, 1, 6), {1, 2, 3, 4, 5, 6})};
    const FrequencyScheme scheme = infer_scheme(s, cal);
    REQUIRE(scheme.dimension() == 4);
    const StackedPanel p = stack_panel(s, scheme, cal);
    REQUIRE(p.rows() == 2);
    CHECK(p.columns[0].name() == "GDP");
    CHECK(p.columns[1].name() == "IP__j3");
    CHECK(p.columns[3].name() == "IP__j1");
    CHECK(p.data.row(0) == Eigen::RowVector4d(10, 3, 2, 1));
    CHECK(p.data.row(1) == Eigen::RowVector4d(20, 6, 5, 4));
}

TEST_CASE("stack_panel: canonical order ignores input order") {
    Calendar cal;
    std::vector<RawSeries> s = {series("B", Frequency::Month, 1, months(2001, 1, 6), {1, 2, 3, 4, 5, 6}),
                                series("GDP", Frequency::Quarter, 1, quarters(2001, 2), {10, 20}),
                                series("A", Frequency::Month, 1, months(2001, 1, 6), {7, 8, 9, 10, 11, 12})};
    std::vector<RawSeries> r(s.rbegin(), s.rend());
    const auto scheme = infer_scheme(s, cal);
    const StackedPanel p1 = stack_panel(s, scheme, cal);
    const StackedPanel p2 = stack_panel(r, scheme, cal);
    CHECK(p1.data == p2.data);
    CHECK(p1.variable_ids() == std::vector<std::string>{"GDP", "A", "B"});
}

TEST_CASE("stack_panel keeps only fully observed periods and unstacks back") {
    Calendar cal;
    // Months start in February: the first quarter is incomplete.
    std::vector<RawSeries> s = {series("GDP", Frequency::Quarter, 1, quarters(2001, 3), {1, 2, 3}),
                                series("IP", Frequency::Month, 1, months(2001, 2, 8), {1, 2, 3, 4, 5, 6, 7, 8})};
    const StackedPanel p = stack_panel(s, infer_scheme(s, cal), cal);
    REQUIRE(p.rows() == 2);
    CHECK(p.data(0, 0) == 2.0);
    const auto un = unstack_panel(p);
    CHECK(un.at("IP") == std::vector<double>{3, 4, 5, 6, 7, 8});
    CHECK(un.at("GDP") == std::vector<double>{2, 3});
}

TEST_CASE("stack_panel reports an interior gap") {
    Calendar cal;
    std::vector<Date> st = months(2001, 1, 9);
    st.erase(st.begin() + 4);  // May missing
    std::vector<RawSeries> s = {series("GDP", Frequency::Quarter, 1, quarters(2001, 3), {1, 2, 3}),
                                series("IP", Frequency::Month, 1, st, {1, 2, 3, 4, 6, 7, 8, 9})};
    CHECK_THROWS_AS(stack_panel(s, infer_scheme(s, cal), cal), AlignmentError);
}

TEST_CASE("week trimming drops the earliest week of a five-week month") {
    Calendar cal;
    // 1999Q1 Fridays: January has five (1, 8, 15, 22, 29).
    std::vector<Date> weeks = {{1999, 1, 1}, {1999, 1, 8}, {1999, 1, 15}, {1999, 1, 22}, {1999, 1, 29},
                               {1999, 2, 5}, {1999, 2, 12}, {1999, 2, 19}, {1999, 2, 26},
                               {1999, 3, 5}, {1999, 3, 12}, {1999, 3, 19}, {1999, 3, 26}};
    std::vector<double> v(weeks.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    std::vector<RawSeries> s = {series("GDP", Frequency::Quarter, 1, {{1999, 1, 1}}, {5}),
                                series("M2", Frequency::Week, 1, weeks, v)};
    const FrequencyScheme scheme = infer_scheme(s, cal);
    REQUIRE(scheme.dimension() == 13);
    const StackedPanel p = stack_panel(s, scheme, cal);
    REQUIRE(p.rows() == 1);
    // j = 12 .. 1 holds weeks 12 .. 1 after dropping value 0 (January 1).
    for (int j = 1; j <= 12; ++j) CHECK(p.data(0, p.column_index("M2", j)) == static_cast<double>(j));

    Calendar strict = cal;
    strict.trim_weeks = false;
    CHECK_THROWS_AS(stack_panel(s, scheme, strict), AlignmentError);
}

TEST_CASE("build_problem: Y = rows 2..T, Z = rows 1..T-1") {
    Eigen::MatrixXd d(3, 2);
    d << 1, 2, 3, 4, 5, 6;
    const RegressionProblem p = build_problem(d);
    CHECK(p.samples() == 2);
    CHECK(p.y == d.bottomRows(2));
    CHECK(p.z == d.topRows(2));
    CHECK(build_problem(d.topRows(2)).samples() == 1);
    CHECK_THROWS_AS(build_problem(d.topRows(1)), InsufficientDataError);
}

TEST_CASE("standardize: two points, round trip and window semantics") {
    const FrequencyScheme scheme(1, {});
    Eigen::MatrixXd d(2, 1);
    d << 1, 3;
    auto [s, st] = standardize(make_panel(scheme, d), {0, 2});
    CHECK(st.mean(0) == doctest::Approx(2.0));
    CHECK(st.sd(0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(s.data(0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)));
    CHECK(s.data(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));

    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd x(20, 4);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = 3.0 + 2.0 * n01(rng);
    const StackedPanel p = make_panel(FrequencyScheme(1, {{3, 1}}), x);
    auto [z, stats] = standardize(p, {5, 15});
    CHECK((destandardize(z, stats).data - x).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd w = z.data.middleRows(5, 10);
    CHECK(w.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
    for (int c = 0; c < 4; ++c) CHECK(std::sqrt(w.col(c).squaredNorm() / 9.0) == doctest::Approx(1.0));
    // Rows outside the window use the window's statistics.
    CHECK(z.data(0, 0) == doctest::Approx((x(0, 0) - stats.mean(0)) / stats.sd(0)));

    Eigen::MatrixXd flat = x;
    flat.col(2).setConstant(1.0);
    CHECK_THROWS_AS(standardize(make_panel(FrequencyScheme(1, {{3, 1}}), flat), {0, 20}), DegenerateError);
}
