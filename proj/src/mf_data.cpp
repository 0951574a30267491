#include "mfhier/mf_data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfhier/errors.hpp"

namespace mfhier {

FrequencyScheme::FrequencyScheme(int low_count, std::vector<FrequencyComponent> components)
    : low_count_(low_count), components_(std::move(components)) {
    if (low_count_ < 1) throw ValidationError("scheme needs at least one low-frequency series");
    for (std::size_t i = 0; i < components_.size(); ++i) {
        const auto& c = components_[i];
        if (c.ratio < 2) throw ValidationError("frequency ratios must be >= 2");
        if (c.count < 1) throw ValidationError("every high-frequency component needs >= 1 series");
        if (i > 0 && components_[i - 1].ratio >= c.ratio)
            throw ValidationError("frequency ratios must be strictly increasing");
    }
    int col = 0;
    for (int v = 0; v < low_count_; ++v) {
        variables_.push_back({1, col, -1});
        col += 1;
    }
    for (std::size_t i = 0; i < components_.size(); ++i) {
        for (int v = 0; v < components_[i].count; ++v) {
            variables_.push_back({components_[i].ratio, col, static_cast<int>(i)});
            col += components_[i].ratio;
        }
    }
    dimension_ = col;
    column_owner_.resize(dimension_);
    for (int v = 0; v < variable_count(); ++v)
        for (int j = 0; j < variables_[v].ratio; ++j) column_owner_[variables_[v].first_column + j] = v;
}

int FrequencyScheme::variable_of_column(int column) const {
    if (column < 0 || column >= dimension_) throw DimensionError("column out of range");
    return column_owner_[column];
}

bool FrequencyScheme::operator==(const FrequencyScheme& o) const {
    if (low_count_ != o.low_count_ || components_.size() != o.components_.size()) return false;
    for (std::size_t i = 0; i < components_.size(); ++i)
        if (components_[i].ratio != o.components_[i].ratio || components_[i].count != o.components_[i].count)
            return false;
    return true;
}

void RawSeries::validate() const {
    if (tcode < 1 || tcode > 6)
        throw ValidationError("series '" + id + "': unknown transformation code " + std::to_string(tcode));
    if (stamps.size() != values.size())
        throw ValidationError("series '" + id + "': stamp and value counts differ");
    for (std::size_t i = 1; i < stamps.size(); ++i)
        if (!(stamps[i - 1] < stamps[i]))
            throw ValidationError("series '" + id + "': stamps not strictly increasing at " +
                                  format_date(stamps[i]));
}

int diff_order(int tcode) {
    static constexpr int orders[] = {0, 1, 2, 0, 1, 2};
    if (tcode < 1 || tcode > 6) throw ValidationError("unknown transformation code " + std::to_string(tcode));
    return orders[tcode - 1];
}

RawSeries apply_tcode(const RawSeries& series) {
    series.validate();
    const int order = diff_order(series.tcode);
    const bool use_log = series.tcode >= 4;
    if (static_cast<int>(series.size()) < order + 1)
        throw InsufficientDataError("series '" + series.id + "': code " + std::to_string(series.tcode) +
                                    " needs at least " + std::to_string(order + 1) + " observations");

    std::vector<double> x = series.values;
    if (use_log) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!(x[i] > 0.0))
                throw DomainError("series '" + series.id + "': non-positive value at index " +
                                  std::to_string(i) + " under log code " + std::to_string(series.tcode));
            x[i] = std::log(x[i]);
        }
    }
    for (int d = 0; d < order; ++d) {
        for (std::size_t i = x.size() - 1; i > 0; --i) x[i] -= x[i - 1];
        x.erase(x.begin());
    }

    RawSeries out = series;
    out.values = std::move(x);
    out.stamps.erase(out.stamps.begin(), out.stamps.begin() + order);
    return out;
}

std::string PanelColumn::name() const {
    if (within_index == 0) return series_id;
    return series_id + "__j" + std::to_string(within_index);
}

std::vector<std::string> StackedPanel::variable_ids() const {
    std::vector<std::string> ids;
    for (const auto& v : scheme.variables()) ids.push_back(columns.at(v.first_column).series_id);
    return ids;
}

int StackedPanel::column_index(const std::string& series_id, int within_index) const {
    for (int c = 0; c < cols(); ++c)
        if (columns[c].series_id == series_id &&
            (columns[c].within_index == within_index || (columns[c].within_index == 0 && within_index <= 1)))
            return c;
    throw ValidationError("no panel column for '" + series_id + "' j=" + std::to_string(within_index));
}

StackedPanel StackedPanel::slice_rows(int begin, int end) const {
    if (begin < 0 || end > rows() || begin > end) throw DimensionError("row slice out of range");
    StackedPanel out = *this;
    out.data = data.middleRows(begin, end - begin);
    if (!periods.empty())
        out.periods = std::vector<PeriodKey>(periods.begin() + begin, periods.begin() + end);
    return out;
}

StackedPanel StackedPanel::with_data(Eigen::MatrixXd new_data) const {
    if (new_data.cols() != data.cols()) throw DimensionError("panel width mismatch");
    StackedPanel out = *this;
    if (new_data.rows() != data.rows()) out.periods.clear();
    out.data = std::move(new_data);
    return out;
}

StackedPanel make_panel(const FrequencyScheme& scheme, Eigen::MatrixXd data,
                        std::vector<std::string> variable_ids) {
    if (data.cols() != scheme.dimension())
        throw DimensionError("panel has " + std::to_string(data.cols()) + " columns, scheme needs " +
                             std::to_string(scheme.dimension()));
    const auto& vars = scheme.variables();
    if (variable_ids.empty()) {
        std::vector<int> seen(scheme.components().size(), 0);
        for (const auto& v : vars) {
            if (v.component < 0)
                variable_ids.push_back("L" + std::to_string(v.first_column + 1));
            else
                variable_ids.push_back("H" + std::to_string(v.component + 1) + "_" +
                                       std::to_string(++seen[v.component]));
        }
    }
    if (variable_ids.size() != vars.size()) throw DimensionError("variable id count mismatch");

    StackedPanel p;
    p.scheme = scheme;
    p.data = std::move(data);
    for (std::size_t v = 0; v < vars.size(); ++v) {
        if (vars[v].ratio == 1) {
            p.columns.push_back({variable_ids[v], 1, 0});
        } else {
            for (int j = vars[v].ratio; j >= 1; --j) p.columns.push_back({variable_ids[v], vars[v].ratio, j});
        }
    }
    return p;
}

namespace {

int series_ratio(const RawSeries& s, const Calendar& cal) {
    return frequency_ratio(cal.low, s.frequency);
}

}  // namespace

FrequencyScheme infer_scheme(std::span<const RawSeries> series, const Calendar& calendar) {
    int low = 0;
    std::map<int, int> counts;
    for (const auto& s : series) {
        int m = series_ratio(s, calendar);
        if (m == 1)
            ++low;
        else
            ++counts[m];
    }
    std::vector<FrequencyComponent> comps;
    for (auto [m, k] : counts) comps.push_back({m, k});
    return FrequencyScheme(low, std::move(comps));
}

StackedPanel stack_panel(std::span<const RawSeries> series, const FrequencyScheme& scheme,
                         const Calendar& calendar) {
    if (series.empty()) throw ValidationError("no series to stack");
    for (const auto& s : series) s.validate();
    if (!(infer_scheme(series, calendar) == scheme))
        throw ValidationError("series frequencies do not match the declared scheme");

    // Canonical order: low-frequency series first, then by ratio, ids sorted within a class.
    std::vector<const RawSeries*> ordered;
    for (const auto& s : series) ordered.push_back(&s);
    std::stable_sort(ordered.begin(), ordered.end(), [&](const RawSeries* a, const RawSeries* b) {
        int ma = series_ratio(*a, calendar), mb = series_ratio(*b, calendar);
        if (ma != mb) return ma < mb;
        return a->id < b->id;
    });
    for (std::size_t i = 1; i < ordered.size(); ++i)
        if (ordered[i]->id == ordered[i - 1]->id)
            throw ValidationError("duplicate series id '" + ordered[i]->id + "'");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::map<PeriodKey, std::vector<double>>> slots(ordered.size());

    for (std::size_t si = 0; si < ordered.size(); ++si) {
        const RawSeries& s = *ordered[si];
        const int m = series_ratio(s, calendar);
        auto& table = slots[si];
        auto put = [&](const Date& d, int j, double value) {
            auto& row = table.try_emplace(period_of(d, calendar.low), std::vector<double>(m, nan)).first->second;
            if (!std::isnan(row[j - 1]))
                throw AlignmentError("series '" + s.id + "': two observations for " +
                                     format_period(period_of(d, calendar.low), calendar.low) + " j=" +
                                     std::to_string(j));
            row[j - 1] = value;
        };

        if (s.frequency == Frequency::Week) {
            // Group weekly stamps by calendar month; keep the latest four.
            std::size_t i = 0;
            while (i < s.size()) {
                std::size_t k = i;
                while (k < s.size() && s.stamps[k].year == s.stamps[i].year && s.stamps[k].month == s.stamps[i].month)
                    ++k;
                std::size_t n = k - i;
                std::size_t skip = 0;
                if (n > 4) {
                    if (!calendar.trim_weeks)
                        throw AlignmentError("series '" + s.id + "': " + std::to_string(n) + " weeks in " +
                                             format_date(s.stamps[i]).substr(0, 7) + " and trimming is off");
                    skip = n - 4;
                }
                const int month_pos = month_in_period(s.stamps[i], calendar.low);
                for (std::size_t w = skip; w < n; ++w) {
                    int rank = static_cast<int>(w - skip) + 1;
                    put(s.stamps[i + w], (month_pos - 1) * 4 + rank, s.values[i + w]);
                }
                i = k;
            }
        } else {
            for (std::size_t i = 0; i < s.size(); ++i)
                put(s.stamps[i], within_period_index(s.stamps[i], calendar.low, s.frequency), s.values[i]);
        }
    }

    auto complete = [](const std::vector<double>& row) {
        return std::none_of(row.begin(), row.end(), [](double v) { return std::isnan(v); });
    };

    std::optional<PeriodKey> first, last;
    for (std::size_t si = 0; si < ordered.size(); ++si) {
        std::optional<PeriodKey> f, l;
        for (const auto& [key, row] : slots[si]) {
            if (!complete(row)) continue;
            if (!f) f = key;
            l = key;
        }
        if (!f) throw AlignmentError("series '" + ordered[si]->id + "' has no fully observed period");
        if (!first || *first < *f) first = f;
        if (!last || *l < *last) last = l;
    }
    if (*last < *first) throw AlignmentError("series have no overlapping calendar coverage");

    std::vector<PeriodKey> periods;
    for (PeriodKey p = *first; p <= *last; p = next_period(p, calendar.low)) periods.push_back(p);

    std::vector<std::string> ids;
    for (const auto* s : ordered) ids.push_back(s->id);
    StackedPanel panel = make_panel(scheme, Eigen::MatrixXd::Zero(periods.size(), scheme.dimension()), ids);
    panel.low_frequency = calendar.low;
    panel.periods = periods;

    const auto& vars = scheme.variables();
    for (std::size_t t = 0; t < periods.size(); ++t) {
        for (std::size_t si = 0; si < ordered.size(); ++si) {
            auto it = slots[si].find(periods[t]);
            if (it == slots[si].end() || !complete(it->second))
                throw AlignmentError("period " + format_period(periods[t], calendar.low) + ": series '" +
                                     ordered[si]->id + "' is missing observations");
            const auto& row = it->second;
            const int m = static_cast<int>(row.size());
            for (int j = m; j >= 1; --j) panel.data(t, vars[si].first_column + (m - j)) = row[j - 1];
        }
    }
    return panel;
}

std::map<std::string, std::vector<double>> unstack_panel(const StackedPanel& panel) {
    std::map<std::string, std::vector<double>> out;
    const auto ids = panel.variable_ids();
    const auto& vars = panel.scheme.variables();
    for (std::size_t v = 0; v < vars.size(); ++v) {
        auto& seq = out[ids[v]];
        const int m = vars[v].ratio;
        for (int t = 0; t < panel.rows(); ++t)
            for (int j = 1; j <= m; ++j) seq.push_back(panel.data(t, vars[v].first_column + (m - j)));
    }
    return out;
}

Eigen::MatrixXd RegressionProblem::transformed_response() const {
    if (!channel_mix) return y;
    return y * channel_mix->transpose();
}

RegressionProblem build_problem(const Eigen::MatrixXd& data) {
    if (data.rows() < 2)
        throw InsufficientDataError("need at least two periods to build a lag-one problem, got " +
                                    std::to_string(data.rows()));
    const Eigen::Index n = data.rows() - 1;
    return {data.bottomRows(n), data.topRows(n), std::nullopt};
}

RegressionProblem build_problem(const StackedPanel& panel) { return build_problem(panel.data); }

Eigen::MatrixXd StandardizationStats::apply(const Eigen::MatrixXd& data) const {
    return (data.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
}

Eigen::MatrixXd StandardizationStats::invert(const Eigen::MatrixXd& data) const {
    Eigen::MatrixXd out = data.array().rowwise() * sd.transpose().array();
    return out.rowwise() + mean.transpose();
}

Eigen::VectorXd StandardizationStats::invert_row(const Eigen::VectorXd& row) const {
    return row.cwiseProduct(sd) + mean;
}

StandardizationStats compute_stats(const Eigen::MatrixXd& data, RowRange window,
                                   const std::vector<PanelColumn>* columns) {
    if (window.begin < 0 || window.end > data.rows() || window.size() < 2)
        throw InsufficientDataError("standardization window needs at least two rows inside the panel");
    const auto block = data.middleRows(window.begin, window.size());
    StandardizationStats st;
    st.window = window;
    st.mean = block.colwise().mean().transpose();
    st.sd.resize(data.cols());
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        double ss = (block.col(c).array() - st.mean(c)).square().sum();
        st.sd(c) = std::sqrt(ss / (window.size() - 1));
        if (!(st.sd(c) > 0.0)) {
            std::string name = columns ? (*columns)[c].name() : "column " + std::to_string(c);
            throw DegenerateError("zero variance in " + name + " over the standardization window");
        }
    }
    return st;
}

std::pair<StackedPanel, StandardizationStats> standardize(const StackedPanel& panel, RowRange window) {
    auto st = compute_stats(panel.data, window, &panel.columns);
    StackedPanel out = panel;
    out.data = st.apply(panel.data);
    return {std::move(out), std::move(st)};
}

StackedPanel destandardize(const StackedPanel& panel, const StandardizationStats& stats) {
    StackedPanel out = panel;
    out.data = stats.invert(panel.data);
    return out;
}

}  // namespace mfhier
