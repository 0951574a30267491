#pragma once

// Mixed-frequency data model: frequency schemes, raw series with FRED
// transformation codes, the stacked (newest-first) panel and the lag-one
// regression problem built from it.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfhier/calendar.hpp"

namespace mfhier {

struct FrequencyComponent {
    int ratio = 0;  // high-frequency observations per low-frequency period
    int count = 0;  // number of series at this frequency
};

class FrequencyScheme {
public:
    struct Variable {
        int ratio = 1;         // 1 for low-frequency variables
        int first_column = 0;  // first column of the variable in the stacked vector
        int component = -1;    // -1 for low frequency, else index into components()
    };

    FrequencyScheme() = default;
    FrequencyScheme(int low_count, std::vector<FrequencyComponent> components);

    int low_count() const { return low_count_; }
    const std::vector<FrequencyComponent>& components() const { return components_; }

    /// K = k_L + sum_i m_i k_i
    int dimension() const { return dimension_; }
    int variable_count() const { return static_cast<int>(variables_.size()); }
    const std::vector<Variable>& variables() const { return variables_; }

    /// Variable owning a stacked column.
    int variable_of_column(int column) const;

    bool operator==(const FrequencyScheme& o) const;

private:
    int low_count_ = 0;
    std::vector<FrequencyComponent> components_;
    std::vector<Variable> variables_;
    std::vector<int> column_owner_;
    int dimension_ = 0;
};

struct RawSeries {
    std::string id;
    Frequency frequency = Frequency::Month;
    int tcode = 1;
    std::vector<Date> stamps;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    void validate() const;
};

/// Differencing order of a transformation code: (0,1,2,0,1,2) for codes 1..6.
int diff_order(int tcode);

/// FRED transformation: 1 level, 2 diff, 3 second diff, 4 log, 5 diff log,
/// 6 second diff log. Leading undefined observations are dropped.
RawSeries apply_tcode(const RawSeries& series);

struct PanelColumn {
    std::string series_id;
    int ratio = 1;         // 1 for low-frequency columns
    int within_index = 0;  // j in {m,...,1}; 0 marks a low-frequency column

    /// `<id>__j<k>` for high-frequency columns, `<id>` for low-frequency ones.
    std::string name() const;
};

struct StackedPanel {
    FrequencyScheme scheme;
    std::optional<Frequency> low_frequency;  // absent for synthetic panels
    std::vector<PeriodKey> periods;          // one per row when calendar-based
    std::vector<PanelColumn> columns;
    Eigen::MatrixXd data;  // T x K

    int rows() const { return static_cast<int>(data.rows()); }
    int cols() const { return static_cast<int>(data.cols()); }

    /// Ids of the scheme's variables in stacking order.
    std::vector<std::string> variable_ids() const;
    int column_index(const std::string& series_id, int within_index) const;

    StackedPanel slice_rows(int begin, int end) const;
    StackedPanel with_data(Eigen::MatrixXd new_data) const;
};

/// Panel for data without a calendar (simulations); ids default to L1.., H<c>_<k>.
StackedPanel make_panel(const FrequencyScheme& scheme, Eigen::MatrixXd data,
                        std::vector<std::string> variable_ids = {});

/// Scheme implied by a set of series under a calendar.
FrequencyScheme infer_scheme(std::span<const RawSeries> series, const Calendar& calendar);

StackedPanel stack_panel(std::span<const RawSeries> series, const FrequencyScheme& scheme,
                         const Calendar& calendar);

/// Chronological values per variable id, recovered from the stacked layout.
std::map<std::string, std::vector<double>> unstack_panel(const StackedPanel& panel);

/// Lag-one regression: Y holds panel rows 2..T, Z rows 1..T-1. The design
/// X = I_K (x) Z is never formed. `channel_mix` (A) is set by the GLS
/// transform; the loss is then 1/2 ||(Y - Z B') A'||_F^2.
struct RegressionProblem {
    Eigen::MatrixXd y;
    Eigen::MatrixXd z;
    std::optional<Eigen::MatrixXd> channel_mix;

    int samples() const { return static_cast<int>(y.rows()); }
    int dimension() const { return static_cast<int>(y.cols()); }
    Eigen::MatrixXd transformed_response() const;
};

RegressionProblem build_problem(const StackedPanel& panel);
RegressionProblem build_problem(const Eigen::MatrixXd& data);

struct RowRange {
    int begin = 0;
    int end = 0;  // exclusive
    int size() const { return end - begin; }
};

struct StandardizationStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;  // sample sd, (n-1) denominator
    RowRange window;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& data) const;
    Eigen::MatrixXd invert(const Eigen::MatrixXd& data) const;
    Eigen::VectorXd invert_row(const Eigen::VectorXd& row) const;
};

StandardizationStats compute_stats(const Eigen::MatrixXd& data, RowRange window,
                                   const std::vector<PanelColumn>* columns = nullptr);

std::pair<StackedPanel, StandardizationStats> standardize(const StackedPanel& panel, RowRange window);
StackedPanel destandardize(const StackedPanel& panel, const StandardizationStats& stats);

}  // namespace mfhier
