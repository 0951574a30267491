#include "mfhier/csv_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "mfhier/errors.hpp"

namespace mfhier {

namespace {

std::string trim(std::string s) {
    auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool parse_double(const std::string& text, double& out) {
    if (text.empty()) return false;
    const char* b = text.data();
    const char* e = b + text.size();
    if (*b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc{} && ptr == e;
}

bool is_missing(const std::string& cell) {
    const std::string l = lower(cell);
    return l.empty() || l == "na" || l == "nan" || l == "." || l == "#n/a";
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return in;
}

bool try_parse_date(const std::string& text, Date& out) {
    try {
        out = parse_date(text);
        return true;
    } catch (const ValidationError&) {
        return false;
    }
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            cells.push_back(trim(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (first) {
            table.header = std::move(cells);
            first = false;
        } else {
            cells.resize(std::max(cells.size(), table.header.size()));
            table.rows.push_back(std::move(cells));
        }
    }
    if (first) throw ValidationError("empty CSV input");
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    auto in = open_input(path);
    return read_csv(in);
}

std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<RawSeries> read_series(std::istream& in, const SeriesFileOptions& options, const std::string& source) {
    CsvTable table = read_csv(in);
    if (table.header.size() < 2) throw ValidationError(source + ": expected a date column and at least one series");

    std::map<std::string, int> file_codes;
    std::vector<std::pair<Date, const std::vector<std::string>*>> dated;
    for (const auto& row : table.rows) {
        const std::string tag = lower(row[0]);
        if (tag.rfind("transform", 0) == 0) {
            for (std::size_t c = 1; c < table.header.size(); ++c) {
                double code = 0;
                if (!row[c].empty() && parse_double(row[c], code)) file_codes[table.header[c]] = static_cast<int>(code);
            }
            continue;
        }
        Date d;
        if (!try_parse_date(row[0], d)) continue;  // "factors" and similar annotation rows
        dated.emplace_back(d, &row);
    }
    std::sort(dated.begin(), dated.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<std::size_t> picks;
    if (options.ids.empty()) {
        for (std::size_t c = 1; c < table.header.size(); ++c) picks.push_back(c);
    } else {
        for (const auto& id : options.ids) {
            auto it = std::find(table.header.begin() + 1, table.header.end(), id);
            if (it == table.header.end()) throw ValidationError(source + ": no column '" + id + "'");
            picks.push_back(static_cast<std::size_t>(it - table.header.begin()));
        }
    }

    std::vector<RawSeries> out;
    for (std::size_t c : picks) {
        RawSeries s;
        s.id = table.header[c];
        s.frequency = options.frequency;
        if (auto it = options.tcodes.find(s.id); it != options.tcodes.end())
            s.tcode = it->second;
        else if (auto jt = file_codes.find(s.id); jt != file_codes.end())
            s.tcode = jt->second;
        else
            throw ValidationError(source + ": no transformation code for '" + s.id +
                                  "' (no transform row and none in config)");

        std::size_t first = dated.size(), last = 0;
        for (std::size_t r = 0; r < dated.size(); ++r) {
            if (!is_missing((*dated[r].second)[c])) {
                first = std::min(first, r);
                last = r;
            }
        }
        if (first == dated.size()) throw InsufficientDataError(source + ": series '" + s.id + "' has no observations");
        for (std::size_t r = first; r <= last; ++r) {
            const std::string& cell = (*dated[r].second)[c];
            if (is_missing(cell))
                throw AlignmentError(source + ": series '" + s.id + "' is missing an interior observation at " +
                                     format_date(dated[r].first));
            double v = 0;
            if (!parse_double(cell, v))
                throw ValidationError(source + ": series '" + s.id + "' has non-numeric value '" + cell + "' at " +
                                      format_date(dated[r].first));
            s.stamps.push_back(dated[r].first);
            s.values.push_back(v);
        }
        s.validate();
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<RawSeries> read_series_file(const std::string& path, const SeriesFileOptions& options) {
    auto in = open_input(path);
    return read_series(in, options, path);
}

void write_panel_csv(std::ostream& out, const StackedPanel& panel) {
    out << "period";
    for (const auto& c : panel.columns) out << ',' << c.name();
    out << '\n';
    for (int t = 0; t < panel.rows(); ++t) {
        if (panel.low_frequency && t < static_cast<int>(panel.periods.size()))
            out << format_period(panel.periods[t], *panel.low_frequency);
        else
            out << t + 1;
        for (int k = 0; k < panel.cols(); ++k) out << ',' << format_number(panel.data(t, k));
        out << '\n';
    }
}

StackedPanel read_panel_csv(std::istream& in) {
    CsvTable table = read_csv(in);
    if (table.header.size() < 2 || lower(table.header[0]) != "period")
        throw ValidationError("panel CSV must start with a 'period' column");

    // Recover variables in column order; a variable's columns must run j = m..1.
    struct Var {
        std::string id;
        int ratio = 1;
        int first = 0;
    };
    std::vector<Var> vars;
    std::vector<PanelColumn> columns;
    for (std::size_t c = 1; c < table.header.size(); ++c) {
        const std::string& name = table.header[c];
        auto pos = name.rfind("__j");
        PanelColumn col;
        if (pos == std::string::npos) {
            col = {name, 1, 0};
        } else {
            int j = 0;
            const std::string digits = name.substr(pos + 3);
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), j);
            if (ec != std::errc{} || ptr != digits.data() + digits.size() || j < 1)
                throw ValidationError("bad panel column name '" + name + "'");
            col = {name.substr(0, pos), 0, j};
        }
        const int k = static_cast<int>(c) - 1;
        if (vars.empty() || vars.back().id != col.series_id || col.within_index == 0) {
            vars.push_back({col.series_id, col.within_index == 0 ? 1 : col.within_index, k});
            if (col.within_index == 0) {
                columns.push_back(col);
                continue;
            }
        } else if (col.within_index != columns.back().within_index - 1) {
            throw ValidationError("panel columns of '" + col.series_id + "' are not ordered j = m..1");
        }
        columns.push_back(col);
    }
    for (auto& v : vars) {
        if (v.ratio > 1 && columns[v.first + v.ratio - 1].within_index != 1)
            throw ValidationError("panel columns of '" + v.id + "' do not end at j = 1");
        for (int j = 0; j < v.ratio; ++j)
            if (v.ratio > 1) columns[v.first + j].ratio = v.ratio;
    }

    int low = 0;
    std::vector<FrequencyComponent> comps;
    std::vector<std::string> ids;
    for (const auto& v : vars) {
        ids.push_back(v.id);
        if (v.ratio == 1) {
            if (!comps.empty()) throw ValidationError("low-frequency columns must come first");
            ++low;
        } else if (comps.empty() || comps.back().ratio != v.ratio) {
            comps.push_back({v.ratio, 1});
        } else {
            ++comps.back().count;
        }
    }
    FrequencyScheme scheme(low, comps);

    Eigen::MatrixXd data(static_cast<Eigen::Index>(table.rows.size()), scheme.dimension());
    std::vector<std::string> labels;
    for (std::size_t t = 0; t < table.rows.size(); ++t) {
        labels.push_back(table.rows[t][0]);
        for (int k = 0; k < scheme.dimension(); ++k) {
            const std::string& cell = table.rows[t][k + 1];
            if (!parse_double(cell, data(t, k)))
                throw ValidationError("panel row " + std::to_string(t + 1) + ": bad value '" + cell + "'");
        }
    }
    StackedPanel panel = make_panel(scheme, std::move(data), ids);

    // Period labels: 2019Q1 (quarterly) or 2019-01 (monthly); anything else leaves the rows unlabeled.
    std::optional<Frequency> freq;
    std::vector<PeriodKey> periods;
    for (const auto& l : labels) {
        PeriodKey p;
        Frequency f;
        int a = 0, b = 0;
        char tail = 0;
        if (std::sscanf(l.c_str(), "%4dQ%d%c", &a, &b, &tail) == 2 && b >= 1 && b <= 4) {
            f = Frequency::Quarter;
            p = {a, b - 1};
        } else if (l.size() == 7 && std::sscanf(l.c_str(), "%4d-%2d%c", &a, &b, &tail) == 2 && b >= 1 && b <= 12) {
            f = Frequency::Month;
            p = {a, b - 1};
        } else {
            // Yearly labels are indistinguishable from row numbers and stay unlabeled.
            freq.reset();
            periods.clear();
            break;
        }
        if (freq && *freq != f) {
            freq.reset();
            periods.clear();
            break;
        }
        freq = f;
        periods.push_back(p);
    }
    if (freq) {
        panel.low_frequency = freq;
        panel.periods = std::move(periods);
    }
    return panel;
}

StackedPanel read_panel_file(const std::string& path) {
    auto in = open_input(path);
    try {
        return read_panel_csv(in);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, const std::vector<std::string>& header) {
    if (!header.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
        out << '\n';
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_number(m(i, j));
        out << '\n';
    }
}

Eigen::MatrixXd read_matrix_csv(std::istream& in, bool has_header) {
    std::vector<std::vector<double>> rows;
    std::string line;
    bool skip = has_header;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        if (skip) {
            skip = false;
            continue;
        }
        std::vector<double> row;
        for (const auto& cell : split_csv_line(line)) {
            double v = 0;
            if (!parse_double(cell, v)) throw ValidationError("matrix CSV: bad value '" + cell + "'");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size()) throw DimensionError("matrix CSV: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) return {};
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

Eigen::MatrixXd read_matrix_file(const std::string& path, bool has_header) {
    auto in = open_input(path);
    return read_matrix_csv(in, has_header);
}

void write_text_file(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << text;
}

}  // namespace mfhier
