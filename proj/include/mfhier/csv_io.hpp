#pragma once

// CSV input and output: FRED-MD/QD style series files, plain dated files,
// panel snapshots and dense matrices.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfhier/calendar.hpp"
#include "mfhier/mf_data.hpp"

namespace mfhier {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Splits on commas; surrounding double quotes and whitespace are stripped.
std::vector<std::string> split_csv_line(const std::string& line);
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Shortest text that round-trips the double ("%.17g").
std::string format_number(double x);

struct SeriesFileOptions {
    Frequency frequency = Frequency::Month;
    // Codes from config; they override the file's transform row when both exist.
    std::map<std::string, int> tcodes;
    // Restrict to these ids (in any order); empty keeps every column.
    std::vector<std::string> ids;
};

/// Reads a series file. The FRED layout has a header of ids, then a row whose
/// first cell is "Transform:" (case-insensitive) with the codes; rows whose
/// first cell is not a date (e.g. "factors") are skipped. A plain layout needs
/// the codes in `options.tcodes`. Empty cells are missing; each series runs
/// from its first to its last observation and may not have interior gaps.
std::vector<RawSeries> read_series(std::istream& in, const SeriesFileOptions& options,
                                   const std::string& source = "<stream>");
std::vector<RawSeries> read_series_file(const std::string& path, const SeriesFileOptions& options);

/// Panel snapshot: a "period" column (row number for synthetic panels), then
/// the canonical column names.
void write_panel_csv(std::ostream& out, const StackedPanel& panel);
/// Reads a snapshot written by write_panel_csv; the scheme is recovered from
/// the column names.
StackedPanel read_panel_csv(std::istream& in);
StackedPanel read_panel_file(const std::string& path);

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& header = {});
Eigen::MatrixXd read_matrix_csv(std::istream& in, bool has_header);
Eigen::MatrixXd read_matrix_file(const std::string& path, bool has_header);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mfhier
