#pragma once

// JSON run configuration shared by the command-line subcommands.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfhier/calendar.hpp"
#include "mfhier/hier_penalty.hpp"
#include "mfhier/prox_solver.hpp"
#include "mfhier/sparse_cov.hpp"

namespace mfhier {

struct InputSpec {
    std::string path;
    Frequency frequency = Frequency::Month;
    std::vector<std::string> ids;       // empty: every column of the file
    std::map<std::string, int> tcodes;  // required for files without a transform row
};

struct RunConfig {
    std::vector<InputSpec> inputs;  // raw series files (transform, and any command given no panel)
    std::string panel;              // stacked panel snapshot
    Calendar calendar;
    PolicySet policies;
    SolverConfig solver;
    CovConfig cov;
    int sigma_grid_len = 10;
    double sigma_grid_ratio = 0.01;

    int cv_window = 105;
    std::string target;                          // series id; empty: first low-frequency series
    std::string forecast_selection = "per_window";  // or "expanding"
    std::optional<double> lambda;                // fixed lambda for fit (skips CV)

    int design = 1;
    int reps = 100;
    int length = 0;  // 0: the design's default T
    std::uint64_t seed = 1;

    std::string schedule;    // release schedule JSON for nowcast
    std::string categories;  // category map CSV for network
    std::string coef;        // coefficient CSV for network (otherwise fitted)

    std::string output_dir = "out";
    int threads = 0;  // 0: MFHIER_THREADS or every core

    void validate() const;
};

/// Relative paths are resolved against `base_dir`.
RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir = "");
RunConfig load_run_config(const std::string& path);

/// Canonical JSON of every setting; the manifest hashes this text.
std::string canonical_json(const RunConfig& config);
/// 64-bit FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace mfhier
