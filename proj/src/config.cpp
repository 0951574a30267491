#include "mfhier/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mfhier/errors.hpp"

namespace mfhier {

namespace {

using nlohmann::json;

std::string resolve(const std::string& base, const std::string& p) {
    if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
    return (std::filesystem::path(base) / p).lexically_normal().string();
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

void require_object(const json& j, const char* what) {
    if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError("unknown config key '" + it.key() + "' in " + where);
    }
}

}  // namespace

void RunConfig::validate() const {
    solver.validate();
    if (!(cov.delta > 0.0)) throw ConfigError("cov.delta must be positive");
    if (!(cov.rho > 0.0)) throw ConfigError("cov.rho must be positive");
    if (cov.max_iter < 1) throw ConfigError("cov.max_iter must be >= 1");
    if (!(cov.tol > 0.0)) throw ConfigError("cov.tol must be positive");
    if (sigma_grid_len < 1) throw ConfigError("cov.grid_len must be >= 1");
    if (!(sigma_grid_ratio > 0.0 && sigma_grid_ratio < 1.0)) throw ConfigError("cov.grid_ratio must lie in (0, 1)");
    if (cv_window < 3) throw ConfigError("cv.window must be >= 3");
    if (forecast_selection != "per_window" && forecast_selection != "expanding")
        throw ConfigError("cv.selection must be 'per_window' or 'expanding'");
    if (lambda && !(*lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    if (design < 1 || design > 3) throw ConfigError("simulate.design must be 1, 2 or 3");
    if (reps < 1) throw ConfigError("simulate.reps must be >= 1");
    if (length != 0 && length < 4) throw ConfigError("simulate.length must be >= 4");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    auto exists = [](const std::string& p, const char* what) {
        if (!p.empty() && !std::filesystem::exists(p))
            throw ConfigError(std::string(what) + " '" + p + "' does not exist");
    };
    for (const auto& in : inputs) exists(in.path, "input");
    exists(panel, "panel");
    exists(schedule, "release schedule");
    exists(categories, "category map");
    exists(coef, "coefficient file");
}

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    require_object(j, "config");
    check_keys(j,
               {"inputs", "panel", "low_frequency", "trim_weeks", "policies", "solver", "cov", "cv", "lambda",
                "simulate", "nowcast", "network", "seed", "output_dir", "threads"},
               "the top level");

    RunConfig c;
    if (j.contains("inputs")) {
        if (!j["inputs"].is_array()) throw ConfigError("'inputs' must be an array");
        for (const auto& in : j["inputs"]) {
            require_object(in, "an input");
            check_keys(in, {"path", "frequency", "ids", "tcodes"}, "an input");
            InputSpec s;
            read(in, "path", s.path);
            if (s.path.empty()) throw ConfigError("every input needs a 'path'");
            s.path = resolve(base_dir, s.path);
            std::string f = "month";
            read(in, "frequency", f);
            s.frequency = parse_frequency(f);
            read(in, "ids", s.ids);
            read(in, "tcodes", s.tcodes);
            c.inputs.push_back(std::move(s));
        }
    }
    read(j, "panel", c.panel);
    c.panel = resolve(base_dir, c.panel);
    if (j.contains("low_frequency")) c.calendar.low = parse_frequency(j["low_frequency"].get<std::string>());
    read(j, "trim_weeks", c.calendar.trim_weeks);

    if (j.contains("policies")) {
        const auto& p = j["policies"];
        require_object(p, "'policies'");
        check_keys(p, {"own", "higher_on_lower", "lower_on_higher"}, "'policies'");
        if (p.contains("own")) c.policies.own = parse_policy(p["own"].get<std::string>());
        if (p.contains("higher_on_lower")) c.policies.higher_on_lower = parse_policy(p["higher_on_lower"].get<std::string>());
        if (p.contains("lower_on_higher")) c.policies.lower_on_higher = parse_policy(p["lower_on_higher"].get<std::string>());
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        require_object(s, "'solver'");
        check_keys(s, {"epsilon", "max_iter", "grid_len", "grid_ratio"}, "'solver'");
        read(s, "epsilon", c.solver.epsilon);
        read(s, "max_iter", c.solver.max_iter);
        read(s, "grid_len", c.solver.grid_len);
        read(s, "grid_ratio", c.solver.grid_ratio);
    }
    if (j.contains("cov")) {
        const auto& s = j["cov"];
        require_object(s, "'cov'");
        check_keys(s, {"delta", "rho", "max_iter", "tol", "grid_len", "grid_ratio"}, "'cov'");
        read(s, "delta", c.cov.delta);
        read(s, "rho", c.cov.rho);
        read(s, "max_iter", c.cov.max_iter);
        read(s, "tol", c.cov.tol);
        read(s, "grid_len", c.sigma_grid_len);
        read(s, "grid_ratio", c.sigma_grid_ratio);
    }
    if (j.contains("cv")) {
        const auto& s = j["cv"];
        require_object(s, "'cv'");
        check_keys(s, {"window", "target", "selection"}, "'cv'");
        read(s, "window", c.cv_window);
        read(s, "target", c.target);
        read(s, "selection", c.forecast_selection);
    }
    if (j.contains("lambda") && !j["lambda"].is_null()) c.lambda = j["lambda"].get<double>();
    if (j.contains("simulate")) {
        const auto& s = j["simulate"];
        require_object(s, "'simulate'");
        check_keys(s, {"design", "reps", "length"}, "'simulate'");
        read(s, "design", c.design);
        read(s, "reps", c.reps);
        read(s, "length", c.length);
    }
    if (j.contains("nowcast")) {
        const auto& s = j["nowcast"];
        require_object(s, "'nowcast'");
        check_keys(s, {"target", "schedule"}, "'nowcast'");
        if (s.contains("target")) read(s, "target", c.target);
        read(s, "schedule", c.schedule);
        c.schedule = resolve(base_dir, c.schedule);
    }
    if (j.contains("network")) {
        const auto& s = j["network"];
        require_object(s, "'network'");
        check_keys(s, {"categories", "coef"}, "'network'");
        read(s, "categories", c.categories);
        read(s, "coef", c.coef);
        c.categories = resolve(base_dir, c.categories);
        c.coef = resolve(base_dir, c.coef);
    }
    read(j, "seed", c.seed);
    read(j, "output_dir", c.output_dir);
    c.output_dir = resolve(base_dir, c.output_dir);
    read(j, "threads", c.threads);
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::string canonical_json(const RunConfig& c) {
    json j;  // nlohmann::json objects keep keys sorted, so dump() is canonical
    json inputs = json::array();
    for (const auto& in : c.inputs)
        inputs.push_back({{"path", in.path},
                          {"frequency", std::string(frequency_name(in.frequency))},
                          {"ids", in.ids},
                          {"tcodes", in.tcodes}});
    j["inputs"] = inputs;
    j["panel"] = c.panel;
    j["low_frequency"] = std::string(frequency_name(c.calendar.low));
    j["trim_weeks"] = c.calendar.trim_weeks;
    j["policies"] = {{"own", std::string(policy_name(c.policies.own))},
                     {"higher_on_lower", std::string(policy_name(c.policies.higher_on_lower))},
                     {"lower_on_higher", std::string(policy_name(c.policies.lower_on_higher))}};
    j["solver"] = {{"epsilon", c.solver.epsilon},
                   {"max_iter", c.solver.max_iter},
                   {"grid_len", c.solver.grid_len},
                   {"grid_ratio", c.solver.grid_ratio}};
    j["cov"] = {{"delta", c.cov.delta},         {"rho", c.cov.rho},
                {"max_iter", c.cov.max_iter},   {"tol", c.cov.tol},
                {"grid_len", c.sigma_grid_len}, {"grid_ratio", c.sigma_grid_ratio}};
    j["cv"] = {{"window", c.cv_window}, {"target", c.target}, {"selection", c.forecast_selection}};
    j["lambda"] = c.lambda ? json(*c.lambda) : json(nullptr);
    j["simulate"] = {{"design", c.design}, {"reps", c.reps}, {"length", c.length}};
    j["nowcast"] = {{"schedule", c.schedule}};
    j["network"] = {{"categories", c.categories}, {"coef", c.coef}};
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    return j.dump();
}

std::string config_hash(const RunConfig& c) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : canonical_json(c)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mfhier
