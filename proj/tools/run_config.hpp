#pragma once

// Run configuration of the juelab command-line tool. Numeric parameters are
// kept as the decimal strings the user typed, so a config written into a
// manifest and read back reproduces the run exactly.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace juelab_cli {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"gap-table",    "verify-identities", "ode-residuals",
                                                "scaling-scan", "fredholm-sigma",    "mc-check"};
    return names;
}

struct RunConfig {
    std::string command;
    std::string alpha = "1";
    std::string n;       // single degree
    std::string n_list;  // comma separated
    std::string a;
    std::string a_grid;  // lo:hi:step
    std::string t_list;
    unsigned bits = 256;
    std::uint64_t seed = 0;
    std::uint64_t samples = 1000000;
    int fd_step_exp = 0;  // 0: 2^(-bits/4)
    std::string out = "-";
    std::string format = "csv";
    bool check = false;
    std::string tol_file;
};

inline nlohmann::json to_json(const RunConfig& c) {
    return {{"command", c.command}, {"alpha", c.alpha},   {"n", c.n},
            {"n_list", c.n_list},   {"a", c.a},           {"a_grid", c.a_grid},
            {"t_list", c.t_list},   {"bits", c.bits},     {"seed", c.seed},
            {"samples", c.samples}, {"fd_step_exp", c.fd_step_exp}, {"out", c.out},
            {"format", c.format},   {"check", c.check},   {"tol_file", c.tol_file}};
}

inline RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("command", c.command);
    get("alpha", c.alpha);
    get("n", c.n);
    get("n_list", c.n_list);
    get("a", c.a);
    get("a_grid", c.a_grid);
    get("t_list", c.t_list);
    get("bits", c.bits);
    get("seed", c.seed);
    get("samples", c.samples);
    get("fd_step_exp", c.fd_step_exp);
    get("out", c.out);
    get("format", c.format);
    get("check", c.check);
    get("tol_file", c.tol_file);
    return c;
}

/// Reads a config file; a run manifest (with a "config" member) is accepted too.
inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file " + path + ": " + e.what());
    }
    return from_json(j.contains("config") ? j.at("config") : j);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

inline std::size_t parse_count(const std::string& s, const char* what) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
        v = std::stoul(s, &pos);
    } catch (const std::exception&) {
        throw UsageError(std::string("invalid ") + what + ": '" + s + "'");
    }
    if (pos != s.size() || s[0] == '-') throw UsageError(std::string("invalid ") + what + ": '" + s + "'");
    return v;
}

inline std::vector<std::size_t> n_values(const RunConfig& c) {
    std::vector<std::size_t> out;
    if (!c.n_list.empty())
        for (const auto& s : split_list(c.n_list)) out.push_back(parse_count(s, "n"));
    else if (!c.n.empty())
        out.push_back(parse_count(c.n, "n"));
    if (out.empty()) throw UsageError(c.command + " needs --n or --n-list");
    return out;
}

}  // namespace juelab_cli
