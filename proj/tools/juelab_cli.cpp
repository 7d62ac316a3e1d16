// juelab: tables of gap probabilities, identity and ODE residuals, the
// double-scaling study and the Monte Carlo check, as CSV or JSON.

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>

#include "juelab/fredholm.hpp"
#include "run_config.hpp"

namespace juelab_cli {

namespace {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> node_counts;
    std::vector<std::string> breaches;
};

struct Tolerances {
    std::map<std::string, std::string> values;

    const std::string& at(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end()) throw UsageError("no tolerance for " + key);
        return it->second;
    }
};

Tolerances default_tolerances(const std::string& command) {
    Tolerances t;
    if (command == "verify-identities") {
        for (const char* k : {"S1", "S2", "S2p", "lowering", "s11", "s12", "s21", "s22", "rn", "rn1", "eq3", "eq4",
                              "eq5", "pna", "Rt_quadrature", "rt_quadrature"})
            t.values[k] = "1e-30";
    } else if (command == "ode-residuals") {
        for (const char* k : {"beta_p", "h_p", "logdP", "ri", "rnp2", "bep"}) t.values[k] = "1e-18";
        t.values["beta1"] = "1e-30";
        for (const char* k : {"R_ode", "cha", "rnbn", "equ3", "hna"}) t.values[k] = "1e-10";
        t.values["equ4"] = "1e-20";
        t.values["rna"] = "1e-12";
    } else if (command == "fredholm-sigma") {
        t.values["pv_residual"] = "1e-8";
    } else if (command == "scaling-scan") {
        t.values["error"] = "0.02";  // relative to max(|sigma_oracle|, 0.1)
    } else if (command == "mc-check") {
        t.values["z"] = "3";  // |estimate - reference| in units of stderr
        t.values["stderr"] = "2e-3";
    }
    return t;
}

Tolerances load_tolerances(const RunConfig& cfg) {
    Tolerances t = default_tolerances(cfg.command);
    if (cfg.tol_file.empty()) return t;
    std::ifstream in(cfg.tol_file);
    if (!in) throw UsageError("cannot open tolerance file " + cfg.tol_file);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("tolerance file: " + std::string(e.what()));
    }
    if (!j.is_object()) throw UsageError("tolerance file must hold a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!t.values.count(it.key())) throw UsageError("unknown tolerance key '" + it.key() + "' for " + cfg.command);
        if (it.value().is_string())
            t.values[it.key()] = it.value().get<std::string>();
        else if (it.value().is_number())
            t.values[it.key()] = it.value().dump();
        else
            throw UsageError("tolerance for '" + it.key() + "' must be a number or string");
    }
    return t;
}

template <class T>
struct Context {
    const RunConfig& cfg;
    Tolerances tol;
    int digits;
    juelab::RuleCache<T> cache;
    std::mutex mu;

    std::string num(const T& v) const { return v.str(digits, std::ios_base::scientific); }

    T parse(const std::string& s, const char* what) const {
        try {
            return T(s);
        } catch (const std::exception&) {
            throw UsageError(std::string("invalid ") + what + ": '" + s + "'");
        }
    }

    std::vector<T> a_values() const {
        if (!cfg.a_grid.empty()) {
            std::vector<std::string> parts;
            std::stringstream ss(cfg.a_grid);
            std::string p;
            while (std::getline(ss, p, ':')) parts.push_back(p);
            if (parts.size() != 3) throw UsageError("--a-grid must be lo:hi:step");
            const T lo = parse(parts[0], "a-grid"), hi = parse(parts[1], "a-grid"), step = parse(parts[2], "a-grid");
            if (!(step > 0) || hi < lo) throw UsageError("--a-grid needs step > 0 and hi >= lo");
            const auto count = static_cast<std::size_t>(floor((hi - lo) / step + T("1e-9"))) + 1;
            std::vector<T> out;
            for (std::size_t k = 0; k < count; ++k) out.push_back(lo + step * k);
            return out;
        }
        if (!cfg.a.empty()) return {parse(cfg.a, "a")};
        throw UsageError(cfg.command + " needs --a or --a-grid");
    }

    std::vector<T> t_values() const {
        std::vector<T> out;
        for (const auto& s : split_list(cfg.t_list)) out.push_back(parse(s, "t"));
        if (out.empty()) throw UsageError(cfg.command + " needs --t-list");
        return out;
    }

    T alpha() const { return parse(cfg.alpha, "alpha"); }

    // Records a breach when value > limit (check mode only reads the list).
    void check(Table& tab, const std::string& key, const T& value, const T& limit, const std::string& where) {
        if (!(value <= limit)) {
            std::lock_guard<std::mutex> lock(mu);
            tab.breaches.push_back(key + " at " + where + ": " + num(value) + " > " + num(limit));
        }
    }
};

/// Runs f(i) for i in [0, count) on a small pool; results land by index.
template <class R>
std::vector<R> parallel_map(std::size_t count, const std::function<R(std::size_t)>& f) {
    std::vector<R> out(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) out[i] = f(i);
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const auto extra = static_cast<unsigned>(std::min<std::size_t>(hw, count)) - (count ? 1 : 0);
    std::vector<std::future<void>> jobs;
    for (unsigned k = 0; k < extra; ++k) jobs.push_back(std::async(std::launch::async, worker));
    worker();
    for (auto& j : jobs) j.get();
    return out;
}

template <class T>
Table gap_table(Context<T>& ctx) {
    const T alpha = ctx.alpha();
    const auto ns = n_values(ctx.cfg);
    const auto as = ctx.a_values();
    const std::size_t n_top = *std::max_element(ns.begin(), ns.end());
    const auto zero = juelab::build_table(juelab::WeightParams<T>{alpha, T(0)}, n_top, {.cache = &ctx.cache});
    Table tab;
    tab.columns = {"a", "n", "P", "H", "logdP"};
    auto per_a = parallel_map<std::vector<std::vector<std::string>>>(as.size(), [&](std::size_t i) {
        const auto t = juelab::build_table(juelab::WeightParams<T>{alpha, as[i]}, n_top, {.cache = &ctx.cache});
        std::vector<std::vector<std::string>> rows;
        for (std::size_t n : ns) {
            const auto g = juelab::gap_from_tables(t, zero, n);
            rows.push_back({ctx.num(as[i]), std::to_string(n), ctx.num(g.prob), ctx.num(g.H), ctx.num(g.logdP)});
        }
        std::lock_guard<std::mutex> lock(ctx.mu);
        tab.node_counts.push_back(t.nodes_per_interval);
        return rows;
    });
    for (auto& block : per_a)
        for (auto& r : block) tab.rows.push_back(std::move(r));
    return tab;
}

template <class T>
Table verify_identities(Context<T>& ctx) {
    const T alpha = ctx.alpha();
    const auto ns = n_values(ctx.cfg);
    const auto as = ctx.a_values();
    const std::size_t n_top = *std::max_element(ns.begin(), ns.end());
    Table tab;
    tab.columns = {"a",   "n",   "S1",  "S2",  "S2p", "lowering", "s11", "s12",           "s21",
                   "s22", "rn",  "rn1", "eq3", "eq4", "eq5",      "pna", "Rt_quadrature", "rt_quadrature"};
    const auto z = juelab::default_z_samples<T>();
    auto per_a = parallel_map<std::vector<std::vector<std::string>>>(as.size(), [&](std::size_t i) {
        const auto t = juelab::build_table(juelab::WeightParams<T>{alpha, as[i]}, n_top + 2, {.cache = &ctx.cache});
        {
            std::lock_guard<std::mutex> lock(ctx.mu);
            tab.node_counts.push_back(t.nodes_per_interval);
        }
        std::vector<std::vector<std::string>> rows;
        for (std::size_t n : ns) {
            auto rep = juelab::identity_residuals(t, n, z, &ctx.cache);
            rep.merge(juelab::lowering_residuals(t, n, z));
            std::map<std::string, T> worst;
            for (const auto& [name, v] : rep.entries) {
                std::string key = name.substr(0, name.find('@'));
                if (key == "S2'") key = "S2p";
                if (key == "Rt-quadrature") key = "Rt_quadrature";
                if (key == "rt-quadrature") key = "rt_quadrature";
                auto it = worst.find(key);
                if (it == worst.end() || v > it->second) worst[key] = v;
            }
            std::vector<std::string> row{ctx.num(as[i]), std::to_string(n)};
            const std::string where = "a=" + ctx.num(as[i]) + " n=" + std::to_string(n);
            for (std::size_t c = 2; c < tab.columns.size(); ++c) {
                const T& v = worst.at(tab.columns[c]);
                row.push_back(ctx.num(v));
                ctx.check(tab, tab.columns[c], v, ctx.parse(ctx.tol.at(tab.columns[c]), "tolerance"), where);
            }
            rows.push_back(std::move(row));
        }
        return rows;
    });
    for (auto& block : per_a)
        for (auto& r : block) tab.rows.push_back(std::move(r));
    return tab;
}

template <class T>
Table ode_residuals(Context<T>& ctx) {
    const T alpha = ctx.alpha();
    const auto ns = n_values(ctx.cfg);
    const auto as = ctx.a_values();
    const int step_exp = ctx.cfg.fd_step_exp ? ctx.cfg.fd_step_exp : static_cast<int>(juelab::bits_of<T>() / 4);
    const T step = ldexp(T(1), -step_exp);
    const std::size_t n_top = *std::max_element(ns.begin(), ns.end());
    Table tab;
    tab.columns = {"a",     "n",    "beta_p", "h_p",  "logdP", "ri",  "rnp2", "bep", "beta1",
                   "R_ode", "cha",  "rnbn",   "equ3", "equ4",  "rna", "hna",  "D"};
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t i = 0; i < as.size(); ++i)
        for (std::size_t k = 0; k < ns.size(); ++k) cells.emplace_back(i, k);
    std::vector<juelab::TableFamily<T>> fams = parallel_map<juelab::TableFamily<T>>(as.size(), [&](std::size_t i) {
        return juelab::build_family(juelab::WeightParams<T>{alpha, as[i]}, n_top + 2, step, {.cache = &ctx.cache});
    });
    for (const auto& f : fams) tab.node_counts.push_back(f.center().nodes_per_interval);
    tab.rows = parallel_map<std::vector<std::string>>(cells.size(), [&](std::size_t c) {
        const auto& fam = fams[cells[c].first];
        const std::size_t n = ns[cells[c].second];
        const auto an = juelab::derivative_bundle(fam, n, juelab::DerivMode::analytic);
        const auto fd = juelab::derivative_bundle(fam, n, juelab::DerivMode::finite_difference);
        const auto [ld_fd, ld_sum] = juelab::log_gap_derivative(fam, n);
        std::vector<std::pair<std::string, T>> vals{
            {"beta_p", juelab::normalized_residual({an.beta_p, T(-fd.beta_p)})},
            {"h_p", juelab::normalized_residual({an.h_p, T(-fd.h_p)})},
            {"logdP", juelab::normalized_residual({ld_fd, T(-ld_sum)})},
        };
        auto rep = juelab::riccati_residuals(fam, n);
        rep.merge(juelab::second_order_residuals(fam, n));
        for (auto& e : rep.entries) vals.push_back(e);
        const auto h = juelab::hn_ode_report(fam, n);
        vals.emplace_back("equ4", h.res_equ4);
        vals.emplace_back("rna", h.res_rna);
        vals.emplace_back("hna", h.res_hna);
        std::vector<std::string> row{ctx.num(fam.wp.a), std::to_string(n)};
        const std::string where = "a=" + ctx.num(fam.wp.a) + " n=" + std::to_string(n);
        for (const auto& [k, v] : vals) {
            row.push_back(ctx.num(v));
            ctx.check(tab, k, v, ctx.parse(ctx.tol.at(k), "tolerance"), where);
        }
        row.push_back(ctx.num(h.D_value));
        return row;
    });
    return tab;
}

template <class T>
Table scaling_scan(Context<T>& ctx) {
    const T alpha = ctx.alpha();
    const auto ns = n_values(ctx.cfg);
    const auto ts = ctx.t_values();
    Table tab;
    tab.columns = {"n", "t", "sigma_n", "sigma_oracle", "error"};
    const auto rows = juelab::scaling_convergence(alpha, ns, ts, &ctx.cache);
    const T rel = ctx.parse(ctx.tol.at("error"), "tolerance");
    for (const auto& r : rows) {
        tab.rows.push_back({std::to_string(r.n), ctx.num(r.t), ctx.num(r.sigma_n), ctx.num(r.sigma_oracle),
                            ctx.num(r.error)});
        ctx.check(tab, "error", r.error, rel * std::max(T(abs(r.sigma_oracle)), T("0.1")),
                  "n=" + std::to_string(r.n) + " t=" + ctx.num(r.t));
    }
    return tab;
}

template <class T>
Table fredholm_sigma(Context<T>& ctx) {
    const auto ts = ctx.t_values();
    Table tab;
    tab.columns = {"t", "det", "sigma", "pv_residual"};
    auto oracles = parallel_map<juelab::SigmaOracle<T>>(ts.size(), [&](std::size_t i) {
        juelab::FredholmOptions<T> o;
        o.cache = &ctx.cache;
        return juelab::sigma_oracle(ts[i], o);
    });
    const T tol = ctx.parse(ctx.tol.at("pv_residual"), "tolerance");
    for (const auto& o : oracles) {
        const T pv = juelab::continued_pv_residual(o);
        tab.rows.push_back({ctx.num(o.t), ctx.num(o.det_value), ctx.num(o.sigma), ctx.num(pv)});
        tab.node_counts.push_back(o.nodes_used);
        ctx.check(tab, "pv_residual", pv, tol, "t=" + ctx.num(o.t));
    }
    return tab;
}

template <class T>
Table mc_check(Context<T>& ctx) {
    const auto ns = n_values(ctx.cfg);
    if (ns.size() != 1) throw UsageError("mc-check takes a single --n");
    if (ctx.cfg.a.empty()) throw UsageError("mc-check needs --a");
    const juelab::WeightParams<T> wp{ctx.alpha(), ctx.parse(ctx.cfg.a, "a")};
    const auto est = juelab::mc_gap_probability(wp, ns[0], ctx.cfg.samples, ctx.cfg.seed);
    const auto ref = juelab::gap_probability(wp, ns[0], {.cache = &ctx.cache});
    Table tab;
    tab.columns = {"estimate", "stderr", "reference"};
    const T e(est.estimate), s(est.stderr_);
    tab.rows.push_back({ctx.num(e), ctx.num(s), ctx.num(ref.prob)});
    ctx.check(tab, "z", T(abs(e - ref.prob)), ctx.parse(ctx.tol.at("z"), "tolerance") * s, "n=" + ctx.cfg.n);
    ctx.check(tab, "stderr", s, ctx.parse(ctx.tol.at("stderr"), "tolerance"), "n=" + ctx.cfg.n);
    return tab;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_table(std::ostream& os, const Table& tab, const RunConfig& cfg) {
    if (cfg.format == "json") {
        nlohmann::json j;
        j["command"] = cfg.command;
        j["columns"] = tab.columns;
        j["rows"] = tab.rows;
        os << j.dump(2) << "\n";
        return;
    }
    for (std::size_t i = 0; i < tab.columns.size(); ++i) os << (i ? "," : "") << csv_field(tab.columns[i]);
    os << "\r\n";
    for (const auto& r : tab.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_field(r[i]);
        os << "\r\n";
    }
}

template <class T>
int run_typed(const RunConfig& cfg) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    Context<T> ctx{cfg, load_tolerances(cfg), static_cast<int>(std::ceil(cfg.bits * std::log10(2.0))), {}, {}};
    Table tab;
    if (cfg.command == "gap-table")
        tab = gap_table(ctx);
    else if (cfg.command == "verify-identities")
        tab = verify_identities(ctx);
    else if (cfg.command == "ode-residuals")
        tab = ode_residuals(ctx);
    else if (cfg.command == "scaling-scan")
        tab = scaling_scan(ctx);
    else if (cfg.command == "fredholm-sigma")
        tab = fredholm_sigma(ctx);
    else
        tab = mc_check(ctx);
    const double seconds = std::chrono::duration<double>(clock::now() - start).count();
    std::sort(tab.breaches.begin(), tab.breaches.end());

    if (cfg.out == "-") {
        write_table(std::cout, tab, cfg);
    } else {
        std::ofstream os(cfg.out, std::ios::binary);
        if (!os) throw UsageError("cannot write " + cfg.out);
        write_table(os, tab, cfg);
        nlohmann::json m;
        m["config"] = to_json(cfg);
        m["precision_bits"] = juelab::bits_of<T>();
        m["significant_digits"] = ctx.digits;
        m["node_counts"] = tab.node_counts;
        m["rows"] = tab.rows.size();
        m["timings"] = {{"total_seconds", seconds}};
        m["check"] = {{"enabled", cfg.check}, {"tolerances", ctx.tol.values}, {"breaches", tab.breaches}};
        std::ofstream ms(cfg.out + ".manifest.json", std::ios::binary);
        ms << m.dump(2) << "\n";
    }
    if (cfg.check && !tab.breaches.empty()) {
        for (const auto& b : tab.breaches) std::cerr << "tolerance breach: " << b << "\n";
        return 2;
    }
    return 0;
}

int dispatch(const RunConfig& cfg) {
    switch (cfg.bits) {
        case 128: return run_typed<juelab::real<128>>(cfg);
        case 256: return run_typed<juelab::real<256>>(cfg);
        case 384: return run_typed<juelab::real<384>>(cfg);
        case 512: return run_typed<juelab::real<512>>(cfg);
        default: throw UsageError("--bits must be one of 128, 256, 384, 512");
    }
}

}  // namespace

}  // namespace juelab_cli

int main(int argc, char** argv) {
    using namespace juelab_cli;
    CLI::App app{"juelab: gap probability of the symmetric Jacobi unitary ensemble, with residual checks"};
    RunConfig cli;
    std::string config_path;
    std::map<std::string, CLI::Option*> opts;
    opts["command"] = app.add_option("--command", cli.command, "What to compute")
                          ->check(CLI::IsMember(command_names()));
    opts["alpha"] = app.add_option("--alpha", cli.alpha, "Weight exponent alpha > 0");
    opts["n"] = app.add_option("--n", cli.n, "Degree n");
    opts["n_list"] = app.add_option("--n-list", cli.n_list, "Comma-separated degrees");
    opts["a"] = app.add_option("--a", cli.a, "Gap half-width a in [0,1)");
    opts["a_grid"] = app.add_option("--a-grid", cli.a_grid, "Grid lo:hi:step of a values");
    opts["t_list"] = app.add_option("--t-list", cli.t_list, "Comma-separated scaled variables t");
    opts["bits"] = app.add_option("--bits", cli.bits, "Mantissa bits: 128, 256, 384 or 512");
    opts["seed"] = app.add_option("--seed", cli.seed, "Monte Carlo seed");
    opts["samples"] = app.add_option("--samples", cli.samples, "Monte Carlo sample count");
    opts["fd_step_exp"] = app.add_option("--fd-step-exp", cli.fd_step_exp, "FD step 2^-k in a (default k = bits/4)");
    opts["out"] = app.add_option("--out", cli.out, "Output file ('-' for stdout, no manifest)");
    opts["format"] = app.add_option("--format", cli.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    opts["check"] = app.add_flag("--check", cli.check, "Exit 2 when a residual exceeds its tolerance");
    opts["tol_file"] = app.add_option("--tol-file", cli.tol_file, "JSON object of per-column tolerances");
    app.add_option("--config", config_path, "Start from a config or run manifest (JSON); flags override it");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        RunConfig cfg = cli;
        if (!config_path.empty()) {
            cfg = load_config(config_path);
            const auto over = to_json(cli);
            auto merged = to_json(cfg);
            for (const auto& [key, opt] : opts)
                if (opt->count() > 0) merged[key] = over[key];
            cfg = from_json(merged);
        }
        if (cfg.command.empty()) throw UsageError("--command is required");
        if (std::find(command_names().begin(), command_names().end(), cfg.command) == command_names().end())
            throw UsageError("unknown command " + cfg.command);
        if (cfg.format != "csv" && cfg.format != "json") throw UsageError("--format must be csv or json");
        return dispatch(cfg);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const juelab::InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
