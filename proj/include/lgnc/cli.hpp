/**
 * @file cli.hpp
 * @brief Flat `key = value` configuration, CSV output and the command
 *        implementations behind the `lgnc` executable.
 *
 * Exit codes: 0 success, 2 configuration error, 3 runtime failure.
 */
#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lgnc/verification.hpp"

namespace lgnc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

inline constexpr const char* kConvergenceCsvHeader =
    "level,n,h,dt,err_u_linf_h1,err_u_linf_l2,err_th_linf_h1,err_th_linf_l2,err_p_l2l2,err_dtu_l2l2,"
    "err_dtth_l2l2,ord_u_h1,ord_u_l2,ord_th_h1,ord_th_l2,ord_p_l2";

inline constexpr const char* kProjectionCsvHeader =
    "level,n,h,err_u_h1,err_u_l2,err_th_h1,err_th_l2,err_p_l2,ord_u_h1,ord_u_l2,ord_th_h1,ord_th_l2,ord_p_l2";

struct Config {
    double nu = 1.0;
    double kappa = 1.0;
    double beta_y = 1.0;
    int k = 1;
    std::vector<double> dt{0.01};  // several values only for dt_rule = temporal
    double T = 0.5;
    int mesh_n = 8;
    std::string case_name = "trig";
    std::string dt_rule = "h_k";  // h_k | h_k1 | fixed | stability | temporal
    double dt_const = 0.1;
    double c0 = 1.0;
    std::vector<int> levels{8, 16, 32};
    double solver_tol = kDefaultSolverTol;
    CflPolicy cfl_policy = CflPolicy::abort;
    std::string out_csv;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
    T v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError("key '" + std::string(key) + "': cannot parse '" + std::string(text) + "' as a number");
    }
    return v;
}

template <class T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
    std::vector<T> out;
    while (true) {
        const auto comma = text.find(',');
        out.push_back(parse_number<T>(key, trim(text.substr(0, comma))));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

inline void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError("key '" + key + "': " + what);
}

}  // namespace detail

/// Parses `key = value` lines. Blank lines and lines starting with '#' are
/// skipped; unknown or repeated keys are errors.
inline Config parse_config(std::istream& in) {
    Config cfg;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" + std::string(body) + "'");
        }
        const std::string key(detail::trim(body.substr(0, eq)));
        const auto value = detail::trim(body.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        if (key == "nu") {
            cfg.nu = detail::parse_number<double>(key, value);
        } else if (key == "kappa") {
            cfg.kappa = detail::parse_number<double>(key, value);
        } else if (key == "beta_y") {
            cfg.beta_y = detail::parse_number<double>(key, value);
        } else if (key == "k") {
            cfg.k = detail::parse_number<int>(key, value);
        } else if (key == "dt") {
            cfg.dt = detail::parse_list<double>(key, value);
        } else if (key == "T") {
            cfg.T = detail::parse_number<double>(key, value);
        } else if (key == "mesh_n") {
            cfg.mesh_n = detail::parse_number<int>(key, value);
        } else if (key == "case") {
            cfg.case_name = std::string(value);
        } else if (key == "dt_rule") {
            cfg.dt_rule = std::string(value);
        } else if (key == "dt_const") {
            cfg.dt_const = detail::parse_number<double>(key, value);
        } else if (key == "c0") {
            cfg.c0 = detail::parse_number<double>(key, value);
        } else if (key == "levels") {
            cfg.levels = detail::parse_list<int>(key, value);
        } else if (key == "solver_tol") {
            cfg.solver_tol = detail::parse_number<double>(key, value);
        } else if (key == "cfl_policy") {
            if (value == "abort") {
                cfg.cfl_policy = CflPolicy::abort;
            } else if (value == "warn") {
                cfg.cfl_policy = CflPolicy::warn;
            } else {
                throw ConfigError("key 'cfl_policy': expected abort or warn, got '" + std::string(value) + "'");
            }
        } else if (key == "out_csv") {
            cfg.out_csv = std::string(value);
        } else {
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    using detail::require;
    require(cfg.nu > 0.0, "nu", "must be > 0");
    require(cfg.kappa > 0.0, "kappa", "must be > 0");
    require(std::isfinite(cfg.beta_y), "beta_y", "must be finite");
    require(cfg.k == 1 || cfg.k == 2, "k", "must be 1 or 2");
    for (double dt : cfg.dt) require(dt > 0.0, "dt", "every value must be > 0");
    require(cfg.T > 0.0, "T", "must be > 0");
    require(cfg.mesh_n >= 1, "mesh_n", "must be >= 1");
    require(cfg.case_name == "trig", "case", "unknown case '" + cfg.case_name + "' (available: trig)");
    require(cfg.dt_rule == "h_k" || cfg.dt_rule == "h_k1" || cfg.dt_rule == "fixed" || cfg.dt_rule == "stability" ||
                cfg.dt_rule == "temporal",
            "dt_rule", "expected h_k, h_k1, fixed, stability or temporal, got '" + cfg.dt_rule + "'");
    require(cfg.dt_const > 0.0, "dt_const", "must be > 0");
    require(cfg.c0 > 0.0, "c0", "must be > 0");
    require(!cfg.levels.empty(), "levels", "must not be empty");
    for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
        require(cfg.levels[l] >= 1, "levels", "every level must be >= 1");
        require(l == 0 || cfg.levels[l] > cfg.levels[l - 1], "levels", "must be strictly increasing");
    }
    require(cfg.solver_tol > 0.0 && cfg.solver_tol < 1.0, "solver_tol", "must lie in (0, 1)");
    return cfg;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

/// 17 significant digits, round-trip exact.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_convergence_csv(std::ostream& out, const ConvergenceTable& table) {
    out << kConvergenceCsvHeader << '\n';
    static constexpr int kOrderCols[] = {0, 1, 2, 3, 4};  // u_h1, u_l2, th_h1, th_l2, p
    for (std::size_t l = 0; l < table.rows.size(); ++l) {
        const auto& r = table.rows[l];
        out << r.level << ',' << r.n << ',' << format_number(r.h) << ',' << format_number(r.dt);
        for (double e : r.errors.values()) out << ',' << format_number(e);
        for (int c : kOrderCols) {
            out << ',';
            if (l < table.orders.size() && table.orders[l]) out << format_number((*table.orders[l])[c]);
        }
        out << '\n';
    }
}

inline void write_projection_csv(std::ostream& out, const ProjectionTable& table) {
    out << kProjectionCsvHeader << '\n';
    for (std::size_t l = 0; l < table.rows.size(); ++l) {
        const auto& r = table.rows[l];
        const std::array<double, 5> e{r.errors.u_h1, r.errors.u_l2, r.errors.th_h1, r.errors.th_l2, r.errors.p_l2};
        out << l << ',' << r.n << ',' << format_number(r.h);
        for (double v : e) out << ',' << format_number(v);
        for (std::size_t c = 0; c < e.size(); ++c) {
            out << ',';
            if (l == 0) continue;
            const auto& a = table.rows[l - 1];
            const std::array<double, 5> ea{a.errors.u_h1, a.errors.u_l2, a.errors.th_h1, a.errors.th_l2, a.errors.p_l2};
            out << format_number(std::log(ea[c] / e[c]) / std::log(a.h / r.h));
        }
        out << '\n';
    }
}

namespace detail {

inline ManufacturedCase case_for(const Config& cfg) {
    return manufactured_case(cfg.case_name, cfg.nu, cfg.kappa, cfg.beta_y);
}

inline void write_csv_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << text;
    if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

inline void print_table(std::ostream& out, const ConvergenceTable& table) {
    out << std::setw(6) << "n" << std::setw(12) << "dt";
    for (const char* name : NormReport::names()) out << std::setw(16) << name;
    out << '\n';
    for (std::size_t l = 0; l < table.rows.size(); ++l) {
        const auto& r = table.rows[l];
        out << std::setw(6) << r.n << std::setw(12) << std::setprecision(4) << r.dt;
        for (double e : r.errors.values()) out << std::setw(16) << std::scientific << std::setprecision(4) << e;
        out << std::defaultfloat << '\n';
        if (l < table.orders.size() && table.orders[l]) {
            out << std::setw(18) << "order";
            for (double o : *table.orders[l]) out << std::setw(16) << std::fixed << std::setprecision(3) << o;
            out << std::defaultfloat << '\n';
        }
    }
}

/// Runs `body`, mapping exceptions to exit codes.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "runtime failure: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace detail

/// One simulation on the n = mesh_n unit square with dt = dt[0].
inline int cmd_run(const std::string& config_path, std::ostream& out, std::ostream& err) {
    Config cfg;
    try {
        cfg = load_config(config_path);
        if (cfg.dt.size() != 1) throw ConfigError("key 'dt': run takes a single value");
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    return detail::guarded(err, [&] {
        const auto mc = detail::case_for(cfg);
        const auto disc = make_discretization(generate_unit_square(cfg.mesh_n), cfg.k);
        const double dt = cfg.dt.front();
        SchemeConfig sc;
        sc.k = cfg.k;
        sc.dt = dt;
        sc.T = cfg.T;
        sc.data = mc.problem_data();
        sc.solver_tol = cfg.solver_tol;
        sc.cfl_policy = cfg.cfl_policy;
        const Scheme scheme(disc, sc);
        const State s0 = scheme.init_state([&](Point x) { return mc.u(x, 0.0); },
                                           [&](Point x) { return mc.grad_u(x, 0.0); },
                                           [&](Point x) { return mc.theta(x, 0.0); },
                                           [&](Point x) { return mc.grad_theta(x, 0.0); });
        ErrorAccumulator acc(mc, disc.mesh, dt);
        out << "# step t cfl_product flow_iters temperature_iters divergence_residual\n";
        scheme.run(s0, [&](const State& s) {
            acc.add(s);
            if (!s.diag.cfl.ok) {
                err << "warning: step " << s.n << ": dt*|u_h|_{1,inf} = " << s.diag.cfl.product << " > 1/4\n";
            }
            out << s.n << ' ' << format_number(s.t) << ' ' << s.diag.cfl.product << ' ' << s.diag.flow.iterations << ' '
                << s.diag.temperature.iterations << ' ' << s.diag.divergence_residual << '\n';
        });
        ConvergenceTable table;
        ConvergenceRow row;
        row.n = cfg.mesh_n;
        row.h = disc.mesh.h();
        row.dt = dt;
        row.errors = acc.report();
        table.rows.push_back(row);
        table.compute_orders();
        detail::print_table(out, table);
        if (!cfg.out_csv.empty()) {
            std::ostringstream csv;
            write_convergence_csv(csv, table);
            detail::write_csv_file(cfg.out_csv, csv.str());
        }
        return kExitOk;
    });
}

/// Spatial study over `levels` (dt from dt_rule/dt_const) or, with
/// dt_rule = temporal, a temporal study over the `dt` list on mesh_n.
inline int cmd_convergence(const std::string& config_path, std::ostream& out, std::ostream& err) {
    Config cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    return detail::guarded(err, [&] {
        const auto mc = detail::case_for(cfg);
        ConvergenceTable table;
        if (cfg.dt_rule == "temporal") {
            const double h = std::sqrt(2.0) / cfg.mesh_n;
            for (double dt : cfg.dt) {
                if (dt > stability_limit_dt(cfg.c0, h) * (1.0 + 1e-12)) {
                    throw ConfigError("key 'dt': stability condition dt <= c0 h^{1/2} violated (dt = " +
                                      format_number(dt) + ", c0 h^{1/2} = " +
                                      format_number(stability_limit_dt(cfg.c0, h)) + ")");
                }
            }
            table = temporal_study(mc, cfg.k, cfg.mesh_n, cfg.dt, cfg.T, cfg.c0, cfg.solver_tol);
        } else {
            DtRule rule;
            rule.c = cfg.dt_const;
            rule.kind = cfg.dt_rule == "h_k"      ? DtRuleKind::h_k
                        : cfg.dt_rule == "h_k1"   ? DtRuleKind::h_k1
                        : cfg.dt_rule == "fixed"  ? DtRuleKind::fixed
                                                  : DtRuleKind::stability_limit;
            std::vector<std::pair<double, double>> h_dt;
            for (int n : cfg.levels) {
                const double h = std::sqrt(2.0) / n;
                h_dt.emplace_back(h, rule.dt(h, cfg.k));
            }
            try {
                check_stability_condition(h_dt, cfg.c0);
            } catch (const InvalidArgument& e) {
                throw ConfigError(std::string("keys 'dt_rule'/'dt_const'/'c0': ") + e.what());
            }
            table = convergence_study(mc, cfg.k, cfg.levels, rule, cfg.T, cfg.c0, cfg.solver_tol);
        }
        detail::print_table(out, table);
        std::ostringstream csv;
        write_convergence_csv(csv, table);
        if (cfg.out_csv.empty()) {
            out << csv.str();
        } else {
            detail::write_csv_file(cfg.out_csv, csv.str());
        }
        return kExitOk;
    });
}

/// Stokes-Poisson projection of the exact fields at t = 0 over `levels`.
inline int cmd_project(const std::string& config_path, std::ostream& out, std::ostream& err) {
    Config cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    return detail::guarded(err, [&] {
        const auto mc = detail::case_for(cfg);
        const auto table = projection_study(mc, cfg.k, cfg.levels, 0.0, cfg.solver_tol);
        std::ostringstream csv;
        write_projection_csv(csv, table);
        out << csv.str();
        if (!cfg.out_csv.empty()) detail::write_csv_file(cfg.out_csv, csv.str());
        return kExitOk;
    });
}

/// Writes the n x n unit-square mesh, refined `refine` times, in the text format.
inline int cmd_mesh(int n, int refine, const std::string& out_path, std::ostream& out, std::ostream& err) {
    if (n < 1 || refine < 0) {
        err << "config error: mesh needs n >= 1 and refine >= 0\n";
        return kExitConfig;
    }
    return detail::guarded(err, [&] {
        Mesh mesh = generate_unit_square(n);
        for (int r = 0; r < refine; ++r) mesh = refine_uniform(mesh);
        if (out_path.empty() || out_path == "-") {
            write_mesh(out, mesh);
        } else {
            std::ofstream f(out_path);
            if (!f) throw std::runtime_error("cannot write '" + out_path + "'");
            write_mesh(f, mesh);
        }
        return kExitOk;
    });
}

}  // namespace lgnc
