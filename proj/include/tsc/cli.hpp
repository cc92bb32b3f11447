#pragma once

#include <cstdlib>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "tsc/calculus.hpp"
#include "tsc/config.hpp"
#include "tsc/duality.hpp"
#include "tsc/errors.hpp"
#include "tsc/generators.hpp"
#include "tsc/json_format.hpp"
#include "tsc/random.hpp"
#include "tsc/time_scale.hpp"
#include "tsc/variational.hpp"

namespace tsc {

namespace cli_detail {

inline Setting parse_setting_arg(const std::string& s) {
    try {
        return setting_from_string(s);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

inline void apply_tol_overrides(Config& cfg,
                                const std::vector<std::string>& overrides) {
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--tol expects NAME=VALUE, got '" + ov + "'");
        const std::string name = ov.substr(0, eq);
        char* end = nullptr;
        const double value = std::strtod(ov.c_str() + eq + 1, &end);
        if (end == ov.c_str() + eq + 1 || *end != '\0')
            throw ConfigError("bad tolerance value in '" + ov + "'");
        if (name == "identity_tol") cfg.tolerances.identity_tol = value;
        else if (name == "integral_tol") cfg.tolerances.integral_tol = value;
        else if (name == "derivative_tol") cfg.tolerances.derivative_tol = value;
        else throw ConfigError("unknown tolerance '" + name + "'");
    }
}

/// Candidate from CLI flags: exactly one of a formula or a value table,
/// plus optional kink points. Input faults are config errors.
inline Candidate build_candidate(const VariationalProblem& p,
                                 const std::string& y_expr,
                                 const std::string& y_table,
                                 const std::string& kinks_text) {
    if (y_expr.empty() == y_table.empty())
        throw ConfigError("provide exactly one of --y / --y-table");
    std::vector<double> kinks;
    if (!kinks_text.empty()) {
        json j;
        try {
            j = json::parse(kinks_text);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("bad --kinks: ") + e.what());
        }
        if (!j.is_array()) throw ConfigError("--kinks must be a JSON array");
        for (const json& v : j) {
            if (!v.is_number()) throw ConfigError("--kinks entries must be numbers");
            kinks.push_back(v.get<double>());
        }
    }
    try {
        if (!y_expr.empty()) {
            Expr e = Expr::parse(y_expr, {"t"});
            TsFunction y(std::move(e), p.scale, Regularity::Smooth);
            return make_candidate(p, std::move(y), std::move(kinks));
        }
        json j = json::parse(y_table);
        if (!j.is_array()) throw ConfigError("--y-table must be a JSON array");
        std::vector<std::pair<double, double>> tab;
        for (const json& row : j) {
            if (!row.is_array() || row.size() != 2 || !row[0].is_number() ||
                !row[1].is_number())
                throw ConfigError("--y-table rows must be [t, value]");
            tab.emplace_back(row[0].get<double>(), row[1].get<double>());
        }
        const Setting s = p.setting;
        TsFunction y = TsFunction::from_table(
            std::move(tab), p.window(),
            s == Setting::Delta ? Regularity::C1_rd : Regularity::C1_ld);
        return make_candidate(p, std::move(y), std::move(kinks));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad candidate: ") + e.what());
    }
}

inline std::vector<double> parse_q_grid(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad --q-grid: ") + e.what());
    }
    if (!j.is_array() || j.empty())
        throw ConfigError("--q-grid must be a nonempty JSON array");
    std::vector<double> grid;
    for (const json& v : j) {
        if (!v.is_number()) throw ConfigError("--q-grid entries must be numbers");
        grid.push_back(v.get<double>());
    }
    return grid;
}

inline int cmd_classify(const Config& cfg, const std::string& name,
                        bool as_array, std::ostream& out) {
    const TimeScale& T = cfg.scale(name);
    std::vector<std::string> objs;
    for (double t : T.sample_points()) {
        std::string o = "{";
        o += "\"t\":" + fmt_double(t) + ",";
        o += "\"sigma\":" + fmt_double(T.sigma(t)) + ",";
        o += "\"rho\":" + fmt_double(T.rho(t)) + ",";
        o += "\"mu\":" + fmt_double(T.mu(t)) + ",";
        o += "\"nu\":" + fmt_double(T.nu(t)) + ",";
        o += "\"class\":" + json_string(to_string(T.classify(t)));
        o += "}";
        objs.push_back(std::move(o));
    }
    objs.push_back("{\"dual_scale\":" + scale_to_literal(dual_scale(T)) + "}");
    out << emit_objects(objs, as_array);
    return 0;
}

inline int cmd_deriv(const Config& cfg, const std::string& fname,
                     const std::string& setting, double t, bool as_array,
                     std::ostream& out) {
    const TsFunction& f = cfg.function(fname).fn;
    const Setting s = parse_setting_arg(setting);
    const DerivativeResult r =
        s == Setting::Delta ? delta_derivative(f, t) : nabla_derivative(f, t);
    std::string o = "{\"value\":" + fmt_double(r.value) + ",\"method\":" +
                    json_string(r.method) +
                    ",\"est_error\":" + fmt_double(r.est_error) + "}";
    out << emit_objects({o}, as_array);
    return 0;
}

inline int cmd_integrate(const Config& cfg, const std::string& fname,
                         const std::string& setting, double a, double b,
                         bool as_array, std::ostream& out) {
    const TsFunction& f = cfg.function(fname).fn;
    const Setting s = parse_setting_arg(setting);
    const double v =
        s == Setting::Delta ? delta_integral(f, a, b) : nabla_integral(f, a, b);
    out << emit_objects({"{\"value\":" + fmt_double(v) + "}"}, as_array);
    return 0;
}

inline int cmd_dualize(const Config& cfg, const std::string& name,
                       bool as_array, std::ostream& out) {
    for (const auto& [sname, T] : cfg.scales) {
        if (sname != name) continue;
        const std::string o =
            "{\"kind\":\"scale\",\"value\":" + scale_to_literal(dual_scale(T)) + "}";
        out << emit_objects({o}, as_array);
        return 0;
    }
    for (const FunctionDecl& f : cfg.functions) {
        if (f.name != name) continue;
        const TsFunction d = dual_function(f.fn);
        std::string o = "{\"kind\":\"function\",\"value\":{";
        o += "\"expr\":" + json_string(d.formula().to_string()) + ",";
        o += "\"scale\":" + scale_to_literal(d.scale()) + ",";
        o += "\"regularity\":" + json_string(to_string(d.regularity()));
        o += "}}";
        out << emit_objects({o}, as_array);
        return 0;
    }
    for (const ProblemDecl& pd : cfg.problems) {
        if (pd.name != name) continue;
        const VariationalProblem d = dual_problem(pd.problem);
        std::string o = "{\"kind\":\"problem\",\"value\":{";
        o += "\"lagrangian\":" + json_string(d.lagrangian.formula().to_string()) + ",";
        o += "\"scale\":" + scale_to_literal(d.scale) + ",";
        o += "\"a\":" + fmt_double(d.a) + ",";
        o += "\"b\":" + fmt_double(d.b) + ",";
        o += "\"alpha\":" + fmt_double(d.alpha) + ",";
        o += "\"beta\":" + fmt_double(d.beta) + ",";
        o += "\"setting\":" + json_string(to_string(d.setting));
        o += "}}";
        out << emit_objects({o}, as_array);
        return 0;
    }
    throw ConfigError("no scale, function, or problem named '" + name + "'");
}

inline int cmd_verify(const Config& cfg, bool as_array,
                      const std::string& identity_filter, bool seeded,
                      std::uint64_t seed, std::ostream& out) {
    std::vector<std::pair<std::string, TimeScale>> scales = cfg.scales;
    std::vector<std::pair<std::string, TsFunction>> functions;
    for (const FunctionDecl& f : cfg.functions)
        functions.emplace_back(f.name + "@" + f.scale_name, f.fn);

    if (seeded) {
        Rng rng(seed);
        for (int k = 0; k < 3; ++k) {
            const std::string sname = "seed-scale-" + std::to_string(k);
            TimeScale S = random_scale(rng);
            Expr e = random_polynomial(rng);
            functions.emplace_back("seed-fn-" + std::to_string(k) + "@" + sname,
                                   TsFunction(std::move(e), S, Regularity::Smooth));
            scales.emplace_back(sname, std::move(S));
        }
    }

    const MatrixTolerances tols{cfg.tolerances.identity_tol,
                                cfg.tolerances.integral_tol,
                                cfg.tolerances.derivative_tol};
    const std::vector<IdentityReport> reports =
        run_duality_matrix(scales, functions, tols);

    std::vector<std::string> objs;
    bool all_passed = true;
    for (const IdentityReport& r : reports) {
        if (!identity_filter.empty() && r.identity_name != identity_filter)
            continue;
        objs.push_back(report_to_json(r));
        all_passed = all_passed && r.passed;
    }
    out << emit_objects(objs, as_array);
    return all_passed ? 0 : 1;
}

inline int cmd_el_check(const Config& cfg, const std::string& pname,
                        const std::string& y_expr, const std::string& y_table,
                        const std::string& kinks, bool as_array,
                        std::ostream& out) {
    const VariationalProblem& p = cfg.problem(pname).problem;
    const Candidate c = build_candidate(p, y_expr, y_table, kinks);
    const TimeScale R = p.window();
    const TimeScale K =
        p.setting == Setting::Delta ? R.kappa_upper() : R.kappa_lower();

    std::string o = "{";
    o += "\"problem\":" + json_string(pname) + ",";
    o += "\"setting\":" + json_string(to_string(p.setting)) + ",";
    o += "\"domain\":" + scale_to_literal(K) + ",";
    o += "\"rows\":[";
    double max_abs = 0.0;
    bool first = true;
    for (double t : el_domain_points(p)) {
        const double r = p.setting == Setting::Delta ? el_residual_delta(p, c, t)
                                                     : el_residual_nabla(p, c, t);
        if (!first) o += ",";
        first = false;
        o += "{\"t\":" + fmt_double(t) + ",\"residual\":" + fmt_double(r) + "}";
        max_abs = std::max(max_abs, std::fabs(r));
    }
    o += "],";
    o += "\"max_abs_residual\":" + fmt_double(max_abs);
    o += "}";
    out << emit_objects({o}, as_array);
    return 0;
}

inline int cmd_weierstrass(const Config& cfg, const std::string& pname,
                           const std::string& y_expr, const std::string& y_table,
                           const std::string& kinks, const std::string& q_grid_text,
                           bool as_array, std::ostream& out) {
    const VariationalProblem& p = cfg.problem(pname).problem;
    const Candidate c = build_candidate(p, y_expr, y_table, kinks);
    const std::vector<double> grid = q_grid_text.empty()
                                         ? default_q_grid(p, c)
                                         : parse_q_grid(q_grid_text);
    const WeierstrassResult res =
        p.setting == Setting::Delta
            ? check_weierstrass_delta(p, c, grid, cfg.tolerances.identity_tol, pname)
            : check_weierstrass_nabla(p, c, grid, cfg.tolerances.identity_tol, pname);

    std::string o = "{";
    o += "\"problem\":" + json_string(pname) + ",";
    o += "\"report\":" + report_to_json(res.report) + ",";
    o += "\"min_excess\":" + fmt_double(res.min_excess) + ",";
    o += "\"argmin_t\":" + fmt_double(res.argmin_t) + ",";
    o += "\"argmin_q\":" + fmt_double(res.argmin_q);
    o += "}";
    out << emit_objects({o}, as_array);
    return res.report.passed ? 0 : 1;
}

inline int cmd_minimize(const Config& cfg, const std::string& pname,
                        bool as_array, std::ostream& out) {
    const VariationalProblem& p = cfg.problem(pname).problem;
    const Candidate c = minimize_discrete(p);
    const double fv = functional_value(p, c);

    std::string o = "{";
    o += "\"problem\":" + json_string(pname) + ",";
    o += "\"y_table\":[";
    bool first = true;
    for (double t : c.y.scale().discrete_points()) {
        if (!first) o += ",";
        first = false;
        o += "[" + fmt_double(t) + "," + fmt_double(c.y.eval(t)) + "]";
    }
    o += "],";
    o += "\"functional_value\":" + fmt_double(fv);
    o += "}";
    out << emit_objects({o}, as_array);
    return 0;
}

} // namespace cli_detail

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 1 at least one identity/report failed, 2 config or usage error, 3
/// numeric/domain error during computation.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
    CLI::App app{"time-scale calculus, duality, and variational toolkit"};
    app.name("tscalc");

    std::string config_path;
    std::vector<std::string> tol_overrides;
    bool as_array = false;
    app.add_option("--config", config_path, "JSON config file (default: built-in)");
    app.add_option("--tol", tol_overrides,
                   "tolerance override NAME=VALUE (repeatable)");
    app.add_flag("--array", as_array, "emit one JSON array instead of lines");

    auto* classify = app.add_subcommand("classify", "point classification table");
    std::string classify_scale;
    classify->add_option("scale", classify_scale, "scale name")->required();
    classify->fallthrough();

    auto* deriv = app.add_subcommand("deriv", "derivative at a point");
    std::string deriv_fn, deriv_setting;
    double deriv_t = 0.0;
    deriv->add_option("function", deriv_fn)->required();
    deriv->add_option("setting", deriv_setting, "delta|nabla")->required();
    deriv->add_option("t", deriv_t)->required();
    deriv->fallthrough();

    auto* integrate = app.add_subcommand("integrate", "integral over [a,b]");
    std::string int_fn, int_setting;
    double int_a = 0.0, int_b = 0.0;
    integrate->add_option("function", int_fn)->required();
    integrate->add_option("setting", int_setting, "delta|nabla")->required();
    integrate->add_option("a", int_a)->required();
    integrate->add_option("b", int_b)->required();
    integrate->fallthrough();

    auto* dualize = app.add_subcommand("dualize", "mirror a named object");
    std::string dualize_name;
    dualize->add_option("name", dualize_name)->required();
    dualize->fallthrough();

    auto* verify = app.add_subcommand("verify", "run the identity matrix");
    std::string identity_filter;
    std::uint64_t seed = 0;
    verify->add_option("--identity", identity_filter, "only this identity");
    auto* seed_opt =
        verify->add_option("--seed", seed, "append seeded random instances");
    verify->fallthrough();

    auto* el = app.add_subcommand("el-check", "Euler-Lagrange residual table");
    std::string el_problem, el_y, el_ytable, el_kinks;
    el->add_option("problem", el_problem)->required();
    el->add_option("--y", el_y, "candidate formula in t");
    el->add_option("--y-table", el_ytable, "candidate value table JSON");
    el->add_option("--kinks", el_kinks, "JSON array of kink points");
    el->fallthrough();

    auto* wei = app.add_subcommand("weierstrass", "excess nonnegativity check");
    std::string wei_problem, wei_y, wei_ytable, wei_kinks, wei_qgrid;
    wei->add_option("problem", wei_problem)->required();
    wei->add_option("--y", wei_y, "candidate formula in t");
    wei->add_option("--y-table", wei_ytable, "candidate value table JSON");
    wei->add_option("--kinks", wei_kinks, "JSON array of kink points");
    wei->add_option("--q-grid", wei_qgrid, "JSON array of slope probes");
    wei->fallthrough();

    auto* minimize = app.add_subcommand("minimize", "discrete-window minimizer");
    std::string min_problem;
    minimize->add_option("problem", min_problem)->required();
    minimize->fallthrough();

    app.require_subcommand(1);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        Config cfg = config_path.empty() ? parse_config(default_config_text())
                                         : load_config_file(config_path);
        cli_detail::apply_tol_overrides(cfg, tol_overrides);

        if (*classify)
            return cli_detail::cmd_classify(cfg, classify_scale, as_array, out);
        if (*deriv)
            return cli_detail::cmd_deriv(cfg, deriv_fn, deriv_setting, deriv_t,
                                         as_array, out);
        if (*integrate)
            return cli_detail::cmd_integrate(cfg, int_fn, int_setting, int_a,
                                             int_b, as_array, out);
        if (*dualize)
            return cli_detail::cmd_dualize(cfg, dualize_name, as_array, out);
        if (*verify)
            return cli_detail::cmd_verify(cfg, as_array, identity_filter,
                                          seed_opt->count() > 0, seed, out);
        if (*el)
            return cli_detail::cmd_el_check(cfg, el_problem, el_y, el_ytable,
                                            el_kinks, as_array, out);
        if (*wei)
            return cli_detail::cmd_weierstrass(cfg, wei_problem, wei_y,
                                               wei_ytable, wei_kinks, wei_qgrid,
                                               as_array, out);
        if (*minimize)
            return cli_detail::cmd_minimize(cfg, min_problem, as_array, out);
        err << "no subcommand given\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ConvexityPreconditionFailed& e) {
        out << "{\"error\":\"convexity-precondition-failed\",\"t\":"
            << fmt_double(e.t) << ",\"x\":" << fmt_double(e.x)
            << ",\"gamma\":" << fmt_double(e.gamma)
            << ",\"r1\":" << fmt_double(e.r1) << ",\"r2\":" << fmt_double(e.r2)
            << "}\n";
        err << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const NonConvergence& e) {
        out << "{\"error\":\"non-convergence\",\"gradient_norm\":"
            << fmt_double(e.gradient_norm) << "}\n";
        err << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const SingularHessian& e) {
        out << "{\"error\":\"singular-hessian\"}\n";
        err << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        err << "numeric error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace tsc
