#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tsc/calculus.hpp"
#include "tsc/errors.hpp"
#include "tsc/time_scale.hpp"
#include "tsc/variational.hpp"

namespace tsc {

/// Raised for anything wrong with the declarative input (unparseable JSON,
/// unresolved names, bad literals, functions invalid on their scale). The
/// CLI maps it to exit code 2; runtime numeric faults map to 3 instead.
struct ConfigError : Error {
    using Error::Error;
};

struct FunctionDecl {
    std::string name;
    std::string expr_text;
    std::string scale_name;
    Regularity regularity;
    TsFunction fn;
};

struct ProblemDecl {
    std::string name;
    std::string lagrangian_text;
    VariationalProblem problem;
};

struct Tolerances {
    double identity_tol = 1e-8;
    double integral_tol = 1e-9;
    double derivative_tol = 1e-6;
};

struct Config {
    std::vector<std::pair<std::string, TimeScale>> scales; // declaration order
    std::vector<FunctionDecl> functions;
    std::vector<ProblemDecl> problems;
    Tolerances tolerances;

    const TimeScale& scale(const std::string& name) const {
        for (const auto& [n, s] : scales)
            if (n == name) return s;
        throw ConfigError("unknown scale '" + name + "'");
    }
    const FunctionDecl& function(const std::string& name) const {
        for (const FunctionDecl& f : functions)
            if (f.name == name) return f;
        throw ConfigError("unknown function '" + name + "'");
    }
    const ProblemDecl& problem(const std::string& name) const {
        for (const ProblemDecl& p : problems)
            if (p.name == name) return p;
        throw ConfigError("unknown problem '" + name + "'");
    }
};

using json = nlohmann::ordered_json;

/// Scale literal: array whose elements are [lo, hi] pairs or bare numbers
/// (shorthand for isolated points).
inline TimeScale parse_scale_literal(const json& j) {
    if (!j.is_array() || j.empty())
        throw ConfigError("scale literal must be a nonempty array");
    std::vector<Segment> segs;
    for (const json& e : j) {
        if (e.is_number()) {
            const double v = e.get<double>();
            segs.push_back({v, v});
        } else if (e.is_array() && e.size() == 2 && e[0].is_number() &&
                   e[1].is_number()) {
            segs.push_back({e[0].get<double>(), e[1].get<double>()});
        } else {
            throw ConfigError("scale segment must be a number or [lo, hi]");
        }
    }
    try {
        return TimeScale::canonicalize(std::move(segs));
    } catch (const Error& e) {
        throw ConfigError(std::string("bad scale literal: ") + e.what());
    }
}

inline double require_number(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw ConfigError(std::string("missing numeric field '") + key + "'");
    return j[key].get<double>();
}

inline std::string require_string(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string())
        throw ConfigError(std::string("missing string field '") + key + "'");
    return j[key].get<std::string>();
}

inline Config parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be an object");

    Config cfg;
    if (root.contains("scales")) {
        if (!root["scales"].is_object())
            throw ConfigError("'scales' must be an object");
        for (const auto& [name, lit] : root["scales"].items())
            cfg.scales.emplace_back(name, parse_scale_literal(lit));
    }
    if (root.contains("functions")) {
        if (!root["functions"].is_object())
            throw ConfigError("'functions' must be an object");
        for (const auto& [name, obj] : root["functions"].items()) {
            const std::string expr_text = require_string(obj, "expr");
            const std::string scale_name = require_string(obj, "scale");
            const std::string reg_text = require_string(obj, "regularity");
            const TimeScale& T = cfg.scale(scale_name);
            try {
                Expr e = Expr::parse(expr_text, {"t"});
                Regularity reg = regularity_from_string(reg_text);
                cfg.functions.push_back(
                    {name, expr_text, scale_name, reg, TsFunction(e, T, reg)});
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                throw ConfigError("function '" + name + "': " + e.what());
            }
        }
    }
    if (root.contains("problems")) {
        if (!root["problems"].is_object())
            throw ConfigError("'problems' must be an object");
        for (const auto& [name, obj] : root["problems"].items()) {
            const std::string lag_text = require_string(obj, "lagrangian");
            if (!obj.contains("scale"))
                throw ConfigError("problem '" + name + "' needs a scale literal");
            try {
                Lagrangian L = Lagrangian::parse(lag_text);
                TimeScale T = parse_scale_literal(obj["scale"]);
                VariationalProblem p(
                    std::move(L), std::move(T), require_number(obj, "a"),
                    require_number(obj, "b"), require_number(obj, "alpha"),
                    require_number(obj, "beta"),
                    setting_from_string(require_string(obj, "setting")));
                cfg.problems.push_back({name, lag_text, std::move(p)});
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                throw ConfigError("problem '" + name + "': " + e.what());
            }
        }
    }
    if (root.contains("tolerances")) {
        const json& t = root["tolerances"];
        if (!t.is_object()) throw ConfigError("'tolerances' must be an object");
        for (const auto& [key, val] : t.items()) {
            if (!val.is_number())
                throw ConfigError("tolerance '" + key + "' must be a number");
            const double v = val.get<double>();
            if (key == "identity_tol") cfg.tolerances.identity_tol = v;
            else if (key == "integral_tol") cfg.tolerances.integral_tol = v;
            else if (key == "derivative_tol") cfg.tolerances.derivative_tol = v;
            else throw ConfigError("unknown tolerance '" + key + "'");
        }
    }
    return cfg;
}

inline Config load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// The shipped default instance set: five structurally different scales,
/// six functions spread across them, and two variational problems.
inline const char* default_config_text() {
    return R"CFG({
  "scales": {
    "unit": [[0, 1]],
    "grid5": [0, 0.25, 0.5, 0.75, 1],
    "mixed": [[-1, 0], 0.5, [1, 2]],
    "twostep": [[0, 1], [2, 3]],
    "offset": [[-3, -1.5], -0.5, [0.5, 0.5], [1, 2.5]]
  },
  "functions": {
    "square": {"expr": "t^2", "scale": "mixed", "regularity": "smooth"},
    "cube": {"expr": "t^3", "scale": "twostep", "regularity": "smooth"},
    "growth": {"expr": "exp(t)", "scale": "unit", "regularity": "smooth"},
    "wave": {"expr": "sin(t)", "scale": "offset", "regularity": "smooth"},
    "ramp": {"expr": "t*exp(t)", "scale": "grid5", "regularity": "smooth"},
    "line": {"expr": "2*t + 1", "scale": "mixed", "regularity": "smooth"}
  },
  "problems": {
    "dirichlet": {
      "lagrangian": "v^2/2 + x",
      "scale": [[0, 1]],
      "a": 0, "b": 1, "alpha": 0, "beta": 1,
      "setting": "delta"
    },
    "spring5": {
      "lagrangian": "v^2/2 + x^2/2",
      "scale": [0, 0.25, 0.5, 0.75, 1],
      "a": 0, "b": 1, "alpha": 0, "beta": 1,
      "setting": "delta"
    }
  },
  "tolerances": {
    "identity_tol": 1e-8,
    "integral_tol": 1e-9,
    "derivative_tol": 1e-6
  }
}
)CFG";
}

} // namespace tsc
