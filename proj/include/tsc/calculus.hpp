#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tsc/errors.hpp"
#include "tsc/expr.hpp"
#include "tsc/quadrature.hpp"
#include "tsc/report.hpp"
#include "tsc/time_scale.hpp"

namespace tsc {

/// Declared smoothness class of a function on its scale. "rd" variants live
/// in the forward (delta) theory, "ld" variants in the backward (nabla) one;
/// the duality transform swaps them pairwise.
enum class Regularity {
    C_rd,   ///< rd-continuous
    C_ld,   ///< ld-continuous
    C1_rd,  ///< delta-differentiable with rd-continuous derivative
    C1_ld,  ///< nabla-differentiable with ld-continuous derivative
    C_prd,  ///< piecewise rd-continuous
    C_pld,  ///< piecewise ld-continuous
    C1_prd, ///< piecewise C1_rd
    C1_pld, ///< piecewise C1_ld
    Smooth, ///< restriction of a C^1 function on the real line
};

inline const char* to_string(Regularity r) {
    switch (r) {
    case Regularity::C_rd: return "C_rd";
    case Regularity::C_ld: return "C_ld";
    case Regularity::C1_rd: return "C1_rd";
    case Regularity::C1_ld: return "C1_ld";
    case Regularity::C_prd: return "C_prd";
    case Regularity::C_pld: return "C_pld";
    case Regularity::C1_prd: return "C1_prd";
    case Regularity::C1_pld: return "C1_pld";
    case Regularity::Smooth: return "smooth";
    }
    return "?";
}

inline Regularity regularity_from_string(const std::string& s) {
    if (s == "C_rd") return Regularity::C_rd;
    if (s == "C_ld") return Regularity::C_ld;
    if (s == "C1_rd") return Regularity::C1_rd;
    if (s == "C1_ld") return Regularity::C1_ld;
    if (s == "C_prd") return Regularity::C_prd;
    if (s == "C_pld") return Regularity::C_pld;
    if (s == "C1_prd") return Regularity::C1_prd;
    if (s == "C1_pld") return Regularity::C1_pld;
    if (s == "smooth") return Regularity::Smooth;
    throw InvalidArgument("unknown regularity tag '" + s + "'");
}

/// A real function attached to a time scale. Backed either by a formula in
/// the variable "t" or, for purely discrete scales, by a value table (the
/// form discrete minimizers come back in).
///
/// Construction evaluates the formula on the scale's sample grid, so a
/// domain fault (ln of a non-positive argument, etc.) surfaces immediately
/// instead of deep inside a later quadrature.
class TsFunction {
public:
    TsFunction(Expr formula, TimeScale scale, Regularity reg)
        : body_(std::move(formula)),
          derivative_(std::get<Expr>(body_).diff("t")),
          scale_(std::move(scale)),
          regularity_(reg) {
        for (double t : scale_.sample_points())
            (void)std::get<Expr>(body_).eval1("t", t);
    }

    static TsFunction from_table(std::vector<std::pair<double, double>> values,
                                 TimeScale scale, Regularity reg) {
        if (!scale.is_discrete())
            throw InvalidArgument("table-backed functions need a discrete scale");
        std::sort(values.begin(), values.end());
        const std::vector<double> pts = scale.discrete_points();
        if (values.size() != pts.size())
            throw InvalidArgument("table size does not match scale");
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (values[i].first != pts[i])
                throw InvalidArgument("table keys do not match scale points");
            if (!std::isfinite(values[i].second))
                throw NonFinite("table value not finite");
        }
        return TsFunction(std::move(values), std::move(scale), reg);
    }

    const TimeScale& scale() const { return scale_; }
    Regularity regularity() const { return regularity_; }
    bool is_table() const { return std::holds_alternative<Table>(body_); }

    const Expr& formula() const {
        if (is_table()) throw InvalidArgument("table-backed function has no formula");
        return std::get<Expr>(body_);
    }

    double eval(double t) const {
        if (!scale_.contains(t))
            throw PointNotInScale("evaluation point " + std::to_string(t) +
                                  " not in scale");
        if (const Expr* e = std::get_if<Expr>(&body_)) return e->eval1("t", t);
        const Table& tab = std::get<Table>(body_);
        auto it = std::lower_bound(tab.begin(), tab.end(), t,
                                   [](const auto& p, double v) { return p.first < v; });
        if (it == tab.end() || it->first != t)
            throw PointNotInScale("no table entry at " + std::to_string(t));
        return it->second;
    }

    /// Classical (dense-limit) derivative value. Exact for formula-backed
    /// functions; meaningless for tables, which only live on discrete
    /// scales where every derivative is a difference quotient.
    double derivative_value_dense(double t) const {
        if (is_table())
            throw InvalidArgument("table-backed function has no dense derivative");
        return derivative_.eval1("t", t);
    }

private:
    using Table = std::vector<std::pair<double, double>>;

    TsFunction(Table values, TimeScale scale, Regularity reg)
        : body_(std::move(values)), scale_(std::move(scale)), regularity_(reg) {}

    std::variant<Expr, Table> body_;
    Expr derivative_; // cached d/dt of the formula; unused for tables
    TimeScale scale_;
    Regularity regularity_;
};

/// How a composed integrand is being sampled: inside a continuous piece of
/// the scale (use classical limit values) or at an isolated jump (use the
/// difference quotient across the gap).
enum class EvalMode { Continuous, Scattered };

struct DerivativeResult {
    double value = 0.0;
    std::string method;     // "scattered-exact" or "dense-limit"
    double est_error = 0.0; // 0 for the exact branch
};

namespace detail {

inline void require_in_scale(const TimeScale& T, double t) {
    if (!T.contains(t))
        throw PointNotInScale("point " + std::to_string(t) + " not in scale");
}

/// One-sided difference quotients with Richardson extrapolation. dir = +1
/// uses forward steps, -1 backward. Picks the tableau entry whose
/// neighbour disagreement is smallest (the extrapolation stops improving
/// once round-off takes over, so "last entry" would be the wrong pick).
template <typename F>
DerivativeResult dense_limit_derivative(F&& f, double t, double room, int dir) {
    const double h0 = std::min(1e-2, room / 4.0);
    if (h0 <= 0.0 || t + dir * h0 == t)
        throw StepUnderflow("no room for a one-sided difference step");

    constexpr int kLevels = 12;
    double tableau[kLevels][kLevels];
    double best_value = 0.0;
    double best_err = HUGE_VAL;

    double h = h0;
    const double f0 = f(t);
    for (int k = 0; k < kLevels; ++k, h *= 0.5) {
        const double tk = t + dir * h;
        if (tk == t) break;
        tableau[k][0] = dir * (f(tk) - f0) / h;
        double scale = 1.0;
        for (int j = 1; j <= k; ++j) {
            scale *= 2.0;
            tableau[k][j] = (scale * tableau[k][j - 1] - tableau[k - 1][j - 1]) /
                            (scale - 1.0);
            const double err = std::max(std::fabs(tableau[k][j] - tableau[k][j - 1]),
                                        std::fabs(tableau[k][j] - tableau[k - 1][j - 1]));
            if (err <= best_err) {
                best_err = err;
                best_value = tableau[k][j];
            }
        }
        // once round-off dominates, deeper rows only get noisier
        if (k > 2 && std::fabs(tableau[k][k] - tableau[k - 1][k - 1]) > 4.0 * best_err)
            break;
    }
    if (best_err == HUGE_VAL) { // single usable level
        best_value = tableau[0][0];
        best_err = std::fabs(best_value);
    }
    return DerivativeResult{best_value, "dense-limit", best_err};
}

} // namespace detail

/// Delta derivative at t (t must lie in the upper kappa truncation of the
/// scale). Right-scattered points use the exact jump quotient; right-dense
/// points are approximated by extrapolated one-sided differences taken
/// inside the containing segment.
inline DerivativeResult delta_derivative(const TsFunction& f, double t) {
    const TimeScale& T = f.scale();
    detail::require_in_scale(T, t);
    const TimeScale K = T.kappa_upper();
    if (!K.contains(t))
        throw NotInDomainKappa("delta derivative undefined at the scale maximum");

    const double sigma = T.sigma(t);
    if (sigma > t) {
        const double q = (f.eval(sigma) - f.eval(t)) / (sigma - t);
        return DerivativeResult{q, "scattered-exact", 0.0};
    }
    const Segment& seg =
        T.segments()[static_cast<std::size_t>(T.segment_index(t))];
    const bool forward = t < seg.hi;
    const double room = forward ? seg.hi - t : t - seg.lo;
    return detail::dense_limit_derivative([&](double s) { return f.eval(s); }, t,
                                          room, forward ? +1 : -1);
}

/// Nabla derivative at t (t must lie in the lower kappa truncation).
inline DerivativeResult nabla_derivative(const TsFunction& f, double t) {
    const TimeScale& T = f.scale();
    detail::require_in_scale(T, t);
    const TimeScale K = T.kappa_lower();
    if (!K.contains(t))
        throw NotInDomainKappa("nabla derivative undefined at the scale minimum");

    const double rho = T.rho(t);
    if (rho < t) {
        const double q = (f.eval(t) - f.eval(rho)) / (t - rho);
        return DerivativeResult{q, "scattered-exact", 0.0};
    }
    const Segment& seg =
        T.segments()[static_cast<std::size_t>(T.segment_index(t))];
    const bool backward = t > seg.lo;
    const double room = backward ? t - seg.lo : seg.hi - t;
    return detail::dense_limit_derivative([&](double s) { return f.eval(s); }, t,
                                          room, backward ? -1 : +1);
}

/// Exact-path delta derivative used inside composed integrands: the jump
/// quotient at right-scattered points, the symbolic classical derivative at
/// right-dense ones. No extrapolation noise, so compositions built on top
/// of it can themselves be differentiated numerically.
inline double delta_derivative_exact(const TsFunction& f, double t) {
    const TimeScale& T = f.scale();
    detail::require_in_scale(T, t);
    const double sigma = T.sigma(t);
    if (sigma > t) return (f.eval(sigma) - f.eval(t)) / (sigma - t);
    if (T.max() == t && !T.kappa_upper().contains(t))
        throw NotInDomainKappa("delta derivative undefined at the scale maximum");
    return f.derivative_value_dense(t);
}

inline double nabla_derivative_exact(const TsFunction& f, double t) {
    const TimeScale& T = f.scale();
    detail::require_in_scale(T, t);
    const double rho = T.rho(t);
    if (rho < t) return (f.eval(t) - f.eval(rho)) / (t - rho);
    if (T.min() == t && !T.kappa_lower().contains(t))
        throw NotInDomainKappa("nabla derivative undefined at the scale minimum");
    return f.derivative_value_dense(t);
}

/// Mode-aware derivative for integrand composition: inside continuous
/// pieces the classical value, at jump atoms the quotient.
inline double delta_derivative_mode(const TsFunction& f, double t, EvalMode m) {
    if (m == EvalMode::Scattered) {
        const double sigma = f.scale().sigma(t);
        return (f.eval(sigma) - f.eval(t)) / (sigma - t);
    }
    return f.derivative_value_dense(t);
}

inline double nabla_derivative_mode(const TsFunction& f, double t, EvalMode m) {
    if (m == EvalMode::Scattered) {
        const double rho = f.scale().rho(t);
        return (f.eval(t) - f.eval(rho)) / (t - rho);
    }
    return f.derivative_value_dense(t);
}

namespace detail {

/// Deterministic compensated ordering: summing small magnitudes first keeps
/// the result independent of how contributions were discovered.
inline double sum_contributions(std::vector<double>& terms) {
    std::stable_sort(terms.begin(), terms.end(), [](double x, double y) {
        return std::fabs(x) < std::fabs(y);
    });
    double s = 0.0;
    for (double v : terms) s += v;
    return s;
}

inline void check_integral_bounds(const TimeScale& T, double a, double b) {
    if (!T.contains(a) || !T.contains(b))
        throw EndpointNotInScale("integration endpoint not in scale");
    if (a > b) throw OrderViolation("integration bounds out of order");
}

} // namespace detail

/// Delta integral of a mode-aware integrand g(t, EvalMode) over [a, b] in T:
/// adaptive quadrature on each continuous piece plus mu(t)*g(t) atoms at the
/// right-scattered points of [a, b).
template <typename G>
double delta_integral_over(const TimeScale& T, double a, double b, G&& g,
                           double quad_tol = 1e-11) {
    detail::check_integral_bounds(T, a, b);
    if (a == b) return 0.0;
    const TimeScale R = T.restrict(a, b);
    const auto& segs = R.segments();
    std::vector<double> terms;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (segs[i].lo < segs[i].hi)
            terms.push_back(adaptive_simpson(
                [&](double t) { return g(t, EvalMode::Continuous); }, segs[i].lo,
                segs[i].hi, quad_tol));
        if (i + 1 < segs.size()) {
            const double t = segs[i].hi;
            terms.push_back((segs[i + 1].lo - t) * g(t, EvalMode::Scattered));
        }
    }
    return detail::sum_contributions(terms);
}

/// Nabla counterpart: atoms sit at the left-scattered points of (a, b] and
/// weigh nu(t)*g(t).
template <typename G>
double nabla_integral_over(const TimeScale& T, double a, double b, G&& g,
                           double quad_tol = 1e-11) {
    detail::check_integral_bounds(T, a, b);
    if (a == b) return 0.0;
    const TimeScale R = T.restrict(a, b);
    const auto& segs = R.segments();
    std::vector<double> terms;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (segs[i].lo < segs[i].hi)
            terms.push_back(adaptive_simpson(
                [&](double t) { return g(t, EvalMode::Continuous); }, segs[i].lo,
                segs[i].hi, quad_tol));
        if (i + 1 < segs.size()) {
            const double t = segs[i + 1].lo;
            terms.push_back((t - segs[i].hi) * g(t, EvalMode::Scattered));
        }
    }
    return detail::sum_contributions(terms);
}

inline double delta_integral(const TsFunction& f, double a, double b) {
    return delta_integral_over(f.scale(), a, b,
                               [&](double t, EvalMode) { return f.eval(t); });
}

inline double nabla_integral(const TsFunction& f, double a, double b) {
    return nabla_integral_over(f.scale(), a, b,
                               [&](double t, EvalMode) { return f.eval(t); });
}

/// f(sigma(t)) = f(t) + mu(t) * f_delta(t) on the upper kappa truncation.
inline IdentityReport check_sigma_formula(const TsFunction& f, double tol,
                                          const std::string& scale_id) {
    const TimeScale& T = f.scale();
    const std::vector<double> pts = T.kappa_upper().sample_points();
    double max_res = 0.0;
    for (double t : pts) {
        const double lhs = f.eval(T.sigma(t));
        const double deriv = T.mu(t) > 0.0 ? delta_derivative(f, t).value : 0.0;
        const double rhs = f.eval(t) + T.mu(t) * deriv;
        max_res = std::max(max_res, std::fabs(lhs - rhs));
    }
    return make_report("sigma-formula", scale_id, static_cast<long>(pts.size()),
                       max_res, tol);
}

/// f(rho(t)) = f(t) - nu(t) * f_nabla(t) on the lower kappa truncation.
inline IdentityReport check_rho_formula(const TsFunction& f, double tol,
                                        const std::string& scale_id) {
    const TimeScale& T = f.scale();
    const std::vector<double> pts = T.kappa_lower().sample_points();
    double max_res = 0.0;
    for (double t : pts) {
        const double lhs = f.eval(T.rho(t));
        const double deriv = T.nu(t) > 0.0 ? nabla_derivative(f, t).value : 0.0;
        const double rhs = f.eval(t) - T.nu(t) * deriv;
        max_res = std::max(max_res, std::fabs(lhs - rhs));
    }
    return make_report("rho-formula", scale_id, static_cast<long>(pts.size()),
                       max_res, tol);
}

/// Both product-rule splittings of the delta integral of (fg)':
///   int f(sigma) g' + int f' g  =  fg(b) - fg(a)
///   int f g' + int f' g(sigma)  =  fg(b) - fg(a)
inline IdentityReport check_integration_by_parts_delta(
    const TsFunction& f, const TsFunction& g, double a, double b, double tol,
    const std::string& scale_id) {
    const TimeScale& T = f.scale();
    if (!(g.scale() == T))
        throw InvalidArgument("integration by parts needs a common scale");
    const double boundary = f.eval(b) * g.eval(b) - f.eval(a) * g.eval(a);

    const double formA =
        delta_integral_over(T, a, b,
                            [&](double t, EvalMode m) {
                                const double fs = m == EvalMode::Scattered
                                                      ? f.eval(T.sigma(t))
                                                      : f.eval(t);
                                return fs * delta_derivative_mode(g, t, m);
                            }) +
        delta_integral_over(T, a, b, [&](double t, EvalMode m) {
            return delta_derivative_mode(f, t, m) * g.eval(t);
        });

    const double formB =
        delta_integral_over(T, a, b,
                            [&](double t, EvalMode m) {
                                return f.eval(t) * delta_derivative_mode(g, t, m);
                            }) +
        delta_integral_over(T, a, b, [&](double t, EvalMode m) {
            const double gs = m == EvalMode::Scattered ? g.eval(T.sigma(t))
                                                       : g.eval(t);
            return delta_derivative_mode(f, t, m) * gs;
        });

    const double max_res =
        std::max(std::fabs(formA - boundary), std::fabs(formB - boundary));
    return make_report("integration-by-parts-delta", scale_id, 2, max_res, tol);
}

/// Nabla mirror:
///   int f(rho) g_nabla + int f_nabla g  =  fg(b) - fg(a)
///   int f g_nabla + int f_nabla g(rho)  =  fg(b) - fg(a)
inline IdentityReport check_integration_by_parts_nabla(
    const TsFunction& f, const TsFunction& g, double a, double b, double tol,
    const std::string& scale_id) {
    const TimeScale& T = f.scale();
    if (!(g.scale() == T))
        throw InvalidArgument("integration by parts needs a common scale");
    const double boundary = f.eval(b) * g.eval(b) - f.eval(a) * g.eval(a);

    const double formA =
        nabla_integral_over(T, a, b,
                            [&](double t, EvalMode m) {
                                const double fr = m == EvalMode::Scattered
                                                      ? f.eval(T.rho(t))
                                                      : f.eval(t);
                                return fr * nabla_derivative_mode(g, t, m);
                            }) +
        nabla_integral_over(T, a, b, [&](double t, EvalMode m) {
            return nabla_derivative_mode(f, t, m) * g.eval(t);
        });

    const double formB =
        nabla_integral_over(T, a, b,
                            [&](double t, EvalMode m) {
                                return f.eval(t) * nabla_derivative_mode(g, t, m);
                            }) +
        nabla_integral_over(T, a, b, [&](double t, EvalMode m) {
            const double gr = m == EvalMode::Scattered ? g.eval(T.rho(t))
                                                       : g.eval(t);
            return nabla_derivative_mode(f, t, m) * gr;
        });

    const double max_res =
        std::max(std::fabs(formA - boundary), std::fabs(formB - boundary));
    return make_report("integration-by-parts-nabla", scale_id, 2, max_res, tol);
}

} // namespace tsc
