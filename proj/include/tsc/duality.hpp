#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tsc/calculus.hpp"
#include "tsc/errors.hpp"
#include "tsc/report.hpp"
#include "tsc/time_scale.hpp"

namespace tsc {

/// Mirror image of a scale: { -t : t in T }. Exact on the canonical form
/// (floating-point negation never rounds), hence an exact involution.
inline TimeScale dual_scale(const TimeScale& T) {
    std::vector<Segment> segs;
    segs.reserve(T.segments().size());
    for (auto it = T.segments().rbegin(); it != T.segments().rend(); ++it)
        segs.push_back({-it->hi, -it->lo});
    return TimeScale::canonicalize(std::move(segs));
}

/// Smoothness classes swap forward/backward flavor under dualization.
inline Regularity dual_regularity(Regularity r) {
    switch (r) {
    case Regularity::C_rd: return Regularity::C_ld;
    case Regularity::C_ld: return Regularity::C_rd;
    case Regularity::C1_rd: return Regularity::C1_ld;
    case Regularity::C1_ld: return Regularity::C1_rd;
    case Regularity::C_prd: return Regularity::C_pld;
    case Regularity::C_pld: return Regularity::C_prd;
    case Regularity::C1_prd: return Regularity::C1_pld;
    case Regularity::C1_pld: return Regularity::C1_prd;
    case Regularity::Smooth: return Regularity::Smooth;
    }
    return r;
}

/// f*(s) = f(-s) on the mirrored scale. Formula-backed functions get a
/// literal t := -t substitution (t^2 becomes (-t)^2); tables get negated
/// keys. Double negations introduced by dualizing twice are collapsed, so
/// the transform is an involution on expression trees as well.
inline TsFunction dual_function(const TsFunction& f) {
    const TimeScale D = dual_scale(f.scale());
    const Regularity reg = dual_regularity(f.regularity());
    if (f.is_table()) {
        std::vector<std::pair<double, double>> tab;
        for (double t : f.scale().discrete_points())
            tab.emplace_back(-t, f.eval(t));
        return TsFunction::from_table(std::move(tab), D, reg);
    }
    Expr e = f.formula().substitute_negate("t").normalize_negations();
    return TsFunction(std::move(e), D, reg);
}

namespace detail {
inline IdentityReport failed_report(std::string name, std::string scale_id,
                                    double tol) {
    return make_report(std::move(name), std::move(scale_id), 0,
                       std::numeric_limits<double>::infinity(), tol);
}
} // namespace detail

/// Jump operators commute with mirroring: on the dual scale,
/// sigma_dual(s) = -rho(-s) and rho_dual(s) = -sigma(-s). Checked exactly
/// (tol is accepted for interface uniformity; the report demands 0).
inline IdentityReport verify_jump_duality(const TimeScale& T, double /*tol*/,
                                          const std::string& scale_id = "scale") {
    const TimeScale D = dual_scale(T);
    const std::vector<double> pts = D.sample_points();
    double max_res = 0.0;
    for (double s : pts) {
        max_res = std::max(max_res, std::fabs(D.sigma(s) - (-T.rho(-s))));
        max_res = std::max(max_res, std::fabs(D.rho(s) - (-T.sigma(-s))));
    }
    return make_report("jump-duality", scale_id,
                       static_cast<long>(2 * pts.size()), max_res, 0.0);
}

/// Kappa truncation swaps sides under mirroring:
/// (T^kappa)* = (T*)_kappa and (T_kappa)* = (T*)^kappa, as sets.
/// Structural comparison of canonical forms; residual is 0 or infinity.
inline IdentityReport verify_kappa_duality(const TimeScale& T,
                                           const std::string& scale_id = "scale") {
    const TimeScale D = dual_scale(T);
    const bool upper_ok = dual_scale(T.kappa_upper()) == D.kappa_lower();
    const bool lower_ok = dual_scale(T.kappa_lower()) == D.kappa_upper();
    const double res = (upper_ok && lower_ok)
                           ? 0.0
                           : std::numeric_limits<double>::infinity();
    return make_report("kappa-duality", scale_id, 2, res, 0.0);
}

/// Graininess swaps flavor under mirroring: nu_dual(s) = mu(-s) and
/// mu_dual(s) = nu(-s). Exact check.
inline IdentityReport verify_graininess_duality(const TimeScale& T, double /*tol*/,
                                                const std::string& scale_id = "scale") {
    const TimeScale D = dual_scale(T);
    const std::vector<double> pts = D.sample_points();
    double max_res = 0.0;
    for (double s : pts) {
        max_res = std::max(max_res, std::fabs(D.nu(s) - T.mu(-s)));
        max_res = std::max(max_res, std::fabs(D.mu(s) - T.nu(-s)));
    }
    return make_report("graininess-duality", scale_id,
                       static_cast<long>(2 * pts.size()), max_res, 0.0);
}

/// Delta derivative of f at t equals minus the nabla derivative of f* at -t,
/// and mirrored with the roles swapped. Each point's pass bound is
/// tol + (sum of the two est_errors); points whose combined error estimate
/// exceeds tol/10 are skipped (recorded by points_checked) rather than
/// failed. max_residual stores the estimate-adjusted excess.
inline IdentityReport verify_derivative_duality(const TsFunction& f, double tol,
                                                const std::string& scale_id = "f") {
    const TsFunction fd = dual_function(f);
    double max_res = 0.0;
    long counted = 0;

    auto run_side = [&](const TsFunction& primal, const TsFunction& mirror,
                        bool primal_delta) {
        const std::vector<double> pts =
            primal_delta ? primal.scale().kappa_upper().sample_points()
                         : primal.scale().kappa_lower().sample_points();
        for (double t : pts) {
            const DerivativeResult d1 = primal_delta ? delta_derivative(primal, t)
                                                     : nabla_derivative(primal, t);
            const DerivativeResult d2 = primal_delta
                                            ? nabla_derivative(mirror, -t)
                                            : delta_derivative(mirror, -t);
            const double est = d1.est_error + d2.est_error;
            if (est > tol / 10.0) continue;
            const double res = std::fabs(d1.value + d2.value);
            max_res = std::max(max_res, std::max(0.0, res - est));
            ++counted;
        }
    };
    run_side(f, fd, true);
    run_side(f, fd, false);
    return make_report("derivative-duality", scale_id, counted, max_res, tol);
}

/// Delta integral of f over [a,b] equals the nabla integral of f* over
/// [-b,-a] on the mirrored scale.
inline IdentityReport verify_integral_duality(const TsFunction& f, double a,
                                              double b, double tol,
                                              const std::string& scale_id = "f") {
    const TsFunction fd = dual_function(f);
    const double lhs = delta_integral(f, a, b);
    const double rhs = nabla_integral(fd, -b, -a);
    return make_report("integral-duality", scale_id, 1, std::fabs(lhs - rhs), tol);
}

/// Per-kind tolerances for the full identity matrix. The single-tolerance
/// entry point uses one value for all analytic cells; structural cells are
/// always exact.
struct MatrixTolerances {
    double identity = 1e-8;
    double integral = 1e-9;
    double derivative = 1e-6;
};

/// Run the whole identity battery over named scales and named functions.
/// Cell order is fixed: per scale [jump, kappa, graininess], then per
/// function [derivative-duality, integral-duality, sigma-formula,
/// rho-formula, sigma-formula-dual, rho-formula-dual, ibp-delta,
/// ibp-nabla]. A cell that throws is recorded as failed (infinite
/// residual); the matrix never aborts. Cells whose identity needs at least
/// two points are omitted for single-point scales.
inline std::vector<IdentityReport> run_duality_matrix(
    const std::vector<std::pair<std::string, TimeScale>>& scales,
    const std::vector<std::pair<std::string, TsFunction>>& functions,
    const MatrixTolerances& tols) {
    std::vector<IdentityReport> out;

    auto cell = [&](const std::string& name, const std::string& id, double tol,
                    auto&& fn) {
        try {
            out.push_back(fn());
        } catch (const Error&) {
            out.push_back(detail::failed_report(name, id, tol));
        }
    };

    for (const auto& [sname, T] : scales) {
        cell("jump-duality", sname, 0.0,
             [&] { return verify_jump_duality(T, 0.0, sname); });
        if (!T.is_single_point())
            cell("kappa-duality", sname, 0.0,
                 [&] { return verify_kappa_duality(T, sname); });
        cell("graininess-duality", sname, 0.0,
             [&] { return verify_graininess_duality(T, 0.0, sname); });
    }

    for (const auto& [fname, f] : functions) {
        const std::string id = fname;
        const bool single = f.scale().is_single_point();
        if (!single) {
            cell("derivative-duality", id, tols.derivative, [&] {
                return verify_derivative_duality(f, tols.derivative, id);
            });
        }
        cell("integral-duality", id, tols.integral, [&] {
            return verify_integral_duality(f, f.scale().min(), f.scale().max(),
                                           tols.integral, id);
        });
        if (!single) {
            cell("sigma-formula", id, tols.identity,
                 [&] { return check_sigma_formula(f, tols.identity, id); });
            cell("rho-formula", id, tols.identity,
                 [&] { return check_rho_formula(f, tols.identity, id); });
            // duality pairing: the mirrored statements on the dual function
            cell("sigma-formula-dual", id, tols.identity, [&] {
                IdentityReport r =
                    check_rho_formula(dual_function(f), tols.identity, id);
                r.identity_name = "sigma-formula-dual";
                return r;
            });
            cell("rho-formula-dual", id, tols.identity, [&] {
                IdentityReport r =
                    check_sigma_formula(dual_function(f), tols.identity, id);
                r.identity_name = "rho-formula-dual";
                return r;
            });
        }
        cell("integration-by-parts-delta", id, tols.integral, [&] {
            return check_integration_by_parts_delta(f, f, f.scale().min(),
                                                    f.scale().max(),
                                                    tols.integral, id);
        });
        cell("integration-by-parts-nabla", id, tols.integral, [&] {
            return check_integration_by_parts_nabla(f, f, f.scale().min(),
                                                    f.scale().max(),
                                                    tols.integral, id);
        });
    }
    return out;
}

/// Anonymous-instance entry point: one tolerance for every analytic cell.
inline std::vector<IdentityReport> run_duality_matrix(
    const std::vector<TimeScale>& scales, const std::vector<TsFunction>& functions,
    double tol) {
    std::vector<std::pair<std::string, TimeScale>> named_scales;
    for (std::size_t i = 0; i < scales.size(); ++i)
        named_scales.emplace_back("scale" + std::to_string(i), scales[i]);
    std::vector<std::pair<std::string, TsFunction>> named_fns;
    for (std::size_t i = 0; i < functions.size(); ++i)
        named_fns.emplace_back("f" + std::to_string(i), functions[i]);
    return run_duality_matrix(named_scales, named_fns,
                              MatrixTolerances{tol, tol, tol});
}

} // namespace tsc
