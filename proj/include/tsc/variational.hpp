#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tsc/calculus.hpp"
#include "tsc/duality.hpp"
#include "tsc/errors.hpp"
#include "tsc/expr.hpp"
#include "tsc/report.hpp"
#include "tsc/time_scale.hpp"

namespace tsc {

/// Integrand L(t, x, v) with cached symbolic partials up to second order.
/// x is the state slot, v the velocity slot.
class Lagrangian {
public:
    explicit Lagrangian(Expr e)
        : L_(std::move(e)),
          Lx_(L_.diff("x")),
          Lv_(L_.diff("v")),
          Lxx_(Lx_.diff("x")),
          Lxv_(Lx_.diff("v")),
          Lvv_(Lv_.diff("v")) {}

    static Lagrangian parse(const std::string& text) {
        return Lagrangian(Expr::parse(text, {"t", "x", "v"}));
    }

    double eval(double t, double x, double v) const { return at(L_, t, x, v); }
    double lx(double t, double x, double v) const { return at(Lx_, t, x, v); }
    double lv(double t, double x, double v) const { return at(Lv_, t, x, v); }
    double lxx(double t, double x, double v) const { return at(Lxx_, t, x, v); }
    double lxv(double t, double x, double v) const { return at(Lxv_, t, x, v); }
    double lvv(double t, double x, double v) const { return at(Lvv_, t, x, v); }

    const Expr& formula() const { return L_; }
    const Expr& formula_x() const { return Lx_; }
    const Expr& formula_v() const { return Lv_; }

    /// Mirrored integrand L*(s, x, v) = L(-s, x, -v).
    Lagrangian dual() const {
        Expr e = L_.substitute_negate("t").substitute_negate("v")
                     .normalize_negations();
        return Lagrangian(std::move(e));
    }

    friend bool operator==(const Lagrangian& a, const Lagrangian& b) {
        return a.L_ == b.L_;
    }

private:
    static double at(const Expr& e, double t, double x, double v) {
        return e.eval3("t", t, "x", x, "v", v);
    }
    Expr L_, Lx_, Lv_, Lxx_, Lxv_, Lvv_;
};

enum class Setting { Delta, Nabla };

inline const char* to_string(Setting s) {
    return s == Setting::Delta ? "delta" : "nabla";
}

inline Setting setting_from_string(const std::string& s) {
    if (s == "delta") return Setting::Delta;
    if (s == "nabla") return Setting::Nabla;
    throw InvalidArgument("setting must be 'delta' or 'nabla'");
}

/// Fixed-endpoint problem: extremize the integral of L(t, y-after-jump,
/// y-derivative) over [a, b] in the scale, with y(a) = alpha, y(b) = beta.
struct VariationalProblem {
    Lagrangian lagrangian;
    TimeScale scale;
    double a, b;
    double alpha, beta;
    Setting setting;

    VariationalProblem(Lagrangian L, TimeScale T, double a_, double b_,
                       double alpha_, double beta_, Setting s)
        : lagrangian(std::move(L)), scale(std::move(T)), a(a_), b(b_),
          alpha(alpha_), beta(beta_), setting(s) {
        if (!scale.contains(a) || !scale.contains(b))
            throw EndpointNotInScale("problem endpoints must lie in the scale");
        if (a >= b) throw OrderViolation("problem needs a < b");
    }

    /// The working window [a,b] as a scale.
    TimeScale window() const { return scale.restrict(a, b); }
};

/// Mirror problem: integrand dualized, scale mirrored, endpoints negated and
/// swapped, boundary values traveling with their endpoints, setting flipped.
/// Applying this twice restores every field exactly.
inline VariationalProblem dual_problem(const VariationalProblem& p) {
    return VariationalProblem(
        p.lagrangian.dual(), dual_scale(p.scale), -p.b, -p.a, p.beta, p.alpha,
        p.setting == Setting::Delta ? Setting::Nabla : Setting::Delta);
}

/// Trial trajectory for a problem. kinks lists the (dense) points where the
/// derivative is allowed to jump; the excess check evaluates one-sided
/// values there.
struct Candidate {
    TsFunction y;
    std::vector<double> kinks;
};

inline Candidate make_candidate(const VariationalProblem& p, TsFunction y,
                                std::vector<double> kinks = {}) {
    if (std::fabs(y.eval(p.a) - p.alpha) > 1e-12 ||
        std::fabs(y.eval(p.b) - p.beta) > 1e-12)
        throw InvalidArgument("candidate violates the boundary conditions");
    std::sort(kinks.begin(), kinks.end());
    return Candidate{std::move(y), std::move(kinks)};
}

inline Candidate dual_candidate(const Candidate& c) {
    std::vector<double> kinks;
    for (double k : c.kinks) kinks.push_back(-k);
    std::sort(kinks.begin(), kinks.end());
    return Candidate{dual_function(c.y), std::move(kinks)};
}

/// Value of the action integral along a candidate. The inner derivative of
/// y is exact (quotients at jumps, symbolic inside continuous pieces), so
/// the only numerical error is the quadrature's.
inline double functional_value(const VariationalProblem& p, const Candidate& c) {
    const TimeScale R = p.window();
    if (p.setting == Setting::Delta) {
        return delta_integral_over(R, p.a, p.b, [&](double t, EvalMode m) {
            if (m == EvalMode::Scattered) {
                const double s = R.sigma(t);
                const double x = c.y.eval(s);
                const double v = (c.y.eval(s) - c.y.eval(t)) / (s - t);
                return p.lagrangian.eval(t, x, v);
            }
            return p.lagrangian.eval(t, c.y.eval(t),
                                     c.y.derivative_value_dense(t));
        });
    }
    return nabla_integral_over(R, p.a, p.b, [&](double t, EvalMode m) {
        if (m == EvalMode::Scattered) {
            const double r = R.rho(t);
            const double x = c.y.eval(r);
            const double v = (c.y.eval(t) - c.y.eval(r)) / (t - r);
            return p.lagrangian.eval(t, x, v);
        }
        return p.lagrangian.eval(t, c.y.eval(t), c.y.derivative_value_dense(t));
    });
}

namespace detail {

/// Forward-theory composed map g(t) = Lv(t, y(sigma(t)), y_delta(t)) on the
/// window's upper kappa truncation.
struct DeltaComposition {
    const VariationalProblem* p;
    const Candidate* c;
    const TimeScale* window;

    double state(double t) const { return c->y.eval(window->sigma(t)); }
    double velocity(double t) const { return delta_derivative_exact(c->y, t); }
    double lv(double t) const {
        return p->lagrangian.lv(t, state(t), velocity(t));
    }
    double lx(double t) const {
        return p->lagrangian.lx(t, state(t), velocity(t));
    }
};

struct NablaComposition {
    const VariationalProblem* p;
    const Candidate* c;
    const TimeScale* window;

    double state(double t) const { return c->y.eval(window->rho(t)); }
    double velocity(double t) const { return nabla_derivative_exact(c->y, t); }
    double lv(double t) const {
        return p->lagrangian.lv(t, state(t), velocity(t));
    }
    double lx(double t) const {
        return p->lagrangian.lx(t, state(t), velocity(t));
    }
};

} // namespace detail

/// Euler-Lagrange residual of the forward theory at t (zero along a
/// minimizer): the delta derivative of t -> Lv(t, y^sigma, y^delta) minus
/// Lx(t, y^sigma, y^delta). t must lie in the window's upper kappa
/// truncation; right-scattered t additionally needs the *next* point to
/// stay inside it, or the outer quotient would leave the domain.
inline double el_residual_delta(const VariationalProblem& p, const Candidate& c,
                                double t) {
    if (p.setting != Setting::Delta)
        throw InvalidArgument("delta residual on a nabla problem");
    const TimeScale R = p.window();
    const TimeScale K = R.kappa_upper();
    if (!K.contains(t))
        throw NotInDomainKappa("t outside the Euler-Lagrange domain");
    // The outer map is delta-differentiated over K, so t must survive a
    // second kappa cut. This also rules out the dense branch ever landing
    // on a degenerate segment.
    if (K.is_single_point() || !K.kappa_upper().contains(t))
        throw NotInDomainKappa("no room for the outer derivative");
    const detail::DeltaComposition comp{&p, &c, &R};

    double outer;
    if (K.mu(t) > 0.0) {
        const double s = K.sigma(t);
        outer = (comp.lv(s) - comp.lv(t)) / (s - t);
    } else {
        const Segment& seg =
            K.segments()[static_cast<std::size_t>(K.segment_index(t))];
        const bool forward = t < seg.hi;
        const double room = forward ? seg.hi - t : t - seg.lo;
        outer = detail::dense_limit_derivative(
                    [&](double s) { return comp.lv(s); }, t, room,
                    forward ? +1 : -1)
                    .value;
    }
    return outer - comp.lx(t);
}

/// Backward-theory mirror: the nabla derivative of
/// t -> Lv(t, y^rho, y^nabla) minus Lx(t, y^rho, y^nabla), on the window's
/// lower kappa truncation.
inline double el_residual_nabla(const VariationalProblem& p, const Candidate& c,
                                double t) {
    if (p.setting != Setting::Nabla)
        throw InvalidArgument("nabla residual on a delta problem");
    const TimeScale R = p.window();
    const TimeScale K = R.kappa_lower();
    if (!K.contains(t))
        throw NotInDomainKappa("t outside the Euler-Lagrange domain");
    if (K.is_single_point() || !K.kappa_lower().contains(t))
        throw NotInDomainKappa("no room for the outer derivative");
    const detail::NablaComposition comp{&p, &c, &R};

    double outer;
    if (K.nu(t) > 0.0) {
        const double r = K.rho(t);
        outer = (comp.lv(t) - comp.lv(r)) / (t - r);
    } else {
        const Segment& seg =
            K.segments()[static_cast<std::size_t>(K.segment_index(t))];
        const bool backward = t > seg.lo;
        const double room = backward ? t - seg.lo : seg.hi - t;
        outer = detail::dense_limit_derivative(
                    [&](double s) { return comp.lv(s); }, t, room,
                    backward ? -1 : +1)
                    .value;
    }
    return outer - comp.lx(t);
}

/// Grid of points where the Euler-Lagrange residual of p's setting is
/// defined: the window's kappa sample points, minus scattered points whose
/// outer quotient would need a neighbour outside the domain.
inline std::vector<double> el_domain_points(const VariationalProblem& p) {
    const TimeScale R = p.window();
    const TimeScale K =
        p.setting == Setting::Delta ? R.kappa_upper() : R.kappa_lower();
    if (K.is_single_point()) return {};
    const TimeScale KK =
        p.setting == Setting::Delta ? K.kappa_upper() : K.kappa_lower();
    std::vector<double> out;
    for (double t : K.sample_points())
        if (KK.contains(t)) out.push_back(t);
    return out;
}

/// Weierstrass excess E(t, x, r, q) = L(t,x,q) - L(t,x,r) - (q-r) Lv(t,x,r).
inline double weierstrass_excess(const Lagrangian& L, double t, double x,
                                 double r, double q) {
    return L.eval(t, x, q) - L.eval(t, x, r) - (q - r) * L.lv(t, x, r);
}

struct WeierstrassResult {
    IdentityReport report;
    double min_excess = 0.0;
    double argmin_t = 0.0;
    double argmin_q = 0.0;
};

namespace detail {

/// Sampled graininess-weighted convexity-in-v screen. Throws with the first
/// violating witness. slack absorbs rounding in the comparison.
template <typename GrainFn, typename LagEval>
void convexity_precondition(const std::vector<double>& ts, GrainFn&& grain,
                            const std::vector<double>& xs, double r_lo,
                            double r_hi, LagEval&& L) {
    static const double gammas[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    constexpr int kR = 9;
    for (double t : ts) {
        const double w = grain(t);
        if (w <= 0.0) continue; // vacuous at dense points
        for (double x : xs) {
            for (int i = 0; i < kR; ++i) {
                const double r1 = r_lo + (r_hi - r_lo) * i / (kR - 1);
                for (int j = 0; j < kR; ++j) {
                    const double r2 = r_lo + (r_hi - r_lo) * j / (kR - 1);
                    for (double gamma : gammas) {
                        const double mid = gamma * r1 + (1.0 - gamma) * r2;
                        const double lhs = w * L(t, x, mid);
                        const double rhs =
                            w * (gamma * L(t, x, r1) + (1.0 - gamma) * L(t, x, r2));
                        if (lhs > rhs + 1e-10 * (1.0 + std::fabs(rhs)))
                            throw ConvexityPreconditionFailed(
                                "graininess-weighted convexity violated", t, x,
                                gamma, r1, r2);
                    }
                }
            }
        }
    }
}

inline std::vector<double> quantiles5(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    if (v.empty()) return out;
    const std::size_t n = v.size();
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0})
        out.push_back(v[static_cast<std::size_t>(q * (n - 1))]);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline bool is_kink(const std::vector<double>& kinks, double t) {
    return std::binary_search(kinks.begin(), kinks.end(), t);
}

} // namespace detail

/// Candidate-derivative values over the residual-domain grid, with both
/// one-sided values at declared kinks.
inline std::vector<double> candidate_slopes(const VariationalProblem& p,
                                            const Candidate& c) {
    const TimeScale R = p.window();
    const TimeScale K =
        p.setting == Setting::Delta ? R.kappa_upper() : R.kappa_lower();
    std::vector<double> slopes;
    for (double t : K.sample_points()) {
        if (detail::is_kink(c.kinks, t)) {
            const double d = 1e-7 * (1.0 + std::fabs(t));
            slopes.push_back(c.y.derivative_value_dense(t - d));
            slopes.push_back(c.y.derivative_value_dense(t + d));
            continue;
        }
        slopes.push_back(p.setting == Setting::Delta
                             ? delta_derivative_exact(c.y, t)
                             : nabla_derivative_exact(c.y, t));
    }
    return slopes;
}

/// Default q sweep: 41 points spanning the candidate's slope range padded
/// by 2 on each side.
inline std::vector<double> default_q_grid(const VariationalProblem& p,
                                          const Candidate& c) {
    const std::vector<double> slopes = candidate_slopes(p, c);
    double lo = slopes.front(), hi = slopes.front();
    for (double s : slopes) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    lo -= 2.0;
    hi += 2.0;
    std::vector<double> grid;
    for (int i = 0; i < 41; ++i) grid.push_back(lo + (hi - lo) * i / 40.0);
    return grid;
}

/// Excess nonnegativity along a candidate in the forward theory. First
/// screens the graininess-weighted convexity hypothesis by sampling (throws
/// ConvexityPreconditionFailed with a witness), then reports
/// min E(t, y^sigma, y^delta, q) over the domain grid and q_grid. At
/// declared kinks both one-sided slopes are tested in the r slot.
inline WeierstrassResult check_weierstrass_delta(const VariationalProblem& p,
                                                 const Candidate& c,
                                                 const std::vector<double>& q_grid,
                                                 double tol,
                                                 const std::string& scale_id = "p") {
    if (p.setting != Setting::Delta)
        throw InvalidArgument("delta excess check on a nabla problem");
    if (q_grid.empty()) throw InvalidArgument("empty q grid");
    const TimeScale R = p.window();
    const TimeScale K = R.kappa_upper();
    const std::vector<double> pts = K.sample_points();

    std::vector<double> xs;
    for (double t : pts) xs.push_back(c.y.eval(R.sigma(t)));
    const double q_lo = *std::min_element(q_grid.begin(), q_grid.end());
    const double q_hi = *std::max_element(q_grid.begin(), q_grid.end());
    detail::convexity_precondition(
        pts, [&](double t) { return R.mu(t); }, detail::quantiles5(xs), q_lo,
        q_hi, [&](double t, double x, double v) { return p.lagrangian.eval(t, x, v); });

    WeierstrassResult res;
    res.min_excess = HUGE_VAL;
    long count = 0;
    for (double t : pts) {
        const double x = c.y.eval(R.sigma(t));
        std::vector<double> rs;
        if (detail::is_kink(c.kinks, t)) {
            const double d = 1e-7 * (1.0 + std::fabs(t));
            rs = {c.y.derivative_value_dense(t - d),
                  c.y.derivative_value_dense(t + d)};
        } else {
            rs = {delta_derivative_exact(c.y, t)};
        }
        for (double r : rs) {
            for (double q : q_grid) {
                const double e = weierstrass_excess(p.lagrangian, t, x, r, q);
                ++count;
                if (e < res.min_excess) {
                    res.min_excess = e;
                    res.argmin_t = t;
                    res.argmin_q = q;
                }
            }
        }
    }
    res.report = make_report("weierstrass-delta", scale_id, count,
                             std::max(0.0, -res.min_excess), tol);
    return res;
}

/// Backward-theory mirror along y^rho and y^nabla, screened by the
/// nu-weighted convexity hypothesis.
inline WeierstrassResult check_weierstrass_nabla(const VariationalProblem& p,
                                                 const Candidate& c,
                                                 const std::vector<double>& q_grid,
                                                 double tol,
                                                 const std::string& scale_id = "p") {
    if (p.setting != Setting::Nabla)
        throw InvalidArgument("nabla excess check on a delta problem");
    if (q_grid.empty()) throw InvalidArgument("empty q grid");
    const TimeScale R = p.window();
    const TimeScale K = R.kappa_lower();
    const std::vector<double> pts = K.sample_points();

    std::vector<double> xs;
    for (double t : pts) xs.push_back(c.y.eval(R.rho(t)));
    const double q_lo = *std::min_element(q_grid.begin(), q_grid.end());
    const double q_hi = *std::max_element(q_grid.begin(), q_grid.end());
    detail::convexity_precondition(
        pts, [&](double t) { return R.nu(t); }, detail::quantiles5(xs), q_lo,
        q_hi, [&](double t, double x, double v) { return p.lagrangian.eval(t, x, v); });

    WeierstrassResult res;
    res.min_excess = HUGE_VAL;
    long count = 0;
    for (double t : pts) {
        const double x = c.y.eval(R.rho(t));
        std::vector<double> rs;
        if (detail::is_kink(c.kinks, t)) {
            const double d = 1e-7 * (1.0 + std::fabs(t));
            rs = {c.y.derivative_value_dense(t - d),
                  c.y.derivative_value_dense(t + d)};
        } else {
            rs = {nabla_derivative_exact(c.y, t)};
        }
        for (double r : rs) {
            for (double q : q_grid) {
                const double e = weierstrass_excess(p.lagrangian, t, x, r, q);
                ++count;
                if (e < res.min_excess) {
                    res.min_excess = e;
                    res.argmin_t = t;
                    res.argmin_q = q;
                }
            }
        }
    }
    res.report = make_report("weierstrass-nabla", scale_id, count,
                             std::max(0.0, -res.min_excess), tol);
    return res;
}

/// Exact finite-sum minimizer for purely discrete windows: damped Newton on
/// the interior values with the symbolic tridiagonal Hessian, started from
/// the linear interpolant of the boundary data. Returns a table-backed
/// candidate on the window.
inline Candidate minimize_discrete(const VariationalProblem& p) {
    const TimeScale R = p.window();
    if (!R.is_discrete())
        throw InvalidArgument("discrete minimizer needs a purely discrete window");
    const std::vector<double> t = R.discrete_points();
    const std::size_t N = t.size() - 1;
    if (N < 2) throw InvalidArgument("need at least one interior point");
    if (N > 10000) throw InvalidArgument("window too large for the dense solver");

    std::vector<double> gap(N); // gap[i] = t[i+1] - t[i]
    for (std::size_t i = 0; i < N; ++i) gap[i] = t[i + 1] - t[i];

    std::vector<double> y(N + 1);
    y[0] = p.alpha;
    y[N] = p.beta;
    for (std::size_t i = 1; i < N; ++i)
        y[i] = p.alpha + (p.beta - p.alpha) * (t[i] - t[0]) / (t[N] - t[0]);

    const Lagrangian& L = p.lagrangian;
    const bool delta = p.setting == Setting::Delta;

    // Delta form sums gap[i] * L(t[i], y[i+1], d[i]) over i = 0..N-1 with
    // d[i] = (y[i+1]-y[i])/gap[i]; nabla form sums gap[i-1] * L(t[i],
    // y[i-1], d[i-1]) over i = 1..N. Both depend on the interior values
    // through consecutive slots only, so the Hessian is tridiagonal.
    auto objective = [&](const std::vector<double>& z) {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double d = (z[i + 1] - z[i]) / gap[i];
            s += delta ? gap[i] * L.eval(t[i], z[i + 1], d)
                       : gap[i] * L.eval(t[i + 1], z[i], d);
        }
        return s;
    };

    auto gradient = [&](const std::vector<double>& z, std::vector<double>& g) {
        for (std::size_t k = 1; k < N; ++k) {
            const double dm = (z[k] - z[k - 1]) / gap[k - 1];
            const double dp = (z[k + 1] - z[k]) / gap[k];
            if (delta) {
                g[k - 1] = gap[k - 1] * L.lx(t[k - 1], z[k], dm) +
                           L.lv(t[k - 1], z[k], dm) - L.lv(t[k], z[k + 1], dp);
            } else {
                g[k - 1] = L.lv(t[k], z[k - 1], dm) - L.lv(t[k + 1], z[k], dp) +
                           gap[k] * L.lx(t[k + 1], z[k], dp);
            }
        }
    };

    auto hessian = [&](const std::vector<double>& z, std::vector<double>& diag,
                       std::vector<double>& off) {
        for (std::size_t k = 1; k < N; ++k) {
            const double dm = (z[k] - z[k - 1]) / gap[k - 1];
            const double dp = (z[k + 1] - z[k]) / gap[k];
            if (delta) {
                diag[k - 1] = gap[k - 1] * L.lxx(t[k - 1], z[k], dm) +
                              2.0 * L.lxv(t[k - 1], z[k], dm) +
                              L.lvv(t[k - 1], z[k], dm) / gap[k - 1] +
                              L.lvv(t[k], z[k + 1], dp) / gap[k];
                if (k + 1 < N)
                    off[k - 1] = -(L.lxv(t[k], z[k + 1], dp) +
                                   L.lvv(t[k], z[k + 1], dp) / gap[k]);
            } else {
                diag[k - 1] = L.lvv(t[k], z[k - 1], dm) / gap[k - 1] +
                              L.lvv(t[k + 1], z[k], dp) / gap[k] -
                              2.0 * L.lxv(t[k + 1], z[k], dp) +
                              gap[k] * L.lxx(t[k + 1], z[k], dp);
                if (k + 1 < N)
                    off[k - 1] = L.lxv(t[k + 1], z[k], dp) -
                                 L.lvv(t[k + 1], z[k], dp) / gap[k];
            }
        }
    };

    const std::size_t M = N - 1;
    std::vector<double> g(M), diag(M), off(M > 1 ? M - 1 : 0), step(M);
    std::vector<double> trial(N + 1);

    double fval = objective(y);
    bool converged = false;
    double gnorm = HUGE_VAL;
    for (int iter = 0; iter < 200; ++iter) {
        gradient(y, g);
        gnorm = 0.0;
        for (double v : g) gnorm = std::max(gnorm, std::fabs(v));
        if (gnorm <= 1e-12 * (1.0 + std::fabs(fval))) {
            converged = true;
            break;
        }
        hessian(y, diag, off);

        // Thomas solve H * step = -g
        std::vector<double> cp(M), dp(M);
        double scale = 0.0;
        for (double v : diag) scale = std::max(scale, std::fabs(v));
        if (scale == 0.0) throw SingularHessian("zero Hessian");
        double piv = diag[0];
        if (std::fabs(piv) < 1e-14 * scale) throw SingularHessian("zero pivot");
        cp[0] = M > 1 ? off[0] / piv : 0.0;
        dp[0] = -g[0] / piv;
        for (std::size_t i = 1; i < M; ++i) {
            piv = diag[i] - off[i - 1] * cp[i - 1];
            if (std::fabs(piv) < 1e-14 * scale)
                throw SingularHessian("zero pivot");
            cp[i] = i + 1 < M ? off[i] / piv : 0.0;
            dp[i] = (-g[i] - off[i - 1] * dp[i - 1]) / piv;
        }
        step[M - 1] = dp[M - 1];
        for (std::size_t i = M - 1; i-- > 0;)
            step[i] = dp[i] - cp[i] * step[i + 1];

        double slope = 0.0; // directional derivative of the objective
        for (std::size_t i = 0; i < M; ++i) slope += g[i] * step[i];

        double s = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt, s *= 0.5) {
            trial = y;
            for (std::size_t i = 0; i < M; ++i) trial[i + 1] = y[i + 1] + s * step[i];
            double ftrial;
            try {
                ftrial = objective(trial);
            } catch (const DomainError&) {
                continue; // step left the integrand's domain; shrink
            }
            if (ftrial <= fval + 1e-4 * s * slope) {
                y = trial;
                fval = ftrial;
                accepted = true;
                break;
            }
        }
        if (!accepted) break; // line search stalled; report via gnorm below
    }
    if (!converged) {
        gradient(y, g);
        gnorm = 0.0;
        for (double v : g) gnorm = std::max(gnorm, std::fabs(v));
        if (gnorm > 1e-12 * (1.0 + std::fabs(fval)))
            throw NonConvergence("discrete minimizer did not converge", gnorm);
    }

    std::vector<std::pair<double, double>> table;
    for (std::size_t i = 0; i <= N; ++i) table.emplace_back(t[i], y[i]);
    TsFunction yfun = TsFunction::from_table(
        std::move(table), R, delta ? Regularity::C1_rd : Regularity::C1_ld);
    return Candidate{std::move(yfun), {}};
}

} // namespace tsc
