#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "tsc/generators.hpp"
#include "tsc/quadrature.hpp"
#include "tsc/random.hpp"
#include "tsc/variational.hpp"

using namespace tsc;

namespace {

VariationalProblem problem(const std::string& L, const TimeScale& T, double a,
                           double b, double alpha, double beta, Setting s) {
    return VariationalProblem(Lagrangian::parse(L), T, a, b, alpha, beta, s);
}

Candidate expr_candidate(const VariationalProblem& p, const std::string& y) {
    return make_candidate(p, TsFunction(Expr::parse(y, {"t"}), p.scale,
                                        Regularity::Smooth));
}

// Forward-sum oracle for the action on a purely discrete delta problem:
//   sum over consecutive points of mu_i L(t_i, y_{i+1}, (y_{i+1}-y_i)/mu_i).
double discrete_action_ref(const VariationalProblem& p,
                           const std::vector<double>& y) {
    const std::vector<double>& t = p.window().discrete_points();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double mu = t[i + 1] - t[i];
        const double d = (y[i + 1] - y[i]) / mu;
        acc += mu * p.lagrangian.eval(t[i], y[i + 1], d);
    }
    return acc;
}

} // namespace

TEST_CASE("lagrangian partials agree with finite differences") {
    Lagrangian L = Lagrangian::parse("v^2/2 + t*x^2 + sin(x*v)");
    const double t = 0.7, x = -0.4, v = 1.3, h = 1e-5;
    auto dx = (L.eval(t, x + h, v) - L.eval(t, x - h, v)) / (2 * h);
    auto dv = (L.eval(t, x, v + h) - L.eval(t, x, v - h)) / (2 * h);
    REQUIRE(std::fabs(L.lx(t, x, v) - dx) < 1e-8);
    REQUIRE(std::fabs(L.lv(t, x, v) - dv) < 1e-8);
    auto dxx = (L.lx(t, x + h, v) - L.lx(t, x - h, v)) / (2 * h);
    auto dxv = (L.lx(t, x, v + h) - L.lx(t, x, v - h)) / (2 * h);
    auto dvv = (L.lv(t, x, v + h) - L.lv(t, x, v - h)) / (2 * h);
    REQUIRE(std::fabs(L.lxx(t, x, v) - dxx) < 1e-7);
    REQUIRE(std::fabs(L.lxv(t, x, v) - dxv) < 1e-7);
    REQUIRE(std::fabs(L.lvv(t, x, v) - dvv) < 1e-7);
}

TEST_CASE("problem construction validates endpoints") {
    TimeScale T = make_scale({{0, 1}});
    REQUIRE_NOTHROW(problem("v^2", T, 0, 1, 0, 0, Setting::Delta));
    REQUIRE_THROWS_AS(problem("v^2", T, 0, 2, 0, 0, Setting::Delta),
                      EndpointNotInScale);
    REQUIRE_THROWS_AS(problem("v^2", T, 1, 0, 0, 0, Setting::Delta),
                      OrderViolation);
}

TEST_CASE("dual problem mirrors every field and is an involution") {
    TimeScale T = make_scale({{0, 0.25}, {0.5, 0.5}, {0.75, 1}});
    VariationalProblem p =
        problem("v^2/2 + t*x", T, 0, 1, 2, 3, Setting::Delta);
    VariationalProblem d = dual_problem(p);

    REQUIRE(d.scale == dual_scale(T));
    REQUIRE(d.a == -1.0);
    REQUIRE(d.b == 0.0);
    REQUIRE(d.alpha == 3.0); // boundary value travels with its endpoint
    REQUIRE(d.beta == 2.0);
    REQUIRE(d.setting == Setting::Nabla);
    // L*(s,x,v) = L(-s,x,-v)
    REQUIRE(d.lagrangian.eval(-0.5, 2.0, -1.5) ==
            p.lagrangian.eval(0.5, 2.0, 1.5));

    VariationalProblem dd = dual_problem(d);
    REQUIRE(dd.scale == p.scale);
    REQUIRE(dd.a == p.a);
    REQUIRE(dd.b == p.b);
    REQUIRE(dd.alpha == p.alpha);
    REQUIRE(dd.beta == p.beta);
    REQUIRE(dd.setting == p.setting);
    REQUIRE(dd.lagrangian == p.lagrangian); // structural, not just pointwise
}

TEST_CASE("candidates enforce boundary conditions, duals negate kinks") {
    TimeScale T = make_scale({{0, 1}});
    VariationalProblem p = problem("v^2", T, 0, 1, 0, 1, Setting::Delta);
    REQUIRE_NOTHROW(expr_candidate(p, "t"));
    REQUIRE_THROWS_AS(expr_candidate(p, "t + 0.5"), InvalidArgument);

    Candidate c = make_candidate(p, TsFunction(Expr::parse("t", {"t"}), T,
                                               Regularity::Smooth),
                                 {0.75, 0.25});
    REQUIRE(c.kinks == std::vector<double>{0.25, 0.75});
    Candidate d = dual_candidate(c);
    REQUIRE(d.kinks == std::vector<double>{-0.75, -0.25});
    REQUIRE(d.y.eval(-0.5) == c.y.eval(0.5));
}

TEST_CASE("functional value matches quadrature on a continuum") {
    TimeScale T = make_scale({{0, 1}});
    VariationalProblem p =
        problem("v^2/2 + x", T, 0, 1, 0, 0.5, Setting::Delta);
    Candidate c = expr_candidate(p, "t/2");
    // oracle: integral of (1/8 + t/2) over [0,1]
    const double want = 0.125 + 0.25;
    REQUIRE(std::fabs(functional_value(p, c) - want) < 1e-10);

    VariationalProblem pn =
        problem("v^2/2 + x", T, 0, 1, 0, 0.5, Setting::Nabla);
    REQUIRE(std::fabs(functional_value(pn, c) - want) < 1e-10);
}

TEST_CASE("functional value matches the forward sum on a discrete window") {
    TimeScale D = make_scale({{0, 0}, {0.5, 0.5}, {0.75, 0.75}, {1, 1}});
    VariationalProblem p =
        problem("v^2/2 + t*x^2", D, 0, 1, 1, -1, Setting::Delta);
    Candidate c = expr_candidate(p, "1 - 2*t");
    const std::vector<double> yv = {1.0, 0.0, -0.5, -1.0};
    REQUIRE(functional_value(p, c) == discrete_action_ref(p, yv));
}

TEST_CASE("classical solution satisfies both Euler-Lagrange equations") {
    TimeScale T = make_scale({{0, 1}});
    // stationary trajectory of v^2/2 + x with fixed ends 0 and 1
    VariationalProblem pd =
        problem("v^2/2 + x", T, 0, 1, 0, 1, Setting::Delta);
    VariationalProblem pn =
        problem("v^2/2 + x", T, 0, 1, 0, 1, Setting::Nabla);
    Candidate cd = expr_candidate(pd, "t^2/2 + t/2");
    Candidate cn = expr_candidate(pn, "t^2/2 + t/2");
    for (double t : el_domain_points(pd))
        REQUIRE(std::fabs(el_residual_delta(pd, cd, t)) <= 1e-6);
    for (double t : el_domain_points(pn))
        REQUIRE(std::fabs(el_residual_nabla(pn, cn, t)) <= 1e-6);

    // a non-solution leaves a visible residual
    Candidate bad = expr_candidate(pd, "t");
    REQUIRE(std::fabs(el_residual_delta(pd, bad, 0.5)) > 0.5);
    // setting mismatch is rejected
    REQUIRE_THROWS_AS(el_residual_nabla(pd, cd, 0.5), InvalidArgument);
    // outside the admissible domain
    REQUIRE_THROWS_AS(el_residual_delta(pd, cd, 2.0), NotInDomainKappa);
}

TEST_CASE("discrete residual equals the hand-built quotient") {
    TimeScale D = make_scale({{0, 0}, {0.5, 0.5}, {0.75, 0.75}, {1, 1}});
    VariationalProblem p =
        problem("v^2/2 + x^2/2", D, 0, 1, 1, 0, Setting::Delta);
    Candidate c = expr_candidate(p, "1 - t");

    // outer quotient of g(t) = Lv(t, y(sigma), y-slope) minus Lx at t = 0:
    //   g(0) = slope on [0,0.5] = -1, g(0.5) = slope on [0.5,0.75] = -1
    //   residual = (g(0.5)-g(0))/0.5 - Lx(0, y(0.5), -1) = 0 - 0.5 = -0.5
    const double got = el_residual_delta(p, c, 0.0);
    REQUIRE(std::fabs(got - (-0.5)) < 1e-14);

    // admissible points stop two short of the right end
    REQUIRE(el_domain_points(p) == std::vector<double>{0.0, 0.5});
    REQUIRE_THROWS_AS(el_residual_delta(p, c, 0.75), NotInDomainKappa);

    // nabla mirror on the dual problem at the mirrored point
    VariationalProblem dp = dual_problem(p);
    Candidate dc = dual_candidate(c);
    REQUIRE(std::fabs(el_residual_nabla(dp, dc, 0.0) - (-0.5)) < 1e-14);
}

TEST_CASE("weierstrass excess literal") {
    Lagrangian L = Lagrangian::parse("v^2/2");
    // E = q^2/2 - r^2/2 - (q-r) r = (q-r)^2/2
    REQUIRE(weierstrass_excess(L, 0, 0, 1.0, 3.0) == 2.0);
    Lagrangian W = Lagrangian::parse("(v^2 - 1)^2");
    REQUIRE(weierstrass_excess(W, 0, 0, 0.0, 1.0) == -1.0);
}

TEST_CASE("excess check passes along a straight minimizer in both settings") {
    TimeScale T = make_scale({{0, 1}});
    VariationalProblem pd = problem("v^2/2", T, 0, 1, 0, 1, Setting::Delta);
    Candidate cd = expr_candidate(pd, "t");
    WeierstrassResult rd =
        check_weierstrass_delta(pd, cd, default_q_grid(pd, cd), 1e-8, "pd");
    REQUIRE(rd.report.passed);
    REQUIRE(rd.min_excess >= -1e-12);

    VariationalProblem pn = problem("v^2/2", T, 0, 1, 0, 1, Setting::Nabla);
    Candidate cn = expr_candidate(pn, "t");
    WeierstrassResult rn =
        check_weierstrass_nabla(pn, cn, default_q_grid(pn, cn), 1e-8, "pn");
    REQUIRE(rn.report.passed);
    REQUIRE(rn.min_excess >= -1e-12);

    REQUIRE_THROWS_AS(check_weierstrass_nabla(pd, cd, {0.0}, 1e-8, "x"),
                      InvalidArgument);
}

TEST_CASE("nonconvex integrand fails the excess check on a continuum") {
    TimeScale T = make_scale({{0, 1}});
    VariationalProblem p =
        problem("(v^2 - 1)^2", T, 0, 1, 0, 0, Setting::Delta);
    Candidate c = expr_candidate(p, "0");
    WeierstrassResult r =
        check_weierstrass_delta(p, c, default_q_grid(p, c), 1e-8, "flat");
    REQUIRE(!r.report.passed);
    REQUIRE(std::fabs(r.min_excess - (-1.0)) < 1e-9);
    REQUIRE(std::fabs(std::fabs(r.argmin_q) - 1.0) < 1e-9);
}

TEST_CASE("graininess-weighted convexity sampling flags the nonconvex case") {
    TimeScale D = make_scale({{0, 0}, {0.5, 0.5}, {1, 1}});
    VariationalProblem pd =
        problem("(v^2 - 1)^2", D, 0, 1, 0, 0, Setting::Delta);
    Candidate cd = make_candidate(
        pd, TsFunction::from_table({{0, 0}, {0.5, 0}, {1, 0}}, D,
                                   Regularity::C1_rd));
    REQUIRE_THROWS_AS(
        check_weierstrass_delta(pd, cd, default_q_grid(pd, cd), 1e-8, "d"),
        ConvexityPreconditionFailed);

    VariationalProblem pn =
        problem("(v^2 - 1)^2", D, 0, 1, 0, 0, Setting::Nabla);
    Candidate cn = make_candidate(
        pn, TsFunction::from_table({{0, 0}, {0.5, 0}, {1, 0}}, D,
                                   Regularity::C1_ld));
    REQUIRE_THROWS_AS(
        check_weierstrass_nabla(pn, cn, default_q_grid(pn, cn), 1e-8, "n"),
        ConvexityPreconditionFailed);

    // the thrown payload carries the witness sample
    try {
        check_weierstrass_delta(pd, cd, default_q_grid(pd, cd), 1e-8, "d");
        FAIL("expected the precondition to fire");
    } catch (const ConvexityPreconditionFailed& e) {
        const double lhs = pd.lagrangian.eval(
            e.t, e.x, e.gamma * e.r1 + (1 - e.gamma) * e.r2);
        const double rhs = e.gamma * pd.lagrangian.eval(e.t, e.x, e.r1) +
                           (1 - e.gamma) * pd.lagrangian.eval(e.t, e.x, e.r2);
        REQUIRE(lhs > rhs); // genuine convexity violation at the sample
    }
}

TEST_CASE("kinked candidate is probed one-sided at the kink") {
    TimeScale T = make_scale({{0, 1}});
    VariationalProblem p = problem("v^2/2", T, 0, 1, 0, 0.5, Setting::Delta);
    // piecewise slopes 1 then 0, kink at 0.5
    Candidate c = make_candidate(
        p,
        TsFunction(Expr::parse("(t + 0.5 - abs(t - 0.5))/2", {"t"}), p.scale,
                   Regularity::C1_prd),
        {0.5});
    std::vector<double> slopes = candidate_slopes(p, c);
    REQUIRE(slopes.size() >= 2);
    const double lo = *std::min_element(slopes.begin(), slopes.end());
    const double hi = *std::max_element(slopes.begin(), slopes.end());
    REQUIRE(std::fabs(lo - 0.0) < 1e-6);
    REQUIRE(std::fabs(hi - 1.0) < 1e-6);
    WeierstrassResult r =
        check_weierstrass_delta(p, c, default_q_grid(p, c), 1e-8, "kink");
    REQUIRE(r.report.passed); // quadratic integrand: excess is a square
}

TEST_CASE("discrete minimizer solves the straight-line problem exactly") {
    Rng rng(606);
    for (int trial = 0; trial < 10; ++trial) {
        TimeScale D = random_discrete_scale(rng, 5 + trial * 3, 0.0, 2.0);
        VariationalProblem p =
            problem("v^2/2", D, 0, 2, -1, 3, Setting::Delta);
        Candidate c = minimize_discrete(p);
        // strictly convex in the slopes: unique minimizer is constant slope 2
        for (double t : D.discrete_points())
            REQUIRE(std::fabs(c.y.eval(t) - (-1 + 2 * t)) <= 1e-10);
    }
}

TEST_CASE("discrete minimizer approaches the continuum solution") {
    // v^2/2 + x^2/2 on a uniform 41-point grid: compare against
    // sinh(t)/sinh(1) pointwise
    std::vector<Segment> segs;
    for (int k = 0; k <= 40; ++k) {
        const double t = k / 40.0;
        segs.push_back({t, t});
    }
    TimeScale D = TimeScale::canonicalize(segs);
    VariationalProblem p =
        problem("v^2/2 + x^2/2", D, 0, 1, 0, 1, Setting::Delta);
    Candidate c = minimize_discrete(p);
    for (double t : D.discrete_points())
        REQUIRE(std::fabs(c.y.eval(t) - std::sinh(t) / std::sinh(1.0)) < 5e-3);
    // and the result satisfies the discrete Euler-Lagrange equation
    for (double t : el_domain_points(p))
        REQUIRE(std::fabs(el_residual_delta(p, c, t)) <= 1e-9);
}

TEST_CASE("discrete minimizer works in the nabla setting") {
    TimeScale D = make_scale(
        {{0, 0}, {0.3, 0.3}, {0.55, 0.55}, {0.8, 0.8}, {1, 1}});
    VariationalProblem p =
        problem("v^2/2 + x^2/2", D, 0, 1, 0, 1, Setting::Nabla);
    Candidate c = minimize_discrete(p);
    for (double t : el_domain_points(p))
        REQUIRE(std::fabs(el_residual_nabla(p, c, t)) <= 1e-9);
    REQUIRE(c.y.eval(0) == 0.0);
    REQUIRE(c.y.eval(1) == 1.0);
}

TEST_CASE("minimizer rejects unusable windows and non-minima") {
    TimeScale C = make_scale({{0, 1}});
    REQUIRE_THROWS_AS(
        minimize_discrete(problem("v^2", C, 0, 1, 0, 0, Setting::Delta)),
        InvalidArgument);
    TimeScale two = make_scale({{0, 0}, {1, 1}});
    REQUIRE_THROWS_AS(
        minimize_discrete(problem("v^2", two, 0, 1, 0, 0, Setting::Delta)),
        InvalidArgument);
    // concave integrand: Newton cannot find a minimum
    TimeScale D = make_scale({{0, 0}, {0.25, 0.25}, {0.5, 0.5}, {1, 1}});
    VariationalProblem bad = problem("-(v^2)/2 + x", D, 0, 1, 0, 0,
                                     Setting::Delta);
    REQUIRE_THROWS_AS(minimize_discrete(bad), Error);
}

TEST_CASE("duality carries minimizers across settings") {
    Rng rng(1234);
    TimeScale D = random_discrete_scale(rng, 12, -1.0, 1.0);
    VariationalProblem p =
        problem("v^2/2 + x + x^2", D, -1, 1, 0.5, -0.25, Setting::Delta);
    Candidate c = minimize_discrete(p);
    VariationalProblem dp = dual_problem(p);
    Candidate dc = dual_candidate(c);
    for (double s : el_domain_points(dp))
        REQUIRE(std::fabs(el_residual_nabla(dp, dc, s)) <= 1e-9);
    REQUIRE(std::fabs(functional_value(p, c) - functional_value(dp, dc)) <=
            1e-10);
}
