#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "tsc/calculus.hpp"
#include "tsc/generators.hpp"
#include "tsc/quadrature.hpp"
#include "tsc/random.hpp"

using namespace tsc;

namespace {

TsFunction fn(const std::string& expr, const TimeScale& T,
              Regularity r = Regularity::Smooth) {
    return TsFunction(Expr::parse(expr, {"t"}), T, r);
}

// Forward-sum oracle on a purely discrete scale:
//   int_a^b f Delta t = sum over [a, b) of mu(t) f(t).
double delta_sum_ref(const TsFunction& f, double a, double b) {
    double acc = 0.0;
    for (double t : f.scale().discrete_points())
        if (t >= a && t < b) acc += f.scale().mu(t) * f.eval(t);
    return acc;
}

// Backward-sum oracle: int_a^b f Nabla t = sum over (a, b] of nu(t) f(t).
double nabla_sum_ref(const TsFunction& f, double a, double b) {
    double acc = 0.0;
    for (double t : f.scale().discrete_points())
        if (t > a && t <= b) acc += f.scale().nu(t) * f.eval(t);
    return acc;
}

} // namespace

TEST_CASE("adaptive quadrature hits textbook integrals") {
    auto sq = [](double x) { return x * x; };
    REQUIRE(std::fabs(adaptive_simpson(sq, 0, 1) - 1.0 / 3.0) < 1e-12);
    auto s = [](double x) { return std::sin(x); };
    REQUIRE(std::fabs(adaptive_simpson(s, 0, 3.14159265358979323846) - 2.0) <
            1e-10);
    auto spike = [](double x) { return 1.0 / (1e-3 + x * x); };
    const double want = 2.0 / std::sqrt(1e-3) *
                        std::atan(1.0 / std::sqrt(1e-3)); // symmetric arctan
    REQUIRE(std::fabs(adaptive_simpson(spike, -1, 1) - want) < 1e-8);
    REQUIRE(adaptive_simpson(sq, 2, 2) == 0.0);
}

TEST_CASE("function construction validates the formula on the scale") {
    TimeScale pos = make_scale({{1, 2}});
    REQUIRE_NOTHROW(fn("ln(t)", pos));
    TimeScale cross = make_scale({{-1, 1}});
    REQUIRE_THROWS_AS(fn("ln(t)", cross), DomainError);
    REQUIRE_THROWS_AS(fn("1/t", cross), DomainError);
}

TEST_CASE("table functions need exact discrete keys") {
    TimeScale D = make_scale({{0, 0}, {1, 1}, {2, 2}});
    TsFunction f = TsFunction::from_table({{0, 5}, {1, 7}, {2, -1}}, D,
                                          Regularity::C_rd);
    REQUIRE(f.is_table());
    REQUIRE(f.eval(1) == 7.0);
    REQUIRE_THROWS_AS(f.eval(0.5), PointNotInScale);

    REQUIRE_THROWS_AS(
        TsFunction::from_table({{0, 5}, {1, 7}}, D, Regularity::C_rd), Error);
    TimeScale C = make_scale({{0, 1}});
    REQUIRE_THROWS_AS(
        TsFunction::from_table({{0, 5}, {1, 7}}, C, Regularity::C_rd), Error);
    REQUIRE_THROWS_AS(f.derivative_value_dense(0.0), InvalidArgument);
}

TEST_CASE("scattered derivatives are exact difference quotients") {
    TimeScale D = make_scale({{0, 0}, {0.5, 0.5}, {1.25, 1.25}, {2, 2}});
    TsFunction f = fn("t^2", D);

    // delta: (sigma^2 - t^2)/mu = sigma + t, computed here by hand
    DerivativeResult r = delta_derivative(f, 0.5);
    REQUIRE(r.value == (1.25 * 1.25 - 0.5 * 0.5) / 0.75);
    REQUIRE(r.method == "scattered-exact");
    REQUIRE(r.est_error == 0.0);

    DerivativeResult n = nabla_derivative(f, 1.25);
    REQUIRE(n.value == (1.25 * 1.25 - 0.5 * 0.5) / 0.75);

    // excluded extremes
    REQUIRE_THROWS_AS(delta_derivative(f, 2.0), NotInDomainKappa);
    REQUIRE_THROWS_AS(nabla_derivative(f, 0.0), NotInDomainKappa);
    REQUIRE_THROWS_AS(delta_derivative(f, 0.3), PointNotInScale);
}

TEST_CASE("dense derivatives converge to the classical value") {
    TimeScale C = make_scale({{0, 1}});
    TsFunction g = fn("exp(t)", C);

    DerivativeResult r0 = delta_derivative(g, 0.0); // forward one-sided
    REQUIRE(r0.method == "dense-limit");
    REQUIRE(std::fabs(r0.value - 1.0) < 1e-9);
    REQUIRE(r0.est_error < 1e-8);

    DerivativeResult r1 = delta_derivative(g, 1.0); // backward at the max
    REQUIRE(std::fabs(r1.value - std::exp(1.0)) < 1e-8);

    DerivativeResult rn = nabla_derivative(g, 0.5);
    REQUIRE(std::fabs(rn.value - std::exp(0.5)) < 1e-8);

    // single-point scale has no derivative domain at all
    TimeScale P = make_scale({{4, 4}});
    TsFunction h = fn("t", P);
    REQUIRE_THROWS_AS(delta_derivative(h, 4.0), ResultEmpty);
}

TEST_CASE("exact derivative path uses the symbolic formula at dense points") {
    TimeScale T = make_scale({{0, 1}, {2, 2}});
    TsFunction f = fn("t^3", T);
    REQUIRE(delta_derivative_exact(f, 0.5) == 3 * 0.5 * 0.5);
    REQUIRE(delta_derivative_exact(f, 1.0) == (8.0 - 1.0) / 1.0); // jump
    REQUIRE_THROWS_AS(delta_derivative_exact(f, 2.0), NotInDomainKappa);
    REQUIRE(nabla_derivative_exact(f, 2.0) == (8.0 - 1.0) / 1.0);
    REQUIRE(nabla_derivative_exact(f, 0.5) == 3 * 0.5 * 0.5);
}

TEST_CASE("integrals on a continuum match classical calculus") {
    TimeScale C = make_scale({{0, 1}});
    TsFunction f = fn("t^2", C);
    REQUIRE(std::fabs(delta_integral(f, 0, 1) - 1.0 / 3.0) < 1e-10);
    REQUIRE(std::fabs(nabla_integral(f, 0, 1) - 1.0 / 3.0) < 1e-10);
    REQUIRE(delta_integral(f, 0.5, 0.5) == 0.0);
    REQUIRE_THROWS_AS(delta_integral(f, 0.2, 1.5), EndpointNotInScale);
    REQUIRE_THROWS_AS(delta_integral(f, 0.8, 0.2), OrderViolation);
}

TEST_CASE("discrete integrals equal the forward and backward sums") {
    Rng rng(417);
    for (int trial = 0; trial < 40; ++trial) {
        TimeScale D = random_discrete_scale(rng, 3 + trial % 20, -2.0, 2.0);
        TsFunction f(random_polynomial(rng), D, Regularity::Smooth);
        const double a = D.min(), b = D.max();
        REQUIRE(std::fabs(delta_integral(f, a, b) - delta_sum_ref(f, a, b)) <=
                1e-12);
        REQUIRE(std::fabs(nabla_integral(f, a, b) - nabla_sum_ref(f, a, b)) <=
                1e-12);
        // interior window too
        const std::vector<double>& pts = D.discrete_points();
        const double a2 = pts[1], b2 = pts[pts.size() - 2];
        if (a2 < b2) {
            REQUIRE(std::fabs(delta_integral(f, a2, b2) -
                              delta_sum_ref(f, a2, b2)) <= 1e-12);
            REQUIRE(std::fabs(nabla_integral(f, a2, b2) -
                              nabla_sum_ref(f, a2, b2)) <= 1e-12);
        }
    }
}

TEST_CASE("mixed-scale integral splits into pieces and jump atoms") {
    // [0,1] u {1.5} u [2,3]; integral of t assembled by hand:
    //   continuum [0,1]: 1/2
    //   jump at 1 (gap 0.5): 0.5 * f(1) = 0.5
    //   jump at 1.5 (gap 0.5): 0.5 * f(1.5) = 0.75
    //   continuum [2,3]: (9-4)/2 = 2.5
    TimeScale T = make_scale({{0, 1}, {1.5, 1.5}, {2, 3}});
    TsFunction f = fn("t", T);
    REQUIRE(std::fabs(delta_integral(f, 0, 3) - (0.5 + 0.5 + 0.75 + 2.5)) <
            1e-10);
    // nabla weights land on the right ends of the gaps instead
    //   jump into 1.5: 0.5 * f(1.5), jump into 2: 0.5 * f(2)
    REQUIRE(std::fabs(nabla_integral(f, 0, 3) - (0.5 + 0.75 + 1.0 + 2.5)) <
            1e-10);
}

TEST_CASE("delta and nabla integrals agree on a continuum") {
    TimeScale C = make_scale({{-1, 2}});
    TsFunction f = fn("sin(t)*exp(t)", C);
    REQUIRE(std::fabs(delta_integral(f, -1, 2) - nabla_integral(f, -1, 2)) <
            1e-9);
}

TEST_CASE("jump formulas relate a function to its own derivative") {
    Rng rng(5150);
    for (int trial = 0; trial < 25; ++trial) {
        TimeScale T = random_scale(rng, -24, 24);
        TsFunction f(random_polynomial(rng), T, Regularity::Smooth);
        IdentityReport s = check_sigma_formula(f, 1e-9, "s");
        INFO("trial " << trial);
        REQUIRE(s.passed);
        IdentityReport r = check_rho_formula(f, 1e-9, "r");
        REQUIRE(r.passed);
    }
}

TEST_CASE("integration by parts holds in both orders of decoration") {
    TimeScale T = make_scale({{-1, 0}, {0.5, 0.5}, {1, 2}});
    TsFunction f = fn("t^2", T);
    TsFunction g = fn("exp(t)", T);
    IdentityReport d =
        check_integration_by_parts_delta(f, g, -1, 2, 1e-8, "mixed");
    REQUIRE(d.passed);
    REQUIRE(d.identity_name == "integration-by-parts-delta");
    IdentityReport n =
        check_integration_by_parts_nabla(f, g, -1, 2, 1e-8, "mixed");
    REQUIRE(n.passed);

    TimeScale other = make_scale({{0, 1}});
    REQUIRE_THROWS_AS(check_integration_by_parts_delta(f, fn("t", other), -1,
                                                       2, 1e-8, "x"),
                      InvalidArgument);
}

TEST_CASE("regularity names round-trip") {
    for (Regularity r :
         {Regularity::C_rd, Regularity::C_ld, Regularity::C1_rd,
          Regularity::C1_ld, Regularity::C_prd, Regularity::C_pld,
          Regularity::C1_prd, Regularity::C1_pld, Regularity::Smooth})
        REQUIRE(regularity_from_string(to_string(r)) == r);
    REQUIRE_THROWS_AS(regularity_from_string("bogus"), Error);
}
