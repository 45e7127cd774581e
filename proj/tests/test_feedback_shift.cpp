#include <doctest.h>

#include <cmath>
#include <vector>

#include "levypide/errors.hpp"
#include "levypide/feedback_shift.hpp"
#include "levypide/numerics.hpp"

using namespace levypide;

TEST_SUITE("feedback_shift") {

TEST_CASE("strategy shapes and Lipschitz constants") {
    const auto t = tanh_strategy(1.0, 0.3);
    CHECK(t->psi(0.0, 0.0) == doctest::Approx(0.0));
    CHECK(t->lipschitz() == doctest::Approx(1.0 / 0.3));
    CHECK(t->psi_x(0.0, 0.1) == doctest::Approx((1.0 - std::pow(std::tanh(0.1 / 0.3), 2)) / 0.3).epsilon(1e-8));
    const auto n = normal_cdf_strategy(2.0, 0.5);
    CHECK(n->psi(0.0, 0.0) == doctest::Approx(1.0));
    CHECK(n->lipschitz() == doctest::Approx(2.0 * normal_pdf(0.0) / 0.5));
    const auto p = put_delta_strategy(1.0, 0.2);
    CHECK(p->psi(0.0, -5.0) == doctest::Approx(-1.0).epsilon(1e-9));
    const auto l = linear_strategy(0.5, 100.0);
    CHECK(l->phi(0.0, 100.0 * std::exp(0.2)) == doctest::Approx(0.1));
    CHECK(l->phi_S(0.0, 50.0) * 50.0 == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("grid strategy reproduces its nodes") {
    std::vector<double> v;
    for (int i = 0; i <= 20; ++i) v.push_back(std::tanh(-1.0 + 0.1 * i));
    const auto g = grid_strategy(v, -1.0, 0.1, 100.0);
    for (int i = 0; i <= 20; ++i) CHECK(g->psi(0.0, -1.0 + 0.1 * i) == doctest::Approx(v[i]).epsilon(1e-13));
    CHECK(g->psi(0.0, 5.0) == doctest::Approx(v.back()));
    CHECK(g->lipschitz() >= 0.99);
}

TEST_CASE("rho = 0 gives the plain jump") {
    const auto s = tanh_strategy(1.0, 0.3);
    CHECK(solve_shift_H(100.0, -0.2, 0.0, 0.0, *s).value == doctest::Approx(100.0 * std::expm1(-0.2)));
    CHECK(solve_shift_xi(0.1, 0.3, 0.0, 0.0, *s).value == doctest::Approx(0.3));
}

TEST_CASE("H and xi describe the same post-jump price") {
    const auto s = tanh_strategy(1.0, 0.3);
    const double rho = 0.03;
    for (double x : {-0.4, 0.0, 0.25})
        for (double z : {-0.5, -0.05, 0.1, 0.4}) {
            const double S = 100.0 * std::exp(x);
            const double H = solve_shift_H(S, z, rho, 0.0, *s).value;
            const double xi = solve_shift_xi(x, z, rho, 0.0, *s).value;
            CHECK(H == doctest::Approx(S * std::expm1(xi)).epsilon(1e-11));
            CHECK(std::exp(xi) == doctest::Approx(std::exp(z) + rho * (s->psi(0.0, x + xi) - s->psi(0.0, x))).epsilon(1e-12));
        }
}

TEST_CASE("first-order expansions are second-order accurate in rho") {
    const auto s = tanh_strategy(1.0, 0.3);
    std::vector<double> eH, eX;
    for (double rho : {0.04, 0.02, 0.01}) {
        double mh = 0.0, mx = 0.0;
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j) {
                const double x = -0.5 + i / 19.0, z = -0.3 + 0.6 * j / 19.0;
                const double S = 100.0 * std::exp(x);
                mh = std::max(mh, std::abs(solve_shift_H(S, z, rho, 0.0, *s).value - shift_H_first_order(S, z, rho, 0.0, *s)));
                mx = std::max(mx, std::abs(solve_shift_xi(x, z, rho, 0.0, *s).value - shift_xi_first_order(x, z, rho, 0.0, *s)));
            }
        eH.push_back(mh);
        eX.push_back(mx);
    }
    for (const auto& e : {eH, eX}) {
        CHECK(std::log2(e[0] / e[1]) == doctest::Approx(2.0).epsilon(0.1));
        CHECK(std::log2(e[1] / e[2]) == doctest::Approx(2.0).epsilon(0.1));
    }
}

TEST_CASE("dropping the e^{-z} factor loses accuracy for large jumps") {
    const auto s = tanh_strategy(1.0, 0.3);
    const double exact = solve_shift_xi(0.0, -0.6, 0.02, 0.0, *s).value;
    const double with = shift_xi_first_order(0.0, -0.6, 0.02, 0.0, *s, true);
    const double without = shift_xi_first_order(0.0, -0.6, 0.02, 0.0, *s, false);
    CHECK(std::abs(with - exact) < std::abs(without - exact));
}

TEST_CASE("assumption rho L < 1 is enforced") {
    const auto s = tanh_strategy(1.0, 0.1);  // L = 10
    CHECK_THROWS_AS(solve_shift_H(100.0, 0.1, 0.1, 0.0, *s), AssumptionViolation);
    CHECK_THROWS_AS(require_feedback_assumption(0.2, *s), AssumptionViolation);
    CHECK_NOTHROW(require_feedback_assumption(0.05, *s));
    CHECK_THROWS_AS(feedback_volatility(0.2, 0.2, 0.0, 0.0, *s), AssumptionViolation);
}

TEST_CASE("feedback volatility for a linear strategy") {
    const auto l = linear_strategy(2.0);
    CHECK(feedback_volatility(0.2, 0.1, 0.0, 0.3, *l) == doctest::Approx(0.25));
}

TEST_CASE("absorbed jumps are reported, not thrown") {
    const auto s = constant_strategy(0.0);
    double xi = 0.0;
    CHECK(try_shift_xi(0.0, -1.0, 0.0, 0.0, *s, XiMode::Exact, xi));
    CHECK(xi == doctest::Approx(-1.0));
    // psi drops by 2 across the jump; rho * 2 exceeds e^z.
    const auto step = tanh_strategy(1.0, 0.5);
    CHECK_FALSE(try_shift_xi(0.0, -4.0, 0.1, 0.0, *step, XiMode::Exact, xi));
}

TEST_CASE("shift_delta reduces to the compensated exponential at rho = 0") {
    const auto vg = LevyMeasureSpec::variance_gamma(-0.43, 0.23, 0.27);
    const auto s = tanh_strategy(1.0, 0.3);
    const double ref = compensated_integral(vg, [](double z) { return std::expm1(z) - z; }).value;
    CHECK(shift_delta(vg, 0.0, 0.0, 0.2, *s) == doctest::Approx(ref).epsilon(1e-12));
    // Far left jumps would be absorbed at zero for rho > 0; shift_delta refuses them.
    CHECK_THROWS_AS(shift_delta(vg, 0.02, 0.0, 0.0, *s), AssumptionViolation);
    QuadratureOptions o;
    o.truncation = 2.0;
    const double d = shift_delta(vg, 0.02, 0.0, 0.0, *s, XiMode::Exact, o);
    CHECK(d > 0.0);
    CHECK(d != doctest::Approx(compensated_integral(vg, [](double z) { return std::expm1(z) - z; }, o).value).epsilon(1e-6));
}

}
