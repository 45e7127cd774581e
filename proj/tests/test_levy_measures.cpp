#include <doctest.h>

#include <cmath>
#include <vector>

#include "levypide/errors.hpp"
#include "levypide/levy_measures.hpp"
#include "oracles.hpp"

using namespace levypide;

namespace {

std::vector<LevyMeasureSpec> bundled() {
    return {LevyMeasureSpec::merton(0.1, -0.2, 0.15), LevyMeasureSpec::kou(1.0, 0.4, 10.0, 5.0),
            LevyMeasureSpec::variance_gamma(-0.43, 0.23, 0.27), LevyMeasureSpec::nig(-0.1, 0.2, 0.2)};
}

std::vector<double> log_samples() {
    std::vector<double> z;
    for (int k = 0; k <= 400; ++k) {
        const double a = std::pow(10.0, -6.0 + k * (std::log10(8.0) + 6.0) / 400.0);
        z.push_back(a);
        z.push_back(-a);
    }
    return z;
}

}  // namespace

TEST_SUITE("levy_measures") {

TEST_CASE("constructors reject parameters outside the domain") {
    CHECK_THROWS_AS(LevyMeasureSpec::merton(-1.0, 0.0, 0.1), ParameterDomainError);
    CHECK_THROWS_AS(LevyMeasureSpec::merton(0.1, 0.0, 0.0), ParameterDomainError);
    CHECK_THROWS_AS(LevyMeasureSpec::kou(1.0, 1.5, 10.0, 5.0), ParameterDomainError);
    CHECK_THROWS_AS(LevyMeasureSpec::kou(1.0, 0.5, 1.0, 5.0), ParameterDomainError);
    CHECK_THROWS_AS(LevyMeasureSpec::variance_gamma(0.0, 0.2, -0.1), ParameterDomainError);
    CHECK_THROWS_AS(LevyMeasureSpec::variance_gamma(2.0, 0.2, 1.0), ParameterDomainError);
    CHECK_THROWS_AS(LevyMeasureSpec::nig(0.0, 0.0, 0.2), ParameterDomainError);
    CHECK_THROWS_AS(LevyMeasureSpec::nig(3.0, 0.2, 0.2), ParameterDomainError);
}

TEST_CASE("tilt accessors are family specific") {
    CHECK_THROWS_AS(LevyMeasureSpec::merton(0.1, 0.0, 0.1).tilt_A(), FamilyMismatch);
    CHECK_THROWS_AS(LevyMeasureSpec::kou(1.0, 0.5, 3.0, 3.0).tilt_B(), FamilyMismatch);
    const auto vg = LevyMeasureSpec::variance_gamma(-0.43, 0.23, 0.27);
    CHECK(vg.tilt_A() == doctest::Approx(-0.43 / (0.23 * 0.23)));
}

TEST_CASE("zero measure") {
    const auto z = LevyMeasureSpec::none();
    CHECK(z.is_zero());
    CHECK(z.density(0.3) == 0.0);
    CHECK(compensated_integral(z, [](double x) { return std::exp(x); }).value == 0.0);
    CHECK(martingale_drift(z, 0.2) == doctest::Approx(-0.02));
}

TEST_CASE("densities against direct formulas") {
    const auto m = LevyMeasureSpec::merton(0.1, -0.2, 0.15);
    CHECK(m.density(-0.2) == doctest::Approx(0.1 / (std::sqrt(2.0 * std::numbers::pi) * 0.15)));
    const auto k = LevyMeasureSpec::kou(1.0, 0.4, 10.0, 5.0);
    CHECK(k.density(0.1) == doctest::Approx(0.4 * 10.0 * std::exp(-1.0)));
    CHECK(k.density(-0.1) == doctest::Approx(0.6 * 5.0 * std::exp(-0.5)));
    const auto n = LevyMeasureSpec::nig(-0.1, 0.2, 0.2);
    const double root = std::sqrt(0.01 + 0.04 / 0.2), A = -0.1 / 0.04, B = root / 0.04;
    const double C = root / (std::numbers::pi * 0.2 * std::sqrt(0.2));
    for (double z : {-1.3, -0.01, 0.02, 0.7})
        CHECK(n.density(z) == doctest::Approx(C / std::abs(z) * std::exp(A * z) * std::cyl_bessel_k(1.0, B * std::abs(z))).epsilon(1e-11));
}

TEST_CASE("admissibility shapes hold on dense samples for every family") {
    const auto z = log_samples();
    for (const auto& spec : bundled()) {
        CAPTURE(spec.describe());
        const auto shape = admissibility_shape(spec);
        const auto rep = check_admissible(spec, shape, z);
        CHECK(rep.admissible);
        CHECK(rep.tightest_C0 <= shape.C0 * (1.0 + 1e-12));
    }
}

TEST_CASE("pure Gaussian envelope bounds Merton by its peak") {
    const auto m = LevyMeasureSpec::merton(0.1, -0.2, 0.15);
    AdmissibilityShape s;
    s.C0 = m.density(-0.2);
    CHECK(check_admissible(m, s, log_samples()).admissible);
    s.C0 *= 0.99;
    CHECK_FALSE(check_admissible(m, s, log_samples()).admissible);
}

TEST_CASE("compensated integral of exponential moments matches closed forms") {
    for (const auto& spec : bundled()) {
        CAPTURE(spec.describe());
        const double got = compensated_integral(spec, [](double x) {
                               return std::expm1(x) - (std::abs(x) <= 1.0 ? x : 0.0);
                           }).value;
        CHECK(got == doctest::Approx(oracle::truncated_exponent(spec)).epsilon(1e-8));
    }
}

TEST_CASE("martingale condition holds with the closed-form exponent") {
    for (const auto& spec : bundled()) {
        for (double sigma : {0.0, 0.2}) {
            const double res = 0.5 * sigma * sigma + martingale_drift(spec, sigma) + oracle::truncated_exponent(spec);
            CHECK(std::abs(res) < 1e-7);
        }
    }
}

TEST_CASE("inner moments of VG against direct Simpson") {
    const auto vg = LevyMeasureSpec::variance_gamma(-0.43, 0.23, 0.27);
    const auto mo = inner_moments(vg, 0.1);
    const double A = vg.tilt_A(), B = vg.tilt_B();
    // z^2 h(z) = |z| e^{Az - B|z|} / kappa
    const double m2 = oracle::simpson([&](double z) { return z * (std::exp(A * z) + std::exp(-A * z)) * std::exp(-B * z) / 0.27; }, 0.0, 0.1, 2000);
    const double m1 = oracle::simpson([&](double z) { return (std::exp(A * z) - std::exp(-A * z)) * std::exp(-B * z) / 0.27; }, 0.0, 0.1, 2000);
    CHECK(mo.m2 == doctest::Approx(m2).epsilon(1e-10));
    CHECK(mo.m1 == doctest::Approx(m1).epsilon(1e-10));
}

TEST_CASE("panel rules integrate smooth functions against the measure") {
    const auto vg = LevyMeasureSpec::variance_gamma(-0.43, 0.23, 0.27);
    const auto g = [](double z) { return std::expm1(z) - z; };
    const double ref = compensated_integral(vg, g).value;
    for (const auto& rule : {make_panel_rule(vg, 0.01, 1e-3, 8.0, 4, 1e-18),
                             make_graded_rule(vg, 1e-4, 0.05, 0.02, 8.0, 4, 1e-18)}) {
        CHECK(std::is_sorted(rule.nodes.begin(), rule.nodes.end()));
        double s = 0.5 * rule.inner.m2;  // inner region by Taylor: g ~ z^2 / 2
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * g(rule.nodes[k]);
        CHECK(s == doctest::Approx(ref).epsilon(1e-5));
    }
}

TEST_CASE("second moment of Merton jumps") {
    const auto m = LevyMeasureSpec::merton(0.1, -0.2, 0.15);
    const double got = compensated_integral(m, [](double z) { return z * z; }).value;
    CHECK(got == doctest::Approx(0.1 * (0.04 + 0.0225)).epsilon(1e-9));
}

}
