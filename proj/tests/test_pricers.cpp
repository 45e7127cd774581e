#include <doctest.h>

#include <cmath>

#include "levypide/analytic_pricers.hpp"
#include "oracles.hpp"

using namespace levypide;

namespace {

/// Put under Merton dynamics by integrating the payoff against the Gaussian-mixture density of ln S_T.
double merton_put_by_density(double S, double K, double T, double sigma, double r, const MertonParams& p) {
    const double kbar = std::expm1(p.m + 0.5 * p.delta * p.delta);
    const double drift = std::log(S) + (r - 0.5 * sigma * sigma - p.lambda * kbar) * T;
    double total = 0.0, weight = std::exp(-p.lambda * T);
    for (int j = 0; j < 40; ++j) {
        if (j > 0) weight *= p.lambda * T / j;
        const double mean = drift + j * p.m;
        const double sd = std::sqrt(sigma * sigma * T + j * p.delta * p.delta);
        const auto f = [&](double y) { return std::max(K - std::exp(y), 0.0) * oracle::npdf((y - mean) / sd) / sd; };
        total += weight * oracle::simpson(f, mean - 12.0 * sd, std::log(K), 4000);
    }
    return std::exp(-r * T) * total;
}

}  // namespace

TEST_SUITE("pricers") {

TEST_CASE("bs_price against an erfc-based formula") {
    for (double S : {60.0, 85.2144, 100.0, 112.75, 180.0})
        for (double r : {0.0, 0.05, 0.1})
            CHECK(bs_price(S, 100, 1, 0.23, r, OptionType::Put) == doctest::Approx(oracle::bs_put(S, 100, 1, 0.23, r)).epsilon(1e-12));
}

TEST_CASE("put-call parity") {
    for (double S : {70.0, 100.0, 140.0}) {
        const double c = bs_price(S, 100, 0.7, 0.3, 0.04, OptionType::Call);
        const double p = bs_price(S, 100, 0.7, 0.3, 0.04, OptionType::Put);
        CHECK(c - p == doctest::Approx(S - 100 * std::exp(-0.04 * 0.7)).epsilon(1e-12));
    }
}

TEST_CASE("bs_delta is the S-derivative of bs_price") {
    for (auto type : {OptionType::Put, OptionType::Call})
        for (double S : {80.0, 100.0, 125.0}) {
            const double h = 1e-4;
            const double fd = (bs_price(S + h, 100, 1, 0.23, 0.1, type) - bs_price(S - h, 100, 1, 0.23, 0.1, type)) / (2 * h);
            CHECK(bs_delta(S, 100, 1, 0.23, 0.1, type) == doctest::Approx(fd).epsilon(1e-8));
        }
}

TEST_CASE("degenerate maturities and volatilities") {
    CHECK(bs_price(90, 100, 0.0, 0.2, 0.05, OptionType::Put) == 10.0);
    CHECK(bs_price(90, 100, 1.0, 0.0, 0.0, OptionType::Put) == doctest::Approx(10.0));
    CHECK(bs_price(110, 100, 1.0, 0.0, 0.05, OptionType::Call) == doctest::Approx(110 - 100 * std::exp(-0.05)));
    CHECK(bs_delta(90, 100, 0.0, 0.2, 0.0, OptionType::Put) == -1.0);
    CHECK(bs_delta(100, 100, 0.0, 0.2, 0.0, OptionType::Call) == 1.0);
    CHECK(payoff(Contract{OptionType::Put, 100, 1}, 80) == 20.0);
}

TEST_CASE("bs_log_value is consistent with bs_price") {
    const double K = 100, tau = 0.6, sigma = 0.25, r = 0.03;
    for (double x : {-0.4, 0.0, 0.3}) {
        const auto v = bs_log_value(tau, x, K, sigma, r, OptionType::Put);
        const double S = K * std::exp(x);
        CHECK(v.u == doctest::Approx(std::exp(r * tau) * bs_price(S, K, tau, sigma, r, OptionType::Put)).epsilon(1e-12));
        CHECK(v.ux == doctest::Approx(std::exp(r * tau) * S * bs_delta(S, K, tau, sigma, r, OptionType::Put)).epsilon(1e-10));
        const double h = 1e-4;
        const auto p = bs_log_value(tau, x + h, K, sigma, r, OptionType::Put);
        const auto m = bs_log_value(tau, x - h, K, sigma, r, OptionType::Put);
        CHECK(v.uxx_minus_ux == doctest::Approx((p.u - 2 * v.u + m.u) / (h * h) - v.ux).epsilon(1e-5));
        CHECK(v.uxx_minus_ux > 0.0);
    }
}

TEST_CASE("merton_series_price reduces to Black-Scholes without jumps") {
    const Contract c{OptionType::Put, 100, 1};
    CHECK(merton_series_price(95, c, 0.23, 0.05, MertonParams{0.0, -0.2, 0.15}) == doctest::Approx(bs_price(95, 100, 1, 0.23, 0.05, OptionType::Put)).epsilon(1e-14));
}

TEST_CASE("merton_series_price matches density integration") {
    const Contract c{OptionType::Put, 100, 1};
    const MertonParams p{0.1, -0.2, 0.15};
    for (double r : {0.0, 0.1})
        for (double S : {85.2144, 100.0, 112.75})
            CHECK(merton_series_price(S, c, 0.23, r, p) == doctest::Approx(merton_put_by_density(S, 100, 1, 0.23, r, p)).epsilon(1e-8));
    const MertonParams big{2.0, 0.1, 0.3};
    CHECK(merton_series_price(100, c, 0.2, 0.02, big) == doctest::Approx(merton_put_by_density(100, 100, 1, 0.2, 0.02, big)).epsilon(1e-8));
}

TEST_CASE("merton series put-call parity") {
    const MertonParams p{0.5, -0.1, 0.2};
    const double c = merton_series_price(105, Contract{OptionType::Call, 100, 0.8}, 0.2, 0.03, p);
    const double q = merton_series_price(105, Contract{OptionType::Put, 100, 0.8}, 0.2, 0.03, p);
    CHECK(c - q == doctest::Approx(105 - 100 * std::exp(-0.03 * 0.8)).epsilon(1e-11));
}

}
