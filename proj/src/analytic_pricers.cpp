#include "levypide/analytic_pricers.hpp"

#include <cmath>

#include "levypide/errors.hpp"
#include "levypide/numerics.hpp"

namespace levypide {

namespace {

void check_inputs(double S, double K, double T, double sigma) {
    if (!(S > 0.0) || !(K > 0.0) || !(T >= 0.0) || !(sigma >= 0.0) || !std::isfinite(S + K + T + sigma))
        throw ParameterDomainError("black-scholes: need S, K > 0, T >= 0, sigma >= 0");
}

}  // namespace

double payoff(const Contract& c, double S) {
    return c.type == OptionType::Call ? std::max(S - c.strike, 0.0) : std::max(c.strike - S, 0.0);
}

double bs_price(double S, double K, double T, double sigma, double r, OptionType type) {
    check_inputs(S, K, T, sigma);
    const double df = std::exp(-r * T);
    const double sd = sigma * std::sqrt(T);
    if (sd == 0.0) {
        const double fwd = S - K * df;
        return type == OptionType::Call ? std::max(fwd, 0.0) : std::max(-fwd, 0.0);
    }
    const double d1 = (std::log(S / K) + (r + 0.5 * sigma * sigma) * T) / sd;
    const double d2 = d1 - sd;
    if (type == OptionType::Call) return S * normal_cdf(d1) - K * df * normal_cdf(d2);
    return K * df * normal_cdf(-d2) - S * normal_cdf(-d1);
}

double bs_delta(double S, double K, double T, double sigma, double r, OptionType type) {
    check_inputs(S, K, T, sigma);
    const double sd = sigma * std::sqrt(T);
    if (sd == 0.0) {
        const bool itm_call = S >= K * std::exp(-r * T);
        if (type == OptionType::Call) return itm_call ? 1.0 : 0.0;
        return itm_call ? 0.0 : -1.0;
    }
    const double d1 = (std::log(S / K) + (r + 0.5 * sigma * sigma) * T) / sd;
    return type == OptionType::Call ? normal_cdf(d1) : normal_cdf(d1) - 1.0;
}

LogPriceValue bs_log_value(double tau, double x, double K, double sigma, double r, OptionType type) {
    LogPriceValue v;
    const double sd = sigma * std::sqrt(tau);
    const double fwd = K * std::exp(x + r * tau);
    if (sd == 0.0) {
        if (type == OptionType::Call) {
            v.u = std::max(fwd - K, 0.0);
            v.ux = fwd >= K ? fwd : 0.0;
        } else {
            v.u = std::max(K - fwd, 0.0);
            v.ux = fwd >= K ? 0.0 : -fwd;
        }
        return v;
    }
    const double d1 = (x + (r + 0.5 * sigma * sigma) * tau) / sd;
    const double d2 = d1 - sd;
    if (type == OptionType::Call) {
        const double n1 = normal_cdf(d1);
        v.u = fwd * n1 - K * normal_cdf(d2);
        v.ux = fwd * n1;
    } else {
        const double n1 = normal_cdf(-d1);
        v.u = K * normal_cdf(-d2) - fwd * n1;
        v.ux = -fwd * n1;
    }
    v.uxx_minus_ux = fwd * normal_pdf(d1) / sd;
    return v;
}

double merton_series_price(double S, const Contract& c, double sigma, double r, const MertonParams& p, int J) {
    if (J < 0) throw ParameterDomainError("merton_series_price: J must be >= 0");
    const double T = c.maturity;
    check_inputs(S, c.strike, T, sigma);
    if (T == 0.0) return payoff(c, S);
    // Conditional on j jumps the log price is Gaussian: mean shift j*m - lambda*k*T,
    // extra variance j*delta^2. Each term is a Black-Scholes price with adjusted spot,
    // rate and volatility.
    const double k = std::exp(p.m + 0.5 * p.delta * p.delta) - 1.0;
    const double lt = p.lambda * T;
    double weight = std::exp(-lt);
    double call = 0.0;
    for (int j = 0; j <= J; ++j) {
        if (j > 0) weight *= lt / j;
        const double sj = std::sqrt(sigma * sigma + j * p.delta * p.delta / T);
        const double rj = r - p.lambda * k + j * p.m / T;
        const double spot = S * std::exp(0.5 * j * p.delta * p.delta);
        const double term = weight * std::exp((rj - r) * T) * bs_price(spot, c.strike, T, sj, rj, OptionType::Call);
        call += term;
        if (j > 0 && term < 1e-14 * call) break;
    }
    if (c.type == OptionType::Call) return call;
    return call - S + c.strike * std::exp(-r * T);
}

}  // namespace levypide
