#pragma once

#include "levypide/levy_measures.hpp"

namespace levypide {

enum class OptionType { Call, Put };

struct Contract {
    OptionType type = OptionType::Put;
    double strike = 100.0;
    double maturity = 1.0;
};

double payoff(const Contract& c, double S);

/// Black-Scholes price. T = 0 returns the payoff; sigma = 0 returns the discounted
/// intrinsic value on the forward.
double bs_price(double S, double K, double T, double sigma, double r, OptionType type);

/// dV/dS. At T = 0 the payoff slope is returned, using the right limit at S = K.
double bs_delta(double S, double K, double T, double sigma, double r, OptionType type);

/// Black-Scholes solution in the variables tau = T - t, x = ln(S/K), u = e^{r tau} V.
struct LogPriceValue {
    double u = 0.0;
    double ux = 0.0;
    double uxx_minus_ux = 0.0;  ///< u_xx - u_x, the (positive) gamma term
};
LogPriceValue bs_log_value(double tau, double x, double K, double sigma, double r, OptionType type);

/// Merton jump-diffusion price by the Poisson mixture of Black-Scholes prices.
/// Terms are summed until J is reached or the next term falls below 1e-14 of the sum.
double merton_series_price(double S, const Contract& c, double sigma, double r, const MertonParams& p,
                           int J = 40);

}  // namespace levypide
