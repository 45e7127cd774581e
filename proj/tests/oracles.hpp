#pragma once

// Independent reference computations for the tests. None of these call the library's
// quadrature, Bessel or pricing code.

#include <cmath>
#include <numbers>

#include "levypide/levy_measures.hpp"

namespace oracle {

inline double ncdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
inline double npdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

inline double bs_put(double S, double K, double T, double sigma, double r) {
    const double v = sigma * std::sqrt(T);
    const double d1 = (std::log(S / K) + (r + 0.5 * sigma * sigma) * T) / v;
    return K * std::exp(-r * T) * ncdf(-(d1 - v)) - S * ncdf(-d1);
}

/// Composite Simpson on [a, b] with n (even) intervals.
template <class F>
double simpson(F&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

/// int (e^z - 1 - z 1_{|z| <= 1}) nu(dz) from Laplace exponents and closed-form tails.
inline double truncated_exponent(const levypide::LevyMeasureSpec& spec) {
    using namespace levypide;
    const auto& P = spec.params();
    if (auto* m = std::get_if<MertonParams>(&P)) {
        const double a = (-1.0 - m->m) / m->delta, b = (1.0 - m->m) / m->delta;
        const double inner_mean = m->lambda * (m->m * (ncdf(b) - ncdf(a)) + m->delta * (npdf(a) - npdf(b)));
        return m->lambda * std::expm1(m->m + 0.5 * m->delta * m->delta) - inner_mean;
    }
    if (auto* k = std::get_if<KouParams>(&P)) {
        const double lp = k->lambda_plus, lm = k->lambda_minus;
        const double exp_part =
            k->lambda * (k->p * lp / (lp - 1.0) + (1.0 - k->p) * lm / (lm + 1.0) - 1.0);
        const double up = k->lambda * k->p * (1.0 - std::exp(-lp) * (1.0 + lp)) / lp;
        const double dn = k->lambda * (1.0 - k->p) * (1.0 - std::exp(-lm) * (1.0 + lm)) / lm;
        return exp_part - (up - dn);
    }
    if (auto* v = std::get_if<VarianceGammaParams>(&P)) {
        const double s2 = v->sigma * v->sigma;
        const double A = v->theta / s2, B = std::sqrt(v->theta * v->theta + 2.0 * s2 / v->kappa) / s2;
        const double full = -std::log(1.0 - v->theta * v->kappa - 0.5 * s2 * v->kappa) / v->kappa - v->theta;
        const double tail = (std::exp(-(B - A)) / (B - A) - std::exp(-(B + A)) / (B + A)) / v->kappa;
        return full + tail;
    }
    const auto& n = std::get<NigParams>(P);
    const double s2 = n.sigma * n.sigma;
    const double root = std::sqrt(n.theta * n.theta + s2 / n.kappa);
    const double A = n.theta / s2, B = root / s2, C = root / (std::numbers::pi * n.sigma * std::sqrt(n.kappa));
    const double full = (1.0 - std::sqrt(1.0 - s2 * n.kappa - 2.0 * n.theta * n.kappa)) / n.kappa - n.theta;
    // z nu(z) = sign(z) C e^{Az} K1(B|z|); tails beyond 60 are below 1e-30 for the tested parameters.
    const auto tail = [&](double z) { return C * (std::exp(A * z) - std::exp(-A * z)) * std::cyl_bessel_k(1.0, B * z); };
    return full + simpson(tail, 1.0, 60.0, 20000);
}

/// European put under Black-Scholes plus variance-gamma jumps with martingale drift,
/// by conditioning on the gamma time change.
inline double vg_put(double S, double K, double T, double sd, double r, double th, double sv, double ka) {
    const double om = std::log(1.0 - th * ka - sv * sv * ka / 2.0) / ka;
    const double shape = T / ka;
    const auto f = [&](double g) {
        if (g <= 0.0) return 0.0;
        const double lp = (shape - 1.0) * std::log(g) - g / ka - std::lgamma(shape) - shape * std::log(ka);
        const double F = S * std::exp((r + om) * T + th * g + sv * sv * g / 2.0);
        const double v = std::sqrt(sd * sd * T + sv * sv * g);
        const double d1 = (std::log(F / K) + v * v / 2.0) / v, d2 = d1 - v;
        return std::exp(lp) * (K * ncdf(-d2) - F * ncdf(-d1));
    };
    return std::exp(-r * T) * simpson(f, 0.0, 40.0 * ka, 40000);
}

}  // namespace oracle
