#include "levypide/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>

#include "levypide/errors.hpp"

namespace levypide {

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double bessel_k1(double x) {
    if (!(x > 0.0)) throw ParameterDomainError("bessel_k1: argument must be positive");
    // Trapezoid rule on K1(x) = int_0^inf exp(-x cosh t) cosh t dt. The integrand is
    // analytic in a strip of half-width pi/2, so the error is about exp(-pi^2/h) for moderate x.
    // For large x the peak narrows like 1/sqrt(x) and the step has to follow it.
    const double h = std::min(0.2, 0.25 / std::sqrt(x));
    double sum = 0.5 * std::exp(-x);
    for (int k = 1;; ++k) {
        const double c = std::cosh(k * h);
        const double term = std::exp(-x * c) * c;
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum * h;
}

namespace {

GaussRule make_gauss(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
    constexpr int kMax = 32;
    if (order < 1 || order > kMax) throw ParameterDomainError("gauss_legendre: order out of range");
    static std::array<GaussRule, kMax + 1> cache;
    static std::array<std::once_flag, kMax + 1> flags;
    std::call_once(flags[order], [order] { cache[order] = make_gauss(order); });
    return cache[order];
}

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    std::vector<double> c(n);
    double b = diag[0];
    rhs[0] /= b;
    c[0] = n > 1 ? upper[0] / b : 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        b = diag[i] - lower[i] * c[i - 1];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / b;
        c[i] = i + 1 < n ? upper[i] / b : 0.0;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

namespace {

struct Stencil {
    std::ptrdiff_t first;
    double t;  // position relative to node `first`, in units of h
};

Stencil cubic_stencil(std::size_t n, double x0, double h, double x) {
    if (n < 4) throw ParameterDomainError("cubic_interpolate: need at least four nodes");
    double s = (x - x0) / h;
    if (std::abs(s - std::round(s)) < 1e-9) s = std::round(s);
    auto base = static_cast<std::ptrdiff_t>(std::floor(s)) - 1;
    base = std::clamp<std::ptrdiff_t>(base, 0, static_cast<std::ptrdiff_t>(n) - 4);
    return {base, s - static_cast<double>(base)};
}

}  // namespace

double cubic_interpolate(std::span<const double> v, double x0, double h, double x) {
    const auto [b, t] = cubic_stencil(v.size(), x0, h, x);
    const double l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    const double l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    const double l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    const double l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    return l0 * v[b] + l1 * v[b + 1] + l2 * v[b + 2] + l3 * v[b + 3];
}

double cubic_interpolate_derivative(std::span<const double> v, double x0, double h, double x) {
    const auto [b, t] = cubic_stencil(v.size(), x0, h, x);
    const double d0 = -(3.0 * t * t - 12.0 * t + 11.0) / 6.0;
    const double d1 = (3.0 * t * t - 10.0 * t + 6.0) / 2.0;
    const double d2 = -(3.0 * t * t - 8.0 * t + 3.0) / 2.0;
    const double d3 = (3.0 * t * t - 6.0 * t + 2.0) / 6.0;
    return (d0 * v[b] + d1 * v[b + 1] + d2 * v[b + 2] + d3 * v[b + 3]) / h;
}

}  // namespace levypide
