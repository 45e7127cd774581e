#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace levypide {

double normal_pdf(double x);
double normal_cdf(double x);

/// Modified Bessel function of the second kind, order one, for x > 0.
double bessel_k1(double x);

/// Gauss-Legendre nodes and weights on [-1, 1]; cached per order.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

/// Integrates f over [a, b] with a single Gauss-Legendre panel.
template <class F>
double gauss_panel(const GaussRule& rule, double a, double b, F&& f) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double s = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        s += rule.weights[k] * f(mid + half * rule.nodes[k]);
    }
    return s * half;
}

/// Solves a tridiagonal system in place (Thomas algorithm, no pivoting).
/// `lower[0]` and `upper[n-1]` are ignored. `rhs` is overwritten with the solution.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs);

/// Four-point Lagrange interpolation on a uniform grid starting at x0 with spacing h.
/// The stencil is shifted inward near the ends; values at nodes are reproduced exactly.
double cubic_interpolate(std::span<const double> values, double x0, double h, double x);

/// Derivative of the same interpolant.
double cubic_interpolate_derivative(std::span<const double> values, double x0, double h, double x);

}  // namespace levypide
