#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "levypide/analytic_pricers.hpp"
#include "levypide/feedback_shift.hpp"
#include "levypide/levy_measures.hpp"
#include "levypide/simd/nonlocal_kernels.hpp"

namespace levypide {

/// Uniform grid on x in [-L, L] with N cells (N + 1 nodes) and M time steps.
struct PideGrid {
    double L = 4.0;
    int N = 400;
    int M = 200;

    double dx() const { return 2.0 * L / N; }
    double x(int i) const { return -L + i * dx(); }
    void validate() const;
};

/// Sign convention of the delta drift term. `Minus` gives the risk-neutral (martingale) drift.
enum class DeltaSign { Plus, Minus };

struct PideProblem {
    Contract contract;
    double sigma = 0.23;
    double r = 0.0;
    LevyMeasureSpec measure;
    double rho = 0.0;
    StrategyPtr strategy;  ///< required when rho > 0
    XiMode xi_mode = XiMode::FirstOrder;
    DeltaSign delta_sign = DeltaSign::Minus;
};

struct SolverOptions {
    /// Solve for U = u - u_BS (zero initial data). When false the raw payoff is stepped with
    /// asymptotic Dirichlet data; used for convergence studies.
    bool shift = true;
    double local_band_cells = 2.0;  ///< jumps below this many cells use the Taylor surrogate
    int gauss_points = 3;
    double truncation = 8.0;
    double negligible = 1e-14;
    double feedback_margin = 0.05;  ///< lower bound for 1 - rho S dphi/dS
};

/// Discretised nonlocal operator at one time level.
/// f(U)_i = sum_j J_ij U_j - W_i U_i - B_i U_x + q_i (U_xx - U_x)
/// where J collects the interpolation weights of the translated values.
struct IntegralWeights {
    int nodes = 0;
    double x0 = 0.0;
    double dx = 0.0;
    bool translation_invariant = true;

    std::vector<double> toeplitz;  ///< J row stencil when translation invariant
    std::ptrdiff_t toeplitz_offset = 0;
    simd::CsrMatrix jump;  ///< J otherwise

    std::vector<double> W, B, q, delta;

    /// Quadrature nodes and weights (density included) for the outer region.
    std::vector<double> z, w;
    /// xi for every (node, quadrature node) when not translation invariant; -inf marks absorption.
    std::vector<double> xi;

    /// Weights whose interpolation stencil falls outside the grid: virtual column, or absorbed.
    struct Outside {
        int row;
        int col;  ///< virtual node index; INT_MIN for absorbed jumps
        double weight;
    };
    std::vector<Outside> outside;

    double xi_at(int i, std::size_t k) const { return translation_invariant ? z[k] : xi[i * z.size() + k]; }

    /// J U with zero extension, through the active SIMD kernels.
    void apply_jump(std::span<const double> U, std::span<double> out) const;

    /// Full compensated operator with an explicit extension for values off the grid.
    /// Interior nodes only; boundary entries of `out` are set to zero.
    template <class Ext>
    void apply(std::span<const double> u, Ext&& ext, std::span<double> out) const;
};

IntegralWeights build_integral_weights(const PideGrid& grid, const LevyMeasureSpec& measure, double rho,
                                       const Strategy* strategy, XiMode mode, double tau,
                                       const SolverOptions& opts = {});

/// Solution u(tau, x) = e^{r tau} V on the grid, tau = 0 .. T.
class PriceSurface {
public:
    PriceSurface() = default;
    PriceSurface(PideGrid grid, Contract contract, double sigma, double r);

    const PideGrid& grid() const { return grid_; }
    const Contract& contract() const { return contract_; }
    double r() const { return r_; }
    double sigma() const { return sigma_; }
    double dt() const { return contract_.maturity / grid_.M; }
    double tau(int n) const { return n * dt(); }

    std::span<double> row(int n) { return {u_.data() + static_cast<std::size_t>(n) * stride(), stride()}; }
    std::span<const double> row(int n) const {
        return {u_.data() + static_cast<std::size_t>(n) * stride(), stride()};
    }

    /// Option value V(tau, S): cubic in x, linear in tau. Throws OutOfRange off the grid.
    double value(double tau, double S) const;
    /// dV/dS from the derivative of the same interpolant.
    double value_dS(double tau, double S) const;

    std::string kernel_name;

private:
    std::size_t stride() const { return static_cast<std::size_t>(grid_.N) + 1; }
    double u_at(int n, double x) const;

    PideGrid grid_;
    Contract contract_;
    double sigma_ = 0.0;
    double r_ = 0.0;
    std::vector<double> u_;
};

/// Linear PIDE: volatility sigma, jumps with shift xi(rho).
PriceSurface solve_linear_pide(const PideProblem& problem, const PideGrid& grid, const SolverOptions& opts = {});

/// Nonlinear PIDE with feedback volatility sigma / (1 - rho S dphi/dS).
PriceSurface solve_feedback_pide(const PideProblem& problem, const PideGrid& grid,
                                 const SolverOptions& opts = {});

/// V(0, S0) = e^{-rT} u(T, ln(S0/K)).
double price_from_surface(const PriceSurface& surface, double S0);

// ---------------------------------------------------------------------------

template <class Ext>
void IntegralWeights::apply(std::span<const double> u, Ext&& ext, std::span<double> out) const {
    const int n = nodes;
    apply_jump(u, out);
    for (const Outside& o : outside) {
        const double x = o.col == std::numeric_limits<int>::min() ? -std::numeric_limits<double>::infinity()
                                                                  : x0 + o.col * dx;
        out[o.row] += o.weight * ext(x);
    }
    out[0] = 0.0;
    out[n - 1] = 0.0;
    for (int i = 1; i + 1 < n; ++i) {
        const double ux = (u[i + 1] - u[i - 1]) / (2.0 * dx);
        const double uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx);
        out[i] += -W[i] * u[i] - B[i] * ux + q[i] * (uxx - ux);
    }
}

}  // namespace levypide
