#pragma once

#include <cstdint>
#include <vector>

#include "levypide/portfolio_alpha.hpp"

namespace levypide {

/// Initial risk-aversion profile phi0 = -u''/u'.
struct UtilitySpec {
    enum class Kind { Dara, Arctan, Constant, Sampled };
    Kind kind = Kind::Dara;
    double a0 = 9.0, a1 = 8.0, x_star = 2.0;  ///< DARA
    double gamma_trunc = 6.0;                 ///< DARA: phi0 = 0 outside (-gamma, gamma)
    double constant = 9.0;                    ///< Constant
    std::vector<double> samples;              ///< Sampled: one value per cell

    static UtilitySpec dara(double a0, double a1, double x_star, double gamma_trunc = 6.0);
    static UtilitySpec arctan();
    static UtilitySpec constant_profile(double c);
    static UtilitySpec sampled(std::vector<double> values);
    void validate() const;
};

/// Cell-centred grid on [-X, X].
struct HjbGrid {
    double X = 7.0;
    int Nx = 280;
    double T = 1.0;
    int Nt = 200;

    double h() const { return 2.0 * X / Nx; }
    double x(int i) const { return -X + (i + 0.5) * h(); }
    double dt() const { return T / Nt; }
    void validate() const;
};

/// Log-wealth drift mu(x, theta) = mu^T theta - theta^T Sigma theta / 2 + eps(e^x) e^{-x}
/// with inflow eps(y) = 0 for y < y_minus and C above.
struct DriftSpec {
    double C = 0.0;
    double y_minus = 1.0;

    /// eps(e^x) e^{-x}
    double inflow(double x) const;
    /// |d/dx inflow| away from the switch point
    double inflow_slope(double x) const;
    void validate() const;
};

/// alpha(x, phi) = alpha_static(phi + 1) - inflow(x), where alpha_static is the Markowitz value
/// function of the portfolio problem. The n = 2 simplex uses the closed-form branches.
class DiffusionFunction {
public:
    DiffusionFunction(PortfolioProblem problem, DriftSpec drift);
    double value(double x, double phi) const;
    double slope(double phi) const;
    /// Throws InstabilityError if phi + 1 < 0.
    void eval(double x, double phi, double& a, double& da) const;
    const PortfolioProblem& problem() const { return p_; }
    const DriftSpec& drift() const { return d_; }

private:
    void eval_static(double s, double& a, double& da) const;
    PortfolioProblem p_;
    DriftSpec d_;
    bool two_asset_ = false;
    TwoAssetBranches br_;
    std::vector<DiscreteLine> lines_;
};

double phi0_value(const UtilitySpec& u, double x);
std::vector<double> phi0_from_utility(const UtilitySpec& u, const HjbGrid& grid);

/// psi_lower e^{lambda tau} <= alpha(x, phi(x, tau)) <= psi_upper e^{lambda tau}.
struct AprioriBounds {
    double psi_lower = 0.0;
    double psi_upper = 0.0;
    double lambda = 0.0;

    double lower(double tau) const;
    double upper(double tau) const;
};
/// Extrema over the cell centres; lambda = max |d inflow/dx| over the cells (the jump of the
/// inflow at y_minus contributes no slope).
AprioriBounds apriori_bounds(const DiffusionFunction& alpha, const std::vector<double>& phi0, const HjbGrid& grid);

struct HjbOptions {
    double picard_tol = 1e-9;
    int max_picard = 50;
    double envelope_tol = 1e-6;
    bool flip_source = false;  ///< solve phi_tau - (alpha)_xx = +(alpha phi)_x instead
};

struct HjbSolution {
    HjbGrid grid;
    std::vector<std::vector<double>> phi;  ///< phi[n][i], n = 0..Nt
    AprioriBounds bounds;
    double max_envelope_violation = 0.0;  ///< largest excursion beyond the envelope
    int envelope_flags = 0;               ///< steps whose excursion exceeded envelope_tol
    std::vector<double> mass;             ///< sum phi h per step
    std::vector<double> ledger;           ///< mass[0] plus accumulated boundary flux of alpha phi
    int max_picard_iterations = 0;

    double tau(int n) const { return n * grid.dt(); }
    double max_ledger_error() const;
};

/// Finite-volume solver for phi_tau - (alpha(x, phi))_xx = -(alpha(x, phi) phi)_x.
/// Diffusion implicit (Newton on the lagged linearisation), convection explicit upwind,
/// zero-gradient ghost cells for phi at both ends, so only the inflow and alpha phi cross the boundary.
HjbSolution solve_riccati_pde(const DiffusionFunction& alpha, const std::vector<double>& phi0, const HjbGrid& grid,
                              const HjbOptions& opts = {});

struct SupportChange {
    int step = 0;
    double x = 0.0;  ///< face between the two cells
    std::uint64_t left = 0, right = 0;
};

struct WeightsSurface {
    std::vector<std::vector<Eigen::VectorXd>> theta;  ///< theta[n][i]
    std::vector<std::vector<std::uint64_t>> support;
    std::vector<SupportChange> contours;
};

/// Optimal weights at every node: argmin of -mu^T theta + (phi + 1)/2 theta^T Sigma theta.
WeightsSurface optimal_weights_surface(const PortfolioProblem& p, const HjbSolution& sol, int stride = 1);

/// Unnormalised value-function shape from phi = -V''/V' at one step: V'(x_0) = 1, V(x_0) = 0,
/// so the result is determined only up to V -> a V + b with a > 0.
std::vector<double> value_shape(const HjbSolution& sol, int step);

}  // namespace levypide
