#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "levypide/levy_measures.hpp"

namespace levypide {

/// Large-trader holding in log coordinates: psi(tau, x) = phi(T - tau, K_ref e^x).
/// Since S dphi/dS = dpsi/dx, the Lipschitz constant L = sup |S dphi/dS| = sup |psi_x|.
class Strategy {
public:
    explicit Strategy(double reference_level = 100.0) : ref_(reference_level) {}
    virtual ~Strategy() = default;

    virtual double psi(double tau, double x) const = 0;
    /// Defaults to a central difference with step 1e-5.
    virtual double psi_x(double tau, double x) const;
    virtual double lipschitz() const = 0;
    virtual bool time_dependent() const { return false; }
    virtual std::string describe() const = 0;

    double reference_level() const { return ref_; }
    double phi(double tau, double S) const;
    double phi_S(double tau, double S) const;

private:
    double ref_;
};

using StrategyPtr = std::shared_ptr<const Strategy>;

/// psi = c
StrategyPtr constant_strategy(double c, double reference_level = 100.0);
/// psi = c x, so S dphi/dS = c everywhere
StrategyPtr linear_strategy(double c, double reference_level = 100.0);
/// psi = a N(x / s)
StrategyPtr normal_cdf_strategy(double a, double s, double reference_level = 100.0);
/// psi = a tanh(x / s)
StrategyPtr tanh_strategy(double a, double s, double reference_level = 100.0);
/// psi = a (N(x / s) - 1), shaped like a put delta
StrategyPtr put_delta_strategy(double a, double s, double reference_level = 100.0);
/// Tabulated psi on a uniform x-grid (cubic interpolation, constant extension).
StrategyPtr grid_strategy(std::vector<double> values, double x0, double dx, double reference_level);

/// Fixed-point iteration outcome.
struct ShiftSolution {
    double value = 0.0;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> trace;  ///< successive update sizes
};

struct ShiftOptions {
    double tol = 1e-13;
    int max_iter = 200;
    bool record_trace = false;
};

/// H solving H = S(e^z - 1) + rho S (phi(S + H) - phi(S)) at fixed tau.
/// Throws AssumptionViolation if rho L >= 1 or if S + H leaves (0, inf), IterationError on stall.
ShiftSolution solve_shift_H(double S, double z, double rho, double tau, const Strategy& strategy,
                            const ShiftOptions& opts = {});

/// xi solving xi = log(e^z + rho (psi(x + xi) - psi(x))).
ShiftSolution solve_shift_xi(double x, double z, double rho, double tau, const Strategy& strategy,
                             const ShiftOptions& opts = {});

enum class XiMode { Exact, FirstOrder, NoEzFactor };

/// Status-returning variant used in inner loops. Returns false when the jump would send the
/// price to a nonpositive level (the post-jump state is then absorbed at S = 0).
bool try_shift_xi(double x, double z, double rho, double tau, const Strategy& strategy, XiMode mode,
                  double& xi);

/// First-order expansions in rho.
double shift_H_first_order(double S, double z, double rho, double tau, const Strategy& strategy);
double shift_xi_first_order(double x, double z, double rho, double tau, const Strategy& strategy,
                            bool with_ez_factor = true);

/// v = sigma / (1 - rho S dphi/dS); throws AssumptionViolation when the denominator is not positive.
double feedback_volatility(double sigma, double rho, double tau, double x, const Strategy& strategy);

/// delta(tau, x) = int (e^xi - 1 - xi) nu(dz) by adaptive quadrature.
double shift_delta(const LevyMeasureSpec& spec, double rho, double tau, double x, const Strategy& strategy,
                   XiMode mode = XiMode::Exact, const QuadratureOptions& opts = {});

/// Checks rho L < 1 and throws AssumptionViolation otherwise.
void require_feedback_assumption(double rho, const Strategy& strategy);

}  // namespace levypide
