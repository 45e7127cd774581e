#pragma once

#include <memory>
#include <vector>

#include "levypide/analytic_pricers.hpp"
#include "levypide/feedback_shift.hpp"
#include "levypide/levy_measures.hpp"
#include "levypide/pide_solver.hpp"

namespace levypide {

/// Option value V(tau, S) and dV/dS, tau = time to maturity.
class ValueProvider {
public:
    virtual ~ValueProvider() = default;
    virtual double value(double tau, double S) const = 0;
    virtual double delta(double tau, double S) const = 0;
    /// Limit of V as S -> 0+, used when a jump absorbs the price at zero.
    virtual double value_at_zero(double tau) const = 0;
};

class BsValueProvider final : public ValueProvider {
public:
    BsValueProvider(Contract c, double sigma, double r) : c_(c), sigma_(sigma), r_(r) {}
    double value(double tau, double S) const override;
    double delta(double tau, double S) const override;
    double value_at_zero(double tau) const override;

private:
    Contract c_;
    double sigma_, r_;
};

/// Reads a solved surface; beyond the x-domain it falls back to the discounted intrinsic value.
class SurfaceValueProvider final : public ValueProvider {
public:
    explicit SurfaceValueProvider(std::shared_ptr<const PriceSurface> s) : s_(std::move(s)) {}
    double value(double tau, double S) const override;
    double delta(double tau, double S) const override;
    double value_at_zero(double tau) const override;

private:
    bool inside(double S) const;
    std::shared_ptr<const PriceSurface> s_;
};

struct HedgeRuleOptions {
    double inner_cut = 1e-4;
    double graded_to = 0.05;  ///< geometric panels from inner_cut up to here
    double panel_width = 0.02;
    double truncation = 8.0;
    int gauss_points = 4;
    double negligible = 1e-16;
};

struct HedgeContext {
    double sigma = 0.23;
    LevyMeasureSpec measure;
    std::shared_ptr<const ValueProvider> V;
    PanelRule rule;  ///< filled by make_hedge_context

    double rho = 0.0;
    StrategyPtr strategy;  ///< the large trader's current strategy when rho > 0
};

HedgeContext make_hedge_context(double sigma, const LevyMeasureSpec& measure, std::shared_ptr<const ValueProvider> V,
                                const HedgeRuleOptions& opts = {});

/// v^2 S^2 (V_S - a)^2 + int (V(S + H) - V(S) - a H)^2 nu(dz), with v and H from the context strategy.
double pointwise_objective(const HedgeContext& ctx, double tau, double S, double a);

/// Closed-form minimiser of pointwise_objective: beta [v^2 S^2 V_S + int (V(S+H) - V(S)) H nu].
double optimal_hedge_pointwise(const HedgeContext& ctx, double tau, double S);

/// Golden-section minimiser of pointwise_objective on [lo, hi]; the independent route.
double golden_section_hedge(const HedgeContext& ctx, double tau, double S, double lo, double hi,
                            double tol = 1e-11);

/// Hedge on a log-spaced S-grid around the strike: S_j = K_ref e^{x_j}.
struct HedgeGrid {
    double reference = 100.0;
    double x_min = -1.0;
    double x_max = 1.0;
    int n = 81;

    double dx() const { return (x_max - x_min) / (n - 1); }
    double x(int j) const { return x_min + j * dx(); }
};

struct FixedPointOptions {
    double damping = 0.5;
    double tol = 1e-9;
    int max_iter = 100;
};

struct StrategyProfile {
    HedgeGrid grid;
    std::vector<double> phi;  ///< values at the grid nodes
    int iterations = 0;
    double residual = 0.0;

    StrategyPtr as_strategy() const;
};

/// rho = 0 optimum at every grid node.
StrategyProfile optimal_strategy_rho0(const HedgeContext& ctx, double tau, const HedgeGrid& grid);

/// Damped Picard iteration phi <- (1-d) phi + d * argmin(phi) for rho > 0, started from rho = 0.
/// Throws IterationError on non-convergence and AssumptionViolation if rho L >= 1 along the way.
StrategyProfile optimal_strategy_fixed_point(const HedgeContext& ctx, double tau, const HedgeGrid& grid,
                                             double rho, const FixedPointOptions& opts = {});

/// phi0 + rho phi1 at S, with phi0 given as a strategy (normally the rho = 0 grid profile).
double strategy_first_order(const HedgeContext& ctx, double tau, double S, double rho, const Strategy& phi0);

/// Heuristic for the constraint |S dphi/dS| <= cap: slopes of the grid profile are clipped and
/// the profile re-integrated from its central node.
StrategyProfile clamp_strategy(const StrategyProfile& p, double cap);

}  // namespace levypide
