#include "levypide/hedging.hpp"

#include <algorithm>
#include <cmath>

#include "levypide/errors.hpp"
#include "levypide/numerics.hpp"

namespace levypide {

double BsValueProvider::value(double tau, double S) const {
    return bs_price(S, c_.strike, tau, sigma_, r_, c_.type);
}

double BsValueProvider::delta(double tau, double S) const {
    return bs_delta(S, c_.strike, tau, sigma_, r_, c_.type);
}

double BsValueProvider::value_at_zero(double tau) const {
    return c_.type == OptionType::Put ? c_.strike * std::exp(-r_ * tau) : 0.0;
}

bool SurfaceValueProvider::inside(double S) const {
    const double x = std::log(S / s_->contract().strike);
    return std::abs(x) <= s_->grid().L;
}

double SurfaceValueProvider::value(double tau, double S) const {
    if (!(S > 0.0)) return value_at_zero(tau);
    if (inside(S)) return s_->value(tau, S);
    const double kd = s_->contract().strike * std::exp(-s_->r() * tau);
    return s_->contract().type == OptionType::Put ? std::max(kd - S, 0.0) : std::max(S - kd, 0.0);
}

double SurfaceValueProvider::delta(double tau, double S) const {
    if (inside(S)) return s_->value_dS(tau, S);
    const double kd = s_->contract().strike * std::exp(-s_->r() * tau);
    if (s_->contract().type == OptionType::Put) return S < kd ? -1.0 : 0.0;
    return S > kd ? 1.0 : 0.0;
}

double SurfaceValueProvider::value_at_zero(double tau) const {
    return s_->contract().type == OptionType::Put ? s_->contract().strike * std::exp(-s_->r() * tau) : 0.0;
}

HedgeContext make_hedge_context(double sigma, const LevyMeasureSpec& measure, std::shared_ptr<const ValueProvider> V,
                                const HedgeRuleOptions& opts) {
    if (!(sigma >= 0.0)) throw ParameterDomainError("hedge: sigma must be >= 0");
    if (!V) throw ParameterDomainError("hedge: value provider required");
    HedgeContext ctx;
    ctx.sigma = sigma;
    ctx.measure = measure;
    ctx.V = std::move(V);
    ctx.rule = make_graded_rule(measure, opts.inner_cut, opts.graded_to, opts.panel_width, opts.truncation,
                                opts.gauss_points, opts.negligible);
    return ctx;
}

namespace {

/// Per-(tau, S) quantities shared by the objective and its minimiser.
struct LocalData {
    double S = 0.0;
    double VS = 0.0;
    double v2S2 = 0.0;
    double dH0 = 0.0;  ///< dH/dz at z = 0, drives the inner Taylor surrogate
    std::vector<double> H;   ///< jump size per node
    std::vector<double> dV;  ///< V(S + H) - V(S) per node
};

LocalData local_data(const HedgeContext& ctx, double tau, double S) {
    if (!(S > 0.0)) throw ParameterDomainError("hedge: S must be > 0");
    LocalData d;
    d.S = S;
    d.VS = ctx.V->delta(tau, S);
    const double V0 = ctx.V->value(tau, S);
    double slope = 0.0;  // rho S dphi/dS
    const Strategy* st = ctx.strategy.get();
    if (ctx.rho > 0.0) {
        if (st == nullptr) throw ParameterDomainError("hedge: rho > 0 requires a strategy");
        require_feedback_assumption(ctx.rho, *st);
        slope = ctx.rho * st->psi_x(tau, std::log(S / st->reference_level()));
    }
    const double v = ctx.sigma / (1.0 - slope);
    d.v2S2 = v * v * S * S;
    d.dH0 = S / (1.0 - slope);
    const std::size_t K = ctx.rule.nodes.size();
    d.H.resize(K);
    d.dV.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double z = ctx.rule.nodes[k];
        double H = S * std::expm1(z);
        if (ctx.rho > 0.0) {
            try {
                H = solve_shift_H(S, z, ctx.rho, tau, *st).value;
            } catch (const AssumptionViolation&) {
                H = -S;  // jump absorbed at zero price
            }
        }
        d.H[k] = H;
        d.dV[k] = (S + H > 0.0 ? ctx.V->value(tau, S + H) : ctx.V->value_at_zero(tau)) - V0;
    }
    return d;
}

double objective_from(const HedgeContext& ctx, const LocalData& d, double a) {
    const double m2 = ctx.rule.inner.m2;
    const double g = d.VS - a;
    double s = d.v2S2 * g * g + m2 * d.dH0 * d.dH0 * g * g;
    for (std::size_t k = 0; k < d.H.size(); ++k) {
        const double e = d.dV[k] - a * d.H[k];
        s += ctx.rule.weights[k] * e * e;
    }
    return s;
}

double optimum_from(const HedgeContext& ctx, const LocalData& d) {
    const double m2 = ctx.rule.inner.m2;
    double num = d.v2S2 * d.VS + m2 * d.dH0 * d.dH0 * d.VS;
    double den = d.v2S2 + m2 * d.dH0 * d.dH0;
    for (std::size_t k = 0; k < d.H.size(); ++k) {
        num += ctx.rule.weights[k] * d.dV[k] * d.H[k];
        den += ctx.rule.weights[k] * d.H[k] * d.H[k];
    }
    if (!(den > 0.0)) throw ParameterDomainError("hedge: degenerate objective (no diffusion and no jumps)");
    return num / den;
}

}  // namespace

double pointwise_objective(const HedgeContext& ctx, double tau, double S, double a) {
    return objective_from(ctx, local_data(ctx, tau, S), a);
}

double optimal_hedge_pointwise(const HedgeContext& ctx, double tau, double S) {
    return optimum_from(ctx, local_data(ctx, tau, S));
}

double golden_section_hedge(const HedgeContext& ctx, double tau, double S, double lo, double hi, double tol) {
    const LocalData d = local_data(ctx, tau, S);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - g * (b - a), e = a + g * (b - a);
    double fc = objective_from(ctx, d, c), fe = objective_from(ctx, d, e);
    while (b - a > tol) {
        if (fc < fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = objective_from(ctx, d, c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = objective_from(ctx, d, e);
        }
    }
    return 0.5 * (a + b);
}

StrategyPtr StrategyProfile::as_strategy() const {
    return grid_strategy(phi, grid.x_min, grid.dx(), grid.reference);
}

StrategyProfile optimal_strategy_rho0(const HedgeContext& ctx, double tau, const HedgeGrid& grid) {
    if (grid.n < 4 || !(grid.x_max > grid.x_min)) throw ParameterDomainError("hedge grid: need n >= 4");
    HedgeContext c0 = ctx;
    c0.rho = 0.0;
    c0.strategy.reset();
    StrategyProfile p;
    p.grid = grid;
    p.phi.resize(grid.n);
    for (int j = 0; j < grid.n; ++j) p.phi[j] = optimal_hedge_pointwise(c0, tau, grid.reference * std::exp(grid.x(j)));
    return p;
}

StrategyProfile optimal_strategy_fixed_point(const HedgeContext& ctx, double tau, const HedgeGrid& grid, double rho,
                                             const FixedPointOptions& opts) {
    if (!(rho >= 0.0)) throw ParameterDomainError("hedge: rho must be >= 0");
    if (!(opts.damping > 0.0 && opts.damping <= 1.0)) throw ParameterDomainError("hedge: damping in (0, 1]");
    StrategyProfile p = optimal_strategy_rho0(ctx, tau, grid);
    if (rho == 0.0) return p;
    HedgeContext c = ctx;
    c.rho = rho;
    std::vector<double> next(grid.n);
    for (int it = 1; it <= opts.max_iter; ++it) {
        c.strategy = p.as_strategy();
        for (int j = 0; j < grid.n; ++j) next[j] = optimal_hedge_pointwise(c, tau, grid.reference * std::exp(grid.x(j)));
        double change = 0.0;
        for (int j = 0; j < grid.n; ++j) {
            const double upd = (1.0 - opts.damping) * p.phi[j] + opts.damping * next[j];
            change = std::max(change, std::abs(upd - p.phi[j]));
            p.phi[j] = upd;
        }
        p.iterations = it;
        p.residual = change;
        if (change < opts.tol) return p;
    }
    throw IterationError("optimal_strategy_fixed_point: no convergence", p.residual);
}

double strategy_first_order(const HedgeContext& ctx, double tau, double S, double rho, const Strategy& phi0) {
    if (!(S > 0.0)) throw ParameterDomainError("hedge: S must be > 0");
    const ValueProvider& V = *ctx.V;
    const double s2 = ctx.sigma * ctx.sigma;
    const double VS = V.delta(tau, S);
    const double V0 = V.value(tau, S);
    const double p0 = phi0.phi(tau, S);
    const double p0S = phi0.phi_S(tau, S);
    const double m2 = ctx.rule.inner.m2;

    // Zeroth and first order parts of numerator N and denominator D of phi = N / D.
    double N0 = s2 * S * S * VS + m2 * S * S * VS;
    double D0 = s2 * S * S + m2 * S * S;
    double N1 = 2.0 * s2 * S * S * S * VS * p0S + 2.0 * m2 * S * S * S * VS * p0S;
    double D1 = 2.0 * s2 * S * S * S * p0S + 2.0 * m2 * S * S * S * p0S;
    for (std::size_t k = 0; k < ctx.rule.nodes.size(); ++k) {
        const double z = ctx.rule.nodes[k];
        const double w = ctx.rule.weights[k];
        const double Sz = S * std::exp(z);
        const double H0 = S * std::expm1(z);
        const double H1 = S * (phi0.phi(tau, Sz) - p0);
        const double dV = V.value(tau, Sz) - V0;
        N0 += w * dV * H0;
        D0 += w * H0 * H0;
        N1 += w * (dV + V.delta(tau, Sz) * H0) * H1;
        D1 += w * 2.0 * H0 * H1;
    }
    const double beta0 = 1.0 / D0;
    const double beta1 = -D1 / (D0 * D0);
    return beta0 * N0 + rho * (beta0 * N1 + beta1 * N0);
}

StrategyProfile clamp_strategy(const StrategyProfile& p, double cap) {
    if (!(cap >= 0.0)) throw ParameterDomainError("clamp_strategy: cap must be >= 0");
    StrategyProfile out = p;
    const int n = p.grid.n;
    const int mid = n / 2;
    const double lim = cap * p.grid.dx();
    for (int j = mid + 1; j < n; ++j)
        out.phi[j] = out.phi[j - 1] + std::clamp(p.phi[j] - p.phi[j - 1], -lim, lim);
    for (int j = mid - 1; j >= 0; --j)
        out.phi[j] = out.phi[j + 1] + std::clamp(p.phi[j] - p.phi[j + 1], -lim, lim);
    return out;
}

}  // namespace levypide
