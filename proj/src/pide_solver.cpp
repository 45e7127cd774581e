#include "levypide/pide_solver.hpp"

#include <algorithm>
#include <climits>
#include <cmath>

#include "levypide/errors.hpp"
#include "levypide/numerics.hpp"

namespace levypide {

void PideGrid::validate() const {
    if (!(L > 0.0) || !std::isfinite(L)) throw ParameterDomainError("grid: L must be > 0");
    if (N < 8 || N % 2 != 0) throw ParameterDomainError("grid: N must be even and >= 8");
    if (M < 1) throw ParameterDomainError("grid: M must be >= 1");
}

namespace {

constexpr double kAbsorbedXiCap = -50.0;

/// Adds w to the two interpolation columns of target position s (in cells from x0).
void scatter(std::vector<std::pair<int, double>>& row, double s, double w) {
    const double fl = std::floor(s);
    const double t = s - fl;
    const int c = static_cast<int>(fl);
    row.emplace_back(c, w * (1.0 - t));
    if (t != 0.0) row.emplace_back(c + 1, w * t);
}

}  // namespace

void IntegralWeights::apply_jump(std::span<const double> U, std::span<double> out) const {
    const simd::KernelSet& k = simd::active_kernels();
    if (translation_invariant) {
        if (toeplitz.empty()) {
            std::fill(out.begin(), out.end(), 0.0);
            return;
        }
        k.toeplitz(toeplitz.data(), toeplitz.size(), toeplitz_offset, U.data(), out.data(), U.size());
    } else {
        k.csr(jump, U.data(), out.data());
    }
}

IntegralWeights build_integral_weights(const PideGrid& grid, const LevyMeasureSpec& measure, double rho,
                                       const Strategy* strategy, XiMode mode, double tau,
                                       const SolverOptions& opts) {
    grid.validate();
    IntegralWeights iw;
    const int n = grid.N + 1;
    iw.nodes = n;
    iw.x0 = -grid.L;
    iw.dx = grid.dx();
    iw.W.assign(n, 0.0);
    iw.B.assign(n, 0.0);
    iw.q.assign(n, 0.0);
    iw.delta.assign(n, 0.0);
    iw.translation_invariant = rho == 0.0;
    if (!(rho >= 0.0)) throw ParameterDomainError("rho must be >= 0");
    if (rho > 0.0) {
        if (strategy == nullptr) throw ParameterDomainError("rho > 0 requires a strategy");
        require_feedback_assumption(rho, *strategy);
    }
    if (measure.is_zero()) return iw;
    if (!(opts.local_band_cells > 0.0)) throw ParameterDomainError("local_band_cells must be > 0");

    const double dx = iw.dx;
    const double cut = opts.local_band_cells * dx;
    const PanelRule rule = make_panel_rule(measure, dx, cut, opts.truncation, opts.gauss_points, opts.negligible);
    iw.z = rule.nodes;
    iw.w = rule.weights;
    const std::size_t K = iw.z.size();

    if (iw.translation_invariant) {
        std::vector<std::pair<int, double>> row;
        double W = 0.0, B = 0.0, D = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            scatter(row, iw.z[k] / dx, iw.w[k]);
            W += iw.w[k];
            B += iw.w[k] * std::expm1(iw.z[k]);
            D += iw.w[k] * (std::expm1(iw.z[k]) - iw.z[k]);
        }
        int lo = INT_MAX, hi = INT_MIN;
        for (auto [c, v] : row) {
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        iw.toeplitz_offset = lo;
        iw.toeplitz.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
        for (auto [c, v] : row) iw.toeplitz[c - lo] += v;
        const double q = 0.5 * rule.inner.m2;
        std::fill(iw.W.begin(), iw.W.end(), W);
        std::fill(iw.B.begin(), iw.B.end(), B);
        std::fill(iw.q.begin(), iw.q.end(), q);
        std::fill(iw.delta.begin(), iw.delta.end(), D + q);
        for (int i = 1; i + 1 < n; ++i) {
            for (std::size_t j = 0; j < iw.toeplitz.size(); ++j) {
                const int col = i + static_cast<int>(lo) + static_cast<int>(j);
                if ((col < 0 || col >= n) && iw.toeplitz[j] != 0.0) iw.outside.push_back({i, col, iw.toeplitz[j]});
            }
        }
        return iw;
    }

    iw.xi.assign(static_cast<std::size_t>(n) * K, 0.0);
    simd::CsrMatrix& J = iw.jump;
    J.rows = n;
    J.cols = n;
    J.row_ptr.assign(1, 0);
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < n; ++i) {
        row.clear();
        if (i > 0 && i + 1 < n) {
            const double x = grid.x(i);
            double W = 0.0, B = 0.0, D = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                const double wk = iw.w[k];
                double xi = 0.0;
                W += wk;
                if (!try_shift_xi(x, iw.z[k], rho, tau, *strategy, mode, xi)) {
                    iw.xi[i * K + k] = -std::numeric_limits<double>::infinity();
                    iw.outside.push_back({i, INT_MIN, wk});
                    B -= wk;
                    D += wk * (std::expm1(kAbsorbedXiCap) - kAbsorbedXiCap);
                    continue;
                }
                iw.xi[i * K + k] = xi;
                scatter(row, (x + xi - iw.x0) / dx, wk);
                B += wk * std::expm1(xi);
                D += wk * (std::expm1(xi) - xi);
            }
            double xp = 0.0, xm = 0.0;
            if (!try_shift_xi(x, cut, rho, tau, *strategy, mode, xp) ||
                !try_shift_xi(x, -cut, rho, tau, *strategy, mode, xm))
                throw AssumptionViolation("build_integral_weights: small jump absorbed");
            const double c_xi = 0.5 * ((xp / cut) * (xp / cut) + (xm / cut) * (xm / cut));
            iw.W[i] = W;
            iw.B[i] = B;
            iw.q[i] = 0.5 * c_xi * rule.inner.m2;
            iw.delta[i] = D + iw.q[i];
        }
        std::sort(row.begin(), row.end(), [](auto a, auto b) { return a.first < b.first; });
        for (std::size_t e = 0; e < row.size();) {
            const int c = row[e].first;
            double v = 0.0;
            for (; e < row.size() && row[e].first == c; ++e) v += row[e].second;
            if (c >= 0 && c < n) {
                J.col_idx.push_back(c);
                J.values.push_back(v);
            } else {
                iw.outside.push_back({i, c, v});
            }
        }
        J.row_ptr.push_back(static_cast<std::uint32_t>(J.col_idx.size()));
    }
    return iw;
}

PriceSurface::PriceSurface(PideGrid grid, Contract contract, double sigma, double r)
    : grid_(grid), contract_(contract), sigma_(sigma), r_(r) {
    u_.assign(static_cast<std::size_t>(grid_.M + 1) * stride(), 0.0);
}

double PriceSurface::u_at(int n, double x) const { return cubic_interpolate(row(n), -grid_.L, grid_.dx(), x); }

double PriceSurface::value(double tau, double S) const {
    if (!(S > 0.0)) throw OutOfRange("surface: S must be > 0");
    const double x = std::log(S / contract_.strike);
    const double T = contract_.maturity;
    if (x < -grid_.L * (1.0 + 1e-12) || x > grid_.L * (1.0 + 1e-12) || tau < -1e-12 || tau > T * (1.0 + 1e-12))
        throw OutOfRange("surface: point outside the computed domain");
    const double s = std::clamp(tau / dt(), 0.0, static_cast<double>(grid_.M));
    const int n = std::min(static_cast<int>(std::floor(s)), grid_.M - 1);
    const double w = s - n;
    double u = u_at(n, x);
    if (w > 0.0) u = (1.0 - w) * u + w * u_at(n + 1, x);
    return std::exp(-r_ * tau) * u;
}

double PriceSurface::value_dS(double tau, double S) const {
    value(tau, S);  // range check
    const double x = std::log(S / contract_.strike);
    const double s = std::clamp(tau / dt(), 0.0, static_cast<double>(grid_.M));
    const int n = std::min(static_cast<int>(std::floor(s)), grid_.M - 1);
    const double w = s - n;
    const double h = grid_.dx();
    const auto du = [&](int k) { return cubic_interpolate_derivative(row(k), -grid_.L, h, x); };
    double ux = du(n);
    if (w > 0.0) ux = (1.0 - w) * ux + w * du(n + 1);
    return std::exp(-r_ * tau) * ux / S;
}

namespace {

/// Analytic u_BS with the forward supplied by the caller (saves an exp in inner loops).
struct BsKernel {
    double K, sigma, r;
    OptionType type;

    double u(double tau, double x, double fwd) const {
        const double sd = sigma * std::sqrt(tau);
        const double d1 = (x + (r + 0.5 * sigma * sigma) * tau) / sd;
        const double d2 = d1 - sd;
        if (type == OptionType::Call) return fwd * normal_cdf(d1) - K * normal_cdf(d2);
        return K * normal_cdf(-d2) - fwd * normal_cdf(-d1);
    }
    double at_minus_infinity() const { return type == OptionType::Put ? K : 0.0; }
    double asymptote(double tau, double x) const {
        if (std::isinf(x)) return at_minus_infinity();
        const double f = K * std::exp(x + r * tau);
        return type == OptionType::Put ? std::max(K - f, 0.0) : std::max(f - K, 0.0);
    }
};

PriceSurface solve_impl(const PideProblem& p, const PideGrid& g, const SolverOptions& o, bool feedback) {
    g.validate();
    const Contract& c = p.contract;
    if (!(c.strike > 0.0) || !(c.maturity > 0.0)) throw ParameterDomainError("contract: K, T must be > 0");
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) throw ParameterDomainError("sigma must be > 0");
    if (!std::isfinite(p.r)) throw ParameterDomainError("r must be finite");
    if (!(p.rho >= 0.0)) throw ParameterDomainError("rho must be >= 0");
    const Strategy* strat = p.strategy.get();
    if (p.rho > 0.0) {
        if (strat == nullptr) throw ParameterDomainError("rho > 0 requires a strategy");
        require_feedback_assumption(p.rho, *strat);
    }

    const int n = g.N + 1;
    const int m = n - 2;  // interior unknowns
    const double dx = g.dx();
    const double dt = c.maturity / g.M;
    const double K = c.strike;
    const double sig2 = p.sigma * p.sigma;
    const double drift_factor = p.delta_sign == DeltaSign::Plus ? 2.0 : 0.0;
    const bool time_dep = p.rho > 0.0 && strat->time_dependent();
    const BsKernel bs{K, p.sigma, p.r, c.type};

    PriceSurface surf(g, c, p.sigma, p.r);
    surf.kernel_name = std::string(simd::active_kernels().name);

    std::vector<double> x(n), ex(n);
    for (int i = 0; i < n; ++i) {
        x[i] = g.x(i);
        ex[i] = std::exp(x[i]);
    }
    {
        auto r0 = surf.row(0);
        for (int i = 0; i < n; ++i) r0[i] = payoff(c, K * ex[i]);
    }

    IntegralWeights iw;
    std::vector<double> sig_eff(n, p.sigma), lower(m), diag(m), upper(m);
    const auto prepare = [&](double tau) {
        iw = build_integral_weights(g, p.measure, p.rho, strat, p.xi_mode, tau, o);
        for (int i = 0; i < n; ++i) {
            if (feedback && p.rho > 0.0) {
                const double denom = 1.0 - p.rho * strat->psi_x(tau, x[i]);
                if (!(denom >= o.feedback_margin))
                    throw AssumptionViolation("feedback: 1 - rho S dphi/dS below margin on the grid");
                sig_eff[i] = p.sigma / denom;
            } else {
                sig_eff[i] = p.sigma;
            }
        }
        for (int j = 0; j < m; ++j) {
            const int i = j + 1;
            const double se2 = sig_eff[i] * sig_eff[i];
            const double D = 0.5 * se2 + iw.q[i];
            const double Cv = p.r - 0.5 * se2 + drift_factor * iw.delta[i] - iw.B[i] - iw.q[i];
            lower[j] = -dt * (D / (dx * dx) - Cv / (2.0 * dx));
            diag[j] = 1.0 + dt * (2.0 * D / (dx * dx) + iw.W[i]);
            upper[j] = -dt * (D / (dx * dx) + Cv / (2.0 * dx));
        }
    };
    prepare(0.5 * dt);

    // State: U = u - u_BS in shift mode, u itself in raw mode.
    std::vector<double> U(n, 0.0), JU(n), rhs(m), l(m), d(m), up(m);
    if (!o.shift) {
        auto r0 = surf.row(0);
        std::copy(r0.begin(), r0.end(), U.begin());
    }
    const std::size_t Kq = iw.z.size();
    std::vector<double> ez(Kq), ezm1(Kq);
    const auto refresh_nodes = [&] {
        ez.resize(iw.z.size());
        ezm1.resize(iw.z.size());
        for (std::size_t k = 0; k < iw.z.size(); ++k) {
            ez[k] = std::exp(iw.z[k]);
            ezm1[k] = std::expm1(iw.z[k]);
        }
    };
    refresh_nodes();

    for (int step = 0; step < g.M; ++step) {
        const double t0 = step * dt, t1 = (step + 1) * dt, tm = (step + 0.5) * dt;
        if (time_dep && step > 0) {
            prepare(tm);
            refresh_nodes();
        }
        iw.apply_jump(U, JU);
        const double erm = std::exp(p.r * tm);
        for (int j = 0; j < m; ++j) {
            const int i = j + 1;
            double f = U[i] + dt * JU[i];
            if (o.shift) {
                const LogPriceValue b0 = bs_log_value(t0, x[i], K, p.sigma, p.r, c.type);
                const LogPriceValue b1 = bs_log_value(t1, x[i], K, p.sigma, p.r, c.type);
                const LogPriceValue bm = bs_log_value(tm, x[i], K, p.sigma, p.r, c.type);
                // int (u_xx - u_x) dtau, exact for u_BS up to the midpoint rule on r u_x.
                const double gamma_int = (2.0 / sig2) * (b1.u - b0.u - p.r * dt * bm.ux);
                const double se2 = sig_eff[i] * sig_eff[i];
                f += (0.5 * (se2 - sig2) + iw.q[i]) * gamma_int;
                f += dt * drift_factor * iw.delta[i] * bm.ux;
                double jump = 0.0;
                if (iw.translation_invariant) {
                    const double base = K * ex[i] * erm;
                    for (std::size_t k = 0; k < iw.z.size(); ++k) {
                        const double ut = bs.u(tm, x[i] + iw.z[k], base * ez[k]);
                        jump += iw.w[k] * (ut - bm.u - ezm1[k] * bm.ux);
                    }
                } else {
                    for (std::size_t k = 0; k < iw.z.size(); ++k) {
                        const double xi = iw.xi_at(i, k);
                        if (std::isinf(xi)) {
                            jump += iw.w[k] * (bs.at_minus_infinity() - bm.u + bm.ux);
                            continue;
                        }
                        const double xt = x[i] + xi;
                        const double ut = bs.u(tm, xt, K * std::exp(xt + p.r * tm));
                        jump += iw.w[k] * (ut - bm.u - std::expm1(xi) * bm.ux);
                    }
                }
                f += dt * jump;
            }
            rhs[j] = f;
        }
        double left = 0.0, right = 0.0;
        if (!o.shift) {
            for (const IntegralWeights::Outside& e : iw.outside) {
                const double xt = e.col == INT_MIN ? -std::numeric_limits<double>::infinity() : iw.x0 + e.col * dx;
                rhs[e.row - 1] += dt * e.weight * bs.asymptote(t0, xt);
            }
            left = bs.asymptote(t1, x[0]);
            right = bs.asymptote(t1, x[n - 1]);
            rhs[0] -= lower[0] * left;
            rhs[m - 1] -= upper[m - 1] * right;
        }
        solve_tridiagonal(lower, diag, upper, rhs);

        U[0] = left;
        U[n - 1] = right;
        double peak = 0.0;
        for (int j = 0; j < m; ++j) {
            U[j + 1] = rhs[j];
            peak = std::max(peak, std::abs(rhs[j]));
        }
        if (!std::isfinite(peak) || peak > 1e3 * K)
            throw InstabilityError("pide: solution blew up at step " + std::to_string(step + 1));

        auto out = surf.row(step + 1);
        if (o.shift) {
            for (int i = 0; i < n; ++i) out[i] = U[i] + bs_log_value(t1, x[i], K, p.sigma, p.r, c.type).u;
        } else {
            std::copy(U.begin(), U.end(), out.begin());
        }
    }
    return surf;
}

}  // namespace

PriceSurface solve_linear_pide(const PideProblem& problem, const PideGrid& grid, const SolverOptions& opts) {
    return solve_impl(problem, grid, opts, false);
}

PriceSurface solve_feedback_pide(const PideProblem& problem, const PideGrid& grid, const SolverOptions& opts) {
    return solve_impl(problem, grid, opts, true);
}

double price_from_surface(const PriceSurface& surface, double S0) {
    return surface.value(surface.contract().maturity, S0);
}

}  // namespace levypide
