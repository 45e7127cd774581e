#include "levypide/hjb_riccati.hpp"

#include <algorithm>
#include <cmath>

#include "levypide/errors.hpp"
#include "levypide/numerics.hpp"

namespace levypide {

UtilitySpec UtilitySpec::dara(double a0, double a1, double x_star, double gamma_trunc) {
    UtilitySpec u;
    u.kind = Kind::Dara;
    u.a0 = a0;
    u.a1 = a1;
    u.x_star = x_star;
    u.gamma_trunc = gamma_trunc;
    u.validate();
    return u;
}

UtilitySpec UtilitySpec::arctan() {
    UtilitySpec u;
    u.kind = Kind::Arctan;
    return u;
}

UtilitySpec UtilitySpec::constant_profile(double c) {
    UtilitySpec u;
    u.kind = Kind::Constant;
    u.constant = c;
    u.validate();
    return u;
}

UtilitySpec UtilitySpec::sampled(std::vector<double> values) {
    UtilitySpec u;
    u.kind = Kind::Sampled;
    u.samples = std::move(values);
    u.validate();
    return u;
}

void UtilitySpec::validate() const {
    switch (kind) {
        case Kind::Dara:
            if (!(a0 > 0.0) || !(a1 > 0.0)) throw ParameterDomainError("DARA utility: a0, a1 must be > 0");
            if (!std::isfinite(x_star)) throw ParameterDomainError("DARA utility: x_star must be finite");
            if (!(gamma_trunc > 0.0)) throw ParameterDomainError("DARA utility: truncation must be > 0");
            break;
        case Kind::Constant:
            if (!std::isfinite(constant)) throw ParameterDomainError("constant utility profile must be finite");
            break;
        case Kind::Sampled:
            if (samples.empty()) throw ParameterDomainError("sampled utility profile is empty");
            for (double v : samples)
                if (!std::isfinite(v)) throw ParameterDomainError("sampled utility profile must be finite");
            break;
        case Kind::Arctan:
            break;
    }
}

void HjbGrid::validate() const {
    if (!(X > 0.0)) throw ParameterDomainError("hjb grid: X must be > 0");
    if (Nx < 16) throw ParameterDomainError("hjb grid: Nx must be >= 16");
    if (!(T > 0.0)) throw ParameterDomainError("hjb grid: T must be > 0");
    if (Nt < 2) throw ParameterDomainError("hjb grid: Nt must be >= 2");
}

double DriftSpec::inflow(double x) const {
    return std::exp(x) < y_minus ? 0.0 : C * std::exp(-x);
}

double DriftSpec::inflow_slope(double x) const {
    return std::exp(x) < y_minus ? 0.0 : std::abs(C) * std::exp(-x);
}

void DriftSpec::validate() const {
    if (!std::isfinite(C)) throw ParameterDomainError("drift: C must be finite");
    if (!(y_minus > 0.0)) throw ParameterDomainError("drift: y_minus must be > 0");
}

DiffusionFunction::DiffusionFunction(PortfolioProblem problem, DriftSpec drift)
    : p_(std::move(problem)), d_(drift) {
    p_.validate();
    d_.validate();
    if (p_.discrete) lines_ = discrete_lines(p_);
    else if (p_.n() == 2) {
        two_asset_ = true;
        br_ = two_asset_branches(p_);
    }
}

void DiffusionFunction::eval_static(double s, double& a, double& da) const {
    if (!(s >= 0.0)) throw InstabilityError("hjb: phi left the admissible range phi >= -1");
    if (!lines_.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < lines_.size(); ++i) {
            const double v = lines_[i].E * s + lines_[i].D, b = lines_[best].E * s + lines_[best].D;
            if (v < b || (v == b && lines_[i].E < lines_[best].E)) best = i;
        }
        a = lines_[best].E * s + lines_[best].D;
        da = lines_[best].E;
    } else if (two_asset_ && s > 0.0) {
        a = br_.alpha(s);
        da = br_.slope(s);
    } else {
        const AlphaPoint pt = alpha_value(p_, s);
        a = pt.alpha;
        da = pt.slope;
    }
}

void DiffusionFunction::eval(double x, double phi, double& a, double& da) const {
    eval_static(phi + 1.0, a, da);
    a -= d_.inflow(x);
}

double DiffusionFunction::value(double x, double phi) const {
    double a, da;
    eval(x, phi, a, da);
    return a;
}

double DiffusionFunction::slope(double phi) const {
    double a, da;
    eval_static(phi + 1.0, a, da);
    return da;
}

double phi0_value(const UtilitySpec& u, double x) {
    switch (u.kind) {
        case UtilitySpec::Kind::Dara:
            if (x <= -u.gamma_trunc || x >= u.gamma_trunc) return 0.0;
            return x <= u.x_star ? u.a0 : u.a1;
        case UtilitySpec::Kind::Arctan:
            return 2.0 * x / (1.0 + x * x);
        case UtilitySpec::Kind::Constant:
            return u.constant;
        case UtilitySpec::Kind::Sampled:
            throw ParameterDomainError("phi0_value: sampled profiles have no pointwise formula");
    }
    return 0.0;
}

std::vector<double> phi0_from_utility(const UtilitySpec& u, const HjbGrid& grid) {
    u.validate();
    grid.validate();
    if (u.kind == UtilitySpec::Kind::Sampled) {
        if (static_cast<int>(u.samples.size()) != grid.Nx)
            throw ParameterDomainError("sampled utility profile size differs from Nx");
        return u.samples;
    }
    std::vector<double> phi(grid.Nx);
    for (int i = 0; i < grid.Nx; ++i) phi[i] = phi0_value(u, grid.x(i));
    return phi;
}

double AprioriBounds::lower(double tau) const { return psi_lower * std::exp(lambda * tau); }
double AprioriBounds::upper(double tau) const { return psi_upper * std::exp(lambda * tau); }

AprioriBounds apriori_bounds(const DiffusionFunction& alpha, const std::vector<double>& phi0, const HjbGrid& grid) {
    grid.validate();
    if (static_cast<int>(phi0.size()) != grid.Nx) throw ParameterDomainError("apriori_bounds: phi0 size differs from Nx");
    AprioriBounds b;
    for (int i = 0; i < grid.Nx; ++i) {
        const double a = alpha.value(grid.x(i), phi0[i]);
        b.psi_lower = std::min(b.psi_lower, a);
        b.psi_upper = std::max(b.psi_upper, a);
        b.lambda = std::max(b.lambda, alpha.drift().inflow_slope(grid.x(i)));
    }
    return b;
}

double HjbSolution::max_ledger_error() const {
    double e = 0.0;
    for (std::size_t n = 0; n < mass.size(); ++n) e = std::max(e, std::abs(mass[n] - ledger[n]));
    return e;
}

namespace {

double total_mass(const std::vector<double>& phi, double h) {
    double s = 0.0;
    for (double v : phi) s += v;
    return s * h;
}

}  // namespace

HjbSolution solve_riccati_pde(const DiffusionFunction& alpha, const std::vector<double>& phi0, const HjbGrid& grid,
                              const HjbOptions& opts) {
    grid.validate();
    const int N = grid.Nx;
    if (static_cast<int>(phi0.size()) != N) throw ParameterDomainError("solve_riccati_pde: phi0 size differs from Nx");
    const double h = grid.h(), dt = grid.dt();
    const double D = dt / (h * h);
    const double c = opts.flip_source ? -1.0 : 1.0;  // flux of the transport term is c alpha phi

    HjbSolution sol;
    sol.grid = grid;
    sol.bounds = apriori_bounds(alpha, phi0, grid);
    sol.phi.reserve(grid.Nt + 1);
    sol.phi.push_back(phi0);
    sol.mass.push_back(total_mass(phi0, h));
    sol.ledger.push_back(sol.mass[0]);

    std::vector<double> x(N), a(N), da(N), r(N), q(N + 1), res(N), lo(N), di(N), up(N);
    for (int i = 0; i < N; ++i) x[i] = grid.x(i);
    // Zero-gradient ghost cells: alpha(ghost) - alpha(boundary) only sees the inflow, independent of phi.
    const DriftSpec& drift = alpha.drift();
    const double gl = drift.inflow(x[0]) - drift.inflow(grid.x(-1));
    const double gr = drift.inflow(x[N - 1]) - drift.inflow(grid.x(N));
    std::vector<double> phi = phi0, it = phi0;

    for (int n = 1; n <= grid.Nt; ++n) {
        for (int i = 0; i < N; ++i) alpha.eval(x[i], phi[i], a[i], da[i]);
        // Explicit upwind transport of alpha phi, ghost cells carry the boundary phi.
        const double aL = a[0] + gl, aR = a[N - 1] + gr;
        q[0] = c * (aL + a[0]) >= 0.0 ? c * aL * phi[0] : c * a[0] * phi[0];
        q[N] = c * (a[N - 1] + aR) >= 0.0 ? c * a[N - 1] * phi[N - 1] : c * aR * phi[N - 1];
        for (int f = 1; f < N; ++f) {
            const double v = c * 0.5 * (a[f - 1] + a[f]);
            q[f] = v >= 0.0 ? c * a[f - 1] * phi[f - 1] : c * a[f] * phi[f];
        }
        for (int i = 0; i < N; ++i) r[i] = phi[i] - dt / h * (q[i + 1] - q[i]);

        // Newton on the lagged linearisation alpha(phi) ~ alpha(phi_k) + alpha'(phi_k)(phi - phi_k).
        it = phi;
        int k = 0;
        for (;; ++k) {
            if (k > 0)
                for (int i = 0; i < N; ++i) alpha.eval(x[i], it[i], a[i], da[i]);
            for (int i = 0; i < N; ++i) {
                double flux = 0.0;
                int nb = 0;
                if (i > 0) flux += a[i - 1] - a[i], ++nb;
                else flux += gl;
                if (i + 1 < N) flux += a[i + 1] - a[i], ++nb;
                else flux += gr;
                res[i] = r[i] - it[i] + D * flux;
                di[i] = 1.0 + D * nb * da[i];
                lo[i] = i > 0 ? -D * da[i - 1] : 0.0;
                up[i] = i + 1 < N ? -D * da[i + 1] : 0.0;
            }
            solve_tridiagonal(lo, di, up, res);
            double step = 0.0;
            for (int i = 0; i < N; ++i) {
                it[i] += res[i];
                step = std::max(step, std::abs(res[i]));
            }
            if (!std::isfinite(step)) throw InstabilityError("hjb: non-finite Newton update");
            if (step < opts.picard_tol) break;
            if (k + 1 >= opts.max_picard) throw IterationError("hjb: Picard iteration did not converge", step);
        }
        sol.max_picard_iterations = std::max(sol.max_picard_iterations, k + 1);
        phi = it;

        const double tau = n * dt;
        double excess = 0.0;
        for (int i = 0; i < N; ++i) {
            const double v = alpha.value(x[i], phi[i]);
            excess = std::max({excess, sol.bounds.lower(tau) - v, v - sol.bounds.upper(tau)});
        }
        sol.max_envelope_violation = std::max(sol.max_envelope_violation, excess);
        if (excess > opts.envelope_tol) ++sol.envelope_flags;

        sol.phi.push_back(phi);
        sol.mass.push_back(total_mass(phi, h));
        sol.ledger.push_back(sol.ledger.back() + dt * ((gl + gr) / h - (q[N] - q[0])));
    }
    return sol;
}

WeightsSurface optimal_weights_surface(const PortfolioProblem& p, const HjbSolution& sol, int stride) {
    if (stride < 1) throw ParameterDomainError("optimal_weights_surface: stride must be >= 1");
    WeightsSurface w;
    const int N = sol.grid.Nx;
    for (std::size_t n = 0; n < sol.phi.size(); n += stride) {
        std::vector<Eigen::VectorXd> row(N);
        std::vector<std::uint64_t> sup(N);
        for (int i = 0; i < N; ++i) {
            const double s = sol.phi[n][i] + 1.0;
            if (!(s >= 0.0)) throw InstabilityError("optimal_weights_surface: phi below -1");
            const AlphaPoint pt = alpha_value(p, s);
            row[i] = pt.theta;
            sup[i] = pt.support;
            if (i > 0 && sup[i] != sup[i - 1])
                w.contours.push_back({static_cast<int>(n), sol.grid.x(i) - 0.5 * sol.grid.h(), sup[i - 1], sup[i]});
        }
        w.theta.push_back(std::move(row));
        w.support.push_back(std::move(sup));
    }
    return w;
}

std::vector<double> value_shape(const HjbSolution& sol, int step) {
    if (step < 0 || step >= static_cast<int>(sol.phi.size())) throw OutOfRange("value_shape: step out of range");
    const auto& phi = sol.phi[step];
    const double h = sol.grid.h();
    const std::size_t N = phi.size();
    std::vector<double> vx(N), v(N);
    vx[0] = 1.0;
    double logvx = 0.0;
    for (std::size_t i = 1; i < N; ++i) {
        logvx -= 0.5 * h * (phi[i - 1] + phi[i]);
        vx[i] = std::exp(logvx);
    }
    v[0] = 0.0;
    for (std::size_t i = 1; i < N; ++i) v[i] = v[i - 1] + 0.5 * h * (vx[i - 1] + vx[i]);
    return v;
}

}  // namespace levypide
