#include "levypide/portfolio_alpha.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "levypide/errors.hpp"

namespace levypide {

void PortfolioProblem::validate() const {
    const auto k = mu.size();
    if (k < 1 || k > 63) throw ParameterDomainError("portfolio: need 1..63 assets");
    if (Sigma.rows() != k || Sigma.cols() != k) throw ParameterDomainError("portfolio: Sigma size mismatch");
    if (!mu.allFinite() || !Sigma.allFinite()) throw ParameterDomainError("portfolio: non-finite input");
    if ((Sigma - Sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Sigma.cwiseAbs().maxCoeff()))
        throw ParameterDomainError("portfolio: Sigma not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
    if (llt.info() != Eigen::Success) throw ParameterDomainError("portfolio: Sigma not positive definite");
    if (discrete) {
        if (discrete->empty()) throw ParameterDomainError("portfolio: empty discrete decision set");
        for (const auto& t : *discrete)
            if (t.size() != k) throw ParameterDomainError("portfolio: decision vector size mismatch");
    }
}

std::vector<DiscreteLine> discrete_lines(const PortfolioProblem& p) {
    if (!p.discrete) throw ParameterDomainError("discrete_lines: problem has no discrete decision set");
    std::vector<DiscreteLine> lines;
    for (const auto& t : *p.discrete) lines.push_back({0.5 * t.dot(p.Sigma * t), -p.mu.dot(t)});
    return lines;
}

double kkt_residual(const PortfolioProblem& p, double phi, const Eigen::VectorXd& theta) {
    const int n = p.n();
    const Eigen::VectorXd grad = phi * (p.Sigma * theta) - p.mu;
    // Budget multiplier from the support average of the gradient.
    double lam = 0.0;
    int cnt = 0;
    for (int i = 0; i < n; ++i) {
        if (theta[i] > 0.0) {
            lam -= grad[i];
            ++cnt;
        }
    }
    if (cnt == 0) return std::numeric_limits<double>::infinity();
    lam /= cnt;
    double r = std::abs(theta.sum() - 1.0);
    for (int i = 0; i < n; ++i) {
        r = std::max(r, std::max(0.0, -theta[i]));
        const double eta = grad[i] + lam;
        if (theta[i] > 0.0) r = std::max(r, std::abs(eta));
        else r = std::max(r, std::max(0.0, -eta));
    }
    return r;
}

namespace {

struct SupportSolve {
    Eigen::VectorXd theta;
    double lambda = 0.0;
    bool feasible = false;
};

SupportSolve solve_on_support(const PortfolioProblem& p, double phi, const std::vector<int>& idx) {
    const int k = static_cast<int>(idx.size());
    Eigen::MatrixXd S(k, k);
    Eigen::VectorXd m(k);
    for (int a = 0; a < k; ++a) {
        m[a] = p.mu[idx[a]];
        for (int b = 0; b < k; ++b) S(a, b) = p.Sigma(idx[a], idx[b]);
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    const Eigen::VectorXd sm = ldlt.solve(m);
    const Eigen::VectorXd s1 = ldlt.solve(Eigen::VectorXd::Ones(k));
    const double one_s1 = s1.sum();
    SupportSolve out;
    out.lambda = (sm.sum() - phi) / one_s1;
    const Eigen::VectorXd ts = (sm - out.lambda * s1) / phi;
    out.theta = Eigen::VectorXd::Zero(p.n());
    const double ptol = 1e-13;
    bool ok = true;
    for (int a = 0; a < k; ++a) {
        if (ts[a] < -ptol) ok = false;
        out.theta[idx[a]] = std::max(ts[a], 0.0);
    }
    if (!ok) return out;
    const Eigen::VectorXd grad = phi * (p.Sigma * out.theta) - p.mu;
    const double dtol = 1e-13 * std::max(1.0, p.mu.cwiseAbs().maxCoeff() + phi * p.Sigma.cwiseAbs().maxCoeff());
    for (int j = 0; j < p.n(); ++j) {
        if (std::find(idx.begin(), idx.end(), j) != idx.end()) continue;
        if (grad[j] + out.lambda < -dtol) return out;
    }
    out.feasible = true;
    return out;
}

/// Euclidean projection onto the unit simplex.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, tau = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        css += u[i];
        const double t = (css - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) tau = t;
    }
    return (v.array() - tau).max(0.0).matrix();
}

AlphaPoint finish(const PortfolioProblem& p, double phi, const Eigen::VectorXd& theta, double lambda) {
    AlphaPoint r;
    r.phi = phi;
    r.theta = theta;
    r.lambda = lambda;
    r.alpha = -p.mu.dot(theta) + 0.5 * phi * theta.dot(p.Sigma * theta);
    r.slope = 0.5 * theta.dot(p.Sigma * theta);
    for (int i = 0; i < p.n(); ++i)
        if (theta[i] > 0.0) r.support |= std::uint64_t{1} << i;
    r.kkt_residual = kkt_residual(p, phi, theta);
    return r;
}

AlphaPoint simplex_phi_zero(const PortfolioProblem& p) {
    int best = 0;
    for (int i = 1; i < p.n(); ++i)
        if (p.mu[i] > p.mu[best]) best = i;
    Eigen::VectorXd t = Eigen::VectorXd::Zero(p.n());
    t[best] = 1.0;
    return finish(p, 0.0, t, p.mu[best]);
}

AlphaPoint simplex_enumerate(const PortfolioProblem& p, double phi) {
    const int n = p.n();
    std::vector<int> idx;
    // Supports in order of size, then lexicographic; the strictly convex problem has a unique
    // minimiser, so the first KKT point found is it.
    for (int k = 1; k <= n; ++k) {
        std::vector<bool> pick(n, false);
        std::fill(pick.begin(), pick.begin() + k, true);
        do {
            idx.clear();
            for (int i = 0; i < n; ++i)
                if (pick[i]) idx.push_back(i);
            const SupportSolve s = solve_on_support(p, phi, idx);
            if (s.feasible) return finish(p, phi, s.theta, s.lambda);
        } while (std::prev_permutation(pick.begin(), pick.end()));
    }
    throw IterationError("alpha_value: no KKT support found", std::numeric_limits<double>::infinity());
}

AlphaPoint simplex_projected_gradient(const PortfolioProblem& p, double phi) {
    const int n = p.n();
    const double Lg = phi * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p.Sigma).eigenvalues().maxCoeff();
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n), y = x;
    double t = 1.0;
    for (int it = 0; it < 200000; ++it) {
        const Eigen::VectorXd g = phi * (p.Sigma * y) - p.mu;
        const Eigen::VectorXd xn = project_simplex(y - g / Lg);
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = xn + ((t - 1.0) / tn) * (xn - x);
        const double step = (xn - x).cwiseAbs().maxCoeff();
        x = xn;
        t = tn;
        if (step < 1e-15) break;
    }
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
        if (x[i] > 1e-10) idx.push_back(i);
    const SupportSolve s = solve_on_support(p, phi, idx);
    if (s.feasible) return finish(p, phi, s.theta, s.lambda);
    return finish(p, phi, x, 0.0);
}

}  // namespace

AlphaPoint alpha_value(const PortfolioProblem& p, double phi) {
    p.validate();
    if (!(phi >= 0.0) || !std::isfinite(phi)) throw ParameterDomainError("alpha_value: phi must be >= 0");
    if (p.discrete) {
        const auto lines = discrete_lines(p);
        std::size_t best = 0;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const double a = lines[i].E * phi + lines[i].D, b = lines[best].E * phi + lines[best].D;
            if (a < b || (a == b && lines[i].E < lines[best].E)) best = i;
        }
        AlphaPoint r;
        r.phi = phi;
        r.theta = (*p.discrete)[best];
        r.alpha = lines[best].E * phi + lines[best].D;
        r.slope = lines[best].E;
        r.support = std::uint64_t{1} << best;
        return r;
    }
    if (phi == 0.0) return simplex_phi_zero(p);
    if (p.n() <= 20) return simplex_enumerate(p, phi);
    return simplex_projected_gradient(p, phi);
}

double alpha_derivative(const PortfolioProblem& p, double phi) { return alpha_value(p, phi).slope; }

LipschitzBounds lipschitz_bounds(const PortfolioProblem& p) {
    p.validate();
    LipschitzBounds b;
    if (p.discrete) {
        const auto lines = discrete_lines(p);
        b.omega = std::numeric_limits<double>::infinity();
        for (const auto& l : lines) {
            b.omega = std::min(b.omega, l.E);
            b.L = std::max(b.L, l.E);
        }
        return b;
    }
    PortfolioProblem q = p;
    q.mu.setZero();
    b.omega = alpha_value(q, 1.0).alpha;
    b.L = 0.5 * p.Sigma.diagonal().maxCoeff();
    return b;
}

double alpha_infimum(const PortfolioProblem& p) {
    p.validate();
    if (p.discrete) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& l : discrete_lines(p)) best = std::min(best, l.D);
        return best;
    }
    return -p.mu.maxCoeff();
}

double inverse_alpha(const PortfolioProblem& p, double a, double tol) {
    const double inf = alpha_infimum(p);
    if (!(a > inf)) throw OutOfRange("inverse_alpha: value at or below the infimum of alpha");
    double lo = 0.0, hi = 1.0;
    while (alpha_value(p, hi).alpha < a) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw OutOfRange("inverse_alpha: value not attained");
    }
    while (hi - lo > tol * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (alpha_value(p, mid).alpha < a) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double TwoAssetBranches::alpha(double phi) const {
    if (phi < phi_minus) return E_lo * phi + D_lo;
    if (phi > phi_plus) return E_hi * phi + D_hi;
    return A - B / phi + C * phi;
}

double TwoAssetBranches::slope(double phi) const {
    if (phi < phi_minus) return E_lo;
    if (phi > phi_plus) return E_hi;
    return B / (phi * phi) + C;
}

TwoAssetBranches two_asset_branches(const PortfolioProblem& p) {
    p.validate();
    if (p.n() != 2 || p.discrete) throw ParameterDomainError("two_asset_branches: need n = 2 on the simplex");
    // Order so that asset `hi` has the larger mean; theta = (s, 1 - s) on (hi, other).
    const int h = p.mu[0] >= p.mu[1] ? 0 : 1, o = 1 - h;
    const double a = p.Sigma(h, h), b = p.Sigma(h, o), c = p.Sigma(o, o);
    const double q = a - 2.0 * b + c;
    const double dmu = p.mu[h] - p.mu[o];
    const double inf = std::numeric_limits<double>::infinity();
    TwoAssetBranches r;
    r.lo_asset = h;
    r.hi_asset = o;
    r.E_lo = 0.5 * a;
    r.D_lo = -p.mu[h];
    r.E_hi = 0.5 * c;
    r.D_hi = -p.mu[o];
    r.A = -p.mu[o] - dmu * (c - b) / q;
    r.B = dmu * dmu / (2.0 * q);
    r.C = (a * c - b * b) / (2.0 * q);
    // Interior weight s(phi) = (dmu / phi + c - b) / q; s = 1 at 1/phi = (a - b)/dmu, s = 0 at (b - c)/dmu.
    const double t1 = dmu > 0.0 ? (a - b) / dmu : inf;
    const double t0 = dmu > 0.0 ? (b - c) / dmu : (c - b > 0.0 ? -inf : inf);
    r.phi_minus = t1 > 0.0 ? (std::isinf(t1) ? 0.0 : 1.0 / t1) : inf;
    r.phi_plus = t0 > 0.0 ? (std::isinf(t0) ? 0.0 : 1.0 / t0) : inf;
    if (dmu == 0.0) {
        // Equal means: the interior branch holds for every phi if (c - b)/q lies in (0, 1).
        const double s = (c - b) / q;
        if (s <= 0.0) r.phi_minus = r.phi_plus = 0.0;
        else if (s >= 1.0) r.phi_minus = r.phi_plus = inf;
        else r.phi_minus = 0.0, r.phi_plus = inf;
    }
    return r;
}

std::vector<AlphaPoint> alpha_curve(const PortfolioProblem& p, const std::vector<double>& phis) {
    std::vector<AlphaPoint> out;
    out.reserve(phis.size());
    for (double phi : phis) out.push_back(alpha_value(p, phi));
    return out;
}

}  // namespace levypide
