#include "levypide/feedback_shift.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "levypide/errors.hpp"
#include "levypide/numerics.hpp"

namespace levypide {

double Strategy::psi_x(double tau, double x) const {
    constexpr double h = 1e-5;
    return (psi(tau, x + h) - psi(tau, x - h)) / (2.0 * h);
}

double Strategy::phi(double tau, double S) const {
    if (!(S > 0.0)) throw ParameterDomainError("strategy: S must be > 0");
    return psi(tau, std::log(S / ref_));
}

double Strategy::phi_S(double tau, double S) const {
    if (!(S > 0.0)) throw ParameterDomainError("strategy: S must be > 0");
    return psi_x(tau, std::log(S / ref_)) / S;
}

namespace {

std::string fmt(const char* name, double a, double s) {
    std::ostringstream os;
    os.precision(12);
    os << name << "(a=" << a << ", s=" << s << ")";
    return os.str();
}

class ConstantStrategy final : public Strategy {
public:
    ConstantStrategy(double c, double ref) : Strategy(ref), c_(c) {}
    double psi(double, double) const override { return c_; }
    double psi_x(double, double) const override { return 0.0; }
    double lipschitz() const override { return 0.0; }
    std::string describe() const override { return fmt("constant", c_, 0.0); }

private:
    double c_;
};

class LinearStrategy final : public Strategy {
public:
    LinearStrategy(double c, double ref) : Strategy(ref), c_(c) {}
    double psi(double, double x) const override { return c_ * x; }
    double psi_x(double, double) const override { return c_; }
    double lipschitz() const override { return std::abs(c_); }
    std::string describe() const override { return fmt("linear", c_, 0.0); }

private:
    double c_;
};

class NormalCdfStrategy final : public Strategy {
public:
    NormalCdfStrategy(double a, double s, double shift, double ref) : Strategy(ref), a_(a), s_(s), shift_(shift) {}
    double psi(double, double x) const override { return a_ * (normal_cdf(x / s_) + shift_); }
    double psi_x(double, double x) const override { return a_ * normal_pdf(x / s_) / s_; }
    double lipschitz() const override { return std::abs(a_) / (s_ * std::sqrt(2.0 * std::numbers::pi)); }
    std::string describe() const override { return fmt(shift_ == 0.0 ? "normal_cdf" : "put_delta", a_, s_); }

private:
    double a_, s_, shift_;
};

class TanhStrategy final : public Strategy {
public:
    TanhStrategy(double a, double s, double ref) : Strategy(ref), a_(a), s_(s) {}
    double psi(double, double x) const override { return a_ * std::tanh(x / s_); }
    double psi_x(double, double x) const override {
        const double c = std::cosh(x / s_);
        return a_ / (s_ * c * c);
    }
    double lipschitz() const override { return std::abs(a_) / s_; }
    std::string describe() const override { return fmt("tanh", a_, s_); }

private:
    double a_, s_;
};

class GridStrategy final : public Strategy {
public:
    GridStrategy(std::vector<double> v, double x0, double dx, double ref)
        : Strategy(ref), v_(std::move(v)), x0_(x0), dx_(dx) {
        if (v_.size() < 4 || !(dx_ > 0.0)) throw ParameterDomainError("grid_strategy: need >= 4 nodes, dx > 0");
        for (std::size_t i = 0; i + 1 < v_.size(); ++i) {
            for (double t : {0.0, 0.25, 0.5, 0.75}) {
                lip_ = std::max(lip_, std::abs(psi_x(0.0, x0_ + (i + t) * dx_)));
            }
        }
    }
    double psi(double, double x) const override {
        const double xc = std::clamp(x, x0_, x_end());
        return cubic_interpolate(v_, x0_, dx_, xc);
    }
    double psi_x(double, double x) const override {
        if (x < x0_ || x > x_end()) return 0.0;
        return cubic_interpolate_derivative(v_, x0_, dx_, x);
    }
    double lipschitz() const override { return lip_; }
    std::string describe() const override { return "grid(" + std::to_string(v_.size()) + " nodes)"; }

private:
    double x_end() const { return x0_ + dx_ * static_cast<double>(v_.size() - 1); }
    std::vector<double> v_;
    double x0_, dx_;
    double lip_ = 0.0;
};

void require_positive_scale(double s) {
    if (!(s > 0.0)) throw ParameterDomainError("strategy: scale s must be > 0");
}

}  // namespace

StrategyPtr constant_strategy(double c, double ref) { return std::make_shared<ConstantStrategy>(c, ref); }
StrategyPtr linear_strategy(double c, double ref) { return std::make_shared<LinearStrategy>(c, ref); }
StrategyPtr normal_cdf_strategy(double a, double s, double ref) {
    require_positive_scale(s);
    return std::make_shared<NormalCdfStrategy>(a, s, 0.0, ref);
}
StrategyPtr tanh_strategy(double a, double s, double ref) {
    require_positive_scale(s);
    return std::make_shared<TanhStrategy>(a, s, ref);
}
StrategyPtr put_delta_strategy(double a, double s, double ref) {
    require_positive_scale(s);
    return std::make_shared<NormalCdfStrategy>(a, s, -1.0, ref);
}
StrategyPtr grid_strategy(std::vector<double> values, double x0, double dx, double ref) {
    return std::make_shared<GridStrategy>(std::move(values), x0, dx, ref);
}

void require_feedback_assumption(double rho, const Strategy& strategy) {
    if (!(rho >= 0.0)) throw ParameterDomainError("rho must be >= 0");
    if (rho * strategy.lipschitz() >= 1.0) throw AssumptionViolation("feedback: rho * L must be < 1");
}

ShiftSolution solve_shift_H(double S, double z, double rho, double tau, const Strategy& strategy,
                            const ShiftOptions& opts) {
    if (!(S > 0.0)) throw ParameterDomainError("solve_shift_H: S must be > 0");
    require_feedback_assumption(rho, strategy);
    ShiftSolution sol;
    const double base = S * std::expm1(z);
    const double phi0 = strategy.phi(tau, S);
    double H = base;
    for (int it = 1; it <= opts.max_iter; ++it) {
        if (!(S + H > 0.0)) throw AssumptionViolation("solve_shift_H: jump sends the price to a nonpositive level");
        const double next = base + rho * S * (strategy.phi(tau, S + H) - phi0);
        const double step = std::abs(next - H);
        if (opts.record_trace) sol.trace.push_back(step);
        H = next;
        sol.iterations = it;
        sol.residual = step;
        if (step <= opts.tol * std::max(1.0, S)) {
            if (!(S + H > 0.0)) throw AssumptionViolation("solve_shift_H: jump sends the price to a nonpositive level");
            sol.value = H;
            return sol;
        }
    }
    throw IterationError("solve_shift_H: no convergence", sol.residual);
}

namespace {

enum class XiStatus { Ok, Absorbed, Stalled };

XiStatus iterate_xi(double x, double z, double rho, double tau, const Strategy& s, const ShiftOptions& opts,
                    ShiftSolution& sol) {
    const double ez = std::exp(z);
    const double psi0 = s.psi(tau, x);
    double xi = z;
    for (int it = 1; it <= opts.max_iter; ++it) {
        const double arg = ez + rho * (s.psi(tau, x + xi) - psi0);
        if (!(arg > 0.0)) return XiStatus::Absorbed;
        const double next = std::log(arg);
        const double step = std::abs(next - xi);
        if (opts.record_trace) sol.trace.push_back(step);
        xi = next;
        sol.iterations = it;
        sol.residual = step;
        if (step <= opts.tol) {
            sol.value = xi;
            return XiStatus::Ok;
        }
    }
    return XiStatus::Stalled;
}

}  // namespace

ShiftSolution solve_shift_xi(double x, double z, double rho, double tau, const Strategy& strategy,
                             const ShiftOptions& opts) {
    require_feedback_assumption(rho, strategy);
    ShiftSolution sol;
    switch (iterate_xi(x, z, rho, tau, strategy, opts, sol)) {
        case XiStatus::Ok: return sol;
        case XiStatus::Absorbed:
            throw AssumptionViolation("solve_shift_xi: jump sends the price to a nonpositive level");
        case XiStatus::Stalled: break;
    }
    throw IterationError("solve_shift_xi: no convergence", sol.residual);
}

bool try_shift_xi(double x, double z, double rho, double tau, const Strategy& strategy, XiMode mode, double& xi) {
    if (rho == 0.0) {
        xi = z;
        return true;
    }
    switch (mode) {
        case XiMode::FirstOrder: xi = shift_xi_first_order(x, z, rho, tau, strategy, true); return true;
        case XiMode::NoEzFactor: xi = shift_xi_first_order(x, z, rho, tau, strategy, false); return true;
        case XiMode::Exact: break;
    }
    ShiftSolution sol;
    switch (iterate_xi(x, z, rho, tau, strategy, ShiftOptions{}, sol)) {
        case XiStatus::Ok: xi = sol.value; return true;
        case XiStatus::Absorbed: return false;
        case XiStatus::Stalled: break;
    }
    throw IterationError("try_shift_xi: no convergence", sol.residual);
}

double shift_H_first_order(double S, double z, double rho, double tau, const Strategy& strategy) {
    if (!(S > 0.0)) throw ParameterDomainError("shift_H_first_order: S must be > 0");
    return S * std::expm1(z) + rho * S * (strategy.phi(tau, S * std::exp(z)) - strategy.phi(tau, S));
}

double shift_xi_first_order(double x, double z, double rho, double tau, const Strategy& strategy,
                            bool with_ez_factor) {
    const double d = strategy.psi(tau, x + z) - strategy.psi(tau, x);
    return z + rho * (with_ez_factor ? std::exp(-z) : 1.0) * d;
}

double feedback_volatility(double sigma, double rho, double tau, double x, const Strategy& strategy) {
    const double denom = 1.0 - rho * strategy.psi_x(tau, x);
    if (!(denom > 0.0)) throw AssumptionViolation("feedback_volatility: 1 - rho S dphi/dS must be > 0");
    return sigma / denom;
}

double shift_delta(const LevyMeasureSpec& spec, double rho, double tau, double x, const Strategy& strategy,
                   XiMode mode, const QuadratureOptions& opts) {
    require_feedback_assumption(rho, strategy);
    const auto g = [&](double z) {
        double xi = 0.0;
        if (!try_shift_xi(x, z, rho, tau, strategy, mode, xi))
            throw AssumptionViolation("shift_delta: jump sends the price to a nonpositive level");
        return std::expm1(xi) - xi;
    };
    return compensated_integral(spec, g, opts).value;
}

}  // namespace levypide
