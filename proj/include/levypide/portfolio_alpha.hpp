#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

namespace levypide {

/// min over the decision set of -mu^T theta + (phi/2) theta^T Sigma theta.
/// The decision set is the unit simplex, or a finite list of portfolios when `discrete` is set.
struct PortfolioProblem {
    Eigen::VectorXd mu;
    Eigen::MatrixXd Sigma;
    std::optional<std::vector<Eigen::VectorXd>> discrete;

    int n() const { return static_cast<int>(mu.size()); }
    /// Throws ParameterDomainError unless Sigma is symmetric positive definite and sizes agree.
    void validate() const;
};

struct AlphaPoint {
    double phi = 0.0;
    double alpha = 0.0;
    double slope = 0.0;  ///< dalpha/dphi = theta^T Sigma theta / 2
    Eigen::VectorXd theta;
    std::uint64_t support = 0;  ///< bit i set when theta_i > 0 (simplex); chosen index bit (discrete)
    double lambda = 0.0;        ///< budget multiplier (simplex)
    double kkt_residual = 0.0;
};

/// Exact minimiser. Simplex: support enumeration for n <= 20, projected gradient with a KKT
/// polish beyond. Requires phi >= 0.
AlphaPoint alpha_value(const PortfolioProblem& p, double phi);

/// Envelope derivative at phi (the smaller slope at a discrete-set kink).
double alpha_derivative(const PortfolioProblem& p, double phi);

/// KKT residual of an arbitrary theta at phi (stationarity on the support, feasibility, duals).
double kkt_residual(const PortfolioProblem& p, double phi, const Eigen::VectorXd& theta);

/// omega = min over the decision set of theta^T Sigma theta / 2, L = max over vertices.
struct LipschitzBounds {
    double omega = 0.0;
    double L = 0.0;
};
LipschitzBounds lipschitz_bounds(const PortfolioProblem& p);

/// Infimum of alpha over phi > 0, i.e. -max_i mu_i on the simplex.
double alpha_infimum(const PortfolioProblem& p);

/// phi with alpha(phi) = a, by bisection. Throws OutOfRange when a <= alpha_infimum.
double inverse_alpha(const PortfolioProblem& p, double a, double tol = 1e-12);

/// Three-branch closed form for n = 2 on the simplex:
///   E_lo phi + D_lo        for phi <  phi_minus   (single asset `lo_asset`)
///   A - B / phi + C phi    between the breakpoints
///   E_hi phi + D_hi        for phi >  phi_plus    (single asset `hi_asset`)
/// Breakpoints may be 0 or +inf when a branch is absent.
struct TwoAssetBranches {
    double phi_minus = 0.0, phi_plus = 0.0;
    double E_lo = 0.0, D_lo = 0.0;
    double A = 0.0, B = 0.0, C = 0.0;
    double E_hi = 0.0, D_hi = 0.0;
    int lo_asset = 0, hi_asset = 1;

    double alpha(double phi) const;
    double slope(double phi) const;
};
TwoAssetBranches two_asset_branches(const PortfolioProblem& p);

/// alpha(phi) for the discrete decision set: min_i (E_i phi + D_i).
struct DiscreteLine {
    double E = 0.0, D = 0.0;
};
std::vector<DiscreteLine> discrete_lines(const PortfolioProblem& p);

std::vector<AlphaPoint> alpha_curve(const PortfolioProblem& p, const std::vector<double>& phis);

}  // namespace levypide
