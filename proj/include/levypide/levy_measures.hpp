#pragma once

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace levypide {

enum class Family { Merton, Kou, VarianceGamma, NIG };

std::string to_string(Family f);

/// Gaussian jumps with intensity lambda, mean m and standard deviation delta.
struct MertonParams {
    double lambda = 0.0;
    double m = 0.0;
    double delta = 1.0;
};

/// Double-exponential jumps: probability p of an upward jump with rate lambda_plus.
struct KouParams {
    double lambda = 0.0;
    double p = 0.5;
    double lambda_plus = 1.0;
    double lambda_minus = 1.0;
};

/// Variance Gamma measure parametrised by (theta, sigma, kappa).
struct VarianceGammaParams {
    double theta = 0.0;
    double sigma = 0.2;
    double kappa = 0.1;
};

/// Normal inverse Gaussian measure parametrised by (theta, sigma, kappa).
struct NigParams {
    double theta = 0.0;
    double sigma = 0.2;
    double kappa = 0.1;
};

/// Tagged Levy measure with a density h(z) so that nu(dz) = h(z) dz.
/// Construction validates parameters and throws ParameterDomainError.
class LevyMeasureSpec {
public:
    using Params = std::variant<MertonParams, KouParams, VarianceGammaParams, NigParams>;

    LevyMeasureSpec();  // the zero measure (Merton with lambda = 0)
    static LevyMeasureSpec none();
    static LevyMeasureSpec merton(double lambda, double m, double delta);
    static LevyMeasureSpec kou(double lambda, double p, double lambda_plus, double lambda_minus);
    static LevyMeasureSpec variance_gamma(double theta, double sigma, double kappa);
    static LevyMeasureSpec nig(double theta, double sigma, double kappa);

    Family family() const;
    const Params& params() const { return params_; }
    bool is_zero() const;
    bool finite_activity() const;

    double density(double z) const;
    /// log h(z); -inf for the zero measure.
    double log_density(double z) const;

    /// Exponents of the tempered families: h ~ exp(A z - B |z|) up to the power prefactor.
    /// Throws FamilyMismatch for Merton and Kou.
    double tilt_A() const;
    double tilt_B() const;

    std::string describe() const;

private:
    explicit LevyMeasureSpec(Params p) : params_(p) {}
    Params params_;
    double a_ = 0.0, b_ = 0.0, c_ = 0.0;  // cached constants for VG / NIG
};

/// Growth envelope h(z) <= C0 |z|^-alpha exp(-D |z| - mu z^2).
struct AdmissibilityShape {
    double alpha = 0.0;
    double D = 0.0;
    double mu = 0.0;
    double C0 = 0.0;
};

AdmissibilityShape admissibility_shape(const LevyMeasureSpec& spec);

struct AdmissibilityReport {
    bool admissible = false;
    double tightest_C0 = 0.0;
};

/// Checks the envelope at every sample point (z = 0 samples are skipped).
AdmissibilityReport check_admissible(const LevyMeasureSpec& spec, const AdmissibilityShape& shape,
                                     std::span<const double> samples);

struct QuadratureOptions {
    double truncation = 8.0;   ///< integrate over |z| <= truncation
    double inner_cut = 1e-4;   ///< Taylor surrogate inside |z| < inner_cut
    double rel_tol = 1e-9;
    double abs_tol = 1e-15;
    int max_levels = 20;
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
};

/// Adaptive Gauss-Legendre evaluation of int g(z) nu(dz). Inside the inner cut the
/// integrand is replaced by g'(0) z + g''(0) z^2 / 2 with derivatives from differences.
/// Throws QuadratureFailure (carrying the last estimate) when the refinement budget runs out.
QuadratureResult compensated_integral(const LevyMeasureSpec& spec, const std::function<double(double)>& g,
                                      const QuadratureOptions& opts = {});

/// First and second moments of nu over |z| < cut.
struct InnerMoments {
    double m1 = 0.0;
    double m2 = 0.0;
};
InnerMoments inner_moments(const LevyMeasureSpec& spec, double cut);

/// Drift b making exp(X_t) a martingale for the triplet (sigma^2, nu, b) with truncation |z| <= 1.
double martingale_drift(const LevyMeasureSpec& spec, double sigma, const QuadratureOptions& opts = {});

/// Fixed composite rule for repeated integrals against nu: Gauss panels of a given width on
/// cut <= |z| <= truncation, panels with negligible mass trimmed from the tails.
/// Nodes are sorted in increasing order.
struct PanelRule {
    std::vector<double> nodes;
    std::vector<double> weights;  ///< Gauss weight times density
    double cut = 0.0;
    InnerMoments inner;
};

PanelRule make_panel_rule(const LevyMeasureSpec& spec, double panel_width, double cut, double truncation,
                          int points_per_panel = 3, double negligible = 1e-14);

/// As make_panel_rule, but with geometrically graded panels from cut up to graded_to.
PanelRule make_graded_rule(const LevyMeasureSpec& spec, double cut, double graded_to, double panel_width,
                           double truncation, int points_per_panel = 4, double negligible = 1e-16);

}  // namespace levypide
