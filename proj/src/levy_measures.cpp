#include "levypide/levy_measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "levypide/errors.hpp"
#include "levypide/numerics.hpp"

namespace levypide {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
    if (!ok) throw ParameterDomainError(what);
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// sup_{x > 0} x K1(x) e^{beta x} for 0 <= beta < 1, with a small upward margin.
double bessel_tilt_sup(double beta) {
    const auto f = [beta](double x) { return x * bessel_k1(x) * std::exp(beta * x); };
    const double hi = 50.0 / (1.0 - beta);
    const int n = 2000;
    double best = 1.0, xbest = 0.0;
    const double lo = 1e-8, r = std::pow(hi / lo, 1.0 / n);
    for (int i = 0; i <= n; ++i) {
        const double x = lo * std::pow(r, i);
        if (const double v = f(x); v > best) best = v, xbest = x;
    }
    if (xbest > 0.0) {
        double a = xbest / r, b = xbest * r;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 100 && b - a > 1e-14 * b; ++it) {
            const double c = b - g * (b - a), d = a + g * (b - a);
            if (f(c) > f(d)) b = d; else a = c;
        }
        best = std::max(best, f(0.5 * (a + b)));
    }
    return best * (1.0 + 1e-9);
}

}  // namespace

std::string to_string(Family f) {
    switch (f) {
        case Family::Merton: return "merton";
        case Family::Kou: return "kou";
        case Family::VarianceGamma: return "vg";
        case Family::NIG: return "nig";
    }
    return "unknown";
}

LevyMeasureSpec::LevyMeasureSpec() : params_(MertonParams{0.0, 0.0, 1.0}) {}

LevyMeasureSpec LevyMeasureSpec::none() { return LevyMeasureSpec(); }

LevyMeasureSpec LevyMeasureSpec::merton(double lambda, double m, double delta) {
    require(std::isfinite(lambda) && lambda >= 0.0, "merton: lambda must be >= 0");
    require(std::isfinite(m), "merton: m must be finite");
    require(std::isfinite(delta) && delta > 0.0, "merton: delta must be > 0");
    return LevyMeasureSpec(MertonParams{lambda, m, delta});
}

LevyMeasureSpec LevyMeasureSpec::kou(double lambda, double p, double lambda_plus, double lambda_minus) {
    require(std::isfinite(lambda) && lambda >= 0.0, "kou: lambda must be >= 0");
    require(p >= 0.0 && p <= 1.0, "kou: p must lie in [0, 1]");
    require(std::isfinite(lambda_plus) && lambda_plus > 1.0, "kou: lambda_plus must be > 1");
    require(std::isfinite(lambda_minus) && lambda_minus > 0.0, "kou: lambda_minus must be > 0");
    return LevyMeasureSpec(KouParams{lambda, p, lambda_plus, lambda_minus});
}

LevyMeasureSpec LevyMeasureSpec::variance_gamma(double theta, double sigma, double kappa) {
    require(std::isfinite(theta), "vg: theta must be finite");
    require(std::isfinite(sigma) && sigma > 0.0, "vg: sigma must be > 0");
    require(std::isfinite(kappa) && kappa > 0.0, "vg: kappa must be > 0");
    require(1.0 - theta * kappa - 0.5 * sigma * sigma * kappa > 0.0, "vg: exp moment does not exist");
    LevyMeasureSpec s(VarianceGammaParams{theta, sigma, kappa});
    const double s2 = sigma * sigma;
    s.a_ = theta / s2;
    s.b_ = std::sqrt(theta * theta + 2.0 * s2 / kappa) / s2;
    return s;
}

LevyMeasureSpec LevyMeasureSpec::nig(double theta, double sigma, double kappa) {
    require(std::isfinite(theta), "nig: theta must be finite");
    require(std::isfinite(sigma) && sigma > 0.0, "nig: sigma must be > 0");
    require(std::isfinite(kappa) && kappa > 0.0, "nig: kappa must be > 0");
    require(1.0 - sigma * sigma * kappa - 2.0 * theta * kappa > 0.0, "nig: exp moment does not exist");
    LevyMeasureSpec s(NigParams{theta, sigma, kappa});
    const double s2 = sigma * sigma;
    const double root = std::sqrt(theta * theta + s2 / kappa);
    s.a_ = theta / s2;
    s.b_ = root / s2;
    // Normalised so that the small-jump behaviour is C / (B z^2) = sigma / (pi sqrt(kappa) z^2),
    // which is what the NIG characteristic exponent requires.
    s.c_ = root / (std::numbers::pi * sigma * std::sqrt(kappa));
    return s;
}

Family LevyMeasureSpec::family() const {
    return std::visit(overloaded{[](const MertonParams&) { return Family::Merton; },
                                 [](const KouParams&) { return Family::Kou; },
                                 [](const VarianceGammaParams&) { return Family::VarianceGamma; },
                                 [](const NigParams&) { return Family::NIG; }},
                      params_);
}

bool LevyMeasureSpec::is_zero() const {
    if (auto* m = std::get_if<MertonParams>(&params_)) return m->lambda == 0.0;
    if (auto* k = std::get_if<KouParams>(&params_)) return k->lambda == 0.0;
    return false;
}

bool LevyMeasureSpec::finite_activity() const {
    const Family f = family();
    return f == Family::Merton || f == Family::Kou;
}

double LevyMeasureSpec::log_density(double z) const {
    return std::visit(
        overloaded{
            [&](const MertonParams& p) {
                if (p.lambda == 0.0) return kNegInf;
                const double d = (z - p.m) / p.delta;
                return std::log(p.lambda / (std::sqrt(2.0 * std::numbers::pi) * p.delta)) - 0.5 * d * d;
            },
            [&](const KouParams& p) {
                if (p.lambda == 0.0) return kNegInf;
                if (z > 0.0) return p.p > 0.0 ? std::log(p.lambda * p.p * p.lambda_plus) - p.lambda_plus * z : kNegInf;
                if (z < 0.0)
                    return p.p < 1.0 ? std::log(p.lambda * (1.0 - p.p) * p.lambda_minus) + p.lambda_minus * z : kNegInf;
                return kNegInf;
            },
            [&](const VarianceGammaParams& p) {
                const double az = std::abs(z);
                return a_ * z - b_ * az - std::log(p.kappa * az);
            },
            [&](const NigParams&) {
                const double az = std::abs(z);
                return std::log(c_ / az) + a_ * z + std::log(bessel_k1(b_ * az));
            }},
        params_);
}

double LevyMeasureSpec::density(double z) const {
    if (z == 0.0 && !finite_activity()) throw ParameterDomainError("density: singular at z = 0");
    if (auto* m = std::get_if<MertonParams>(&params_)) {
        if (m->lambda == 0.0) return 0.0;
        const double d = (z - m->m) / m->delta;
        return m->lambda / (std::sqrt(2.0 * std::numbers::pi) * m->delta) * std::exp(-0.5 * d * d);
    }
    const double l = log_density(z);
    return l == kNegInf ? 0.0 : std::exp(l);
}

double LevyMeasureSpec::tilt_A() const {
    if (finite_activity()) throw FamilyMismatch("tilt_A: only defined for VG and NIG");
    return a_;
}

double LevyMeasureSpec::tilt_B() const {
    if (finite_activity()) throw FamilyMismatch("tilt_B: only defined for VG and NIG");
    return b_;
}

std::string LevyMeasureSpec::describe() const {
    std::ostringstream os;
    os.precision(12);
    std::visit(overloaded{[&](const MertonParams& p) {
                              os << "merton(lambda=" << p.lambda << ", m=" << p.m << ", delta=" << p.delta << ")";
                          },
                          [&](const KouParams& p) {
                              os << "kou(lambda=" << p.lambda << ", p=" << p.p << ", lambda_plus=" << p.lambda_plus
                                 << ", lambda_minus=" << p.lambda_minus << ")";
                          },
                          [&](const VarianceGammaParams& p) {
                              os << "vg(theta=" << p.theta << ", sigma=" << p.sigma << ", kappa=" << p.kappa << ")";
                          },
                          [&](const NigParams& p) {
                              os << "nig(theta=" << p.theta << ", sigma=" << p.sigma << ", kappa=" << p.kappa << ")";
                          }},
               params_);
    return os.str();
}

AdmissibilityShape admissibility_shape(const LevyMeasureSpec& spec) {
    AdmissibilityShape s;
    std::visit(overloaded{[&](const MertonParams& p) {
                              // The Gaussian factor alone does not dominate exp(z m / delta^2); the
                              // linear tilt D = -|m| / delta^2 absorbs it with a tight constant.
                              s.alpha = 0.0;
                              s.mu = 1.0 / (2.0 * p.delta * p.delta);
                              s.D = -std::abs(p.m) / (p.delta * p.delta);
                              s.C0 = p.lambda / (std::sqrt(2.0 * std::numbers::pi) * p.delta) *
                                     std::exp(-p.m * p.m / (2.0 * p.delta * p.delta));
                          },
                          [&](const KouParams& p) {
                              s.alpha = 0.0;
                              s.mu = 0.0;
                              s.D = std::min(p.lambda_plus, p.lambda_minus);
                              s.C0 = p.lambda * std::max(p.p * p.lambda_plus, (1.0 - p.p) * p.lambda_minus);
                          },
                          [&](const VarianceGammaParams& p) {
                              s.alpha = 1.0;
                              s.mu = 0.0;
                              s.D = spec.tilt_B() - std::abs(spec.tilt_A());
                              s.C0 = 1.0 / p.kappa;
                          },
                          [&](const NigParams& p) {
                              // Split the Bessel decay: half of B - |A| goes to the tilt, the rest keeps
                              // x K1(x) e^{beta x} bounded.
                              const double A = std::abs(spec.tilt_A()), B = spec.tilt_B();
                              const double beta = 0.5 * (1.0 + A / B);
                              s.alpha = 2.0;
                              s.mu = 0.0;
                              s.D = beta * B - A;
                              s.C0 = p.sigma / (std::numbers::pi * std::sqrt(p.kappa)) * bessel_tilt_sup(beta);
                          }},
               spec.params());
    return s;
}

AdmissibilityReport check_admissible(const LevyMeasureSpec& spec, const AdmissibilityShape& shape,
                                     std::span<const double> samples) {
    double worst = kNegInf;
    for (double z : samples) {
        if (z == 0.0) continue;
        const double az = std::abs(z);
        const double l = spec.log_density(z) + shape.alpha * std::log(az) + shape.D * az + shape.mu * z * z;
        worst = std::max(worst, l);
    }
    AdmissibilityReport r;
    r.tightest_C0 = worst == kNegInf ? 0.0 : std::exp(worst);
    r.admissible = r.tightest_C0 <= shape.C0 * (1.0 + 1e-12);
    return r;
}

InnerMoments inner_moments(const LevyMeasureSpec& spec, double cut) {
    InnerMoments mo;
    if (spec.is_zero() || cut <= 0.0) return mo;
    const GaussRule& g = gauss_legendre(12);
    // Dyadic panels towards zero; the integrands z(h(z) - h(-z)) and z^2 (h(z) + h(-z)) stay bounded.
    double hi = cut;
    for (int k = 0; k < 48; ++k) {
        const double lo = 0.5 * hi;
        mo.m1 += gauss_panel(g, lo, hi, [&](double z) { return z * (spec.density(z) - spec.density(-z)); });
        mo.m2 += gauss_panel(g, lo, hi, [&](double z) { return z * z * (spec.density(z) + spec.density(-z)); });
        hi = lo;
    }
    return mo;
}

namespace {

struct Adaptive {
    const std::function<double(double)>& f;
    const GaussRule& rule;
    int max_levels;
    bool failed = false;
    double err = 0.0;

    double run(double a, double b, double whole, double tol, int level) {
        const double m = 0.5 * (a + b);
        const double left = gauss_panel(rule, a, m, f);
        const double right = gauss_panel(rule, m, b, f);
        const double refined = left + right;
        const double e = std::abs(refined - whole);
        if (e <= tol || !std::isfinite(refined)) {
            err += e;
            return refined;
        }
        if (level >= max_levels) {
            failed = true;
            err += e;
            return refined;
        }
        return run(a, m, left, 0.5 * tol, level + 1) + run(m, b, right, 0.5 * tol, level + 1);
    }
};

std::vector<double> panel_edges(double eps, double truncation) {
    // Geometric grading from the inner cut to 1, then unit panels out to the truncation.
    std::vector<double> e;
    const double top = std::min(1.0, truncation);
    if (eps < top) {
        const int n = std::max(1, static_cast<int>(std::ceil(std::log10(top / eps) * 3.0)));
        for (int k = 0; k <= n; ++k) e.push_back(eps * std::pow(top / eps, static_cast<double>(k) / n));
        e.back() = top;
    } else {
        e.push_back(eps);
    }
    for (double x = std::floor(top) + 1.0; x < truncation; x += 1.0) e.push_back(x);
    if (e.back() < truncation) e.push_back(truncation);
    return e;
}

}  // namespace

QuadratureResult compensated_integral(const LevyMeasureSpec& spec, const std::function<double(double)>& g,
                                      const QuadratureOptions& opts) {
    QuadratureResult res;
    if (spec.is_zero()) return res;
    if (!(opts.inner_cut > 0.0) || !(opts.truncation > opts.inner_cut))
        throw ParameterDomainError("compensated_integral: need 0 < inner_cut < truncation");

    const double eps = opts.inner_cut;
    const double g0 = g(0.0), gp = g(eps), gm = g(-eps);
    const double d1 = (gp - gm) / (2.0 * eps);
    const double d2 = (gp - 2.0 * g0 + gm) / (eps * eps);
    const InnerMoments mo = inner_moments(spec, eps);
    const double inner = d1 * mo.m1 + 0.5 * d2 * mo.m2;

    const std::function<double(double)> f = [&](double z) { return g(z) * spec.density(z); };
    const GaussRule& rule = gauss_legendre(10);
    const std::vector<double> edges = panel_edges(eps, opts.truncation);

    std::vector<std::pair<double, double>> panels;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        panels.emplace_back(edges[k], edges[k + 1]);
        panels.emplace_back(-edges[k + 1], -edges[k]);
    }
    std::vector<double> coarse(panels.size());
    double total = inner;
    for (std::size_t k = 0; k < panels.size(); ++k) {
        coarse[k] = gauss_panel(rule, panels[k].first, panels[k].second, f);
        total += coarse[k];
    }
    const double tol = std::max(opts.rel_tol * std::abs(total), opts.abs_tol) / static_cast<double>(panels.size());

    Adaptive ad{f, rule, opts.max_levels};
    double sum = inner;
    for (std::size_t k = 0; k < panels.size(); ++k) sum += ad.run(panels[k].first, panels[k].second, coarse[k], tol, 0);
    res.value = sum;
    res.abs_error = ad.err;
    if (ad.failed || !std::isfinite(sum))
        throw QuadratureFailure("compensated_integral: refinement budget exhausted", sum);
    return res;
}

double martingale_drift(const LevyMeasureSpec& spec, double sigma, const QuadratureOptions& opts) {
    require(std::isfinite(sigma) && sigma >= 0.0, "martingale_drift: sigma must be >= 0");
    const auto g = [](double z) { return std::expm1(z) - (std::abs(z) <= 1.0 ? z : 0.0); };
    return -0.5 * sigma * sigma - compensated_integral(spec, g, opts).value;
}

namespace {

PanelRule rule_from_edges(const LevyMeasureSpec& spec, const std::vector<double>& edges, int points,
                          double negligible) {
    PanelRule rule;
    rule.cut = edges.front();
    if (spec.is_zero()) return rule;
    rule.inner = inner_moments(spec, rule.cut);
    const GaussRule& g = gauss_legendre(points);
    const std::size_t panels = edges.size() - 1;

    std::vector<double> left_z, left_w;
    for (int side : {-1, 1}) {
        std::vector<std::pair<double, double>> nodes;
        std::size_t keep = 0;
        for (std::size_t p = 0; p < panels; ++p) {
            const double a = edges[p], b = edges[p + 1];
            const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
            double importance = 0.0;
            for (std::size_t k = 0; k < g.nodes.size(); ++k) {
                const double z = side * (mid + half * g.nodes[k]);
                const double w = g.weights[k] * half * spec.density(z);
                nodes.emplace_back(z, w);
                importance += w * (1.0 + std::exp(z)) * (1.0 + z * z);
            }
            if (importance >= negligible) keep = nodes.size();
        }
        nodes.resize(keep);
        if (side < 0) {
            for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
                rule.nodes.push_back(it->first);
                rule.weights.push_back(it->second);
            }
        } else {
            for (auto [z, w] : nodes) {
                rule.nodes.push_back(z);
                rule.weights.push_back(w);
            }
        }
    }
    return rule;
}

}  // namespace

PanelRule make_panel_rule(const LevyMeasureSpec& spec, double panel_width, double cut, double truncation,
                          int points_per_panel, double negligible) {
    require(panel_width > 0.0 && cut > 0.0 && truncation > cut, "make_panel_rule: bad geometry");
    std::vector<double> edges;
    const int panels = static_cast<int>(std::ceil((truncation - cut) / panel_width));
    for (int p = 0; p <= panels; ++p) edges.push_back(std::min(truncation, cut + p * panel_width));
    return rule_from_edges(spec, edges, points_per_panel, negligible);
}

PanelRule make_graded_rule(const LevyMeasureSpec& spec, double cut, double graded_to, double panel_width,
                           double truncation, int points_per_panel, double negligible) {
    require(cut > 0.0 && graded_to > cut && panel_width > 0.0 && truncation > graded_to,
            "make_graded_rule: bad geometry");
    std::vector<double> edges;
    const int n = std::max(1, static_cast<int>(std::ceil(std::log(graded_to / cut) / std::log(1.5))));
    for (int k = 0; k <= n; ++k) edges.push_back(cut * std::pow(graded_to / cut, static_cast<double>(k) / n));
    edges.back() = graded_to;
    for (double a = graded_to + panel_width; a < truncation; a += panel_width) edges.push_back(a);
    edges.push_back(truncation);
    return rule_from_edges(spec, edges, points_per_panel, negligible);
}

}  // namespace levypide
