#include "levypide/cli_runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <memory>
#include <sstream>

#include "levypide/analytic_pricers.hpp"
#include "levypide/errors.hpp"
#include "levypide/hedging.hpp"

#ifndef LEVYPIDE_VERSION
#define LEVYPIDE_VERSION "unknown"
#endif

namespace levypide {

std::string format_number(double v) {
    if (v == 0.0) v = 0.0;  // no "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

Command parse_command(const std::string& s) {
    if (s == "price") return Command::Price;
    if (s == "table1") return Command::Table1;
    if (s == "hedge") return Command::Hedge;
    if (s == "alpha") return Command::Alpha;
    if (s == "hjb") return Command::Hjb;
    if (s == "check-measure") return Command::CheckMeasure;
    throw ConfigError("unknown command: " + s);
}

std::string command_name(Command c) {
    switch (c) {
        case Command::Price: return "price";
        case Command::Table1: return "table1";
        case Command::Hedge: return "hedge";
        case Command::Alpha: return "alpha";
        case Command::Hjb: return "hjb";
        case Command::CheckMeasure: return "check-measure";
    }
    return "?";
}

DeltaSign parse_delta_sign(const std::string& s) {
    if (s == "plus") return DeltaSign::Plus;
    if (s == "minus") return DeltaSign::Minus;
    throw ConfigError("delta sign must be plus or minus, got: " + s);
}

XiMode parse_xi_mode(const std::string& s) {
    if (s == "exact") return XiMode::Exact;
    if (s == "first-order") return XiMode::FirstOrder;
    if (s == "no-ezfactor") return XiMode::NoEzFactor;
    throw ConfigError("xi mode must be exact, first-order or no-ezfactor, got: " + s);
}

LevyMeasureSpec measure_from(const ConfigSection& s) {
    const std::string kind = s.get_string("measure", "none");
    if (kind == "none") return LevyMeasureSpec::none();
    if (kind == "merton")
        return LevyMeasureSpec::merton(s.get_double("lambda"), s.get_double("m"), s.get_double("delta"));
    if (kind == "kou")
        return LevyMeasureSpec::kou(s.get_double("lambda"), s.get_double("p"), s.get_double("lambda_plus"),
                                    s.get_double("lambda_minus"));
    if (kind == "vg")
        return LevyMeasureSpec::variance_gamma(s.get_double("theta"), s.get_double("jump_sigma"),
                                               s.get_double("kappa"));
    if (kind == "nig")
        return LevyMeasureSpec::nig(s.get_double("theta"), s.get_double("jump_sigma"), s.get_double("kappa"));
    throw ConfigError("[" + s.name + "] unknown measure: " + kind);
}

StrategyPtr strategy_from(const ConfigSection& s, double reference_level) {
    const std::string kind = s.get_string("strategy", "none");
    if (kind == "none") return nullptr;
    if (kind == "constant") return constant_strategy(s.get_double("strategy_c"), reference_level);
    if (kind == "linear") return linear_strategy(s.get_double("strategy_c"), reference_level);
    const double a = s.get_double("strategy_a"), w = s.get_double("strategy_s");
    if (kind == "normal_cdf") return normal_cdf_strategy(a, w, reference_level);
    if (kind == "tanh") return tanh_strategy(a, w, reference_level);
    if (kind == "put_delta") return put_delta_strategy(a, w, reference_level);
    throw ConfigError("[" + s.name + "] unknown strategy: " + kind);
}

Contract contract_from(const Config& c) {
    Contract k;
    if (!c.has_section("contract")) return k;
    const auto& s = c.section("contract");
    const std::string type = s.get_string("type", "put");
    if (type == "put") k.type = OptionType::Put;
    else if (type == "call") k.type = OptionType::Call;
    else throw ConfigError("[contract] type must be put or call");
    k.strike = s.get_double("strike", k.strike);
    k.maturity = s.get_double("maturity", k.maturity);
    if (!(k.strike > 0.0) || !(k.maturity > 0.0)) throw ConfigError("[contract] strike and maturity must be > 0");
    return k;
}

PideGrid pide_grid_from(const Config& c, const Overrides& o) {
    PideGrid g;
    if (c.has_section("grid")) {
        const auto& s = c.section("grid");
        g.L = s.get_double("L", g.L);
        g.N = s.get_int("N", g.N);
        g.M = s.get_int("M", g.M);
    }
    if (o.grid_L) g.L = *o.grid_L;
    if (o.grid_N) g.N = *o.grid_N;
    if (o.grid_M) g.M = *o.grid_M;
    try {
        g.validate();
    } catch (const ParameterDomainError& e) {
        throw ConfigError(e.what());
    }
    return g;
}

PideProblem problem_from(const ConfigSection& s, const Contract& contract, const Overrides& o) {
    PideProblem p;
    p.contract = contract;
    p.sigma = s.get_double("sigma", p.sigma);
    p.r = s.get_double("r", p.r);
    p.measure = measure_from(s);
    p.rho = o.rho ? *o.rho : s.get_double("rho", 0.0);
    p.strategy = strategy_from(s, contract.strike);
    if (s.has("xi_mode")) p.xi_mode = parse_xi_mode(s.get_string("xi_mode"));
    if (s.has("delta_sign")) p.delta_sign = parse_delta_sign(s.get_string("delta_sign"));
    if (o.xi_mode) p.xi_mode = *o.xi_mode;
    if (o.delta_sign) p.delta_sign = *o.delta_sign;
    if (p.rho > 0.0 && !p.strategy) throw ConfigError("[" + s.name + "] rho > 0 needs a strategy");
    return p;
}

PortfolioProblem portfolio_from(const Config& c) {
    PortfolioProblem p;
    const auto mu = c.section("portfolio").get_list("mu");
    const auto& cov = c.section("covariance").rows;
    const auto n = static_cast<Eigen::Index>(mu.size());
    if (static_cast<Eigen::Index>(cov.size()) != n) throw ConfigError("[covariance] needs one row per asset");
    p.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), n);
    p.Sigma.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(cov[i].size()) != n) throw ConfigError("[covariance] row length differs from n");
        for (Eigen::Index j = 0; j < n; ++j) p.Sigma(i, j) = cov[i][j];
    }
    if (c.has_section("decision_set")) {
        std::vector<Eigen::VectorXd> set;
        for (const auto& row : c.section("decision_set").rows) {
            if (static_cast<Eigen::Index>(row.size()) != n) throw ConfigError("[decision_set] row length differs from n");
            set.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), n));
        }
        p.discrete = std::move(set);
    }
    try {
        p.validate();
    } catch (const ParameterDomainError& e) {
        throw ConfigError(e.what());
    }
    return p;
}

namespace {

/// Writes whitespace tables; every number through format_number.
class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(std::vector<double> row) { rows_.push_back(std::move(row)); }
    std::string str() const {
        std::string out = "#";
        for (const auto& h : header_) out += " " + h;
        out += '\n';
        for (const auto& r : rows_) {
            for (std::size_t j = 0; j < r.size(); ++j) {
                if (j) out += ' ';
                out += format_number(r[j]);
            }
            out += '\n';
        }
        return out;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

struct Context {
    const RunConfig& run;
    const Config& cfg;
    RunResult& result;
    std::string kernel;

    void write(const std::string& name, const std::string& content) {
        const auto path = (std::filesystem::path(run.out_dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot write output file: " + path);
        out << content;
        result.files.push_back(path);
    }
};

std::vector<double> spots_from(const Config& c) {
    std::vector<double> s;
    for (const auto& row : c.section("spots").rows) s.insert(s.end(), row.begin(), row.end());
    if (s.empty()) throw ConfigError("[spots] is empty");
    for (double v : s)
        if (!(v > 0.0)) throw ConfigError("[spots] values must be > 0");
    return s;
}

PriceSurface solve_scenario(const PideProblem& p, const ConfigSection& s, const PideGrid& g) {
    if (s.get_bool("feedback", false)) return solve_feedback_pide(p, g);
    return solve_linear_pide(p, g);
}

/// Solves every [scenario] concurrently; results come back in file order.
std::vector<PriceSurface> solve_all(Context& ctx, const std::vector<const ConfigSection*>& scen, const Contract& k,
                                    const PideGrid& g) {
    std::vector<PideProblem> problems;
    for (const auto* s : scen) problems.push_back(problem_from(*s, k, ctx.run.overrides));
    std::vector<std::future<PriceSurface>> jobs;
    for (std::size_t j = 0; j < scen.size(); ++j)
        jobs.push_back(std::async(std::launch::async, [&, j] { return solve_scenario(problems[j], *scen[j], g); }));
    std::vector<PriceSurface> out;
    for (auto& f : jobs) out.push_back(f.get());
    if (!out.empty()) ctx.kernel = out.front().kernel_name;
    return out;
}

std::vector<std::string> scenario_names(const std::vector<const ConfigSection*>& scen) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < scen.size(); ++j)
        names.push_back(scen[j]->get_string("name", "scenario" + std::to_string(j + 1)));
    return names;
}

void cmd_price(Context& ctx) {
    const Contract k = contract_from(ctx.cfg);
    const PideGrid g = pide_grid_from(ctx.cfg, ctx.run.overrides);
    const auto scen = ctx.cfg.all("scenario");
    if (scen.empty()) throw ConfigError("no [scenario] sections");
    const auto spots = spots_from(ctx.cfg);
    const auto surfaces = solve_all(ctx, scen, k, g);
    std::vector<std::string> header{"S"};
    for (const auto& n : scenario_names(scen)) {
        header.push_back(n);
        header.push_back(n + "_dS");
    }
    Table t(header);
    for (double S : spots) {
        std::vector<double> row{S};
        for (const auto& s : surfaces) {
            row.push_back(price_from_surface(s, S));
            row.push_back(s.value_dS(k.maturity, S));
        }
        t.add(row);
    }
    ctx.write("price.txt", t.str());
}

void cmd_table1(Context& ctx) {
    const Contract k = contract_from(ctx.cfg);
    const PideGrid g = pide_grid_from(ctx.cfg, ctx.run.overrides);
    const auto scen = ctx.cfg.all("scenario");
    if (scen.size() != 6) throw ConfigError("table1 needs exactly six [scenario] sections");
    const auto spots = spots_from(ctx.cfg);
    const auto names = scenario_names(scen);
    const auto surfaces = solve_all(ctx, scen, k, g);

    std::vector<std::vector<double>> V(spots.size(), std::vector<double>(6));
    for (std::size_t i = 0; i < spots.size(); ++i)
        for (std::size_t j = 0; j < 6; ++j) V[i][j] = price_from_surface(surfaces[j], spots[i]);

    std::vector<std::string> header{"S"};
    header.insert(header.end(), names.begin(), names.end());
    header.push_back("payoff");
    Table t(header);
    for (std::size_t i = 0; i < spots.size(); ++i) {
        std::vector<double> row{spots[i]};
        row.insert(row.end(), V[i].begin(), V[i].end());
        row.push_back(payoff(k, spots[i]));
        t.add(row);
    }
    ctx.write("table1.txt", t.str());

    // Ordering and monotonicity checks, then the comparison with the reference table.
    std::ostringstream rep;
    auto family_of = [&](std::size_t j) { return measure_from(*scen[j]).family(); };
    auto is_none = [&](std::size_t j) { return measure_from(*scen[j]).is_zero(); };
    bool ordering = true, positive = true, decreasing = true;
    for (std::size_t a = 0; a < 6; ++a) {
        for (std::size_t i = 0; i < spots.size(); ++i) {
            positive = positive && V[i][a] > 0.0;
            if (i > 0) decreasing = decreasing && V[i][a] < V[i - 1][a];
        }
    }
    std::vector<double> rates;
    for (const auto* s : scen) {
        const double r = s->get_double("r", 0.0);
        if (std::find(rates.begin(), rates.end(), r) == rates.end()) rates.push_back(r);
    }
    for (double r : rates) {
        int bs = -1, mer = -1, vg = -1;
        for (std::size_t j = 0; j < 6; ++j) {
            if (scen[j]->get_double("r", 0.0) != r) continue;
            if (is_none(j)) bs = static_cast<int>(j);
            else if (family_of(j) == Family::Merton) mer = static_cast<int>(j);
            else if (family_of(j) == Family::VarianceGamma) vg = static_cast<int>(j);
        }
        if (bs < 0 || mer < 0 || vg < 0) throw ConfigError("table1 needs BS, Merton and VG scenarios per rate");
        for (std::size_t i = 0; i < spots.size(); ++i)
            ordering = ordering && V[i][vg] > V[i][mer] && V[i][mer] > V[i][bs];
    }
    rep << "ordering_vg_merton_bs " << (ordering ? "true" : "false") << '\n';
    rep << "all_positive " << (positive ? "true" : "false") << '\n';
    rep << "decreasing_in_S " << (decreasing ? "true" : "false") << '\n';

    const auto& tsec = ctx.cfg.section("table1");
    const std::string ref_path = ctx.cfg.resolve(tsec.get_string("reference"));
    const Config ref = Config::load(ref_path);
    std::vector<std::vector<double>> rows;
    for (const auto& s : ref.sections())
        for (const auto& r : s.rows) rows.push_back(r);
    if (rows.size() != spots.size()) throw ConfigError("reference table row count differs from [spots]");
    Table dev({"S", "column", "computed", "reference", "abs_dev", "rel_dev"});
    double max_rel = 0.0;
    for (std::size_t i = 0; i < spots.size(); ++i) {
        if (rows[i].size() < 7) throw ConfigError("reference rows need S and six prices");
        for (std::size_t j = 0; j < 6; ++j) {
            const double ref_v = rows[i][j + 1];
            const double d = V[i][j] - ref_v;
            const double rel = ref_v != 0.0 ? d / ref_v : 0.0;
            max_rel = std::max(max_rel, std::abs(rel));
            dev.add({spots[i], static_cast<double>(j + 1), V[i][j], ref_v, d, rel});
        }
    }
    rep << "max_rel_dev_vs_reference " << format_number(max_rel) << '\n';
    rep << "columns";
    for (std::size_t j = 0; j < 6; ++j) rep << ' ' << (j + 1) << '=' << names[j];
    rep << '\n' << dev.str();
    ctx.write("table1_deviation.txt", rep.str());
}

void cmd_hedge(Context& ctx) {
    const Contract k = contract_from(ctx.cfg);
    const auto& m = ctx.cfg.section("model");
    const auto& h = ctx.cfg.section("hedge");
    const Overrides& o = ctx.run.overrides;
    const double sigma = m.get_double("sigma", 0.23), r = m.get_double("r", 0.0);
    const LevyMeasureSpec nu = measure_from(m);
    const double tau = h.get_double("tau", 0.5 * k.maturity);
    const double rho = o.rho ? *o.rho : h.get_double("rho", 0.0);

    std::shared_ptr<const ValueProvider> V;
    const std::string value = h.get_string("value", "surface");
    if (value == "bs") {
        V = std::make_shared<BsValueProvider>(k, sigma, r);
    } else if (value == "surface") {
        PideProblem p;
        p.contract = k;
        p.sigma = sigma;
        p.r = r;
        p.measure = nu;
        auto surf = std::make_shared<const PriceSurface>(solve_linear_pide(p, pide_grid_from(ctx.cfg, o)));
        ctx.kernel = surf->kernel_name;
        V = std::make_shared<SurfaceValueProvider>(surf);
    } else {
        throw ConfigError("[hedge] value must be bs or surface");
    }
    const HedgeContext hc = make_hedge_context(sigma, nu, V);
    const double lo = h.get_double("search_lo", -2.0), hi = h.get_double("search_hi", 2.0);

    Table t({"S", "V", "V_S", "phi_closed_form", "phi_golden_section"});
    for (double S : h.get_list("spots")) {
        if (!(S > 0.0)) throw ConfigError("[hedge] spots must be > 0");
        t.add({S, V->value(tau, S), V->delta(tau, S), optimal_hedge_pointwise(hc, tau, S),
               golden_section_hedge(hc, tau, S, lo, hi)});
    }
    ctx.write("hedge.txt", t.str());

    if (rho > 0.0) {
        HedgeGrid grid;
        grid.reference = k.strike;
        grid.x_min = h.get_double("x_min", grid.x_min);
        grid.x_max = h.get_double("x_max", grid.x_max);
        grid.n = h.get_int("n", grid.n);
        FixedPointOptions fpo;
        fpo.damping = h.get_double("damping", fpo.damping);
        const StrategyProfile p0 = optimal_strategy_rho0(hc, tau, grid);
        const StrategyProfile fp = optimal_strategy_fixed_point(hc, tau, grid, rho, fpo);
        const auto s0 = p0.as_strategy();
        const bool clamp = h.has("slope_cap");
        const StrategyProfile cl = clamp ? clamp_strategy(fp, h.get_double("slope_cap")) : fp;
        std::vector<std::string> header{"x", "S", "phi_rho0", "phi_fixed_point", "phi_first_order"};
        if (clamp) header.push_back("phi_clamped");
        Table pt(header);
        for (int j = 0; j < grid.n; ++j) {
            const double S = grid.reference * std::exp(grid.x(j));
            std::vector<double> row{grid.x(j), S, p0.phi[j], fp.phi[j], strategy_first_order(hc, tau, S, rho, *s0)};
            if (clamp) row.push_back(cl.phi[j]);
            pt.add(row);
        }
        ctx.write("hedge_profile.txt", pt.str());
    }
}

void cmd_alpha(Context& ctx) {
    PortfolioProblem p = portfolio_from(ctx.cfg);
    const auto& cs = ctx.cfg.section("curve");
    const double a = cs.get_double("phi_min", 0.0), b = cs.get_double("phi_max", 10.0);
    const int n = cs.get_int("points", 201);
    if (!(b > a) || a < 0.0 || n < 2) throw ConfigError("[curve] needs 0 <= phi_min < phi_max and points >= 2");
    std::vector<double> phis(n);
    for (int i = 0; i < n; ++i) phis[i] = a + (b - a) * i / (n - 1);

    std::optional<std::vector<Eigen::VectorXd>> discrete = std::move(p.discrete);
    p.discrete.reset();
    Table t({"phi", "alpha", "alpha_prime", "support"});
    for (const auto& pt : alpha_curve(p, phis))
        t.add({pt.phi, pt.alpha, pt.slope, static_cast<double>(pt.support)});
    ctx.write("alpha.txt", t.str());

    std::ostringstream sum;
    const LipschitzBounds lb = lipschitz_bounds(p);
    sum << "omega " << format_number(lb.omega) << '\n';
    sum << "L " << format_number(lb.L) << '\n';
    sum << "alpha_infimum " << format_number(alpha_infimum(p)) << '\n';
    if (p.n() == 2) {
        const TwoAssetBranches br = two_asset_branches(p);
        sum << "phi_minus " << format_number(br.phi_minus) << '\n';
        sum << "phi_plus " << format_number(br.phi_plus) << '\n';
        sum << "E_minus " << format_number(br.E_lo) << "\nD_minus " << format_number(br.D_lo) << '\n';
        sum << "A " << format_number(br.A) << "\nB " << format_number(br.B) << "\nC " << format_number(br.C) << '\n';
        sum << "E_plus " << format_number(br.E_hi) << "\nD_plus " << format_number(br.D_hi) << '\n';
    }
    if (discrete) {
        PortfolioProblem q = p;
        q.discrete = std::move(discrete);
        Table d({"phi", "alpha", "alpha_prime", "choice"});
        for (const auto& pt : alpha_curve(q, phis)) {
            int idx = 0;
            while (!(pt.support >> idx & 1u)) ++idx;
            d.add({pt.phi, pt.alpha, pt.slope, static_cast<double>(idx + 1)});
        }
        ctx.write("alpha_discrete.txt", d.str());
        const auto lines = discrete_lines(q);
        for (std::size_t i = 0; i < lines.size(); ++i)
            sum << "line" << (i + 1) << " E " << format_number(lines[i].E) << " D " << format_number(lines[i].D) << '\n';
    }
    ctx.write("alpha_summary.txt", sum.str());
}

UtilitySpec utility_from(const ConfigSection& s) {
    const std::string kind = s.get_string("kind", "dara");
    if (kind == "dara")
        return UtilitySpec::dara(s.get_double("a0"), s.get_double("a1"), s.get_double("x_star"),
                                 s.get_double("gamma", 6.0));
    if (kind == "arctan") return UtilitySpec::arctan();
    if (kind == "constant") return UtilitySpec::constant_profile(s.get_double("value"));
    throw ConfigError("[utility] kind must be dara, arctan or constant");
}

void cmd_hjb(Context& ctx) {
    const PortfolioProblem p = portfolio_from(ctx.cfg);
    const UtilitySpec u = utility_from(ctx.cfg.section("utility"));
    DriftSpec drift;
    if (ctx.cfg.has_section("drift")) {
        const auto& d = ctx.cfg.section("drift");
        drift.C = d.get_double("C", drift.C);
        drift.y_minus = d.get_double("y_minus", drift.y_minus);
    }
    HjbGrid g;
    if (ctx.cfg.has_section("grid")) {
        const auto& s = ctx.cfg.section("grid");
        g.X = s.get_double("X", g.X);
        g.Nx = s.get_int("Nx", g.Nx);
        g.T = s.get_double("T", g.T);
        g.Nt = s.get_int("Nt", g.Nt);
    }
    HjbOptions opts;
    int stride = 20, x_stride = 1;
    if (ctx.cfg.has_section("output")) {
        const auto& s = ctx.cfg.section("output");
        stride = s.get_int("stride", stride);
        x_stride = s.get_int("x_stride", x_stride);
        opts.flip_source = s.get_bool("flip_source", false);
    }
    if (stride < 1 || x_stride < 1) throw ConfigError("[output] strides must be >= 1");
    try {
        g.validate();
    } catch (const ParameterDomainError& e) {
        throw ConfigError(e.what());
    }

    const DiffusionFunction alpha(p, drift);
    const HjbSolution sol = solve_riccati_pde(alpha, phi0_from_utility(u, g), g, opts);
    const WeightsSurface w = optimal_weights_surface(p, sol, stride);

    Table prof({"tau", "x", "phi", "alpha"});
    std::vector<std::string> wh{"tau", "x", "phi"};
    for (int k = 0; k < p.n(); ++k) wh.push_back("theta" + std::to_string(k + 1));
    wh.push_back("support");
    Table wt(wh);
    std::ostringstream mono;
    for (std::size_t r = 0; r < w.theta.size(); ++r) {
        const int n = static_cast<int>(r) * stride;
        int decreasing = 0;
        for (int i = 0; i < g.Nx; ++i) {
            if (i > 0 && sol.phi[n][i] < sol.phi[n][i - 1]) ++decreasing;
            if (i % x_stride) continue;
            prof.add({sol.tau(n), g.x(i), sol.phi[n][i], alpha.value(g.x(i), sol.phi[n][i])});
            std::vector<double> row{sol.tau(n), g.x(i), sol.phi[n][i]};
            for (int k = 0; k < p.n(); ++k) row.push_back(w.theta[r][i][k]);
            row.push_back(static_cast<double>(w.support[r][i]));
            wt.add(row);
        }
        mono << "decreasing_faces tau=" << format_number(sol.tau(n)) << ' ' << decreasing << '\n';
    }
    ctx.write("hjb_profiles.txt", prof.str());
    ctx.write("hjb_weights.txt", wt.str());

    Table ct({"tau", "x_face", "support_left", "support_right"});
    for (const auto& c : w.contours)
        ct.add({sol.tau(c.step), c.x, static_cast<double>(c.left), static_cast<double>(c.right)});
    ctx.write("hjb_contours.txt", ct.str());

    Table vs({"x", "V_shape_tau0", "V_shape_T"});
    const auto v0 = value_shape(sol, 0), vT = value_shape(sol, g.Nt);
    for (int i = 0; i < g.Nx; i += x_stride) vs.add({g.x(i), v0[i], vT[i]});
    ctx.write("hjb_value_shape.txt", "# unnormalised: V'(x_0) = 1, V(x_0) = 0\n" + vs.str());

    std::ostringstream sum;
    sum << "psi_lower " << format_number(sol.bounds.psi_lower) << '\n';
    sum << "psi_upper " << format_number(sol.bounds.psi_upper) << '\n';
    sum << "lambda " << format_number(sol.bounds.lambda) << '\n';
    sum << "max_envelope_violation " << format_number(sol.max_envelope_violation) << '\n';
    sum << "envelope_flags " << sol.envelope_flags << '\n';
    sum << "max_ledger_error " << format_number(sol.max_ledger_error()) << '\n';
    sum << "max_picard_iterations " << sol.max_picard_iterations << '\n';
    sum << mono.str();
    ctx.write("hjb_summary.txt", sum.str());
}

void cmd_check_measure(Context& ctx) {
    const auto secs = ctx.cfg.all("measure");
    if (secs.empty()) throw ConfigError("no [measure] sections");
    std::ostringstream out;
    std::vector<double> samples;
    for (int k = 0; k <= 400; ++k) {
        const double z = std::pow(10.0, -6.0 + 7.0 * k / 400.0);
        if (z > 8.0) break;
        samples.push_back(z);
        samples.push_back(-z);
    }
    for (const auto* s : secs) {
        const LevyMeasureSpec nu = measure_from(*s);
        const double sigma = s->get_double("sigma", 0.0);
        out << "[" << s->get_string("name", nu.describe()) << "]\n";
        out << "family " << (nu.is_zero() ? std::string("none") : to_string(nu.family())) << '\n';
        if (!nu.is_zero()) {
            const AdmissibilityShape sh = admissibility_shape(nu);
            const AdmissibilityReport rep = check_admissible(nu, sh, samples);
            out << "shape_alpha " << format_number(sh.alpha) << "\nshape_D " << format_number(sh.D) << "\nshape_mu "
                << format_number(sh.mu) << "\nshape_C0 " << format_number(sh.C0) << '\n';
            out << "admissible " << (rep.admissible ? "true" : "false") << '\n';
            out << "tightest_C0 " << format_number(rep.tightest_C0) << '\n';
        }
        const double gamma = martingale_drift(nu, sigma);
        const double jump = nu.is_zero() ? 0.0
                                         : compensated_integral(nu, [](double z) {
                                               return std::expm1(z) - (std::abs(z) <= 1.0 ? z : 0.0);
                                           }).value;
        out << "martingale_drift " << format_number(gamma) << '\n';
        out << "martingale_residual " << format_number(0.5 * sigma * sigma + gamma + jump) << "\n\n";
    }
    ctx.write("measure.txt", out.str());
}

}  // namespace

RunResult run(const RunConfig& rc) {
    RunResult result;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (!std::filesystem::exists(rc.config_path)) throw ConfigError("config file not found: " + rc.config_path);
        std::filesystem::create_directories(rc.out_dir);
        const Config cfg = Config::load(rc.config_path);
        Context ctx{rc, cfg, result, {}};
        switch (rc.command) {
            case Command::Price: cmd_price(ctx); break;
            case Command::Table1: cmd_table1(ctx); break;
            case Command::Hedge: cmd_hedge(ctx); break;
            case Command::Alpha: cmd_alpha(ctx); break;
            case Command::Hjb: cmd_hjb(ctx); break;
            case Command::CheckMeasure: cmd_check_measure(ctx); break;
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream meta;
        meta << "version " << LEVYPIDE_VERSION << '\n';
        meta << "command " << command_name(rc.command) << '\n';
        meta << "config " << rc.config_path << '\n';
        meta << "config_hash " << cfg.hash() << '\n';
        if (!ctx.kernel.empty()) meta << "simd_kernels " << ctx.kernel << '\n';
        meta << "wall_time_s " << format_number(wall) << '\n';
        const auto path = (std::filesystem::path(rc.out_dir) / (command_name(rc.command) + ".meta")).string();
        std::ofstream(path, std::ios::binary) << meta.str();
    } catch (const ConfigError& e) {
        result.exit_code = kExitConfig;
        result.message = e.what();
    } catch (const ParameterDomainError& e) {
        result.exit_code = kExitConfig;
        result.message = e.what();
    } catch (const AssumptionViolation& e) {
        result.exit_code = kExitAssumption;
        result.message = e.what();
    } catch (const std::filesystem::filesystem_error& e) {
        result.exit_code = kExitConfig;
        result.message = e.what();
    } catch (const std::exception& e) {
        result.exit_code = kExitNumerical;
        result.message = e.what();
    }
    return result;
}

}  // namespace levypide
