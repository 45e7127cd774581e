#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>

#include "levypide/cli_runner.hpp"
#include "levypide/config.hpp"
#include "levypide/errors.hpp"
#include "levypide/portfolio_alpha.hpp"

using namespace levypide;

namespace {

PortfolioProblem pension() {
    PortfolioProblem p;
    p.mu = Eigen::Vector2d(0.1, 0.05);
    p.Sigma.resize(2, 2);
    p.Sigma << 0.09, -0.00045, -0.00045, 0.0001;
    return p;
}

PortfolioProblem random_problem(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), m(0.0, 0.1);
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = 0.2 * u(rng);
    PortfolioProblem p;
    p.Sigma = A * A.transpose() + 0.01 * Eigen::MatrixXd::Identity(n, n);
    p.mu.resize(n);
    for (int i = 0; i < n; ++i) p.mu[i] = m(rng);
    return p;
}

/// Brute force over a fine simplex grid (n = 2 or 3).
double brute_alpha(const PortfolioProblem& p, double phi, int steps) {
    double best = 1e300;
    const int n = p.n();
    for (int i = 0; i <= steps; ++i)
        for (int j = 0; j <= (n == 3 ? steps - i : 0); ++j) {
            Eigen::VectorXd t(n);
            if (n == 2) t << i / double(steps), 1.0 - i / double(steps);
            else t << i / double(steps), j / double(steps), 1.0 - (i + j) / double(steps);
            best = std::min(best, -p.mu.dot(t) + 0.5 * phi * t.dot(p.Sigma * t));
        }
    return best;
}

}  // namespace

TEST_SUITE("portfolio_alpha") {

TEST_CASE("validation") {
    PortfolioProblem p = pension();
    p.Sigma(0, 1) = 0.5;
    CHECK_THROWS_AS(p.validate(), ParameterDomainError);
    p = pension();
    p.Sigma(1, 1) = -1.0;
    CHECK_THROWS_AS(p.validate(), ParameterDomainError);
    p = pension();
    p.mu = Eigen::Vector3d(0, 0, 0);
    CHECK_THROWS_AS(p.validate(), ParameterDomainError);
}

TEST_CASE("two-asset closed form matches the engine") {
    const auto p = pension();
    const auto br = two_asset_branches(p);
    CHECK(br.phi_minus == doctest::Approx(0.05 / (0.09 + 0.00045)));
    for (double phi = 0.05; phi < 50.0; phi *= 1.17) {
        const auto a = alpha_value(p, phi);
        CHECK(a.alpha == doctest::Approx(br.alpha(phi)).epsilon(1e-13));
        CHECK(a.slope == doctest::Approx(br.slope(phi)).epsilon(1e-12));
        CHECK(a.kkt_residual < 1e-12);
    }
}

TEST_CASE("engine matches brute-force grid search") {
    std::mt19937_64 rng(11);
    for (int n : {2, 3})
        for (int k = 0; k < 5; ++k) {
            const auto p = random_problem(rng, n);
            for (double phi : {0.5, 3.0, 20.0}) {
                const double a = alpha_value(p, phi).alpha;
                const double b = brute_alpha(p, phi, n == 2 ? 20000 : 600);
                CHECK(a <= b + 1e-14);
                CHECK(a == doctest::Approx(b).epsilon(1e-5).scale(0.1));
            }
        }
}

TEST_CASE("scaling invariances") {
    std::mt19937_64 rng(5);
    const auto p = random_problem(rng, 4);
    for (double c : {0.5, 3.0})
        for (double phi : {0.3, 2.0, 11.0}) {
            PortfolioProblem q = p;
            q.Sigma *= c;
            CHECK(alpha_value(q, phi).alpha == doctest::Approx(alpha_value(p, c * phi).alpha).epsilon(1e-12));
            q = p;
            q.mu *= c;
            CHECK(alpha_value(q, phi).alpha == doctest::Approx(c * alpha_value(p, phi / c).alpha).epsilon(1e-12));
        }
}

TEST_CASE("monotone with slope inside the Lipschitz bounds") {
    std::mt19937_64 rng(9);
    for (int n : {2, 3, 5}) {
        const auto p = random_problem(rng, n);
        const auto lb = lipschitz_bounds(p);
        double prev = -1e300;
        for (double phi = 0.01; phi < 100.0; phi *= 1.3) {
            const auto a = alpha_value(p, phi);
            CHECK(a.alpha > prev);
            prev = a.alpha;
            CHECK(a.slope >= lb.omega * (1 - 1e-10));
            CHECK(a.slope <= lb.L * (1 + 1e-10));
        }
    }
}

TEST_CASE("Lipschitz bounds against a grid search") {
    const auto p = pension();
    const auto lb = lipschitz_bounds(p);
    double omega = 1e300;
    for (int i = 0; i <= 200000; ++i) {
        const double t = i / 200000.0;
        const Eigen::Vector2d th(t, 1 - t);
        omega = std::min(omega, 0.5 * th.dot(p.Sigma * th));
    }
    CHECK(lb.omega == doctest::Approx(omega).epsilon(1e-8));
    CHECK(lb.L == doctest::Approx(0.045));
}

TEST_CASE("inverse round trip and range") {
    const auto p = pension();
    CHECK(alpha_infimum(p) == doctest::Approx(-0.1));
    for (double phi : {0.2, 1.0, 7.5, 40.0}) CHECK(inverse_alpha(p, alpha_value(p, phi).alpha) == doctest::Approx(phi).epsilon(1e-9));
    CHECK_THROWS_AS(inverse_alpha(p, -0.2), OutOfRange);
}

TEST_CASE("discrete decision set is the lower envelope of lines") {
    auto p = pension();
    p.discrete = std::vector<Eigen::VectorXd>{Eigen::Vector2d(0.8, 0.2), Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0, 1)};
    const auto lines = discrete_lines(p);
    REQUIRE(lines.size() == 3);
    for (double phi = 0.0; phi < 10.0; phi += 0.37) {
        double m = 1e300;
        for (const auto& l : lines) m = std::min(m, l.E * phi + l.D);
        CHECK(alpha_value(p, phi).alpha == doctest::Approx(m).epsilon(1e-14));
    }
    // the simplex optimum is never worse than the discrete one
    const auto simplex = pension();
    for (double phi : {0.5, 2.0, 8.0}) CHECK(alpha_value(simplex, phi).alpha <= alpha_value(p, phi).alpha + 1e-15);
    const auto lb = lipschitz_bounds(p);
    CHECK(lb.omega <= lb.L);
}

TEST_CASE("large problems use the projected gradient path") {
    std::mt19937_64 rng(21);
    const auto p = random_problem(rng, 25);
    for (double phi : {0.5, 5.0, 50.0}) {
        const auto a = alpha_value(p, phi);
        CHECK(a.kkt_residual < 1e-10);
        CHECK(kkt_residual(p, phi, a.theta) < 1e-10);
        CHECK(a.theta.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(a.theta.minCoeff() >= 0.0);
    }
}

TEST_CASE("bundled five-asset example diversifies as risk aversion grows") {
    const auto cfg = Config::load(std::string(LEVYPIDE_SOURCE_DIR) + "/configs/dax5_alpha.cfg");
    const auto p = portfolio_from(cfg);
    int prev = 0;
    for (double phi = 0.01; phi <= 20.0; phi += 0.05) {
        const int k = std::popcount(alpha_value(p, phi).support);
        CHECK(k >= prev);
        prev = k;
    }
    CHECK(prev >= 3);
}

TEST_CASE("zero risk aversion picks the best asset") {
    const auto a = alpha_value(pension(), 0.0);
    CHECK(a.alpha == doctest::Approx(-0.1));
    CHECK(a.support == 1u);
}

}
