#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "levypide/cli_runner.hpp"
#include "levypide/config.hpp"
#include "levypide/errors.hpp"

using namespace levypide;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("levypide_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p.string();
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSmallPrice = R"(
[contract]
type = put
strike = 100
maturity = 1
[grid]
L = 3
N = 60
M = 10
[spots]
90 100 110
[scenario]
name = bs
sigma = 0.2
r = 0.0
)";

}  // namespace

TEST_SUITE("config_cli") {

TEST_CASE("grammar: sections, entries, rows and comments") {
    const auto c = Config::parse("top = 1\n[a]\nx = 2 # note\n1 2 3\n\n[b]\ny = hello world\n[a]\nx = 5\n");
    REQUIRE(c.sections().size() == 4);
    CHECK(c.sections()[0].name.empty());
    CHECK(c.section("a").get_double("x") == 2.0);
    CHECK(c.section("a").rows.at(0) == std::vector<double>{1, 2, 3});
    CHECK(c.section("b").get_string("y") == "hello world");
    CHECK(c.all("a").size() == 2);
    CHECK(c.all("a")[1]->get_int("x", 0) == 5);
}

TEST_CASE("later keys override earlier ones") {
    const auto c = Config::parse("[s]\nk = 1\nk = 2\n");
    CHECK(c.section("s").get_double("k") == 2.0);
}

TEST_CASE("malformed input raises ConfigError with a location") {
    CHECK_THROWS_AS(Config::parse("[unterminated\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[]\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[a]\n = 3\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[a]\n1 two 3\n"), ConfigError);
    try {
        Config::parse("[a]\nok = 1\nbad line\n", "f.cfg");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("f.cfg:3") != std::string::npos);
    }
    const auto c = Config::parse("[a]\nn = 1.5\nb = maybe\n");
    CHECK_THROWS_AS(c.section("a").get_int("n", 0), ConfigError);
    CHECK_THROWS_AS(c.section("a").get_bool("b", false), ConfigError);
    CHECK_THROWS_AS(c.section("a").get_double("missing"), ConfigError);
    CHECK_THROWS_AS(c.section("nope"), ConfigError);
}

TEST_CASE("serialization is canonical and idempotent") {
    const auto c = Config::parse("# header\n[a]\n x=  1 \n0.1 1e-3\n[b]\n\ny=z\n");
    const std::string s1 = c.serialize();
    const std::string s2 = Config::parse(s1).serialize();
    CHECK(s1 == s2);
    CHECK(c.hash() == Config::parse(s1).hash());
    CHECK(c.hash().size() == 16);
    CHECK(c.hash() != Config::parse("[a]\nx = 2\n").hash());
}

TEST_CASE("bundled configs round-trip") {
    for (const auto& e : fs::directory_iterator(fs::path(LEVYPIDE_SOURCE_DIR) / "configs")) {
        const auto c = Config::load(e.path().string());
        CHECK(Config::parse(c.serialize()).serialize() == c.serialize());
    }
}

TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("command and option parsing") {
    CHECK(parse_command("check-measure") == Command::CheckMeasure);
    CHECK(command_name(Command::Table1) == "table1");
    CHECK_THROWS_AS(parse_command("fly"), ConfigError);
    CHECK(parse_delta_sign("minus") == DeltaSign::Minus);
    CHECK(parse_xi_mode("no-ezfactor") == XiMode::NoEzFactor);
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(0.1) == "0.1");
}

TEST_CASE("scenario building blocks") {
    const auto c = Config::parse("[s]\nmeasure = vg\ntheta = -0.43\njump_sigma = 0.23\nkappa = 0.27\nstrategy = tanh\nstrategy_a = 1\nstrategy_s = 0.3\n");
    const auto m = measure_from(c.section("s"));
    CHECK(m.family() == Family::VarianceGamma);
    const auto st = strategy_from(c.section("s"), 100.0);
    CHECK(st->lipschitz() == doctest::Approx(1.0 / 0.3));
    CHECK_THROWS_AS(measure_from(Config::parse("[s]\nmeasure = cauchy\n").section("s")), ConfigError);
}

TEST_CASE("grid overrides take precedence") {
    const auto c = Config::parse(kSmallPrice);
    Overrides o;
    o.grid_N = 80;
    const auto g = pide_grid_from(c, o);
    CHECK(g.N == 80);
    CHECK(g.M == 10);
}

TEST_CASE("price run writes data and metadata") {
    const auto d = scratch_dir("price");
    RunConfig rc;
    rc.command = Command::Price;
    rc.config_path = write_file(d / "p.cfg", kSmallPrice);
    rc.out_dir = (d / "out").string();
    const auto r = run(rc);
    CHECK(r.exit_code == kExitOk);
    CHECK(fs::exists(d / "out" / "price.txt"));
    const std::string meta = read_file(d / "out" / "price.meta");
    CHECK(meta.find("config_hash " + Config::load(rc.config_path).hash()) != std::string::npos);
}

TEST_CASE("exit codes") {
    const auto d = scratch_dir("exit");
    RunConfig rc;
    rc.out_dir = (d / "out").string();

    rc.command = Command::Price;
    rc.config_path = (d / "missing.cfg").string();
    CHECK(run(rc).exit_code == kExitConfig);

    rc.config_path = write_file(d / "bad.cfg", "[contract\n");
    CHECK(run(rc).exit_code == kExitConfig);

    rc.config_path = write_file(d / "dom.cfg", std::string(kSmallPrice) + "measure = vg\ntheta = 0\njump_sigma = 0.2\nkappa = -1\n");
    CHECK(run(rc).exit_code == kExitConfig);

    rc.config_path = write_file(d / "rho.cfg", std::string(kSmallPrice) + "rho = 0.5\nstrategy = tanh\nstrategy_a = 1\nstrategy_s = 0.2\n");
    const auto r = run(rc);
    CHECK(r.exit_code == kExitAssumption);
    CHECK_FALSE(r.message.empty());

    rc.command = Command::Alpha;
    rc.config_path = write_file(d / "alpha.cfg", "[portfolio]\nmu = 0.1 0.05\n[covariance]\n1 2\n2 1\n");
    CHECK(run(rc).exit_code == kExitConfig);
}

TEST_CASE("alpha run on the pension example") {
    const auto d = scratch_dir("alpha");
    RunConfig rc;
    rc.command = Command::Alpha;
    rc.config_path = std::string(LEVYPIDE_SOURCE_DIR) + "/configs/pension_alpha.cfg";
    rc.out_dir = d.string();
    const auto r = run(rc);
    REQUIRE(r.exit_code == kExitOk);
    CHECK(fs::exists(d / "alpha.txt"));
    CHECK(fs::exists(d / "alpha_discrete.txt"));
    CHECK(read_file(d / "alpha_summary.txt").find("phi_minus") != std::string::npos);
}

}
