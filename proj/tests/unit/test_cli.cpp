#include <doctest.h>

#include "volclust/cli.hpp"
#include "volclust/csv.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace volclust;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch() {
    const auto dir = fs::temp_directory_path() / "volclust_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path write_config(const std::string& name, const std::string& b, double eps) {
    const auto p = scratch() / name;
    std::ofstream os(p);
    os << "[model]\nb = " << b << "\nsigma1 = atan:0.3,0.5\nsigma2 = constant:0.2\nm = 0\n"
       << "rho = -0.2\nepsilon = " << eps << "\n[driver]\neta = 0\ngamma = 1\n"
       << "[option]\nstrike = 100\nmaturity = 0.25\n";
    return p;
}

csv::Table table(const std::string& text) {
    std::istringstream is(text);
    return csv::parse(is);
}

} // namespace

TEST_CASE("figure1 writes the affine surface") {
    const auto out = scratch() / "fig1.csv";
    const auto r = run({"figure1", "--a", "-0.154", "--d", "0.149", "--out", out.string()});
    REQUIRE(r.code == 0);
    const auto t = csv::read(out);
    CHECK(t.rows.size() == 20 * 41);
    for (const auto& row : t.rows) {
        CHECK(std::abs(row[t.column("iv")] - (-0.154 * row[t.column("lmmr")] + 0.149)) < 1e-14);
    }
    CHECK(fs::exists(scratch() / "fig1.gp"));
    const std::string first = slurp(out);
    REQUIRE(run({"figure1", "--a", "-0.154", "--d", "0.149", "--out", out.string()}).code == 0);
    CHECK(slurp(out) == first);
}

TEST_CASE("constants row") {
    const auto cfg = write_config("arctan.ini", "constant:1", 0.004);
    const auto r = run({"constants", "--config", cfg.string()});
    REQUIRE(r.code == 0);
    const auto t = table(r.out);
    REQUIRE(t.rows.size() == 1);
    const auto& row = t.rows[0];
    const double A = row[t.column("A")], B = row[t.column("B")];
    CHECK(std::abs(A - row[t.column("A_alt")]) <= 1e-5 * (1 + std::abs(A)));
    CHECK(std::abs(B - row[t.column("B_alt")]) <= 1e-5 * (1 + std::abs(B)));
    CHECK(t.has_column("sigma1_bar_sq"));
    CHECK(t.has_column("avg_b2_over_s2"));
    CHECK(t.has_column("A_tilde"));
}

TEST_CASE("figure2 asymptotic curves") {
    const auto out = scratch() / "fig2.csv";
    REQUIRE(run({"figure2", "--out", out.string()}).code == 0);
    const auto t = csv::read(out);
    REQUIRE(t.rows.size() == 61);
    CHECK(t.header == std::vector<std::string>{"log_moneyness", "iv_eta_m025", "iv_eta_0",
                                                "iv_eta_p025"});
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const auto& r = t.rows[k];
        CHECK(r[1] > r[2]);
        CHECK(r[2] > r[3]);
        if (k > 0) {
            for (std::size_t c = 1; c <= 3; ++c) CHECK(r[c] < t.rows[k - 1][c]);
        }
    }
    CHECK(t.rows.front()[0] == -0.3);
    CHECK(t.rows.back()[0] == 0.3);
}

TEST_CASE("calibrate from a quote file") {
    const auto quotes = scratch() / "quotes.csv";
    {
        std::ofstream os(quotes);
        os << "tau,x,iv\n";
        for (double tau : {0.25, 0.5}) {
            for (double x : {-0.2, 0.0, 0.2}) os << tau << ',' << x << ',' << (-0.154 * -x / tau + 0.149) << '\n';
        }
    }
    const auto r = run({"calibrate", "--quotes", quotes.string(), "--sigma-bar", "0.2",
                        "--epsilon", "0.004"});
    REQUIRE(r.code == 0);
    const auto t = table(r.out);
    CHECK(t.rows[0][t.column("a")] == doctest::Approx(-0.154).epsilon(1e-12));
    CHECK(t.rows[0][t.column("d")] == doctest::Approx(0.149).epsilon(1e-12));

    const auto flat = write_config("flat.ini", "constant:0", 0.004);
    const auto u = run({"calibrate", "--quotes", quotes.string(), "--sigma-bar", "0.2",
                        "--epsilon", "0.004", "--config", flat.string()});
    CHECK(u.code == 3);
    CHECK(u.err.find('\n') == u.err.size() - 1);
}

TEST_CASE("measure dump and iv-surface") {
    const auto cfg = write_config("arctan.ini", "constant:1", 0.004);
    const auto m = run({"measure-dump", "--config", cfg.string()});
    REQUIRE(m.code == 0);
    CHECK(table(m.out).header == std::vector<std::string>{"y", "density"});
    const auto s = run({"iv-surface", "--config", cfg.string(), "--n-tau", "3", "--n-x", "5"});
    REQUIRE(s.code == 0);
    const auto t = table(s.out);
    CHECK(t.rows.size() == 15);
    CHECK(t.header == std::vector<std::string>{"tau", "x", "lmmr", "iv"});
}

TEST_CASE("pde solve on a small grid") {
    const auto cfg = write_config("fast.ini", "constant:1", 0.04);
    const auto out = scratch() / "surface.csv";
    const auto r = run({"pde", "solve", "--config", cfg.string(), "--nx", "201", "--tau", "0.05",
                        "--dt", "0.005", "--out", out.string()});
    REQUIRE(r.code == 0);
    const auto t = csv::read(out);
    CHECK(t.header == std::vector<std::string>{"tau", "x", "y", "u", "u_tilde", "P"});
    for (const auto& row : t.rows) {
        CHECK(row[5] == doctest::Approx(row[4] - row[3]).epsilon(1e-12));
        CHECK(row[5] >= -1e-2);
        CHECK(row[5] <= 100.0 + 1e-2);
    }
}

TEST_CASE("price subcommand") {
    const auto cfg = write_config("arctan.ini", "constant:1", 0.004);
    const auto r = run({"price", "--config", cfg.string(), "--points", "3"});
    REQUIRE(r.code == 0);
    CHECK(table(r.out).rows.size() == 3);
}

TEST_CASE("errors map to exit codes") {
    CHECK(run({}).code == 2);
    CHECK(run({"constants"}).code == 2);
    CHECK(run({"constants", "--config", "/nonexistent/model.ini"}).code == 2);
    CHECK(run({"figure1", "--bogus", "1", "--out", "x.csv"}).code == 2);
    const auto cfg = write_config("bad.ini", "constant:1", -1.0);
    const auto r = run({"constants", "--config", cfg.string()});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
    const auto fast = write_config("fast.ini", "constant:1", 0.04);
    CHECK(run({"pde-solve", "--config", fast.string(), "--xmin", "1", "--xmax", "0"}).code == 2);
    CHECK(run({"pde", "sweep", "--config", fast.string(), "--eps-list", "0.01,0.04"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}
