#include <doctest.h>

#include "volclust/errors.hpp"
#include "volclust/measure.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace volclust;

namespace {

ModelSpec ou(double c, double m = 0.0) {
    ModelSpec s;
    s.sigma2 = CoefficientFunction::constant(c);
    s.m = m;
    return s;
}

} // namespace

TEST_CASE("constant vol-of-vol gives a Gaussian") {
    for (double c : {0.2, 0.5}) {
        for (double m : {0.0, 0.7}) {
            const auto mu = build_invariant_measure(ou(c, m), 1e-13);
            double worst = 0.0;
            for (std::size_t i = 0; i < mu.size(); ++i) {
                const double y = mu.grid[i] - m;
                const double g = std::exp(-y * y / (c * c)) / (c * std::sqrt(std::numbers::pi));
                worst = std::max(worst, std::abs(mu.density[i] - g));
            }
            CHECK(worst < 1e-8);
            CHECK(std::abs(mu.mean() - m) < 1e-10);
        }
    }
}

TEST_CASE("standard deviation for sigma2 = 0.2") {
    const auto mu = build_invariant_measure(ou(0.2), 1e-13);
    CHECK(std::abs(mu.std_dev() - 0.2 / std::sqrt(2.0)) < 1e-6);
}

TEST_CASE("normalisation and density sign") {
    auto s = arctangent_example();
    s.sigma2 = CoefficientFunction::arctangent(0.3, 0.2);
    const auto mu = build_invariant_measure(s, 1e-13);
    CHECK(std::abs(average(mu, CoefficientFunction::constant(1.0)) - 1.0) < 1e-8);
    for (double d : mu.density) CHECK(d >= 0.0);
}

TEST_CASE("tabulated vol-of-vol against adaptive quadrature") {
    ModelSpec s;
    s.sigma2 = CoefficientFunction::tabulated({-1.0, -0.3, 0.0, 0.4, 1.2}, {0.35, 0.25, 0.2, 0.3, 0.22});
    s.m = 0.1;
    const auto mu = build_invariant_measure(s, 1e-13);
    CHECK(std::abs(average(mu, CoefficientFunction::constant(1.0)) - 1.0) < 1e-8);

    // Closed form: pi(y) = exp(int_0^y 2(m - z)/sigma2^2 dz) / sigma2(y)^2 / Z,
    // integrated piecewise between the kinks of the table.
    const std::vector<double> kinks{-1.0, -0.3, 0.0, 0.4, 1.2};
    auto exponent = [&](double y) {
        auto g = [&](double z) { return 2.0 * (s.m - z) / (s.sigma2(z) * s.sigma2(z)); };
        std::vector<double> cuts{0.0, y};
        for (double k : kinks) {
            if ((k > 0.0 && k < y) || (k < 0.0 && k > y)) cuts.push_back(k);
        }
        std::sort(cuts.begin(), cuts.end());
        double v = 0.0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            v += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, cuts[k], cuts[k + 1],
                                                                               15, 1e-14);
        }
        return y >= 0.0 ? v : -v;
    };
    auto unnorm = [&](double y) { return std::exp(exponent(y)) / (s.sigma2(y) * s.sigma2(y)); };

    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> pick(mu.size() / 4, 3 * mu.size() / 4);
    const std::size_t ref = mu.size() / 2;
    for (int k = 0; k < 10; ++k) {
        const std::size_t i = pick(rng);
        const double got = mu.density[i] / mu.density[ref];
        const double want = unnorm(mu.grid[i]) / unnorm(mu.grid[ref]);
        CHECK(got == doctest::Approx(want).epsilon(1e-6));
    }
}

TEST_CASE("generator annihilation") {
    auto s = arctangent_example();
    s.sigma2 = CoefficientFunction::arctangent(0.3, 0.2);
    s.m = 0.2;
    for (const auto& model : {arctangent_example(), s}) {
        const auto mu = build_invariant_measure(model, 1e-13);
        auto gen = [&](auto f1, auto f2) {
            return average(mu, [&](double y) {
                const double v = model.sigma2(y);
                return (model.m - y) * f1(y) + 0.5 * v * v * f2(y);
            });
        };
        CHECK(std::abs(gen([](double y) { return 2.0 * y; }, [](double) { return 2.0; })) < 5e-6);
        CHECK(std::abs(gen([](double y) { return std::cos(y); },
                           [](double y) { return -std::sin(y); })) < 5e-6);
        CHECK(std::abs(gen([](double y) { return -2.0 * y * std::exp(-y * y); },
                           [](double y) { return (4.0 * y * y - 2.0) * std::exp(-y * y); })) < 5e-6);
    }
}

TEST_CASE("average of sigma1^2 for the arctangent model") {
    const auto s = arctangent_example();
    const auto mu = build_invariant_measure(s, 1e-13);
    const double got = average(mu, [&](double y) { return s.sigma1(y) * s.sigma1(y); });
    // E[(0.3 + atan(Y)/(2 pi))^2] with Y ~ N(0, 0.02); the odd term vanishes.
    boost::math::quadrature::sinh_sinh<double> ss;
    const double var = 0.02;
    const double e_atan2 = ss.integrate([&](double y) {
        const double a = std::atan(y);
        return a * a * std::exp(-y * y / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
    });
    const double k = 0.5 / std::numbers::pi;
    CHECK(got > 0.09);
    CHECK(got == doctest::Approx(0.09 + k * k * e_atan2).epsilon(1e-9));
    CHECK(std::abs(average(mu, [&](double y) { return s.sigma1(y) * s.sigma1(y) - got; })) < 1e-10);
}

TEST_CASE("doubling the quadrature resolution") {
    const auto s = arctangent_example();
    const auto coarse = build_invariant_measure(s, 1e-13);
    const auto fine = build_invariant_measure(s, 1e-13, {8001});
    auto f = [&](double y) { return s.sigma1(y) * s.sigma1(y) * std::cos(y); };
    CHECK(std::abs(average(coarse, f) - average(fine, f)) < 1e-7);
}

TEST_CASE("non-decaying tails are rejected") {
    CHECK_THROWS_AS(build_invariant_measure(ou(100.0), 1e-13), NonIntegrable);
}

TEST_CASE("cumulative trapezoid") {
    const std::vector<double> g{0.0, 1.0, 2.0, 3.0};
    const auto c = cumulative_trapezoid(g, {0.0, 1.0, 2.0, 3.0});
    CHECK(c[0] == 0.0);
    CHECK(c[3] == doctest::Approx(4.5));
}
