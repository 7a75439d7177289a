// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include "volclust/asymptotics.hpp"
#include "volclust/black_scholes.hpp"
#include "volclust/calibrate.hpp"
#include "volclust/csv.hpp"
#include "volclust/measure.hpp"
#include "volclust/parallel.hpp"
#include "volclust/pde.hpp"
#include "volclust/poisson.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

using namespace volclust;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Probe set: tau = 0.25, |x| <= 1, |y - m| <= 2 std(pi).
std::vector<ProbePoint> probe_set(const ModelSpec& s) {
    const double sd = build_invariant_measure(s, 1e-13).std_dev();
    std::vector<ProbePoint> p;
    for (int i = -4; i <= 4; ++i) {
        for (int k = -2; k <= 2; ++k) p.push_back({0.25, 0.25 * i, s.m + k * sd});
    }
    return p;
}

// Random coefficient: arctangent or a table, bounded away from zero when
// `positive` holds. Tables are skipped when `smooth` is set.
CoefficientFunction random_coefficient(std::mt19937_64& rng, double lo, double hi, bool positive,
                                       bool smooth) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (smooth || u(rng) < 0.5) {
        const double base = lo + (hi - lo) * u(rng);
        double amp = (u(rng) - 0.5) * (hi - lo);
        if (positive) amp = std::clamp(amp, -1.6 * (base - 0.05), 1.6 * (base - 0.05));
        return CoefficientFunction::arctangent(base, amp);
    }
    std::vector<double> grid, values;
    const int n = 4 + static_cast<int>(u(rng) * 5);
    double y = -1.0 - u(rng);
    for (int k = 0; k < n; ++k) {
        grid.push_back(y);
        values.push_back(lo + (hi - lo) * u(rng));
        y += 0.2 + 0.6 * u(rng);
    }
    return CoefficientFunction::tabulated(grid, values);
}

ModelSpec random_model(std::mt19937_64& rng, bool smooth = false) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ModelSpec s;
    s.sigma1 = random_coefficient(rng, 0.1, 0.5, true, smooth);
    s.sigma2 = random_coefficient(rng, 0.15, 0.45, true, smooth);
    s.b = random_coefficient(rng, -1.0, 2.0, false, smooth);
    s.m = u(rng) - 0.5;
    s.rho = 1.6 * u(rng) - 0.8;
    s.eta = u(rng) - 0.5;
    s.gamma = 0.5 + 2.0 * u(rng);
    s.epsilon = 0.004;
    require_valid(s);
    return s;
}

Outcome ac1() {
    const auto s = arctangent_example();
    const auto rows = accuracy_sweep(s, {0.04, 0.01, 0.0025}, probe_set(s));
    bool decreasing = true;
    double lo = HUGE_VAL, hi = 0.0;
    std::string d;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (k > 0 && !(rows[k].error < rows[k - 1].error)) decreasing = false;
        lo = std::min(lo, rows[k].normalized);
        hi = std::max(hi, rows[k].normalized);
        d += "eps=" + fmt(rows[k].epsilon) + " E=" + fmt(rows[k].error) +
             " E/(-eps ln eps)=" + fmt(rows[k].normalized) + "; ";
    }
    return {decreasing && hi / lo < 3.0, d + "max/min=" + fmt(hi / lo) + " (< 3)"};
}

Outcome ac2() {
    const double etas[] = {-0.25, 0.0, 0.25};
    std::vector<double> lms;
    for (int k = 0; k <= 60; ++k) lms.push_back(-0.3 + 0.01 * k);
    std::vector<std::vector<double>> iv(3);
    parallel_for(3, worker_count(), [&](std::size_t e) {
        auto s = arctangent_example();
        s.eta = etas[e];
        GridRequest r;
        r.tau = 0.25;
        const auto surf = price_surface(s, make_grid(s, build_invariant_measure(s, 1e-13), r));
        for (double lm : lms) iv[e].push_back(implied_vol(surf.price_at(-lm, s.m), 0.25, -lm, s.strike));
    });
    bool monotone = true, ordered = true;
    double r2min = 1.0;
    for (std::size_t e = 0; e < 3; ++e) {
        std::vector<IVQuote> q;
        for (std::size_t k = 0; k < lms.size(); ++k) {
            if (k > 0 && !(iv[e][k] < iv[e][k - 1])) monotone = false;
            q.push_back({1.0, -lms[k], iv[e][k]});
        }
        r2min = std::min(r2min, fit_affine(q).r_squared);
    }
    for (std::size_t k = 0; k < lms.size(); ++k) {
        if (!(iv[0][k] > iv[1][k] && iv[1][k] > iv[2][k])) ordered = false;
    }
    return {monotone && ordered && r2min > 0.98,
            std::string("monotone=") + (monotone ? "yes" : "no") + " ordered=" +
                (ordered ? "yes" : "no") + " min r^2=" + fmt(r2min) + " (> 0.98); iv(lm=0)=" +
                fmt(iv[0][30]) + "/" + fmt(iv[1][30]) + "/" + fmt(iv[2][30])};
}

Outcome ac3() {
    const auto s = arctangent_example();
    const auto rows = accuracy_sweep(s, {0.004}, probe_set(s));
    return {rows[0].error < 0.02 * s.strike,
            "max |P - (P0 + sqrt(eps) P1)| = " + fmt(rows[0].error) + " (< " +
                fmt(0.02 * s.strike) + ")"};
}

Outcome ac4() {
    ModelSpec s;
    s.sigma1 = CoefficientFunction::constant(0.2);
    s.b = CoefficientFunction::constant(0.0);
    s.rho = -0.3;
    s.epsilon = 1.0;
    s.maturity = 0.25;
    SolverOptions direct;
    direct.reference = ReferenceMode::none;
    const auto g = make_grid(s, build_invariant_measure(s, 1e-13));
    const auto surf = price_surface(s, g, direct);
    double err = 0.0;
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i)
            if (std::abs(g.x_nodes[i]) <= 2.0)
                err = std::max(err, std::abs(surf.price(i, j) -
                                             bs_put({0.25, g.x_nodes[i], s.strike, 0.2})));
    const auto gc = group_constants(s);
    double p1 = 0.0;
    for (double x = -2.0; x <= 2.0; x += 0.1) p1 = std::max(p1, std::abs(asymptotic_price(gc, s, 0.25, x).P1));
    const auto iv = corrected_iv(gc, s);
    const bool flat = std::abs(iv.a) < 1e-12 && std::abs(iv.d - 0.2) < 1e-14;
    return {err < 2e-3 * s.strike && p1 < 1e-12 && flat,
            "max |P - BS| = " + fmt(err) + " (< 0.2), max |P1| = " + fmt(p1) + ", iv slope " +
                fmt(iv.a) + " intercept " + fmt(iv.d)};
}

Outcome ac5() {
    std::mt19937_64 rng(20240501);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
        const auto s = random_model(rng);
        const auto gc = group_constants(s);
        worst = std::max(worst, std::abs(gc.A - gc.A_alt) / std::abs(gc.A));
        worst = std::max(worst, std::abs(gc.B - gc.B_alt) / std::abs(gc.B));
    }
    return {worst <= 1e-5, "max relative gap = " + fmt(worst) + " (<= 1e-5)"};
}

Outcome ac6() {
    std::mt19937_64 rng(777);
    std::vector<ModelSpec> models{arctangent_example()};
    // Second differences are only first order across table breakpoints, so
    // the residual check uses smooth coefficients.
    for (int k = 0; k < 3; ++k) models.push_back(random_model(rng, true));
    double worst = 0.0;
    for (const auto& s : models) {
        const auto mu = build_invariant_measure(s, 1e-13);
        const auto r = poisson_residuals(s, mu, solve_phi_derivatives(s, mu));
        worst = std::max({worst, r.phi1, r.phi2});
    }
    return {worst <= 1e-4, "max sup-norm residual = " + fmt(worst) + " (<= 1e-4)"};
}

Outcome ac7() {
    auto s = arctangent_example();
    bool same = true;
    double p1 = 0.0, a = 0.0, d = 0.0;
    bool first = true;
    for (double g : {0.5, 1.0, 4.0}) {
        s.gamma = g;
        const auto gc = group_constants(s);
        const auto iv = corrected_iv(gc, s);
        const double q = asymptotic_price(gc, s, 0.25, 0.1).P1;
        if (!first && (q != p1 || iv.a != a || iv.d != d)) same = false;
        p1 = q, a = iv.a, d = iv.d, first = false;
    }
    return {same, std::string("bit-identical=") + (same ? "yes" : "no") + " (P1=" + fmt(p1) +
                      ", a=" + fmt(a) + ", d=" + fmt(d) + ")"};
}

Outcome ac8() {
    auto s = arctangent_example();
    s.eta = 0.25;
    const auto gc = group_constants(s);
    const auto iv = corrected_iv(gc, s);
    std::vector<IVQuote> q;
    for (double tau : {0.1, 0.25, 0.5})
        for (double x = -0.3; x <= 0.3001; x += 0.05) q.push_back({tau, x, iv.iv(tau, x)});
    const auto fit = calibrate(q, gc.sigma1_bar(), s.epsilon);
    const double gap = std::max(std::abs(fit.A_recovered - gc.A), std::abs(fit.B_recovered - gc.B));
    auto blind = s;
    blind.eta = 0.0;
    const double eta = calibrate_from_surface(q, blind, gc.sigma1_bar(), s.epsilon).eta;
    std::vector<IVQuote> line;
    for (double tau : {0.25, 0.5, 1.0})
        for (double l = -0.9; l <= 0.9001; l += 0.15) line.push_back({tau, -l * tau, -0.154 * l + 0.149});
    const auto published = fit_affine(line);
    const double ad = std::max(std::abs(published.a + 0.154), std::abs(published.d - 0.149));
    return {gap < 1e-10 && std::abs(eta - 0.25) < 1e-3 && ad < 1e-12,
            "(A,B) gap " + fmt(gap) + " (< 1e-10), eta " + fmt(eta) + " (0.25 +- 1e-3), (a,d) gap " +
                fmt(ad) + " (< 1e-12)"};
}

Outcome ac9() {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ux(-0.5, 0.5), us(0.05, 1.0), ut(0.05, 2.0);
    double iv_gap = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double x = ux(rng), sg = us(rng), t = ut(rng);
        iv_gap = std::max(iv_gap, std::abs(implied_vol(bs_put({t, x, 100.0, sg}), t, x, 100.0) - sg));
    }
    const auto mu = build_invariant_measure(arctangent_example(), 1e-13);
    const double mass = std::abs(average(mu, CoefficientFunction::constant(1.0)) - 1.0);
    double gauss = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double y = mu.grid[i];
        const double g = std::exp(-y * y / 0.04) / (0.2 * std::sqrt(std::numbers::pi));
        gauss = std::max(gauss, std::abs(mu.density[i] - g));
    }
    return {iv_gap < 1e-8 && mass < 1e-8 && gauss < 1e-8,
            "iv round trip " + fmt(iv_gap) + ", mass error " + fmt(mass) + ", Gaussian gap " +
                fmt(gauss) + " (all < 1e-8)"};
}

} // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> checks[] = {
        {"AC-1", ac1}, {"AC-2", ac2}, {"AC-3", ac3}, {"AC-4", ac4}, {"AC-5", ac5},
        {"AC-6", ac6}, {"AC-7", ac7}, {"AC-8", ac8}, {"AC-9", ac9},
    };
    int failed = 0;
    for (const auto& [name, fn] : checks) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << name << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  ["
                  << fmt(secs) << " s]" << std::endl;
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
