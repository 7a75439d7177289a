#include "volclust/poisson.hpp"

#include "volclust/errors.hpp"

#include <cfloat>
#include <cmath>

namespace volclust {

namespace {

struct Rhs {
    std::vector<double> f1;
    std::vector<double> f2;
};

Rhs centred_rhs(const ModelSpec& spec, const InvariantMeasure& mu) {
    const std::size_t n = mu.size();
    Rhs r{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = eval_coeffs(spec, mu.grid[i]);
        r.f1[i] = c.b * c.b / (2.0 * spec.gamma * c.sigma1 * c.sigma1);
        r.f2[i] = 0.5 * c.sigma1 * c.sigma1;
    }
    double a1 = 0.0, a2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = mu.weight(i) * mu.density[i];
        a1 += w * r.f1[i];
        a2 += w * r.f2[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        r.f1[i] -= a1;
        r.f2[i] -= a2;
    }
    return r;
}

// Cell weights for int f pi over one cell, divided by pi at the far end,
// with ln pi linear and f linear on the cell: h (w_near f_near + w_far f_far).
// a = ln pi(far) - ln pi(near). Plain trapezoid weights are far less
// accurate where pi decays steeply.
struct CellWeights {
    double near, far;
};

CellWeights fitted_weights(double a) {
    double e0, e1; // int_0^1 e^{a(s-1)} ds and int_0^1 s e^{a(s-1)} ds
    if (std::abs(a) < 0.1) {
        // e0 = sum (-a)^k/(k+1)!, e1 = sum (-a)^k/(k+2)!
        e0 = 0.0, e1 = 0.0;
        double term = 1.0; // (-a)^k / k!
        for (int k = 0; k < 14; ++k) {
            e0 += term / (k + 1);
            e1 += term / ((k + 1) * (k + 2));
            term *= -a / (k + 1);
        }
    } else {
        e0 = -std::expm1(-a) / a;
        e1 = (1.0 - e0) / a;
    }
    return {e0 - e1, e1};
}

// v'(y) for one centred rhs. The ratio R = (cumulative integral of f p)/p
// is advanced in log space so that pi itself never has to be formed.
std::vector<double> phi_prime(const ModelSpec& spec, const InvariantMeasure& mu,
                              std::vector<double> f, double tol) {
    const std::size_t n = mu.size();
    const std::size_t c = n / 2;
    const double h = mu.spacing();
    const auto& lp = mu.log_density;
    std::vector<double> out(n, 0.0);

    // Re-centre f under the same cell rule, so that both branches meet at c.
    double mass = 0.0, mean = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const auto w = fitted_weights(lp[i] - lp[i - 1]);
        mass += mu.density[i] * (w.near + w.far);
        mean += mu.density[i] * (w.near * f[i - 1] + w.far * f[i]);
    }
    for (double& v : f) v -= mean / mass;

    // Normalised cumulative integrals for the underflow diagnostic.
    auto check = [&](std::size_t i, double cumulative) {
        if (mu.density[i] < DBL_MIN && std::abs(cumulative) > tol) {
            throw DegenerateDensity("invariant density underflows at y = " +
                                    std::to_string(mu.grid[i]) +
                                    " while the Poisson integral is still " +
                                    std::to_string(cumulative) + " (domain too wide)");
        }
    };

    double ratio = 0.0;
    double cum = 0.0;
    for (std::size_t i = 1; i <= c; ++i) {
        const double q = std::exp(lp[i - 1] - lp[i]);
        const auto w = fitted_weights(lp[i] - lp[i - 1]);
        ratio = ratio * q + h * (w.near * f[i - 1] + w.far * f[i]);
        cum += 0.5 * h * (f[i - 1] * mu.density[i - 1] + f[i] * mu.density[i]);
        check(i, cum);
        const double s2 = spec.sigma2(mu.grid[i]);
        out[i] = 2.0 * ratio / (s2 * s2);
    }
    ratio = 0.0;
    cum = 0.0;
    for (std::size_t i = n - 1; i-- > c + 1;) {
        const double q = std::exp(lp[i + 1] - lp[i]);
        const auto w = fitted_weights(lp[i] - lp[i + 1]);
        ratio = ratio * q + h * (w.near * f[i + 1] + w.far * f[i]);
        cum += 0.5 * h * (f[i + 1] * mu.density[i + 1] + f[i] * mu.density[i]);
        check(i, cum);
        const double s2 = spec.sigma2(mu.grid[i]);
        out[i] = -2.0 * ratio / (s2 * s2);
    }
    return out;
}

} // namespace

double GroupConstants::sigma1_bar() const { return std::sqrt(sigma1_bar_sq); }

PhiDerivatives solve_phi_derivatives(const ModelSpec& spec, const InvariantMeasure& measure,
                                     double tol) {
    require_valid(spec);
    if (measure.log_density.size() != measure.size() || measure.size() < 5) {
        throw ConfigError("measure is not tabulated on a usable grid");
    }
    const auto rhs = centred_rhs(spec, measure);
    return {measure.grid, phi_prime(spec, measure, rhs.f1, tol),
            phi_prime(spec, measure, rhs.f2, tol)};
}

GroupConstants compute_group_constants(const ModelSpec& spec, const InvariantMeasure& measure,
                                       const PhiDerivatives& phis) {
    if (phis.grid.size() != measure.size() || phis.phi1_prime.size() != measure.size() ||
        phis.phi2_prime.size() != measure.size()) {
        throw ConfigError("phi derivatives and measure are on different grids");
    }
    const std::size_t n = measure.size();
    GroupConstants gc;
    gc.skew_prefactor = spec.skew_prefactor();

    for (std::size_t i = 0; i < n; ++i) {
        const auto c = eval_coeffs(spec, measure.grid[i]);
        const double w = measure.weight(i) * measure.density[i];
        gc.sigma1_bar_sq += w * c.sigma1 * c.sigma1;
        gc.avg_b2_over_s2 += w * c.b * c.b / (c.sigma1 * c.sigma1);
    }

    double a = 0.0, at = 0.0, bb = 0.0;
    std::vector<double> excess(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = eval_coeffs(spec, measure.grid[i]);
        const double w = measure.weight(i) * measure.density[i];
        a += w * c.sigma1 * c.sigma2 * phis.phi2_prime[i];
        at += w * c.b * c.sigma2 / c.sigma1 * phis.phi1_prime[i];
        bb += w * c.b * c.sigma2 / c.sigma1 * phis.phi2_prime[i];
        excess[i] = (c.sigma1 * c.sigma1 - gc.sigma1_bar_sq) * measure.density[i];
    }
    gc.A = spec.rho * a;
    gc.A_tilde = gc.skew_prefactor * at;
    gc.B = gc.skew_prefactor * bb;

    // Double-integral route: inner integral anchored at -inf everywhere,
    // outer integral against dy.
    const auto inner = cumulative_trapezoid(measure.grid, excess);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = eval_coeffs(spec, measure.grid[i]);
        const double w = measure.weight(i);
        gc.j_sigma += w * c.sigma1 / c.sigma2 * inner[i];
        gc.j_b += w * c.b / (c.sigma1 * c.sigma2) * inner[i];
    }
    gc.A_alt = spec.rho * gc.j_sigma;
    gc.B_alt = gc.skew_prefactor * gc.j_b;
    return gc;
}

GroupConstants group_constants(const ModelSpec& spec) {
    const auto mu = build_invariant_measure(spec, 1e-13);
    return compute_group_constants(spec, mu, solve_phi_derivatives(spec, mu));
}

PoissonResidual poisson_residuals(const ModelSpec& spec, const InvariantMeasure& measure,
                                  const PhiDerivatives& phis, double interior_fraction) {
    const auto rhs = centred_rhs(spec, measure);
    const auto phi1 = cumulative_trapezoid(phis.grid, phis.phi1_prime);
    const auto phi2 = cumulative_trapezoid(phis.grid, phis.phi2_prime);
    const double h = measure.spacing();
    const double half = 0.5 * (measure.y_hi - measure.y_lo);

    PoissonResidual res;
    for (std::size_t i = 1; i + 1 < measure.size(); ++i) {
        const double y = measure.grid[i];
        if (std::abs(y - spec.m) > interior_fraction * half) continue;
        const double s2 = spec.sigma2(y);
        auto apply = [&](const std::vector<double>& v) {
            const double d1 = (v[i + 1] - v[i - 1]) / (2.0 * h);
            const double d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
            return (spec.m - y) * d1 + 0.5 * s2 * s2 * d2;
        };
        res.phi1 = std::max(res.phi1, std::abs(apply(phi1) - rhs.f1[i]));
        res.phi2 = std::max(res.phi2, std::abs(apply(phi2) - rhs.f2[i]));
    }
    return res;
}

} // namespace volclust
