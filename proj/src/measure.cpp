#include "volclust/measure.hpp"

#include "volclust/errors.hpp"

#include <algorithm>
#include <cmath>

namespace volclust {

namespace {

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + h * static_cast<double>(i);
    g.back() = hi;
    return g;
}

// int_m^y 2(m - z)/sigma2(z)^2 dz - 2 ln sigma2(y), by cumulative trapezoid
// outward from the centre node (which sits exactly at m).
std::vector<double> log_unnormalised(const ModelSpec& spec, const std::vector<double>& grid) {
    const std::size_t n = grid.size();
    const std::size_t c = n / 2;
    std::vector<double> integrand(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s2 = spec.sigma2(grid[i]);
        integrand[i] = 2.0 * (spec.m - grid[i]) / (s2 * s2);
    }
    std::vector<double> exponent(n, 0.0);
    for (std::size_t i = c + 1; i < n; ++i) {
        exponent[i] = exponent[i - 1] +
                      0.5 * (grid[i] - grid[i - 1]) * (integrand[i] + integrand[i - 1]);
    }
    for (std::size_t k = c; k-- > 0;) {
        exponent[k] = exponent[k + 1] -
                      0.5 * (grid[k + 1] - grid[k]) * (integrand[k + 1] + integrand[k]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = exponent[i] - 2.0 * std::log(spec.sigma2(grid[i]));
    }
    return out;
}

// int_0^m 2(m - z)/sigma2(z)^2 dz, the shift between the m and 0 anchors.
double anchor_offset(const ModelSpec& spec, std::size_t nodes) {
    if (spec.m == 0.0) return 0.0;
    const auto g = uniform_grid(0.0, spec.m, nodes);
    std::vector<double> v(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double s2 = spec.sigma2(g[i]);
        v[i] = 2.0 * (spec.m - g[i]) / (s2 * s2);
    }
    return cumulative_trapezoid(g, v).back();
}

} // namespace

double InvariantMeasure::weight(std::size_t i) const {
    const double h = spacing();
    return (i == 0 || i + 1 == grid.size()) ? 0.5 * h : h;
}

double InvariantMeasure::mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) s += weight(i) * density[i] * grid[i];
    return s;
}

double InvariantMeasure::std_dev() const {
    const double mu = mean();
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = grid[i] - mu;
        s += weight(i) * density[i] * d * d;
    }
    return std::sqrt(s);
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& grid,
                                         const std::vector<double>& values) {
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        out[i] = out[i - 1] + 0.5 * (grid[i] - grid[i - 1]) * (values[i] + values[i - 1]);
    }
    return out;
}

InvariantMeasure build_invariant_measure(const ModelSpec& spec, double tol,
                                         const MeasureOptions& options) {
    require_valid(spec);
    if (!(tol > 0.0)) throw ConfigError("measure tolerance must be > 0");
    if (options.nodes < 5 || options.nodes % 2 == 0) {
        throw ConfigError("measure grid needs an odd node count >= 5");
    }

    for (double L = options.initial_half_width; L <= options.max_half_width; L *= 2.0) {
        auto grid = uniform_grid(spec.m - L, spec.m + L, options.nodes);
        auto logp = log_unnormalised(spec, grid);
        const double peak = *std::max_element(logp.begin(), logp.end());
        const double log_tol = std::log(tol);
        if (logp.front() - peak >= log_tol || logp.back() - peak >= log_tol) continue;

        InvariantMeasure mu;
        mu.grid = std::move(grid);
        mu.y_lo = mu.grid.front();
        mu.y_hi = mu.grid.back();
        mu.density.resize(mu.grid.size());
        double mass = 0.0;
        for (std::size_t i = 0; i < mu.grid.size(); ++i) {
            mu.density[i] = std::exp(logp[i] - peak);
        }
        mu.log_density = std::move(logp);
        for (std::size_t i = 0; i < mu.grid.size(); ++i) mass += mu.weight(i) * mu.density[i];
        for (double& d : mu.density) d /= mass;
        mu.log_Z = std::log(mass) + peak + anchor_offset(spec, options.nodes);
        mu.Z = std::exp(mu.log_Z);
        return mu;
    }
    throw NonIntegrable("invariant density has no tail decay within |y - m| <= " +
                        std::to_string(options.max_half_width) + " (check sigma2)");
}

double average(const InvariantMeasure& measure, const std::function<double(double)>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < measure.grid.size(); ++i) {
        s += measure.weight(i) * measure.density[i] * f(measure.grid[i]);
    }
    return s;
}

double average(const InvariantMeasure& measure, const CoefficientFunction& f) {
    return average(measure, [&f](double y) { return f(y); });
}

} // namespace volclust
