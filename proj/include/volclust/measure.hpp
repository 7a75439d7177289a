#pragma once

/**
 * @file measure.hpp
 * @brief Invariant distribution of the fast factor.
 *
 * The generator (m - y) d/dy + sigma2(y)^2/2 d^2/dy^2 has the stationary
 * density
 *
 *   pi(y) = Z^{-1} exp( int_0^y 2(m - z)/sigma2(z)^2 dz ) / sigma2(y)^2.
 *
 * We tabulate pi on a uniform grid over a truncated domain [m - L, m + L],
 * doubling L until the unnormalised density at both endpoints falls below
 * tol times its interior maximum. All averages are composite trapezoid sums
 * on that grid.
 */

#include "volclust/model.hpp"

#include <functional>
#include <vector>

namespace volclust {

struct MeasureOptions {
    std::size_t nodes = 8001;        ///< odd, so that m is a node
    double initial_half_width = 1.0; ///< first L tried
    double max_half_width = 200.0;   ///< NonIntegrable beyond this
};

struct InvariantMeasure {
    std::vector<double> grid;     ///< strictly increasing, uniform
    std::vector<double> density;  ///< normalised pi at the nodes
    std::vector<double> log_density; ///< log of unnormalised pi, anchored at y = m
    double Z = 0.0;     ///< normalising constant with the y = 0 anchor (may overflow to inf)
    double log_Z = 0.0; ///< log Z, always finite
    double y_lo = 0.0;
    double y_hi = 0.0;

    double spacing() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
    std::size_t size() const noexcept { return grid.size(); }

    /// Trapezoid weight of node i (h/2 at the ends, h elsewhere).
    double weight(std::size_t i) const;

    double mean() const;
    double std_dev() const;
};

InvariantMeasure build_invariant_measure(const ModelSpec& spec, double tol,
                                         const MeasureOptions& options = {});

/// int f dpi by trapezoid quadrature on the measure grid.
double average(const InvariantMeasure& measure, const std::function<double(double)>& f);
double average(const InvariantMeasure& measure, const CoefficientFunction& f);

/// int_{y_lo}^{y_i} g(u) du for every node, composite trapezoid.
std::vector<double> cumulative_trapezoid(const std::vector<double>& grid,
                                         const std::vector<double>& values);

} // namespace volclust
