#pragma once

/**
 * @file poisson.hpp
 * @brief Poisson equations of the fast factor and the group constants.
 *
 * For a centred right-hand side f (int f dpi = 0) the equation
 * (m - y) v' + sigma2^2/2 v'' = f has the bounded-derivative solution
 *
 *   v'(y) =  2/(sigma2^2 pi(y)) int_{-inf}^y f(u) pi(u) du      (y <= m)
 *         = -2/(sigma2^2 pi(y)) int_y^{+inf} f(u) pi(u) du      (y >  m)
 *
 * The two forms agree because f is centred; each is used on the side where
 * it does not cancel. Only v' is ever needed, so v itself (defined up to a
 * constant) is only reconstructed for residual checks.
 */

#include "volclust/measure.hpp"
#include "volclust/model.hpp"

#include <vector>

namespace volclust {

struct PhiDerivatives {
    std::vector<double> grid;       ///< same nodes as the measure
    std::vector<double> phi1_prime; ///< rhs b^2/(2 gamma sigma1^2) - its average
    std::vector<double> phi2_prime; ///< rhs (sigma1^2 - avg sigma1^2)/2
};

struct GroupConstants {
    double sigma1_bar_sq = 0.0;  ///< <sigma1^2>
    double avg_b2_over_s2 = 0.0; ///< <b^2/sigma1^2>
    double A = 0.0;              ///< <rho sigma1 sigma2 phi2'>
    double A_tilde = 0.0;        ///< c <b sigma2/sigma1 phi1'>
    double B = 0.0;              ///< c <b sigma2/sigma1 phi2'>
    double A_alt = 0.0;          ///< rho * j_sigma (double-integral route)
    double B_alt = 0.0;          ///< c * j_b (double-integral route)
    double j_sigma = 0.0;        ///< int sigma1/sigma2 I(y) dy
    double j_b = 0.0;            ///< int b/(sigma1 sigma2) I(y) dy
    double skew_prefactor = 0.0; ///< c = rho + eta sqrt(1 - rho^2)

    double sigma1_bar() const;
};

/// tol bounds the cumulative integral allowed at nodes where pi underflows.
PhiDerivatives solve_phi_derivatives(const ModelSpec& spec, const InvariantMeasure& measure,
                                     double tol = 1e-12);

/// Both routes for A and B; here I(y) = int_{-inf}^y (sigma1^2 - <sigma1^2>) dpi.
GroupConstants compute_group_constants(const ModelSpec& spec, const InvariantMeasure& measure,
                                       const PhiDerivatives& phis);

/// Measure + phi' + constants with default options and tolerance 1e-13.
GroupConstants group_constants(const ModelSpec& spec);

struct PoissonResidual {
    double phi1 = 0.0; ///< sup |B phi1 - f1| on the interior
    double phi2 = 0.0;
};

/// Integrates phi' to phi, applies the generator by centred second
/// differences and compares with the centred right-hand sides on the
/// nodes with |y - m| <= interior_fraction * L.
PoissonResidual poisson_residuals(const ModelSpec& spec, const InvariantMeasure& measure,
                                  const PhiDerivatives& phis, double interior_fraction = 0.8);

} // namespace volclust
