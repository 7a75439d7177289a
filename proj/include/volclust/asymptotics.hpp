#pragma once

/**
 * @file asymptotics.hpp
 * @brief Leading-order and sqrt(eps)-corrected indifference put price and
 *        implied volatility.
 *
 * With P0 the Black-Scholes put at the averaged volatility sqrt(<sigma1^2>),
 *
 *   P1 = tau [ -A P0_xxx + (A + B) P0_xx - B P0_x ],
 *   I  = sigma_bar + sqrt(eps) [ A x / (sigma_bar^3 tau) + (B - A/2) / sigma_bar ]
 *      = a * LMMR + d,   LMMR = -x / tau.
 *
 * Neither carries the risk aversion gamma: A~ enters u1 and u1~ identically
 * and cancels in the price.
 */

#include "volclust/model.hpp"
#include "volclust/poisson.hpp"

namespace volclust {

/// Accuracy of a reported quantity; the o(sqrt(eps)) remainder is not modelled.
enum class ExpansionOrder { sqrt_eps };

struct AsymptoticPrice {
    double P0 = 0.0;
    double P1 = 0.0;
    double corrected = 0.0; ///< P0 + sqrt(eps) P1
    /// Diagnostics on the risk-measure side: u0 solves the averaged equation
    /// from -payoff, u1 and u1~ are the sqrt(eps) terms of u and u~.
    double u0 = 0.0;
    double u0_tilde = 0.0;
    double u1 = 0.0;
    double u1_tilde = 0.0;
    bool iv_defined = true; ///< false at tau = 0
    ExpansionOrder order = ExpansionOrder::sqrt_eps;
};

struct CorrectedIV {
    double sigma_bar = 0.0;
    double a = 0.0; ///< slope in LMMR
    double d = 0.0; ///< intercept
    double epsilon = 0.0;
    ExpansionOrder order = ExpansionOrder::sqrt_eps;

    /// a * (-x/tau) + d. Throws ConfigError at tau <= 0.
    double iv(double tau, double x) const;
    static double lmmr(double tau, double x) { return -x / tau; }
};

AsymptoticPrice asymptotic_price(const GroupConstants& gc, const ModelSpec& spec, double tau,
                                 double x);

CorrectedIV corrected_iv(const GroupConstants& gc, const ModelSpec& spec);

/// I1 = P1 / vega. Throws DegenerateVega if vega < 1e-300.
double iv_correction_from_price(double P1, double vega);

} // namespace volclust
