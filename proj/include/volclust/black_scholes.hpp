#pragma once

/**
 * @file black_scholes.hpp
 * @brief Zero-rate Black-Scholes put in log-moneyness x = ln(S/K).
 *
 *   P(tau, x; sigma) = K N(-d2) - K e^x N(-d1),
 *   d1,2 = (x +- sigma^2 tau / 2) / (sigma sqrt(tau)).
 */

namespace volclust {

struct BSInputs {
    double tau = 0.0;    ///< time to maturity, >= 0
    double x = 0.0;      ///< ln(S/K)
    double strike = 0.0; ///< > 0
    double sigma = 0.0;  ///< > 0

    double d1() const;
    double d2() const;
};

double norm_cdf(double z);
double norm_pdf(double z);

/// tau = 0 gives the payoff max(K - K e^x, 0).
double bs_put(const BSInputs& in);

/// x-derivatives of the put price, orders one to three.
struct PutXDerivatives {
    double d1x = 0.0;
    double d2x = 0.0;
    double d3x = 0.0;
};

PutXDerivatives bs_put_dx_derivatives(const BSInputs& in);

/// P_xx - P_x = K e^x n(d1) / (sigma sqrt(tau)); the BS operator's kernel.
double bs_put_gamma_x(const BSInputs& in);

double bs_vega(const BSInputs& in);

/// Inverts bs_put in sigma: bisection on [1e-8, 5], then safeguarded Newton.
/// Throws OutOfBand unless max(K - K e^x, 0) < price < K, NoConvergence
/// after 200 iterations or when the root lies outside the search bracket.
double implied_vol(double price, double tau, double x, double strike);

} // namespace volclust
