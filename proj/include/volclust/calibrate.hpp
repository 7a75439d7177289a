#pragma once

/**
 * @file calibrate.hpp
 * @brief Affine implied-volatility fit in LMMR and recovery of A, B (and eta).
 */

#include "volclust/model.hpp"

#include <filesystem>
#include <vector>

namespace volclust {

struct IVQuote {
    double tau = 0.0;    ///< > 0
    double x = 0.0;      ///< ln(S/K)
    double iv = 0.0;     ///< > 0
    double weight = 1.0; ///< >= 0
};

struct LineFit {
    double a = 0.0; ///< slope in LMMR
    double d = 0.0; ///< intercept
    double r_squared = 0.0;
};

struct RecoveredConstants {
    double A = 0.0;
    double B = 0.0;
};

struct AffineFit {
    double a = 0.0;
    double d = 0.0;
    double r_squared = 0.0;
    double A_recovered = 0.0;
    double B_recovered = 0.0;
    double sigma_bar_used = 0.0;
    double epsilon_used = 0.0;
};

struct EtaCalibration {
    AffineFit fit;
    double eta = 0.0;          ///< solves B = (rho + eta sqrt(1 - rho^2)) j_b
    double rho_residual = 0.0; ///< |A - rho j_sigma|
    double j_sigma = 0.0;
    double j_b = 0.0;
};

/// Weighted least squares of iv on LMMR = -x/tau, all maturities pooled.
/// Throws DegenerateDesign when the weighted LMMR values do not vary,
/// ConfigError on invalid quotes.
LineFit fit_affine(const std::vector<IVQuote>& quotes);

/// A = -sigma_bar^3 a / sqrt(eps), B = ((d - sigma_bar) sigma_bar - sigma_bar^3 a / 2) / sqrt(eps).
RecoveredConstants recover_constants(double a, double d, double sigma_bar, double epsilon);

/// Fit plus recovery.
AffineFit calibrate(const std::vector<IVQuote>& quotes, double sigma_bar, double epsilon);

/// Fit, recover, then solve for eta with rho and the coefficient functions
/// taken from the spec (its eta is ignored). Throws Unidentifiable if j_b = 0.
EtaCalibration calibrate_from_surface(const std::vector<IVQuote>& quotes, const ModelSpec& spec,
                                      double sigma_bar, double epsilon);

/// Columns tau, x, iv and optionally weight.
std::vector<IVQuote> read_quotes(const std::filesystem::path& path);

} // namespace volclust
