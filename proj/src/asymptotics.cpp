#include "volclust/asymptotics.hpp"

#include "volclust/black_scholes.hpp"
#include "volclust/errors.hpp"

#include <cmath>

namespace volclust {

double CorrectedIV::iv(double tau, double x) const {
    if (!(tau > 0.0)) throw ConfigError("implied volatility is undefined at tau = 0");
    return a * lmmr(tau, x) + d;
}

AsymptoticPrice asymptotic_price(const GroupConstants& gc, const ModelSpec& spec, double tau,
                                 double x) {
    if (!(tau >= 0.0)) throw ConfigError("asymptotic_price needs tau >= 0");
    const double sigma_bar = gc.sigma1_bar();
    const double shift = gc.avg_b2_over_s2 / (2.0 * spec.gamma) * tau;

    AsymptoticPrice out;
    const BSInputs in{tau, x, spec.strike, sigma_bar};
    out.P0 = bs_put(in);
    if (tau > 0.0) {
        const auto dx = bs_put_dx_derivatives(in);
        out.P1 = tau * (-gc.A * dx.d3x + (gc.A + gc.B) * dx.d2x - gc.B * dx.d1x);
    } else {
        out.iv_defined = false;
    }
    out.corrected = out.P0 + std::sqrt(spec.epsilon) * out.P1;

    // u solves from -payoff, u~ from zero; P = u~ - u at every order.
    out.u0_tilde = -shift;
    out.u0 = -out.P0 - shift;
    out.u1_tilde = -gc.A_tilde * tau;
    out.u1 = -out.P1 - gc.A_tilde * tau;
    return out;
}

CorrectedIV corrected_iv(const GroupConstants& gc, const ModelSpec& spec) {
    const double sb = gc.sigma1_bar();
    if (!(sb > 0.0)) throw ConfigError("corrected_iv needs a positive averaged volatility");
    const double se = std::sqrt(spec.epsilon);
    CorrectedIV out;
    out.sigma_bar = sb;
    out.epsilon = spec.epsilon;
    out.a = -se * gc.A / (sb * sb * sb);
    out.d = sb + se / sb * (gc.B - 0.5 * gc.A);
    return out;
}

double iv_correction_from_price(double P1, double vega) {
    if (!(vega >= 1e-300)) throw DegenerateVega("vega too small to convert a price correction");
    return P1 / vega;
}

} // namespace volclust
