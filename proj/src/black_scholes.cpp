#include "volclust/black_scholes.hpp"

#include "volclust/errors.hpp"
#include "volclust/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace volclust {

namespace {

constexpr double kSigmaFloor = 1e-8;
constexpr double kSigmaCeiling = 5.0;
constexpr int kMaxIterations = 200;

void require_positive_time(const BSInputs& in, const char* what) {
    if (!(in.tau > 0.0) || !(in.sigma > 0.0) || !(in.strike > 0.0)) {
        throw ConfigError(std::string(what) + " needs tau > 0, sigma > 0, K > 0");
    }
}

} // namespace

double BSInputs::d1() const {
    return (x + 0.5 * sigma * sigma * tau) / (sigma * std::sqrt(tau));
}

double BSInputs::d2() const {
    return (x - 0.5 * sigma * sigma * tau) / (sigma * std::sqrt(tau));
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double norm_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double bs_put(const BSInputs& in) {
    if (in.tau <= 0.0) return std::max(in.strike - in.strike * std::exp(in.x), 0.0);
    return in.strike * norm_cdf(-in.d2()) - in.strike * std::exp(in.x) * norm_cdf(-in.d1());
}

double bs_put_gamma_x(const BSInputs& in) {
    require_positive_time(in, "bs_put_gamma_x");
    const double s = in.sigma * std::sqrt(in.tau);
    return in.strike * std::exp(in.x) * norm_pdf(in.d1()) / s;
}

PutXDerivatives bs_put_dx_derivatives(const BSInputs& in) {
    require_positive_time(in, "bs_put_dx_derivatives");
    const double s = in.sigma * std::sqrt(in.tau);
    const double d1 = in.d1();
    const double kex = in.strike * std::exp(in.x);
    const double g = kex * norm_pdf(d1) / s;
    PutXDerivatives out;
    out.d1x = -kex * norm_cdf(-d1);
    out.d2x = out.d1x + g;
    out.d3x = out.d2x + g * (1.0 - d1 / s);
    return out;
}

double bs_vega(const BSInputs& in) {
    require_positive_time(in, "bs_vega");
    const double d2 = in.d2();
    return in.strike * std::exp(-0.5 * d2 * d2) * std::sqrt(in.tau) /
           std::sqrt(2.0 * std::numbers::pi);
}

double implied_vol(double price, double tau, double x, double strike) {
    if (!(tau > 0.0) || !(strike > 0.0)) {
        throw ConfigError("implied_vol needs tau > 0 and K > 0");
    }
    const double intrinsic = std::max(strike - strike * std::exp(x), 0.0);
    if (!(price > intrinsic && price < strike)) {
        throw OutOfBand("put price " + csv::format(price) + " outside the no-arbitrage band (" +
                        csv::format(intrinsic) + ", " + csv::format(strike) + ")");
    }

    BSInputs in{tau, x, strike, kSigmaFloor};
    auto f = [&](double sigma) {
        in.sigma = sigma;
        return bs_put(in) - price;
    };

    double lo = kSigmaFloor, hi = kSigmaCeiling;
    if (f(lo) > 0.0 || f(hi) < 0.0) {
        throw NoConvergence("implied vol outside the search bracket [1e-8, 5] for price " +
                            csv::format(price));
    }

    int iter = 0;
    while (hi - lo > 1e-3 && iter < kMaxIterations) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? hi : lo) = mid;
        ++iter;
    }

    double sigma = 0.5 * (lo + hi);
    const double tol = 1e-10 * strike;
    for (; iter < kMaxIterations; ++iter) {
        const double diff = f(sigma);
        if (diff == 0.0) return sigma;
        (diff > 0.0 ? hi : lo) = sigma;
        in.sigma = sigma;
        const double vega = bs_vega(in);
        double next = sigma - diff / vega;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - sigma);
        sigma = next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * sigma ||
            hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * sigma) {
            if (std::abs(f(sigma)) < tol) return sigma;
            break;
        }
    }
    throw NoConvergence("implied vol did not converge for price " + csv::format(price));
}

} // namespace volclust
