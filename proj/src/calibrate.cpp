#include "volclust/calibrate.hpp"

#include "volclust/csv.hpp"
#include "volclust/errors.hpp"
#include "volclust/poisson.hpp"

#include <cmath>

namespace volclust {

LineFit fit_affine(const std::vector<IVQuote>& quotes) {
    if (quotes.size() < 2) throw DegenerateDesign("an affine fit needs at least two quotes");
    double w_sum = 0.0, l_mean = 0.0, v_mean = 0.0;
    for (const auto& q : quotes) {
        if (!(q.tau > 0.0)) throw ConfigError("quote maturity must be > 0");
        if (!(q.iv > 0.0)) throw ConfigError("quoted implied volatility must be > 0");
        if (!(q.weight >= 0.0) || !std::isfinite(q.weight) || !std::isfinite(q.x)) {
            throw ConfigError("quote weights must be finite and >= 0");
        }
        w_sum += q.weight;
        l_mean += q.weight * (-q.x / q.tau);
        v_mean += q.weight * q.iv;
    }
    if (!(w_sum > 0.0)) throw DegenerateDesign("all quote weights are zero");
    l_mean /= w_sum;
    v_mean /= w_sum;

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    bool varies = false;
    double first = 0.0;
    bool seen = false;
    for (const auto& q : quotes) {
        if (q.weight == 0.0) continue;
        const double l = -q.x / q.tau;
        if (!seen) {
            first = l;
            seen = true;
        } else if (l != first) {
            varies = true;
        }
        const double dl = l - l_mean, dv = q.iv - v_mean;
        sxx += q.weight * dl * dl;
        sxy += q.weight * dl * dv;
        syy += q.weight * dv * dv;
    }
    if (!varies || !(sxx > 0.0)) throw DegenerateDesign("all LMMR values are equal");

    LineFit fit;
    fit.a = sxy / sxx;
    fit.d = v_mean - fit.a * l_mean;
    double ss_res = 0.0;
    for (const auto& q : quotes) {
        const double r = q.iv - (fit.a * (-q.x / q.tau) + fit.d);
        ss_res += q.weight * r * r;
    }
    fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
    if (ss_res <= 1e-28 * std::max(syy, 1.0)) fit.r_squared = 1.0;
    return fit;
}

RecoveredConstants recover_constants(double a, double d, double sigma_bar, double epsilon) {
    if (!(sigma_bar > 0.0)) throw ConfigError("sigma_bar must be > 0");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    const double se = std::sqrt(epsilon);
    const double s3 = sigma_bar * sigma_bar * sigma_bar;
    return {-s3 * a / se, ((d - sigma_bar) * sigma_bar - 0.5 * s3 * a) / se};
}

AffineFit calibrate(const std::vector<IVQuote>& quotes, double sigma_bar, double epsilon) {
    const auto line = fit_affine(quotes);
    const auto ab = recover_constants(line.a, line.d, sigma_bar, epsilon);
    return {line.a, line.d, line.r_squared, ab.A, ab.B, sigma_bar, epsilon};
}

EtaCalibration calibrate_from_surface(const std::vector<IVQuote>& quotes, const ModelSpec& spec,
                                      double sigma_bar, double epsilon) {
    EtaCalibration out;
    out.fit = calibrate(quotes, sigma_bar, epsilon);
    const auto gc = group_constants(spec);
    out.j_sigma = gc.j_sigma;
    out.j_b = gc.j_b;
    if (gc.j_b == 0.0) throw Unidentifiable("j_b vanishes, so eta does not enter the smile");
    const double rho = spec.rho;
    out.eta = (out.fit.B_recovered / gc.j_b - rho) / std::sqrt(1.0 - rho * rho);
    out.rho_residual = std::abs(out.fit.A_recovered - rho * gc.j_sigma);
    return out;
}

std::vector<IVQuote> read_quotes(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    const auto ct = table.column("tau");
    const auto cx = table.column("x");
    const auto civ = table.column("iv");
    const bool has_w = table.has_column("weight");
    const auto cw = has_w ? table.column("weight") : 0;
    std::vector<IVQuote> quotes;
    quotes.reserve(table.rows.size());
    for (const auto& r : table.rows) {
        quotes.push_back({r[ct], r[cx], r[civ], has_w ? r[cw] : 1.0});
    }
    return quotes;
}

} // namespace volclust
