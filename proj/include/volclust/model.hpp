#pragma once

/**
 * @file model.hpp
 * @brief Stochastic volatility model with a fast mean-reverting factor.
 *
 * In log-moneyness x = ln(S/K) the model reads
 *
 *   dX = (b(Y) - sigma1(Y)^2 / 2) dt + sigma1(Y) dW1
 *   dY = (m - Y)/eps dt + sigma2(Y)/sqrt(eps) (rho dW1 + sqrt(1 - rho^2) dW2)
 *
 * and the option holder prices with the distorted entropic driver
 * parametrised by risk aversion gamma and volatility risk premium eta.
 */

#include <string>
#include <variant>
#include <vector>

namespace volclust {

/// Real function of the volatility factor y.
///
/// Closed family: constant, base + (amplitude/pi) atan(y), or a table with
/// linear interpolation and flat extrapolation.
class CoefficientFunction {
public:
    struct Constant {
        double value = 0.0;
    };
    struct Arctangent {
        double base = 0.0;
        double amplitude = 0.0;
    };
    struct Tabulated {
        std::vector<double> grid;
        std::vector<double> values;
        std::string source;  ///< path the table was read from, if any
    };
    using Repr = std::variant<Constant, Arctangent, Tabulated>;

    CoefficientFunction() = default;

    static CoefficientFunction constant(double value);
    static CoefficientFunction arctangent(double base, double amplitude);
    /// Throws ConfigError unless grid is strictly increasing and sizes match.
    static CoefficientFunction tabulated(std::vector<double> grid, std::vector<double> values,
                                         std::string source = {});

    double operator()(double y) const;

    const Repr& repr() const noexcept { return repr_; }
    bool is_constant() const noexcept { return std::holds_alternative<Constant>(repr_); }

    /// Config-file form: `constant:<v>`, `atan:<base>,<amp>` or `table:<path>`.
    std::string describe() const;

private:
    explicit CoefficientFunction(Repr repr) : repr_(std::move(repr)) {}

    Repr repr_ = Constant{};
};

struct ModelSpec {
    CoefficientFunction b = CoefficientFunction::constant(0.0);       ///< drift, 1/time
    CoefficientFunction sigma1 = CoefficientFunction::constant(0.2);  ///< stock vol
    CoefficientFunction sigma2 = CoefficientFunction::constant(0.2);  ///< vol-of-vol
    double m = 0.0;        ///< mean-reversion level of Y
    double rho = 0.0;      ///< correlation, |rho| < 1
    double eta = 0.0;      ///< volatility risk premium
    double gamma = 1.0;    ///< risk aversion, > 0
    double epsilon = 0.01; ///< mean-reversion time scale, > 0
    double strike = 100.0;
    double maturity = 1.0;

    /// c = rho + eta sqrt(1 - rho^2), the prefactor shared by A~ and B.
    double skew_prefactor() const;
};

/// The arctangent example model: sigma1 = 0.3 + (0.5/pi) atan(y),
/// sigma2 = 0.2, b = 1, m = 0, rho = -0.2. Remaining fields: eta = 0,
/// gamma = 1, eps = 0.004, K = 100, T = 0.25.
ModelSpec arctangent_example();

struct Violation {
    enum class Code {
        correlation,
        sigma1_positivity,
        sigma2_positivity,
        sigma1_bounded,
        sigma2_bounded,
        drift_bounded,
        gamma,
        epsilon,
        strike,
        maturity,
        non_finite,
    };
    Code code;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool has(Violation::Code code) const noexcept;
    /// All messages joined with "; ".
    std::string summary() const;
};

/// Checks the model invariants; coefficient bounds are probed on
/// [m - 20, m + 20] at 4001 points.
ValidationReport validate(const ModelSpec& spec);

/// Throws ConfigError carrying the report summary if the spec is invalid.
void require_valid(const ModelSpec& spec);

struct Coefficients {
    double b;
    double sigma1;
    double sigma2;
};

Coefficients eval_coeffs(const ModelSpec& spec, double y);

/// Uniform probe grid used by validate().
std::vector<double> probe_grid(const ModelSpec& spec);

} // namespace volclust
