#include "volclust/model.hpp"

#include "volclust/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace volclust {

namespace {

constexpr double kProbeHalfWidth = 20.0;
constexpr std::size_t kProbePoints = 4001;

std::string num(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << v;
    return os.str();
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

CoefficientFunction CoefficientFunction::constant(double value) {
    return CoefficientFunction(Constant{value});
}

CoefficientFunction CoefficientFunction::arctangent(double base, double amplitude) {
    return CoefficientFunction(Arctangent{base, amplitude});
}

CoefficientFunction CoefficientFunction::tabulated(std::vector<double> grid,
                                                   std::vector<double> values,
                                                   std::string source) {
    if (grid.empty()) {
        throw ConfigError("tabulated coefficient needs at least one node");
    }
    if (grid.size() != values.size()) {
        throw ConfigError("tabulated coefficient: " + std::to_string(grid.size()) +
                          " nodes but " + std::to_string(values.size()) + " values");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw ConfigError("tabulated coefficient grid must be strictly increasing");
        }
    }
    return CoefficientFunction(Tabulated{std::move(grid), std::move(values), std::move(source)});
}

double CoefficientFunction::operator()(double y) const {
    return std::visit(
        overloaded{
            [](const Constant& c) { return c.value; },
            [y](const Arctangent& a) {
                return a.base + a.amplitude / std::numbers::pi * std::atan(y);
            },
            [y](const Tabulated& t) {
                if (y <= t.grid.front()) return t.values.front();
                if (y >= t.grid.back()) return t.values.back();
                auto it = std::upper_bound(t.grid.begin(), t.grid.end(), y);
                const auto hi = static_cast<std::size_t>(it - t.grid.begin());
                const auto lo = hi - 1;
                const double w = (y - t.grid[lo]) / (t.grid[hi] - t.grid[lo]);
                return (1.0 - w) * t.values[lo] + w * t.values[hi];
            },
        },
        repr_);
}

std::string CoefficientFunction::describe() const {
    return std::visit(overloaded{
                          [](const Constant& c) { return "constant:" + num(c.value); },
                          [](const Arctangent& a) {
                              return "atan:" + num(a.base) + "," + num(a.amplitude);
                          },
                          [](const Tabulated& t) {
                              return "table:" + (t.source.empty() ? std::string("<inline>")
                                                                   : t.source);
                          },
                      },
                      repr_);
}

double ModelSpec::skew_prefactor() const {
    return rho + eta * std::sqrt(1.0 - rho * rho);
}

ModelSpec arctangent_example() {
    ModelSpec spec;
    spec.b = CoefficientFunction::constant(1.0);
    spec.sigma1 = CoefficientFunction::arctangent(0.3, 0.5);
    spec.sigma2 = CoefficientFunction::constant(0.2);
    spec.m = 0.0;
    spec.rho = -0.2;
    spec.eta = 0.0;
    spec.gamma = 1.0;
    spec.epsilon = 0.004;
    spec.strike = 100.0;
    spec.maturity = 0.25;
    return spec;
}

bool ValidationReport::has(Violation::Code code) const noexcept {
    return std::any_of(violations.begin(), violations.end(),
                       [code](const Violation& v) { return v.code == code; });
}

std::string ValidationReport::summary() const {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v.message;
    }
    return out;
}

std::vector<double> probe_grid(const ModelSpec& spec) {
    std::vector<double> ys(kProbePoints);
    const double lo = spec.m - kProbeHalfWidth;
    const double step = 2.0 * kProbeHalfWidth / static_cast<double>(kProbePoints - 1);
    for (std::size_t i = 0; i < kProbePoints; ++i) {
        ys[i] = lo + step * static_cast<double>(i);
    }
    return ys;
}

ValidationReport validate(const ModelSpec& spec) {
    using Code = Violation::Code;
    ValidationReport report;
    auto fail = [&](Code code, std::string msg) {
        report.violations.push_back({code, std::move(msg)});
    };

    const double scalars[] = {spec.m,     spec.rho,    spec.eta,     spec.gamma,
                              spec.epsilon, spec.strike, spec.maturity};
    if (std::any_of(std::begin(scalars), std::end(scalars),
                    [](double v) { return !std::isfinite(v); })) {
        fail(Code::non_finite, "model parameters must be finite");
    }
    if (!(std::abs(spec.rho) < 1.0)) {
        fail(Code::correlation, "correlation rho must satisfy |rho| < 1, got " + num(spec.rho));
    }
    if (!(spec.gamma > 0.0)) fail(Code::gamma, "risk aversion gamma must be > 0");
    if (!(spec.epsilon > 0.0)) fail(Code::epsilon, "time scale epsilon must be > 0");
    if (!(spec.strike > 0.0)) fail(Code::strike, "strike must be > 0");
    if (!(spec.maturity > 0.0)) fail(Code::maturity, "maturity must be > 0");

    double s1_inf = HUGE_VAL, s1_sup = -HUGE_VAL;
    double s2_inf = HUGE_VAL, s2_sup = -HUGE_VAL;
    double b_sup = 0.0;
    bool finite = true;
    for (double y : probe_grid(spec)) {
        const double s1 = spec.sigma1(y);
        const double s2 = spec.sigma2(y);
        const double b = spec.b(y);
        finite = finite && std::isfinite(s1) && std::isfinite(s2) && std::isfinite(b);
        s1_inf = std::min(s1_inf, s1);
        s1_sup = std::max(s1_sup, s1);
        s2_inf = std::min(s2_inf, s2);
        s2_sup = std::max(s2_sup, s2);
        b_sup = std::max(b_sup, std::abs(b));
    }
    if (!(s1_inf > 0.0)) {
        fail(Code::sigma1_positivity,
             "sigma1 must be bounded away from zero, inf on probe grid = " + num(s1_inf));
    }
    if (!(s2_inf > 0.0)) {
        fail(Code::sigma2_positivity,
             "sigma2 must be bounded away from zero, inf on probe grid = " + num(s2_inf));
    }
    if (!finite || !std::isfinite(s1_sup)) {
        fail(Code::sigma1_bounded, "sigma1 must be bounded on the probe grid");
    }
    if (!finite || !std::isfinite(s2_sup)) {
        fail(Code::sigma2_bounded, "sigma2 must be bounded on the probe grid");
    }
    if (!finite || !std::isfinite(b_sup)) {
        fail(Code::drift_bounded, "drift b must be bounded on the probe grid");
    }
    return report;
}

void require_valid(const ModelSpec& spec) {
    const auto report = validate(spec);
    if (!report.ok()) throw ConfigError("invalid model: " + report.summary());
}

Coefficients eval_coeffs(const ModelSpec& spec, double y) {
    return {spec.b(y), spec.sigma1(y), spec.sigma2(y)};
}

} // namespace volclust
