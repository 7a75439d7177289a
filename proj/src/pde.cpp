#include "volclust/pde.hpp"

#include "volclust/asymptotics.hpp"
#include "volclust/black_scholes.hpp"
#include "volclust/csv.hpp"
#include "volclust/errors.hpp"
#include "volclust/parallel.hpp"
#include "volclust/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace volclust {

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + h * static_cast<double>(i);
    v.back() = hi;
    return v;
}

double min_sigma2(const ModelSpec& spec, double lo, double hi) {
    double s = HUGE_VAL;
    for (double y : linspace(lo, hi, 2001)) s = std::min(s, spec.sigma2(y));
    return s;
}

// Stencil for a*v'' + b*v' with central differences, or upwinded first
// derivative when the cell Peclet number exceeds 2.
struct Stencil {
    double lo, diag, up;
};

Stencil convection_diffusion(double diffusion, double drift, double h) {
    const double d = diffusion / (h * h);
    if (std::abs(drift) * h <= 2.0 * diffusion) {
        return {d - drift / (2.0 * h), -2.0 * d, d + drift / (2.0 * h)};
    }
    return {d + std::max(-drift, 0.0) / h, -2.0 * d - std::abs(drift) / h,
            d + std::max(drift, 0.0) / h};
}

// Lagrange weights of the 4-node stencil around t on a uniform axis.
std::size_t lagrange4(const std::vector<double>& nodes, double t, double w[4]) {
    const std::size_t n = nodes.size();
    const double h = nodes[1] - nodes[0];
    const double pos = (t - nodes[0]) / h;
    auto start = static_cast<std::ptrdiff_t>(std::floor(pos)) - 1;
    start = std::clamp<std::ptrdiff_t>(start, 0, static_cast<std::ptrdiff_t>(n) - 4);
    const auto s = static_cast<std::size_t>(start);
    for (int k = 0; k < 4; ++k) {
        double num = 1.0, den = 1.0;
        for (int l = 0; l < 4; ++l) {
            if (l == k) continue;
            num *= t - nodes[s + static_cast<std::size_t>(l)];
            den *= nodes[s + static_cast<std::size_t>(k)] - nodes[s + static_cast<std::size_t>(l)];
        }
        w[k] = num / den;
    }
    return s;
}

double reference_sigma(const ModelSpec& spec, const SolverOptions& options) {
    switch (options.reference) {
    case ReferenceMode::none:
        return 0.0;
    case ReferenceMode::fixed:
        if (!(options.reference_vol > 0.0)) {
            throw ConfigError("fixed reference volatility must be > 0");
        }
        return options.reference_vol;
    case ReferenceMode::averaged: {
        const auto mu = build_invariant_measure(spec, 1e-13);
        return std::sqrt(average(mu, [&](double y) {
            const double s = spec.sigma1(y);
            return s * s;
        }));
    }
    }
    return 0.0;
}

} // namespace

// ---------------------------------------------------------------------------
// Grid

Grid2D Grid2D::uniform(double x_lo, double x_hi, std::size_t nx, double y_lo, double y_hi,
                       std::size_t ny, double tau_final, double dt_max) {
    if (nx < 3 || ny < 3) throw BadGrid("grid needs at least 3 nodes per direction");
    if (!(x_hi > x_lo) || !(y_hi > y_lo)) throw BadGrid("grid ranges must be increasing");
    if (!(tau_final >= 0.0) || !(dt_max > 0.0)) {
        throw BadGrid("grid needs tau >= 0 and dt > 0");
    }
    Grid2D g;
    g.x_nodes = linspace(x_lo, x_hi, nx);
    g.y_nodes = linspace(y_lo, y_hi, ny);
    g.tau_final = tau_final;
    if (tau_final == 0.0) {
        g.n_steps = 0;
        g.dt = dt_max;
    } else {
        g.n_steps = static_cast<std::size_t>(std::ceil(tau_final / dt_max - 1e-9));
        g.n_steps = std::max<std::size_t>(g.n_steps, 1);
        g.dt = tau_final / static_cast<double>(g.n_steps);
    }
    return g;
}

Grid2D make_grid(const ModelSpec& spec, const InvariantMeasure& measure,
                 const GridRequest& request) {
    require_valid(spec);
    const double tau = request.tau > 0.0 ? request.tau : spec.maturity;
    const double half =
        request.std_multiple * measure.std_dev() * std::max(1.0, std::sqrt(spec.epsilon));
    const double y_lo = spec.m - half;
    const double y_hi = spec.m + half;
    const double dy_max = std::sqrt(spec.epsilon) * min_sigma2(spec, y_lo, y_hi) / 4.0;
    auto ny = std::max<std::size_t>(
        request.ny, static_cast<std::size_t>(std::ceil((y_hi - y_lo) / dy_max)) + 1);
    if (ny % 2 == 0) ++ny;
    const double dt = request.dt ? *request.dt
                                 : tau / static_cast<double>(std::max<std::size_t>(
                                             request.min_steps, 1));
    return Grid2D::uniform(request.x_lo, request.x_hi, request.nx, y_lo, y_hi, ny, tau, dt);
}

double max_y_spacing(const ModelSpec& spec, const Grid2D& grid) {
    double s = HUGE_VAL;
    for (double y : grid.y_nodes) s = std::min(s, spec.sigma2(y));
    return std::sqrt(spec.epsilon) * s / 4.0;
}

void check_grid(const ModelSpec& spec, const Grid2D& grid) {
    if (grid.nx() < 3 || grid.ny() < 3) throw BadGrid("grid needs at least 3 nodes per direction");
    if (!(grid.dt > 0.0)) throw BadGrid("time step must be > 0");
    if (std::abs(static_cast<double>(grid.n_steps) * grid.dt - grid.tau_final) >
        1e-9 * std::max(1.0, grid.tau_final)) {
        throw BadGrid("n_steps * dt must equal tau_final");
    }
    const double limit = max_y_spacing(spec, grid);
    if (grid.dy() > limit * (1.0 + 1e-9)) {
        throw BadGrid("y spacing " + csv::format(grid.dy()) +
                      " does not resolve the fast scale; need dy <= sqrt(eps) min sigma2 / 4 = " +
                      csv::format(limit));
    }
}

double max_stable_dt(const ModelSpec& spec, const Grid2D& grid, double gradient_bound) {
    double s2max = 0.0;
    for (double y : grid.y_nodes) s2max = std::max(s2max, spec.sigma2(y));
    const double speed = spec.gamma * (1.0 - spec.rho * spec.rho) * s2max * s2max * gradient_bound;
    if (!(speed > 0.0)) return HUGE_VAL;
    return spec.epsilon * grid.dy() / speed;
}

// ---------------------------------------------------------------------------
// Operator

PdeOperator::PdeOperator(const ModelSpec& spec, std::vector<double> x_nodes,
                         std::vector<double> y_nodes)
    : nx_(x_nodes.size()), ny_(y_nodes.size()) {
    if (nx_ == 0 || nx_ == 2 || ny_ < 3) throw BadGrid("operator needs nx = 1 or >= 3, ny >= 3");
    dx_ = nx_ > 1 ? x_nodes[1] - x_nodes[0] : 0.0;
    dy_ = y_nodes[1] - y_nodes[0];

    const double eps = spec.epsilon;
    const double se = std::sqrt(eps);
    const double c = spec.skew_prefactor();
    const double quad = spec.gamma * (1.0 - spec.rho * spec.rho) / (2.0 * eps);

    xl_.assign(ny_, 0.0);
    xd_.assign(ny_, 0.0);
    xu_.assign(ny_, 0.0);
    yl_.assign(ny_, 0.0);
    yd_.assign(ny_, 0.0);
    yu_.assign(ny_, 0.0);
    mixed_.assign(ny_, 0.0);
    quad_.assign(ny_, 0.0);
    source_.assign(ny_, 0.0);
    s1sq_.assign(ny_, 0.0);

    for (std::size_t j = 0; j < ny_; ++j) {
        const double y = y_nodes[j];
        const auto k = eval_coeffs(spec, y);
        const double s1sq = k.sigma1 * k.sigma1;
        const double s2sq = k.sigma2 * k.sigma2;
        s1sq_[j] = s1sq;
        max_s2sq_ = std::max(max_s2sq_, s2sq);
        source_[j] = -k.b * k.b / (2.0 * spec.gamma * s1sq);

        if (nx_ > 1) {
            const auto xs = convection_diffusion(0.5 * s1sq, -0.5 * s1sq, dx_);
            xl_[j] = xs.lo;
            xd_[j] = xs.diag;
            xu_[j] = xs.up;
        }

        const double ayy = s2sq / (2.0 * eps);
        const double ay = (spec.m - y) / eps - c * k.b * k.sigma2 / (k.sigma1 * se);
        const bool interior = j > 0 && j + 1 < ny_;
        if (interior) {
            const auto ys = convection_diffusion(ayy, ay, dy_);
            yl_[j] = ys.lo;
            yd_[j] = ys.diag;
            yu_[j] = ys.up;
            quad_[j] = quad * s2sq;
            if (nx_ > 1) mixed_[j] = spec.rho * k.sigma1 * k.sigma2 / se / (4.0 * dx_ * dy_);
        } else {
            // Zero flux: ghost node mirrors the first interior node.
            const double d = ayy / (dy_ * dy_);
            yd_[j] = -2.0 * d;
            (j == 0 ? yu_[j] : yl_[j]) = 2.0 * d;
        }
    }
}

void PdeOperator::apply_x(std::span<const double> v, std::span<double> out) const {
    for (std::size_t j = 0; j < ny_; ++j) {
        const double* r = v.data() + j * nx_;
        double* o = out.data() + j * nx_;
        o[0] = 0.0;
        o[nx_ - 1] = 0.0;
        const double l = xl_[j], d = xd_[j], u = xu_[j];
        for (std::size_t i = 1; i + 1 < nx_; ++i) o[i] = l * r[i - 1] + d * r[i] + u * r[i + 1];
    }
}

void PdeOperator::apply_y(std::span<const double> v, std::span<double> out) const {
    for (std::size_t j = 0; j < ny_; ++j) {
        const double* c = v.data() + j * nx_;
        const double* below = j > 0 ? c - nx_ : nullptr;
        const double* above = j + 1 < ny_ ? c + nx_ : nullptr;
        double* o = out.data() + j * nx_;
        const double l = yl_[j], d = yd_[j], u = yu_[j];
        for (std::size_t i = 0; i < nx_; ++i) o[i] = d * c[i];
        if (below) {
            for (std::size_t i = 0; i < nx_; ++i) o[i] += l * below[i];
        }
        if (above) {
            for (std::size_t i = 0; i < nx_; ++i) o[i] += u * above[i];
        }
    }
}

void PdeOperator::apply_explicit(std::span<const double> v, std::span<double> out) const {
    const double inv2dy = 1.0 / (2.0 * dy_);
    for (std::size_t j = 0; j < ny_; ++j) {
        double* o = out.data() + j * nx_;
        const double src = source_[j];
        if (j == 0 || j + 1 == ny_) {
            for (std::size_t i = 0; i < nx_; ++i) o[i] = src;
            continue;
        }
        const double* below = v.data() + (j - 1) * nx_;
        const double* above = v.data() + (j + 1) * nx_;
        const double q = quad_[j];
        for (std::size_t i = 0; i < nx_; ++i) {
            const double uy = (above[i] - below[i]) * inv2dy;
            o[i] = src + q * uy * uy;
        }
        const double mx = mixed_[j];
        if (nx_ > 1 && mx != 0.0) {
            for (std::size_t i = 1; i + 1 < nx_; ++i) {
                o[i] += mx * (above[i + 1] - above[i - 1] - below[i + 1] + below[i - 1]);
            }
        }
    }
}

void PdeOperator::apply(std::span<const double> v, std::span<double> out) const {
    std::vector<double> tmp(size());
    apply_x(v, out);
    apply_y(v, tmp);
    for (std::size_t k = 0; k < size(); ++k) out[k] += tmp[k];
    apply_explicit(v, tmp);
    for (std::size_t k = 0; k < size(); ++k) out[k] += tmp[k];
}

double PdeOperator::max_abs_dy(std::span<const double> v) const {
    double g = 0.0;
    for (std::size_t j = 1; j + 1 < ny_; ++j) {
        const double* below = v.data() + (j - 1) * nx_;
        const double* above = v.data() + (j + 1) * nx_;
        for (std::size_t i = 0; i < nx_; ++i) g = std::max(g, std::abs(above[i] - below[i]));
    }
    return g / (2.0 * dy_);
}

PdeOperator::Factors PdeOperator::factor_x(double dt) const {
    Factors f;
    f.dt = dt;
    if (nx_ == 1) return f;
    f.cp.assign(size(), 0.0);
    f.inv.assign(size(), 1.0);
    f.low.assign(ny_, 0.0);
    for (std::size_t j = 0; j < ny_; ++j) {
        const double a = -dt * xl_[j], b = 1.0 - dt * xd_[j], c = -dt * xu_[j];
        f.low[j] = a;
        double* cp = f.cp.data() + j * nx_;
        double* inv = f.inv.data() + j * nx_;
        // Row 0 is the identity; rows 1..nx-2 are interior.
        for (std::size_t i = 1; i + 1 < nx_; ++i) {
            inv[i] = 1.0 / (b - a * cp[i - 1]);
            cp[i] = c * inv[i];
        }
    }
    return f;
}

void PdeOperator::solve_x(const Factors& f, std::span<double> rhs) const {
    if (nx_ == 1) return;
    for (std::size_t j = 0; j < ny_; ++j) {
        double* d = rhs.data() + j * nx_;
        const double* cp = f.cp.data() + j * nx_;
        const double* inv = f.inv.data() + j * nx_;
        const double a = f.low[j];
        for (std::size_t i = 1; i + 1 < nx_; ++i) d[i] = (d[i] - a * d[i - 1]) * inv[i];
        for (std::size_t i = nx_ - 1; i-- > 1;) d[i] -= cp[i] * d[i + 1];
    }
}

PdeOperator::Factors PdeOperator::factor_y(double dt) const {
    Factors f;
    f.dt = dt;
    f.cp.assign(ny_, 0.0);
    f.inv.assign(ny_, 0.0);
    f.low.assign(ny_, 0.0);
    for (std::size_t j = 0; j < ny_; ++j) {
        const double a = -dt * yl_[j], b = 1.0 - dt * yd_[j], c = -dt * yu_[j];
        f.low[j] = a;
        const double den = j == 0 ? b : b - a * f.cp[j - 1];
        f.inv[j] = 1.0 / den;
        f.cp[j] = c * f.inv[j];
    }
    return f;
}

void PdeOperator::solve_y(const Factors& f, std::span<double> rhs) const {
    {
        double* r = rhs.data();
        const double s = f.inv[0];
        for (std::size_t i = 0; i < nx_; ++i) r[i] *= s;
    }
    for (std::size_t j = 1; j < ny_; ++j) {
        double* r = rhs.data() + j * nx_;
        const double* prev = r - nx_;
        const double a = f.low[j], s = f.inv[j];
        for (std::size_t i = 0; i < nx_; ++i) r[i] = (r[i] - a * prev[i]) * s;
    }
    for (std::size_t j = ny_ - 1; j-- > 0;) {
        double* r = rhs.data() + j * nx_;
        const double* next = r + nx_;
        const double c = f.cp[j];
        for (std::size_t i = 0; i < nx_; ++i) r[i] -= c * next[i];
    }
}

// ---------------------------------------------------------------------------
// Solver

PdeSolver::PdeSolver(const ModelSpec& spec, const Grid2D& grid, InitialCondition initial,
                     const SolverOptions& options, bool collapse_x)
    : spec_(spec),
      x_nodes_(collapse_x ? std::vector<double>{0.0} : grid.x_nodes),
      op_(spec, x_nodes_, grid.y_nodes),
      initial_(initial) {
    const std::size_t n = op_.size();
    state_.assign(n, 0.0);
    a1_.assign(n, 0.0);
    a2_.assign(n, 0.0);
    rest_.assign(n, 0.0);

    if (initial == InitialCondition::payoff) {
        if (collapse_x) throw ConfigError("payoff initial data depends on x; cannot collapse");
        sigma_ref_ = reference_sigma(spec, options);
        if (sigma_ref_ > 0.0) {
            ref_weight_.resize(op_.ny());
            for (std::size_t j = 0; j < op_.ny(); ++j) {
                ref_weight_[j] = op_.sigma1_sq(j) / (sigma_ref_ * sigma_ref_) - 1.0;
            }
        } else {
            const std::size_t nx = op_.nx();
            for (std::size_t i = 0; i < nx; ++i) {
                const double payoff = std::max(spec.strike - spec.strike * std::exp(x_nodes_[i]), 0.0);
                for (std::size_t j = 0; j < op_.ny(); ++j) state_[j * nx + i] = -payoff;
            }
        }
    }
    prev_ = state_;
}

void PdeSolver::reference_increment(double t0, double t1) {
    const std::size_t nx = op_.nx();
    std::vector<double> dp(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        dp[i] = bs_put({t1, x_nodes_[i], spec_.strike, sigma_ref_}) -
                bs_put({t0, x_nodes_[i], spec_.strike, sigma_ref_});
    }
    for (std::size_t j = 0; j < op_.ny(); ++j) {
        double* r = state_.data() + j * nx;
        const double w = ref_weight_[j];
        for (std::size_t i = 0; i < nx; ++i) r[i] -= w * dp[i];
    }
}

void PdeSolver::advance(double dt) {
    if (!fx_ || fx_->dt != dt) fx_ = op_.factor_x(dt);
    if (!fy_ || fy_->dt != dt) fy_ = op_.factor_y(dt);

    prev_ = state_;
    prev_tau_ = tau_;
    op_.apply_x(prev_, a1_);
    op_.apply_y(prev_, a2_);
    op_.apply_explicit(prev_, rest_);

    // Y0 - dt A_x U, then the x pass, then the y pass.
    const std::size_t n = state_.size();
    for (std::size_t k = 0; k < n; ++k) state_[k] = prev_[k] + dt * (a2_[k] + rest_[k]);
    if (sigma_ref_ > 0.0) reference_increment(tau_, tau_ + dt);
    op_.solve_x(*fx_, state_);
    for (std::size_t k = 0; k < n; ++k) state_[k] -= dt * a2_[k];
    op_.solve_y(*fy_, state_);
    tau_ += dt;
}

void PdeSolver::rollback() {
    state_ = prev_;
    tau_ = prev_tau_;
}

std::vector<double> PdeSolver::values() const {
    if (sigma_ref_ <= 0.0) return state_;
    std::vector<double> out = state_;
    const std::size_t nx = op_.nx();
    for (std::size_t i = 0; i < nx; ++i) {
        const double p = bs_put({tau_, x_nodes_[i], spec_.strike, sigma_ref_});
        for (std::size_t j = 0; j < op_.ny(); ++j) out[j * nx + i] -= p;
    }
    return out;
}

bool PdeSolver::finite() const {
    return std::all_of(state_.begin(), state_.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// Drivers

namespace {

// Step size for the next step towards `target`: lands exactly on it and
// respects the explicit-term bound.
double next_step(const ModelSpec& spec, const Grid2D& grid, double tau, double target,
                 double gradient, double safety) {
    const double remaining = target - tau;
    const auto n = std::max(1.0, std::ceil(remaining / grid.dt - 1e-9));
    double h = remaining / n;
    h = std::min(h, safety * max_stable_dt(spec, grid, gradient));
    if (remaining - h < 1e-12 * std::max(1.0, target)) h = remaining;
    return h;
}

} // namespace

USolution solve_u(const ModelSpec& spec, const Grid2D& grid, InitialCondition initial,
                  const SolverOptions& options) {
    require_valid(spec);
    check_grid(spec, grid);
    const bool collapse = initial == InitialCondition::zero && options.collapse_zero;
    PdeSolver solver(spec, grid, initial, options, collapse);

    USolution out;
    out.grid = grid;
    out.initial = initial;
    out.x_independent = collapse;
    std::size_t steps = 0;
    auto record = [&] {
        if (options.record_history && steps % std::max<std::size_t>(options.history_stride, 1) == 0) {
            out.history.push_back({solver.tau(), solver.values()});
        }
    };
    record();

    auto step = [&](auto&& self, double dt, int depth) -> void {
        solver.advance(dt);
        if (solver.finite()) return;
        solver.rollback();
        if (depth >= options.max_halvings) {
            throw Instability("non-finite values at tau = " + csv::format(solver.tau()));
        }
        self(self, 0.5 * dt, depth + 1);
        self(self, 0.5 * dt, depth + 1);
    };
    const double target = grid.tau_final;
    while (target - solver.tau() > 1e-12 * std::max(1.0, target)) {
        const double h = next_step(spec, grid, solver.tau(), target, solver.max_abs_dy(),
                                   options.dt_safety);
        step(step, h, 0);
        ++steps;
        record();
    }
    out.tau = solver.tau();
    out.u = solver.values();
    return out;
}

PriceMarcher::PriceMarcher(const ModelSpec& spec, const Grid2D& grid, const SolverOptions& options)
    : spec_((require_valid(spec), spec)),
      grid_((check_grid(spec, grid), grid)),
      options_(options),
      u_(spec, grid, InitialCondition::payoff, options, false),
      ut_(spec, grid, InitialCondition::zero, options, options.collapse_zero) {
    record();
}

bool PriceMarcher::band_ok() const {
    if (!u_.finite() || !ut_.finite()) return false;
    const auto u = u_.values();
    const auto ut = ut_.values();
    const std::size_t nx = grid_.nx();
    const double tol = options_.band_tolerance * spec_.strike;
    for (std::size_t j = 0; j < grid_.ny(); ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double t = ut_.x_independent() ? ut[j] : ut[j * nx + i];
            const double p = t - u[j * nx + i];
            if (p < -tol || p > spec_.strike + tol) return false;
        }
    }
    return true;
}

void PriceMarcher::step(double dt, int depth) {
    u_.advance(dt);
    ut_.advance(dt);
    if (band_ok()) return;
    u_.rollback();
    ut_.rollback();
    if (depth >= options_.max_halvings) {
        throw Instability("put band 0 <= P <= K violated at tau = " + csv::format(u_.tau()) +
                          " after " + std::to_string(depth) + " step halvings");
    }
    step(0.5 * dt, depth + 1);
    step(0.5 * dt, depth + 1);
}

void PriceMarcher::record() {
    if (!options_.record_history) return;
    if (steps_ % std::max<std::size_t>(options_.history_stride, 1) != 0) return;
    history_.push_back({tau(), surface().P});
}

void PriceMarcher::advance_to(double target) {
    if (target < tau() - 1e-12) throw ConfigError("cannot march backwards in time");
    while (target - tau() > 1e-12 * std::max(1.0, target)) {
        const double g = std::max(u_.max_abs_dy(), ut_.max_abs_dy());
        step(next_step(spec_, grid_, tau(), target, g, options_.dt_safety), 0);
        ++steps_;
        record();
    }
}

PriceSurface PriceMarcher::surface() const {
    PriceSurface s;
    s.grid = grid_;
    s.tau = tau();
    s.u = u_.values();
    const auto ut = ut_.values();
    const std::size_t nx = grid_.nx(), ny = grid_.ny();
    s.u_tilde.resize(ny);
    for (std::size_t j = 0; j < ny; ++j) s.u_tilde[j] = ut_.x_independent() ? ut[j] : ut[j * nx];
    s.P.resize(nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double t = ut_.x_independent() ? ut[j] : ut[j * nx + i];
            s.P[j * nx + i] = t - s.u[j * nx + i];
        }
    }
    s.history = history_;
    return s;
}

PriceSurface price_surface(const ModelSpec& spec, const Grid2D& grid, const SolverOptions& options) {
    PriceMarcher marcher(spec, grid, options);
    marcher.advance_to(grid.tau_final);
    return marcher.surface();
}

double interpolate(const Grid2D& grid, std::span<const double> field, double x, double y) {
    const auto& xs = grid.x_nodes;
    const auto& ys = grid.y_nodes;
    if (x < xs.front() - 1e-12 || x > xs.back() + 1e-12 || y < ys.front() - 1e-12 ||
        y > ys.back() + 1e-12) {
        throw ConfigError("interpolation point (" + csv::format(x) + ", " + csv::format(y) +
                          ") is outside the grid");
    }
    double wx[4], wy[4];
    const std::size_t sx = lagrange4(xs, x, wx);
    const std::size_t sy = lagrange4(ys, y, wy);
    const std::size_t nx = grid.nx();
    double v = 0.0;
    for (std::size_t b = 0; b < 4; ++b) {
        double row = 0.0;
        for (std::size_t a = 0; a < 4; ++a) row += wx[a] * field[(sy + b) * nx + sx + a];
        v += wy[b] * row;
    }
    return v;
}

double PriceSurface::price_at(double x, double y) const { return interpolate(grid, P, x, y); }

std::vector<SweepRow> accuracy_sweep(const ModelSpec& spec, const std::vector<double>& eps_list,
                                     const std::vector<ProbePoint>& probes,
                                     const SweepOptions& options) {
    require_valid(spec);
    if (eps_list.empty()) throw ConfigError("accuracy sweep needs at least one epsilon");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] > 0.0 && eps_list[k] < 1.0)) {
            throw ConfigError("sweep epsilons must lie in (0, 1)");
        }
        if (k > 0 && !(eps_list[k] < eps_list[k - 1])) {
            throw ConfigError("sweep epsilons must be strictly decreasing");
        }
    }
    if (probes.empty()) throw ConfigError("accuracy sweep needs at least one probe");

    // The group constants do not depend on eps.
    const auto gc = group_constants(spec);
    std::map<double, std::vector<ProbePoint>> by_tau;
    for (const auto& p : probes) {
        if (!(p.tau > 0.0)) throw ConfigError("probe times must be > 0");
        by_tau[p.tau].push_back(p);
    }

    std::vector<SweepRow> rows(eps_list.size());
    parallel_for(eps_list.size(), worker_count(options.threads), [&](std::size_t k) {
        ModelSpec s = spec;
        s.epsilon = eps_list[k];
        const auto mu = build_invariant_measure(s, 1e-13);
        GridRequest req = options.grid;
        req.tau = by_tau.rbegin()->first;
        PriceMarcher marcher(s, make_grid(s, mu, req), options.solver);
        double err = 0.0;
        for (const auto& [tau, pts] : by_tau) {
            marcher.advance_to(tau);
            const auto surf = marcher.surface();
            for (const auto& p : pts) {
                const double asym = asymptotic_price(gc, s, tau, p.x).corrected;
                err = std::max(err, std::abs(surf.price_at(p.x, p.y) - asym));
            }
        }
        const double e = eps_list[k];
        rows[k] = {e, err, err / (-e * std::log(e))};
    });
    return rows;
}

} // namespace volclust
