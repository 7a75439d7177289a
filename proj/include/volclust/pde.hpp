#pragma once

/**
 * @file pde.hpp
 * @brief Finite-difference solver for the semilinear pricing equation
 *
 *   u_tau = sigma1^2/2 u_xx + sigma2^2/(2 eps) u_yy + rho sigma1 sigma2/sqrt(eps) u_xy
 *         + [ (m - y)/eps - c b sigma2/(sigma1 sqrt(eps)) ] u_y - sigma1^2/2 u_x
 *         - b^2/(2 gamma sigma1^2) + gamma (1 - rho^2) sigma2^2/(2 eps) (u_y)^2,
 *
 * c = rho + eta sqrt(1 - rho^2), started from -[K - K e^x]^+ (u) and from 0
 * (u~, which stays x-independent). The indifference put is P = u~ - u.
 *
 * Time stepping is a Douglas splitting with theta = 1: the mixed derivative,
 * the quadratic gradient term and the sources are explicit, the x and y
 * second-order operators are implicit, one tridiagonal pass per direction.
 * Differences are central; a first-order term falls back to upwinding at
 * nodes where the cell Peclet number exceeds 2.
 *
 * Boundaries: in x the far-field rows drop the x-operator (both put
 * asymptotes satisfy u_xx = u_x); in y the flux u_y vanishes.
 *
 * Optionally the solver marches w = u + P_BS(tau, x; sigma_ref) instead of
 * u. The equation for w is exact (its extra source is
 * -(sigma1^2/sigma_ref^2 - 1) dP_BS/dtau, integrated exactly over each
 * step), w starts at zero and is much smoother than u, which cuts the
 * discretisation error by orders of magnitude.
 */

#include "volclust/measure.hpp"
#include "volclust/model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace volclust {

struct Grid2D {
    std::vector<double> x_nodes;
    std::vector<double> y_nodes;
    double dt = 0.0;
    std::size_t n_steps = 0;
    double tau_final = 0.0;

    std::size_t nx() const noexcept { return x_nodes.size(); }
    std::size_t ny() const noexcept { return y_nodes.size(); }
    double dx() const { return nx() > 1 ? x_nodes[1] - x_nodes[0] : 0.0; }
    double dy() const { return ny() > 1 ? y_nodes[1] - y_nodes[0] : 0.0; }

    /// Uniform nodes; n_steps = ceil(tau_final / dt_max) and dt = tau_final / n_steps.
    static Grid2D uniform(double x_lo, double x_hi, std::size_t nx, double y_lo, double y_hi,
                          std::size_t ny, double tau_final, double dt_max);
};

struct GridRequest {
    double x_lo = -3.0;
    double x_hi = 3.0;
    std::size_t nx = 401;
    std::size_t ny = 201;         ///< minimum; raised to meet the y-spacing condition
    double tau = 0.0;             ///< 0 means the spec's maturity
    std::optional<double> dt;     ///< default: tau / min_steps
    std::size_t min_steps = 400;
    double std_multiple = 6.0;    ///< y half-width in units of std(pi)
};

/// y-domain m +- 6 std(pi) max(1, sqrt(eps)); ny raised (and made odd) so
/// that dy <= sqrt(eps) min sigma2 / 4.
Grid2D make_grid(const ModelSpec& spec, const InvariantMeasure& measure,
                 const GridRequest& request = {});

/// Largest y-spacing the solver accepts.
double max_y_spacing(const ModelSpec& spec, const Grid2D& grid);

/// Throws BadGrid if the grid cannot be used for this spec.
void check_grid(const ModelSpec& spec, const Grid2D& grid);

/// Explicit-term step bound eps dy / (gamma (1 - rho^2) max sigma2^2 G),
/// G a bound on |u_y|. The mixed term needs no bound with theta = 1
/// (rho^2 < 1 keeps the diffusion matrix elliptic), so this is the only one.
double max_stable_dt(const ModelSpec& spec, const Grid2D& grid, double gradient_bound);

enum class InitialCondition { payoff, zero };

enum class ReferenceMode {
    none,     ///< march u itself
    averaged, ///< subtract the BS put at sqrt(<sigma1^2>)
    fixed,    ///< subtract the BS put at SolverOptions::reference_vol
};

struct SolverOptions {
    ReferenceMode reference = ReferenceMode::averaged;
    double reference_vol = 0.0;
    bool collapse_zero = true;      ///< solve u~ in y only
    bool record_history = false;
    std::size_t history_stride = 1;
    double band_tolerance = 1e-4;   ///< relative to K
    int max_halvings = 10;
    double dt_safety = 0.5;         ///< fraction of max_stable_dt used
};

/// Discrete L_eps on a tensor grid. With a single x node the x-terms vanish
/// (the y-only problem for u~). Values are stored y-major: v[j * nx + i].
class PdeOperator {
public:
    PdeOperator(const ModelSpec& spec, std::vector<double> x_nodes, std::vector<double> y_nodes);

    std::size_t nx() const noexcept { return nx_; }
    std::size_t ny() const noexcept { return ny_; }
    std::size_t size() const noexcept { return nx_ * ny_; }

    /// out = L_eps v (all terms, boundary rules included).
    void apply(std::span<const double> v, std::span<double> out) const;

    /// Pieces of the split: x-part, y-part, and explicit rest (mixed,
    /// quadratic gradient and source).
    void apply_x(std::span<const double> v, std::span<double> out) const;
    void apply_y(std::span<const double> v, std::span<double> out) const;
    void apply_explicit(std::span<const double> v, std::span<double> out) const;

    double max_abs_dy(std::span<const double> v) const;
    double max_sigma2_sq() const noexcept { return max_s2sq_; }
    double sigma1_sq(std::size_t j) const { return s1sq_[j]; }

    struct Factors {
        double dt = 0.0;
        std::vector<double> cp;  ///< modified upper diagonal
        std::vector<double> inv; ///< inverse pivots
        std::vector<double> low; ///< lower diagonal
    };

    /// LU factors of (I - dt A_x) per row and of (I - dt A_y).
    Factors factor_x(double dt) const;
    Factors factor_y(double dt) const;
    void solve_x(const Factors& f, std::span<double> rhs) const;
    void solve_y(const Factors& f, std::span<double> rhs) const;

private:
    std::size_t nx_, ny_;
    double dx_ = 0.0, dy_ = 0.0;
    // x stencil per row, y stencil per row.
    std::vector<double> xl_, xd_, xu_;
    std::vector<double> yl_, yd_, yu_;
    std::vector<double> mixed_, quad_, source_, s1sq_;
    double max_s2sq_ = 0.0;
};

/// One marching state: owns its solution and scratch space. Single-threaded.
class PdeSolver {
public:
    PdeSolver(const ModelSpec& spec, const Grid2D& grid, InitialCondition initial,
              const SolverOptions& options, bool collapse_x);

    double tau() const noexcept { return tau_; }
    const PdeOperator& op() const noexcept { return op_; }
    bool x_independent() const noexcept { return op_.nx() == 1; }

    /// One Douglas step of size dt; the previous state is kept for rollback().
    void advance(double dt);
    void rollback();

    /// Full solution u (reference added back), y-major.
    std::vector<double> values() const;
    double max_abs_dy() const { return op_.max_abs_dy(state_); }
    bool finite() const;

private:
    void reference_increment(double t0, double t1);

    ModelSpec spec_;
    std::vector<double> x_nodes_;
    PdeOperator op_;
    InitialCondition initial_;
    double sigma_ref_ = 0.0; ///< 0 when marching u directly
    std::vector<double> ref_weight_; ///< sigma1^2/sigma_ref^2 - 1 per y node
    double tau_ = 0.0, prev_tau_ = 0.0;
    std::vector<double> state_, prev_;
    std::vector<double> a1_, a2_, rest_;
    std::optional<PdeOperator::Factors> fx_, fy_;
};

struct Snapshot {
    double tau = 0.0;
    std::vector<double> values;
};

struct USolution {
    Grid2D grid;
    InitialCondition initial = InitialCondition::payoff;
    double tau = 0.0;
    bool x_independent = false; ///< values has ny entries
    std::vector<double> u;
    std::vector<Snapshot> history;

    double value(std::size_t i, std::size_t j) const {
        return x_independent ? u[j] : u[j * grid.nx() + i];
    }
};

USolution solve_u(const ModelSpec& spec, const Grid2D& grid, InitialCondition initial,
                  const SolverOptions& options = {});

struct PriceSurface {
    Grid2D grid;
    double tau = 0.0;
    std::vector<double> u;       ///< nx * ny, y-major
    std::vector<double> u_tilde; ///< ny
    std::vector<double> P;       ///< u~ - u
    std::vector<Snapshot> history; ///< P snapshots when requested

    double price(std::size_t i, std::size_t j) const { return P[j * grid.nx() + i]; }
    /// Bicubic Lagrange interpolation of P.
    double price_at(double x, double y) const;
};

/// Marches u and u~ in lockstep so that the put band 0 <= P <= K can be
/// monitored after every step; a violating step is retried with half the
/// step size, Instability after SolverOptions::max_halvings.
class PriceMarcher {
public:
    PriceMarcher(const ModelSpec& spec, const Grid2D& grid, const SolverOptions& options = {});

    void advance_to(double tau);
    double tau() const noexcept { return u_.tau(); }
    PriceSurface surface() const;

private:
    bool band_ok() const;
    void step(double dt, int depth);
    void record();

    ModelSpec spec_;
    Grid2D grid_;
    SolverOptions options_;
    PdeSolver u_, ut_;
    std::size_t steps_ = 0;
    std::vector<Snapshot> history_;
};

PriceSurface price_surface(const ModelSpec& spec, const Grid2D& grid,
                           const SolverOptions& options = {});

/// Bicubic Lagrange interpolation of a y-major field on the grid.
double interpolate(const Grid2D& grid, std::span<const double> field, double x, double y);

struct ProbePoint {
    double tau = 0.0;
    double x = 0.0;
    double y = 0.0;
};

struct SweepRow {
    double epsilon = 0.0;
    double error = 0.0;      ///< max over probes |P_eps - (P0 + sqrt(eps) P1)|
    double normalized = 0.0; ///< error / (-eps ln eps)
};

struct SweepOptions {
    GridRequest grid;
    SolverOptions solver;
    std::size_t threads = 0; ///< 0: VOLCLUST_THREADS or hardware concurrency
};

/// eps_list must be strictly decreasing. Runs one PDE solve per eps.
std::vector<SweepRow> accuracy_sweep(const ModelSpec& spec, const std::vector<double>& eps_list,
                                     const std::vector<ProbePoint>& probes,
                                     const SweepOptions& options = {});

} // namespace volclust
