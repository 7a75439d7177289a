#include "volclust/cli.hpp"

#include "volclust/asymptotics.hpp"
#include "volclust/black_scholes.hpp"
#include "volclust/calibrate.hpp"
#include "volclust/config.hpp"
#include "volclust/csv.hpp"
#include "volclust/errors.hpp"
#include "volclust/measure.hpp"
#include "volclust/parallel.hpp"
#include "volclust/pde.hpp"
#include "volclust/poisson.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>

namespace volclust::cli {

namespace {

namespace fs = std::filesystem;

// Figure 2 setting.
constexpr double kFigureTau = 0.25;
constexpr double kFigureEps = 0.004;
constexpr double kFigureEtas[] = {-0.25, 0.0, 0.25};

class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            os_ = &fallback;
            return;
        }
        file_.open(path, std::ios::binary);
        if (!file_) throw ConfigError("cannot open output file " + path);
        os_ = &file_;
    }
    std::ostream& stream() { return *os_; }
    void close() {
        if (file_.is_open()) {
            file_.close();
            if (!file_) throw ConfigError("failed writing output file");
        }
    }

private:
    std::ofstream file_;
    std::ostream* os_ = nullptr;
};

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) throw ConfigError("point counts must be >= 1");
    if (n == 1) return {lo};
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    v.back() = hi;
    return v;
}

ModelSpec load_spec(const std::string& path) {
    if (path.empty()) throw ConfigError("--config is required");
    return load_model_config(path);
}

void write_script(const std::string& csv_path, const std::string& body) {
    fs::path script = fs::path(csv_path).replace_extension(".gp");
    std::ofstream os(script, std::ios::binary);
    if (!os) throw ConfigError("cannot open plot script " + script.string());
    os << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set terminal pngcairo size 900,650\n"
       << "set output '" << fs::path(csv_path).replace_extension(".png").filename().string()
       << "'\n"
       << body;
}

GridRequest grid_request(double xmin, double xmax, std::size_t nx, std::size_t ny,
                         std::optional<double> dt, std::size_t min_steps) {
    GridRequest r;
    r.x_lo = xmin;
    r.x_hi = xmax;
    r.nx = nx;
    r.ny = ny;
    r.dt = dt;
    r.min_steps = min_steps;
    return r;
}

// ---------------------------------------------------------------------------

void cmd_constants(const std::string& config, const std::string& out_path, std::ostream& out) {
    const auto spec = load_spec(config);
    const auto gc = group_constants(spec);
    const auto iv = corrected_iv(gc, spec);
    Sink sink(out_path, out);
    csv::Writer w(sink.stream(), {"sigma1_bar_sq", "avg_b2_over_s2", "A", "A_tilde", "B",
                                  "A_alt", "B_alt", "j_sigma", "j_b", "a", "d"});
    w.row({gc.sigma1_bar_sq, gc.avg_b2_over_s2, gc.A, gc.A_tilde, gc.B, gc.A_alt, gc.B_alt,
           gc.j_sigma, gc.j_b, iv.a, iv.d});
    sink.close();
}

struct PriceArgs {
    std::string config, out, method = "asymptotic";
    std::optional<double> tau, y;
    double x_min = -0.5, x_max = 0.5;
    std::size_t points = 11;
    std::size_t nx = 401, ny = 201, min_steps = 400;
};

void cmd_price(const PriceArgs& a, std::ostream& out) {
    const auto spec = load_spec(a.config);
    const double tau = a.tau.value_or(spec.maturity);
    if (!(tau > 0.0)) throw ConfigError("--tau must be > 0");
    const auto xs = linspace(a.x_min, a.x_max, a.points);
    const auto gc = group_constants(spec);
    Sink sink(a.out, out);
    if (a.method == "asymptotic") {
        csv::Writer w(sink.stream(), {"tau", "x", "P0", "P1", "P_corrected"});
        for (double x : xs) {
            const auto p = asymptotic_price(gc, spec, tau, x);
            w.row({tau, x, p.P0, p.P1, p.corrected});
        }
    } else {
        const double y = a.y.value_or(spec.m);
        const auto mu = build_invariant_measure(spec, 1e-13);
        auto req = grid_request(-3.0, 3.0, a.nx, a.ny, std::nullopt, a.min_steps);
        req.x_lo = std::min(req.x_lo, a.x_min - 1.0);
        req.x_hi = std::max(req.x_hi, a.x_max + 1.0);
        req.tau = tau;
        const auto surf = price_surface(spec, make_grid(spec, mu, req));
        csv::Writer w(sink.stream(), {"tau", "x", "y", "P_pde", "P_corrected"});
        for (double x : xs) {
            w.row({tau, x, y, surf.price_at(x, y), asymptotic_price(gc, spec, tau, x).corrected});
        }
    }
    sink.close();
}

struct SurfaceArgs {
    std::string config, out;
    double tau_min = 0.05, tau_max = 1.0, x_min = -0.5, x_max = 0.5;
    std::size_t n_tau = 20, n_x = 21;
};

void cmd_iv_surface(const SurfaceArgs& a, std::ostream& out) {
    const auto spec = load_spec(a.config);
    if (!(a.tau_min > 0.0)) throw ConfigError("--tau-min must be > 0");
    const auto iv = corrected_iv(group_constants(spec), spec);
    Sink sink(a.out, out);
    csv::Writer w(sink.stream(), {"tau", "x", "lmmr", "iv"});
    for (double tau : linspace(a.tau_min, a.tau_max, a.n_tau)) {
        for (double x : linspace(a.x_min, a.x_max, a.n_x)) {
            w.row({tau, x, CorrectedIV::lmmr(tau, x), iv.iv(tau, x)});
        }
    }
    sink.close();
}

struct PdeSolveArgs {
    std::string config, out;
    double x_min = -3.0, x_max = 3.0;
    std::size_t nx = 401, ny = 201;
    std::optional<double> tau, dt;
};

void cmd_pde_solve(const PdeSolveArgs& a, std::ostream& out) {
    const auto spec = load_spec(a.config);
    const auto mu = build_invariant_measure(spec, 1e-13);
    auto req = grid_request(a.x_min, a.x_max, a.nx, a.ny, a.dt, 400);
    req.tau = a.tau.value_or(spec.maturity);
    const auto grid = make_grid(spec, mu, req);
    const auto s = price_surface(spec, grid);
    Sink sink(a.out, out);
    csv::Writer w(sink.stream(), {"tau", "x", "y", "u", "u_tilde", "P"});
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            const std::size_t k = j * grid.nx() + i;
            w.row({s.tau, grid.x_nodes[i], grid.y_nodes[j], s.u[k], s.u_tilde[j], s.P[k]});
        }
    }
    sink.close();
}

struct PdeSweepArgs {
    std::string config, out, probes;
    std::vector<double> eps_list{0.04, 0.01, 0.0025};
    std::size_t nx = 401, ny = 201, min_steps = 400;
};

void cmd_pde_sweep(const PdeSweepArgs& a, std::ostream& out) {
    const auto spec = load_spec(a.config);
    std::vector<ProbePoint> probes;
    if (!a.probes.empty()) {
        const auto t = csv::read(a.probes);
        const auto ct = t.column("tau"), cx = t.column("x"), cy = t.column("y");
        for (const auto& r : t.rows) probes.push_back({r[ct], r[cx], r[cy]});
    } else {
        // |x| <= 1 and |y - m| <= 2 std(pi) at maturity.
        const double sd = build_invariant_measure(spec, 1e-13).std_dev();
        for (double x : linspace(-1.0, 1.0, 9)) {
            for (double k : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
                probes.push_back({spec.maturity, x, spec.m + k * sd});
            }
        }
    }
    SweepOptions opt;
    opt.grid = grid_request(-3.0, 3.0, a.nx, a.ny, std::nullopt, a.min_steps);
    const auto rows = accuracy_sweep(spec, a.eps_list, probes, opt);
    Sink sink(a.out, out);
    csv::Writer w(sink.stream(), {"epsilon", "error", "normalized"});
    for (const auto& r : rows) w.row({r.epsilon, r.error, r.normalized});
    sink.close();
}

struct CalibrateArgs {
    std::string quotes, config, out;
    double sigma_bar = 0.0, epsilon = 0.0;
};

void cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
    const auto quotes = read_quotes(a.quotes);
    Sink sink(a.out, out);
    if (a.config.empty()) {
        const auto f = calibrate(quotes, a.sigma_bar, a.epsilon);
        csv::Writer w(sink.stream(),
                      {"a", "d", "r_squared", "A", "B", "sigma_bar", "epsilon"});
        w.row({f.a, f.d, f.r_squared, f.A_recovered, f.B_recovered, f.sigma_bar_used,
               f.epsilon_used});
    } else {
        const auto spec = load_spec(a.config);
        const auto c = calibrate_from_surface(quotes, spec, a.sigma_bar, a.epsilon);
        const auto& f = c.fit;
        csv::Writer w(sink.stream(), {"a", "d", "r_squared", "A", "B", "sigma_bar", "epsilon",
                                      "rho", "eta", "rho_residual", "j_sigma", "j_b"});
        w.row({f.a, f.d, f.r_squared, f.A_recovered, f.B_recovered, f.sigma_bar_used,
               f.epsilon_used, spec.rho, c.eta, c.rho_residual, c.j_sigma, c.j_b});
    }
    sink.close();
}

struct Figure1Args {
    std::string out;
    double a = -0.154, d = 0.149;
    double tau_min = 0.05, tau_max = 1.0, lmmr_min = -2.0, lmmr_max = 2.0;
    std::size_t n_tau = 20, n_lmmr = 41;
};

void cmd_figure1(const Figure1Args& f) {
    if (!(f.tau_min > 0.0)) throw ConfigError("--tau-min must be > 0");
    {
        Sink sink(f.out, std::cout);
        csv::Writer w(sink.stream(), {"tau", "lmmr", "x", "iv"});
        for (double tau : linspace(f.tau_min, f.tau_max, f.n_tau)) {
            for (double l : linspace(f.lmmr_min, f.lmmr_max, f.n_lmmr)) {
                w.row({tau, l, -l * tau, f.a * l + f.d});
            }
        }
        sink.close();
    }
    write_script(f.out, "set xlabel 'time to maturity'\n"
                        "set ylabel 'LMMR'\n"
                        "set zlabel 'implied volatility' rotate\n"
                        "set dgrid3d " + std::to_string(f.n_lmmr) + "," +
                            std::to_string(f.n_tau) + "\n"
                        "set hidden3d\n"
                        "splot '" + fs::path(f.out).filename().string() +
                        "' using 1:2:4 with lines notitle\n");
}

struct Figure2Args {
    std::string config, out, method = "asymptotic";
    double lm_min = -0.3, lm_max = 0.3;
    std::size_t points = 61;
    std::size_t nx = 401, ny = 201, min_steps = 400;
};

void cmd_figure2(const Figure2Args& f) {
    ModelSpec base = f.config.empty() ? arctangent_example() : load_spec(f.config);
    base.epsilon = kFigureEps;
    const auto lms = linspace(f.lm_min, f.lm_max, f.points);

    std::vector<std::vector<double>> iv(std::size(kFigureEtas));
    auto curve = [&](std::size_t k) {
        ModelSpec s = base;
        s.eta = kFigureEtas[k];
        std::function<double(double)> price;
        std::optional<PriceSurface> surf;
        const auto gc = group_constants(s);
        if (f.method == "pde") {
            const auto mu = build_invariant_measure(s, 1e-13);
            auto req = grid_request(-3.0, 3.0, f.nx, f.ny, std::nullopt, f.min_steps);
            req.tau = kFigureTau;
            surf = price_surface(s, make_grid(s, mu, req));
            price = [&](double x) { return surf->price_at(x, s.m); };
        } else {
            price = [&](double x) { return asymptotic_price(gc, s, kFigureTau, x).corrected; };
        }
        for (double lm : lms) {
            iv[k].push_back(implied_vol(price(-lm), kFigureTau, -lm, s.strike));
        }
    };
    const std::size_t n = std::size(kFigureEtas);
    parallel_for(n, f.method == "pde" ? worker_count() : 1, curve);

    {
        Sink sink(f.out, std::cout);
        csv::Writer w(sink.stream(), {"log_moneyness", "iv_eta_m025", "iv_eta_0", "iv_eta_p025"});
        for (std::size_t r = 0; r < lms.size(); ++r) w.row({lms[r], iv[0][r], iv[1][r], iv[2][r]});
        sink.close();
    }
    const std::string name = fs::path(f.out).filename().string();
    write_script(f.out, "set xlabel 'log moneyness ln(K/S)'\n"
                        "set ylabel 'implied volatility'\n"
                        "plot '" + name + "' using 1:2 with lines lw 2, \\\n"
                        "     '" + name + "' using 1:3 with lines lw 2, \\\n"
                        "     '" + name + "' using 1:4 with lines lw 2\n");
}

void cmd_measure_dump(const std::string& config, const std::string& out_path, std::ostream& out) {
    const auto spec = load_spec(config);
    const auto mu = build_invariant_measure(spec, 1e-13);
    Sink sink(out_path, out);
    csv::Writer w(sink.stream(), {"y", "density"});
    for (std::size_t i = 0; i < mu.size(); ++i) w.row({mu.grid[i], mu.density[i]});
    sink.close();
}

} // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    // Hyphenated aliases for the nested commands.
    std::vector<std::string> args;
    for (std::size_t k = 0; k < raw_args.size(); ++k) {
        const auto& s = raw_args[k];
        if (k == 0 && (s == "pde-solve" || s == "pde-sweep" || s == "measure-dump")) {
            const auto dash = s.find('-');
            args.push_back(s.substr(0, dash));
            args.push_back(s.substr(dash + 1));
        } else {
            args.push_back(s);
        }
    }

    CLI::App app{"Indifference put prices under fast mean-reverting stochastic volatility",
                 "volclust"};
    app.require_subcommand(1);
    std::function<void()> action;

    std::string constants_config, constants_out;
    auto* constants = app.add_subcommand("constants", "Averaged quantities and group constants");
    constants->add_option("--config", constants_config, "Model file")->required();
    constants->add_option("--out", constants_out, "Output CSV");
    constants->callback([&] { action = [&] { cmd_constants(constants_config, constants_out, out); }; });

    PriceArgs pa;
    auto* price = app.add_subcommand("price", "Put price across log-moneyness");
    price->add_option("--config", pa.config)->required();
    price->add_option("--tau", pa.tau, "Time to maturity (default: maturity)");
    price->add_option("--x-min", pa.x_min);
    price->add_option("--x-max", pa.x_max);
    price->add_option("--points", pa.points);
    price->add_option("--y", pa.y, "Fast factor level for --method pde (default: m)");
    price->add_option("--method", pa.method)->check(CLI::IsMember({"asymptotic", "pde"}));
    price->add_option("--nx", pa.nx);
    price->add_option("--ny", pa.ny);
    price->add_option("--min-steps", pa.min_steps);
    price->add_option("--out", pa.out);
    price->callback([&] { action = [&] { cmd_price(pa, out); }; });

    SurfaceArgs sa;
    auto* surface = app.add_subcommand("iv-surface", "Corrected implied volatility over (tau, x)");
    surface->add_option("--config", sa.config)->required();
    surface->add_option("--tau-min", sa.tau_min);
    surface->add_option("--tau-max", sa.tau_max);
    surface->add_option("--n-tau", sa.n_tau);
    surface->add_option("--x-min", sa.x_min);
    surface->add_option("--x-max", sa.x_max);
    surface->add_option("--n-x", sa.n_x);
    surface->add_option("--out", sa.out);
    surface->callback([&] { action = [&] { cmd_iv_surface(sa, out); }; });

    auto* pde = app.add_subcommand("pde", "Finite-difference solver");
    pde->require_subcommand(1);
    PdeSolveArgs ps;
    auto* solve = pde->add_subcommand("solve", "Solve for u, u~ and P on a grid");
    solve->add_option("--config", ps.config)->required();
    solve->add_option("--xmin", ps.x_min);
    solve->add_option("--xmax", ps.x_max);
    solve->add_option("--nx", ps.nx);
    solve->add_option("--ny", ps.ny, "Minimum; raised to resolve the fast scale");
    solve->add_option("--tau", ps.tau);
    solve->add_option("--dt", ps.dt);
    solve->add_option("--out", ps.out);
    solve->callback([&] { action = [&] { cmd_pde_solve(ps, out); }; });

    PdeSweepArgs sw;
    auto* sweep = pde->add_subcommand("sweep", "Asymptotic accuracy across eps");
    sweep->add_option("--config", sw.config)->required();
    sweep->add_option("--eps-list", sw.eps_list)->delimiter(',');
    sweep->add_option("--probes", sw.probes, "CSV with columns tau,x,y");
    sweep->add_option("--nx", sw.nx);
    sweep->add_option("--ny", sw.ny);
    sweep->add_option("--min-steps", sw.min_steps);
    sweep->add_option("--out", sw.out);
    sweep->callback([&] { action = [&] { cmd_pde_sweep(sw, out); }; });

    CalibrateArgs ca;
    auto* cal = app.add_subcommand("calibrate", "Fit the LMMR line and recover A, B");
    cal->add_option("--quotes", ca.quotes, "CSV with columns tau,x,iv[,weight]")->required();
    cal->add_option("--sigma-bar", ca.sigma_bar)->required();
    cal->add_option("--epsilon", ca.epsilon)->required();
    cal->add_option("--config", ca.config, "Model file; enables eta recovery");
    cal->add_option("--out", ca.out);
    cal->callback([&] { action = [&] { cmd_calibrate(ca, out); }; });

    Figure1Args f1;
    auto* fig1 = app.add_subcommand("figure1", "Affine implied volatility surface");
    fig1->add_option("--a", f1.a);
    fig1->add_option("--d", f1.d);
    fig1->add_option("--tau-min", f1.tau_min);
    fig1->add_option("--tau-max", f1.tau_max);
    fig1->add_option("--n-tau", f1.n_tau);
    fig1->add_option("--lmmr-min", f1.lmmr_min);
    fig1->add_option("--lmmr-max", f1.lmmr_max);
    fig1->add_option("--n-lmmr", f1.n_lmmr);
    fig1->add_option("--out", f1.out)->required();
    fig1->callback([&] { action = [&] { cmd_figure1(f1); }; });

    Figure2Args f2;
    auto* fig2 = app.add_subcommand("figure2", "Skew of the arctangent model for three eta");
    fig2->add_option("--config", f2.config, "Model file (default: arctangent example)");
    fig2->add_option("--method", f2.method)->check(CLI::IsMember({"asymptotic", "pde"}));
    fig2->add_option("--lm-min", f2.lm_min);
    fig2->add_option("--lm-max", f2.lm_max);
    fig2->add_option("--points", f2.points);
    fig2->add_option("--nx", f2.nx);
    fig2->add_option("--ny", f2.ny);
    fig2->add_option("--min-steps", f2.min_steps);
    fig2->add_option("--out", f2.out)->required();
    fig2->callback([&] { action = [&] { cmd_figure2(f2); }; });

    auto* measure = app.add_subcommand("measure", "Invariant distribution");
    measure->require_subcommand(1);
    std::string dump_config, dump_out;
    auto* dump = measure->add_subcommand("dump", "Tabulated density");
    dump->add_option("--config", dump_config)->required();
    dump->add_option("--out", dump_out);
    dump->callback([&] { action = [&] { cmd_measure_dump(dump_config, dump_out, out); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return ExitCode::ok;
        }
        err << "volclust: " << e.what() << '\n';
        return ExitCode::config_error;
    }

    try {
        if (action) action();
        return ExitCode::ok;
    } catch (const ConfigError& e) {
        err << "volclust: " << e.what() << '\n';
        return ExitCode::config_error;
    } catch (const std::exception& e) {
        err << "volclust: " << e.what() << '\n';
        return ExitCode::numerical_error;
    }
}

} // namespace volclust::cli
