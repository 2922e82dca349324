// Command-line driver: configuration loading, experiment orchestration
// (profile -> spectrum -> crossing -> reduction -> branches) and emission of
// plot-ready data files.
#include <CLI11.hpp>

#include <iostream>

#include "o2hopf/io/exports.hpp"
#include "o2hopf/pde/energy.hpp"
#include "o2hopf/reduction/pde_system.hpp"
#include "o2hopf/reduction/synthetic.hpp"
#include "o2hopf/spectral/evans.hpp"

using namespace o2hopf;
using io::json;
using io::Manifest;
using io::RunConfig;
using io::TableWriter;

namespace {

std::shared_ptr<pde::ModelSystem> model_of(const RunConfig& cfg) {
    return pde::make_model(cfg.model_id);
}

pde::ShockProfile profile_of(const RunConfig& cfg, const pde::ModelSystem& m, double eps) {
    return pde::solve_profile(m, eps, cfg.grid, 50, cfg.tol.profile);
}

int run_profile(const RunConfig& cfg) {
    auto model = model_of(cfg);
    const auto dir = io::ensure_outdir(cfg);
    auto prof = profile_of(cfg, *model, cfg.eps);

    std::vector<std::string> cols{"x1"};
    for (int c = 0; c < model->n(); ++c) cols.push_back("u" + std::to_string(c + 1));
    TableWriter tw(cols);
    for (int i = 0; i < cfg.grid.N1; ++i) {
        std::vector<double> row{cfg.grid.x1(i)};
        for (int c = 0; c < model->n(); ++c) row.push_back(prof.u(c, i));
        tw.row(row);
    }
    tw.write_csv(dir + "/profile.csv");
    tw.write_dat(dir + "/profile.dat");

    Manifest man("profile", cfg);
    man.add_file(dir + "/profile.csv");
    man.add_file(dir + "/profile.dat");
    man.summary() = {{"model", model->id()},
                     {"eps", cfg.eps},
                     {"ode_residual", prof.ode_residual},
                     {"endstate_gap", prof.endstate_gap}};
    man.write(dir + "/profile.manifest.json");
    std::cout << "profile residual " << prof.ode_residual << ", endstate gap "
              << prof.endstate_gap << "\n";
    return 0;
}

int run_spectrum(const RunConfig& cfg) {
    auto model = model_of(cfg);
    const auto dir = io::ensure_outdir(cfg);
    auto prof = profile_of(cfg, *model, cfg.eps);
    pde::RhsContext ctx(*model, cfg.eps, prof, cfg.grid);
    ctx.hyp_dissipation = cfg.tol.hyp_dissipation;

    spectral::Region region;
    region.re_min = cfg.region[0];
    region.re_max = cfg.region[1];
    region.im_min = cfg.region[2];
    region.im_max = cfg.region[3];

    TableWriter tw({"k", "eps", "re", "im", "residual"});
    const int klo = cfg.k_mode == 0 ? 0 : cfg.k_mode;
    const int khi = cfg.k_mode == 0 ? cfg.grid.K : cfg.k_mode;
    for (int k = klo; k <= khi; ++k) {
        auto op = spectral::assemble_Lk(ctx, k);
        auto pairs = spectral::spectrum_in_region(op, region, cfg.tol.eigen_residual);
        for (const auto& p : pairs)
            tw.row({double(k), cfg.eps, p.lambda.real(), p.lambda.imag(), p.residual});
    }
    tw.write_csv(dir + "/spectrum.csv");
    tw.write_dat(dir + "/spectrum.dat");
    Manifest man("spectrum", cfg);
    man.add_file(dir + "/spectrum.csv");
    man.summary() = {{"eigenvalues", tw.size()}};
    man.write(dir + "/spectrum.manifest.json");
    std::cout << "spectrum: " << tw.size() << " eigenvalues in region\n";
    return 0;
}

int run_evans(const RunConfig& cfg) {
    auto model = model_of(cfg);
    const auto dir = io::ensure_outdir(cfg);
    spectral::EvansOptions opts = cfg.tol.evans();

    TableWriter tw({"re_lambda", "im_lambda", "k", "eps", "abs_D", "arg_D"});
    spectral::EvansEvaluator ev(*model, cfg.eps, cfg.k_mode, cfg.evans_L, opts);
    for (const Complex& z : cfg.contour) {
        const Complex D = ev.evaluate(z).D;
        tw.row({z.real(), z.imag(), double(cfg.k_mode), cfg.eps, std::abs(D), std::arg(D)});
    }
    int winding = -1;
    std::string winding_error;
    try {
        winding = spectral::evans_root_count(*model, cfg.eps, cfg.contour, cfg.k_mode,
                                             cfg.evans_L, opts);
    } catch (const NumericalError& e) {
        winding_error = e.what();
    }
    tw.write_csv(dir + "/evans.csv");
    tw.write_dat(dir + "/evans.dat");
    Manifest man("evans", cfg);
    man.add_file(dir + "/evans.csv");
    man.summary() = {{"winding", winding}};
    if (!winding_error.empty()) man.summary()["winding_error"] = winding_error;
    man.write(dir + "/evans.manifest.json");
    std::cout << "evans winding = " << winding << "\n";
    return 0;
}

int run_crossing(const RunConfig& cfg) {
    auto model = model_of(cfg);
    const auto dir = io::ensure_outdir(cfg);
    auto b = spectral::find_crossing(*model, cfg.grid, cfg.crossing_lo, cfg.crossing_hi,
                                     cfg.tol.crossing());
    Manifest man("crossing", cfg);
    man.summary() = {{"eps0", b.eps0},
                     {"k_star", b.k_star},
                     {"omega0", b.omega0},
                     {"gamma_prime0", b.gamma_prime0},
                     {"lambda_plus", io::complex_json(b.lambda_plus)},
                     {"biorth_w_wt", b.biorth_w_wt},
                     {"biorth_sw_wt", b.biorth_sw_wt}};
    man.write(dir + "/crossing.manifest.json");
    std::cout << "crossing at eps0 = " << b.eps0 << ", k* = " << b.k_star
              << ", omega0 = " << b.omega0 << ", gamma' = " << b.gamma_prime0 << "\n";
    return 0;
}

int run_energy_check(const RunConfig& cfg) {
    auto model = model_of(cfg);
    const auto dir = io::ensure_outdir(cfg);
    auto prof = profile_of(cfg, *model, cfg.eps);
    pde::RhsContext ctx(*model, cfg.eps, prof, cfg.grid);
    ctx.hyp_dissipation = cfg.tol.hyp_dissipation;
    std::mt19937_64 rng(cfg.seed);
    pde::ChannelField shape = pde::random_field(model->n(), cfg.grid, rng, 1.0);
    shape *= 1.0 / shape.max_abs();
    const double T0 = 2.0;
    const int s = 2;

    TableWriter tw({"amplitude", "energy_ratio_max", "dissipation_integral", "lin_err",
                    "lin_err_ratio"});
    for (double amp : {1e-3, 2.15e-3, 4.64e-3, 1e-2}) {
        pde::ChannelField v0 = amp * shape;
        const auto e0 = pde::energy_functional(*model, cfg.eps, prof, v0, s, cfg.grid);
        double emax = 0.0, dissipation = 0.0;
        pde::EvolveOptions opts;
        opts.dt = cfg.grid.dt;
        double tprev = 0.0;
        opts.snapshot = [&](int, double t, const pde::ChannelField& v) {
            const auto e = pde::energy_functional(*model, cfg.eps, prof, v, s, cfg.grid);
            emax = std::max(emax, e.value / e0.value);
            pde::ChannelField v2 = v;
            // parabolic block only
            for (int k = 0; k <= v.K; ++k)
                v2.modes[k].topRows(model->n() - model->r()).setZero();
            const double hs1 = pde::sobolev_norm(v2, s + 1 > 2 ? 2 : s + 1, cfg.grid.h());
            dissipation += (t - tprev) * hs1 * hs1;
            tprev = t;
        };
        pde::evolve(ctx, v0, T0, opts);
        auto le = pde::linearization_error(ctx, v0, T0, s);
        tw.row({amp, emax, dissipation, le.err, le.en_bound_ratio});
    }
    tw.write_csv(dir + "/energy.csv");
    Manifest man("energy-check", cfg);
    man.add_file(dir + "/energy.csv");
    man.write(dir + "/energy.manifest.json");
    std::cout << "energy diagnostics written\n";
    return 0;
}

int run_reduce(const RunConfig& cfg, reduction::CoefficientFit* out_fit = nullptr,
               spectral::EigenBundle* out_bundle = nullptr) {
    auto model = model_of(cfg);
    const auto dir = io::ensure_outdir(cfg);
    auto b = spectral::find_crossing(*model, cfg.grid, cfg.crossing_lo, cfg.crossing_hi,
                                     cfg.tol.crossing());
    reduction::PdeReductionSystem sys(model, cfg.grid, b, cfg.pipeline_dt);
    auto fit = reduction::fit_coefficients(sys, b.gamma_prime0, cfg.tol.fit_radius, 2,
                                           cfg.tol.reduction());
    const auto rep = reduced::check_genericity(fit.cubic(), cfg.tol.genericity);

    Manifest man("reduce", cfg);
    man.summary() = {{"fit", io::fit_json(fit)},
                     {"crossing", {{"eps0", b.eps0}, {"k_star", b.k_star}, {"omega0", b.omega0}}},
                     {"genericity",
                      {{"holds", rep.all_hold()},
                       {"lambda_ne_gamma", rep.lambda_ne_gamma.margin},
                       {"re_sum_nonzero", rep.re_sum_nonzero.margin},
                       {"re_lambda_nonzero", rep.re_lambda_nonzero.margin}}}};
    man.write(dir + "/reduce.manifest.json");
    std::cout << "kappa = " << fit.kappa << ", chi = " << fit.chi << ", Lambda = ("
              << fit.Lambda.real() << ", " << fit.Lambda.imag() << "), Gamma = ("
              << fit.Gamma.real() << ", " << fit.Gamma.imag() << ")\n";
    if (!rep.all_hold()) throw GenericityViolation("fitted coefficients are degenerate");
    if (out_fit) *out_fit = fit;
    if (out_bundle) *out_bundle = b;
    return 0;
}

int run_bifurcate(const RunConfig& cfg) {
    if (cfg.eps_sweep.empty())
        throw InvalidInput("bifurcate requires a non-empty eps sweep");
    auto model = model_of(cfg);
    const auto dir = io::ensure_outdir(cfg);
    reduction::CoefficientFit fit;
    spectral::EigenBundle bundle;
    run_reduce(cfg, &fit, &bundle);

    auto factory = [&](double eps) {
        return reduction::PdeReductionSystem(
            model, cfg.grid, reduction::bundle_at(*model, cfg.grid, eps, bundle),
            cfg.pipeline_dt);
    };
    auto records = reduction::locate_periodic_orbits(
        factory, bundle.eps0, cfg.eps_sweep, fit,
        {reduced::BranchKind::Traveling1, reduced::BranchKind::Standing},
        cfg.tol.reduction(), cfg.tol.genericity);

    TableWriter tw({"eps", "kind", "amplitude", "mu", "T", "return_residual",
                    "shift_residual", "speed"});
    json orbits = json::array();
    for (const auto& r : records) {
        tw.row({r.eps, double(int(r.kind)), r.amplitude, r.mu, r.T, r.return_residual,
                r.shift_residual, r.speed});
        orbits.push_back(io::orbit_json(r));
    }
    tw.write_csv(dir + "/branches.csv");
    tw.write_dat(dir + "/branches.dat");
    {
        std::ofstream out(dir + "/orbits.json");
        out << orbits.dump(2) << "\n";
    }
    Manifest man("bifurcate", cfg);
    man.add_file(dir + "/branches.csv");
    man.add_file(dir + "/orbits.json");
    man.summary() = {{"n_orbits", records.size()}, {"fit", io::fit_json(fit)}};
    man.write(dir + "/bifurcate.manifest.json");
    for (const auto& r : records)
        std::cout << "eps " << r.eps << " " << reduced::to_string(r.kind) << " amp "
                  << r.amplitude << " ret " << r.return_residual << "\n";
    return 0;
}

int run_verify(const RunConfig& cfg) {
    // re-verifies the orbits recorded by a previous bifurcate run
    const auto dir = io::ensure_outdir(cfg);
    std::ifstream in(dir + "/orbits.json");
    if (!in) throw IoError("no orbits.json in '" + dir + "' (run bifurcate first)");
    json orbits;
    in >> orbits;

    auto model = model_of(cfg);
    auto bundle = spectral::find_crossing(*model, cfg.grid, cfg.crossing_lo, cfg.crossing_hi,
                                          cfg.tol.crossing());
    json verdicts = json::array();
    for (const auto& o : orbits) {
        if (!o.value("converged", false)) continue;
        const double eps = o.at("eps").get<double>();
        reduction::PdeReductionSystem sys(
            model, cfg.grid, reduction::bundle_at(*model, cfg.grid, eps, bundle),
            cfg.pipeline_dt);
        const Complex a1(o.at("a1").at(0).get<double>(), o.at("a1").at(1).get<double>());
        const Complex a2(o.at("a2").at(0).get<double>(), o.at("a2").at(1).get<double>());
        const double T = o.at("T").get<double>();
        auto tr = reduction::solve_transverse(sys, a1, a2, T, 0.0, std::nullopt,
                                              cfg.tol.reduction());
        auto v = reduction::verify_orbit(sys, sys.eigenstate(a1, a2) + tr.v_perp, T);
        verdicts.push_back({{"eps", eps},
                            {"kind", o.at("kind")},
                            {"return_residual", v.return_residual},
                            {"shift_residual", v.shift_residual},
                            {"speed", v.speed}});
        std::cout << "eps " << eps << " " << o.at("kind").get<std::string>() << " ret "
                  << v.return_residual << " shift " << v.shift_residual << "\n";
    }
    Manifest man("verify", cfg);
    man.summary() = {{"verdicts", verdicts}};
    man.write(dir + "/verify.manifest.json");
    return 0;
}

int run_selftest(const RunConfig& cfg) {
    using reduction::SyntheticSystem;
    auto P = SyntheticSystem::from_targets(1.0, 2.0 * pi, Complex(-1.0, 0.3),
                                           Complex(-2.0, -0.1));
    SyntheticSystem sys(P, 0.0);
    auto fit = reduction::fit_coefficients(sys, sys.gamma_prime_exact(), 0.05, 2,
                                           cfg.tol.reduction());
    const double errL = std::abs(fit.Lambda - Complex(-1.0, 0.3)) / std::abs(Complex(-1.0, 0.3));
    const double errG = std::abs(fit.Gamma - Complex(-2.0, -0.1)) / std::abs(Complex(-2.0, -0.1));
    const double spur = fit.spurious_max / std::abs(fit.Lambda);
    std::cout << "synthetic recovery: Lambda err " << errL << ", Gamma err " << errG
              << ", spurious " << spur << "\n";
    const auto dir = io::ensure_outdir(cfg);
    Manifest man("selftest", cfg);
    man.summary() = {{"lambda_rel_err", errL}, {"gamma_rel_err", errG}, {"spurious", spur}};
    man.write(dir + "/selftest.manifest.json");
    if (errL > 0.02 || errG > 0.02 || spur > cfg.tol.spurious_threshold)
        throw NumericalError("synthetic ground-truth recovery out of tolerance");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transverse O(2) Hopf bifurcation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    bool print_config = false;
    app.add_option("-c,--config", config_path, "JSON configuration file");
    app.add_flag("--print-config", print_config, "print the effective configuration");

    const char* names[] = {"profile", "spectrum", "evans",     "crossing", "energy-check",
                           "reduce",  "bifurcate", "verify",   "selftest"};
    for (const char* n : names) app.add_subcommand(n);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : io::load_config(config_path);
        if (const char* env = std::getenv("O2HOPF_OUTDIR")) cfg.outdir = env;
        cfg.grid.validate();
        if (print_config) std::cout << io::dump_config(cfg);

        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "profile") return run_profile(cfg);
        if (cmd == "spectrum") return run_spectrum(cfg);
        if (cmd == "evans") return run_evans(cfg);
        if (cmd == "crossing") return run_crossing(cfg);
        if (cmd == "energy-check") return run_energy_check(cfg);
        if (cmd == "reduce") return run_reduce(cfg);
        if (cmd == "bifurcate") return run_bifurcate(cfg);
        if (cmd == "verify") return run_verify(cfg);
        if (cmd == "selftest") return run_selftest(cfg);
        return 1;
    } catch (const std::exception& e) {
        json err{{"error", e.what()}};
        std::cerr << err.dump() << "\n";
        return exit_code_for(e);
    }
}
