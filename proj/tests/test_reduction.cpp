#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "o2hopf/reduction/ops.hpp"
#include "o2hopf/reduction/pde_system.hpp"
#include "o2hopf/reduction/synthetic.hpp"

using namespace o2hopf;
using namespace o2hopf::reduction;

namespace {

SyntheticSystem::Params target_params() {
    return SyntheticSystem::from_targets(1.0, 2.0 * pi, Complex(-1.0, 0.3),
                                         Complex(-2.0, -0.1));
}

struct M0Fixture {
    std::shared_ptr<pde::ModelM0> model = std::make_shared<pde::ModelM0>();
    pde::DiscretizationGrid grid = pde::m0_calibration_grid();
    spectral::EigenBundle bundle;
    double gamma_prime = 0.0;

    M0Fixture() {
        bundle = spectral::find_crossing(*model, grid, -0.05, 0.05);
        gamma_prime = bundle.gamma_prime0;
    }
};

M0Fixture& m0_fixture() {
    static M0Fixture fx;
    return fx;
}

}  // namespace

TEST_CASE("displacement on the synthetic system") {
    SUBCASE("zero input, zero displacement; T = 0 identity") {
        SyntheticSystem sys(target_params(), 0.0);
        auto d = displacement(sys, Complex(0, 0), Complex(0, 0), sys.zero_state(),
                              sys.T_star());
        CHECK(std::abs(d.D1) == 0.0);
        CHECK(std::abs(d.D2) == 0.0);
        CHECK(sys.norm(d.D3) == 0.0);
    }
    SUBCASE("linear system reproduces the exact multiplier") {
        SyntheticSystem::Params p = target_params();
        p.Lambda_hat = p.Gamma_hat = 0.0;
        p.eta = p.feedback = 0.0;
        SyntheticSystem sys(p, 0.07);
        const Complex a1(0.02, -0.01), a2(0.004, 0.009);
        const double T = 0.8 * sys.T_star();
        auto d = displacement(sys, a1, a2, sys.zero_state(), T);
        const Complex expect = (std::exp(T * sys.lambda_plus()) - 1.0) * a1;
        CHECK(std::abs(d.D1 - expect) < 1e-9);
        CHECK(std::abs(d.D2 - (std::exp(T * sys.lambda_plus()) - 1.0) * a2) < 1e-9);
        CHECK(d.route_mismatch < 1e-9);
    }
    SUBCASE("integral and direct routes agree to quadrature tolerance") {
        SyntheticSystem sys(target_params(), 0.0);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-0.05, 0.05);
        for (int i = 0; i < 25; ++i) {
            const Complex a1(u(rng), u(rng)), a2(u(rng), u(rng));
            auto v = SyntheticSystem::pack(0.0, 0.0, Complex(u(rng), u(rng)));
            auto d = displacement(sys, a1, a2, v, sys.T_star() * (1.0 + 0.1 * u(rng)));
            CHECK(d.route_mismatch <= 20.0 * d.quadrature_tol + 1e-12);
        }
    }
    SUBCASE("complement leak is rejected") {
        SyntheticSystem sys(target_params(), 0.0);
        auto bad = SyntheticSystem::pack(Complex(0.01, 0.0), 0.0, 0.0);
        CHECK_THROWS_AS(displacement(sys, Complex(0, 0), Complex(0, 0), bad, 1.0),
                        ProjectionLeak);
    }
}

TEST_CASE("transverse fixed point on the synthetic system") {
    SyntheticSystem sys(target_params(), 0.0);
    const double T = sys.T_star();

    SUBCASE("origin maps to zero") {
        auto tr = solve_transverse(sys, Complex(0, 0), Complex(0, 0), T);
        CHECK(sys.norm(tr.v_perp) == 0.0);
    }
    SUBCASE("quadratic smallness across a decade") {
        double ratio_lo = 1e300, ratio_hi = 0.0;
        for (double a = 0.004; a <= 0.045; a *= 1.8) {
            auto tr = solve_transverse(sys, Complex(a, 0), Complex(0.7 * a, 0.1 * a), T);
            const double r = sys.norm(tr.v_perp) / (a * a);
            ratio_lo = std::min(ratio_lo, r);
            ratio_hi = std::max(ratio_hi, r);
        }
        CHECK(ratio_hi / ratio_lo < 1.6);
    }
    SUBCASE("slaving law of the damped mode") {
        const Complex a1(0.03, 0.0), a2(0.02, -0.01);
        auto tr = solve_transverse(sys, a1, a2, T);
        const auto& P = sys.params();
        const Complex want = P.eta * a1 * a2 / (P.rho + Complex(0.0, 2.0 * P.omega0));
        const Complex got = SyntheticSystem::zeta(tr.v_perp);
        CHECK(std::abs(got - want) < 0.1 * std::abs(want));
    }
}

TEST_CASE("right inverse on the synthetic complement") {
    SyntheticSystem sys(target_params(), 0.0);
    const double T = sys.T_star();
    auto y0 = sys.zero_state();
    CHECK(sys.norm(right_inverse_apply(sys, y0, T)) == 0.0);

    SyntheticSystem::State z = SyntheticSystem::pack(0.0, 0.0, Complex(0.3, -0.2));
    SyntheticSystem::State y = z - sys.linT(z, T);
    auto x = right_inverse_apply(sys, y, T);
    CHECK(sys.norm((x - sys.linT(x, T)) - y) < 1e-8 * sys.norm(y) + 1e-10);
}

TEST_CASE("coefficient recovery on the synthetic ground truth") {
    SyntheticSystem sys(target_params(), 0.0);
    auto fit = fit_coefficients(sys, sys.gamma_prime_exact(), 0.05);
    CHECK(fit.kappa == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.chi == doctest::Approx(2.0 * pi).epsilon(1e-12));
    CHECK(std::abs(fit.Lambda - Complex(-1.0, 0.3)) < 0.02 * std::abs(Complex(-1.0, 0.3)));
    CHECK(std::abs(fit.Gamma - Complex(-2.0, -0.1)) < 0.02 * std::abs(Complex(-2.0, -0.1)));
    CHECK(fit.spurious_max <= 1e-3 * std::abs(fit.Lambda));

    SUBCASE("linear system fits zero cubic content") {
        SyntheticSystem::Params p = target_params();
        p.Lambda_hat = p.Gamma_hat = 0.0;
        p.eta = p.feedback = 0.0;
        SyntheticSystem lin(p, 0.0);
        auto lfit = fit_coefficients(lin, lin.gamma_prime_exact(), 0.05);
        CHECK(std::abs(lfit.Lambda) < 1e-6);
        CHECK(std::abs(lfit.Gamma) < 1e-6);
    }
}

TEST_CASE("reduced map symmetries on the synthetic system") {
    SyntheticSystem sys(target_params(), 0.0);
    const Complex a1(0.03, 0.01), a2(-0.02, 0.025);
    auto [n1, n2] = reduced_maps(sys, a1, a2, 0.02);

    SUBCASE("trivial branch") {
        auto [t1, t2] = reduced_maps(sys, Complex(0, 0), Complex(0, 0), 0.013);
        CHECK(std::abs(t1) == 0.0);
        CHECK(std::abs(t2) == 0.0);
    }
    SUBCASE("swap") {
        auto [s1, s2] = reduced_maps(sys, a2, a1, 0.02);
        CHECK(std::abs(s1 - n2) < 1e-9);
        CHECK(std::abs(s2 - n1) < 1e-9);
    }
    SUBCASE("rotation") {
        const Complex ph = std::exp(Complex(0, 1.234));
        auto [r1, r2] = reduced_maps(sys, ph * a1, std::conj(ph) * a2, 0.02);
        CHECK(std::abs(std::abs(r1) - std::abs(n1)) < 1e-8);
        CHECK(std::abs(r1 - ph * n1) < 1e-8);
        CHECK(std::abs(r2 - std::conj(ph) * n2) < 1e-8);
    }
}

TEST_CASE("synthetic pipeline: branches and the square-root law") {
    auto factory = [&](double eps) { return SyntheticSystem(target_params(), eps); };
    SyntheticSystem at0(target_params(), 0.0);
    auto fit = fit_coefficients(at0, at0.gamma_prime_exact(), 0.05);

    std::vector<double> eps_list;
    for (int i = 0; i < 5; ++i) eps_list.push_back(2e-3 * std::pow(10.0, i / 4.0));
    auto records = locate_periodic_orbits(
        factory, 0.0, eps_list, fit,
        {reduced::BranchKind::Traveling1, reduced::BranchKind::Standing});

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    double sxs = 0, sys_ = 0, sxxs = 0, sxys = 0;
    int ms = 0;
    for (const auto& r : records) {
        REQUIRE(r.converged);
        CHECK(r.return_residual < 1e-5);
        CHECK(std::abs(r.mu) < 10.0 * std::abs(r.eps));
        const double x = std::log(std::abs(r.eps)), y = std::log(r.amplitude);
        if (r.kind == reduced::BranchKind::Traveling1) {
            CHECK(r.shift_residual < 1e-6);
            CHECK(std::abs(std::abs(r.speed) - r.omega / 1.0) < 0.1 * r.omega);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++m;
        } else {
            CHECK(r.shift_residual > 0.2 * r.return_residual);
            sxs += x;
            sys_ += y;
            sxxs += x * x;
            sxys += x * y;
            ++ms;
        }
    }
    const double slope_t = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double slope_s = (ms * sxys - sxs * sys_) / (ms * sxxs - sxs * sxs);
    CHECK(std::abs(slope_t - 0.5) < 0.05);
    CHECK(std::abs(slope_s - 0.5) < 0.05);

    SUBCASE("non-bifurcating side yields no nontrivial branches") {
        auto neg = locate_periodic_orbits(factory, 0.0, {-0.01}, fit,
                                          {reduced::BranchKind::Traveling1});
        REQUIRE(neg.size() == 1);
        CHECK_FALSE(neg.front().converged);
    }
    SUBCASE("injected degeneracy refuses branch claims") {
        CoefficientFit bad = fit;
        bad.Gamma = bad.Lambda;
        CHECK_THROWS_AS(locate_periodic_orbits(factory, 0.0, {0.01}, bad,
                                               {reduced::BranchKind::Standing}),
                        GenericityViolation);
    }
}

TEST_CASE("kernel direction on the quasilinear shock") {
    auto model = std::make_shared<pde::ModelM1>();
    pde::DiscretizationGrid g;
    g.L = 14.0;
    g.N1 = 513;
    g.K = 4;
    g.dt = 0.02;
    TransverseOnlySystem sys(model, g, 0.0, 0.02);

    KernelInfo info;
    auto h = kernel_basis(sys, 3.0, &info);
    REQUIRE(h.has_value());
    CHECK(info.angle_to_seed < 1e-3);

    // direction is independent of T
    KernelInfo info2;
    auto h2 = kernel_basis(sys, 1.5, &info2);
    const double c = sys.inner(*h, *h2) / (sys.norm(*h) * sys.norm(*h2));
    CHECK(std::acos(std::min(1.0, std::abs(c))) < 1e-6);

    // raw finite-difference translation direction
    auto raw = sys.zero_state();
    {
        auto prof = pde::solve_profile(*model, 0.0, g);
        raw.modes[0] = prof.d1u.cast<Complex>();
        raw.modes[0].col(0).setZero();
        raw.modes[0].col(g.N1 - 1).setZero();
    }
    const double cr = sys.inner(*h, raw) / (sys.norm(*h) * sys.norm(raw));
    CHECK(std::acos(std::min(1.0, std::abs(cr))) < 1e-3);

    SUBCASE("kernel shift of the transverse fixed point") {
        const double b = 2e-3, T = 3.0;
        auto tr = solve_transverse(sys, Complex(0, 0), Complex(0, 0), T, b, h);
        CHECK(sys.norm(tr.v_perp - b * (*h)) < 20.0 * b * b);
    }
    SUBCASE("kernel direction is out of range") {
        CHECK_THROWS_AS(right_inverse_apply(sys, *h, 3.0, std::nullopt), IllConditioned);
    }
    SUBCASE("trivial-profile models report no kernel") {
        SyntheticSystem s2(target_params(), 0.0);
        KernelInfo ki;
        CHECK_FALSE(kernel_basis(s2, 1.0, &ki).has_value());
        CHECK_FALSE(ki.present);
    }
}

TEST_CASE("right inverse on the shock complement") {
    auto model = std::make_shared<pde::ModelM1>();
    pde::DiscretizationGrid g;
    g.L = 12.0;
    g.N1 = 129;
    g.K = 4;
    g.dt = 0.02;
    TransverseOnlySystem sys(model, g, 0.0, 0.02);
    auto h = kernel_basis(sys, 2.0);
    std::mt19937_64 rng(11);
    auto z = pde::random_field(2, g, rng, 0.5);
    auto y = z - sys.linT(z, 2.0);
    ReductionConfig cfg;
    cfg.gmres_max = 250;
    auto x = right_inverse_apply(sys, y, 2.0, h, cfg);
    CHECK(sys.norm((x - sys.linT(x, 2.0)) - y) <= 1e-8 * sys.norm(y) + 1e-10);
}

TEST_CASE("M0 reduction pieces at the crossing") {
    auto& fx = m0_fixture();
    PdeReductionSystem sys(fx.model, fx.grid, fx.bundle, 0.02);
    ReductionConfig cfg;

    SUBCASE("setup invariants") {
        CHECK(std::abs(sys.T_star() * fx.bundle.omega0 - 2.0 * pi * fx.bundle.k_star) <
              1e-10);
        CHECK_FALSE(kernel_basis(sys, sys.T_star()).has_value());
    }
    SUBCASE("displacement route consistency at the integrator's order") {
        // the Duhamel and direct routes differ by the splitting error of the
        // discrete flow; the gap must vanish at second order in dt
        PdeReductionSystem fine(fx.model, fx.grid, fx.bundle, 0.01);
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-0.01, 0.01);
        for (int i = 0; i < 2; ++i) {
            const Complex a1(u(rng), u(rng)), a2(u(rng), u(rng));
            auto vp = sys.complement(pde::random_field(3, fx.grid, rng, 0.005));
            const double scale = std::abs(a1) + std::abs(a2) + sys.norm(vp);
            auto d = displacement(sys, a1, a2, vp, sys.T_star());
            auto df = displacement(fine, a1, a2, vp, fine.T_star());
            CHECK(d.route_mismatch < 1e-2 * scale);
            CHECK(df.route_mismatch < 0.35 * d.route_mismatch + 1e-12);
        }
    }
    SUBCASE("transverse smallness and reduced-map symmetry") {
        auto tr1 = solve_transverse(sys, Complex(0.02, 0), Complex(0.01, 0.005),
                                    sys.T_star(), 0.0, std::nullopt, cfg);
        auto tr2 = solve_transverse(sys, Complex(0.01, 0), Complex(0.005, 0.0025),
                                    sys.T_star(), 0.0, std::nullopt, cfg);
        const double q1 = sys.norm(tr1.v_perp) / (0.02 * 0.02);
        const double q2 = sys.norm(tr2.v_perp) / (0.01 * 0.01);
        CHECK(q1 / q2 < 2.0);
        CHECK(q2 / q1 < 2.0);

        const Complex a1(0.02, 0.004), a2(-0.012, 0.008);
        auto [n1, n2] = reduced_maps(sys, a1, a2, 0.01, 0.0, std::nullopt, cfg);
        auto [s1, s2] = reduced_maps(sys, a2, a1, 0.01, 0.0, std::nullopt, cfg);
        const double scale = std::abs(n1) + std::abs(n2) + 1e-14;
        CHECK(std::abs(s1 - n2) / scale < 1e-4);
        CHECK(std::abs(s2 - n1) / scale < 1e-4);

        const Complex ph = std::exp(Complex(0, 0.875));
        auto [r1, r2] = reduced_maps(sys, ph * a1, std::conj(ph) * a2, 0.01, 0.0,
                                     std::nullopt, cfg);
        CHECK(std::abs(r1 - ph * n1) / scale < 1e-4);
        CHECK(std::abs(r2 - std::conj(ph) * n2) / scale < 1e-4);
    }
}
