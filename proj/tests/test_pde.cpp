#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "o2hopf/pde/checkpoint.hpp"
#include "o2hopf/pde/energy.hpp"
#include "o2hopf/pde/evolve.hpp"
#include "o2hopf/pde/profile.hpp"
#include "o2hopf/pde/rhs.hpp"

using namespace o2hopf;
using namespace o2hopf::pde;

namespace {

DiscretizationGrid small_grid(double L = 12.0, int N1 = 257, int K = 4, double dt = 0.01) {
    DiscretizationGrid g;
    g.L = L;
    g.N1 = N1;
    g.K = K;
    g.dt = dt;
    return g;
}

ModelM1 burgers_variant() {
    ModelM1::Params p;
    p.c1 = 1.0;
    p.c2 = 0.5;
    p.c3 = 0.0;  // decoupled Burgers parabolic component, endstates -/+1
    p.b = 0.5;
    p.delta0 = 1.0;
    return ModelM1(p);
}

ModelM0 linear_m0() {
    ModelM0::Params p;
    p.s1 = p.s2 = p.s3 = p.s4 = 0.0;
    return ModelM0(p);
}

}  // namespace

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(small_grid(12, 32).validate(), InvalidInput);
    CHECK_THROWS_AS(small_grid(-1).validate(), InvalidInput);
    CHECK_NOTHROW(small_grid().validate());
}

TEST_CASE("M1 profile: collocation against the tanh oracle") {
    ModelM1 m = burgers_variant();
    auto g = small_grid();
    auto prof = solve_profile(m, 0.0, g);
    CHECK(prof.ode_residual <= 1e-10);
    CHECK(prof.endstate_gap <= 1e-8);

    // closed form u2 = -tanh(x/(2b)); interior error is O(h^2)
    double err = 0.0;
    for (int i = 0; i < g.N1; ++i)
        err = std::max(err, std::abs(prof.u(1, i) - m.profile_exact(0.0, g.x1(i))[1]));
    CHECK(err < 1e-2);

    auto g2 = small_grid(12.0, 513);
    auto prof2 = solve_profile(m, 0.0, g2);
    double err2 = 0.0;
    for (int i = 0; i < g2.N1; ++i)
        err2 = std::max(err2, std::abs(prof2.u(1, i) - m.profile_exact(0.0, g2.x1(i))[1]));
    const double rate = std::log2(err / err2);
    CHECK(rate > 1.5);
    CHECK(rate < 2.5);
}

TEST_CASE("M1 default profile and oddness at eps = 0") {
    ModelM1 m;  // coupled variant, mtilde = 0.2
    auto g = small_grid(14.0, 301);
    auto prof = solve_profile(m, 0.0, g);
    CHECK(prof.ode_residual <= 1e-10);

    // shocked component is odd about x1 = 0 after removing the offset
    const double mt = m.mtilde();
    double odd = 0.0;
    for (int i = 0; i < g.N1; ++i)
        odd = std::max(odd, std::abs((prof.u(1, i) - mt) + (prof.u(1, g.N1 - 1 - i) - mt)));
    CHECK(odd < 1e-10);
}

TEST_CASE("profile: domain too short") {
    ModelM1 m = burgers_variant();
    DiscretizationGrid g = small_grid(3.0, 101);
    g.N1 = 101;
    CHECK_THROWS_AS(solve_profile(m, 0.0, g), NoProfile);
}

TEST_CASE("rhs: constants are equilibria, exactly") {
    ModelM1 m;
    auto g = small_grid();
    ShockProfile constant;
    constant.eps = 0.0;
    constant.u_minus = m.endstate(0.0, +1);
    constant.u_plus = m.endstate(0.0, +1);
    constant.u = constant.u_minus.replicate(1, g.N1);
    constant.d1u = Mat::Zero(2, g.N1);
    RhsContext ctx(m, 0.0, constant, g);
    CHECK(steady_residual(ctx).cwiseAbs().maxCoeff() == 0.0);
    ChannelField zero(2, g);
    CHECK(rhs_perturbation(ctx, zero).max_abs() == 0.0);
}

TEST_CASE("rhs: steady residual of the profile decays at second order") {
    ModelM1 m;
    double errs[2];
    int idx = 0;
    for (int N1 : {257, 513}) {
        auto g = small_grid(12.0, N1);
        auto prof = solve_profile(m, 0.05, g);
        RhsContext ctx(m, 0.05, prof, g);
        errs[idx++] = steady_residual(ctx).cwiseAbs().maxCoeff();
    }
    const double rate = std::log2(errs[0] / errs[1]);
    CHECK(rate > 1.9);
    CHECK(rate < 2.1);
}

TEST_CASE("rhs: hand-coded symbol application on a pure k=1 mode") {
    ModelM0 m = linear_m0();
    auto g = small_grid(12.0, 129, 4, 0.01);
    auto prof = solve_profile(m, 0.0, g);
    RhsContext ctx(m, 0.0, prof, g);

    ChannelField v(3, g);
    for (int i = 0; i < g.N1; ++i) {
        const double x = g.x1(i);
        const double bump = std::exp(-0.25 * x * x);
        v.modes[1](0, i) = Complex(bump, 0.3 * bump);
        v.modes[1](2, i) = Complex(-0.2 * bump, 0.1 * bump);
    }
    v.modes[1].col(0).setZero();
    v.modes[1].col(g.N1 - 1).setZero();

    ChannelField out = rhs_perturbation(ctx, v);

    // independent loop coding of the discrete operator at mode 1
    const auto& P = m.params();
    const double h = g.h();
    CMat expect = CMat::Zero(3, g.N1);
    const Complex ik(0.0, 1.0);
    for (int i = 1; i + 1 < g.N1; ++i) {
        const double phi = m.well(g.x1(i));
        CVec u = v.modes[1].col(i), up = v.modes[1].col(i + 1), um = v.modes[1].col(i - 1);
        expect(0, i) = P.b1 * (up[0] - 2.0 * u[0] + um[0]) / (h * h) - P.d1 * u[0] -
                       ik * (P.alpha * u[2]) - P.c1inf * u[0] +
                       phi * (P.kappa0 * u[0] - P.w0 * u[1]);
        expect(1, i) = P.b1 * (up[1] - 2.0 * u[1] + um[1]) / (h * h) - P.d1 * u[1] -
                       P.c1inf * u[1] + phi * (P.w0 * u[0] + P.kappa0 * u[1]);
        expect(2, i) = P.b3 * (up[2] - 2.0 * u[2] + um[2]) / (h * h) - P.d3 * u[2] -
                       ik * (P.beta * u[0]) - P.c3inf * u[2] + phi * (P.kappa3 * u[2]);
    }
    CHECK((out.modes[1] - expect).cwiseAbs().maxCoeff() < 1e-12);
    // other modes stay empty for a linear model
    CHECK(out.modes[0].cwiseAbs().maxCoeff() < 1e-14);
    CHECK(out.modes[2].cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("rhs splits into explicit + viscous parts") {
    ModelM0 m;
    auto g = small_grid(12.0, 129);
    auto prof = solve_profile(m, 0.0, g);
    RhsContext ctx(m, 0.0, prof, g);
    std::mt19937_64 rng(5);
    ChannelField v = random_field(3, g, rng, 0.1);
    ChannelField full = rhs_perturbation(ctx, v);
    ChannelField ex = rhs_explicit(ctx, v);
    for (int k = 0; k <= g.K; ++k) {
        CMat visc = CMat::Zero(3, g.N1);
        o2hopf::pde::detail::add_viscous_mode(ctx, k, v.modes[k], visc);
        visc.col(0).setZero();
        visc.col(g.N1 - 1).setZero();
        CHECK((full.modes[k] - ex.modes[k] - visc).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("evolve: zero data stays zero; linear constant-coefficient semigroup oracle") {
    ModelM0::Params p;
    p.s1 = p.s2 = p.s3 = p.s4 = 0.0;
    p.kappa0 = 0.0;
    p.w0 = 0.0;
    p.kappa3 = 0.0;  // well fully off: constant coefficients
    ModelM0 m(p);
    auto g = small_grid(12.0, 193, 4, 2.5e-4);
    auto prof = solve_profile(m, 0.0, g);
    RhsContext ctx(m, 0.0, prof, g);

    ChannelField zero(3, g);
    CHECK(evolve(ctx, zero, 1.0).max_abs() == 0.0);

    // discrete sine mode is an exact eigenvector of the Dirichlet Laplacian
    const int mode_m = 3, kmode = 1;
    const double h = g.h();
    const double lap = -4.0 / (h * h) * std::pow(std::sin(mode_m * pi * h / (4.0 * g.L)), 2);
    ChannelField v0(3, g);
    CVec dir(3);
    dir << Complex(1.0, 0.2), Complex(-0.4, 0.1), Complex(0.3, -0.5);
    for (int i = 0; i < g.N1; ++i) {
        const double s = std::sin(mode_m * pi * (g.x1(i) + g.L) / (2.0 * g.L));
        v0.modes[kmode].col(i) = 0.01 * s * dir;
    }
    CMat sym = CMat::Zero(3, 3);
    sym(0, 0) = lap * p.b1 - kmode * kmode * p.d1 - p.c1inf;
    sym(1, 1) = lap * p.b1 - kmode * kmode * p.d1 - p.c1inf;
    sym(2, 2) = lap * p.b3 - kmode * kmode * p.d3 - p.c3inf;
    sym(0, 2) = Complex(0, -double(kmode)) * p.alpha;
    sym(2, 0) = Complex(0, -double(kmode)) * p.beta;

    const double T = 2.0;
    Eigen::ComplexEigenSolver<CMat> es(sym);
    CMat expT = es.eigenvectors() *
                (T * es.eigenvalues().array()).exp().matrix().asDiagonal() *
                es.eigenvectors().inverse();
    ChannelField vT = evolve(ctx, v0, T);
    double err = 0.0, scale = 0.0;
    for (int i = 0; i < g.N1; ++i) {
        CVec want = expT * v0.modes[kmode].col(i);
        err = std::max(err, (vT.modes[kmode].col(i) - want).cwiseAbs().maxCoeff());
        scale = std::max(scale, want.cwiseAbs().maxCoeff());
    }
    CHECK(err / scale < 1e-6);

    // the nonlinear path equals the linearized path when the model is linear
    ChannelField vTl = evolve_linearized(ctx, v0, T);
    double dmax = 0.0;
    for (int k = 0; k <= g.K; ++k)
        dmax = std::max(dmax, (vT.modes[k] - vTl.modes[k]).cwiseAbs().maxCoeff());
    CHECK(dmax < 1e-12);
}

TEST_CASE("evolve: small profile translate stays near the translate family") {
    ModelM1 m;
    auto g = small_grid(14.0, 301, 4, 0.005);
    auto prof = solve_profile(m, 0.0, g);
    RhsContext ctx(m, 0.0, prof, g);

    const double s = 0.05;
    ChannelField v0(2, g);
    for (int i = 1; i + 1 < g.N1; ++i) {
        const Vec shifted = m.profile_exact(0.0, g.x1(i) + s);
        const Vec here = prof.u.col(i);
        v0.modes[0].col(i) = (shifted - here).cast<Complex>();
    }
    ChannelField vT = evolve(ctx, v0, 2.0);

    auto dist_to_translate = [&](double sp) {
        ChannelField d = vT;
        for (int i = 1; i + 1 < g.N1; ++i)
            d.modes[0].col(i) -=
                (m.profile_exact(0.0, g.x1(i) + sp) - prof.u.col(i)).cast<Complex>();
        return l2_norm(d, g.h());
    };
    double best = 1e300;
    for (double sp = 0.0; sp <= 2.0 * s; sp += s / 20.0) best = std::min(best, dist_to_translate(sp));
    CHECK(best < 0.2 * s);
}

TEST_CASE("evolve_linearized: superposition to 1e-10") {
    ModelM0 m;
    auto g = small_grid(12.0, 129, 4, 0.005);
    auto prof = solve_profile(m, 0.0, g);
    RhsContext ctx(m, 0.0, prof, g);
    std::mt19937_64 rng(17);
    ChannelField a = random_field(3, g, rng, 1.0), b = random_field(3, g, rng, 1.0);
    const double al = 0.7, be = -1.3;
    ChannelField lhs = evolve_linearized(ctx, al * a + be * b, 1.0);
    ChannelField rhs_ = al * evolve_linearized(ctx, a, 1.0) + be * evolve_linearized(ctx, b, 1.0);
    double dmax = 0.0;
    for (int k = 0; k <= g.K; ++k)
        dmax = std::max(dmax, (lhs.modes[k] - rhs_.modes[k]).cwiseAbs().maxCoeff());
    CHECK(dmax < 1e-10);
}

TEST_CASE("evolve commutes with rotation and reflection") {
    ModelM0 m;
    auto g = small_grid(12.0, 129, 4, 0.01);
    auto prof = solve_profile(m, 0.0, g);
    RhsContext ctx(m, 0.0, prof, g);
    std::mt19937_64 rng(23);
    ChannelField v0 = random_field(3, g, rng, 0.05);
    const double T = 0.5, theta = 1.234;

    ChannelField a = rotate(evolve(ctx, v0, T), theta);
    ChannelField b = evolve(ctx, rotate(v0, theta), T);
    double dmax = 0.0;
    for (int k = 0; k <= g.K; ++k)
        dmax = std::max(dmax, (a.modes[k] - b.modes[k]).cwiseAbs().maxCoeff());
    CHECK(dmax < 1e-10);

    const Mat M = m.reflection();
    ChannelField c = reflect(evolve(ctx, v0, T), M);
    ChannelField d = evolve(ctx, reflect(v0, M), T);
    dmax = 0.0;
    for (int k = 0; k <= g.K; ++k)
        dmax = std::max(dmax, (c.modes[k] - d.modes[k]).cwiseAbs().maxCoeff());
    CHECK(dmax < 1e-10);
}

TEST_CASE("blow-up guard") {
    ModelM1 m;
    auto g = small_grid(12.0, 129, 4, 0.05);
    auto prof = solve_profile(m, 0.0, g);
    RhsContext ctx(m, 0.0, prof, g);
    ChannelField big(2, g);
    for (int i = 1; i + 1 < g.N1; ++i) big.modes[0](1, i) = 50.0 * std::exp(-0.1 * g.x1(i) * g.x1(i));
    EvolveOptions opts;
    opts.blowup_norm = 60.0;
    CHECK_THROWS_AS(evolve(ctx, big, 5.0, opts), BlowUp);
}

TEST_CASE("energy functional basics") {
    ModelM0 m;
    auto g = small_grid(12.0, 129);
    auto prof = solve_profile(m, 0.0, g);
    std::mt19937_64 rng(31);
    ChannelField v = random_field(3, g, rng, 0.3);

    ChannelField zero(3, g);
    CHECK(energy_functional(m, 0.0, prof, zero, 2, g).value == 0.0);

    // identity symmetrizer collapses to half the L2 norm squared
    auto e0 = energy_functional(m, 0.0, prof, v, 0, g);
    const double l2 = l2_norm(v, g.h());
    CHECK(std::abs(e0.value - 0.5 * l2 * l2) < 1e-12 * (1.0 + l2 * l2));
    CHECK(e0.c_equiv == doctest::Approx(0.5));
    CHECK(e0.C_equiv == doctest::Approx(0.5));

    auto e2 = energy_functional(m, 0.0, prof, v, 2, g);
    ChannelField v2 = 2.0 * v;
    auto e2b = energy_functional(m, 0.0, prof, v2, 2, g);
    CHECK(std::abs(e2b.value - 4.0 * e2.value) < 1e-12 * (1.0 + e2b.value));
}

TEST_CASE("weighted norm: eta = 0, point support, Gaussian quadrature oracle") {
    ModelM0 m;
    auto g = small_grid(12.0, 129);
    std::mt19937_64 rng(37);
    ChannelField v = random_field(3, g, rng, 0.4);
    CHECK(std::abs(weighted_norm(v, 0.0, 1, g) - sobolev_norm(v, 1, g.h())) <
          1e-12 * (1.0 + sobolev_norm(v, 1, g.h())));

    ChannelField pt(3, g);
    pt.modes[0](0, (g.N1 - 1) / 2) = 1.0;  // x1 = 0
    const double ratio = weighted_norm(pt, 0.3, 0, g) / weighted_norm(pt, 0.0, 0, g);
    CHECK(std::abs(ratio - std::exp(0.3 * 1.0)) < 1e-10);

    // 1-D Gaussian bump vs high-resolution quadrature
    DiscretizationGrid fine = small_grid(12.0, 32769);
    Vec f(fine.N1);
    for (int i = 0; i < fine.N1; ++i) f[i] = std::exp(-fine.x1(i) * fine.x1(i));
    const double got = weighted_norm(f, 0.1, 1, fine);
    const int NO = 2'000'000;
    const double ho = 24.0 / NO;
    double acc = 0.0;
    for (int i = 0; i <= NO; ++i) {
        const double x = -12.0 + i * ho;
        const double gau = std::exp(-x * x);
        const double dgau = -2.0 * x * gau;
        const double w = std::exp(0.2 * std::sqrt(1.0 + x * x));
        const double trap = (i == 0 || i == NO) ? 0.5 : 1.0;
        acc += trap * w * (gau * gau + dgau * dgau);
    }
    const double oracle = std::sqrt(ho * acc);
    CHECK(std::abs(got - oracle) / oracle < 1e-6);

    DiscretizationGrid g9 = small_grid(200.0, 1025);
    CHECK_THROWS_AS(weighted_norm(f, 0.5, 0, g9), WeightOverflow);
}

TEST_CASE("linearization error: quadratic scaling on M1") {
    ModelM1 m;
    auto g = small_grid(14.0, 201, 4, 0.01);
    auto prof = solve_profile(m, 0.0, g);
    RhsContext ctx(m, 0.0, prof, g);
    std::mt19937_64 rng(41);
    ChannelField shape = random_field(2, g, rng, 1.0);
    const double base = 1e-2 / shape.max_abs();
    ChannelField v1 = base * shape;
    ChannelField vh = 0.5 * base * shape;

    ChannelField zero(2, g);
    CHECK(linearization_error(ctx, zero, 1.0, 2).err == 0.0);

    auto e1 = linearization_error(ctx, v1, 1.0, 2);
    auto eh = linearization_error(ctx, vh, 1.0, 2);
    const double factor = e1.err / eh.err;
    CHECK(factor > 3.5);
    CHECK(factor < 4.5);
}

TEST_CASE("checkpoint round trip") {
    ModelM0 m;
    auto g = small_grid(12.0, 129);
    std::mt19937_64 rng(43);
    ChannelField v = random_field(3, g, rng, 0.7);
    const std::string path = (std::filesystem::temp_directory_path() / "o2hf_cp.bin").string();
    write_checkpoint(path, v, g);
    auto cp = read_checkpoint(path);
    CHECK(cp.grid.N1 == g.N1);
    CHECK(cp.grid.K == g.K);
    CHECK(cp.grid.L == g.L);
    double dmax = 0.0;
    for (int k = 0; k <= g.K; ++k)
        dmax = std::max(dmax, (cp.field.modes[k] - v.modes[k]).cwiseAbs().maxCoeff());
    CHECK(dmax == 0.0);
    std::filesystem::remove(path);
}

TEST_CASE("model structural invariants at random states") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ModelM1 m1;
    ModelM0 m0;
    double theta_min = 1e300;
    for (int trial = 0; trial < 1000; ++trial) {
        const double eps = 0.1 * u(rng);
        for (const ModelSystem* mp : {(const ModelSystem*)&m1, (const ModelSystem*)&m0}) {
            const ModelSystem& m = *mp;
            const int n = m.n(), r = m.r();
            Vec state(n);
            for (int c = 0; c < n; ++c) state[c] = u(rng);

            // (A1) block form: only the lower-right r x r block is nonzero
            if (n - r > 0)
                for (int j = 1; j <= 2; ++j)
                    for (int k = 1; k <= 2; ++k) {
                        const Mat B = m.visc(j, k, eps, state);
                        CHECK(B.topRows(n - r).cwiseAbs().maxCoeff() == 0.0);
                        CHECK(B.leftCols(n - r).cwiseAbs().maxCoeff() == 0.0);
                    }

            // (A1) linearity of the first n-r flux components: second
            // difference along a random direction vanishes
            if (n - r > 0) {
                Vec dir(n);
                for (int c = 0; c < n; ++c) dir[c] = u(rng);
                Mat Up = state + 0.1 * dir, Um = state - 0.1 * dir, U0 = state;
                Mat Fp, Fm, F0;
                m.flux(1, eps, Up, Fp);
                m.flux(1, eps, Um, Fm);
                m.flux(1, eps, U0, F0);
                const Vec second = (Fp.col(0) + Fm.col(0) - 2.0 * F0.col(0)).head(n - r);
                CHECK(second.cwiseAbs().maxCoeff() < 1e-12);
            }

            // (A2)(iii) ellipticity of the parabolic block
            Vec v1(r), v2(r);
            for (int c = 0; c < r; ++c) {
                v1[c] = u(rng);
                v2[c] = u(rng);
            }
            const Mat A022 = m.symmetrizer(eps, state).bottomRightCorner(r, r);
            double quad = 0.0;
            const Vec* vv[2] = {&v1, &v2};
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) {
                    const Mat bjk =
                        m.visc(j + 1, k + 1, eps, state).bottomRightCorner(r, r);
                    quad += vv[j]->dot(A022 * bjk * (*vv[k]));
                }
            const double den = v1.squaredNorm() + v2.squaredNorm();
            if (den > 1e-12) theta_min = std::min(theta_min, quad / den);

            // (B1) reflection equivariance of the fluxes and source
            const Mat M = m.reflection();
            Mat F1r, F1, F2r, F2;
            Mat mstate = M * state;
            m.flux(1, eps, mstate, F1r);
            m.flux(1, eps, Mat(state), F1);
            m.flux(2, eps, mstate, F2r);
            m.flux(2, eps, Mat(state), F2);
            CHECK((F1r.col(0) - M * F1.col(0)).cwiseAbs().maxCoeff() < 1e-12);
            CHECK((F2r.col(0) + M * F2.col(0)).cwiseAbs().maxCoeff() < 1e-12);
            if (m.has_source()) {
                Vec x1(1);
                x1 << u(rng) * 5.0;
                Mat G, Gr;
                m.source(eps, x1, Mat(state), G);
                m.source(eps, x1, mstate, Gr);
                CHECK((Gr.col(0) - M * G.col(0)).cwiseAbs().maxCoeff() < 1e-12);
            }
        }
    }
    CHECK(theta_min > 0.0);
}
