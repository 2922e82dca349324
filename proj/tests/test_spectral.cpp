#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "o2hopf/spectral/crossing.hpp"
#include "o2hopf/spectral/evans.hpp"

using namespace o2hopf;
using namespace o2hopf::pde;
using namespace o2hopf::spectral;

namespace {

DiscretizationGrid grid_of(double L, int N1, int K = 4, double dt = 0.01) {
    DiscretizationGrid g;
    g.L = L;
    g.N1 = N1;
    g.K = K;
    g.dt = dt;
    return g;
}

// profile sampled from the closed form; bypasses the collocation so fine
// grids stay cheap
ShockProfile sampled_profile(const ModelSystem& m, double eps, const DiscretizationGrid& g) {
    ShockProfile p;
    p.eps = eps;
    p.u_minus = m.endstate(eps, -1);
    p.u_plus = m.endstate(eps, +1);
    p.u.resize(m.n(), g.N1);
    for (int i = 0; i < g.N1; ++i) p.u.col(i) = m.exact_profile_state(eps, g.x1(i));
    p.d1u = Mat::Zero(m.n(), g.N1);
    for (int i = 1; i + 1 < g.N1; ++i)
        p.d1u.col(i) = (p.u.col(i + 1) - p.u.col(i - 1)) / (2.0 * g.h());
    return p;
}

}  // namespace

TEST_CASE("assemble_Lk matches the stencil application") {
    ModelM1 m;
    auto g = grid_of(12.0, 129);
    auto prof = solve_profile(m, 0.03, g);
    RhsContext ctx(m, 0.03, prof, g);
    std::mt19937_64 rng(3);
    for (int k : {0, 1, 3}) {
        auto op = assemble_Lk(ctx, k);
        ChannelField f = random_field(2, g, rng, 1.0);
        const CVec x = mode_to_interior(f.modes[k]);
        const CVec y = op.A * x;
        const CMat ystencil = apply_Lk(ctx, k, f.modes[k]);
        CHECK((interior_to_mode(y, 2, g.N1) - ystencil).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("mode relation L_k - L_0 = ik J - k^2 B22 at matrix level") {
    ModelM1 m;
    auto g = grid_of(12.0, 129);
    auto prof = solve_profile(m, 0.0, g);
    RhsContext ctx(m, 0.0, prof, g);
    const CMat L0 = assemble_Lk(ctx, 0).A;
    const CMat L1 = assemble_Lk(ctx, 1).A;
    const int d = int(L0.rows());
    CMat B22big = CMat::Zero(d, d);
    for (int j = 0; j < d / 2; ++j)
        B22big.block(2 * j, 2 * j, 2, 2) = ctx.B22.cast<Complex>();
    const CMat J = (L1 - L0 + B22big) / Complex(0, 1);
    for (int k : {2, 3}) {
        const CMat Lk = assemble_Lk(ctx, k).A;
        const CMat relation = L0 + Complex(0, double(k)) * J - double(k * k) * B22big;
        CHECK((Lk - relation).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("reflection conjugation: L_{-k} = M L_k M and spectra agree") {
    ModelM0 m;
    auto g = grid_of(10.0, 97);
    auto prof = solve_profile(m, 0.02, g);
    RhsContext ctx(m, 0.02, prof, g);
    const int k = 2;
    const CMat Lk = assemble_Lk(ctx, k).A;
    const CMat Lmk = assemble_Lk(ctx, -k).A;
    const int d = int(Lk.rows());
    CMat Mbig = CMat::Zero(d, d);
    for (int j = 0; j < d / 3; ++j)
        Mbig.block(3 * j, 3 * j, 3, 3) = m.reflection().cast<Complex>();
    CHECK((Mbig * Lk * Mbig - Lmk).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::ComplexEigenSolver<CMat> ek(Lk), emk(Lmk);
    std::vector<Complex> smk(emk.eigenvalues().data(), emk.eigenvalues().data() + d);
    double dmax = 0.0;
    std::vector<bool> used(d, false);
    for (int i = 0; i < d; ++i) {
        int best = -1;
        double db = 1e300;
        for (int j = 0; j < d; ++j) {
            if (used[j]) continue;
            const double dd = std::abs(ek.eigenvalues()[i] - smk[j]);
            if (dd < db) {
                db = dd;
                best = j;
            }
        }
        used[best] = true;
        dmax = std::max(dmax, db);
    }
    CHECK(dmax < 1e-8);
}

TEST_CASE("spectrum_in_region basics and the M1 translation mode") {
    ModelM1 m;
    auto g = grid_of(12.0, 4097);
    auto prof = sampled_profile(m, 0.0, g);
    RhsContext ctx(m, 0.0, prof, g);

    // empty region
    ModelM1 msmall;
    auto gs = grid_of(12.0, 129);
    auto profs = solve_profile(msmall, 0.0, gs);
    RhsContext ctxs(msmall, 0.0, profs, gs);
    auto op = assemble_Lk(ctxs, 0);
    Region empty;
    empty.re_min = 1.0;
    empty.re_max = -1.0;
    CHECK(spectrum_in_region(op, empty).empty());

    // fine-grid inverse iteration: eigenvalue near zero, eigenvector along d1u
    EigenPair p = eigen_nearest(ctx, 0, Complex(1e-3, 0.0), 40, 1e-11);
    CHECK(std::abs(p.lambda) < 2e-4);
    const CVec d1 = mode_to_interior(prof.d1u.cast<Complex>());
    const double cosang = std::abs(p.vec.dot(d1)) / (p.vec.norm() * d1.norm());
    const double angle = std::acos(std::min(1.0, cosang));
    CHECK(angle < 1e-4);
}

TEST_CASE("M0 crossing: closure of the tuning loop") {
    ModelM0 m;
    auto g = m0_calibration_grid();
    auto b = find_crossing(m, g, -0.05, 0.05);
    CHECK(b.k_star == 1);
    CHECK(std::abs(b.eps0) < 1e-8);
    CHECK(std::abs(b.omega0 - m.params().omega_target) < 1e-6);
    CHECK(b.gamma_prime0 > 0.0);
    CHECK(std::abs(b.gamma0) <= 1e-10);
    CHECK(b.biorth_w_wt <= 1e-8);
    CHECK(b.biorth_sw_wt <= 1e-8);

    // gamma changes sign across eps0
    auto prof = solve_profile(m, b.eps0 + 1e-4, g);
    RhsContext cp(m, b.eps0 + 1e-4, prof, g);
    auto top = rightmost_eigenvalue(assemble_Lk(cp, 1));
    CHECK(top.lambda.real() > 0.0);
    auto prof2 = solve_profile(m, b.eps0 - 1e-4, g);
    RhsContext cm(m, b.eps0 - 1e-4, prof2, g);
    auto bot = rightmost_eigenvalue(assemble_Lk(cm, 1));
    CHECK(bot.lambda.real() < 0.0);

    SUBCASE("projections reproduce the eigenspace and commute with L") {
        RhsContext ctx(m, b.eps0, solve_profile(m, b.eps0, g), g);
        Projections pr{&b};
        ChannelField wf = b.eigenfield(Complex(1.0, 0.0), Complex(0, 0), g);
        auto [a1, a2] = pr.coordinates(wf);
        CHECK(std::abs(a1 - 1.0) < 1e-8);
        CHECK(std::abs(a2) < 1e-8);

        ChannelField k0only(3, g);
        std::mt19937_64 rng(7);
        ChannelField r = random_field(3, g, rng, 1.0);
        k0only.modes[0] = r.modes[0];
        auto [c1, c2] = pr.coordinates(k0only);
        CHECK(std::abs(c1) == 0.0);
        CHECK(std::abs(c2) == 0.0);

        auto rep = verify_equivariance(ctx, &b, 11, 5);
        CHECK(rep.rot_commutator <= 1e-8);
        CHECK(rep.refl_commutator <= 1e-8);
        CHECK(rep.generator_antisym <= 1e-8);
        CHECK(rep.s_involution <= 1e-12);
        CHECK(rep.phase_action <= 1e-8);
        CHECK(rep.pi_idempotent <= 1e-8);
        CHECK(rep.pi_commutator <= 1e-6);

        // crossing multiplicity: Gram rank of the candidate eigenvectors is 2
        ChannelField e1 = b.eigenfield(Complex(1, 0), Complex(0, 0), g);
        ChannelField e2 = b.eigenfield(Complex(0, 0), Complex(1, 0), g);
        Eigen::Matrix2cd G;
        G(0, 0) = cpair(e1.modes[1], e1.modes[1], g.h());
        G(0, 1) = cpair(e1.modes[1], e2.modes[1], g.h());
        G(1, 0) = cpair(e2.modes[1], e1.modes[1], g.h());
        G(1, 1) = cpair(e2.modes[1], e2.modes[1], g.h());
        Eigen::JacobiSVD<Eigen::Matrix2cd> svd(G);
        CHECK(svd.singularValues()(1) > 1e-6 * svd.singularValues()(0));
    }
}

TEST_CASE("find_crossing error paths") {
    ModelM0 m;
    auto g = m0_calibration_grid();
    CHECK_THROWS_AS(find_crossing(m, g, -0.12, -0.05), NoCrossing);
    ModelM1 m1;
    auto g1 = grid_of(12.0, 129);
    CHECK_THROWS_AS(find_crossing(m1, g1, -0.05, 0.05), NoCrossing);
}

TEST_CASE("Evans: M1 translation zero at the origin") {
    ModelM1 m;
    const double L = 14.0;

    SUBCASE("large real lambda is zero free") {
        const Complex D = evans_evaluate(m, 0.0, Complex(25.0, 0.0), 0, L);
        CHECK(std::abs(D) > 1e-6);
    }
    SUBCASE("conjugate symmetry") {
        for (Complex lam : {Complex(0.4, 0.3), Complex(0.15, -0.7), Complex(1.0, 1.0)}) {
            const Complex d1 = evans_evaluate(m, 0.02, lam, 1, L);
            const Complex d2 = evans_evaluate(m, 0.02, std::conj(lam), -1, L);
            CHECK(std::abs(d2 - std::conj(d1)) < 1e-10 * (1.0 + std::abs(d1)));
        }
    }
    SUBCASE("root extrapolation certifies lambda = 0 to 1e-8") {
        const double l1 = 1e-6, l2 = 1e-7;
        const Complex D1 = evans_evaluate(m, 0.0, Complex(l1, 0), 0, L);
        const Complex D2 = evans_evaluate(m, 0.0, Complex(l2, 0), 0, L);
        // linear-model root of the secant through the two points
        const Complex root = (l1 * D2 - l2 * D1) / (D2 - D1);
        CHECK(std::abs(root) < 1e-8);
    }
    SUBCASE("winding around the origin counts the translation zero once") {
        std::vector<Complex> circle;
        for (int j = 0; j < 24; ++j)
            circle.push_back(0.2 * std::exp(Complex(0, 2.0 * pi * j / 24)));
        CHECK(evans_root_count(m, 0.0, circle, 0, L) == 1);
    }
    SUBCASE("small right-half-plane contour is empty") {
        std::vector<Complex> box{{0.5, -0.2}, {0.9, -0.2}, {0.9, 0.2}, {0.5, 0.2}};
        CHECK(evans_root_count(m, 0.0, box, 0, L) == 0);
    }
}

TEST_CASE("Evans vs eigensolver on the M0 crossing pair") {
    ModelM0 m;
    const double eps = 0.03;
    // Richardson h^2 -> h^4 extrapolation on fine grids, eigenvalues tracked
    // by inverse iteration from a coarse dense solve
    Complex lam_c, lam_f;
    {
        auto gc = grid_of(10.0, 129);
        RhsContext cc(m, eps, solve_profile(m, eps, gc), gc);
        Complex seed = rightmost_eigenvalue(assemble_Lk(cc, 1)).lambda;
        if (seed.imag() < 0) seed = std::conj(seed);
        auto g1 = grid_of(10.0, 1025);
        RhsContext c1(m, eps, solve_profile(m, eps, g1), g1);
        lam_c = eigen_nearest(c1, 1, seed, 40, 1e-12).lambda;
        auto g2 = grid_of(10.0, 2049);
        RhsContext c2(m, eps, solve_profile(m, eps, g2), g2);
        lam_f = eigen_nearest(c2, 1, lam_c, 40, 1e-12).lambda;
    }
    const Complex lam_extrap = lam_f + (lam_f - lam_c) / 3.0;

    const double L = 10.0;
    const Complex Dat = evans_evaluate(m, eps, lam_extrap, 1, L);
    const Complex Doff = evans_evaluate(m, eps, lam_extrap + Complex(0.05, 0.0), 1, L);
    CHECK(std::abs(Dat) < 1e-5);
    CHECK(std::abs(Dat) < 1e-2 * std::abs(Doff));

    // Newton on D from a nearby seed lands within 1e-4 of the eigenvalue
    Complex z = lam_extrap + Complex(0.02, 0.01);
    Complex Dz = evans_evaluate(m, eps, z, 1, L);
    for (int it = 0; it < 25 && std::abs(Dz) > 1e-12; ++it) {
        const Complex dD =
            (evans_evaluate(m, eps, z + Complex(1e-6, 0), 1, L) - Dz) / Complex(1e-6, 0);
        z -= Dz / dD;
        Dz = evans_evaluate(m, eps, z, 1, L);
    }
    CHECK(std::abs(z - lam_extrap) < 1e-4);

    SUBCASE("winding totals four over the two crossing modes") {
        std::vector<Complex> box;
        const double re0 = 0.4 * lam_extrap.real(), re1 = 5.0 * lam_extrap.real();
        const double im = 1.5 * std::abs(lam_extrap.imag());
        box = {{re0, -im}, {re1, -im}, {re1, im}, {re0, im}};
        int total = 0;
        total += evans_root_count(m, eps, box, 1, 10.0);
        total += evans_root_count(m, eps, box, -1, 10.0);
        CHECK(total == 4);
    }
}
