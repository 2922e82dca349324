#pragma once

#include "o2hopf/pde/grid.hpp"
#include "o2hopf/pde/model.hpp"

namespace o2hopf::pde {

struct ShockProfile {
    Mat u;  // n x N1 samples of the standing wave
    Vec u_minus, u_plus;
    double eps = 0.0;
    double ode_residual = 0.0;  // sup-norm of the collocation residual
    double endstate_gap = 0.0;  // max boundary mismatch against u_pm

    Mat d1u;  // centered x1-derivative, boundary one-sided

    void check_invariants() const {
        if (ode_residual > 1e-10)
            throw NoProfile("profile ODE residual " + std::to_string(ode_residual));
        if (endstate_gap > 1e-8)
            throw NoProfile("profile endstate gap " + std::to_string(endstate_gap));
    }
};

namespace detail {

inline Mat d1_matrix_rows(const Mat& U, double h) {
    Mat D = Mat::Zero(U.rows(), U.cols());
    const Eigen::Index m = U.cols();
    D.middleCols(1, m - 2) = (U.rightCols(m - 2) - U.leftCols(m - 2)) / (2.0 * h);
    D.col(0) = (U.col(1) - U.col(0)) / h;
    D.col(m - 1) = (U.col(m - 1) - U.col(m - 2)) / h;
    return D;
}

}  // namespace detail

// Standing-wave solve of B11(u) u' = F1(u) - F1(u_minus) by midpoint
// collocation in the parabolic components; the hyperbolic components are
// slaved through the conserved linear part of F1. The x1-translation
// degeneracy is removed by pinning the parabolic components at x1 = 0 to the
// midpoint of the endstate values.
inline ShockProfile solve_profile(const ModelSystem& model, double eps,
                                  const DiscretizationGrid& grid, int max_iter = 50,
                                  double tol = 1e-12) {
    grid.validate();
    const int n = model.n(), r = model.r(), nh = n - r;
    const int N = grid.N1;
    const double h = grid.h();
    const Vec um = model.endstate(eps, -1), up = model.endstate(eps, +1);

    ShockProfile prof;
    prof.eps = eps;
    prof.u_minus = um;
    prof.u_plus = up;

    if (model.trivial_profile()) {
        prof.u = um.replicate(1, N);
        prof.d1u = Mat::Zero(n, N);
        prof.ode_residual = 0.0;
        prof.endstate_gap = (um - up).cwiseAbs().maxCoeff();
        prof.check_invariants();
        return prof;
    }

    // hyperbolic slaving u_h = Phh^{-1} (fh - Php u_p) from the linear flux rows
    Mat A1 = model.dflux(1, eps, um);
    Mat Phh = A1.topLeftCorner(nh, nh);
    Mat Php = A1.topRightCorner(nh, r);
    Eigen::PartialPivLU<Mat> lu_hh;
    Vec fh;
    if (nh > 0) {
        Mat Fm;
        model.flux(1, eps, um, Fm);
        fh = Fm.topRows(nh).col(0);
        lu_hh.compute(Phh);
    }
    auto full_state = [&](const Vec& up_comp) {
        Vec u(n);
        if (nh > 0) u.head(nh) = lu_hh.solve(fh - Php * up_comp);
        u.tail(r) = up_comp;
        return u;
    };

    Mat Fm_all;
    model.flux(1, eps, um, Fm_all);
    const Vec F1m = Fm_all.col(0);

    // residual of one midpoint cell [i, i+1]
    auto cell_residual = [&](const Vec& upi, const Vec& upi1) {
        const Vec umid = 0.5 * (full_state(upi) + full_state(upi1));
        Mat F;
        model.flux(1, eps, umid, F);
        const Mat B = model.visc(1, 1, eps, umid);
        const Vec rhs = F.col(0).tail(r) - F1m.tail(r);
        const Vec lhs = (B * (full_state(upi1) - full_state(upi)) / h).tail(r);
        return Vec(lhs - rhs);
    };

    // unknowns: parabolic components at every node
    Mat Up(r, N);
    for (int i = 0; i < N; ++i) Up.col(i) = model.profile_guess(eps, grid.x1(i)).tail(r);
    const int ipin = (N - 1) / 2;
    const Vec pin_value = 0.5 * (um.tail(r) + up.tail(r));

    auto assemble_residual = [&](const Mat& U) {
        Vec g(r * N);
        for (int i = 0; i + 1 < N; ++i) g.segment(i * r, r) = cell_residual(U.col(i), U.col(i + 1));
        g.segment((N - 1) * r, r) = U.col(ipin) - pin_value;
        return g;
    };

    double resid = 0.0;
    for (int it = 0; it <= max_iter; ++it) {
        Vec g = assemble_residual(Up);
        resid = g.cwiseAbs().maxCoeff();
        if (resid <= tol) break;
        if (it == max_iter) throw NoProfile("collocation stalled, residual " + std::to_string(resid));

        // finite-difference block-bidiagonal Jacobian, solved densely
        Mat J = Mat::Zero(r * N, r * N);
        const double fd = 1e-7;
        for (int i = 0; i < N; ++i)
            for (int c = 0; c < r; ++c) {
                Mat Upp = Up;
                Upp(c, i) += fd;
                if (i + 1 < N) {
                    Vec d = (cell_residual(Upp.col(i), Upp.col(i + 1)) -
                             cell_residual(Up.col(i), Up.col(i + 1))) /
                            fd;
                    J.block(i * r, i * r + c, r, 1) = d;
                }
                if (i > 0) {
                    Vec d = (cell_residual(Upp.col(i - 1), Upp.col(i)) -
                             cell_residual(Up.col(i - 1), Up.col(i))) /
                            fd;
                    J.block((i - 1) * r, i * r + c, r, 1) = d;
                }
                if (i == ipin) J((N - 1) * r + c, i * r + c) = 1.0;
            }
        Vec step = J.partialPivLu().solve(-g);
        if (!step.allFinite()) throw NoProfile("singular collocation Jacobian");
        for (int i = 0; i < N; ++i) Up.col(i) += step.segment(i * r, r);
    }

    prof.u.resize(n, N);
    for (int i = 0; i < N; ++i) prof.u.col(i) = full_state(Up.col(i));
    prof.d1u = detail::d1_matrix_rows(prof.u, h);
    prof.ode_residual = resid;
    prof.endstate_gap = std::max((prof.u.col(0) - um).cwiseAbs().maxCoeff(),
                                 (prof.u.col(N - 1) - up).cwiseAbs().maxCoeff());
    if (prof.endstate_gap > 1e-3)
        throw NoProfile("domain too short, endstate gap " + std::to_string(prof.endstate_gap));
    prof.check_invariants();
    return prof;
}

}  // namespace o2hopf::pde
