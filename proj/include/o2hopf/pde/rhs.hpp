#pragma once

#include <vector>

#include "o2hopf/pde/grid.hpp"
#include "o2hopf/pde/model.hpp"
#include "o2hopf/pde/profile.hpp"

namespace o2hopf::pde {

// Cached discretization of one (model, eps, profile, grid) quadruple.
// Only constant-in-u viscosity is wired up; both built-in systems have
// constant B blocks and the quasilinear structure lives in the flux.
struct RhsContext {
    const ModelSystem* model = nullptr;
    double eps = 0.0;
    const DiscretizationGrid* grid = nullptr;
    const ShockProfile* profile = nullptr;
    SpectralTransform tr;

    Mat B11, B22, Bmix;  // B^{12} + B^{21}
    Mat base_advect;     // -D1 F^1(ubar) + g(x, ubar), physical n x N1
    std::vector<Mat> A1bar, A2bar, Cbar;  // linearization coefficients at ubar
    Vec x1;
    // O(h^2) second-difference dissipation on the inviscid components; keeps
    // the centered transport stencil free of its exact checkerboard kernel
    double hyp_dissipation = 0.5;

    RhsContext(const ModelSystem& m, double e, const ShockProfile& p,
               const DiscretizationGrid& g)
        : model(&m), eps(e), grid(&g), profile(&p), tr(g) {
        if (!m.constant_viscosity())
            throw InvalidInput("state-dependent viscosity blocks are not wired up");
        const int n = m.n(), N = g.N1;
        const Vec u0 = p.u.col(0);
        B11 = m.visc(1, 1, e, u0);
        B22 = m.visc(2, 2, e, u0);
        Bmix = m.visc(1, 2, e, u0) + m.visc(2, 1, e, u0);
        x1 = g.x1_nodes();

        Mat F1;
        m.flux(1, e, p.u, F1);
        base_advect = Mat::Zero(n, N);
        const double h = g.h();
        base_advect.middleCols(1, N - 2) =
            -(F1.rightCols(N - 2) - F1.leftCols(N - 2)) / (2.0 * h);
        if (m.has_source()) {
            Mat G;
            m.source(e, x1, p.u, G);
            base_advect += G;
        }

        A1bar.resize(N);
        A2bar.resize(N);
        Cbar.resize(N);
        for (int i = 0; i < N; ++i) {
            A1bar[i] = m.dflux(1, e, p.u.col(i));
            A2bar[i] = m.dflux(2, e, p.u.col(i));
            Cbar[i] = m.has_source() ? m.dsource(e, g.x1(i), p.u.col(i)) : Mat::Zero(n, n);
        }
    }

    int n() const { return model->n(); }
    int N() const { return grid->N1; }
    double h() const { return grid->h(); }
};

namespace detail {

inline void add_viscous_mode(const RhsContext& ctx, int k, const CMat& vk, CMat& out) {
    const int N = ctx.N();
    const double h = ctx.h();
    const double h2 = h * h;
    const Complex ik(0.0, double(k));
    for (int i = 1; i + 1 < N; ++i) {
        out.col(i) += ctx.B11 * (vk.col(i + 1) - 2.0 * vk.col(i) + vk.col(i - 1)) / h2;
        out.col(i) -= double(k * k) * (ctx.B22 * vk.col(i));
        if (ctx.Bmix.cwiseAbs().maxCoeff() > 0.0)
            out.col(i) += ik * (ctx.Bmix * (vk.col(i + 1) - vk.col(i - 1)) / (2.0 * h));
    }
}

inline void add_hyperbolic_dissipation(const RhsContext& ctx, const CMat& vk, CMat& out) {
    const int nh = ctx.model->n() - ctx.model->r();
    if (nh == 0 || ctx.hyp_dissipation == 0.0) return;
    const int N = ctx.N();
    const double c = ctx.hyp_dissipation;
    for (int i = 1; i + 1 < N; ++i)
        out.topRows(nh).col(i) +=
            c * (vk.topRows(nh).col(i + 1) - 2.0 * vk.topRows(nh).col(i) +
                 vk.topRows(nh).col(i - 1));
}

}  // namespace detail

// Semi-discrete right side of the perturbation equations,
//   v_t = F_h(ubar + v) - F_h(ubar),
// spectral in x2, second-order central differences in x1, homogeneous
// Dirichlet for v at |x1| = L. Exact zero at v = 0.
inline ChannelField rhs_perturbation(const RhsContext& ctx, const ChannelField& v) {
    const int n = ctx.n(), N = ctx.N(), K = ctx.grid->K, NQ = ctx.tr.NQ;
    const double h = ctx.h();
    ChannelField out(n, *ctx.grid);

    // physical slabs at each x2 quadrature node
    std::vector<Mat> P(NQ, Mat(n, N));
    for (int i = 0; i < N; ++i) {
        const Mat cols = ctx.tr.to_physical(v, i);  // n x NQ
        for (int j = 0; j < NQ; ++j) P[j].col(i) = ctx.profile->u.col(i) + cols.col(j);
    }

    // advective + source terms, then back to modal space
    std::vector<Mat> adv(NQ), f2(NQ);
    for (int j = 0; j < NQ; ++j) {
        Mat F1;
        ctx.model->flux(1, ctx.eps, P[j], F1);
        adv[j] = Mat::Zero(n, N);
        adv[j].middleCols(1, N - 2) =
            -(F1.rightCols(N - 2) - F1.leftCols(N - 2)) / (2.0 * h);
        if (ctx.model->has_source()) {
            Mat G;
            ctx.model->source(ctx.eps, ctx.x1, P[j], G);
            adv[j] += G;
        }
        adv[j] -= ctx.base_advect;
        ctx.model->flux(2, ctx.eps, P[j], f2[j]);
    }

    ChannelField f2_modal(n, *ctx.grid);
    Mat slabA(n, NQ), slabF(n, NQ);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < NQ; ++j) {
            slabA.col(j) = adv[j].col(i);
            slabF.col(j) = f2[j].col(i);
        }
        ctx.tr.to_modal(slabA, out, i);
        ctx.tr.to_modal(slabF, f2_modal, i);
    }
    for (int k = 0; k <= K; ++k)
        out.modes[k] -= Complex(0.0, double(k)) * f2_modal.modes[k];

    for (int k = 0; k <= K; ++k) {
        detail::add_viscous_mode(ctx, k, v.modes[k], out.modes[k]);
        detail::add_hyperbolic_dissipation(ctx, v.modes[k], out.modes[k]);
    }

    for (int k = 0; k <= K; ++k) {
        out.modes[k].col(0).setZero();
        out.modes[k].col(N - 1).setZero();
    }
    out.enforce_reality();
    return out;
}

// explicit (advective + source) part only; the viscous part is handled
// implicitly by the time stepper
inline ChannelField rhs_explicit(const RhsContext& ctx, const ChannelField& v) {
    const int n = ctx.n(), N = ctx.N(), K = ctx.grid->K, NQ = ctx.tr.NQ;
    const double h = ctx.h();
    ChannelField out(n, *ctx.grid);

    std::vector<Mat> P(NQ, Mat(n, N));
    for (int i = 0; i < N; ++i) {
        const Mat cols = ctx.tr.to_physical(v, i);
        for (int j = 0; j < NQ; ++j) P[j].col(i) = ctx.profile->u.col(i) + cols.col(j);
    }
    std::vector<Mat> adv(NQ), f2(NQ);
    for (int j = 0; j < NQ; ++j) {
        Mat F1;
        ctx.model->flux(1, ctx.eps, P[j], F1);
        adv[j] = Mat::Zero(n, N);
        adv[j].middleCols(1, N - 2) =
            -(F1.rightCols(N - 2) - F1.leftCols(N - 2)) / (2.0 * h);
        if (ctx.model->has_source()) {
            Mat G;
            ctx.model->source(ctx.eps, ctx.x1, P[j], G);
            adv[j] += G;
        }
        adv[j] -= ctx.base_advect;
        ctx.model->flux(2, ctx.eps, P[j], f2[j]);
    }
    ChannelField f2_modal(n, *ctx.grid);
    Mat slabA(n, NQ), slabF(n, NQ);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < NQ; ++j) {
            slabA.col(j) = adv[j].col(i);
            slabF.col(j) = f2[j].col(i);
        }
        ctx.tr.to_modal(slabA, out, i);
        ctx.tr.to_modal(slabF, f2_modal, i);
    }
    for (int k = 0; k <= K; ++k)
        out.modes[k] -= Complex(0.0, double(k)) * f2_modal.modes[k];
    if (ctx.Bmix.cwiseAbs().maxCoeff() > 0.0) {
        for (int k = 1; k <= K; ++k) {
            const Complex ik(0.0, double(k));
            for (int i = 1; i + 1 < N; ++i)
                out.modes[k].col(i) +=
                    ik * (ctx.Bmix * (v.modes[k].col(i + 1) - v.modes[k].col(i - 1)) /
                          (2.0 * h));
        }
    }
    for (int k = 0; k <= K; ++k)
        detail::add_hyperbolic_dissipation(ctx, v.modes[k], out.modes[k]);
    for (int k = 0; k <= K; ++k) {
        out.modes[k].col(0).setZero();
        out.modes[k].col(N - 1).setZero();
    }
    out.enforce_reality();
    return out;
}

// linearized explicit part on a single mode:
//   -D1(A1bar v) - i k A2bar v + Cbar v (+ mixed viscous first-order term)
inline CMat apply_linearized_explicit(const RhsContext& ctx, int k, const CMat& vk) {
    const int N = ctx.N();
    const double h = ctx.h();
    const Complex ik(0.0, double(k));
    CMat out = CMat::Zero(vk.rows(), N);
    CMat Av(vk.rows(), N);
    for (int i = 0; i < N; ++i) Av.col(i) = ctx.A1bar[i] * vk.col(i);
    for (int i = 1; i + 1 < N; ++i) {
        out.col(i) = -(Av.col(i + 1) - Av.col(i - 1)) / (2.0 * h);
        out.col(i) += -ik * (ctx.A2bar[i] * vk.col(i)) + ctx.Cbar[i] * vk.col(i);
        if (ctx.Bmix.cwiseAbs().maxCoeff() > 0.0)
            out.col(i) += ik * (ctx.Bmix * (vk.col(i + 1) - vk.col(i - 1)) / (2.0 * h));
    }
    detail::add_hyperbolic_dissipation(ctx, vk, out);
    return out;
}

// full linearized operator L_k on one mode (explicit + viscous parts)
inline CMat apply_Lk(const RhsContext& ctx, int k, const CMat& vk) {
    CMat out = apply_linearized_explicit(ctx, k, vk);
    detail::add_viscous_mode(ctx, k, vk, out);
    out.col(0).setZero();
    out.col(ctx.N() - 1).setZero();
    return out;
}

// k = 0 steady operator applied to the profile itself; its size is the
// x1-discretization error of the standing wave
inline Mat steady_residual(const RhsContext& ctx) {
    const int N = ctx.N();
    const double h2 = ctx.h() * ctx.h();
    Mat out = ctx.base_advect;
    const Mat& U = ctx.profile->u;
    for (int i = 1; i + 1 < N; ++i)
        out.col(i) += ctx.B11 * (U.col(i + 1) - 2.0 * U.col(i) + U.col(i - 1)) / h2;
    out.col(0).setZero();
    out.col(N - 1).setZero();
    return out;
}

}  // namespace o2hopf::pde
