#pragma once

#include <functional>

#include "o2hopf/pde/rhs.hpp"

namespace o2hopf::pde {

namespace detail {

// constant-coefficient tridiagonal (diag, off) with precomputed elimination
struct ConstTridiag {
    int m = 0;
    double off = 0.0;
    std::vector<double> denom;  // diag - off * c'_{i-1}
    std::vector<double> cprime;

    void factor(int m_, double diag, double off_) {
        m = m_;
        off = off_;
        denom.resize(m);
        cprime.resize(m);
        double cp = 0.0;
        for (int i = 0; i < m; ++i) {
            denom[i] = diag - off * cp;
            cp = off / denom[i];
            cprime[i] = cp;
        }
    }

    void solve(CVec& b) const {
        for (int i = 1; i < m; ++i) b[i] -= off / denom[i - 1] * b[i - 1];
        b[m - 1] /= denom[m - 1];
        for (int i = m - 2; i >= 0; --i) b[i] = b[i] / denom[i] - cprime[i] * b[i + 1];
    }
};

}  // namespace detail

struct EvolveOptions {
    double dt = 0.0;  // 0 -> grid default
    int force_steps = 0;  // when positive, overrides the step count
    double amplitude_guard = 100.0;
    double blowup_norm = 1e6;
    std::function<void(int step, double t, const ChannelField&)> snapshot;
};

// Strang-split IMEX integrator: Crank-Nicolson on the parabolic-block
// diffusion (one tridiagonal solve per mode and component), Heun for
// transport, source and nonlinear terms.
class ImexStepper {
  public:
    ImexStepper(const RhsContext& ctx, double dt) : ctx_(&ctx), dt_(dt) {
        const int n = ctx.n(), r = ctx.model->r(), K = ctx.grid->K;
        const int m = ctx.N() - 2;
        const double h2 = ctx.h() * ctx.h();
        const double a = dt_ / 4.0;  // CN over dt/2
        for (int c = n - r; c < n; ++c) {
            if (ctx.B11.row(c).cwiseAbs().sum() != std::abs(ctx.B11(c, c)) ||
                ctx.B22.row(c).cwiseAbs().sum() != std::abs(ctx.B22(c, c)))
                throw InvalidInput("implicit stage expects diagonal viscosity blocks");
        }
        fac_.assign(K + 1, std::vector<detail::ConstTridiag>(n));
        aplus_diag_.assign(K + 1, Vec::Zero(n));
        aplus_off_ = Vec::Zero(n);
        for (int k = 0; k <= K; ++k)
            for (int c = n - r; c < n; ++c) {
                const double b = ctx.B11(c, c), d = ctx.B22(c, c);
                fac_[k][c].factor(m, 1.0 + a * (2.0 * b / h2 + k * k * d), -a * b / h2);
                aplus_diag_[k][c] = 1.0 - a * (2.0 * b / h2 + k * k * d);
                aplus_off_[c] = a * b / h2;
            }
    }

    double dt() const { return dt_; }

    void cn_half(ChannelField& v) const {
        const int n = ctx_->n(), r = ctx_->model->r();
        const int m = ctx_->N() - 2;
        for (int k = 0; k <= ctx_->grid->K; ++k) {
            auto& M = v.modes[k];
            for (int c = n - r; c < n; ++c) {
                CVec w(m);
                const double dgn = aplus_diag_[k][c], off = aplus_off_[c];
                for (int i = 0; i < m; ++i) {
                    w[i] = dgn * M(c, i + 1);
                    if (i > 0) w[i] += off * M(c, i);
                    if (i + 1 < m) w[i] += off * M(c, i + 2);
                }
                fac_[k][c].solve(w);
                for (int i = 0; i < m; ++i) M(c, i + 1) = w[i];
            }
        }
    }

    void cn_half_mode(int k, CMat& Mk) const {
        const int n = ctx_->n(), r = ctx_->model->r();
        const int m = ctx_->N() - 2;
        for (int c = n - r; c < n; ++c) {
            CVec w(m);
            const double dgn = aplus_diag_[k][c], off = aplus_off_[c];
            for (int i = 0; i < m; ++i) {
                w[i] = dgn * Mk(c, i + 1);
                if (i > 0) w[i] += off * Mk(c, i);
                if (i + 1 < m) w[i] += off * Mk(c, i + 2);
            }
            fac_[k][c].solve(w);
            for (int i = 0; i < m; ++i) Mk(c, i + 1) = w[i];
        }
    }

    void step(ChannelField& v) const {
        cn_half(v);
        ChannelField e1 = rhs_explicit(*ctx_, v);
        ChannelField pred = v;
        pred += dt_ * e1;
        ChannelField e2 = rhs_explicit(*ctx_, pred);
        v += (dt_ / 2.0) * (e1 + e2);
        cn_half(v);
        v.enforce_reality();
    }

    void step_linearized(int k, CMat& vk) const {
        cn_half_mode(k, vk);
        const CMat e1 = apply_linearized_explicit(*ctx_, k, vk);
        const CMat e2 = apply_linearized_explicit(*ctx_, k, (vk + dt_ * e1).eval());
        vk += (dt_ / 2.0) * (e1 + e2);
        cn_half_mode(k, vk);
    }

  private:
    const RhsContext* ctx_;
    double dt_;
    std::vector<std::vector<detail::ConstTridiag>> fac_;
    std::vector<Vec> aplus_diag_;
    Vec aplus_off_;
};

inline int steps_for(double T, double dt) {
    return std::max(1, int(std::ceil(T / dt - 1e-12)));
}

inline ChannelField evolve(const RhsContext& ctx, const ChannelField& v0, double T,
                           const EvolveOptions& opts = {}) {
    if (v0.max_abs() > opts.amplitude_guard)
        throw InvalidInput("initial amplitude exceeds the nonlinear well-posedness guard");
    ChannelField v = v0;
    if (T <= 0.0) return v;
    const double dt0 = opts.dt > 0.0 ? opts.dt : ctx.grid->dt;
    const int n_steps = opts.force_steps > 0 ? opts.force_steps : steps_for(T, dt0);
    ImexStepper stepper(ctx, T / n_steps);
    if (opts.snapshot) opts.snapshot(0, 0.0, v);
    for (int s = 1; s <= n_steps; ++s) {
        stepper.step(v);
        const double amp = v.max_abs();
        if (!std::isfinite(amp)) throw StepRejected("non-finite state at step " + std::to_string(s));
        if (amp > opts.blowup_norm) throw BlowUp("amplitude " + std::to_string(amp));
        if (opts.snapshot) opts.snapshot(s, s * stepper.dt(), v);
    }
    return v;
}

// linearized flow; Fourier modes evolve independently
inline ChannelField evolve_linearized(const RhsContext& ctx, const ChannelField& v0, double T,
                                      const EvolveOptions& opts = {}) {
    ChannelField v = v0;
    if (T <= 0.0) return v;
    const double dt0 = opts.dt > 0.0 ? opts.dt : ctx.grid->dt;
    const int n_steps = opts.force_steps > 0 ? opts.force_steps : steps_for(T, dt0);
    ImexStepper stepper(ctx, T / n_steps);
    for (int k = 0; k <= ctx.grid->K; ++k) {
        CMat vk = v.modes[k];
        for (int s = 0; s < n_steps; ++s) stepper.step_linearized(k, vk);
        if (!vk.allFinite()) throw StepRejected("non-finite linearized mode " + std::to_string(k));
        v.modes[k] = vk;
    }
    v.enforce_reality();
    return v;
}

// single-mode linearized propagator, the workhorse of the reduction
inline CMat evolve_linearized_mode(const RhsContext& ctx, int k, const CMat& vk0, double T,
                                   double dt = 0.0) {
    CMat vk = vk0;
    if (T <= 0.0) return vk;
    const double dt0 = dt > 0.0 ? dt : ctx.grid->dt;
    const int n_steps = steps_for(T, dt0);
    ImexStepper stepper(ctx, T / n_steps);
    for (int s = 0; s < n_steps; ++s) stepper.step_linearized(k, vk);
    return vk;
}

}  // namespace o2hopf::pde
