#pragma once

#include <memory>
#include <optional>

#include "o2hopf/pde/energy.hpp"
#include "o2hopf/spectral/crossing.hpp"
#include "o2hopf/spectral/eigen.hpp"

namespace o2hopf::reduction {

using pde::ChannelField;
using pde::DiscretizationGrid;
using pde::ModelSystem;
using spectral::EigenBundle;

// tracks the crossing eigendata from a reference bundle to a nearby eps
inline EigenBundle bundle_at(const ModelSystem& model, const DiscretizationGrid& grid,
                             double eps, const EigenBundle& ref) {
    const pde::ShockProfile prof = pde::solve_profile(model, eps, grid);
    pde::RhsContext ctx(model, eps, prof, grid);
    spectral::EigenPair p = spectral::eigen_nearest(ctx, ref.k_star, ref.lambda_plus, 40, 1e-12);
    if (p.lambda.imag() < 0) p = spectral::eigen_nearest(ctx, ref.k_star, std::conj(p.lambda));

    EigenBundle b = ref;
    b.eps0 = eps;
    b.lambda_plus = p.lambda;
    b.gamma0 = p.lambda.real();
    b.omega0 = p.lambda.imag();
    b.h = grid.h();

    spectral::OperatorBlocks B = spectral::assemble_blocks(ctx, ref.k_star);
    spectral::OperatorBlocks Badj;
    Badj.k = -ref.k_star;
    Badj.n = B.n;
    Badj.m = B.m;
    Badj.diag.resize(B.m);
    Badj.sub.resize(B.m);
    Badj.sup.resize(B.m);
    for (int j = 0; j < B.m; ++j) {
        Badj.diag[j] = B.diag[j].adjoint();
        if (j > 0) Badj.sub[j] = B.sup[j - 1].adjoint();
        if (j + 1 < B.m) Badj.sup[j] = B.sub[j + 1].adjoint();
    }
    CVec x = p.vec.conjugate();
    x.normalize();
    spectral::BlockTridiagLU lu(Badj, std::conj(p.lambda) + Complex(1e-12, 0));
    for (int it = 0; it < 8; ++it) {
        lu.solve(x);
        x.normalize();
    }
    b.w = spectral::interior_to_mode(p.vec, B.n, grid.N1);
    b.wt = spectral::interior_to_mode(x, B.n, grid.N1);
    const Complex c = spectral::cpair(b.w, b.wt, b.h);
    if (std::abs(c) < 1e-12) throw SolverFailure("degenerate tracked eigenpair");
    b.wt /= std::conj(c);
    b.biorth_w_wt = std::abs(spectral::cpair(b.w, b.wt, b.h) - 1.0);
    b.biorth_sw_wt = std::abs(spectral::cpair(CMat(b.M * b.w.conjugate()), b.wt, b.h));
    return b;
}

// Reduction-facing view of one channel PDE at fixed eps: evolution flows,
// spectral-pair coordinates, complement projection, and the discrete l2
// geometry, everything the Lyapunov-Schmidt machinery consumes.
class PdeReductionSystem {
  public:
    using State = ChannelField;

    PdeReductionSystem(std::shared_ptr<const ModelSystem> model, const DiscretizationGrid& grid,
                       const EigenBundle& bundle, double dt = 0.0)
        : model_(std::move(model)),
          grid_(grid),
          bundle_(bundle),
          profile_(pde::solve_profile(*model_, bundle.eps0, grid)),
          ctx_(*model_, bundle.eps0, profile_, grid_) {
        opts_.dt = dt > 0.0 ? dt : grid_.dt;
        proj_.b = &bundle_;
    }

    const EigenBundle& bundle() const { return bundle_; }
    const pde::RhsContext& ctx() const { return ctx_; }
    const DiscretizationGrid& grid() const { return grid_; }
    double eps() const { return bundle_.eps0; }
    double dt() const { return opts_.dt; }

    State zero_state() const { return ChannelField(model_->n(), grid_); }
    double norm(const State& s) const { return pde::l2_norm(s, grid_.h()); }
    double inner(const State& a, const State& b) const { return pde::dot(a, b, grid_.h()); }

    Complex lambda_plus() const { return bundle_.lambda_plus; }
    double T_star() const { return 2.0 * bundle_.k_star * pi / bundle_.omega0; }
    int k_star() const { return bundle_.k_star; }
    double kappa_exact(double gamma_prime) const { return gamma_prime * T_star(); }
    double chi_exact() const { return 2.0 * bundle_.k_star * pi; }

    int steps4(double T) const {
        return 4 * std::max(1, int(std::ceil(T / (4.0 * opts_.dt) - 1e-12)));
    }

    State evolve(const State& v0, double T) const {
        pde::EvolveOptions o = opts_;
        o.force_steps = steps4(T);
        return pde::evolve(ctx_, v0, T, o);
    }

    // one period on the solver's own step lattice, capturing the quarter
    // states for the traveling-wave fit
    State evolve_quarters(const State& v0, double T, std::vector<State>& quarters) const {
        pde::EvolveOptions o = opts_;
        o.force_steps = steps4(T);
        const int n = o.force_steps;
        quarters.clear();
        o.snapshot = [&](int step, double, const ChannelField& v) {
            if (step == n / 4 || step == n / 2 || step == 3 * n / 4)
                quarters.push_back(v);
        };
        return pde::evolve(ctx_, v0, T, o);
    }

    // nonlinear evolution recording the projected-nonlinearity series for
    // the Duhamel form of the displacement
    struct Recorded {
        State vT;
        std::vector<double> t;
        std::vector<Complex> phi, psi;
    };
    Recorded evolve_recording(const State& v0, double T) const {
        Recorded rec;
        pde::EvolveOptions o = opts_;
        o.force_steps = steps4(T);
        o.snapshot = [&](int, double t, const ChannelField& v) {
            ChannelField n = pde::rhs_perturbation(ctx_, v);
            n.modes[bundle_.k_star] -= pde::apply_Lk(ctx_, bundle_.k_star, v.modes[bundle_.k_star]);
            auto [p, q] = proj_.coordinates(n);
            rec.t.push_back(t);
            rec.phi.push_back(p);
            rec.psi.push_back(q);
        };
        rec.vT = pde::evolve(ctx_, v0, T, o);
        return rec;
    }

    State evolve_linearized(const State& v0, double T) const {
        pde::EvolveOptions o = opts_;
        o.force_steps = steps4(T);
        return pde::evolve_linearized(ctx_, v0, T, o);
    }

    std::pair<Complex, Complex> coordinates(const State& s) const {
        return proj_.coordinates(s);
    }
    State eigenstate(Complex a1, Complex a2) const {
        return bundle_.eigenfield(a1, a2, grid_);
    }
    State complement(const State& s) const { return proj_.complement(s, grid_); }

    // e^{T Ltilde} on the complement
    State linT(const State& s, double T) const {
        return complement(pde::evolve_linearized(ctx_, complement(s), T, opts_));
    }

    // translation direction refined to the k = 0 eigenpair nearest zero;
    // the kernel of I - e^{T Ltilde} in the Lax case, independent of T
    std::optional<State> kernel_seed() const {
        if (profile_.d1u.cwiseAbs().maxCoeff() < 1e-14) return std::nullopt;
        State s = zero_state();
        s.modes[0] = profile_.d1u.cast<Complex>();
        s.modes[0].col(0).setZero();
        s.modes[0].col(grid_.N1 - 1).setZero();
        try {
            CVec seed = spectral::mode_to_interior(s.modes[0]);
            auto p = spectral::eigen_nearest(ctx_, 0, Complex(1e-3, 0.0), 40, 1e-12, &seed);
            CMat vk = spectral::interior_to_mode(p.vec, model_->n(), grid_.N1);
            const Complex al = spectral::cpair(vk, s.modes[0], grid_.h());
            vk *= std::conj(al) / std::abs(al);  // align with the raw direction
            s.modes[0] = vk.real().cast<Complex>();
        } catch (const NumericalError&) {
            // fall back to the raw finite-difference direction
        }
        State c = complement(s);
        const double n = norm(c);
        if (n < 1e-12) return std::nullopt;
        return (1.0 / n) * c;
    }

    double shift_match(const State& v, const State& ref) const {
        const Complex c =
            (v.modes[bundle_.k_star].cwiseProduct(ref.modes[bundle_.k_star].conjugate()))
                .sum();
        return std::arg(c) / bundle_.k_star;
    }
    State rotate_state(const State& s, double theta) const { return pde::rotate(s, theta); }

  private:
    std::shared_ptr<const ModelSystem> model_;
    DiscretizationGrid grid_;
    EigenBundle bundle_;
    pde::ShockProfile profile_;
    pde::RhsContext ctx_;
    pde::EvolveOptions opts_;
    spectral::Projections proj_;
};

// Transverse-only variant without a crossing bundle (all coordinates in the
// complement); used for kernel and right-inverse work on models that do not
// carry a Hopf pair, with a caller-chosen reference period.
class TransverseOnlySystem {
  public:
    using State = ChannelField;

    TransverseOnlySystem(std::shared_ptr<const ModelSystem> model,
                         const DiscretizationGrid& grid, double eps, double dt = 0.0)
        : model_(std::move(model)),
          grid_(grid),
          eps_(eps),
          profile_(pde::solve_profile(*model_, eps, grid)),
          ctx_(*model_, eps, profile_, grid_) {
        opts_.dt = dt > 0.0 ? dt : grid_.dt;
    }

    const pde::RhsContext& ctx() const { return ctx_; }
    double eps() const { return eps_; }

    State zero_state() const { return ChannelField(model_->n(), grid_); }
    double norm(const State& s) const { return pde::l2_norm(s, grid_.h()); }
    double inner(const State& a, const State& b) const { return pde::dot(a, b, grid_.h()); }

    State evolve(const State& v0, double T) const { return pde::evolve(ctx_, v0, T, opts_); }
    State evolve_linearized(const State& v0, double T) const {
        return pde::evolve_linearized(ctx_, v0, T, opts_);
    }
    std::pair<Complex, Complex> coordinates(const State&) const { return {0.0, 0.0}; }
    State eigenstate(Complex, Complex) const { return zero_state(); }
    State complement(const State& s) const { return s; }
    State linT(const State& s, double T) const {
        return pde::evolve_linearized(ctx_, s, T, opts_);
    }

    std::optional<State> kernel_seed() const {
        if (profile_.d1u.cwiseAbs().maxCoeff() < 1e-14) return std::nullopt;
        State s = zero_state();
        s.modes[0] = profile_.d1u.cast<Complex>();
        s.modes[0].col(0).setZero();
        s.modes[0].col(grid_.N1 - 1).setZero();
        try {
            CVec seed = spectral::mode_to_interior(s.modes[0]);
            auto p = spectral::eigen_nearest(ctx_, 0, Complex(1e-3, 0.0), 40, 1e-12, &seed);
            CMat vk = spectral::interior_to_mode(p.vec, model_->n(), grid_.N1);
            const Complex al = spectral::cpair(vk, s.modes[0], grid_.h());
            vk *= std::conj(al) / std::abs(al);
            s.modes[0] = vk.real().cast<Complex>();
        } catch (const NumericalError&) {
        }
        const double n = norm(s);
        if (n < 1e-12) return std::nullopt;
        return (1.0 / n) * s;
    }

    double shift_match(const State&, const State&) const { return 0.0; }
    State rotate_state(const State& s, double) const { return s; }
    int k_star() const { return 0; }

  private:
    std::shared_ptr<const ModelSystem> model_;
    DiscretizationGrid grid_;
    double eps_;
    pde::ShockProfile profile_;
    pde::RhsContext ctx_;
    pde::EvolveOptions opts_;
};

}  // namespace o2hopf::reduction
