#pragma once

#include <functional>
#include <optional>

#include "o2hopf/reduced/continuation.hpp"
#include "o2hopf/reduction/krylov.hpp"

namespace o2hopf::reduction {

struct ReductionConfig {
    double complement_tol = 1e-8;    // projection residual allowed in v_perp
    double right_inverse_tol = 1e-8;
    int gmres_max = 150;
    double gmres_cond_max = 1e10;
    double picard_tol = 1e-10;
    int picard_max = 40;
    double contraction_limit = 0.9;
    double smallness_radius = 1.0;   // |a|, |b| guard for the fixed point
    double spurious_threshold = 1e-3;  // relative to |Lambda|
    double fit_residual_limit = 0.1;
};

template <class State>
struct DisplacementValue {
    Complex D1{}, D2{};
    State D3;
    Complex D1_integral{}, D2_integral{};  // Duhamel quadrature route
    double route_mismatch = 0.0;
    double quadrature_tol = 0.0;
};

// Displacement map of one period candidate: reconstructs the real field from
// the pair coordinates plus a complement part, runs the flow once, and
// returns both the direct difference and the Duhamel-integral evaluation.
template <class Sys>
DisplacementValue<typename Sys::State> displacement(const Sys& sys, Complex a1, Complex a2,
                                                    const typename Sys::State& vperp, double T,
                                                    const ReductionConfig& cfg = {}) {
    auto [p1, p2] = sys.coordinates(vperp);
    const double leak = std::abs(p1) + std::abs(p2);
    if (leak > cfg.complement_tol * (1.0 + sys.norm(vperp)))
        throw ProjectionLeak("v_perp carries pair content " + std::to_string(leak));

    typename Sys::State v0 = sys.eigenstate(a1, a2) + vperp;
    auto rec = sys.evolve_recording(v0, T);
    auto [b1, b2] = sys.coordinates(rec.vT);

    DisplacementValue<typename Sys::State> out;
    out.D1 = b1 - a1;
    out.D2 = b2 - a2;
    out.D3 = sys.complement(rec.vT) - vperp;

    // trapezoid on the stored snapshots, Richardson check at half resolution
    const Complex lam = sys.lambda_plus();
    auto quad = [&](int stride, const std::vector<Complex>& f) {
        Complex acc(0, 0);
        for (std::size_t i = 0; i + stride < rec.t.size(); i += stride) {
            const double dt = rec.t[i + stride] - rec.t[i];
            const Complex w0 = std::exp((T - rec.t[i]) * lam) * f[i];
            const Complex w1 = std::exp((T - rec.t[i + stride]) * lam) * f[i + stride];
            acc += 0.5 * dt * (w0 + w1);
        }
        return acc;
    };
    const Complex growth = std::exp(T * lam) - 1.0;
    out.D1_integral = growth * a1 + quad(1, rec.phi);
    out.D2_integral = growth * a2 + quad(1, rec.psi);
    out.quadrature_tol =
        (std::abs(quad(1, rec.phi) - quad(2, rec.phi)) +
         std::abs(quad(1, rec.psi) - quad(2, rec.psi))) / 3.0;
    out.route_mismatch =
        std::abs(out.D1 - out.D1_integral) + std::abs(out.D2 - out.D2_integral);
    return out;
}

struct KernelInfo {
    bool present = false;
    double defect = 0.0;        // ||(I - e^{T Lt}) h|| / ||h||
    double angle_to_seed = 0.0;
};

// Kernel direction of I - e^{T Ltilde} in the Lax case: the translation
// direction refined on the complement. Returns nothing when the model has
// no profile derivative to seed from.
template <class Sys>
std::optional<typename Sys::State> kernel_basis(const Sys& sys, double T,
                                                KernelInfo* info = nullptr) {
    auto seed = sys.kernel_seed();
    if (!seed) {
        if (info) *info = {};
        return std::nullopt;
    }
    using State = typename Sys::State;
    // the seed is the translation eigendirection of the k = 0 operator, the
    // T-independent kernel representative of the Lax case
    State h = *seed;
    const State resid = h - sys.linT(h, T);
    KernelInfo ki;
    ki.present = true;
    ki.defect = sys.norm(resid) / sys.norm(h);
    const double c = sys.inner(h, *seed) / (sys.norm(h) * sys.norm(*seed));
    ki.angle_to_seed = std::acos(std::min(1.0, std::abs(c)));
    if (info) *info = ki;
    return h;
}

// Minimum-norm-flavored solve of (I - e^{T Ltilde}) x = y on the complement,
// with the kernel direction deflated when present.
template <class Sys>
typename Sys::State right_inverse_apply(
    const Sys& sys, const typename Sys::State& y, double T,
    const std::optional<typename Sys::State>& kernel = std::nullopt,
    const ReductionConfig& cfg = {}, GmresReport* report = nullptr) {
    using State = typename Sys::State;
    auto [p1, p2] = sys.coordinates(y);
    if (std::abs(p1) + std::abs(p2) > cfg.complement_tol * (1.0 + sys.norm(y)))
        throw InvalidInput("right inverse input is not in the complement range");

    auto deflate = [&](const State& x) -> State {
        if (!kernel) return x;
        const double c = sys.inner(x, *kernel) / sys.inner(*kernel, *kernel);
        return x - c * (*kernel);
    };
    auto apply = [&](const State& x) -> State {
        const State xd = deflate(x);
        return deflate(xd - sys.linT(xd, T));
    };
    auto inner = [&](const State& a, const State& b) { return sys.inner(a, b); };

    GmresReport rep;
    State x = deflate(gmres(apply, inner, deflate(y), cfg.right_inverse_tol * 0.1,
                            cfg.gmres_max, &rep));
    if (report) *report = rep;

    const double ny = sys.norm(y);
    const double resid = sys.norm((x - sys.linT(x, T)) - y);
    if (rep.cond_estimate > cfg.gmres_cond_max)
        throw IllConditioned("deflated system condition " + std::to_string(rep.cond_estimate));
    if (resid > cfg.right_inverse_tol * ny + 1e-10)
        throw IllConditioned("right inverse residual " + std::to_string(resid) + " on |y| = " +
                             std::to_string(ny));
    return x;
}

template <class State>
struct TransverseResult {
    State v_perp;
    State vT;  // nonlinear flow of the reconstructed field at the fixed point
    int iterations = 0;
    double contraction = 0.0;
    double update_norm = 0.0;
};

// Fixed point v = R^dagger N3(a1, a2, v) + b h by Picard iteration, where
// N3 is extracted from the nonlinear flow as Pi v(T) - e^{T Lt} v.
template <class Sys>
TransverseResult<typename Sys::State> solve_transverse(
    const Sys& sys, Complex a1, Complex a2, double T, double b = 0.0,
    const std::optional<typename Sys::State>& kernel = std::nullopt,
    const ReductionConfig& cfg = {}, const typename Sys::State* warm = nullptr) {
    using State = typename Sys::State;
    if (std::abs(a1) > cfg.smallness_radius || std::abs(a2) > cfg.smallness_radius ||
        std::abs(b) > cfg.smallness_radius)
        throw InvalidInput("transverse solve outside the smallness radius");
    if (b != 0.0 && !kernel) throw InvalidInput("b shift requested without a kernel direction");

    State v = warm ? *warm : sys.zero_state();
    State vT = sys.zero_state();
    TransverseResult<State> out{v, vT, 0, 0.0, 0.0};
    double prev_update = -1.0;
    int slow = 0;
    for (int it = 0; it < cfg.picard_max; ++it) {
        State v0 = sys.eigenstate(a1, a2) + v;
        vT = sys.evolve(v0, T);
        State n3 = sys.complement(vT) - sys.linT(v, T);
        State vnext = right_inverse_apply(sys, n3, T, kernel, cfg);
        if (kernel) vnext = vnext + b * (*kernel);
        const double upd = sys.norm(vnext - v);
        out.iterations = it + 1;
        out.update_norm = upd;
        if (prev_update > 0.0) {
            out.contraction = upd / prev_update;
            if (out.contraction >= cfg.contraction_limit && ++slow >= 3)
                throw NoContraction("empirical contraction factor " +
                                    std::to_string(out.contraction));
        }
        prev_update = upd;
        v = vnext;
        if (upd <= cfg.picard_tol) break;
        if (it + 1 == cfg.picard_max)
            throw NoConvergence("transverse fixed point stalled at update " +
                                std::to_string(upd));
    }
    out.v_perp = v;
    out.vT = sys.evolve(sys.eigenstate(a1, a2) + v, T);
    return out;
}

// Reduced maps N1~, N2~ at T = T*(1+mu) after eliminating the complement.
template <class Sys>
std::pair<Complex, Complex> reduced_maps(const Sys& sys, Complex a1, Complex a2, double mu,
                                         double b = 0.0,
                                         const std::optional<typename Sys::State>& kernel =
                                             std::nullopt,
                                         const ReductionConfig& cfg = {},
                                         typename Sys::State* warm_io = nullptr) {
    const double T = sys.T_star() * (1.0 + mu);
    auto tr = solve_transverse(sys, a1, a2, T, b, kernel, cfg,
                               warm_io && sys.norm(*warm_io) > 0.0 ? warm_io : nullptr);
    if (warm_io) *warm_io = tr.v_perp;
    auto [b1, b2] = sys.coordinates(tr.vT);
    return {b1 - a1, b2 - a2};
}

struct CoefficientFit {
    double kappa = 0.0, chi = 0.0;
    Complex Lambda{}, Gamma{};
    Complex Upsilon1{}, Lambda2{}, Upsilon2{}, Gamma2{};  // spurious families
    Complex linear_defect{};     // residual multiplier of the discrete flow
    double residual = 0.0;       // relative regression misfit
    double sample_radius = 0.0;
    double spurious_max = 0.0;

    reduced::CubicCoefficients cubic() const {
        return reduced::CubicCoefficients{kappa, chi, Lambda, Gamma};
    }
    bool spurious_ok(double threshold) const {
        return spurious_max <= threshold * std::max(std::abs(Lambda), std::abs(Gamma));
    }
};

// Cubic-order structure of the reduced maps at eps = eps0, mu = 0. kappa and
// chi come from the exact crossing formulas; Lambda, Gamma and the four
// spurious families are fitted on phase-diverse complex directions.
template <class Sys>
CoefficientFit fit_coefficients(const Sys& sys, double gamma_prime, double sample_radius,
                                int n_radii = 2, const ReductionConfig& cfg = {}) {
    CoefficientFit fit;
    fit.kappa = sys.kappa_exact(gamma_prime);
    fit.chi = sys.chi_exact();

    const Complex dirs[5][2] = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0},
                                {1.0, Complex(0, 1)}, {1.0, -1.0}};
    const Complex phases[2] = {1.0, std::exp(Complex(0, pi / 4.0))};

    for (int attempt = 0; attempt < 4; ++attempt, sample_radius *= 0.5) {
        std::vector<Eigen::Matrix<Complex, 1, 7>> rows;
        std::vector<Complex> vals;
        // six cubic families plus one linear column absorbing the residual
        // multiplier of the discrete time stepper
        auto monomials = [](Complex a1, Complex a2) {
            Eigen::Matrix<Complex, 1, 7> m;
            m << a1 * std::norm(a1), a1 * std::norm(a2), a1 * a1 * a2,
                std::conj(a2) * std::norm(a1), std::conj(a1) * std::conj(a2) * std::conj(a2),
                std::conj(a2) * std::norm(a2), a1;
            return m;
        };
        auto monomials_swapped = [&](Complex a1, Complex a2) { return monomials(a2, a1); };

        for (int r = 0; r < n_radii; ++r) {
            const double t = sample_radius / (1 << r);
            for (const auto& d : dirs)
                for (const Complex& ph : phases) {
                    const Complex a1 = t * ph * d[0];
                    const Complex a2 = t * ph * d[1];
                    auto [n1, n2] = reduced_maps(sys, a1, a2, 0.0, 0.0, std::nullopt, cfg);
                    rows.push_back(monomials(a1, a2));
                    vals.push_back(n1);
                    rows.push_back(monomials_swapped(a1, a2));
                    vals.push_back(n2);
                }
        }
        const int m = int(rows.size());
        CMat A(m, 7);
        CVec y(m);
        // column scaling keeps the mixed-degree regression well conditioned
        Vec colscale(7);
        colscale.head(6).setConstant(std::pow(sample_radius, 3));
        colscale[6] = sample_radius;
        for (int i = 0; i < m; ++i) {
            A.row(i) = rows[i];
            y[i] = vals[i];
        }
        for (int j = 0; j < 7; ++j) A.col(j) /= colscale[j];
        Eigen::JacobiSVD<CMat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double cond =
            svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
        if (cond > 1e8) throw FitDegenerate("regression condition " + std::to_string(cond));
        CVec c = svd.solve(y);
        const double misfit = (A * c - y).norm() / std::max(y.norm(), 1e-300);
        for (int j = 0; j < 7; ++j) c[j] /= colscale[j];

        fit.Lambda = c[0];
        fit.Gamma = c[1];
        fit.Upsilon1 = c[2];
        fit.Lambda2 = c[3];
        fit.Upsilon2 = c[4];
        fit.Gamma2 = c[5];
        fit.linear_defect = c[6];
        fit.residual = misfit;
        fit.sample_radius = sample_radius;
        fit.spurious_max = std::max({std::abs(c[2]), std::abs(c[3]), std::abs(c[4]),
                                     std::abs(c[5])});
        if (misfit < cfg.fit_residual_limit) return fit;
    }
    return fit;  // last attempt, caller sees the residual
}

struct OrbitRecord {
    double eps = 0.0;
    reduced::BranchKind kind = reduced::BranchKind::Trivial;
    double amplitude = 0.0;        // unrescaled |a|
    double amplitude_rescaled = 0.0;
    double mu = 0.0;               // period offset, T = T*(1+mu)
    double T = 0.0;
    Complex a1{}, a2{};
    double return_residual = -1.0;
    double shift_residual = -1.0;  // traveling fit
    double speed = 0.0;
    double omega = 0.0;
    bool converged = false;
    std::string error;
};

struct VerifyRecord {
    double return_residual = 0.0;
    double shift_residual = 0.0;
    double speed = 0.0;
    bool traveling_improves = false;
};

// Return-map residual of a candidate orbit (on the solver's own step
// lattice) plus the x2-shift-matched fit at quarter periods, which is small
// along the whole orbit only for genuinely traveling solutions.
template <class Sys>
VerifyRecord verify_orbit(const Sys& sys, const typename Sys::State& v0, double T) {
    VerifyRecord rec;
    const double n0 = sys.norm(v0);
    if (n0 == 0.0) return rec;

    std::vector<typename Sys::State> quarters;
    const typename Sys::State vT = sys.evolve_quarters(v0, T, quarters);
    rec.return_residual = sys.norm(vT - v0) / n0;

    double theta_prev = 0.0, theta_last = 0.0;
    rec.shift_residual = 0.0;
    for (std::size_t q = 0; q < quarters.size(); ++q) {
        double th = sys.shift_match(quarters[q], v0);
        while (th - theta_prev > pi / sys.k_star()) th -= 2.0 * pi / sys.k_star();
        while (th - theta_prev < -pi / sys.k_star()) th += 2.0 * pi / sys.k_star();
        rec.shift_residual = std::max(
            rec.shift_residual, sys.norm(quarters[q] - sys.rotate_state(v0, th)) / n0);
        theta_prev = th;
        theta_last = th;
    }
    rec.speed = -theta_last / (0.75 * T);
    rec.traveling_improves = rec.shift_residual < 0.2 * rec.return_residual;
    return rec;
}

// Full branch location across an eps sweep: cubic predictor from the fitted
// coefficients, pinned Newton on the reduced maps, transverse reconstruction
// and verification.
template <class SysFactory>
std::vector<OrbitRecord> locate_periodic_orbits(
    const SysFactory& factory, double eps0, const std::vector<double>& eps_list,
    const CoefficientFit& fit, const std::vector<reduced::BranchKind>& kinds,
    const ReductionConfig& cfg = {}, double genericity_tol = 1e-10) {
    const auto rep = reduced::check_genericity(fit.cubic(), genericity_tol);
    if (!rep.all_hold())
        throw GenericityViolation("fitted coefficients violate the nondegeneracy conditions");

    std::vector<OrbitRecord> out;
    for (double eps : eps_list) {
        const double delta = eps - eps0;
        if (delta == 0.0) continue;
        const int sgn = delta > 0 ? +1 : -1;
        auto sys = factory(eps);
        const double se = std::sqrt(std::abs(delta));

        std::vector<reduced::EquilibriumBranch> predictors;
        try {
            predictors = reduced::solve_cubic_equilibria(fit.cubic(), sgn, genericity_tol);
        } catch (const GenericityViolation&) {
            throw;
        }
        for (reduced::BranchKind kind : kinds) {
            const reduced::EquilibriumBranch* pred = nullptr;
            for (const auto& p : predictors)
                if (p.kind == kind) pred = &p;
            OrbitRecord rec;
            rec.eps = eps;
            rec.kind = kind;
            rec.omega = 2.0 * pi * sys.k_star() / sys.T_star();
            if (!pred) {
                rec.error = "branch does not bifurcate on this side";
                out.push_back(rec);
                continue;
            }
            try {
                typename std::decay_t<decltype(sys)>::State warm = sys.zero_state();
                reduced::ResidualFn f = [&](Complex ta1, Complex ta2, double tmu) {
                    auto [n1, n2] = reduced_maps(sys, se * ta1, se * ta2, delta * tmu, 0.0,
                                                 std::nullopt, cfg, &warm);
                    const double scale = se * std::abs(delta);
                    return std::make_pair(n1 / scale, n2 / scale);
                };
                reduced::NewtonOptions nopts;
                nopts.max_iter = 25;
                nopts.fd_step = 1e-5;
                auto nr = reduced::newton_refine(f, pred->point(sgn), 1e-7,
                                                 reduced::pinning_for(kind), nopts);
                rec.a1 = se * nr.root.a1;
                rec.a2 = se * nr.root.a2;
                rec.mu = delta * nr.root.mu_tilde;
                rec.T = sys.T_star() * (1.0 + rec.mu);
                rec.amplitude_rescaled =
                    std::max(std::abs(nr.root.a1), std::abs(nr.root.a2));
                rec.amplitude = se * rec.amplitude_rescaled;

                auto tr = solve_transverse(sys, rec.a1, rec.a2, rec.T, 0.0, std::nullopt,
                                           cfg, &warm);
                auto vrec = verify_orbit(sys, sys.eigenstate(rec.a1, rec.a2) + tr.v_perp,
                                         rec.T);
                rec.return_residual = vrec.return_residual;
                rec.shift_residual = vrec.shift_residual;
                rec.speed = vrec.speed;
                rec.converged = true;
            } catch (const NumericalError& e) {
                rec.error = e.what();
            }
            out.push_back(rec);
        }
    }
    return out;
}

}  // namespace o2hopf::reduction
