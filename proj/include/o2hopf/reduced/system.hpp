#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "o2hopf/common.hpp"

namespace o2hopf::reduced {

// Data of the truncated four-dimensional bifurcation system
//   F1 = a1 (kappa s + i chi mu + Lambda |a1|^2 + Gamma |a2|^2)
//   F2 = a2 (kappa s + i chi mu + Gamma |a1|^2 + Lambda |a2|^2),
// s = sign(eps).
struct CubicCoefficients {
    double kappa = 1.0;  // nonzero
    double chi = 1.0;    // nonzero
    Complex Lambda{-1.0, 0.0};
    Complex Gamma{-2.0, 0.0};
};

struct ReducedPoint {
    Complex a1{0.0, 0.0};  // rescaled amplitude
    Complex a2{0.0, 0.0};
    double mu_tilde = 0.0;  // rescaled period offset mu/eps
    int sign_eps = +1;
    double sqrt_eps = 0.0;  // |eps|^{1/2} >= 0
};

enum class BranchKind { Trivial, Traveling1, Traveling2, Standing };
enum class Criticality { Supercritical, Subcritical };

inline const char* to_string(BranchKind k) {
    switch (k) {
        case BranchKind::Trivial: return "trivial";
        case BranchKind::Traveling1: return "traveling1";
        case BranchKind::Traveling2: return "traveling2";
        case BranchKind::Standing: return "standing";
    }
    return "?";
}

inline const char* to_string(Criticality c) {
    return c == Criticality::Supercritical ? "supercritical" : "subcritical";
}

// One equilibrium family of the truncated system. The standing family is a
// rotation orbit (a, e^{i theta} a); the stored representative has theta = 0.
struct EquilibriumBranch {
    BranchKind kind = BranchKind::Trivial;
    double amplitude = 0.0;  // |a*| or |a_nat|, 0 for trivial
    double mu_star = 0.0;
    Criticality criticality = Criticality::Supercritical;
    double theta = 0.0;

    ReducedPoint point(int sign_eps) const {
        ReducedPoint p;
        p.mu_tilde = mu_star;
        p.sign_eps = sign_eps;
        switch (kind) {
            case BranchKind::Trivial: break;
            case BranchKind::Traveling1: p.a1 = amplitude; break;
            case BranchKind::Traveling2: p.a2 = amplitude; break;
            case BranchKind::Standing:
                p.a1 = amplitude;
                p.a2 = amplitude * std::exp(Complex(0.0, theta));
                break;
        }
        return p;
    }
};

// Evaluates the truncated cubic system. Total function, exact complex
// arithmetic; F(0,0) = (0,0) for every mu_tilde.
inline std::pair<Complex, Complex> evaluate_truncated(const CubicCoefficients& c,
                                                      const ReducedPoint& p) {
    const double s = p.sign_eps >= 0 ? 1.0 : -1.0;
    const Complex linear(c.kappa * s, c.chi * p.mu_tilde);
    const double r1 = std::norm(p.a1);
    const double r2 = std::norm(p.a2);
    return {p.a1 * (linear + c.Lambda * r1 + c.Gamma * r2),
            p.a2 * (linear + c.Gamma * r1 + c.Lambda * r2)};
}

struct GenericityCondition {
    bool holds = false;
    double margin = 0.0;  // |tested quantity|
};

struct GenericityReport {
    GenericityCondition lambda_ne_gamma;
    GenericityCondition re_sum_nonzero;
    GenericityCondition re_lambda_nonzero;
    double tolerance = 1e-10;

    bool all_hold() const {
        return lambda_ne_gamma.holds && re_sum_nonzero.holds && re_lambda_nonzero.holds;
    }
};

// Checks Lambda != Gamma, Re(Lambda+Gamma) != 0, Re Lambda != 0.
inline GenericityReport check_genericity(const CubicCoefficients& c, double tol = 1e-10) {
    GenericityReport r;
    r.tolerance = tol;
    r.lambda_ne_gamma.margin = std::abs(c.Lambda - c.Gamma);
    r.re_sum_nonzero.margin = std::abs(std::real(c.Lambda + c.Gamma));
    r.re_lambda_nonzero.margin = std::abs(std::real(c.Lambda));
    r.lambda_ne_gamma.holds = r.lambda_ne_gamma.margin > tol;
    r.re_sum_nonzero.holds = r.re_sum_nonzero.margin > tol;
    r.re_lambda_nonzero.holds = r.re_lambda_nonzero.margin > tol;
    return r;
}

namespace detail {
inline Criticality criticality_for(double kappa, double re_coeff) {
    // branch exists on the side sign(eps) = -re_coeff * |a|^2 / kappa; with
    // |a|^2 > 0 the sign is that of -re_coeff/kappa
    return (-re_coeff / kappa > 0.0) ? Criticality::Supercritical : Criticality::Subcritical;
}
}  // namespace detail

// Closed forms of the nontrivial families:
//   traveling  |a*|^2   = -kappa s / Re Lambda,        mu* = -Im Lambda |a*|^2 / chi
//   standing   |a_nat|^2 = -kappa s / Re(Lambda+Gamma), mu  = -Im(Lambda+Gamma)|a_nat|^2 / chi.
// Returns Trivial always and each nontrivial kind when its squared amplitude
// is positive for the given sign of eps.
inline std::vector<EquilibriumBranch> solve_cubic_equilibria(const CubicCoefficients& c,
                                                             int sign_eps,
                                                             double genericity_tol = 1e-10) {
    const GenericityReport rep = check_genericity(c, genericity_tol);
    if (!rep.all_hold())
        throw GenericityViolation("solve_cubic_equilibria requires Lambda != Gamma, "
                                  "Re(Lambda+Gamma) != 0, Re Lambda != 0");
    const double s = sign_eps >= 0 ? 1.0 : -1.0;
    std::vector<EquilibriumBranch> out;
    out.push_back(EquilibriumBranch{BranchKind::Trivial, 0.0, 0.0,
                                    Criticality::Supercritical, 0.0});

    const double trav_sq = -c.kappa * s / std::real(c.Lambda);
    if (trav_sq > 0.0) {
        const double a = std::sqrt(trav_sq);
        const double mu = -std::imag(c.Lambda) * trav_sq / c.chi;
        const Criticality crit = detail::criticality_for(c.kappa, std::real(c.Lambda));
        out.push_back(EquilibriumBranch{BranchKind::Traveling1, a, mu, crit, 0.0});
        out.push_back(EquilibriumBranch{BranchKind::Traveling2, a, mu, crit, 0.0});
    }
    const Complex lg = c.Lambda + c.Gamma;
    const double stand_sq = -c.kappa * s / std::real(lg);
    if (stand_sq > 0.0) {
        const double a = std::sqrt(stand_sq);
        const double mu = -std::imag(lg) * stand_sq / c.chi;
        const Criticality crit = detail::criticality_for(c.kappa, std::real(lg));
        out.push_back(EquilibriumBranch{BranchKind::Standing, a, mu, crit, 0.0});
    }
    return out;
}

}  // namespace o2hopf::reduced
