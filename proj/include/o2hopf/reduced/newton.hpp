#pragma once

#include <functional>
#include <vector>

#include "o2hopf/reduced/system.hpp"

namespace o2hopf::reduced {

// Residual of the (possibly perturbed) reduced system at (a1, a2, mu).
using ResidualFn = std::function<std::pair<Complex, Complex>(Complex, Complex, double)>;

enum class Pinning {
    Free,        // all five real unknowns, minimum-norm Gauss-Newton step
    Traveling1,  // Im a1 = 0, a2 free
    Traveling2,  // Im a2 = 0, a1 free
    Standing,    // Im a1 = Im a2 = 0, three unknowns (a1, mu, a2)
};

struct NewtonOptions {
    int max_iter = 50;
    double tol = 1e-12;
    double fd_step = 1e-7;
    double trust_radius = 100.0;  // iterates beyond this amplitude count as divergence
    double max_condition = 1e12;
};

struct NewtonResult {
    ReducedPoint root;
    int iterations = 0;
    double final_residual = 0.0;
    double quadratic_ratio = 0.0;  // ||r_{k+1}|| / ||r_k||^2 over the last full step
    std::vector<double> residual_history;
    int standing_rows = 2;  // 2 or 3: which Appendix-style row set was used
};

namespace detail {

inline int unknown_count(Pinning pin) {
    switch (pin) {
        case Pinning::Free: return 5;
        case Pinning::Standing: return 3;
        default: return 4;
    }
}

inline ReducedPoint point_from_unknowns(const Vec& u, Pinning pin, int sign_eps) {
    ReducedPoint p;
    p.sign_eps = sign_eps;
    switch (pin) {
        case Pinning::Free:
            p.a1 = Complex(u[0], u[1]);
            p.a2 = Complex(u[2], u[3]);
            p.mu_tilde = u[4];
            break;
        case Pinning::Traveling1:
            p.a1 = Complex(u[0], 0.0);
            p.mu_tilde = u[1];
            p.a2 = Complex(u[2], u[3]);
            break;
        case Pinning::Traveling2:
            p.a2 = Complex(u[0], 0.0);
            p.mu_tilde = u[1];
            p.a1 = Complex(u[2], u[3]);
            break;
        case Pinning::Standing:
            p.a1 = Complex(u[0], 0.0);
            p.mu_tilde = u[1];
            p.a2 = Complex(u[2], 0.0);
            break;
    }
    return p;
}

inline Vec unknowns_from_point(const ReducedPoint& p, Pinning pin) {
    Vec u(unknown_count(pin));
    switch (pin) {
        case Pinning::Free:
            u << p.a1.real(), p.a1.imag(), p.a2.real(), p.a2.imag(), p.mu_tilde;
            break;
        case Pinning::Traveling1: u << p.a1.real(), p.mu_tilde, p.a2.real(), p.a2.imag(); break;
        case Pinning::Traveling2: u << p.a2.real(), p.mu_tilde, p.a1.real(), p.a1.imag(); break;
        case Pinning::Standing: u << p.a1.real(), p.mu_tilde, p.a2.real(); break;
    }
    return u;
}

inline Eigen::Vector4d residual4(const ResidualFn& f, const ReducedPoint& p) {
    const auto [f1, f2] = f(p.a1, p.a2, p.mu_tilde);
    return Eigen::Vector4d(f1.real(), f1.imag(), f2.real(), f2.imag());
}

}  // namespace detail

// Damped-free Newton on the pinned reduced system. The seed supplies the
// sign of eps; the residual callback owns everything else. Central finite
// differences for the Jacobian keep the callback generic.
inline NewtonResult newton_refine(const ResidualFn& f, const ReducedPoint& seed, double tol,
                                  Pinning pin = Pinning::Free, NewtonOptions opts = {}) {
    opts.tol = tol;
    const int n = detail::unknown_count(pin);
    Vec u = detail::unknowns_from_point(seed, pin);

    // standing uses three of the four real equations; fixed rows chosen at
    // the seed by the larger pinned determinant
    int standing_rows = 2;
    auto jac_full = [&](const Vec& uu) {
        Mat J(4, n);
        for (int j = 0; j < n; ++j) {
            const double h = opts.fd_step * std::max(1.0, std::abs(uu[j]));
            Vec up = uu, um = uu;
            up[j] += h;
            um[j] -= h;
            const Eigen::Vector4d rp =
                detail::residual4(f, detail::point_from_unknowns(up, pin, seed.sign_eps));
            const Eigen::Vector4d rm =
                detail::residual4(f, detail::point_from_unknowns(um, pin, seed.sign_eps));
            J.col(j) = (rp - rm) / (2.0 * h);
        }
        return J;
    };
    auto select_rows = [&](const Mat& J4) {
        if (pin != Pinning::Standing) return J4;
        Mat J2(3, n), J3(3, n);
        J2 << J4.row(0), J4.row(1), J4.row(2);
        J3 << J4.row(0), J4.row(1), J4.row(3);
        if (standing_rows == 0) {
            standing_rows =
                std::abs(J2.determinant()) >= std::abs(J3.determinant()) ? 2 : 3;
        }
        return standing_rows == 2 ? J2 : J3;
    };
    if (pin == Pinning::Standing) standing_rows = 0;

    NewtonResult res;
    for (int it = 0; it <= opts.max_iter; ++it) {
        const ReducedPoint p = detail::point_from_unknowns(u, pin, seed.sign_eps);
        if (std::abs(p.a1) > opts.trust_radius || std::abs(p.a2) > opts.trust_radius ||
            std::abs(p.mu_tilde) > opts.trust_radius * opts.trust_radius)
            throw NoConvergence("iterate left the trust region of the reduced system");

        Eigen::Vector4d r4 = detail::residual4(f, p);
        Mat J = select_rows(jac_full(u));
        Vec r;
        if (pin == Pinning::Standing) {
            r.resize(3);
            r << r4[0], r4[1], r4[standing_rows == 2 ? 2 : 3];
        } else {
            r = r4;
        }

        const double rnorm = r.norm();
        res.residual_history.push_back(rnorm);
        res.iterations = it;
        res.final_residual = rnorm;
        res.root = p;
        res.standing_rows = standing_rows == 0 ? 2 : standing_rows;
        if (rnorm <= opts.tol) break;
        if (it == opts.max_iter)
            throw NoConvergence("no residual <= " + std::to_string(opts.tol) + " after " +
                                std::to_string(opts.max_iter) + " iterations");

        Vec step;
        if (pin == Pinning::Free) {
            // minimum-norm step; the rotation orbit makes the square system singular
            step = J.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(-r);
        } else {
            Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const double cond =
                svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
            if (!std::isfinite(cond) || cond > opts.max_condition)
                throw SingularJacobian("pinned Jacobian condition " + std::to_string(cond));
            step = svd.solve(-r);
        }
        u += step;
    }

    const auto& h = res.residual_history;
    if (h.size() >= 2 && h[h.size() - 2] > 0.0)
        res.quadratic_ratio = h.back() / (h[h.size() - 2] * h[h.size() - 2]);
    return res;
}

}  // namespace o2hopf::reduced
