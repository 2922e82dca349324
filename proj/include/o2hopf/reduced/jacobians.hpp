#pragma once

#include <optional>

#include "o2hopf/reduced/system.hpp"

namespace o2hopf::reduced {

// Real Jacobian of the truncated system in coordinates
// (x1, y1, x2, y2, mu) with a_j = x_j + i y_j. Rows are
// (Re F1, Im F1, Re F2, Im F2); exact differentiation of the cubic.
inline Eigen::Matrix<double, 4, 5> jacobian_real(const CubicCoefficients& c,
                                                 const ReducedPoint& p) {
    const double s = p.sign_eps >= 0 ? 1.0 : -1.0;
    const double x1 = p.a1.real(), y1 = p.a1.imag();
    const double x2 = p.a2.real(), y2 = p.a2.imag();
    const Complex l1(c.kappa * s + std::real(c.Lambda) * std::norm(p.a1) +
                         std::real(c.Gamma) * std::norm(p.a2),
                     c.chi * p.mu_tilde + std::imag(c.Lambda) * std::norm(p.a1) +
                         std::imag(c.Gamma) * std::norm(p.a2));
    const Complex l2(c.kappa * s + std::real(c.Gamma) * std::norm(p.a1) +
                         std::real(c.Lambda) * std::norm(p.a2),
                     c.chi * p.mu_tilde + std::imag(c.Gamma) * std::norm(p.a1) +
                         std::imag(c.Lambda) * std::norm(p.a2));
    const Complex i(0.0, 1.0);

    Eigen::Matrix<Complex, 2, 5> dF;
    dF(0, 0) = l1 + 2.0 * x1 * c.Lambda * p.a1;
    dF(0, 1) = i * l1 + 2.0 * y1 * c.Lambda * p.a1;
    dF(0, 2) = 2.0 * x2 * c.Gamma * p.a1;
    dF(0, 3) = 2.0 * y2 * c.Gamma * p.a1;
    dF(0, 4) = i * c.chi * p.a1;
    dF(1, 0) = 2.0 * x1 * c.Gamma * p.a2;
    dF(1, 1) = 2.0 * y1 * c.Gamma * p.a2;
    dF(1, 2) = l2 + 2.0 * x2 * c.Lambda * p.a2;
    dF(1, 3) = i * l2 + 2.0 * y2 * c.Lambda * p.a2;
    dF(1, 4) = i * c.chi * p.a2;

    Eigen::Matrix<double, 4, 5> J;
    for (int col = 0; col < 5; ++col) {
        J(0, col) = dF(0, col).real();
        J(1, col) = dF(0, col).imag();
        J(2, col) = dF(1, col).real();
        J(3, col) = dF(1, col).imag();
    }
    return J;
}

struct JacobianRecord {
    BranchKind kind = BranchKind::Trivial;
    double numeric_det = 0.0;
    double closed_form = 0.0;
    // Standing carries both pinned 3x3 row systems (real-row and
    // imaginary-row variants); numeric_det/closed_form hold the first.
    std::optional<double> numeric_det_alt;
    std::optional<double> closed_form_alt;
};

// Determinants of the pinned Jacobians at an equilibrium, together with the
// closed forms:
//   trivial   (kappa^2 + chi^2 mu^2)^2
//   traveling 2 chi (Re Lambda) |Lambda-Gamma|^2 a^7
//   standing  4 chi Re(Lambda+Gamma) (Re Lambda - Re Gamma) a^5   and
//             4 chi Re(Lambda+Gamma) (Im Lambda - Im Gamma) a^5.
inline JacobianRecord jacobian_at(const CubicCoefficients& c, const EquilibriumBranch& b,
                                  int sign_eps = +1, double tol = 1e-10) {
    const ReducedPoint p = b.point(sign_eps);
    const auto [f1, f2] = evaluate_truncated(c, p);
    const double resid = std::sqrt(std::norm(f1) + std::norm(f2));
    if (resid > tol)
        throw BranchMismatch("point is not an equilibrium, residual = " + std::to_string(resid));

    const Eigen::Matrix<double, 4, 5> J = jacobian_real(c, p);
    JacobianRecord rec;
    rec.kind = b.kind;
    const double a = b.amplitude;

    switch (b.kind) {
        case BranchKind::Trivial: {
            Eigen::Matrix4d M = J.leftCols<4>();
            rec.numeric_det = M.determinant();
            const double q = c.kappa * c.kappa + c.chi * c.chi * b.mu_star * b.mu_star;
            rec.closed_form = q * q;
            break;
        }
        case BranchKind::Traveling1:
        case BranchKind::Traveling2: {
            // columns (x_active, mu, x_other, y_other)
            Eigen::Matrix4d M;
            if (b.kind == BranchKind::Traveling1)
                M << J.col(0), J.col(4), J.col(2), J.col(3);
            else
                M << J.col(2), J.col(4), J.col(0), J.col(1);
            rec.numeric_det = M.determinant();
            rec.closed_form = 2.0 * c.chi * std::real(c.Lambda) *
                              std::norm(c.Lambda - c.Gamma) * std::pow(a, 7);
            break;
        }
        case BranchKind::Standing: {
            // three unknowns (x1, mu, x2); rows (ReF1, ImF1, ReF2) and
            // (ReF1, ImF1, ImF2)
            Eigen::Matrix3d M2, M3;
            const int cols[3] = {0, 4, 2};
            for (int j = 0; j < 3; ++j) {
                for (int r = 0; r < 3; ++r) M2(r, j) = J(r, cols[j]);
                M3(0, j) = J(0, cols[j]);
                M3(1, j) = J(1, cols[j]);
                M3(2, j) = J(3, cols[j]);
            }
            rec.numeric_det = M2.determinant();
            rec.numeric_det_alt = M3.determinant();
            const double re_sum = std::real(c.Lambda + c.Gamma);
            rec.closed_form =
                4.0 * c.chi * re_sum * (std::real(c.Lambda) - std::real(c.Gamma)) * std::pow(a, 5);
            rec.closed_form_alt =
                4.0 * c.chi * re_sum * (std::imag(c.Lambda) - std::imag(c.Gamma)) * std::pow(a, 5);
            break;
        }
    }
    return rec;
}

}  // namespace o2hopf::reduced
