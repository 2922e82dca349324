#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "o2hopf/reduced/newton.hpp"

namespace o2hopf::reduced {

// One residual system per eps; the callback owns any higher-order terms.
using SystemFamily = std::function<ResidualFn(double eps)>;

struct BranchSample {
    double eps = 0.0;
    double amplitude = 0.0;  // unrescaled, |a| = |eps|^{1/2} |a~|
    double amplitude_rescaled = 0.0;
    double mu_tilde = 0.0;
    bool converged = false;
    std::string error;
};

struct BifurcationBranch {
    BranchKind kind = BranchKind::Traveling1;
    Criticality criticality = Criticality::Supercritical;
    std::vector<BranchSample> samples;
    double fitted_exponent = 0.0;  // slope of log|a| vs log|eps|
    int n_converged = 0;
};

inline Pinning pinning_for(BranchKind kind) {
    switch (kind) {
        case BranchKind::Traveling1: return Pinning::Traveling1;
        case BranchKind::Traveling2: return Pinning::Traveling2;
        case BranchKind::Standing: return Pinning::Standing;
        default: return Pinning::Free;
    }
}

// Tracks one nontrivial family across the eps grid: cubic predictor,
// pinned Newton corrector, then a log-log amplitude fit against the
// square-root scaling law.
inline BifurcationBranch continue_branch(const SystemFamily& family, const CubicCoefficients& c,
                                         const std::vector<double>& eps_grid, BranchKind kind,
                                         double newton_tol = 1e-12) {
    if (eps_grid.empty()) throw InvalidInput("continue_branch: empty eps grid");
    if (kind == BranchKind::Trivial) throw InvalidInput("continue_branch: nontrivial kinds only");
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        if (eps_grid[i] == 0.0) throw InvalidInput("continue_branch: eps = 0 in grid");
        if (i > 0 && (eps_grid[i] <= eps_grid[i - 1] ||
                      std::signbit(eps_grid[i]) != std::signbit(eps_grid[i - 1])))
            throw InvalidInput("continue_branch: grid must be sorted with one sign");
    }
    const int sign_eps = eps_grid.front() > 0.0 ? +1 : -1;

    const auto branches = solve_cubic_equilibria(c, sign_eps);
    const EquilibriumBranch* predictor = nullptr;
    for (const auto& b : branches)
        if (b.kind == kind) predictor = &b;
    if (!predictor)
        throw GenericityViolation("requested branch kind does not bifurcate for sign(eps) = " +
                                  std::to_string(sign_eps));

    BifurcationBranch out;
    out.kind = kind;
    out.criticality = predictor->criticality;
    const Pinning pin = pinning_for(kind);
    ReducedPoint seed = predictor->point(sign_eps);

    for (double eps : eps_grid) {
        BranchSample s;
        s.eps = eps;
        ResidualFn f = family(eps);
        try {
            NewtonResult nr = newton_refine(f, seed, newton_tol, pin);
            const double amp_tilde =
                std::max(std::abs(nr.root.a1), std::abs(nr.root.a2));
            s.amplitude_rescaled = amp_tilde;
            s.amplitude = std::sqrt(std::abs(eps)) * amp_tilde;
            s.mu_tilde = nr.root.mu_tilde;
            s.converged = true;
            seed = nr.root;  // warm start for the next grid point
            ++out.n_converged;
        } catch (const NumericalError& e) {
            s.error = e.what();
        }
        out.samples.push_back(s);
    }

    // least-squares slope of log|a| against log|eps|
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& s : out.samples) {
        if (!s.converged || s.amplitude <= 0.0) continue;
        const double x = std::log(std::abs(s.eps)), y = std::log(s.amplitude);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m >= 2) out.fitted_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return out;
}

}  // namespace o2hopf::reduced
