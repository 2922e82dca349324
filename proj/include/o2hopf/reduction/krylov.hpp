#pragma once

#include <functional>
#include <vector>

#include "o2hopf/common.hpp"

namespace o2hopf::reduction {

struct GmresReport {
    int iterations = 0;
    double residual = 0.0;     // relative
    double cond_estimate = 1.0;  // of the Hessenberg least-squares system
    bool converged = false;
};

// Matrix-free GMRES without restarts on an abstract state type; States need
// +, -, scalar*, and the caller supplies the inner product.
template <class State, class ApplyFn, class InnerFn>
State gmres(const ApplyFn& apply, const InnerFn& inner, const State& rhs, double tol,
            int max_iter, GmresReport* report = nullptr) {
    auto norm = [&](const State& s) { return std::sqrt(std::max(0.0, inner(s, s))); };
    const double beta = norm(rhs);
    GmresReport rep;
    if (beta == 0.0) {
        if (report) *report = rep;
        return 0.0 * rhs;
    }

    std::vector<State> V;
    V.push_back((1.0 / beta) * rhs);
    std::vector<std::vector<double>> H;  // H[j] has j+2 entries
    std::vector<double> cs, sn, g{beta};

    int j = 0;
    for (; j < max_iter; ++j) {
        State w = apply(V[j]);
        std::vector<double> h(j + 2, 0.0);
        for (int i = 0; i <= j; ++i) {
            h[i] = inner(w, V[i]);
            w = w - h[i] * V[i];
        }
        // one re-orthogonalization pass keeps the basis clean
        for (int i = 0; i <= j; ++i) {
            const double c = inner(w, V[i]);
            h[i] += c;
            w = w - c * V[i];
        }
        h[j + 1] = norm(w);
        if (h[j + 1] > 1e-14 * beta) V.push_back((1.0 / h[j + 1]) * w);

        // apply accumulated Givens rotations
        for (int i = 0; i < j; ++i) {
            const double t = cs[i] * h[i] + sn[i] * h[i + 1];
            h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
            h[i] = t;
        }
        const double r = std::hypot(h[j], h[j + 1]);
        if (r == 0.0) throw IllConditioned("GMRES breakdown");
        cs.push_back(h[j] / r);
        sn.push_back(h[j + 1] / r);
        h[j] = r;
        h[j + 1] = 0.0;
        g.push_back(-sn[j] * g[j]);
        g[j] *= cs[j];
        H.push_back(h);

        rep.iterations = j + 1;
        rep.residual = std::abs(g[j + 1]) / beta;
        if (rep.residual <= tol) {
            rep.converged = true;
            ++j;
            break;
        }
        if (int(V.size()) == j + 1) {  // happy breakdown without convergence
            ++j;
            break;
        }
    }

    // back substitution on the triangular H
    const int m = int(H.size());
    std::vector<double> y(m, 0.0);
    double hmin = 1e300, hmax = 0.0;
    for (int i = m - 1; i >= 0; --i) {
        double s = g[i];
        for (int l = i + 1; l < m; ++l) s -= H[l][i] * y[l];
        y[i] = s / H[i][i];
        hmin = std::min(hmin, std::abs(H[i][i]));
        hmax = std::max(hmax, std::abs(H[i][i]));
    }
    rep.cond_estimate = hmax / std::max(hmin, 1e-300);
    if (report) *report = rep;

    State x = y.empty() ? 0.0 * rhs : y[0] * V[0];
    for (int i = 1; i < m; ++i) x = x + y[i] * V[i];
    return x;
}

}  // namespace o2hopf::reduction
