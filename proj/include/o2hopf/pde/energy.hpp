#pragma once

#include "o2hopf/pde/evolve.hpp"

namespace o2hopf::pde {

// centered x1-derivative of every mode, one-sided at the boundary
inline ChannelField field_d1(const ChannelField& v, double h) {
    ChannelField out = v;
    const int N = v.N1;
    for (int k = 0; k <= v.K; ++k) {
        const CMat& M = v.modes[k];
        CMat D(M.rows(), N);
        D.middleCols(1, N - 2) = (M.rightCols(N - 2) - M.leftCols(N - 2)) / (2.0 * h);
        D.col(0) = (M.col(1) - M.col(0)) / h;
        D.col(N - 1) = (M.col(N - 1) - M.col(N - 2)) / h;
        out.modes[k] = D;
    }
    return out;
}

inline ChannelField field_d2(const ChannelField& v) {
    ChannelField out = v;
    for (int k = 0; k <= v.K; ++k) out.modes[k] *= Complex(0.0, double(k));
    out.modes[0].setZero();
    return out;
}

namespace detail {

template <class Pair>
inline void for_each_derivative(const ChannelField& v, double h, int s, Pair&& f) {
    // multi-indices |alpha| <= s, derivatives taken in x1 then x2
    std::vector<ChannelField> d1s{v};
    for (int a = 1; a <= s; ++a) d1s.push_back(field_d1(d1s.back(), h));
    for (int a1 = 0; a1 <= s; ++a1) {
        ChannelField g = d1s[a1];
        for (int a2 = 0; a1 + a2 <= s; ++a2) {
            f(g);
            if (a1 + a2 < s) g = field_d2(g);
        }
    }
}

}  // namespace detail

inline double sobolev_norm(const ChannelField& v, int s, double h) {
    double sum = 0.0;
    detail::for_each_derivative(v, h, s, [&](const ChannelField& g) { sum += dot(g, g, h); });
    return std::sqrt(sum);
}

struct EnergyValue {
    double value = 0.0;
    double c_equiv = 0.0;  // lower equivalence constant against H^s
    double C_equiv = 0.0;
};

// E(v) = 1/2 sum_{|alpha|<=s} <D^alpha v, A0(ubar) D^alpha v>, the discrete
// analog of the symmetrizer energy; s in {0, 1, 2}
inline EnergyValue energy_functional(const ModelSystem& model, double eps,
                                     const ShockProfile& profile, const ChannelField& v, int s,
                                     const DiscretizationGrid& grid) {
    if (s < 0 || s > 2) throw InvalidInput("energy functional supports s in {0,1,2}");
    const int N = grid.N1;
    std::vector<Mat> A0(N);
    double cmin = 1e300, cmax = 0.0;
    for (int i = 0; i < N; ++i) {
        A0[i] = model.symmetrizer(eps, profile.u.col(i));
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A0[i] + A0[i].transpose()));
        cmin = std::min(cmin, es.eigenvalues().minCoeff());
        cmax = std::max(cmax, es.eigenvalues().maxCoeff());
    }
    const double h = grid.h();
    double total = 0.0;
    detail::for_each_derivative(v, h, s, [&](const ChannelField& g) {
        for (int k = 0; k <= g.K; ++k) {
            const double w = (k == 0) ? 1.0 : 2.0;
            double acc = 0.0;
            for (int i = 0; i < N; ++i)
                acc += (g.modes[k].col(i).adjoint() * (A0[i] * g.modes[k].col(i))).real()(0);
            total += w * acc;
        }
    });
    EnergyValue out;
    out.value = 0.5 * 2.0 * pi * h * total;
    out.c_equiv = 0.5 * cmin;
    out.C_equiv = 0.5 * cmax;
    return out;
}

// discrete H^s norm with weight e^{eta (1+x1^2)^{1/2}}
inline double weighted_norm(const ChannelField& v, double eta, int s,
                            const DiscretizationGrid& grid) {
    if (eta < 0.0) throw InvalidInput("weighted_norm requires eta >= 0");
    const double wmax = std::exp(eta * std::sqrt(1.0 + grid.L * grid.L));
    if (wmax > 1e8) throw WeightOverflow("boundary weight " + std::to_string(wmax));
    const double h = grid.h();
    Vec w(grid.N1);
    for (int i = 0; i < grid.N1; ++i)
        w[i] = std::exp(2.0 * eta * std::sqrt(1.0 + grid.x1(i) * grid.x1(i)));
    double sum = 0.0;
    detail::for_each_derivative(v, h, s, [&](const ChannelField& g) {
        for (int k = 0; k <= g.K; ++k) {
            const double mw = (k == 0) ? 1.0 : 2.0;
            for (int i = 0; i < grid.N1; ++i)
                sum += mw * w[i] * g.modes[k].col(i).squaredNorm();
        }
    });
    return std::sqrt(2.0 * pi * h * sum);
}

inline double weighted_norm(const Vec& f, double eta, int s, const DiscretizationGrid& grid) {
    if (eta < 0.0) throw InvalidInput("weighted_norm requires eta >= 0");
    const double wmax = std::exp(eta * std::sqrt(1.0 + grid.L * grid.L));
    if (wmax > 1e8) throw WeightOverflow("boundary weight " + std::to_string(wmax));
    const double h = grid.h();
    std::vector<Vec> ders{f};
    for (int a = 1; a <= s; ++a) {
        const Vec& p = ders.back();
        Vec d(p.size());
        const int N = int(p.size());
        for (int i = 1; i + 1 < N; ++i) d[i] = (p[i + 1] - p[i - 1]) / (2.0 * h);
        d[0] = (p[1] - p[0]) / h;
        d[N - 1] = (p[N - 1] - p[N - 2]) / h;
        ders.push_back(d);
    }
    double sum = 0.0;
    for (const Vec& g : ders)
        for (int i = 0; i < grid.N1; ++i)
            sum += std::exp(2.0 * eta * std::sqrt(1.0 + grid.x1(i) * grid.x1(i))) * g[i] * g[i];
    return std::sqrt(h * sum);
}

struct LinearizationError {
    double err = 0.0;
    double en_bound_ratio = 0.0;  // err / ||v0||^2
};

inline LinearizationError linearization_error(const RhsContext& ctx, const ChannelField& v0,
                                              double T, int s, const EvolveOptions& opts = {}) {
    const ChannelField nl = evolve(ctx, v0, T, opts);
    const ChannelField li = evolve_linearized(ctx, v0, T, opts);
    LinearizationError out;
    out.err = sobolev_norm(nl - li, s, ctx.h());
    const double n0 = sobolev_norm(v0, s, ctx.h());
    out.en_bound_ratio = n0 > 0.0 ? out.err / (n0 * n0) : 0.0;
    return out;
}

}  // namespace o2hopf::pde
