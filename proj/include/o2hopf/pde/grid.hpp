#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "o2hopf/common.hpp"

namespace o2hopf::pde {

// Truncated channel grid: uniform finite differences on x1 in [-L, L],
// Fourier modes k in [-K, K] on the 2pi-periodic x2 direction.
struct DiscretizationGrid {
    double L = 12.0;
    int N1 = 257;
    int K = 4;
    double dt = 0.01;

    double h() const { return 2.0 * L / (N1 - 1); }
    double x1(int i) const { return -L + i * h(); }
    Vec x1_nodes() const {
        Vec x(N1);
        for (int i = 0; i < N1; ++i) x[i] = x1(i);
        return x;
    }
    int quad_points() const { return 4 * (K + 1); }

    void validate() const {
        if (!(L > 0.0) || N1 < 64 || K < 4 || !(dt > 0.0))
            throw InvalidInput("grid requires L > 0, N1 >= 64, K >= 4, dt > 0");
    }
};

// Real n-component field stored as one-sided x2-Fourier coefficients
// v_hat_k(x1), 0 <= k <= K, with v_hat_{-k} = conj(v_hat_k); mode 0 is real.
struct ChannelField {
    int n = 0, N1 = 0, K = 0;
    std::vector<CMat> modes;  // K+1 entries, each n x N1

    ChannelField() = default;
    ChannelField(int n_, const DiscretizationGrid& g) : n(n_), N1(g.N1), K(g.K) {
        modes.assign(K + 1, CMat::Zero(n, N1));
    }

    bool compatible(const ChannelField& o) const {
        return n == o.n && N1 == o.N1 && K == o.K;
    }

    void set_zero() {
        for (auto& m : modes) m.setZero();
    }

    // mode 0 of a real field carries no imaginary part
    void enforce_reality() { modes[0] = modes[0].real().cast<Complex>(); }

    double max_abs() const {
        double m = 0.0;
        for (const auto& c : modes) m = std::max(m, c.cwiseAbs().maxCoeff());
        return m;
    }

    ChannelField& operator+=(const ChannelField& o) {
        for (int k = 0; k <= K; ++k) modes[k] += o.modes[k];
        return *this;
    }
    ChannelField& operator-=(const ChannelField& o) {
        for (int k = 0; k <= K; ++k) modes[k] -= o.modes[k];
        return *this;
    }
    ChannelField& operator*=(double s) {
        for (auto& m : modes) m *= s;
        return *this;
    }
    friend ChannelField operator+(ChannelField a, const ChannelField& b) { return a += b; }
    friend ChannelField operator-(ChannelField a, const ChannelField& b) { return a -= b; }
    friend ChannelField operator*(double s, ChannelField a) { return a *= s; }
};

// discrete L^2(channel) pairing of real fields
inline double dot(const ChannelField& a, const ChannelField& b, double h) {
    double s = 0.0;
    for (int k = 0; k <= a.K; ++k) {
        const double w = (k == 0) ? 1.0 : 2.0;
        s += w * a.modes[k].cwiseProduct(b.modes[k].conjugate()).real().sum();
    }
    return 2.0 * pi * h * s;
}

inline double l2_norm(const ChannelField& a, double h) { return std::sqrt(dot(a, a, h)); }

// x2-translation R(theta): coefficient phase shift e^{ik theta}
inline ChannelField rotate(const ChannelField& f, double theta) {
    ChannelField out = f;
    for (int k = 1; k <= f.K; ++k) out.modes[k] *= std::exp(Complex(0.0, k * theta));
    return out;
}

// reflection S: x2 -> -x2 composed with the model's matrix M
inline ChannelField reflect(const ChannelField& f, const Mat& M) {
    ChannelField out = f;
    for (int k = 0; k <= f.K; ++k) out.modes[k] = M * f.modes[k].conjugate();
    out.enforce_reality();
    return out;
}

// rotation generator G = d/dtheta R(theta)|_0
inline ChannelField rotation_generator(const ChannelField& f) {
    ChannelField out = f;
    out.modes[0].setZero();
    for (int k = 1; k <= f.K; ++k) out.modes[k] = Complex(0.0, double(k)) * f.modes[k];
    return out;
}

inline ChannelField random_field(int n, const DiscretizationGrid& g, std::mt19937_64& rng,
                                 double amplitude = 1.0) {
    std::normal_distribution<double> d(0.0, 1.0);
    ChannelField f(n, g);
    for (int k = 0; k <= g.K; ++k)
        for (int c = 0; c < n; ++c)
            for (int i = 1; i + 1 < g.N1; ++i) {
                // x1-localized so Dirichlet truncation stays benign
                const double bump = std::exp(-0.08 * g.x1(i) * g.x1(i));
                f.modes[k](c, i) =
                    amplitude * bump *
                    (k == 0 ? Complex(d(rng), 0.0) : Complex(d(rng), d(rng)));
            }
    f.enforce_reality();
    return f;
}

// Dense synthesis/analysis between modal coefficients and an x2 quadrature
// grid; sized for alias-free cubic products of band-limited fields.
struct SpectralTransform {
    int K = 0, NQ = 0;
    CMat synth;     // NQ x (K+1), synth(j,k) = e^{i k theta_j}
    CMat analysis;  // (K+1) x NQ, analysis(k,j) = e^{-i k theta_j} / NQ

    explicit SpectralTransform(const DiscretizationGrid& g) : K(g.K), NQ(g.quad_points()) {
        synth.resize(NQ, K + 1);
        analysis.resize(K + 1, NQ);
        for (int j = 0; j < NQ; ++j) {
            const double th = 2.0 * pi * j / NQ;
            for (int k = 0; k <= K; ++k) {
                synth(j, k) = std::exp(Complex(0.0, k * th));
                analysis(k, j) = std::exp(Complex(0.0, -k * th)) / double(NQ);
            }
        }
    }

    // physical values at one x1 column: U(c, j) over quadrature nodes j
    Mat to_physical(const ChannelField& f, int i) const {
        CMat acc = CMat::Zero(f.n, NQ);
        for (int k = 0; k <= K; ++k) {
            const double w = (k == 0) ? 1.0 : 2.0;
            for (int j = 0; j < NQ; ++j)
                acc.col(j) += w * 0.5 *
                              (f.modes[k].col(i) * synth(j, k) +
                               f.modes[k].col(i).conjugate() * std::conj(synth(j, k)));
        }
        return acc.real();
    }

    void to_modal(const Mat& U, ChannelField& f, int i) const {
        for (int k = 0; k <= K; ++k) {
            CVec ck = CVec::Zero(f.n);
            for (int j = 0; j < NQ; ++j) ck += U.col(j) * analysis(k, j);
            f.modes[k].col(i) = ck;
        }
    }
};

}  // namespace o2hopf::pde
